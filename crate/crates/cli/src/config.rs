//! Run configuration.
//!
//! ```toml
//! experiment = "noise-sweep"   # optional, must match the command line
//! seed = 7                     # default 0
//! workers = 4                  # default: all cores
//! output_dir = "out"           # default: $CEEAT_OUT_DIR, then ./ceeat-out
//!
//! [params]                     # keys depend on the experiment
//! v_grid = [0.0, 10.0, 50.0]
//! noise_grid = [0.1, 5.0]
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const OUT_DIR_ENV: &str = "CEEAT_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "ceeat-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Table1,
    Example4site,
    Ladder,
    NoiseSweep,
    DisorderPr,
    Anharmonic,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentKind::Table1 => "table1",
            ExperimentKind::Example4site => "example4site",
            ExperimentKind::Ladder => "ladder",
            ExperimentKind::NoiseSweep => "noise-sweep",
            ExperimentKind::DisorderPr => "disorder-pr",
            ExperimentKind::Anharmonic => "anharmonic",
        };
        f.write_str(s)
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        <Self as clap::ValueEnum>::from_str(s, false)
            .map_err(|_| CliError::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Params {
    #[serde(default = "four")]
    pub max_spin_sites: usize,
    #[serde(default = "four")]
    pub max_ho_sites: usize,
    #[serde(default = "four")]
    pub max_bright: usize,
    #[serde(default = "two")]
    pub max_dark: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example4siteParams {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderKind {
    Spin,
    Ho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderParams {
    pub kind: LadderKind,
    pub n_sites: usize,
    /// Defaults to every level for spins and `1..=4` for oscillators.
    #[serde(default)]
    pub initial_levels: Vec<usize>,
    /// Defaults to `N` for spins and `4 * max(initial_levels)` for oscillators.
    #[serde(default)]
    pub max_level: Option<usize>,
    #[serde(default = "one")]
    pub t_final: f64,
    #[serde(default = "default_ladder_steps")]
    pub n_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseAxis {
    /// Second axis is `Lambda`, `tau_c` fixed.
    Lambda,
    /// Second axis is `1/tau_c`, `amplitude` fixed.
    InvTauC,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSweepParams {
    #[serde(default = "four_sites")]
    pub n_sites: usize,
    /// Defaults to half filling.
    #[serde(default)]
    pub excitations: Option<usize>,
    #[serde(default = "default_axis")]
    pub mode: NoiseAxis,
    pub v_grid: Vec<f64>,
    pub noise_grid: Vec<f64>,
    #[serde(default = "default_tau_c")]
    pub tau_c: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default = "one")]
    pub t_final: f64,
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderPrParams {
    #[serde(default = "four_sites")]
    pub n_sites: usize,
    #[serde(default = "two")]
    pub excitations: usize,
    pub v_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnharmonicParams {
    #[serde(default = "four_sites")]
    pub n_sites: usize,
    #[serde(default = "two")]
    pub excitations: usize,
    pub u_grid: Vec<f64>,
}

fn one() -> f64 {
    1.0
}
fn two() -> usize {
    2
}
fn four() -> usize {
    4
}
fn four_sites() -> usize {
    4
}
fn default_tolerance() -> f64 {
    1e-9
}
fn default_ladder_steps() -> usize {
    400
}
fn default_axis() -> NoiseAxis {
    NoiseAxis::Lambda
}
fn default_tau_c() -> f64 {
    0.33
}
fn default_amplitude() -> f64 {
    5.0
}
fn default_n_traj() -> usize {
    200
}
fn default_realizations() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ExperimentParams {
    Table1(Table1Params),
    Example4site(Example4siteParams),
    Ladder(LadderParams),
    NoiseSweep(NoiseSweepParams),
    DisorderPr(DisorderPrParams),
    Anharmonic(AnharmonicParams),
}

/// Fully defaulted and range-checked run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub params: ExperimentParams,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<ExperimentKind>,
    #[serde(default)]
    seed: u64,
    workers: Option<usize>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    params: toml::Table,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

fn range(ok: bool, what: &str, got: impl fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("params: requires {what} (got {got})")))
    }
}

fn grid(values: &[f64], name: &str, non_negative: bool) -> Result<(), CliError> {
    range(!values.is_empty(), &format!("{name} non-empty"), "[]")?;
    for v in values {
        if non_negative {
            range(v.is_finite() && *v >= 0.0, &format!("{name} entries >= 0"), v)?;
        } else {
            range(v.is_finite(), &format!("{name} entries finite"), v)?;
        }
    }
    Ok(())
}

impl ExperimentParams {
    fn parse(kind: ExperimentKind, table: toml::Table) -> Result<Self, CliError> {
        let value = toml::Value::Table(table);
        let err = |e: toml::de::Error| CliError::Config(format!("[params] for {kind}: {}", e.message()));
        Ok(match kind {
            ExperimentKind::Table1 => ExperimentParams::Table1(value.try_into().map_err(err)?),
            ExperimentKind::Example4site => ExperimentParams::Example4site(value.try_into().map_err(err)?),
            ExperimentKind::Ladder => ExperimentParams::Ladder(value.try_into().map_err(err)?),
            ExperimentKind::NoiseSweep => ExperimentParams::NoiseSweep(value.try_into().map_err(err)?),
            ExperimentKind::DisorderPr => ExperimentParams::DisorderPr(value.try_into().map_err(err)?),
            ExperimentKind::Anharmonic => ExperimentParams::Anharmonic(value.try_into().map_err(err)?),
        })
    }

    fn fill_and_check(&mut self) -> Result<(), CliError> {
        match self {
            ExperimentParams::Table1(p) => {
                range(p.max_spin_sites >= 1, "max_spin_sites >= 1", p.max_spin_sites)?;
                range(p.max_spin_sites <= 8, "max_spin_sites <= 8", p.max_spin_sites)?;
                range(p.max_ho_sites >= 1, "max_ho_sites >= 1", p.max_ho_sites)?;
                range(p.max_ho_sites <= 5, "max_ho_sites <= 5", p.max_ho_sites)?;
                range(p.max_bright <= 6, "max_bright <= 6", p.max_bright)?;
                range(p.max_dark <= 3, "max_dark <= 3", p.max_dark)?;
                range(p.tolerance > 0.0, "tolerance > 0", p.tolerance)?;
            }
            ExperimentParams::Example4site(_) => {}
            ExperimentParams::Ladder(p) => {
                range(p.n_sites >= 1, "n_sites >= 1", p.n_sites)?;
                range(p.t_final > 0.0 && p.t_final.is_finite(), "t_final > 0", p.t_final)?;
                range(p.n_steps >= 1, "n_steps >= 1", p.n_steps)?;
                if p.initial_levels.is_empty() {
                    p.initial_levels = match p.kind {
                        LadderKind::Spin => (1..=p.n_sites).collect(),
                        LadderKind::Ho => (1..=4).collect(),
                    };
                }
                let top = *p.initial_levels.iter().max().expect("non-empty");
                let max_level = p.max_level.unwrap_or(match p.kind {
                    LadderKind::Spin => p.n_sites,
                    LadderKind::Ho => 4 * top,
                });
                if p.kind == LadderKind::Spin {
                    range(max_level <= p.n_sites, "max_level <= n_sites for spins", max_level)?;
                }
                range(top <= max_level, "initial_levels <= max_level", top)?;
                p.max_level = Some(max_level);
            }
            ExperimentParams::NoiseSweep(p) => {
                range(p.n_sites >= 1, "n_sites >= 1", p.n_sites)?;
                range(p.n_sites <= 10, "n_sites <= 10", p.n_sites)?;
                let m = *p.excitations.get_or_insert(p.n_sites / 2);
                range(m <= p.n_sites, "excitations <= n_sites", m)?;
                grid(&p.v_grid, "v_grid", false)?;
                grid(&p.noise_grid, "noise_grid", true)?;
                range(p.tau_c > 0.0, "tau_c > 0", p.tau_c)?;
                range(p.amplitude >= 0.0 && p.amplitude.is_finite(), "amplitude >= 0", p.amplitude)?;
                range(p.n_traj >= 1, "n_traj >= 1", p.n_traj)?;
                range(p.t_final > 0.0 && p.t_final.is_finite(), "t_final > 0", p.t_final)?;
                if let Some(dt) = p.dt {
                    range(dt > 0.0 && dt.is_finite(), "dt > 0", dt)?;
                }
            }
            ExperimentParams::DisorderPr(p) => {
                range(p.n_sites >= 1, "n_sites >= 1", p.n_sites)?;
                range(p.n_sites <= 12, "n_sites <= 12", p.n_sites)?;
                range(p.excitations <= p.n_sites, "excitations <= n_sites", p.excitations)?;
                grid(&p.v_grid, "v_grid", false)?;
                grid(&p.lambda_grid, "lambda_grid", true)?;
                range(p.n_realizations >= 1, "n_realizations >= 1", p.n_realizations)?;
            }
            ExperimentParams::Anharmonic(p) => {
                range(p.n_sites >= 1, "n_sites >= 1", p.n_sites)?;
                range(p.excitations >= 1, "excitations >= 1", p.excitations)?;
                range(p.n_sites <= 8 && p.excitations <= 6, "n_sites <= 8 and excitations <= 6", p.n_sites)?;
                grid(&p.u_grid, "u_grid", true)?;
            }
        }
        Ok(())
    }
}

/// Parse, default and range-check a config for `kind`.
pub fn validate_config(text: &str, kind: ExperimentKind, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(file_kind) = raw.experiment {
        if file_kind != kind {
            return Err(CliError::Config(format!(
                "config is for `{file_kind}` but `{kind}` was requested"
            )));
        }
    }
    let mut params = ExperimentParams::parse(kind, raw.params)?;
    params.fill_and_check()?;
    let workers = overrides
        .workers
        .or(raw.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Config("requires workers >= 1 (got 0)".into()));
    }
    let output_dir = overrides
        .output_dir
        .clone()
        .or(raw.output_dir)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Ok(ExperimentConfig {
        experiment: kind,
        seed: overrides.seed.unwrap_or(raw.seed),
        workers,
        output_dir,
        params,
    })
}
