//! Experiment dispatch.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use ceeat_core::cascade::{evolve_cascade, ladder_rates, peak_time};
use ceeat_core::dicke::{binomial_coefficient, spin_dicke_state};
use ceeat_core::fockspace::enumerate_sector;
use ceeat_core::rates::{
    anharmonic_sr_rate, closed_form_enhancement, emission_oracle, table_rows, Aggregate, Process,
    TableScope,
};
use ceeat_core::stochastic::{disorder_pr_scan, noise_sweep, SweepMode, SweepResult};
use ceeat_core::{SectorKind, SpinDickeLabel, StateVector, TrajectoryConfig};

use crate::config::{
    AnharmonicParams, DisorderPrParams, ExperimentConfig, ExperimentKind, ExperimentParams,
    LadderKind, LadderParams, NoiseAxis, NoiseSweepParams, Table1Params,
};
use crate::output::{write_atomic, OutputDir};
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub duration_seconds: f64,
    /// SHA-256 of each output file, keyed by file name.
    pub files: std::collections::BTreeMap<String, String>,
    /// Invariant violations found during the run; empty on success.
    pub failures: Vec<String>,
}

fn core(kind: ExperimentKind) -> impl Fn(ceeat_core::Error) -> CliError {
    move |source| CliError::Core {
        experiment: kind,
        source,
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

/// Run `config` inside a pool of `config.workers` threads, write all
/// outputs and then the manifest.
///
/// Returns `CliError::Invariant` after the manifest is written when a
/// self-check failed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", config.workers)))?;
    let mut out = OutputDir::create(&config.output_dir)?;
    let failures = pool.install(|| dispatch(config, &mut out))?;
    let manifest = RunManifest {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
        files: out.checksums().clone(),
        failures: failures.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(&out.root().join(MANIFEST), &bytes)?;
    if failures.is_empty() {
        Ok(manifest)
    } else {
        Err(CliError::Invariant(failures.join("; ")))
    }
}

fn dispatch(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    match &config.params {
        ExperimentParams::Table1(p) => table1(p, out),
        ExperimentParams::Example4site(_) => example4site(out),
        ExperimentParams::Ladder(p) => ladder(p, out),
        ExperimentParams::NoiseSweep(p) => noise(p, config.seed, out),
        ExperimentParams::DisorderPr(p) => disorder(p, config.seed, out),
        ExperimentParams::Anharmonic(p) => anharmonic(p, out),
    }
}

fn table1(p: &Table1Params, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let rows = table_rows(&TableScope {
        max_spin_sites: p.max_spin_sites,
        max_ho_sites: p.max_ho_sites,
        max_bright: p.max_bright,
        max_dark: p.max_dark,
    })
    .map_err(core(ExperimentKind::Table1))?;
    let header = [
        "process",
        "donor",
        "donor_index",
        "acceptor",
        "acceptor_index",
        "closed_form",
        "oracle",
        "abs_diff",
    ]
    .map(String::from);
    out.write_csv(
        "table1.csv",
        &header,
        rows.iter().map(|r| {
            vec![
                r.process.to_string(),
                r.donor.clone(),
                r.donor_index.to_string(),
                r.acceptor.clone(),
                r.acceptor_index.to_string(),
                num(r.closed_form),
                num(r.oracle),
                num(r.abs_diff),
            ]
        }),
    )?;
    let worst = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    let bad = rows.iter().filter(|r| r.abs_diff.is_nan() || r.abs_diff >= p.tolerance).count();
    Ok(if bad > 0 {
        vec![format!(
            "{bad} of {} table rows differ from the oracle by more than {:e} (worst {worst:e})",
            rows.len(),
            p.tolerance
        )]
    } else {
        vec![]
    })
}

fn example4site(out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let kind = ExperimentKind::Example4site;
    let e = core(kind);
    let bright1 = SpinDickeLabel::new(4, 4, 1).map_err(&e)?;
    let bright2 = SpinDickeLabel::new(4, 4, 2).map_err(&e)?;
    let alternating_label = SpinDickeLabel::new(4, 3, 1).map_err(&e)?;
    let sector = enumerate_sector(SectorKind::Spin, 4, 1, None).map_err(&e)?;
    let mut amps = vec![0.0; 4];
    for site in 0..4 {
        let mut config = vec![0u8; 4];
        config[site] = 1;
        let idx = sector.index_of(&config).expect("single excitation config");
        amps[idx] = if site % 2 == 0 { 0.5 } else { -0.5 };
    }
    let alternating = StateVector::from_real(sector, &amps).map_err(&e)?;
    let cases = [
        ("bright_one_excitation", bright1, spin_dicke_state(bright1, 0).map_err(&e)?, 4.0),
        ("bright_two_excitations", bright2, spin_dicke_state(bright2, 0).map_err(&e)?, 6.0),
        ("alternating_one_excitation", alternating_label, alternating, 0.0),
    ];
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for (name, label, state, expected) in cases {
        let closed = closed_form_enhancement(Process::SR, &Aggregate::Spin(label), &Aggregate::Field { photons: 0 })
            .map_err(&e)?
            .value();
        let oracle = emission_oracle(&state).map_err(&e)?.value();
        for (what, v) in [("closed form", closed), ("oracle", oracle)] {
            if (v - expected).abs() > 1e-12 {
                failures.push(format!("{name}: {what} gives {v}, expected {expected}"));
            }
        }
        rows.push(vec![
            name.to_string(),
            label.n_sites.to_string(),
            label.l.to_string(),
            label.m.to_string(),
            num(closed),
            num(oracle),
        ]);
    }
    let header = ["state", "n_sites", "l", "m", "closed_form", "oracle"].map(String::from);
    out.write_csv("example4site.csv", &header, rows)?;
    Ok(failures)
}

fn ladder(p: &LadderParams, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let e = core(ExperimentKind::Ladder);
    let (kind, tag) = match p.kind {
        LadderKind::Spin => (SectorKind::Spin, "spin"),
        LadderKind::Ho => (SectorKind::Ho, "ho"),
    };
    let max_level = p.max_level.expect("filled by validation");
    let spec = ladder_rates(kind, p.n_sites, max_level).map_err(&e)?;
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for &m0 in &p.initial_levels {
        let traj = evolve_cascade(&spec, m0, p.t_final, p.n_steps).map_err(&e)?;
        let drift = traj.conservation_error();
        if drift > 1e-8 {
            failures.push(format!("level {m0}: population drift {drift:e}"));
        }
        let mut header = vec!["t".to_string(), "gamma_over_gamma0".to_string()];
        header.extend((0..=max_level).map(|k| format!("p_{k}")));
        let rows = (0..traj.times.len()).map(|i| {
            let mut row = vec![num(traj.times[i]), num(traj.gamma[i])];
            row.extend(traj.populations[i].iter().map(|&x| num(x)));
            row
        });
        out.write_csv(&format!("ladder_{tag}_N{}_m{m0}.csv", p.n_sites), &header, rows)?;
        let peak = peak_time(&traj);
        summary.push(vec![
            m0.to_string(),
            num(traj.gamma[0]),
            peak.map(num).unwrap_or_default(),
            num(traj.gamma.iter().cloned().fold(f64::MIN, f64::max)),
        ]);
    }
    let header = ["initial_level", "gamma_initial", "peak_time", "gamma_max"].map(String::from);
    out.write_csv(&format!("ladder_{tag}_N{}_summary.csv", p.n_sites), &header, summary)?;
    Ok(failures)
}

fn write_sweep(out: &mut OutputDir, stem: &str, result: &SweepResult, extra: Value) -> Result<(), CliError> {
    let header = [
        result.axis1_name.clone(),
        result.axis2_name.clone(),
        "mean".into(),
        "stderr".into(),
        "n_traj".into(),
    ];
    out.write_csv(
        &format!("{stem}.csv"),
        &header,
        result
            .rows()
            .map(|(a, b, m, s, n)| vec![num(a), num(b), num(m), num(s), n.to_string()]),
    )?;
    let mut meta = result.metadata.clone();
    meta.insert("code_version".into(), json!(env!("CARGO_PKG_VERSION")));
    meta.insert(result.axis1_name.clone(), json!(result.axis1));
    meta.insert(result.axis2_name.clone(), json!(result.axis2));
    if let Value::Object(extra) = extra {
        meta.extend(extra);
    }
    out.write_json(&format!("{stem}.json"), &meta)?;
    Ok(())
}

fn noise(p: &NoiseSweepParams, seed: u64, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let e = core(ExperimentKind::NoiseSweep);
    let m = p.excitations.expect("filled by validation");
    let label = SpinDickeLabel::new(p.n_sites, p.n_sites, m).map_err(&e)?;
    let mode = match p.mode {
        NoiseAxis::Lambda => SweepMode::VVsLambda { tau_c: p.tau_c },
        NoiseAxis::InvTauC => SweepMode::VVsInvTauC {
            amplitude: p.amplitude,
        },
    };
    let cfg = TrajectoryConfig {
        n_trajectories: p.n_traj,
        t_final: p.t_final,
        dt: p.dt,
        seed,
    };
    let result = noise_sweep(mode, label, &p.v_grid, &p.noise_grid, &cfg).map_err(&e)?;
    let dt_rule = if p.dt.is_some() { "fixed" } else { "min(tau_c, 1/V, 1/Lambda, t_final)/20" };
    write_sweep(out, "noise_sweep", &result, json!({ "dt_rule": dt_rule, "dt": p.dt }))?;
    let cap = (m * (p.n_sites - m + 1)) as f64;
    let bad = result
        .mean
        .iter()
        .flatten()
        .filter(|x| !(**x >= -1e-9 && **x <= cap + 1e-9))
        .count();
    Ok(if bad > 0 {
        vec![format!("{bad} cells outside the Dicke bound [0, {cap}]")]
    } else {
        vec![]
    })
}

fn disorder(p: &DisorderPrParams, seed: u64, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let result = disorder_pr_scan(p.n_sites, p.excitations, &p.v_grid, &p.lambda_grid, p.n_realizations, seed)
        .map_err(core(ExperimentKind::DisorderPr))?;
    write_sweep(out, "disorder_pr", &result, json!({}))?;
    let cap = binomial_coefficient(p.n_sites, p.excitations) as f64;
    let bad = result
        .mean
        .iter()
        .flatten()
        .filter(|x| !(**x >= 1.0 - 1e-9 && **x <= cap + 1e-9))
        .count();
    Ok(if bad > 0 {
        vec![format!("{bad} cells with mean PR outside [1, {cap}]")]
    } else {
        vec![]
    })
}

fn anharmonic(p: &AnharmonicParams, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let e = core(ExperimentKind::Anharmonic);
    let (n, k) = (p.n_sites, p.excitations);
    let ho_limit = (n * k) as f64;
    let spin_limit = if k <= n { (k * (n - k + 1)) as f64 } else { 0.0 };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &u in &p.u_grid {
        let r = anharmonic_sr_rate(n, u, k).map_err(&e)?;
        if r.rate.value() > ho_limit + 1e-9 {
            failures.push(format!("U={u}: rate {} above the oscillator value {ho_limit}", r.rate));
        }
        rows.push(vec![
            num(u),
            num(r.rate.value()),
            r.eigen_index.to_string(),
            num(r.energy),
            num(spin_limit),
            num(ho_limit),
        ]);
    }
    let header = ["U_over_V", "rate", "eigen_index", "energy", "spin_limit", "ho_limit"].map(String::from);
    out.write_csv("anharmonic.csv", &header, rows)?;
    Ok(failures)
}
