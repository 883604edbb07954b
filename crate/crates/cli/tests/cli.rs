use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn ceeat(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ceeat"));
    cmd.args(args).env_remove("CEEAT_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("CEEAT_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn data_lines(path: &Path) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn example4site_reproduces_the_three_rates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("o");
    let r = ceeat(&["example4site", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = fs::read_to_string(out.join("example4site.csv")).unwrap();
    assert!(text.starts_with("# energies in gamma0, times in 1/gamma0\n"));
    let rows = data_lines(&out.join("example4site.csv"));
    let got: Vec<(f64, f64)> = rows.iter().map(|r| (r[4].parse().unwrap(), r[5].parse().unwrap())).collect();
    for ((c, o), want) in got.iter().zip([4.0, 6.0, 0.0]) {
        assert!((c - want).abs() <= 1e-12 && (o - want).abs() <= 1e-12, "{got:?}");
    }
    assert_eq!(got.len(), 3);
}

#[test]
fn manifest_checksums_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\nkind = \"spin\"\nn_sites = 4\n");
    let out = dir.path().join("o");
    let r = ceeat(&["ladder", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert!(r.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_object().unwrap();
    assert_eq!(files.len(), 5);
    for (name, sum) in files {
        let bytes = fs::read(out.join(name)).unwrap();
        assert_eq!(sum.as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    assert_eq!(manifest["config"]["params"]["n_sites"], 4);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn table1_is_self_checking() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = \"table1\"\n[params]\nmax_spin_sites = 4\nmax_ho_sites = 3\n");
    let out = dir.path().join("o");
    let r = ceeat(&["table1", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let rows = data_lines(&out.join("table1.csv"));
    assert!(rows.len() > 1000);
    for kinds in [("spin", "spin"), ("spin", "ho"), ("ho", "spin"), ("ho", "ho")] {
        assert!(rows.iter().any(|r| r[0] == "ST" && r[1].starts_with(kinds.0) && r[3].starts_with(kinds.1)));
    }
    assert!(rows.iter().all(|r| r[7].parse::<f64>().unwrap() < 1e-9));
}

#[test]
fn spin_ladder_has_interior_peak() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\nkind = \"spin\"\nn_sites = 8\ninitial_levels = [8, 3]\n");
    let out = dir.path().join("o");
    assert!(ceeat(&["ladder", "--config", &cfg, "--out", out.to_str().unwrap()], None).status.success());
    let rows = data_lines(&out.join("ladder_spin_N8_m8.csv"));
    assert_eq!(rows[0].len(), 2 + 9);
    let gamma: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let argmax = (0..gamma.len()).max_by(|&a, &b| gamma[a].total_cmp(&gamma[b])).unwrap();
    assert!(argmax > 0 && argmax < gamma.len() - 1);
    let summary = data_lines(&out.join("ladder_spin_N8_summary.csv"));
    assert!(!summary[0][2].is_empty());
    assert!(summary[1][2].is_empty());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\nv_grid = [0.0]\nnoise_grid = [1.0]\nfoo = 3\n");
    let r = ceeat(&["noise-sweep", "--config", &cfg], None);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("foo") && err.contains("v_grid"), "{err}");

    let cfg = write_config(dir.path(), "[params]\nv_grid = [0.0]\nnoise_grid = [1.0]\ntau_c = -0.5\n");
    let r = ceeat(&["noise-sweep", "--config", &cfg], None);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("tau_c > 0"));

    let r = ceeat(&["no-such-thing", "--config", &cfg], None);
    assert_eq!(r.status.code(), Some(1));
    let r = ceeat(&["table1", "--config", "/nonexistent/run.toml"], None);
    assert_eq!(r.status.code(), Some(1));
    let r = ceeat(&["table1"], None);
    assert_eq!(r.status.code(), Some(1));
    let r = ceeat(&["--help"], None);
    assert_eq!(r.status.code(), Some(0));
}

#[test]
fn environment_supplies_default_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("from-env");
    let r = ceeat(&["example4site", "--config", &cfg], Some(&out));
    assert!(r.status.success());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn reruns_and_worker_counts_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "seed = 5\n[params]\nv_grid = [0.0, 3.0]\nnoise_grid = [0.5, 2.0]\nn_traj = 12\n",
    );
    let mut outputs = Vec::new();
    for (tag, workers) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let out = dir.path().join(tag);
        let r = ceeat(&["noise-sweep", "--config", &cfg, "--workers", workers, "--out", out.to_str().unwrap()], None);
        assert!(r.status.success());
        outputs.push((
            fs::read(out.join("noise_sweep.csv")).unwrap(),
            fs::read(out.join("noise_sweep.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let other = dir.path().join("d");
    assert!(ceeat(&["noise-sweep", "--config", &cfg, "--seed", "6", "--out", other.to_str().unwrap()], None)
        .status
        .success());
    assert_ne!(fs::read(other.join("noise_sweep.csv")).unwrap(), outputs[0].0);
}

#[test]
fn sweep_sidecar_records_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 3\n[params]\nv_grid = [0.0, 1.0]\nlambda_grid = [0.0, 1.0]\nn_realizations = 5\n");
    let out = dir.path().join("o");
    assert!(ceeat(&["disorder-pr", "--config", &cfg, "--out", out.to_str().unwrap()], None).status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("disorder_pr.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["n_realizations"], 5);
    assert_eq!(meta["V"], serde_json::json!([0.0, 1.0]));
    let rows = data_lines(&out.join("disorder_pr.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][4], "5");
}

#[test]
fn anharmonic_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\nu_grid = [0.0, 1.0, 10000.0]\n");
    let out = dir.path().join("o");
    assert!(ceeat(&["anharmonic", "--config", &cfg, "--out", out.to_str().unwrap()], None).status.success());
    let rows = data_lines(&out.join("anharmonic.csv"));
    let rate: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((rate[0] - 8.0).abs() < 1e-9);
    assert!(rate[1] < rate[0] && rate[2] < rate[1]);
    assert!((rate[2] - 6.0).abs() < 0.06);
}
