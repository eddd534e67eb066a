//! End-to-end checks of the `gehm` binary: exit codes, output-directory
//! precedence, and the files each subcommand leaves behind.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gehm() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gehm"));
    // Isolate from the caller's environment; tests opt in explicitly.
    cmd.env_remove("GEHM_OUT_DIR");
    cmd
}

fn write_config(dir: &Path, out_dir: &Path) -> std::path::PathBuf {
    let path = dir.join("exp.toml");
    let body = format!(
        r#"
config_version = 1
replicates = 2

[graph]
n = 12
model = {{ barabasi_albert = {{ m = 2 }} }}

[sim]
p = 2.0
dt = 1e-3
horizon = 0.02
snapshot_stride = 5
seed = 42

[outputs]
dir = "{}"
"#,
        out_dir.display()
    );
    fs::write(&path, body).unwrap();
    path
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = gehm().output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn missing_config_file_exits_with_io_code() {
    let out = gehm()
        .args(["simulate", "/definitely/not/a/config.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "{}", stderr_of(&out));
}

#[test]
fn malformed_toml_exits_with_config_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "config_version = 1\n[graph\n").unwrap();
    let out = gehm()
        .arg("simulate")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("parse error"), "{}", stderr_of(&out));
}

#[test]
fn invalid_config_values_exit_with_config_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(
        &cfg,
        "config_version = 1\nreplicates = 0\n\n[graph]\nn = 12\nmodel = { barabasi_albert = { m = 2 } }\n",
    )
    .unwrap();
    let out = gehm().arg("simulate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("replicates"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn simulate_writes_the_report_tree() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("reports");
    let cfg = write_config(tmp.path(), &out_dir);
    let out = gehm().arg("simulate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    for name in ["manifest.json", "spectral.json", "regime.json", "summary.json"] {
        assert!(out_dir.join(name).is_file(), "missing {name}");
    }
    assert!(out_dir.join("replicate_001/trajectory.csv").is_file());
    assert!(out_dir.join("replicate_002/status.json").is_file());
    let text = stdout_of(&out);
    assert!(text.contains("regime:"), "{text}");
}

#[test]
fn out_flag_beats_env_var_and_config() {
    let tmp = TempDir::new().unwrap();
    let cfg_dir = tmp.path().join("from-config");
    let env_dir = tmp.path().join("from-env");
    let flag_dir = tmp.path().join("from-flag");
    let cfg = write_config(tmp.path(), &cfg_dir);

    let out = gehm()
        .arg("simulate")
        .arg(&cfg)
        .arg("--out")
        .arg(&flag_dir)
        .env("GEHM_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert!(flag_dir.join("summary.json").is_file());
    assert!(!env_dir.exists());
    assert!(!cfg_dir.exists());
}

#[test]
fn env_var_beats_config() {
    let tmp = TempDir::new().unwrap();
    let cfg_dir = tmp.path().join("from-config");
    let env_dir = tmp.path().join("from-env");
    let cfg = write_config(tmp.path(), &cfg_dir);

    let out = gehm()
        .arg("simulate")
        .arg(&cfg)
        .env("GEHM_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert!(env_dir.join("summary.json").is_file());
    assert!(!cfg_dir.exists());
}

#[test]
fn spectrum_reports_both_bases() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("spec");
    let cfg = write_config(tmp.path(), &out_dir);
    let out = gehm().arg("spectrum").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let body: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("spectral.json")).unwrap()).unwrap();
    assert!(body["primary"]["lambda_p"].is_number());
    assert!(body["gamma_raw_adjacency"]["rho"].is_number());
    assert!(body["gamma_normalized_w"]["rho"].is_number());
    let text = stdout_of(&out);
    assert!(text.contains("gamma[raw_adjacency]"), "{text}");
    assert!(text.contains("gamma[normalized_w]"), "{text}");
}

#[test]
fn unconverged_spectrum_exits_with_nonconvergence_code() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("spec");
    let cfg = tmp.path().join("exp.toml");
    fs::write(
        &cfg,
        format!(
            r#"
config_version = 1

[graph]
n = 12
model = {{ barabasi_albert = {{ m = 2 }} }}

[spectral]
tol = 1e-14
max_iter = 2

[outputs]
dir = "{}"
"#,
            out_dir.display()
        ),
    )
    .unwrap();
    let out = gehm().arg("spectrum").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("did not converge"),
        "{}",
        stderr_of(&out)
    );
    // Artifacts are still written so the run can be inspected.
    assert!(out_dir.join("spectral.json").is_file());
}

#[test]
fn regimes_accepts_negative_grid_values() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("reg");
    let cfg = write_config(tmp.path(), &out_dir);
    let out = gehm()
        .arg("regimes")
        .arg(&cfg)
        .args(["--cf-grid", "-1,0.5,3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = fs::read_to_string(out_dir.join("regime_scan.csv")).unwrap();
    let data_rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("c_f,"))
        .collect();
    assert_eq!(data_rows.len(), 3, "{csv}");
    assert!(data_rows[0].starts_with("-1,"), "{csv}");
}

#[test]
fn sweep_needs_a_declared_sweep() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("sw");
    let cfg = write_config(tmp.path(), &out_dir);
    let out = gehm().arg("sweep").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn sweep_writes_long_format_csv() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("sw");
    let cfg = tmp.path().join("exp.toml");
    fs::write(
        &cfg,
        format!(
            r#"
config_version = 1
replicates = 2

[graph]
n = 10
model = {{ erdos_renyi = {{ prob = 0.5 }} }}

[sim]
dt = 1e-3
horizon = 0.02
snapshot_stride = 5
seed = 42

[sweep]
param_x = {{ path = "sim.reaction.linear.c_f", grid = [0.5, 2.0] }}

[outputs]
dir = "{}"
"#,
            out_dir.display()
        ),
    )
    .unwrap();
    let out = gehm().arg("sweep").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "x,y,statistic,value"), "{csv}");
    // two cells x three statistics each
    let data = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("x,"))
        .count();
    assert_eq!(data, 6, "{csv}");
}

#[test]
fn topologies_writes_comparison_table() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("topo");
    let cfg = write_config(tmp.path(), &out_dir);
    let out = gehm()
        .arg("topologies")
        .arg(&cfg)
        .args(["--seeds", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = fs::read_to_string(out_dir.join("topologies.csv")).unwrap();
    for family in ["barabasi_albert", "erdos_renyi", "watts_strogatz"] {
        assert!(csv.contains(family), "{csv}");
    }
}

#[test]
fn graph_gen_and_validate_round_trip() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("ring.tsv");
    let out = gehm()
        .arg("graph")
        .arg("gen")
        .arg(&file)
        .args(["--model", "ws", "--n", "10", "--k", "4", "--seed", "7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert!(file.is_file());

    let out = gehm().arg("graph").arg("validate").arg(&file).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("n=10"), "{text}");
    assert!(text.contains("undirected_edges=20"), "{text}");
}

#[test]
fn graph_gen_er_without_prob_is_a_parameter_error() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("g.tsv");
    let out = gehm()
        .arg("graph")
        .arg("gen")
        .arg(&file)
        .args(["--model", "er", "--n", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(!file.exists());
}

#[test]
fn graph_validate_rejects_corrupt_files() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("bad.tsv");
    fs::write(&file, "this is not a graph\n").unwrap();
    let out = gehm().arg("graph").arg("validate").arg(&file).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("parse error"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let dir_a = tmp.path().join("a");
    let dir_b = tmp.path().join("b");
    let cfg = write_config(tmp.path(), tmp.path());

    for dir in [&dir_a, &dir_b] {
        let out = gehm()
            .arg("simulate")
            .arg(&cfg)
            .arg("--out")
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    }

    let traj_a = fs::read(dir_a.join("replicate_001/trajectory.csv")).unwrap();
    let traj_b = fs::read(dir_b.join("replicate_001/trajectory.csv")).unwrap();
    assert_eq!(traj_a, traj_b);
    let sum_a = fs::read(dir_a.join("summary.json")).unwrap();
    let sum_b = fs::read(dir_b.join("summary.json")).unwrap();
    assert_eq!(sum_a, sum_b);
}
