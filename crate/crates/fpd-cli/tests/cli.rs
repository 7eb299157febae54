//! End-to-end tests of the fpd binary: artifact generation, exit codes,
//! config handling, and byte determinism of the outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fpd_cli::config::{dump_config, load_config};

const REFERENCE_TOML: &str = r#"
[divider]
f0_hz = 2.6e9
fbw = 0.03
n_way = 3
order = 3
z0 = 50.0
ripple_db = 0.04321

[grid]
start_hz = 2.4e9
stop_hz = 2.8e9
points = 501

[outputs]
touchstone = true
csv = true
svg = true
metrics = true
netlist = true
plan = true
stem = "divider"
"#;

fn fpd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fpd"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn synth_writes_plan_and_netlist() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", REFERENCE_TOML);
    let out = fpd()
        .args(["--out-dir"])
        .arg(dir.path())
        .arg("synth")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("M trunk       0.017870"), "{text}");
    assert!(text.contains("Qe in / out   28.38611"), "{text}");

    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("divider.plan.json")).unwrap())
            .unwrap();
    assert_eq!(plan["plan"]["m_chain"].as_array().unwrap().len(), 2);
    assert_eq!(plan["g_values"].as_array().unwrap().len(), 5);

    let netlist = std::fs::read_to_string(dir.path().join("divider.cir")).unwrap();
    assert!(netlist.lines().any(|l| l.starts_with("P 8")));
}

#[test]
fn sweep_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", REFERENCE_TOML);
    let run = || {
        let out = fpd()
            .arg("--out-dir")
            .arg(dir.path())
            .arg("sweep")
            .arg("--config")
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
        out
    };
    let first = run();
    assert!(stdout_of(&first).contains("worst in-band RL   20.0"));

    let snp = std::fs::read(dir.path().join("divider.s4p")).unwrap();
    let csv = std::fs::read(dir.path().join("divider.csv")).unwrap();
    let svg = std::fs::read(dir.path().join("divider.svg")).unwrap();
    let metrics = std::fs::read(dir.path().join("divider.metrics.json")).unwrap();

    run();
    assert_eq!(snp, std::fs::read(dir.path().join("divider.s4p")).unwrap());
    assert_eq!(csv, std::fs::read(dir.path().join("divider.csv")).unwrap());
    assert_eq!(svg, std::fs::read(dir.path().join("divider.svg")).unwrap());
    assert_eq!(
        metrics,
        std::fs::read(dir.path().join("divider.metrics.json")).unwrap()
    );

    let sweep = fpd_core::io::touchstone::read(&dir.path().join("divider.s4p")).unwrap();
    assert_eq!(sweep.n_ports(), 4);
    assert_eq!(sweep.len(), 501);
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("artifacts");
    let cfg = write_config(dir.path(), "run.toml", REFERENCE_TOML);
    let out = fpd()
        .env("FPD_OUT_DIR", &out_dir)
        .arg("synth")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(out_dir.join("divider.plan.json").exists());
}

#[test]
fn mna_sweep_matches_matrix_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", REFERENCE_TOML);
    for sub in ["sweep", "mna"] {
        let out = fpd()
            .arg("--out-dir")
            .arg(dir.path())
            .arg(sub)
            .arg("--config")
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    }
    let a = fpd_core::io::touchstone::read(&dir.path().join("divider.s4p")).unwrap();
    let b = fpd_core::io::touchstone::read(&dir.path().join("divider-mna.s4p")).unwrap();
    assert_eq!(a.len(), b.len());
    let mut dmax = 0.0f64;
    for idx in 0..a.len() {
        for (x, y) in a.s[idx].iter().zip(b.s[idx].iter()) {
            dmax = dmax.max((x - y).norm());
        }
    }
    // Engine agreement is ~1e-14; the Touchstone files quantize at ~5e-9.
    assert!(dmax <= 2e-8, "max |dS| between models = {dmax:.3e}");
}

#[test]
fn report_passes_on_reference_and_fails_on_coarse_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", REFERENCE_TOML);
    let out = fpd()
        .args(["report", "--strict", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("[theory: reproduced]"), "{text}");
    assert!(text.contains("[measured: reference-only]"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");

    // 41 points cannot resolve the outer reflection zeros below -40 dB, so
    // the zero-count row fails and --strict exits 4.
    let coarse = write_config(
        dir.path(),
        "coarse.toml",
        &REFERENCE_TOML.replace("points = 501", "points = 41"),
    );
    let out = fpd()
        .args(["report", "--strict", "--config"])
        .arg(&coarse)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("FAIL"));

    // Without --strict the same run reports the miss but exits 0.
    let out = fpd()
        .args(["report", "--config"])
        .arg(&coarse)
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn config_errors_exit_2_and_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();

    let unknown = write_config(
        dir.path(),
        "unknown.toml",
        &format!("{REFERENCE_TOML}\n[bogus]\nx = 1\n"),
    );
    let out = fpd().args(["synth", "--config"]).arg(&unknown).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("bogus"), "{}", stderr_of(&out));

    let inverted = write_config(
        dir.path(),
        "inverted.toml",
        &REFERENCE_TOML.replace("stop_hz = 2.8e9", "stop_hz = 2.3e9"),
    );
    let out = fpd().args(["synth", "--config"]).arg(&inverted).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("grid.start_hz"),
        "{}",
        stderr_of(&out)
    );

    let missing = write_config(
        dir.path(),
        "missing.toml",
        &REFERENCE_TOML.replace("fbw = 0.03\n", ""),
    );
    let out = fpd().args(["synth", "--config"]).arg(&missing).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("fbw"), "{}", stderr_of(&out));

    let out = fpd()
        .args(["synth", "--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_config_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = write_config(dir.path(), "run.toml", REFERENCE_TOML);
    let cfg = load_config(&toml_path).unwrap();
    let json_path = dir.path().join("run.json");
    std::fs::write(&json_path, dump_config(&cfg, &json_path).unwrap()).unwrap();

    let out = fpd()
        .arg("--out-dir")
        .arg(dir.path())
        .arg("synth")
        .arg("--config")
        .arg(&json_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("M trunk       0.017870"));
}

#[test]
fn config_round_trip_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "run.toml",
        &format!("{REFERENCE_TOML}\n[loss]\nunloaded_q = 1200.0\n\n[refine]\nenabled = false\n"),
    );
    let first = load_config(&path).unwrap();

    let toml_path = dir.path().join("dumped.toml");
    std::fs::write(&toml_path, dump_config(&first, &toml_path).unwrap()).unwrap();
    assert_eq!(load_config(&toml_path).unwrap(), first);

    let json_path = dir.path().join("dumped.json");
    std::fs::write(&json_path, dump_config(&first, &json_path).unwrap()).unwrap();
    assert_eq!(load_config(&json_path).unwrap(), first);
}

#[test]
fn synth_refine_reports_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", REFERENCE_TOML);
    let out = fpd()
        .arg("--out-dir")
        .arg(dir.path())
        .args(["synth", "--refine", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("refinement"), "{}", stdout_of(&out));

    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("divider.plan.json")).unwrap())
            .unwrap();
    assert!(plan["refinement"]["worst_rl_after_db"].as_f64().unwrap() >= 20.0);
}

#[test]
fn microstrip_runs_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpd()
        .arg("--out-dir")
        .arg(dir.path())
        .args(["microstrip", "--z0", "25"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("z0         25.000 ohm"), "{text}");
    assert!(text.contains("eps_r = 10.70"), "{text}");
}

#[test]
fn export_converts_touchstone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", REFERENCE_TOML);
    let out = fpd()
        .arg("--out-dir")
        .arg(dir.path())
        .args(["sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());

    let snp = dir.path().join("divider.s4p");
    let out = fpd()
        .args(["export", "--input"])
        .arg(&snp)
        .arg("--csv")
        .arg(dir.path().join("out.csv"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(csv.starts_with("f_Hz,"));

    // No output selected is a usage error.
    let out = fpd().args(["export", "--input"]).arg(&snp).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grid_and_loss_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", REFERENCE_TOML);
    let out = fpd()
        .arg("--out-dir")
        .arg(dir.path())
        .args(["sweep", "--points", "101", "--unloaded-q", "1200", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("swept 101 points"), "{text}");

    let sweep = fpd_core::io::touchstone::read(&dir.path().join("divider.s4p")).unwrap();
    assert_eq!(sweep.len(), 101);
    // Loss pushes the center insertion loss visibly above the 4.771 dB floor.
    let idx0 = sweep.nearest_index(2.6e9);
    let il = -sweep.s_db(idx0, 1, 0);
    assert!(il > 4.9, "lossy IL at f0 = {il}");
}
