//! End-to-end verb tests on small workloads.

use sglab_cli::commands;
use sglab_cli::config::parse_config;
use std::path::Path;
use std::process::Command;

fn config_with(dir: &Path, extra: &[&str]) -> sglab_cli::config::ExperimentConfig {
    let mut overrides = vec![format!("output.dir={}", dir.display())];
    overrides.extend(extra.iter().map(|s| s.to_string()));
    parse_config(None, &overrides).unwrap()
}

#[test]
fn eval_writes_documented_file_set_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let args = ["sampler.n=4000", "sampler.kind=sde", "sampler.steps=60", "seed=3"];
    let config = config_with(&dir, &args);
    commands::cmd_eval(&config).unwrap();
    for name in ["metrics.csv", "samples.csv", "run.json", "fig_density.svg"] {
        assert!(dir.join(name).exists(), "missing {name}");
    }
    let metrics1 = std::fs::read(dir.join("metrics.csv")).unwrap();
    let samples1 = std::fs::read(dir.join("samples.csv")).unwrap();

    // deterministic rerun: byte-identical CSVs
    commands::cmd_eval(&config).unwrap();
    assert_eq!(metrics1, std::fs::read(dir.join("metrics.csv")).unwrap());
    assert_eq!(samples1, std::fs::read(dir.join("samples.csv")).unwrap());
}

#[test]
fn train_then_learned_sampling() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("train");
    let config = config_with(
        &dir,
        &["train.steps=300", "train.batch=64", "train.hidden=32,32", "sampler.n=500"],
    );
    // learned sampling before training reports the missing checkpoint
    let missing = config_with(
        &dir,
        &["sampler.field=learned", "sampler.n=100"],
    );
    let err = commands::cmd_sample(&missing).unwrap_err().to_string();
    assert!(err.contains("missing checkpoint"), "{err}");

    commands::cmd_train(&config).unwrap();
    assert!(dir.join("checkpoint.sglab").exists());
    let trace = std::fs::read_to_string(dir.join("loss_trace.csv")).unwrap();
    assert!(trace.starts_with("step,loss\n"));
    assert!(trace.lines().count() > 3);

    let sample_config = config_with(
        &dir,
        &["sampler.field=learned", "sampler.n=500", "sampler.kind=ddim", "sampler.steps=20"],
    );
    commands::cmd_sample(&sample_config).unwrap();
    let samples = std::fs::read_to_string(dir.join("samples.csv")).unwrap();
    assert_eq!(samples.lines().next(), Some("x0"));
    assert_eq!(samples.lines().count(), 501);
}

#[test]
fn sweep_emits_combined_csv_with_decreasing_snapshot_valley() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sweep");
    let config = config_with(
        &dir,
        &[
            "schedule.beta_max=5",
            "sampler.n=20000",
            "sampler.kind=sde",
            "sampler.steps=120",
            "sampler.snapshots=0.38",
            "sweep.omegas=0,1,2,3",
            "sweep.shifts=200",
        ],
    );
    commands::cmd_sweep(&config).unwrap();
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "omega");
    assert_eq!(header[1], "shift");
    let col = header
        .iter()
        .position(|c| *c == "valley_mass_snapshot")
        .expect("snapshot valley metric present");
    let masses: Vec<f64> = lines
        .map(|l| l.split(',').nth(col).unwrap().parse::<f64>().unwrap())
        .collect();
    assert_eq!(masses.len(), 4);
    for w in masses.windows(2) {
        assert!(w[1] < w[0], "valley mass must strictly decrease over omega: {masses:?}");
    }
    // per-point directories carry the full report
    assert!(dir.join("sweep/omega_0_shift_200/metrics.csv").exists());
}

#[test]
fn oracle_writes_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("oracle");
    let config = config_with(
        &dir,
        &[
            "sampler.kind=sde",
            "sampler.steps=40",
            "guidance.omega_sg=1",
            "eval.fp_resolution=200",
        ],
    );
    commands::cmd_oracle(&config).unwrap();
    let text = std::fs::read_to_string(dir.join("fp_grid.csv")).unwrap();
    assert!(text.starts_with("axis0,"));
    assert!(text.lines().count() >= 2);
}

#[test]
fn figures_emit_exactly_the_documented_set() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("figs");
    let config = config_with(&dir, &["schedule.beta_max=5"]);
    commands::cmd_figures(&config).unwrap();
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, vec!["fig_sg_prev.svg", "fig_two_mode.svg", "run.json"]);
}

#[test]
fn binary_reports_config_errors() {
    let exe = env!("CARGO_BIN_EXE_sglab");
    let out = Command::new(exe)
        .args(["eval", "-s", "definitely.not.a.key=1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown key"), "{stderr}");
}

#[test]
fn binary_runs_small_eval() {
    let exe = env!("CARGO_BIN_EXE_sglab");
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(exe)
        .args([
            "eval",
            "-s",
            &format!("output.dir={}", tmp.path().join("o").display()),
            "-s",
            "sampler.n=1000",
            "-s",
            "sampler.steps=30",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("tv_distance"), "{stdout}");
}

#[test]
fn output_root_environment_override() {
    // resolved lazily; keep this test single-threaded-safe by computing the
    // path directly rather than mutating the process environment
    let config = parse_config(None, &["output.dir=rel/path".into()]).unwrap();
    let plain = commands::output_dir(&config);
    assert!(plain.ends_with("rel/path"));
}
