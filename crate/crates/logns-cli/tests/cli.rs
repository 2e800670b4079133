//! End-to-end tests of the `logns` binary: exit codes, output files,
//! determinism, and the environment-variable override.

use std::path::Path;
use std::process::{Command, Output};

fn logns() -> Command {
    Command::new(env!("CARGO_BIN_EXE_logns"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn small_groundstate_config() -> &'static str {
    "d = 1\n\
     n = 1\n\
     points_x = 64\n\
     points_y = 8\n\
     half_width = 12.0\n\
     theta_sq = 30.0\n\
     mu = 10.0\n\
     init = random\n\
     seed = 9\n\
     restarts = 2\n\
     tol = 1e-7\n\
     snapshot_out = state.lsf\n"
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary should launch")
}

#[test]
fn groundstate_happy_path_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "gs.cfg", small_groundstate_config());
    let out = tmp.path().join("run");
    let result = run(logns()
        .arg("groundstate")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out));
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    assert!(out.join("manifest.txt").is_file());
    assert!(out.join("groundstate.csv").is_file());
    assert!(out.join("energy_trace.csv").is_file());
    assert!(out.join("state.lsf").is_file());
    assert!(!out.join(".failed").exists());
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("command = groundstate"));
    assert!(manifest.contains("summary.converged = 1"));
    // The snapshot is a readable field.
    let field = logns::snapshot::read_field_snapshot(&out.join("state.lsf")).unwrap();
    assert_eq!(field.grid().points_x, 64);
}

#[test]
fn malformed_config_exits_one_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.cfg",
        "d = 1\nn = 1\npoints_x = 64\npoints_y = 8\ntheta = -3.0\n",
    );
    let out = tmp.path().join("never");
    let result = run(logns()
        .arg("groundstate")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out));
    assert_eq!(result.status.code(), Some(1));
    assert!(
        !out.exists(),
        "no outputs may be produced on validation errors"
    );
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let body = format!("{}mystery_knob = 3\n", small_groundstate_config());
    let cfg = write_config(tmp.path(), "unknown.cfg", &body);
    let result = run(logns()
        .arg("groundstate")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("x").as_os_str()));
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("mystery_knob"));
}

#[test]
fn exhausted_budget_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "hard.cfg",
        "d = 1\nn = 1\npoints_x = 64\npoints_y = 8\nhalf_width = 12.0\n\
         theta_sq = 30.0\nmu = 10.0\ninit = random\nseed = 9\nrestarts = 1\n\
         tol = 1e-15\nmax_steps = 2\n",
    );
    let out = tmp.path().join("run");
    let result = run(logns()
        .arg("groundstate")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out));
    assert_eq!(result.status.code(), Some(2));
    // The run still reports what it found.
    assert!(out.join("manifest.txt").is_file());
}

#[test]
fn repeated_runs_reproduce_csv_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "gs.cfg", small_groundstate_config());
    let out1 = tmp.path().join("run1");
    let out2 = tmp.path().join("run2");
    for out in [&out1, &out2] {
        let result = run(logns()
            .arg("groundstate")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(out));
        assert!(result.status.success());
    }
    for name in ["groundstate.csv", "energy_trace.csv"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} must be bytewise reproducible");
    }
    let a = std::fs::read(out1.join("state.lsf")).unwrap();
    let b = std::fs::read(out2.join("state.lsf")).unwrap();
    assert_eq!(a, b, "snapshots must be bytewise reproducible");
}

#[test]
fn env_var_overrides_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "gs.cfg", small_groundstate_config());
    let out = tmp.path().join("from_env");
    let result = run(logns()
        .arg("groundstate")
        .arg("--config")
        .arg(&cfg)
        .env("LOGNS_OUT", &out));
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    assert!(out.join("manifest.txt").is_file());
}

#[test]
fn evolve_consumes_groundstate_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "gs.cfg", small_groundstate_config());
    let gs_out = tmp.path().join("gs");
    assert!(run(logns()
        .arg("groundstate")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&gs_out))
    .status
    .success());

    let snapshot = gs_out.join("state.lsf");
    let ev_cfg = write_config(
        tmp.path(),
        "ev.cfg",
        &format!(
            "d = 1\nn = 1\npoints_x = 64\npoints_y = 8\nhalf_width = 12.0\n\
             init = file:{}\ndt = 1e-3\nsteps = 200\nrecord_every = 50\ndelta_pert = 1e-3\nseed = 4\n",
            snapshot.display()
        ),
    );
    let ev_out = tmp.path().join("ev");
    let result = run(logns()
        .arg("evolve")
        .arg("--config")
        .arg(&ev_cfg)
        .arg("--out")
        .arg(&ev_out));
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let trajectory = std::fs::read_to_string(ev_out.join("trajectory.csv")).unwrap();
    let mut lines = trajectory.lines();
    assert_eq!(lines.next().unwrap(), "t,mass,energy,orbdist,boundary_mass");
    assert_eq!(lines.count(), 5, "initial sample plus four recorded chunks");
}

#[test]
fn verify_scaling_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let result = run(logns()
        .arg("verify")
        .arg("--suite")
        .arg("scaling")
        .arg("--out")
        .arg(tmp.path().join("v").as_os_str()));
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let csv = std::fs::read_to_string(tmp.path().join("v").join("verify_scaling.csv")).unwrap();
    assert!(csv.starts_with("suite,check,measured,bound,pass\n"));
    assert!(String::from_utf8_lossy(&result.stdout).contains("PASS"));
}

#[test]
fn verify_rejects_unknown_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let result = run(logns()
        .arg("verify")
        .arg("--suite")
        .arg("nonsense")
        .arg("--out")
        .arg(tmp.path().join("v").as_os_str()));
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn mu_scan_writes_documented_header() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "scan.cfg",
        "d = 1\nn = 1\npoints_x = 64\npoints_y = 16\nhalf_width = 12.0\n\
         theta_sq = 30.0\nmu_min = 1.0\nmu_max = 16.0\nmu_count = 3\n\
         tol = 1e-7\nseed = 2\n",
    );
    let out = tmp.path().join("scan");
    let result = run(logns()
        .arg("mu-scan")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out));
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let csv = std::fs::read_to_string(out.join("mu_scan.csv")).unwrap();
    assert!(csv.starts_with("mu,m,Kx,Ky,muKy,lambda,gap,ydep,converged\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn bounds_and_oracle_produce_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let bounds_cfg = write_config(
        tmp.path(),
        "bounds.cfg",
        "theta = 6.0\nd = 1\nn = 1\na_min = 0.5\na_max = 3.0\na_count = 4\n\
         eps_moll = 1e-2\nell = 1.0\nr_min = 1.0\nr_max = 8.0\nr_count = 4\n",
    );
    let out = tmp.path().join("bounds");
    let result = run(logns()
        .arg("bounds")
        .arg("--config")
        .arg(&bounds_cfg)
        .arg("--out")
        .arg(&out));
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    assert!(out.join("tent_bound.csv").is_file());
    assert!(out.join("eigen_scan.csv").is_file());

    let oracle_cfg = write_config(
        tmp.path(),
        "oracle.cfg",
        "d = 1\ntheta_sq_red = 13.096760937106521\n",
    );
    let out = tmp.path().join("oracle");
    let result = run(logns()
        .arg("oracle")
        .arg("--config")
        .arg(&oracle_cfg)
        .arg("--out")
        .arg(&out));
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("lambda = 1"), "stdout: {stdout}");
    assert!(out.join("oracle.csv").is_file());
}
