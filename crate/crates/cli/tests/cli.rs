use pointwave::io::load_field;
use std::path::Path;
use std::process::{Command, Output};

const ALPHA3: &str = "-0.0795775";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pointwave")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    serde_json::from_str(stderr(o).trim()).unwrap_or_else(|e| panic!("{e}: {}", stderr(o)))
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["solve", "--dim", "3", "--alpha", ALPHA3, "--p", "1.5", "--omega", "0.5", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["profile.csv", "profile.json", "shoot_profile.csv", "summary.json", "cross_validation.json", "run.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let summary = json(&dir.path().join("summary.json"));
    assert!(summary["d_omega"].as_f64().unwrap() < 0.0);
    assert!(summary["c"].as_f64().unwrap() > 0.0);
    assert!(summary["violations"].as_array().unwrap().is_empty());
    let cross = json(&dir.path().join("cross_validation.json"));
    assert_eq!(cross["passed"], true);
    let (params, field) = load_field(&dir.path().join("profile.csv")).unwrap();
    assert_eq!(params.alpha(), -0.0795775);
    assert_eq!(field.singular_coeff().re, summary["c"].as_f64().unwrap());
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("r,f_re,f_im,u_re,u_im\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn positive_alpha_rejected_in_three_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--dim", "3", "--alpha", "0.1", "--p", "1.5", "--omega", "0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let e = error_json(&o);
    assert_eq!(e["exit_code"], 1);
    assert_eq!(e["error"]["kind"], "config");
    assert!(e["error"]["message"].as_str().unwrap().contains("alpha must be negative for dim 3"));
}

#[test]
fn frequency_out_of_range_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--dim", "3", "--alpha", ALPHA3, "--p", "1.5", "--omega", "1.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(error_json(&o)["error"]["message"].as_str().unwrap().contains("out of range"));
}

#[test]
fn bad_flags_are_config_errors() {
    let o = run(&["solve", "--dim", "three"]);
    assert_eq!(code(&o), 1);
    assert_eq!(error_json(&o)["error"]["kind"], "config");
    let o = run(&["frobnicate"]);
    assert_eq!(code(&o), 1);
    let o = run(&["solve", "--p", "1.5", "--omega", "0.5"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("missing --dim"));
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn unwritable_output_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = run(&["solve", "--dim", "2", "--p", "3", "--omega", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["sweep", "--dim", "3", "--alpha", ALPHA3, "--p", "1.5", "--omegas", "0,0.25,0.5,0.75,0.95", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "omega,d_omega,c,sup_phi,residual");
    let d: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(d.len(), 5);
    assert!(d.iter().all(|&v| v < 0.0));
    assert!(d.windows(2).all(|w| w[0] <= w[1] + 1e-10));
}

#[test]
fn empty_sweep_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--dim", "3", "--alpha", ALPHA3, "--p", "1.5", "--omegas", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("empty omega range"));
}

#[test]
fn single_frequency_sweep_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let base = ["--dim", "2", "--p", "3"];
    let o = run(&[&["sweep"][..], &base, &["--omegas", "0.4", "--out", a.to_str().unwrap()]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&[&["solve"][..], &base, &["--omega", "0.4", "--out", b.to_str().unwrap()]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let row = std::fs::read_to_string(a.join("sweep.csv")).unwrap();
    let d: f64 = row.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(d, json(&b.join("summary.json"))["d_omega"].as_f64().unwrap());
}

#[test]
fn decay_log_divergent_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["decay", "--dim", "2", "--p", "3", "--omega", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = json(&dir.path().join("decay.json"));
    let k = d["report"]["fit"]["exponent"].as_f64().unwrap();
    assert!((k + 1.0).abs() <= 0.05, "{k}");
    assert_eq!(d["l2_verdict"], "log-divergent");
    assert_eq!(d["report"]["sandwich"]["upper"], true);
    let tail = std::fs::read_to_string(dir.path().join("tail_fit.csv")).unwrap();
    assert!(tail.starts_with("r,phi,fit,algebraic\n") && tail.lines().count() > 20);
    assert!(dir.path().join("l2_threshold.csv").exists());
    let o = run(&["decay", "--dim", "2", "--p", "3", "--omega", "0.3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn evolve_unperturbed_stays_on_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["evolve", "--dim", "3", "--p", "1.5", "--omega", "0.5", "--delta", "0", "--t-final", "0.5", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = std::fs::read_to_string(dir.path().join("stability.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "delta,sup_distance,ratio,mass_drift,energy_drift");
    let d: f64 = lines.next().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(d <= 1e-6, "{d}");
    let trace = std::fs::read_to_string(dir.path().join("trace_0.csv")).unwrap();
    assert!(trace.starts_with("t,mass,energy,orbital_distance,c_re,c_im\n"));
    assert_eq!(json(&dir.path().join("evolve.json"))["config"]["metric"], "H1_alpha");
}

#[test]
fn evolve_zero_frequency_uses_x0() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["evolve", "--dim", "2", "--p", "3", "--omega", "0", "--deltas", "0.01,0.005", "--t-final", "0.2", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let e = json(&dir.path().join("evolve.json"));
    assert_eq!(e["config"]["metric"], "X0");
    assert_eq!(e["table"]["domain_truncated"], true);
    assert_eq!(e["table"]["rows"].as_array().unwrap().len(), 2);
    let o = run(&["evolve", "--dim", "2", "--p", "3", "--omega", "0", "--metric", "H1_alpha", "--t-final", "0.2", "--out", out]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn coarse_time_step_violates_conservation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["evolve", "--dim", "3", "--p", "1.5", "--omega", "0.5", "--delta", "0.5", "--dt", "0.5", "--t-final", "5", "--out", out]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let e = error_json(&o);
    assert_eq!(e["error"]["kind"], "invariant");
    assert!(!e["error"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn too_coarse_grid_is_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--dim", "3", "--p", "1.5", "--omega", "0.99", "--n", "16", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert_eq!(error_json(&o)["error"]["kind"], "solver");
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = run(&["solve", "--dim", "2", "--p", "2", "--omega", "0.3", "--seed", "4", "--out", d.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["profile.csv", "shoot_profile.csv", "summary.json", "cross_validation.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_and_metadata_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let toml = format!(
        "command = \"solve\"\nomega = 0.5\nout = {:?}\n\n[params]\ndim = 3\nalpha = {ALPHA3}\np = 1.8\n\n[grid]\nn = 8192\n",
        first.to_str().unwrap()
    );
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, toml).unwrap();
    let o = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    // flags override the file; re-ingesting the emitted metadata reproduces the run
    let second = dir.path().join("second");
    let o = run(&["solve", "--config", first.join("run.json").to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read(first.join("profile.csv")).unwrap(), std::fs::read(second.join("profile.csv")).unwrap());
    let meta = json(&second.join("run.json"));
    assert_eq!(meta["grid"]["n"], 8192);
    assert_eq!(meta["params"]["p"], 1.8);

    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    std::fs::write(&cfg, "omega = 0.5\nbogus = 1\n").unwrap();
    assert_eq!(code(&run(&["solve", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}\n{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    let rep = json(&dir.path().join("verify.json"));
    assert!(rep["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}
