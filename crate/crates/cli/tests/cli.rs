use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hypershift"));
    c.env_remove("HYPERSHIFT_THREADS");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_error(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().expect("stderr is empty");
    serde_json::from_str(line).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))
}

#[test]
fn zero_potential_has_zero_shifts() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["shifts", "--potential", "zero", "--kmax", "20"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("shifts.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,delta,multiplicity"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 21);
    for r in rows {
        let delta: f64 = r.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(delta, 0.0);
    }
}

#[test]
fn invalid_dimension_exits_2_with_json_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["shifts", "--dim", "4"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_error(&o);
    assert_eq!(e["exit_code"], 2);
    assert!(e["error"].is_string());
    assert!(e["message"].as_str().unwrap().contains("dim"));
}

#[test]
fn unknown_potential_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["xray", "--potential", "lorentzian:A=1"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_error(&o)["exit_code"], 2);
}

#[test]
fn bad_thread_count_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let o = bin().args(["freespec", "--out"]).arg(d.path()).env("HYPERSHIFT_THREADS", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_reproducible_across_runs_and_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["shifts", "--lambda", "20", "--kmax", "30", "--potential", "gaussian_rho:A=1,sigma=0.5"];
    assert!(run(&args, a.path()).status.success());
    let o = bin().args(args).arg("--out").arg(b.path()).env("HYPERSHIFT_THREADS", "1").output().unwrap();
    assert!(o.status.success());
    for f in ["shifts.csv", "shifts.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
    let meta = json(&a.path().join("shifts.json"));
    let hash = meta["generated_by"]["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(meta["generated_by"]["config"]["lambda_list"][0], 20.0);
}

#[test]
fn config_file_precedence() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "[common]\nlambda = 7.0\nkmax = 3\n\n[shifts]\nlambda = 9.0\n").unwrap();
    let o = bin().args(["shifts", "--config"]).arg(&cfg).arg("--out").arg(d.path()).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = json(&d.path().join("shifts.json"));
    assert_eq!(meta["lambda"], 9.0);
    assert_eq!(meta["kmax"], 3);

    let o = bin().args(["shifts", "--lambda", "11", "--config"]).arg(&cfg).arg("--out").arg(d.path()).output().unwrap();
    assert!(o.status.success());
    assert_eq!(json(&d.path().join("shifts.json"))["lambda"], 11.0);

    std::fs::write(&cfg, "[common]\nlamda = 7.0\n").unwrap();
    let o = bin().args(["shifts", "--config"]).arg(&cfg).arg("--out").arg(d.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn xray_then_invert_recovers_gaussian() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["xray", "--dim", "2", "--potential", "gaussian_rho:A=1,sigma=1"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let prof = d.path().join("profile.csv");
    let o = bin()
        .args(["invert", "--dim", "2", "--potential", "gaussian_rho:A=1,sigma=1", "--profile"])
        .arg(&prof)
        .arg("--out")
        .arg(d.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = json(&d.path().join("invert.json"));
    let err = meta["max_abs_error_rho_le_3"].as_f64().unwrap();
    assert!(err <= 1e-3, "max abs error {err}");
    assert!(meta["condition"].as_f64().unwrap().is_finite());
    let pot = std::fs::read_to_string(d.path().join("potential.csv")).unwrap();
    assert!(pot.starts_with("rho,value\n"));
}

#[test]
fn freespec_rows_are_unit_modulus() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["freespec", "--dim", "3", "--kmax", "5", "--lambda-list", "1,10"], d.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(d.path().join("freespec.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,lambda,mu_re,mu_im,multiplicity,conventional"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        let re: f64 = r[2].parse().unwrap();
        let im: f64 = r[3].parse().unwrap();
        assert!((re.hypot(im) - 1.0).abs() < 1e-12);
        let k: u64 = r[0].parse().unwrap();
        assert_eq!(r[4].parse::<u64>().unwrap(), (k + 1) * (k + 1));
    }
}

#[test]
fn selftest_single_criterion() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["selftest", "--only", "A8"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("A8 PASS"), "{out}");
    assert!(d.path().join("selftest.json").exists());
}

#[test]
fn trace_reports_relative_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["trace", "--lambda-list", "200"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,h,p,quantum,classical,abs_err,rel_err"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 200.0);
    assert!(row[6].is_finite() && row[6] >= 0.0);
    assert!(d.path().join("trace.json").exists());
}
