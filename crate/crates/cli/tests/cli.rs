use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn pmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmc"))
        .args(args)
        .env("PMC_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pmc-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn scenario(name: &str) -> String {
    format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn passing_run_exits_zero() {
    let o = pmc(&["run", &scenario("ch2-cylinder.json"), "--grid", "24"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("\"pass\": true"));
    assert!(!out.contains("timing_ms"));
}

#[test]
fn failing_checks_exit_one() {
    let o = pmc(&[
        "cylinder", "--family", "CH", "--rho", "-4", "--kappa", "1.3", "--checks", "qzero", "--grid", "16",
        "--format", "csv",
    ]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.starts_with("name,residual,tolerance,comparison,pass\n"));
    assert!(out.contains("qzero,") && out.trim_end().ends_with("false"));
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(code(&pmc(&["check-space", "--family", "XP"])), 2);
    assert_eq!(code(&pmc(&["cylinder", "--kappa", "1", "--checks", "nope", "--grid", "16"])), 2);
    assert_eq!(code(&pmc(&["run", "/nonexistent/scenario.json"])), 2);
    let dir = scratch("bad");
    let path = dir.join("s.json");
    fs::write(&path, r#"{"space":{"family":"CP","n":2,"rho":4.0},"subject":{"kind":"space-checks"},"extra":1}"#)
        .unwrap();
    let o = pmc(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("extra"));
}

#[test]
fn out_directory_receives_artifacts() {
    let dir = scratch("out");
    let d = dir.to_str().unwrap();
    let o = pmc(&["cylinder", "--family", "CH", "--rho", "-4", "--kappa", "1", "--grid", "24", "--out", d]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).is_empty());
    let report = fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(report.contains("\"pass\": true"));
    assert!(fs::read_to_string(dir.join("curve.csv")).unwrap().starts_with("s,x1,y1,x2,y2,kappa,tau12\n"));
    assert!(fs::read_to_string(dir.join("qgrid.csv")).unwrap().starts_with("u,v,re_q,"));

    let o = pmc(&["sphere", "--h", "0.5", "--checks", "closure", "--out", d, "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(dir.join("report.csv")).unwrap().contains("closure,"));
    assert!(fs::read_to_string(dir.join("profile.csv")).unwrap().starts_with("s,r,h,alpha,H_measured\n"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn scan_overrides_and_determinism() {
    let args = [
        "scan",
        &scenario("ch2-kappa-scan.json"),
        "--samples",
        "5",
        "--format",
        "csv",
    ];
    let a = pmc(&args);
    let b = pmc(&args);
    assert_eq!(code(&a), 1);
    assert_eq!(stdout(&a), stdout(&b));
    let out = stdout(&a);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "kappa,converged,pass,pmc,qzero,signed_q");
    assert_eq!(lines.count(), 5);
}

#[test]
fn timing_is_opt_in() {
    let o = pmc(&["check-space", "--samples", "5", "--timing"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("timing_ms"));
}
