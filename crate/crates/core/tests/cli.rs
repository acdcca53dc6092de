use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vlc_secrecy::region::read_region_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vlc-secrecy"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn bounds_prints_report_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("point.csv");
    let cfg = example("peak_point.toml");
    let o = run(&["bounds", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--shannon"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("degraded: no"));
    assert!(text.contains("shannon limit"));
    let csv = fs::read_to_string(out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "h_b,h_e,lower_1,lower_2,upper,clamped_lower,clamped_upper,degraded,shannon_limit"
    );
    assert_eq!(lines.next().unwrap().split(',').count(), 9);
    assert!(!csv.contains('\r'));
}

#[test]
fn sweep_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let cfg = example("avg_power_sweep.toml");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 62);
    assert!(csv.starts_with("p_db,p,lower_1"));
    assert!(csv.lines().next().unwrap().ends_with("shannon_limit"));
}

#[test]
fn tables_writes_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["tables", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let avg = fs::read_to_string(dir.path().join("gaps_average.csv")).unwrap();
    let peak = fs::read_to_string(dir.path().join("gaps_peak.csv")).unwrap();
    assert_eq!(avg.lines().count(), 6);
    assert_eq!(peak.lines().count(), 6);
    assert!(avg.lines().nth(1).unwrap().starts_with("65,0.111"));
}

#[test]
fn region_csv_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let cfg = write_config(
        dir.path(),
        r#"
[scenario]
alice = [5.0, 5.0, 3.0]
bob = [7.0, 5.0, 0.0]
[constraints]
mode = "peak"
xi = 0.3
p_db = 50.0
[region]
x = [0.0, 10.0]
y = [0.0, 10.0]
nx = 40
ny = 30
"#,
    );
    let o = run(&["region", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let rows = read_region_csv(&out).unwrap();
    assert_eq!(rows.len(), 1200);
    let insecure = rows.iter().filter(|r| r.insecure).count();
    // Disc of radius 2 about the nadir: about pi 4 / 100 of the floor.
    let frac = insecure as f64 / 1200.0;
    assert!((frac - 0.1257).abs() < 0.02, "{frac}");
    assert!(rows.iter().all(|r| r.insecure == (r.bound_nats == 0.0)));
}

#[test]
fn oracle_reports_sandwich() {
    let cfg = example("oracle_check.toml");
    let o = run(&["oracle", "--config", cfg.to_str().unwrap(), "--quad-tol", "1e-7"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("SANDWICH OK"), "{text}");
    assert!(text.contains("truncated exponential"));
}

#[test]
fn validation_errors_exit_one_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nalice = [5.0, 5.0, 3.0]\nbob = [5.0, 4.5, 0.0]\ngain_ratio = 30.0\n[constraints]\nmode = \"avg\"\nxi = 1.5\np_db = 40.0\n",
    );
    let o = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 7"), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nalice = [5.0, 5.0, 3.0]\nbob = [5.0, 4.5, 0.0]\ngain_ratio = 30.0\ncolour = 1\n[constraints]\nmode = \"avg\"\nxi = 0.2\np_db = 40.0\n",
    );
    let o = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_flags_exit_nonzero() {
    let cfg = example("peak_point.toml");
    let o = run(&["oracle", "--config", cfg.to_str().unwrap(), "--quad-tol", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["bounds", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["bounds", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(!o.status.success());
}

#[test]
fn sweep_without_section_fails() {
    let o = run(&["sweep", "--config", example("peak_point.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
