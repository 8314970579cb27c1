use std::path::Path;
use std::process::{Command, Output};

fn mbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SIMO: &str = r#"{"scheme":"simo-mbm","system":{"n_tu":1,"n_rf":1,"m_rf":2,"n_r":2,"alphabet":{"kind":"psk","M":2}},
 "snr_db":[0,5,10,15,20],"stop":{"min_bit_errors":100,"max_trials":50000},"master_seed":4}"#;

#[test]
fn ber_writes_csv_and_diversity_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIMO);
    let csv = dir.path().join("out.csv");
    let o = mbm(&["ber", &cfg, "-o", csv.to_str().unwrap(), "-w", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 5);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# "));
    assert!(text.contains("snr_db,bit_errors,bits_simulated,ber,trials"));

    let d = mbm(&["diversity", csv.to_str().unwrap(), "--snr", "5", "20"]);
    assert!(d.status.success(), "{}", String::from_utf8_lossy(&d.stderr));
    let out = stdout(&d);
    let value: f64 = out.split_whitespace().next().unwrap().trim_start_matches("diversity=").parse().unwrap();
    assert!((value - 2.0).abs() < 0.6, "{out}");
}

#[test]
fn ber_to_stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIMO);
    let csv = dir.path().join("out.csv");
    let a = mbm(&["ber", &cfg, "-w", "1"]);
    mbm(&["ber", &cfg, "-o", csv.to_str().unwrap(), "-w", "3"]);
    assert_eq!(stdout(&a), std::fs::read_to_string(&csv).unwrap());
}

#[test]
fn bound_prints_one_row_per_snr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIMO);
    let o = mbm(&["bound", &cfg]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn bound_refuses_schemes_without_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scheme":"pccr-nr1","system":{"n_tu":2,"n_rf":2,"m_rf":1,"n_r":1,"alphabet":{"kind":"tone","M":1}},"snr_db":[0]}"#,
    );
    assert_eq!(mbm(&["bound", &cfg]).status.code(), Some(2));
}

#[test]
fn invalid_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scheme":"tcm-gsm-mbm","system":{"n_tu":2,"n_rf":1,"m_rf":1,"n_r":1,"alphabet":{"kind":"psk","M":2}},"snr_db":[0]}"#,
    );
    let o = mbm(&["ber", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(mbm(&["ber", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn dmin_reports_ordered_triples() {
    let o = mbm(&["dmin", "--draws", "30", "--seed", "9"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("draw,full,mi,ed"));
    for line in out.lines().skip(1) {
        let v: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!(v[0] <= v[1] && v[1] <= v[2], "{line}");
    }
    assert_eq!(out.lines().count(), 31);
}

#[test]
fn selftest_passes() {
    let o = mbm(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}
