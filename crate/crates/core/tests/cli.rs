use std::path::Path;
use std::process::{Command, Output};

use porous_inverse::io::{parse_curve, parse_key_values, read_field};
use porous_inverse::InversionConfig;
use tempfile::TempDir;

fn pmeinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmeinv")).args(args).output().expect("spawn pmeinv")
}

fn ok(args: &[&str]) -> Output {
    let out = pmeinv(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn report_value(p: &Path, key: &str) -> String {
    let text = std::fs::read_to_string(p).unwrap();
    parse_key_values(&text).unwrap().into_iter().find(|(k, _)| k == key).unwrap().1
}

#[test]
fn forward_then_invert_matches_table_cell() {
    let dir = TempDir::new().unwrap();
    let field = path(&dir, "u.txt");
    let report = path(&dir, "r.txt");
    ok(&["forward", "--gamma", "3.5", "--T", "1000", "--N", "10", "--out", &field]);

    let file = read_field(Path::new(&field)).unwrap();
    assert_eq!(file.field.values().len(), 121);
    assert_eq!(file.t, Some(1000.0));

    ok(&["invert", "--in", &field, "--out", &report]);
    let gm: f64 = report_value(Path::new(&report), "gamma_m").parse().unwrap();
    assert!((gm - 3.504).abs() < 0.05, "{gm}");

    let cell =
        porous_inverse::cli::table_cell(3.5, 1000.0, 10, None, "poly_bump(10)", &InversionConfig::default()).unwrap();
    assert_eq!(gm.to_bits(), cell.to_bits());
}

#[test]
fn replay_reproduces_output() {
    let dir = TempDir::new().unwrap();
    let field = path(&dir, "u.txt");
    let again = path(&dir, "u2.txt");
    ok(&["forward", "--gamma", "2", "--T", "3", "--N", "8", "--u0", "scaled_profile(1)", "--out", &field]);
    let manifest = format!("{field}.manifest");
    assert!(Path::new(&manifest).exists());

    ok(&["replay", "--manifest", &manifest, "--set", &format!("out={again}")]);
    let a = read_field(Path::new(&field)).unwrap();
    let b = read_field(Path::new(&again)).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(a.field.values()), bits(b.field.values()));
}

#[test]
fn zero_initial_data_is_flagged_degenerate() {
    let dir = TempDir::new().unwrap();
    let field = path(&dir, "u.txt");
    let report = path(&dir, "r.txt");
    ok(&["forward", "--gamma", "2", "--T", "1", "--N", "6", "--u0", "poly_bump(0)", "--out", &field]);
    assert!(read_field(Path::new(&field)).unwrap().field.values().iter().all(|&v| v == 0.0));

    let out = ok(&["invert", "--in", &field, "--out", &report]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate measurement"));
    assert_eq!(report_value(Path::new(&report), "degenerate"), "true");
}

#[test]
fn small_gamma_max_reports_endpoint() {
    let dir = TempDir::new().unwrap();
    let field = path(&dir, "u.txt");
    ok(&["forward", "--gamma", "3.5", "--T", "100", "--N", "10", "--out", &field]);
    let out = pmeinv(&["invert", "--in", &field, "--gamma-max", "2", "--out", &path(&dir, "r.txt")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--gamma-max"));
}

#[test]
fn curve_norms_and_sample_count() {
    let dir = TempDir::new().unwrap();
    let field = path(&dir, "u.txt");
    ok(&["forward", "--gamma", "3.5", "--T", "100", "--N", "10", "--out", &field]);

    let single = path(&dir, "c1.csv");
    ok(&["curve", "--in", &field, "--samples", "1", "--out", &single]);
    assert_eq!(parse_curve(&std::fs::read_to_string(&single).unwrap()).unwrap().len(), 1);

    let l1 = path(&dir, "l1.csv");
    let linf = path(&dir, "linf.csv");
    ok(&["curve", "--in", &field, "--samples", "50", "--norm", "l1", "--out", &l1]);
    ok(&["curve", "--in", &field, "--samples", "50", "--norm", "linf", "--out", &linf]);
    let a = parse_curve(&std::fs::read_to_string(&l1).unwrap()).unwrap();
    let b = parse_curve(&std::fs::read_to_string(&linf).unwrap()).unwrap();
    assert_eq!(a.len(), 50);
    for (p, q) in a.iter().zip(&b) {
        assert_eq!(p.0, q.0);
        assert!(p.1 <= q.1 * (1.0 + 1e-12));
    }
}

#[test]
fn profile_subcommand() {
    let dir = TempDir::new().unwrap();
    let bad = pmeinv(&["profile", "--gamma", "1.0", "--N", "8", "--out", &path(&dir, "f.txt")]);
    assert_eq!(bad.status.code(), Some(2));

    let center = |n: &str| -> f64 {
        let out = ok(&["profile", "--gamma", "3.5", "--N", n, "--out", &path(&dir, &format!("f{n}.txt"))]);
        let text = String::from_utf8(out.stdout).unwrap();
        parse_key_values(&text).unwrap().into_iter().find(|(k, _)| k == "center").unwrap().1.parse().unwrap()
    };
    let (c16, c32) = (center("16"), center("32"));
    assert!((c16 - c32).abs() / c32 < 0.02, "{c16} {c32}");
}

#[test]
fn table_subcommand() {
    let dir = TempDir::new().unwrap();
    let empty = pmeinv(&["table", "--gammas", "", "--times", "1"]);
    assert_eq!(empty.status.code(), Some(2));

    let csv = path(&dir, "t.csv");
    let out = ok(&["table", "--gammas", "1.1", "--times", "1", "--out", &csv]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, std::fs::read_to_string(&csv).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,quantity,T=1"));
    let gm: f64 = lines.next().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((gm - 1.269).abs() < 0.05, "{gm}");
}

#[test]
fn inconsistent_step_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out =
        pmeinv(&["forward", "--gamma", "2", "--T", "1", "--N", "4", "--dt", "0.3", "--out", &path(&dir, "u.txt")]);
    assert_eq!(out.status.code(), Some(2));
}
