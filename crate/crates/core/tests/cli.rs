use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn skewmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewmat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

#[test]
fn generated_instance_passes_every_bound() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("ab.txt");
    let out = skewmat(&["gen", "--kind", "uniform", "--n", "16", "--density", "0.4", "--seed", "3", "--output", path_str(&input)]);
    assert!(out.status.success());
    let report = dir.path().join("report.csv");
    let summary = dir.path().join("summary.csv");
    let out = skewmat(&[
        "approx", "--input", path_str(&input), "--b", "32", "--k", "4", "--k", "8", "--p", "2",
        "--output", path_str(&report), "--summary", path_str(&summary),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&report);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[3] == "true"));
    assert!(read_csv(&summary).len() <= 32);
}

#[test]
fn recover_returns_the_planted_support() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("ab.txt");
    let planted = dir.path().join("planted.csv");
    let out = skewmat(&[
        "gen", "--kind", "sparse", "--n", "16", "--nnz", "6", "--seed", "11",
        "--output", path_str(&input), "--planted", path_str(&planted),
    ]);
    assert!(out.status.success());
    let found = dir.path().join("found.csv");
    let out = skewmat(&["recover", "--input", path_str(&input), "--b", "6", "--output", path_str(&found)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let key = |r: &Vec<String>| (r[0].parse::<usize>().unwrap(), r[1].parse::<usize>().unwrap(), r[2].parse::<f64>().unwrap().to_bits());
    let want: BTreeSet<_> = read_csv(&planted).iter().map(key).collect();
    let got: BTreeSet<_> = read_csv(&found).iter().map(key).collect();
    assert_eq!(want.len(), 6);
    assert_eq!(got, want);
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let input = dir.path().join(format!("ab{run}.txt"));
        skewmat(&["gen", "--kind", "heavy", "--n", "16", "--nnz", "3", "--noise", "40", "--seed", "5", "--output", path_str(&input)]);
        let found = dir.path().join(format!("found{run}.csv"));
        let out = skewmat(&["recover", "--input", path_str(&input), "--b", "3", "--output", path_str(&found)]);
        assert!(out.status.success());
        outputs.push((fs::read(&input).unwrap(), fs::read(&found).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(read_csv(&dir.path().join("found0.csv")).len(), 3);
}

#[test]
fn report_writes_one_row_per_size() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("ab.txt");
    skewmat(&["gen", "--kind", "zipf", "--n", "4", "--nnz", "10", "--output", path_str(&input)]);
    let out = skewmat(&["report", "--input", path_str(&input), "--b", "1", "--b", "4", "--b", "16"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("b,measured_error,bound_E1,bound_residual"));
    let sizes: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(sizes, ["1", "4", "16"]);
}

#[test]
fn lift_runs_both_pipelines() {
    let dir = TempDir::new().unwrap();
    let fimi = dir.path().join("t.dat");
    fs::write(&fimi, "0 1 2\n0 1\n1 2\n0 2 3\n").unwrap();
    let out = skewmat(&["lift", "--fimi", path_str(&fimi), "--b", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("check,bound,measured,satisfied"));

    let out = skewmat(&["lift", "--fimi", path_str(&fimi), "--b", "16", "--pipeline", "recover", "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("i,j,weight,prime,residue"));

    // a ceiling of zero forces the streamed path
    let out = skewmat(&["lift", "--fimi", path_str(&fimi), "--b", "8", "--dense-ceiling", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().lines().count() > 1);
}

#[test]
fn exit_codes() {
    assert_eq!(skewmat(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(skewmat(&["--help"]).status.code(), Some(0));

    let dir = TempDir::new().unwrap();
    let input = dir.path().join("neg.txt");
    fs::write(&input, "2\n1 -1\n0 1\n2\n1 0\n0 1\n").unwrap();
    let out = skewmat(&["approx", "--input", path_str(&input), "--b", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let missing = dir.path().join("missing.txt");
    assert_eq!(skewmat(&["approx", "--input", path_str(&missing), "--b", "2"]).status.code(), Some(2));
    // approx without a size is a usage error
    assert_eq!(skewmat(&["approx", "--input", path_str(&input)]).status.code(), Some(1));
}

#[test]
fn in_process_entry_point_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let status = skewmat::cli::main_with(["skewmat", "gen", "--kind", "zipf", "--n", "3", "--nnz", "3"], &mut out, &mut err);
    assert_eq!(status as i32, 0);
    let bin = skewmat(&["gen", "--kind", "zipf", "--n", "3", "--nnz", "3"]);
    assert_eq!(out, bin.stdout);
}
