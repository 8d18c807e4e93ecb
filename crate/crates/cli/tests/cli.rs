use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::OnceLock;

use jacobsthal::oracle::jacobsthal_exact;
use jacobsthal::{ratio_natural_log, BoundConfig, BoundContext, KnownH, MemoCache, PrimeBasis, TableSet};
use tempfile::TempDir;

const HEADLINE_CONSTANT: f64 = 0.27749612254;

fn shared_tables() -> &'static Path {
    static DIR: OnceLock<TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&["tables", "build", "--tables-dir", dir.path().to_str().unwrap()]);
        assert!(out.status.success());
        dir
    })
    .path()
}

fn command() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_jacobsthal"));
    cmd.env_remove("JACOBSTHAL_TABLES_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    command().args(args).output().unwrap()
}

fn run_with_tables(args: &[&str]) -> Output {
    let mut all = args.to_vec();
    all.extend(["--tables-dir", shared_tables().to_str().unwrap()]);
    run(&all)
}

fn rows(out: &Output) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(out.stdout.as_slice())
        .records()
        .collect::<Result<_, _>>()
        .unwrap()
}

fn header(out: &Output) -> Vec<String> {
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    reader.headers().unwrap().iter().map(String::from).collect()
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize) -> T
where
    T::Err: std::fmt::Debug,
{
    row[i].parse().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn tables_build_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let first = run(&["tables", "build", "--base-k", "3", "--tables-dir", path]);
    assert!(first.status.success());
    let statuses: Vec<String> = rows(&first).iter().map(|r| r[1].to_string()).collect();
    assert_eq!(statuses, ["built"; 3]);
    for k in 1..=3 {
        assert!(dir.path().join(format!("phimin_k{k}.bin")).exists());
    }
    assert!(!dir.path().join("phimin_k4.bin").exists());

    let second = run(&["tables", "build", "--base-k", "3", "--tables-dir", path]);
    let statuses: Vec<String> = rows(&second).iter().map(|r| r[1].to_string()).collect();
    assert_eq!(statuses, ["reused"; 3]);
    assert_eq!(rows(&first)[2][3], rows(&second)[2][3]);

    let loaded = TableSet::load_dir(dir.path(), 3).unwrap();
    assert_eq!(loaded.lookup(6, 3).unwrap(), 1);
}

#[test]
fn tables_build_replaces_corrupt_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    run(&["tables", "build", "--base-k", "2", "--tables-dir", path]);
    let file = dir.path().join("phimin_k2.bin");
    let mut bytes = fs::read(&file).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    fs::write(&file, &bytes).unwrap();
    let out = run(&["tables", "build", "--base-k", "2", "--tables-dir", path]);
    let statuses: Vec<String> = rows(&out).iter().map(|r| r[1].to_string()).collect();
    assert_eq!(statuses, ["reused", "built"]);
    assert!(TableSet::load_dir(dir.path(), 2).is_ok());
}

#[test]
fn base_k_nine_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["tables", "build", "--base-k", "9", "--tables-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn six_tables_decide_h6() {
    let set = TableSet::load_dir(shared_tables(), 6).unwrap();
    assert!(set.lookup(22, 6).unwrap() >= 1);
    assert_eq!(set.lookup(21, 6).unwrap(), 0);
}

#[test]
fn bound_small_k() {
    let out = run_with_tables(&["bound", "4"]);
    assert!(out.status.success());
    assert_eq!(header(&out), ["k", "b", "evaluations", "elapsed_ms", "ratio_natural_log"]);
    let rows = rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(field::<u64>(&rows[0], 1), 10);
    assert_eq!(field::<u64>(&rows[0], 2), 10);

    let out = run_with_tables(&["bound", "4", "--start-m", "7"]);
    assert_eq!(field::<u64>(&rows_of(&out)[0], 1), 10);
}

fn rows_of(out: &Output) -> Vec<csv::StringRecord> {
    assert!(out.status.success(), "{}", stderr(out));
    rows(out)
}

#[test]
fn bound_49_without_known_h() {
    let out = run_with_tables(&["bound", "49"]);
    let row = &rows_of(&out)[0];
    let b: u64 = field(row, 1);
    let elapsed_ms: f64 = field(row, 3);
    assert!(b >= 742);
    assert_eq!(b, 2262);
    assert!(elapsed_ms < 60_000.0);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run_with_tables(&["bound", "0"]).status.code(), Some(1));
    assert_eq!(run_with_tables(&["bound", "x"]).status.code(), Some(1));
    assert_eq!(run_with_tables(&["sweep", "5", "4"]).status.code(), Some(1));
    assert_eq!(run_with_tables(&["coeff-sweep", "3", "2"]).status.code(), Some(1));
    assert_eq!(run_with_tables(&["compare", "9", "1"]).status.code(), Some(1));
    assert_eq!(run_with_tables(&["coeff-sweep", "1", "2", "0"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn missing_tables_exit_2_with_hint() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bound", "4", "--tables-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("phimin_k1.bin"), "{err}");
    assert!(err.contains("jacobsthal tables build"), "{err}");

    // tables exist but only up to k = 3
    run(&["tables", "build", "--base-k", "3", "--tables-dir", dir.path().to_str().unwrap()]);
    let out = run(&["sweep", "1", "5", "--tables-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("phimin_k4.bin"));
}

#[test]
fn smaller_base_k_gives_sound_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    run(&["tables", "build", "--base-k", "3", "--tables-dir", path]);
    let out = run(&["sweep", "1", "8", "--base-k", "3", "--tables-dir", path]);
    let basis = PrimeBasis::new(8).unwrap();
    for row in rows_of(&out) {
        let k: usize = field(&row, 0);
        let b: u64 = field(&row, 1);
        assert!(b >= jacobsthal_exact(k, &basis).unwrap(), "k={k} b={b}");
    }
}

#[test]
fn env_var_overrides_tables_dir() {
    let out = command()
        .args(["bound", "3", "--tables-dir", "/nonexistent"])
        .env("JACOBSTHAL_TABLES_DIR", shared_tables())
        .output()
        .unwrap();
    assert_eq!(field::<u64>(&rows_of(&out)[0], 1), 6);
}

#[test]
fn sweep_first_49_rows() {
    let out = run_with_tables(&["sweep", "1", "49"]);
    assert_eq!(header(&out), ["k", "b", "evaluations", "elapsed_ms", "ratio_natural_log"]);
    let rows = rows_of(&out);
    assert_eq!(rows.len(), 49);
    let known = KnownH::hagedorn();
    let mut previous = 0;
    for (i, row) in rows.iter().enumerate() {
        let k: usize = field(row, 0);
        let b: u64 = field(row, 1);
        assert_eq!(k, i + 1);
        assert!(b >= known.get(k).unwrap());
        assert!(b >= previous);
        previous = b;
    }
    // ln 1 = 0, so the ratio cell is left empty
    assert_eq!(&rows[0][4], "");
}

#[test]
fn sweep_50_to_60_nondecreasing() {
    let out = run_with_tables(&["sweep", "50", "60", "--use-known-h", "--initial-m", "742"]);
    let b: Vec<u64> = rows_of(&out).iter().map(|r| field(r, 1)).collect();
    assert_eq!(b.len(), 11);
    assert!(b.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn reset_m_matches_carried_sweep() {
    let carried = run_with_tables(&["sweep", "1", "12"]);
    let reset = run_with_tables(&["sweep", "1", "12", "--reset-m"]);
    let column = |out: &Output| -> Vec<u64> { rows_of(out).iter().map(|r| field(r, 1)).collect() };
    assert_eq!(column(&carried), column(&reset));
}

fn context(k_max: usize, use_known_h: bool) -> BoundContext {
    let tables = TableSet::load_dir(shared_tables(), 6).unwrap();
    BoundContext::new(k_max, tables, BoundConfig::default().with_known_h(use_known_h)).unwrap()
}

#[test]
fn coeff_sweep_large_k_shape_and_postcondition() {
    let out = run_with_tables(&["coeff-sweep", "1001", "1005", "10000"]);
    assert_eq!(header(&out), ["k", "c_k", "bound", "ratio_natural_log"]);
    let rows = rows_of(&out);
    assert_eq!(rows.len(), 5);
    let ctx = context(1005, false);
    let mut cache = MemoCache::new();
    for (row, k) in rows.iter().zip(1001..) {
        assert_eq!(field::<usize>(row, 0), k);
        let c: u64 = field(row, 1);
        let bound: u64 = field(row, 2);
        assert_eq!(bound, (c as u128 * (k * k) as u128 / 10_000) as u64);
        assert!(ctx.phi_low(bound, k, &mut cache).unwrap() > 0);
    }
}

#[test]
fn coeff_sweep_from_50_respects_headline_constant() {
    let out = run_with_tables(&["coeff-sweep", "50", "120", "--use-known-h"]);
    let rows = rows_of(&out);
    assert_eq!(rows.len(), 71);
    for row in &rows {
        let ratio: f64 = field(row, 3);
        assert!(ratio <= HEADLINE_CONSTANT, "{row:?}");
    }
}

#[test]
fn compare_columns_and_known_h() {
    let out = run_with_tables(&["compare", "1", "55"]);
    assert_eq!(
        header(&out),
        ["k", "b", "log10_b", "log10_kanold", "log10_stevens", "h_known"]
    );
    let rows = rows_of(&out);
    let basis = PrimeBasis::new(8).unwrap();
    for row in &rows {
        let k: usize = field(row, 0);
        if k <= 8 {
            assert_eq!(field::<u64>(row, 5), jacobsthal_exact(k, &basis).unwrap());
        }
        if k > 49 {
            assert_eq!(&row[5], "");
        }
    }
    let row49 = &rows[48];
    assert!(field::<f64>(row49, 3) < 15.0);
    assert!(field::<f64>(row49, 4) < 40.0);
}

#[test]
fn compare_crossover() {
    let out = run_with_tables(&["compare", "255", "265", "--use-known-h"]);
    for row in rows_of(&out) {
        let k: usize = field(&row, 0);
        let (kanold, stevens): (f64, f64) = (field(&row, 3), field(&row, 4));
        assert_eq!(stevens < kanold, k >= 260, "k={k}");
    }
}

#[test]
fn csv_values_round_trip() {
    let out = run_with_tables(&["sweep", "2", "20"]);
    for row in rows_of(&out) {
        let k: usize = field(&row, 0);
        let b: u64 = field(&row, 1);
        assert_eq!(field::<f64>(&row, 4), ratio_natural_log(b, k));
        assert!(!row.iter().any(|cell| cell.contains(' ')));
    }
}

#[test]
fn json_output() {
    let out = run_with_tables(&["compare", "48", "50", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_slice(&stdout_of(&out)).unwrap();
    let rows = value.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1]["h_known"], 742);
    assert!(rows[2]["h_known"].is_null());
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["k", "b", "log10_b", "log10_kanold", "log10_stevens", "h_known"]);
}

fn stdout_of(out: &Output) -> Vec<u8> {
    assert!(out.status.success(), "{}", stderr(out));
    out.stdout.clone()
}

#[test]
fn out_file_gets_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let args = ["sweep", "1", "10", "--out", out_path.to_str().unwrap()];
    let out = run_with_tables(&args);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = fs::read_to_string(&out_path).unwrap();
    assert_eq!(written.lines().count(), 11);

    let manifest_path = dir.path().join("sweep.csv.manifest.json");
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "sweep");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["flags"]["common"]["base_k"], 6);
    assert_eq!(manifest["flags"]["command"]["sweep"]["end_k"], 10);
    assert!(manifest["timestamp"].as_u64().unwrap() > 0);
    let digest = manifest["config_digest"].as_str().unwrap().to_string();
    assert_eq!(digest.len(), 64);

    // same flags and tables, same digest
    run_with_tables(&args);
    let again: serde_json::Value = serde_json::from_slice(&fs::read(&manifest_path).unwrap()).unwrap();
    assert_eq!(again["config_digest"], digest.as_str());

    let other = dir.path().join("other.csv");
    run_with_tables(&["sweep", "1", "11", "--out", other.to_str().unwrap()]);
    let other: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("other.csv.manifest.json")).unwrap()).unwrap();
    assert_ne!(other["config_digest"], digest.as_str());
}

#[test]
fn budget_breach_keeps_partial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("partial.csv");
    let out = run_with_tables(&["sweep", "1", "49", "--budget", "300", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("budget"));
    let text = fs::read_to_string(&out_path).unwrap();
    let rows = text.lines().count() - 1;
    assert!(rows > 0 && rows < 49, "{rows} rows");
    assert!(dir.path().join("partial.csv.manifest.json").exists());

    let out = run_with_tables(&["bound", "30", "--budget", "5"]);
    assert_eq!(out.status.code(), Some(3));
}
