#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{NaiveDate, NaiveTime, TimeDelta};
use epsdd_core::null_model::SeededGenerator;
use rand::Rng;

pub const TICK_HEADER: &str = "timestamp,price,bid,ask,volume,corrected\n";

pub fn epsdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epsdd"))
        .args(args)
        .output()
        .expect("epsdd runs")
}

pub fn epsdd_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epsdd"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("epsdd runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn assert_ok(o: &Output) {
    assert!(
        o.status.success(),
        "exit {:?}\nstderr:\n{}",
        o.status.code(),
        stderr(o)
    );
}

pub fn day(d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2011, 6, d).unwrap()
}

/// Quoted ticks every 5 s between 09:00 and 11:00 on each day, following a
/// seeded random walk with occasional jumps, plus one out-of-session row
/// per day.
pub fn random_walk_ticks(days: &[NaiveDate], seed: u64, stream: u64) -> String {
    let mut rng = SeededGenerator::new(seed, stream).rng();
    let mut mid: f64 = 1500.0;
    let mut out = String::from(TICK_HEADER);
    for d in days {
        let open = d.and_time(NaiveTime::from_hms_opt(9, 0, 0).unwrap());
        let early = open - TimeDelta::seconds(600);
        writeln!(out, "{},{mid},{},{},1,0", early.format("%Y-%m-%d %H:%M:%S"), mid - 0.25, mid + 0.25).unwrap();
        for i in 0..1440 {
            let u: f64 = rng.random();
            let z: f64 = rng.random::<f64>() - 0.5;
            let jump = if u < 0.002 { 40.0 * z } else { 0.0 };
            mid = (mid + 0.9 * z + jump).max(100.0);
            let mid = (mid * 4.0).round() / 4.0;
            let t = open + TimeDelta::seconds(5 * i + 1);
            writeln!(
                out,
                "{},{mid},{},{},{},0",
                t.format("%Y-%m-%d %H:%M:%S"),
                mid - 0.25,
                mid + 0.25,
                1 + i % 7
            )
            .unwrap();
        }
    }
    out
}

/// A two-contract layout: `ES` rolls from one maturity file to the next,
/// `NQ` is a single file.
pub fn two_contract_fixture(dir: &Path, extra: &str) -> PathBuf {
    let es_days: Vec<NaiveDate> = (6..=10).map(day).collect();
    let es_next: Vec<NaiveDate> = (9..=14).map(day).collect();
    let nq_days: Vec<NaiveDate> = (6..=13).map(day).collect();
    fs::write(dir.join("es_m1.csv"), random_walk_ticks(&es_days, 11, 0)).unwrap();
    fs::write(dir.join("es_u1.csv"), random_walk_ticks(&es_next, 11, 1)).unwrap();
    fs::write(dir.join("nq_m1.csv"), random_walk_ticks(&nq_days, 12, 0)).unwrap();
    let cfg = format!(
        r#"seed = 5
{extra}
[scan]
n_min = 10
grid = 40
distance = "KS"

[tests]
p0 = 0.1
tail_size = 40
r_max = 8

[nullsim]
replications = 2

[[contracts]]
label = "NQ"
files = ["nq_m1.csv"]
session = {{ ath_start = "09:00", ath_end = "11:00" }}

[[contracts]]
label = "ES"
files = ["es_m1.csv", "es_u1.csv"]
rolls = ["2011-06-09"]
session = {{ ath_start = "09:00", ath_end = "11:00" }}
"#
    );
    let path = dir.join("run.toml");
    fs::write(&path, cfg).unwrap();
    path
}

/// Every file under `root` with its bytes, keyed by relative path.
pub fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV written by the tool (provenance comment and header skipped).
pub fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

pub fn csv_header(path: &Path) -> csv::StringRecord {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    r.headers().unwrap().clone()
}
