//! Helpers shared by the command-line test targets.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cvboost<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_cvboost"))
        .arg("--quiet")
        .args(args)
        .env_remove("CVBOOST_JOBS")
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn assert_ok(out: &Output) {
    assert_eq!(code(out), 0, "stderr: {}", stderr(out));
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Parses a CSV file into a header and string records.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    parse_csv(&std::fs::read(path).expect("output exists"))
}

pub fn parse_csv(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

pub struct Files {
    pub data: PathBuf,
    pub schema: PathBuf,
}

/// Regression data: `y = 2x + [c ∈ {a, b}] + noise`; `z` is pure noise.
pub fn regression_files(dir: &Path, n: usize, seed: u64) -> Files {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::from("x,c,z,y\n");
    let labels = ["a", "b", "c", "d", "e"];
    for _ in 0..n {
        let x: f64 = rng.random_range(0.0..1.0);
        let c = labels[rng.random_range(0..labels.len())];
        let z: f64 = rng.random();
        let y = 2.0 * x + if c < "c" { 1.0 } else { 0.0 } + 0.1 * rng.random::<f64>();
        text.push_str(&format!("{x},{c},{z},{y}\n"));
    }
    write_files(dir, "reg", &text, r#"{"target":"y","task":"regression","columns":{"x":"numeric","c":"categorical","z":"numeric","y":"numeric"}}"#)
}

/// Binary data whose label depends on `x` and on category `c`.
pub fn binary_files(dir: &Path, n: usize, seed: u64) -> Files {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::from("x,c,label\n");
    for _ in 0..n {
        let x: f64 = rng.random_range(-2.0..2.0);
        let c = rng.random_range(0..6u32);
        let p = 1.0 / (1.0 + (-(1.5 * x + if c < 2 { 1.0 } else { -0.5 })).exp());
        let y = u8::from(rng.random::<f64>() < p);
        text.push_str(&format!("{x},k{c},{y}\n"));
    }
    write_files(dir, "bin", &text, r#"{"target":"label","task":"binary","columns":{"x":"numeric","c":"categorical","label":"numeric"}}"#)
}

fn write_files(dir: &Path, stem: &str, csv: &str, schema: &str) -> Files {
    let data = dir.join(format!("{stem}.csv"));
    let schema_path = dir.join(format!("{stem}.schema.json"));
    std::fs::write(&data, csv).unwrap();
    std::fs::write(&schema_path, schema).unwrap();
    Files { data, schema: schema_path }
}
