#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

/// Scenario invocations pinned by golden report files.
pub const GOLDEN: &[(&str, &[&str])] = &[
    ("simple_loop_exact", &["scenario", "simple_loop", "--model", "exact_bell"]),
    ("grandfather_not_exact", &["scenario", "grandfather_not", "--model", "exact_bell"]),
    ("faulty_gun_noisy", &["scenario", "faulty_gun", "--model", "noisy_bell", "--lambda", "0.2"]),
    ("cnot_gun_classical", &["scenario", "cnot_gun", "--model", "classical", "--k", "0.1"]),
    ("two_ctc_cx_noisy", &["scenario", "two_ctc_cx", "--model", "noisy_bell", "--lambda", "0.3"]),
];

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ctc-sim"));
    c.env_remove("CTC_SIM_TOLERANCE");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
        .join(format!("{name}.json"))
}
