//! CSV report files.
//!
//! Every run writes all five files, headers included, so empty result sets
//! give header-only files. Reals are rendered with 17 significant digits in
//! `d.dddddddddddddddde±XX` form; missing values are empty fields.
//!
//! | file              | columns |
//! |-------------------|---------|
//! | `study.csv`       | `degree,step,states,transitions,value,abs_diff,error` |
//! | `consistency.csv` | `sample,mean_error,variance_error` |
//! | `qv.csv`          | `n,qv_deviation,bound` |
//! | `policy.csv`      | `layer,state,value,control` |
//! | `benchmark.csv`   | `degree,step,value,walk_oracle,oracle_diff,continuous,continuous_error` |

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};

/// `x` with 17 significant digits, exponent signed and at least two digits.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn opt_real(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub degree: usize,
    pub step: f64,
    pub states: Option<u64>,
    pub transitions: Option<u64>,
    pub value: Option<f64>,
    /// `|V^M - V^{previous M}|` against the previous successful row.
    pub abs_diff: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyRow {
    pub sample: usize,
    pub mean_error: f64,
    pub variance_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QvRow {
    pub n: usize,
    /// `max over paths |<W>_n - n h|`.
    pub qv_deviation: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRow {
    pub layer: usize,
    /// Trailing window indices joined by `;`.
    pub state: String,
    pub value: f64,
    /// Empty for stopped states.
    pub control: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkRow {
    pub degree: usize,
    pub step: f64,
    pub value: f64,
    pub walk_oracle: f64,
    pub oracle_diff: f64,
    pub continuous: f64,
    pub continuous_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Reports {
    pub study: Vec<StudyRow>,
    pub consistency: Vec<ConsistencyRow>,
    pub qv: Vec<QvRow>,
    pub policy: Vec<PolicyRow>,
    pub benchmark: Vec<BenchmarkRow>,
}

pub const STUDY_HEADER: [&str; 7] = [
    "degree",
    "step",
    "states",
    "transitions",
    "value",
    "abs_diff",
    "error",
];
pub const CONSISTENCY_HEADER: [&str; 3] = ["sample", "mean_error", "variance_error"];
pub const QV_HEADER: [&str; 3] = ["n", "qv_deviation", "bound"];
pub const POLICY_HEADER: [&str; 4] = ["layer", "state", "value", "control"];
pub const BENCHMARK_HEADER: [&str; 7] = [
    "degree",
    "step",
    "value",
    "walk_oracle",
    "oracle_diff",
    "continuous",
    "continuous_error",
];

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the five report files into `dir`, creating it if needed, and
/// returns their paths.
pub fn emit_reports(reports: &Reports, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = |name: &str| dir.join(name);

    let study = path("study.csv");
    write_csv(
        &study,
        &STUDY_HEADER,
        reports.study.iter().map(|r| {
            vec![
                r.degree.to_string(),
                fmt_real(r.step),
                r.states.map(|s| s.to_string()).unwrap_or_default(),
                r.transitions.map(|s| s.to_string()).unwrap_or_default(),
                opt_real(r.value),
                opt_real(r.abs_diff),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )?;

    let consistency = path("consistency.csv");
    write_csv(
        &consistency,
        &CONSISTENCY_HEADER,
        reports.consistency.iter().map(|r| {
            vec![
                r.sample.to_string(),
                fmt_real(r.mean_error),
                fmt_real(r.variance_error),
            ]
        }),
    )?;

    let qv = path("qv.csv");
    write_csv(
        &qv,
        &QV_HEADER,
        reports
            .qv
            .iter()
            .map(|r| vec![r.n.to_string(), fmt_real(r.qv_deviation), fmt_real(r.bound)]),
    )?;

    let policy = path("policy.csv");
    write_csv(
        &policy,
        &POLICY_HEADER,
        reports.policy.iter().map(|r| {
            vec![
                r.layer.to_string(),
                r.state.clone(),
                fmt_real(r.value),
                r.control.clone(),
            ]
        }),
    )?;

    let benchmark = path("benchmark.csv");
    write_csv(
        &benchmark,
        &BENCHMARK_HEADER,
        reports.benchmark.iter().map(|r| {
            vec![
                r.degree.to_string(),
                fmt_real(r.step),
                fmt_real(r.value),
                fmt_real(r.walk_oracle),
                fmt_real(r.oracle_diff),
                fmt_real(r.continuous),
                fmt_real(r.continuous_error),
            ]
        }),
    )?;

    Ok(vec![study, consistency, qv, policy, benchmark])
}
