//! Convergence study of `V^M(phi)` across degrees.
//!
//! The continuous value is not computable, so the study reports successive
//! differences `|V^M - V^{previous M}|` instead of a true limit error.

use std::time::Duration;

use delaymca_core::solver::solve_dp;

use crate::config::ProblemConfig;
use crate::error::{HarnessError, Result};
use crate::report::StudyRow;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    /// One row per distinct degree, increasing.
    pub rows: Vec<StudyRow>,
    /// Solve time per row; kept out of the CSV so reruns are byte-identical.
    pub wall_times: Vec<Option<Duration>>,
}

impl StudyReport {
    pub fn differences(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.abs_diff).collect()
    }

    /// The last difference does not exceed the first. False when no
    /// difference could be formed.
    pub fn final_not_above_first(&self) -> bool {
        let d = self.differences();
        match (d.first(), d.last()) {
            (Some(first), Some(last)) => last <= first,
            _ => false,
        }
    }

    /// Every difference is at most its predecessor.
    pub fn nonincreasing(&self) -> bool {
        let d = self.differences();
        !d.is_empty() && d.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Solves every configured degree. A degree that fails (infeasible kernel,
/// state budget) is recorded with its error and the study moves on.
pub fn run_study(config: &ProblemConfig) -> Result<StudyReport> {
    let mut degrees = config.degrees.clone();
    degrees.sort_unstable();
    degrees.dedup();
    if degrees.len() < 2 {
        return Err(HarnessError::InvalidParams(
            "a study needs at least two distinct degrees".into(),
        ));
    }
    let mut rows = Vec::with_capacity(degrees.len());
    let mut wall_times = Vec::with_capacity(degrees.len());
    let mut previous: Option<f64> = None;
    for m in degrees {
        let step = config.delay / m as f64;
        let solved = config
            .problem(m)
            .and_then(|p| solve_dp(&p).map_err(HarnessError::from));
        match solved {
            Ok((r, _)) => {
                rows.push(StudyRow {
                    degree: m,
                    step,
                    states: Some(r.layer_counts.iter().map(|&c| c as u64).sum()),
                    transitions: Some(r.expanded_transitions),
                    value: Some(r.value),
                    abs_diff: previous.map(|v| (r.value - v).abs()),
                    error: None,
                });
                wall_times.push(r.wall_time);
                previous = Some(r.value);
            }
            Err(e) => {
                rows.push(StudyRow {
                    degree: m,
                    step,
                    states: None,
                    transitions: None,
                    value: None,
                    abs_diff: None,
                    error: Some(format!("{}: {e}", e.kind())),
                });
                wall_times.push(None);
            }
        }
    }
    Ok(StudyReport { rows, wall_times })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::brownian_config;

    #[test]
    fn single_degree_is_rejected() {
        assert!(matches!(
            run_study(&brownian_config(&[4])),
            Err(HarnessError::InvalidParams(_))
        ));
        assert!(matches!(
            run_study(&brownian_config(&[4, 4])),
            Err(HarnessError::InvalidParams(_))
        ));
    }

    #[test]
    fn rows_are_ordered_and_failures_recorded() {
        let mut c = brownian_config(&[16, 4, 9]);
        c.state_budget = 60;
        let r = run_study(&c).unwrap();
        assert_eq!(
            r.rows.iter().map(|r| r.degree).collect::<Vec<_>>(),
            vec![4, 9, 16]
        );
        assert_eq!(r.rows[0].value, Some(0.25));
        assert_eq!(r.rows[0].abs_diff, None);
        assert!(r.rows[2]
            .error
            .as_deref()
            .unwrap()
            .starts_with("resource-cap"));
        assert_eq!(r.failed_rows(), 1);
        assert_eq!(r.differences().len(), 1);
        assert!(r.final_not_above_first() && r.nonincreasing());
    }
}
