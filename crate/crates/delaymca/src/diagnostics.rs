//! `check` and `simulate`: kernel feasibility, assumption spot-checks,
//! moment identities, quadratic variation and Monte Carlo policy evaluation.

use delaymca_core::chain::{
    consistency_report, default_span, qv_bound, random_window, reconstruct_noise, simulate_paths,
    validate_kernel, ConstantControl, KernelFeasibility, MeanEstimate,
};
use delaymca_core::model::{validate_assumptions, ValidationReport};
use delaymca_core::solver::{evaluate_policy_mc, solve_dp, DiscreteProblem, ValueTable};

use crate::config::ProblemConfig;
use crate::error::{HarnessError, Result};
use crate::report::{ConsistencyRow, PolicyRow, QvRow};

const KERNEL_SAMPLES: usize = 2_000;
const ASSUMPTION_SAMPLES: usize = 2_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub kernels: Vec<(usize, KernelFeasibility)>,
    pub assumptions: ValidationReport,
    pub warnings: Vec<String>,
}

impl CheckReport {
    pub fn kernels_feasible(&self) -> bool {
        self.kernels.iter().all(|(_, k)| k.sampled_feasible())
    }
}

/// Samples the kernel on random windows for each degree and spot-checks the
/// declared constants.
pub fn run_check(config: &ProblemConfig, seed: u64) -> Result<CheckReport> {
    let controls = config.control_set()?;
    let coeffs = config.coefficients(&controls)?;
    let mut kernels = Vec::with_capacity(config.degrees.len());
    for &m in &config.degrees {
        let p = config.problem(m)?;
        let kernel = p.kernel();
        let grid = *p.grid();
        let span = default_span(&grid);
        let feas = validate_kernel(
            &kernel,
            &controls,
            &mut |rng| random_window(rng, &grid, span),
            KERNEL_SAMPLES,
            seed,
        )?;
        kernels.push((m, feas));
    }
    Ok(CheckReport {
        kernels,
        assumptions: validate_assumptions(&coeffs, &controls, ASSUMPTION_SAMPLES, seed),
        warnings: config.feasibility_warnings(),
    })
}

/// Table rows for `policy.csv`.
pub fn policy_rows(problem: &DiscreteProblem, table: &ValueTable) -> Vec<PolicyRow> {
    let mut rows = Vec::new();
    for (n, layer) in table.layers().iter().enumerate() {
        for ((key, value), control) in layer.states.iter().zip(&layer.values).zip(&layer.controls) {
            rows.push(PolicyRow {
                layer: n,
                state: key
                    .iter()
                    .map(|k| k.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                value: *value,
                control: control
                    .and_then(|c| problem.controls().get(c))
                    .map(|c| c.label.clone())
                    .unwrap_or_default(),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateReport {
    pub degree: usize,
    pub consistency: Vec<ConsistencyRow>,
    pub qv: Vec<QvRow>,
    /// `W(N)` over the simulated chains; centred at zero.
    pub terminal_noise: MeanEstimate,
    /// Largest `|<W>_n - n h| / bound_n` over paths and steps (`<= 1`).
    pub worst_qv_ratio: f64,
    /// `V^M` and the Monte Carlo cost of the optimal policy, when requested.
    pub policy: Option<(f64, MeanEstimate)>,
}

/// Runs `paths` chains of `N` steps under the fixed control `control`
/// for the noise diagnostics and, with `evaluate_policy`, solves the DP and
/// evaluates the optimal policy by Monte Carlo against `V^M`.
pub fn run_simulate(
    config: &ProblemConfig,
    degree: usize,
    control: &str,
    paths: usize,
    seed: u64,
    evaluate_policy: bool,
) -> Result<SimulateReport> {
    let p = config.problem(degree)?;
    let control_index = p
        .controls()
        .points()
        .iter()
        .position(|c| c.label == control)
        .ok_or_else(|| HarnessError::InvalidParams(format!("unknown control label `{control}`")))?;
    let kernel = p.kernel();
    let grid = *p.grid();

    let report = consistency_report(&kernel, p.controls(), 1_000, default_span(&grid), seed)?;
    let consistency = report
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| ConsistencyRow {
            sample: i,
            mean_error: e.mean_error,
            variance_error: e.variance_error,
        })
        .collect();

    let steps = p.horizon_steps();
    let chains = simulate_paths(
        &kernel,
        p.controls(),
        &ConstantControl(control_index),
        p.initial(),
        steps,
        seed,
        paths,
    )?;
    let h = grid.step();
    let mut deviation = vec![0.0f64; steps + 1];
    let mut terminal = Vec::with_capacity(paths);
    let mut worst_ratio = 0.0f64;
    for chain in &chains {
        let noise = reconstruct_noise(chain, p.controls(), &kernel)?;
        for (n, qv) in noise.quadratic_variation.iter().enumerate() {
            let d = (qv - n as f64 * h).abs();
            deviation[n] = deviation[n].max(d);
            let bound = qv_bound(n, p.coeffs(), &grid);
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(d / bound);
            }
        }
        terminal.push(noise.noise[steps]);
    }
    let qv = deviation
        .iter()
        .enumerate()
        .map(|(n, &d)| QvRow {
            n,
            qv_deviation: d,
            bound: qv_bound(n, p.coeffs(), &grid),
        })
        .collect();

    let policy = if evaluate_policy {
        let (solved, table) = solve_dp(&p)?;
        Some((solved.value, evaluate_policy_mc(&p, &table, paths, seed)?))
    } else {
        None
    };
    Ok(SimulateReport {
        degree,
        consistency,
        qv,
        terminal_noise: MeanEstimate::from_samples(&terminal),
        worst_qv_ratio: worst_ratio,
        policy,
    })
}
