//! Driftless exit-time benchmark.
//!
//! With `b = 0`, constant `sigma`, `k = 1`, `g = 0` and `beta = 0` the value
//! is the expected capped exit time. The chain is then a lazy symmetric walk
//! with steps of `K` lattice units, whose `h E[N ^ N]` is computed here by
//! forward propagation of the occupation probabilities. The continuous
//! reference is the uncapped Brownian exit time `(x - lo)(hi - x) / sigma^2`.

use delaymca_core::paths::{round_to_lattice, TimeGrid};
use delaymca_core::solver::solve_dp;

use crate::config::{
    BoundaryModeConfig, DiffusionConfig, DriftConfig, InitialConfig, ProblemConfig,
};
use crate::error::{HarnessError, Result};
use crate::report::BenchmarkRow;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    pub fn max_oracle_diff(&self) -> f64 {
        self.rows.iter().map(|r| r.oracle_diff).fold(0.0, f64::max)
    }
}

/// Parameters of a driftless instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkInstance {
    pub sigma: f64,
    pub bound: u32,
    pub start: f64,
    pub interval: (f64, f64),
    pub horizon: f64,
    pub mode: BoundaryModeConfig,
}

impl WalkInstance {
    /// Extracts the instance, refusing configs outside the driftless pattern.
    pub fn from_config(config: &ProblemConfig) -> Result<Self> {
        let bad = |what: &str| Err(HarnessError::InvalidBenchmark(what.into()));
        if !matches!(config.drift, DriftConfig::Constant { value } if value == 0.0) {
            return bad("drift must be the constant 0");
        }
        let DiffusionConfig::Constant { value: sigma } = config.diffusion else {
            return bad("diffusion must be constant");
        };
        let c = &config.cost;
        if (c.running.constant, c.running.state_sq, c.running.control_sq) != (1.0, 0.0, 0.0) {
            return bad("running cost must be k = 1");
        }
        if (c.boundary.constant, c.boundary.state_sq) != (0.0, 0.0) || c.discount != 0.0 {
            return bad("boundary cost must be g = 0 with no discount");
        }
        let InitialConfig::Constant { value: start } = config.initial else {
            return bad("initial segment must be constant");
        };
        Ok(Self {
            sigma,
            bound: config.bound,
            start,
            interval: (c.interval[0], c.interval[1]),
            horizon: c.horizon,
            mode: config.boundary_mode,
        })
    }

    pub fn continuous_value(&self) -> f64 {
        let (lo, hi) = self.interval;
        ((self.start - lo) * (hi - self.start)).max(0.0) / (self.sigma * self.sigma)
    }

    /// `h E[N ^ N]` for the walk of degree `degree`.
    pub fn walk_oracle(&self, delay: f64, degree: usize) -> Result<f64> {
        let grid = TimeGrid::new(delay, degree)?;
        let s = grid.spacing();
        let k = self.bound as i64;
        let p_move = self.sigma * self.sigma / (2.0 * (k * k) as f64);
        if p_move > 0.5 {
            return Err(HarnessError::InvalidBenchmark(format!(
                "sigma {} exceeds K = {k}",
                self.sigma
            )));
        }
        let (lo, hi) = self.interval;
        let snap = |x: f64| {
            let u = x / s;
            if (u - u.round()).abs() <= 1e-9 * u.round().abs().max(1.0) {
                u.round()
            } else {
                u
            }
        };
        let (lo_u, hi_u) = (snap(lo), snap(hi));
        let alive = |i: i64| {
            let x = i as f64;
            match self.mode {
                BoundaryModeConfig::Interior => lo_u < x && x < hi_u,
                BoundaryModeConfig::ClosedLattice => lo_u <= x && x <= hi_u,
            }
        };
        let start = round_to_lattice(self.start, &grid)?;
        let cap = grid.steps_within(self.horizon);
        if !alive(start) {
            return Ok(0.0);
        }
        // Live indices lie in [first, last]; killed mass is dropped.
        let first = lo_u.floor() as i64;
        let last = hi_u.ceil() as i64;
        let width = (last - first + 1) as usize;
        let mut mass = vec![0.0; width];
        mass[(start - first) as usize] = 1.0;
        let mut expected = 0.0;
        for _ in 0..cap {
            expected += mass.iter().sum::<f64>();
            let mut next = vec![0.0; width];
            for (j, &p) in mass.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let i = first + j as i64;
                for (to, q) in [(i - k, p_move), (i, 1.0 - 2.0 * p_move), (i + k, p_move)] {
                    if q > 0.0 && alive(to) {
                        next[(to - first) as usize] += p * q;
                    }
                }
            }
            mass = next;
        }
        Ok(grid.step() * expected)
    }
}

/// Compares `V^M` on each configured degree with the walk oracle and the
/// continuous exit time.
pub fn run_brownian_benchmark(config: &ProblemConfig) -> Result<BenchmarkReport> {
    let inst = WalkInstance::from_config(config)?;
    let continuous = inst.continuous_value();
    let mut degrees = config.degrees.clone();
    degrees.sort_unstable();
    degrees.dedup();
    let mut rows = Vec::with_capacity(degrees.len());
    for m in degrees {
        let (r, _) = solve_dp(&config.problem(m)?)?;
        let oracle = inst.walk_oracle(config.delay, m)?;
        rows.push(BenchmarkRow {
            degree: m,
            step: config.delay / m as f64,
            value: r.value,
            walk_oracle: oracle,
            oracle_diff: (r.value - oracle).abs(),
            continuous,
            continuous_error: (r.value - continuous).abs(),
        });
    }
    Ok(BenchmarkReport { rows })
}
