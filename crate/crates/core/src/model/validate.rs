use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{CoefficientSet, ControlSet};
use crate::paths::CadlagPath;

/// A declared constant contradicted by a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    DriftBound { observed: f64, declared: f64 },
    DiffusionBound { observed: f64, declared: f64 },
    Lipschitz { observed: f64, declared: f64 },
    Ellipticity { observed: f64, declared: f64 },
}

/// Empirical spot-check of the boundedness, Lipschitz and ellipticity
/// constants declared on a [`CoefficientSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub max_abs_drift: f64,
    pub max_abs_diffusion: f64,
    pub min_diffusion: f64,
    pub max_lipschitz_quotient: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const CELLS: usize = 32;
const RANGE: f64 = 2.0;

fn random_segment(rng: &mut ChaCha8Rng, delay: f64) -> CadlagPath {
    let breakpoints = (0..CELLS)
        .map(|j| -delay + delay * j as f64 / CELLS as f64)
        .collect();
    let values = (0..CELLS)
        .map(|_| rng.random_range(-RANGE..RANGE))
        .collect();
    CadlagPath::new(breakpoints, values).expect("grid breakpoints are increasing")
}

fn perturbed(rng: &mut ChaCha8Rng, seg: &CadlagPath) -> (CadlagPath, f64) {
    let scale = rng.random_range(1e-3..0.5);
    let values: Vec<f64> = seg
        .values()
        .iter()
        .map(|v| v + scale * rng.random_range(-1.0..1.0))
        .collect();
    let dist = seg
        .values()
        .iter()
        .zip(&values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (
        CadlagPath::new(seg.breakpoints().to_vec(), values).expect("same breakpoints"),
        dist,
    )
}

/// Samples `samples` random step segments (and a perturbed partner for each)
/// and compares what the coefficients do against the declared constants.
/// Coefficient evaluation errors on the sampled segments cannot occur since
/// every sample covers `[-r, 0]`.
pub fn validate_assumptions(
    coeffs: &CoefficientSet,
    controls: &ControlSet,
    samples: usize,
    seed: u64,
) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_b: f64 = 0.0;
    let mut max_s: f64 = 0.0;
    let mut min_s = f64::INFINITY;
    let mut max_q: f64 = 0.0;
    for _ in 0..samples.max(1) {
        let a = random_segment(&mut rng, coeffs.delay());
        let (b, dist) = perturbed(&mut rng, &a);
        let sa = coeffs.eval_diffusion(&a).unwrap_or(f64::NAN);
        let sb = coeffs.eval_diffusion(&b).unwrap_or(f64::NAN);
        max_s = max_s.max(sa.abs()).max(sb.abs());
        min_s = min_s.min(sa).min(sb);
        for u in controls.points() {
            let ba = coeffs.eval_drift(&a, u).unwrap_or(f64::NAN);
            let bb = coeffs.eval_drift(&b, u).unwrap_or(f64::NAN);
            max_b = max_b.max(ba.abs()).max(bb.abs());
            if dist > 0.0 {
                max_q = max_q.max(((ba - bb).abs() + (sa - sb).abs()) / dist);
            }
        }
    }

    let k = coeffs.bound() as f64;
    let mut violations = Vec::new();
    if max_b > k {
        violations.push(Violation::DriftBound {
            observed: max_b,
            declared: k,
        });
    }
    if max_s > k {
        violations.push(Violation::DiffusionBound {
            observed: max_s,
            declared: k,
        });
    }
    // Small slack for rounding in the quotient itself.
    if max_q > coeffs.lipschitz() * (1.0 + 1e-9) + 1e-12 {
        violations.push(Violation::Lipschitz {
            observed: max_q,
            declared: coeffs.lipschitz(),
        });
    }
    if min_s < coeffs.ellipticity() {
        violations.push(Violation::Ellipticity {
            observed: min_s,
            declared: coeffs.ellipticity(),
        });
    }
    ValidationReport {
        samples: samples.max(1),
        max_abs_drift: max_b,
        max_abs_diffusion: max_s,
        min_diffusion: min_s,
        max_lipschitz_quotient: max_q,
        violations,
    }
}
