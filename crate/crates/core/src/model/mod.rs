//! Coefficient functionals, cost data and relaxed controls.

mod coefficients;
mod cost;
mod relaxed;
mod validate;

pub use coefficients::{
    in_dyadic_set, CoefficientSet, ControlFactor, ControlPoint, ControlSet, Diffusion, Drift, Lag,
    LinearFunctional, PathologicalDiffusion, SaturatedLinearDrift, WeightedIntegral,
    MAX_DYADIC_LEVEL,
};
pub use cost::{BoundaryCost, CostSpec, RunningCost};
pub use relaxed::{
    control_to_relaxed, relaxed_pairing, ControlPiece, Integrand, RelaxedControlMeasure,
};
pub use validate::{validate_assumptions, ValidationReport, Violation};

use crate::error::Result;
use crate::paths::CadlagPath;

/// `b(seg, gamma)`; free-function form of [`CoefficientSet::eval_drift`].
pub fn eval_drift(
    coeffs: &CoefficientSet,
    seg: &CadlagPath,
    control: &ControlPoint,
) -> Result<f64> {
    coeffs.eval_drift(seg, control)
}

/// `sigma(seg)`; free-function form of [`CoefficientSet::eval_diffusion`].
pub fn eval_diffusion(coeffs: &CoefficientSet, seg: &CadlagPath) -> Result<f64> {
    coeffs.eval_diffusion(seg)
}

/// The grid-sensitive functional on an arbitrary step segment of `[-delay, 0]`.
pub fn eval_pathological_diffusion(
    sigma: &PathologicalDiffusion,
    seg: &CadlagPath,
    delay: f64,
) -> f64 {
    sigma.eval(seg, delay)
}
