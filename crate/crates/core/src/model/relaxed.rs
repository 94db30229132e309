use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::ControlPoint;

/// A control held constant on `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPiece {
    pub start: f64,
    pub end: f64,
    pub control: ControlPoint,
}

/// Occupation measure of a piecewise-constant control on `[0, T)`: each
/// time section is the Dirac mass at the control in force.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedControlMeasure {
    pieces: Vec<ControlPiece>,
}

impl RelaxedControlMeasure {
    pub fn pieces(&self) -> &[ControlPiece] {
        &self.pieces
    }

    pub fn horizon(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.end)
    }

    /// `rho(Gamma x [0, t])`.
    pub fn mass(&self, t: f64) -> f64 {
        self.pieces.iter().map(|p| overlap(p, 0.0, t)).sum()
    }

    /// Time spent at controls labelled `label` during `[0, t]`.
    pub fn occupation(&self, label: &str, t: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.control.label == label)
            .map(|p| overlap(p, 0.0, t))
            .sum()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.horizon()) {
            return Err(Error::Domain(format!(
                "time {t} outside [0, {}]",
                self.horizon()
            )));
        }
        Ok(())
    }
}

fn overlap(p: &ControlPiece, lo: f64, hi: f64) -> f64 {
    (p.end.min(hi) - p.start.max(lo)).max(0.0)
}

/// Relaxed representation of an ordinary piecewise-constant control. The
/// pieces must tile `[0, T)` in order.
pub fn control_to_relaxed(pieces: &[ControlPiece]) -> Result<RelaxedControlMeasure> {
    let first = pieces
        .first()
        .ok_or_else(|| Error::InvalidInput("control path has no pieces".into()))?;
    if first.start != 0.0 {
        return Err(Error::InvalidInput(format!(
            "control path starts at {} instead of 0",
            first.start
        )));
    }
    for (i, p) in pieces.iter().enumerate() {
        if !(p.start.is_finite() && p.end.is_finite() && p.start < p.end) {
            return Err(Error::InvalidInput(format!(
                "piece {i} has an empty or invalid interval"
            )));
        }
        if i > 0 && pieces[i - 1].end != p.start {
            let kind = if pieces[i - 1].end < p.start {
                "gap"
            } else {
                "overlap"
            };
            return Err(Error::InvalidInput(format!(
                "{kind} between pieces {} and {i}",
                i - 1
            )));
        }
    }
    Ok(RelaxedControlMeasure {
        pieces: pieces.to_vec(),
    })
}

type PolyFn<'a> = dyn Fn(&ControlPoint) -> Vec<f64> + 'a;
type GeneralFn<'a> = dyn Fn(&ControlPoint, f64) -> f64 + 'a;

/// Test function `g(gamma, s)` for [`relaxed_pairing`].
pub enum Integrand<'a> {
    /// Polynomial in time: coefficients `c_0, c_1, ...` of `sum c_i s^i`
    /// per control. Integrated exactly.
    Polynomial(&'a PolyFn<'a>),
    /// Anything else, integrated by adaptive Simpson to absolute tolerance `1e-10`.
    General(&'a GeneralFn<'a>),
}

/// `(g, rho)(t) = \int_{Gamma x [0, t]} g(gamma, s) drho(gamma, s)`.
pub fn relaxed_pairing(g: &Integrand<'_>, rho: &RelaxedControlMeasure, t: f64) -> Result<f64> {
    rho.check_time(t)?;
    let active: Vec<&ControlPiece> = rho.pieces.iter().filter(|p| p.start < t).collect();
    let tol = 1e-10 / active.len().max(1) as f64;
    let mut total = 0.0;
    for p in active {
        let (a, b) = (p.start, p.end.min(t));
        total += match g {
            Integrand::Polynomial(coeffs) => {
                let c = coeffs(&p.control);
                let antiderivative = |s: f64| {
                    c.iter()
                        .enumerate()
                        .map(|(i, ci)| ci * s.powi(i as i32 + 1) / (i + 1) as f64)
                        .sum::<f64>()
                };
                antiderivative(b) - antiderivative(a)
            }
            Integrand::General(f) => adaptive_simpson(&|s| f(&p.control, s), a, b, tol),
        };
    }
    Ok(total)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a >= b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48)
}
