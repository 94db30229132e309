use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::paths::{CadlagPath, LatticeSegment, TimeGrid};

/// One admissible control action: a label plus the number the drift sees.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPoint {
    pub label: String,
    pub value: f64,
}

impl ControlPoint {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        Self {
            label: label.into(),
            value,
        }
    }
}

/// A finite, ordered set of control actions. Order matters: ties in the
/// DP minimisation go to the lowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSet {
    points: Vec<ControlPoint>,
}

impl ControlSet {
    pub fn new(points: Vec<ControlPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("control set is empty".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.value.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "control `{}` has a non-finite value",
                    p.label
                )));
            }
            if points[..i].iter().any(|q| q.label == p.label) {
                return Err(Error::InvalidInput(format!(
                    "duplicate control label `{}`",
                    p.label
                )));
            }
        }
        Ok(Self { points })
    }

    /// Controls labelled by their values, e.g. `[-1, 0, 1]`.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&v| ControlPoint::new(format!("{v}"), v))
                .collect(),
        )
    }

    pub fn points(&self) -> &[ControlPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&ControlPoint> {
        self.points.get(index)
    }
}

/// `phi(offset)` scaled by `gain`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lag {
    pub offset: f64,
    pub gain: f64,
}

/// `gain * \int_{-r}^0 phi(s) w(s) ds` with a step-function weight `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedIntegral {
    pub weight: CadlagPath,
    pub gain: f64,
}

/// `bias + sum_i gain_i phi(r_i) + sum_j gain_j \int phi w_j`: the inner
/// linear part of the saturated families.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearFunctional {
    pub bias: f64,
    pub lags: Vec<Lag>,
    pub integrals: Vec<WeightedIntegral>,
}

impl LinearFunctional {
    fn validate(&self, delay: f64) -> Result<()> {
        if !self.bias.is_finite() {
            return Err(Error::InvalidInput("functional bias is not finite".into()));
        }
        for lag in &self.lags {
            if !(lag.offset >= -delay && lag.offset <= 0.0 && lag.gain.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "lag offset {} outside [-{delay}, 0] or gain not finite",
                    lag.offset
                )));
            }
        }
        for w in &self.integrals {
            if w.weight.start() > -delay || !w.gain.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "weight must be defined from -{delay}"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, seg: &CadlagPath, delay: f64) -> Result<f64> {
        let lo = seg.start().max(-delay);
        let mut total = self.bias;
        for lag in &self.lags {
            // `lo` is within rounding of -r once the domain check passed.
            total += lag.gain * seg.eval(lag.offset.max(lo)).unwrap_or(0.0);
        }
        for w in &self.integrals {
            total += w.gain * seg.integrate_product(&w.weight, lo, 0.0)?;
        }
        Ok(total)
    }

    /// Sup-norm Lipschitz constant: `sum |gain_i| + sum |gain_j| ||w_j||_1`.
    pub fn lipschitz(&self, delay: f64) -> f64 {
        let lags: f64 = self.lags.iter().map(|l| l.gain.abs()).sum();
        let weights: f64 = self
            .integrals
            .iter()
            .map(|w| {
                let abs_w = CadlagPath::new(
                    w.weight.breakpoints().to_vec(),
                    w.weight.values().iter().map(|v| v.abs()).collect(),
                )
                .expect("weight already validated");
                let one = CadlagPath::constant(-delay, 1.0);
                w.gain.abs() * abs_w.integrate_product(&one, -delay, 0.0).unwrap_or(0.0)
            })
            .sum();
        lags + weights
    }

    /// Oldest time offset the functional reads (0 when it reads no history).
    pub fn oldest_offset(&self, delay: f64) -> f64 {
        let lags = self.lags.iter().filter(|l| l.gain != 0.0).map(|l| l.offset);
        let supports = self
            .integrals
            .iter()
            .filter(|w| w.gain != 0.0)
            .filter_map(|w| {
                let bps = w.weight.breakpoints();
                let vals = w.weight.values();
                (0..bps.len())
                    .find(|&i| vals[i] != 0.0 && (i + 1 == bps.len() || bps[i + 1] > -delay))
                    .and_then(|i| {
                        let t = bps[i].max(-delay);
                        (t < 0.0).then_some(t)
                    })
            });
        lags.chain(supports).fold(0.0, f64::min)
    }
}

/// `g(gamma) = gain * gamma + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlFactor {
    pub gain: f64,
    pub offset: f64,
}

impl ControlFactor {
    pub const IDENTITY: Self = Self {
        gain: 1.0,
        offset: 0.0,
    };

    pub fn eval(&self, control: &ControlPoint) -> f64 {
        self.gain * control.value + self.offset
    }
}

/// The separable drift `f(lags, weighted integrals) * g(gamma)` with
/// `f = clamp(linear, -B, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturatedLinearDrift {
    pub functional: LinearFunctional,
    pub saturation: f64,
    pub control: ControlFactor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Drift {
    /// `b = value`, no history or control dependence.
    Constant(f64),
    SaturatedLinear(SaturatedLinearDrift),
}

impl Drift {
    fn eval(&self, seg: &CadlagPath, delay: f64, control: &ControlPoint) -> Result<f64> {
        match self {
            Self::Constant(v) => Ok(*v),
            Self::SaturatedLinear(d) => {
                let inner = d.functional.eval(seg, delay)?;
                Ok(inner.clamp(-d.saturation, d.saturation) * d.control.eval(control))
            }
        }
    }

    fn sup_abs(&self, controls: &ControlSet) -> f64 {
        match self {
            Self::Constant(v) => v.abs(),
            Self::SaturatedLinear(d) => {
                let g = controls
                    .points()
                    .iter()
                    .map(|c| d.control.eval(c).abs())
                    .fold(0.0, f64::max);
                let bias_cap = if d.functional.lags.is_empty() && d.functional.integrals.is_empty()
                {
                    d.functional.bias.abs()
                } else {
                    f64::INFINITY
                };
                d.saturation.min(bias_cap) * g
            }
        }
    }

    fn lipschitz(&self, controls: &ControlSet, delay: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::SaturatedLinear(d) => {
                let g = controls
                    .points()
                    .iter()
                    .map(|c| d.control.eval(c).abs())
                    .fold(0.0, f64::max);
                d.functional.lipschitz(delay) * g
            }
        }
    }

    fn oldest_offset(&self, delay: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::SaturatedLinear(d) => d.functional.oldest_offset(delay),
        }
    }
}

/// The grid-sensitive diffusion functional
/// `sigma0 + min(K, sup{|phi(t) - phi(t-)| : t in A})`, where `A` is the union
/// over levels `m >= 1` of the intervals `(t - 2^{-3m}, t]` at the dyadic
/// points `t = r (n / 2^m - 1)`, `n = 1..=2^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathologicalDiffusion {
    pub floor: f64,
    pub cap: f64,
    /// Highest dyadic level examined. Every double is itself a dyadic
    /// rational of level <= 1074, so the cap is what separates intended
    /// dyadic positions from rounded non-dyadic ones such as `-1/3`.
    pub level_cap: u32,
}

impl PathologicalDiffusion {
    pub const DEFAULT_LEVEL_CAP: u32 = 30;

    pub fn new(floor: f64, cap: f64) -> Self {
        Self {
            floor,
            cap,
            level_cap: Self::DEFAULT_LEVEL_CAP,
        }
    }

    pub fn eval(&self, seg: &CadlagPath, delay: f64) -> f64 {
        let sup = seg
            .jumps()
            .filter(|&(t, _)| t > -delay && t <= 0.0 && in_dyadic_set(t, delay, self.level_cap))
            .map(|(_, size)| size.abs())
            .fold(0.0, f64::max);
        self.floor + sup.min(self.cap)
    }
}

pub const MAX_DYADIC_LEVEL: u32 = 30;

/// Membership of `t` in the union of the level-`m` intervals,
/// `1 <= m <= level_cap`. Points within `1e-12 r` of a dyadic point count as
/// that point, which absorbs rounding in `r (n / 2^m - 1)` for `r != 1`.
/// Levels above [`MAX_DYADIC_LEVEL`] are ignored: their spacing approaches the
/// snapping tolerance, at which point every `t` would count as a member.
pub fn in_dyadic_set(t: f64, delay: f64, level_cap: u32) -> bool {
    let tol = 1e-12 * delay;
    (1..=level_cap.min(MAX_DYADIC_LEVEL)).any(|m| {
        let scale = (1u64 << m) as f64;
        let n = ((t / delay + 1.0) * scale).round();
        let hit = |n: f64| {
            if n < 1.0 || n > scale {
                return false;
            }
            let g = delay * (n / scale - 1.0);
            let width = (2.0f64).powi(-3 * m as i32);
            (t <= g && t > g - width) || (t - g).abs() <= tol
        };
        hit(n) || hit(n + 1.0)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diffusion {
    Constant(f64),
    /// `floor + clamp(|phi(0)|, 0, cap - floor)`.
    AbsCurrent {
        floor: f64,
        cap: f64,
    },
    /// `clamp(linear(phi), floor, cap)`.
    SaturatedLinear {
        functional: LinearFunctional,
        floor: f64,
        cap: f64,
    },
    Pathological(PathologicalDiffusion),
}

impl Diffusion {
    fn eval(&self, seg: &CadlagPath, delay: f64) -> Result<f64> {
        Ok(match self {
            Self::Constant(v) => *v,
            Self::AbsCurrent { floor, cap } => {
                let now = seg.eval(0.0).unwrap_or(0.0);
                floor + now.abs().clamp(0.0, (cap - floor).max(0.0))
            }
            Self::SaturatedLinear {
                functional,
                floor,
                cap,
            } => functional.eval(seg, delay)?.clamp(*floor, *cap),
            Self::Pathological(p) => p.eval(seg, delay),
        })
    }

    fn oldest_offset(&self, delay: f64) -> f64 {
        match self {
            Self::Constant(_) | Self::AbsCurrent { .. } => 0.0,
            Self::SaturatedLinear { functional, .. } => functional.oldest_offset(delay),
            Self::Pathological(_) => -delay,
        }
    }

    fn lipschitz(&self, delay: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::AbsCurrent { .. } => 1.0,
            Self::SaturatedLinear { functional, .. } => functional.lipschitz(delay),
            Self::Pathological(_) => 2.0,
        }
    }

    /// Analytic lower bound of the family.
    pub fn floor(&self) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::AbsCurrent { floor, .. } | Self::SaturatedLinear { floor, .. } => *floor,
            Self::Pathological(p) => p.floor,
        }
    }

    fn validate(&self, delay: f64) -> Result<()> {
        let ok = match self {
            Self::Constant(v) => v.is_finite() && *v > 0.0,
            Self::AbsCurrent { floor, cap } => {
                floor.is_finite() && cap.is_finite() && *floor > 0.0 && cap >= floor
            }
            Self::SaturatedLinear {
                functional,
                floor,
                cap,
            } => {
                functional.validate(delay)?;
                floor.is_finite() && cap.is_finite() && *floor > 0.0 && cap >= floor
            }
            Self::Pathological(p) => {
                p.floor.is_finite() && p.cap.is_finite() && p.floor > 0.0 && p.cap >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "invalid diffusion parameters: {self:?}"
            )))
        }
    }
}

/// Drift and diffusion functionals on `[-r, 0]` together with their declared
/// bound `K` (a natural number), Lipschitz constant `K_L` and ellipticity
/// floor `sigma0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    delay: f64,
    drift: Drift,
    diffusion: Diffusion,
    bound: u32,
    lipschitz: f64,
    ellipticity: f64,
}

impl CoefficientSet {
    pub fn new(
        delay: f64,
        drift: Drift,
        diffusion: Diffusion,
        bound: u32,
        lipschitz: f64,
        ellipticity: f64,
    ) -> Result<Self> {
        if !(delay.is_finite() && delay > 0.0) {
            return Err(Error::InvalidInput(format!(
                "delay must be positive, got {delay}"
            )));
        }
        if bound == 0 {
            return Err(Error::InvalidInput(
                "bound K must be a positive integer".into(),
            ));
        }
        if !(ellipticity.is_finite() && ellipticity > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ellipticity floor must be positive, got {ellipticity}"
            )));
        }
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "Lipschitz constant must be finite and >= 0, got {lipschitz}"
            )));
        }
        match &drift {
            Drift::Constant(v) if !v.is_finite() => {
                return Err(Error::InvalidInput("constant drift is not finite".into()));
            }
            Drift::SaturatedLinear(d) => {
                d.functional.validate(delay)?;
                if !(d.saturation.is_finite()
                    && d.saturation >= 0.0
                    && d.saturation <= bound as f64)
                {
                    return Err(Error::InvalidInput(format!(
                        "drift saturation {} must lie in [0, K = {bound}]",
                        d.saturation
                    )));
                }
                if !(d.control.gain.is_finite() && d.control.offset.is_finite()) {
                    return Err(Error::InvalidInput("control factor is not finite".into()));
                }
            }
            _ => {}
        }
        diffusion.validate(delay)?;
        Ok(Self {
            delay,
            drift,
            diffusion,
            bound,
            lipschitz,
            ellipticity,
        })
    }

    /// Builds the set with `K_L` from the families' closed-form Lipschitz
    /// constants and `sigma0` from the diffusion family's floor.
    pub fn with_derived_constants(
        delay: f64,
        drift: Drift,
        diffusion: Diffusion,
        bound: u32,
        controls: &ControlSet,
    ) -> Result<Self> {
        let lipschitz = drift.lipschitz(controls, delay) + diffusion.lipschitz(delay);
        let floor = diffusion.floor();
        Self::new(delay, drift, diffusion, bound, lipschitz, floor)
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn drift(&self) -> &Drift {
        &self.drift
    }

    pub fn diffusion(&self) -> &Diffusion {
        &self.diffusion
    }

    /// Declared global bound `K`.
    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn ellipticity(&self) -> f64 {
        self.ellipticity
    }

    /// The same coefficients with different declared constants.
    pub fn with_declared(mut self, bound: u32, lipschitz: f64, ellipticity: f64) -> Result<Self> {
        self = Self::new(
            self.delay,
            self.drift,
            self.diffusion,
            bound,
            lipschitz,
            ellipticity,
        )?;
        Ok(self)
    }

    fn check_domain(&self, seg: &CadlagPath) -> Result<()> {
        if seg.start() > -self.delay * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "segment starts at {} but the coefficients read back to -{}",
                seg.start(),
                self.delay
            )));
        }
        Ok(())
    }

    pub fn eval_drift(&self, seg: &CadlagPath, control: &ControlPoint) -> Result<f64> {
        self.check_domain(seg)?;
        self.drift.eval(seg, self.delay, control)
    }

    pub fn eval_diffusion(&self, seg: &CadlagPath) -> Result<f64> {
        self.check_domain(seg)?;
        self.diffusion.eval(seg, self.delay)
    }

    /// `b` and `sigma` at the interpolation of a lattice window.
    pub fn eval_on_window(
        &self,
        window: &LatticeSegment,
        control: &ControlPoint,
    ) -> Result<(f64, f64)> {
        let path = window.to_path();
        Ok((
            self.eval_drift(&path, control)?,
            self.eval_diffusion(&path)?,
        ))
    }

    /// How many trailing window entries (at least 1, at most `M + 1`) the
    /// coefficients read on the grid of degree `M`.
    pub fn memory_depth(&self, grid: &TimeGrid) -> usize {
        let oldest = self
            .drift
            .oldest_offset(self.delay)
            .min(self.diffusion.oldest_offset(self.delay));
        let m = grid.degree();
        // Last slot whose interval [(j-M)h, (j-M+1)h) covers `oldest`.
        let slot = (0..=m)
            .rev()
            .find(|&j| grid.offset_of(j) <= oldest)
            .unwrap_or(0);
        m + 1 - slot
    }

    /// Closed-form `sup |b|` over all segments and the given controls.
    pub fn drift_sup(&self, controls: &ControlSet) -> f64 {
        self.drift.sup_abs(controls)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn controls() -> ControlSet {
        ControlSet::from_values(&[-1.0, 0.0, 1.0]).unwrap()
    }

    fn lag_drift(offset: f64, gain: f64, saturation: f64, control_gain: f64) -> Drift {
        Drift::SaturatedLinear(SaturatedLinearDrift {
            functional: LinearFunctional {
                bias: 0.0,
                lags: vec![Lag { offset, gain }],
                integrals: vec![],
            },
            saturation,
            control: ControlFactor {
                gain: control_gain,
                offset: 0.0,
            },
        })
    }

    fn coeffs(drift: Drift, diffusion: Diffusion) -> CoefficientSet {
        CoefficientSet::new(1.0, drift, diffusion, 5, 10.0, 0.1).unwrap()
    }

    #[test]
    fn control_set_rules() {
        assert!(ControlSet::new(vec![]).is_err());
        assert!(ControlSet::new(vec![
            ControlPoint::new("a", 1.0),
            ControlPoint::new("a", 2.0)
        ])
        .is_err());
        assert!(ControlSet::new(vec![ControlPoint::new("a", f64::NAN)]).is_err());
        assert_eq!(controls().len(), 3);
    }

    #[test]
    fn drift_examples() {
        let one = ControlPoint::new("one", 1.0);
        let c = coeffs(lag_drift(-1.0, 1.0, 5.0, 1.0), Diffusion::Constant(1.0));
        let zero = CadlagPath::constant(-1.0, 0.0);
        assert_eq!(c.eval_drift(&zero, &one).unwrap(), 0.0);

        let phi = CadlagPath::new(vec![-1.0, -0.5], vec![0.3, -2.0]).unwrap();
        assert!((c.eval_drift(&phi, &one).unwrap() - 0.3).abs() < 1e-15);

        let integral = Drift::SaturatedLinear(SaturatedLinearDrift {
            functional: LinearFunctional {
                bias: 0.0,
                lags: vec![],
                integrals: vec![WeightedIntegral {
                    weight: CadlagPath::constant(-1.0, 1.0),
                    gain: 1.0,
                }],
            },
            saturation: 5.0,
            control: ControlFactor::IDENTITY,
        });
        let c = coeffs(integral, Diffusion::Constant(1.0));
        let flat = CadlagPath::constant(-1.0, 0.7);
        let two = ControlPoint::new("two", 2.0);
        assert!((c.eval_drift(&flat, &two).unwrap() - 1.4).abs() < 1e-15);
    }

    #[test]
    fn drift_saturates() {
        let c = coeffs(lag_drift(0.0, 10.0, 2.0, 1.0), Diffusion::Constant(1.0));
        let big = CadlagPath::constant(-1.0, 3.0);
        assert_eq!(
            c.eval_drift(&big, &ControlPoint::new("u", -1.0)).unwrap(),
            -2.0
        );
    }

    #[test]
    fn short_segments_are_domain_errors() {
        let c = coeffs(lag_drift(-1.0, 1.0, 1.0, 1.0), Diffusion::Constant(1.0));
        let short = CadlagPath::constant(-0.5, 0.0);
        assert!(matches!(
            c.eval_drift(&short, &ControlPoint::new("u", 1.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(c.eval_diffusion(&short), Err(Error::Domain(_))));
    }

    #[test]
    fn diffusion_examples() {
        let c = coeffs(Drift::Constant(0.0), Diffusion::Constant(1.0));
        assert_eq!(
            c.eval_diffusion(&CadlagPath::constant(-1.0, 9.0)).unwrap(),
            1.0
        );

        let c = CoefficientSet::new(
            1.0,
            Drift::Constant(0.0),
            Diffusion::AbsCurrent {
                floor: 0.5,
                cap: 1.0,
            },
            1,
            1.0,
            0.5,
        )
        .unwrap();
        let phi = CadlagPath::new(vec![-1.0, -0.1], vec![5.0, 0.2]).unwrap();
        assert!((c.eval_diffusion(&phi).unwrap() - 0.7).abs() < 1e-15);
        let huge = CadlagPath::constant(-1.0, -40.0);
        assert_eq!(c.eval_diffusion(&huge).unwrap(), 1.0);
        assert_eq!(
            c.eval_diffusion(&CadlagPath::constant(-1.0, 0.0)).unwrap(),
            0.5
        );
    }

    #[test]
    fn dyadic_membership() {
        assert!(in_dyadic_set(-0.5, 1.0, 60));
        assert!(in_dyadic_set(0.0, 1.0, 60));
        assert!(in_dyadic_set(-0.75, 1.0, 60));
        // inside (-0.5 - 1/8, -0.5]
        assert!(in_dyadic_set(-0.55, 1.0, 60));
        // -0.626 sits in the level-3 window below -0.625; -0.63 sits in none
        assert!(in_dyadic_set(-0.626, 1.0, 60));
        assert!(!in_dyadic_set(-0.63, 1.0, 60));
        assert!(!in_dyadic_set(-1.0 / 3.0, 1.0, 60));
        assert!(!in_dyadic_set(-2.0 / 3.0, 1.0, 60));
        // -r itself is never a jump position in (-r, 0]
        assert!(!in_dyadic_set(-1.0 + 1e-3, 1.0, 60));
    }

    #[test]
    fn pathological_examples() {
        let p = PathologicalDiffusion::new(0.5, 1.0);
        assert_eq!(p.eval(&CadlagPath::constant(-1.0, 0.2), 1.0), 0.5);
        let on = CadlagPath::new(vec![-1.0, -0.5], vec![0.0, 0.3]).unwrap();
        assert!((p.eval(&on, 1.0) - 0.8).abs() < 1e-15);
        let off = CadlagPath::new(vec![-1.0, -1.0 / 3.0], vec![0.0, 0.3]).unwrap();
        assert_eq!(p.eval(&off, 1.0), 0.5);
        let big = CadlagPath::new(vec![-1.0, -0.5], vec![0.0, 3.0]).unwrap();
        assert_eq!(p.eval(&big, 1.0), 1.5);
    }

    #[test]
    fn memory_depth_follows_oldest_read() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let markov = coeffs(Drift::Constant(0.1), Diffusion::Constant(1.0));
        assert_eq!(markov.memory_depth(&g), 1);
        let full = coeffs(lag_drift(-1.0, 1.0, 1.0, 1.0), Diffusion::Constant(1.0));
        assert_eq!(full.memory_depth(&g), 5);
        let half = coeffs(lag_drift(-0.5, 1.0, 1.0, 1.0), Diffusion::Constant(1.0));
        assert_eq!(half.memory_depth(&g), 3);
        let between = coeffs(lag_drift(-0.3, 1.0, 1.0, 1.0), Diffusion::Constant(1.0));
        assert_eq!(between.memory_depth(&g), 3);
        let patho = coeffs(
            Drift::Constant(0.0),
            Diffusion::Pathological(PathologicalDiffusion::new(0.5, 1.0)),
        );
        assert_eq!(patho.memory_depth(&g), 5);
    }

    #[test]
    fn construction_rejects_bad_constants() {
        assert!(CoefficientSet::new(
            1.0,
            Drift::Constant(0.0),
            Diffusion::Constant(1.0),
            0,
            1.0,
            1.0
        )
        .is_err());
        assert!(CoefficientSet::new(
            1.0,
            Drift::Constant(0.0),
            Diffusion::Constant(1.0),
            1,
            1.0,
            0.0
        )
        .is_err());
        assert!(CoefficientSet::new(
            1.0,
            lag_drift(-2.0, 1.0, 1.0, 1.0),
            Diffusion::Constant(1.0),
            1,
            1.0,
            1.0
        )
        .is_err());
        assert!(CoefficientSet::new(
            1.0,
            lag_drift(-1.0, 1.0, 2.0, 1.0),
            Diffusion::Constant(1.0),
            1,
            1.0,
            1.0
        )
        .is_err());
    }

    #[test]
    fn derived_constants() {
        let c = CoefficientSet::with_derived_constants(
            1.0,
            lag_drift(-1.0, 2.0, 1.0, 0.5),
            Diffusion::AbsCurrent {
                floor: 0.5,
                cap: 1.0,
            },
            1,
            &controls(),
        )
        .unwrap();
        assert_eq!(c.lipschitz(), 2.0);
        assert_eq!(c.ellipticity(), 0.5);
        assert_eq!(c.drift_sup(&controls()), 0.5);
    }
}
