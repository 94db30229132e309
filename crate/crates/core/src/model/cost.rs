use alloc::format;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::ControlPoint;

/// `k(x, gamma) = constant + state_sq * x^2 + control_sq * gamma^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunningCost {
    pub constant: f64,
    pub state_sq: f64,
    pub control_sq: f64,
}

impl RunningCost {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            state_sq: 0.0,
            control_sq: 0.0,
        }
    }

    pub fn eval(&self, x: f64, control: &ControlPoint) -> f64 {
        self.constant + self.state_sq * x * x + self.control_sq * control.value * control.value
    }

    fn coefficients(&self) -> [f64; 3] {
        [self.constant, self.state_sq, self.control_sq]
    }
}

/// `g(x) = constant + state_sq * x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCost {
    pub constant: f64,
    pub state_sq: f64,
}

impl BoundaryCost {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            state_sq: 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.constant + self.state_sq * x * x
    }
}

/// Running and boundary cost, discount rate, stopping interval and horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSpec {
    running: RunningCost,
    boundary: BoundaryCost,
    discount: f64,
    interval: (f64, f64),
    horizon: f64,
}

impl CostSpec {
    pub fn new(
        running: RunningCost,
        boundary: BoundaryCost,
        discount: f64,
        interval: (f64, f64),
        horizon: f64,
    ) -> Result<Self> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !running.coefficients().into_iter().all(nonneg)
            || !nonneg(boundary.constant)
            || !nonneg(boundary.state_sq)
        {
            return Err(Error::InvalidInput(
                "cost coefficients must be finite and nonnegative".into(),
            ));
        }
        if !nonneg(discount) {
            return Err(Error::InvalidInput(format!(
                "discount rate must be >= 0, got {discount}"
            )));
        }
        let (lo, hi) = interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!(
                "interval [{lo}, {hi}] must have lo < hi"
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(Self {
            running,
            boundary,
            discount,
            interval,
            horizon,
        })
    }

    pub fn running(&self) -> &RunningCost {
        &self.running
    }

    pub fn boundary(&self) -> &BoundaryCost {
        &self.boundary
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Both costs multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let r = self.running;
        let b = self.boundary;
        Self::new(
            RunningCost {
                constant: r.constant * factor,
                state_sq: r.state_sq * factor,
                control_sq: r.control_sq * factor,
            },
            BoundaryCost {
                constant: b.constant * factor,
                state_sq: b.state_sq * factor,
            },
            self.discount,
            self.interval,
            self.horizon,
        )
    }

    pub fn with_discount(&self, discount: f64) -> Result<Self> {
        Self::new(
            self.running,
            self.boundary,
            discount,
            self.interval,
            self.horizon,
        )
    }

    pub fn with_running(&self, running: RunningCost) -> Result<Self> {
        Self::new(
            running,
            self.boundary,
            self.discount,
            self.interval,
            self.horizon,
        )
    }

    /// `sup k` over `x` in the interval and the given controls.
    pub fn running_sup(&self, controls: &[ControlPoint]) -> f64 {
        let (lo, hi) = self.interval;
        let x2 = lo.abs().max(hi.abs()).powi(2);
        let g2 = controls
            .iter()
            .map(|c| c.value * c.value)
            .fold(0.0, f64::max);
        self.running.constant + self.running.state_sq * x2 + self.running.control_sq * g2
    }

    /// `sup g` over the interval widened by `margin` on both sides.
    pub fn boundary_sup(&self, margin: f64) -> f64 {
        let (lo, hi) = self.interval;
        let x = (lo - margin).abs().max((hi + margin).abs());
        self.boundary.eval(x)
    }
}
