#![allow(dead_code)]

use delaymca_core::model::{
    BoundaryCost, CoefficientSet, ControlFactor, ControlSet, CostSpec, Diffusion, Drift, Lag,
    LinearFunctional, RunningCost, SaturatedLinearDrift,
};
use delaymca_core::paths::{InitialSegment, TimeGrid};
use delaymca_core::solver::{BoundaryMode, DiscreteProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape of a randomized instance.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub degree: usize,
    pub controls: usize,
    pub steps: usize,
}

pub fn delayed_drift(rng: &mut ChaCha8Rng, delay: f64, saturation: f64) -> Drift {
    let lags = (0..rng.random_range(1..=3))
        .map(|_| Lag {
            offset: -delay * rng.random_range(0.0..=1.0),
            gain: rng.random_range(-2.0..2.0),
        })
        .collect();
    Drift::SaturatedLinear(SaturatedLinearDrift {
        functional: LinearFunctional {
            bias: rng.random_range(-0.5..0.5),
            lags,
            integrals: vec![],
        },
        saturation,
        control: ControlFactor {
            gain: rng.random_range(0.2..1.0),
            offset: rng.random_range(-0.2..0.2),
        },
    })
}

/// A randomized feasible problem with delayed drift and diffusion, `K = 1`,
/// `r = 1` and exactly `shape.steps` horizon steps.
pub fn random_problem(seed: u64, shape: Shape) -> DiscreteProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delay = 1.0;
    let grid = TimeGrid::new(delay, shape.degree).unwrap();
    let h = grid.step();
    // sigma^2 >= sqrt(h) |b| needs |b| <= floor^2 / sqrt(h).
    let floor = rng.random_range(0.75..0.9);
    // The control factor stays below 1.2 in magnitude.
    let drift = delayed_drift(
        &mut rng,
        delay,
        (0.9 * floor * floor / h.sqrt() / 1.2).min(1.0),
    );
    let diffusion = match rng.random_range(0..3) {
        0 => Diffusion::Constant(rng.random_range(floor..1.0)),
        1 => Diffusion::AbsCurrent { floor, cap: 1.0 },
        _ => Diffusion::SaturatedLinear {
            functional: LinearFunctional {
                bias: 0.9,
                lags: vec![Lag {
                    offset: -delay * rng.random_range(0.0..=1.0),
                    gain: rng.random_range(-0.5..0.5),
                }],
                integrals: vec![],
            },
            floor,
            cap: 1.0,
        },
    };
    let values: Vec<f64> = (0..shape.controls)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let controls = ControlSet::from_values(&values).unwrap();
    let coeffs =
        CoefficientSet::with_derived_constants(delay, drift, diffusion, 1, &controls).unwrap();
    let running = RunningCost {
        constant: rng.random_range(0.0..1.0),
        state_sq: rng.random_range(0.0..1.0),
        control_sq: rng.random_range(0.0..1.0),
    };
    let boundary = BoundaryCost {
        constant: rng.random_range(0.0..1.0),
        state_sq: rng.random_range(0.0..1.0),
    };
    let lo = -rng.random_range(0.5..2.0);
    let hi = rng.random_range(0.5..2.0);
    let horizon = (shape.steps as f64 + 0.5) * h;
    let cost = CostSpec::new(
        running,
        boundary,
        rng.random_range(0.0..1.0),
        (lo, hi),
        horizon,
    )
    .unwrap();
    let (a, w) = (rng.random_range(-0.4..0.4), rng.random_range(0.5..4.0));
    let phi = InitialSegment::from_fn(move |s| a + 0.3 * (w * s).sin());
    let mode = if rng.random_bool(0.5) {
        BoundaryMode::Interior
    } else {
        BoundaryMode::ClosedLattice
    };
    DiscreteProblem::new(coeffs, cost, grid, controls, mode, &phi).unwrap()
}

/// `b = c gamma`, `sigma = K = 1`, `k = 1`, `g = 0` on `[-1, 1]`.
pub fn bang_bang(c: f64, degree: usize, horizon: f64, start: f64) -> DiscreteProblem {
    let coeffs = CoefficientSet::new(
        1.0,
        Drift::SaturatedLinear(SaturatedLinearDrift {
            functional: LinearFunctional {
                bias: c,
                lags: vec![],
                integrals: vec![],
            },
            saturation: c.abs(),
            control: ControlFactor::IDENTITY,
        }),
        Diffusion::Constant(1.0),
        1,
        0.0,
        1.0,
    )
    .unwrap();
    let cost = CostSpec::new(
        RunningCost::constant(1.0),
        BoundaryCost::constant(0.0),
        0.0,
        (-1.0, 1.0),
        horizon,
    )
    .unwrap();
    let grid = TimeGrid::new(1.0, degree).unwrap();
    let controls = ControlSet::from_values(&[-1.0, 0.0, 1.0]).unwrap();
    DiscreteProblem::new(
        coeffs,
        cost,
        grid,
        controls,
        BoundaryMode::Interior,
        &InitialSegment::constant(start),
    )
    .unwrap()
}
