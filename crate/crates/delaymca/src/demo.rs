//! Grid dependence of the pathological diffusion.
//!
//! `sigma(phi) = sigma0 + min(cap, sup |jump|)` over jumps of `phi` at dyadic
//! positions of `[-r, 0]`. A jump at `-r/2` survives sampling on a grid of
//! even degree and lands on a non-dyadic time on a grid of degree 3, so the
//! two degree-`M` evaluations differ by the full jump. The Lipschitz families
//! instead converge as the grid refines. Segments are sampled at the grid
//! times without lattice rounding, which isolates the time discretisation.
//!
//! A continuous segment has no jumps, so its own sigma is `sigma0`. Its
//! degree-`M` samplings are step functions whose steps sit on grid points,
//! which are dyadic when `M` is a power of two; those evaluations are
//! reported as well and are generally above `sigma0`.

use delaymca_core::model::{
    in_dyadic_set, CoefficientSet, ControlFactor, ControlPoint, ControlSet, Diffusion, Drift, Lag,
    LinearFunctional, PathologicalDiffusion, SaturatedLinearDrift, WeightedIntegral,
};
use delaymca_core::paths::{sample_initial, CadlagPath, InitialSegment, TimeGrid};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct DemoConfig {
    pub delay: f64,
    pub jump_time: f64,
    pub jump_size: f64,
    pub floor: f64,
    pub cap: f64,
    /// The two degrees compared on the jump segment.
    pub degrees: (usize, usize),
    /// Degrees for the Lipschitz-family check, increasing.
    pub lipschitz_degrees: Vec<usize>,
    /// Degree of the fine sampling used as reference for the Lipschitz families.
    pub reference_degree: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            delay: 1.0,
            jump_time: -0.5,
            jump_size: 0.3,
            floor: 0.5,
            cap: 1.0,
            degrees: (2, 3),
            lipschitz_degrees: vec![4, 8, 16],
            reference_degree: 1 << 14,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyErrors {
    pub name: &'static str,
    /// `|F(sampled at M) - F(reference)|` per Lipschitz degree.
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoReport {
    /// Pathological sigma on the jump segment at the two degrees.
    pub sigma: (f64, f64),
    pub difference: f64,
    /// `0.9 |jump|`.
    pub threshold: f64,
    /// Pathological sigma of the continuous segment itself.
    pub continuous_sigma: f64,
    /// Pathological sigma of its sampling at each Lipschitz degree.
    pub sampled_continuous_sigma: Vec<f64>,
    pub families: Vec<FamilyErrors>,
    /// Largest family error per Lipschitz degree.
    pub max_errors: Vec<f64>,
}

impl DemoReport {
    pub fn separated(&self) -> bool {
        self.difference >= self.threshold
    }

    /// Each family's error is nonincreasing in `M` and the largest error
    /// strictly decreases.
    pub fn lipschitz_decreasing(&self) -> bool {
        self.families
            .iter()
            .all(|f| f.errors.windows(2).all(|w| w[1] <= w[0]))
            && self.max_errors.windows(2).all(|w| w[1] < w[0])
    }

    pub fn continuous_at_floor(&self, floor: f64) -> bool {
        self.continuous_sigma == floor
    }
}

fn families(delay: f64) -> Result<Vec<(&'static str, CoefficientSet)>> {
    let controls = ControlSet::from_values(&[1.0])?;
    let weight = CadlagPath::new(vec![-delay, -0.4 * delay], vec![1.0, -0.5])?;
    let lagged = Drift::SaturatedLinear(SaturatedLinearDrift {
        functional: LinearFunctional {
            bias: 0.1,
            lags: vec![
                Lag {
                    offset: -0.3 * delay,
                    gain: 1.0,
                },
                Lag {
                    offset: -0.7 * delay,
                    gain: -0.5,
                },
            ],
            integrals: vec![WeightedIntegral { weight, gain: 0.8 }],
        },
        saturation: 1.0,
        control: ControlFactor::IDENTITY,
    });
    let oldest = Drift::SaturatedLinear(SaturatedLinearDrift {
        functional: LinearFunctional {
            bias: 0.0,
            lags: vec![Lag {
                offset: -delay,
                gain: 1.0,
            }],
            integrals: vec![],
        },
        saturation: 1.0,
        control: ControlFactor::IDENTITY,
    });
    let lagged_diffusion = Diffusion::SaturatedLinear {
        functional: LinearFunctional {
            bias: 0.8,
            lags: vec![Lag {
                offset: -0.3 * delay,
                gain: 0.3,
            }],
            integrals: vec![],
        },
        floor: 0.5,
        cap: 1.0,
    };
    let sigma = Diffusion::Constant(1.0);
    Ok(vec![
        (
            "lags and weighted integral",
            CoefficientSet::with_derived_constants(delay, lagged, sigma.clone(), 1, &controls)?,
        ),
        (
            "oldest value",
            CoefficientSet::with_derived_constants(delay, oldest, sigma, 1, &controls)?,
        ),
        (
            "current-value diffusion",
            CoefficientSet::with_derived_constants(
                delay,
                Drift::Constant(0.0),
                Diffusion::AbsCurrent {
                    floor: 0.5,
                    cap: 1.0,
                },
                1,
                &controls,
            )?,
        ),
        (
            "lagged diffusion",
            CoefficientSet::with_derived_constants(
                delay,
                Drift::Constant(0.0),
                lagged_diffusion,
                1,
                &controls,
            )?,
        ),
    ])
}

/// Sigma on the segment itself, from its declared jumps.
fn sigma_without_sampling(
    sigma: &PathologicalDiffusion,
    phi: &InitialSegment,
    delay: f64,
) -> Result<f64> {
    if let InitialSegment::Sampled(path) = phi {
        return Ok(sigma.eval(path, delay));
    }
    let mut sup = 0.0f64;
    for t in phi.jump_times() {
        if t > -delay && t <= 0.0 && in_dyadic_set(t, delay, sigma.level_cap) {
            sup = sup.max((phi.evaluate(t)? - phi.evaluate(t - 1e-12 * delay)?).abs());
        }
    }
    Ok(sigma.floor + sup.min(sigma.cap))
}

pub fn run_pathological_demo(config: &DemoConfig) -> Result<DemoReport> {
    let r = config.delay;
    let sigma_of = PathologicalDiffusion::new(config.floor, config.cap);
    let jump = InitialSegment::Sampled(CadlagPath::new(
        vec![-r, config.jump_time],
        vec![0.0, config.jump_size],
    )?);
    let eval = |phi: &InitialSegment, m: usize| -> Result<f64> {
        let grid = TimeGrid::new(r, m)?;
        Ok(sigma_of.eval(&sample_initial(phi, &grid)?, r))
    };
    let sigma = (
        eval(&jump, config.degrees.0)?,
        eval(&jump, config.degrees.1)?,
    );

    let smooth = InitialSegment::from_fn(|s| 0.2 + (3.0 * s).sin());
    let continuous_sigma = sigma_without_sampling(&sigma_of, &smooth, r)?;
    let sampled_continuous_sigma = config
        .lipschitz_degrees
        .iter()
        .map(|&m| eval(&smooth, m))
        .collect::<Result<Vec<_>>>()?;

    let u = ControlPoint::new("u", 1.0);
    let reference = sample_initial(&smooth, &TimeGrid::new(r, config.reference_degree)?)?;
    let mut out = Vec::new();
    for (name, coeffs) in families(r)? {
        let value = |seg: &CadlagPath| -> Result<f64> {
            Ok(coeffs.eval_drift(seg, &u)? + coeffs.eval_diffusion(seg)?)
        };
        let target = value(&reference)?;
        let errors = config
            .lipschitz_degrees
            .iter()
            .map(|&m| Ok((value(&sample_initial(&smooth, &TimeGrid::new(r, m)?)?)? - target).abs()))
            .collect::<Result<Vec<_>>>()?;
        out.push(FamilyErrors { name, errors });
    }
    let max_errors = (0..config.lipschitz_degrees.len())
        .map(|i| out.iter().map(|f| f.errors[i]).fold(0.0, f64::max))
        .collect();

    Ok(DemoReport {
        sigma,
        difference: (sigma.0 - sigma.1).abs(),
        threshold: 0.9 * config.jump_size.abs(),
        continuous_sigma,
        sampled_continuous_sigma,
        families: out,
        max_errors,
    })
}
