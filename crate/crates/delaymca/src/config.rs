//! JSON problem configuration.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "delay": 1.0,
//!   "degrees": [4, 16, 36],
//!   "bound": 1,
//!   "drift": { "family": "constant", "value": 0.0 },
//!   "diffusion": { "family": "constant", "value": 1.0 },
//!   "controls": [{ "label": "none", "value": 0.0 }],
//!   "cost": {
//!     "running": { "constant": 1.0 },
//!     "boundary": { "constant": 0.0 },
//!     "discount": 0.0,
//!     "interval": [-0.5, 0.5],
//!     "horizon": 2.0
//!   },
//!   "initial": { "kind": "constant", "value": 0.0 }
//! }
//! ```
//!
//! Optional keys: `lipschitz` and `ellipticity` (derived from the families
//! when absent), `boundary_mode` (`"interior"` or `"closed_lattice"`, default
//! interior), `seed` (0), `paths` (10000), `state_budget` (5e7) and
//! `output_dir` (`"out"`). Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use delaymca_core::chain::{degrees_above_bound, max_admissible_step};
use delaymca_core::model::{
    BoundaryCost, CoefficientSet, ControlFactor, ControlPoint, ControlSet, CostSpec, Diffusion,
    Drift, Lag, LinearFunctional, PathologicalDiffusion, RunningCost, SaturatedLinearDrift,
    WeightedIntegral,
};
use delaymca_core::paths::{CadlagPath, InitialSegment, TimeGrid};
use delaymca_core::solver::{BoundaryMode, DiscreteProblem, DEFAULT_STATE_BUDGET};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagConfig {
    pub offset: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralConfig {
    /// Breakpoints of the piecewise-constant weight; the first must be `<= -delay`.
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    #[serde(default)]
    pub bias: f64,
    #[serde(default)]
    pub lags: Vec<LagConfig>,
    #[serde(default)]
    pub integrals: Vec<IntegralConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftConfig {
    Constant {
        value: f64,
    },
    /// `clamp(functional, -saturation, saturation) * (control_gain * gamma + control_offset)`.
    SaturatedLinear {
        #[serde(flatten)]
        functional: FunctionalConfig,
        saturation: f64,
        #[serde(default = "one")]
        control_gain: f64,
        #[serde(default)]
        control_offset: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiffusionConfig {
    Constant {
        value: f64,
    },
    AbsCurrent {
        floor: f64,
        cap: f64,
    },
    SaturatedLinear {
        #[serde(flatten)]
        functional: FunctionalConfig,
        floor: f64,
        cap: f64,
    },
    Pathological {
        floor: f64,
        cap: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunningCostConfig {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub state_sq: f64,
    #[serde(default)]
    pub control_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryCostConfig {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub state_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub running: RunningCostConfig,
    pub boundary: BoundaryCostConfig,
    #[serde(default)]
    pub discount: f64,
    /// `[lo, hi]`.
    pub interval: [f64; 2],
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Constant {
        value: f64,
    },
    /// `offset + amplitude * sin(frequency * s)`.
    Sine {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// Piecewise constant with values taken from each breakpoint on.
    Step {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryModeConfig {
    #[default]
    Interior,
    ClosedLattice,
}

impl From<BoundaryModeConfig> for BoundaryMode {
    fn from(m: BoundaryModeConfig) -> Self {
        match m {
            BoundaryModeConfig::Interior => BoundaryMode::Interior,
            BoundaryModeConfig::ClosedLattice => BoundaryMode::ClosedLattice,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub schema_version: u32,
    pub delay: f64,
    pub degrees: Vec<usize>,
    pub bound: u32,
    #[serde(default)]
    pub lipschitz: Option<f64>,
    #[serde(default)]
    pub ellipticity: Option<f64>,
    pub drift: DriftConfig,
    pub diffusion: DiffusionConfig,
    pub controls: Vec<ControlConfig>,
    pub cost: CostConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub boundary_mode: BoundaryModeConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_budget")]
    pub state_budget: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn one() -> f64 {
    1.0
}

fn default_paths() -> usize {
    10_000
}

fn default_budget() -> u64 {
    DEFAULT_STATE_BUDGET
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn params<T>(r: delaymca_core::Result<T>) -> Result<T> {
    r.map_err(|e| HarnessError::InvalidParams(e.to_string()))
}

fn functional(f: &FunctionalConfig) -> Result<LinearFunctional> {
    let integrals = f
        .integrals
        .iter()
        .map(|w| {
            Ok(WeightedIntegral {
                weight: params(CadlagPath::new(w.breakpoints.clone(), w.values.clone()))?,
                gain: w.gain,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LinearFunctional {
        bias: f.bias,
        lags: f
            .lags
            .iter()
            .map(|l| Lag {
                offset: l.offset,
                gain: l.gain,
            })
            .collect(),
        integrals,
    })
}

impl ProblemConfig {
    /// Parses and validates a config document.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => HarnessError::Schema(e.to_string()),
            _ => HarnessError::Parse(e.to_string()),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.degrees.is_empty() {
            return Err(HarnessError::Schema(
                "degrees must list at least one value".into(),
            ));
        }
        if let Some(m) = self.degrees.iter().find(|&&m| m == 0) {
            return Err(HarnessError::InvalidParams(format!(
                "degree {m} must be positive"
            )));
        }
        let controls = self.control_set()?;
        self.coefficients(&controls)?;
        self.cost_spec()?;
        self.initial_segment()?;
        for &m in &self.degrees {
            params(TimeGrid::new(self.delay, m))?;
        }
        Ok(())
    }

    pub fn control_set(&self) -> Result<ControlSet> {
        params(ControlSet::new(
            self.controls
                .iter()
                .map(|c| ControlPoint::new(c.label.clone(), c.value))
                .collect(),
        ))
    }

    pub fn drift(&self) -> Result<Drift> {
        Ok(match &self.drift {
            DriftConfig::Constant { value } => Drift::Constant(*value),
            DriftConfig::SaturatedLinear {
                functional: f,
                saturation,
                control_gain,
                control_offset,
            } => Drift::SaturatedLinear(SaturatedLinearDrift {
                functional: functional(f)?,
                saturation: *saturation,
                control: ControlFactor {
                    gain: *control_gain,
                    offset: *control_offset,
                },
            }),
        })
    }

    pub fn diffusion(&self) -> Result<Diffusion> {
        Ok(match &self.diffusion {
            DiffusionConfig::Constant { value } => Diffusion::Constant(*value),
            DiffusionConfig::AbsCurrent { floor, cap } => Diffusion::AbsCurrent {
                floor: *floor,
                cap: *cap,
            },
            DiffusionConfig::SaturatedLinear {
                functional: f,
                floor,
                cap,
            } => Diffusion::SaturatedLinear {
                functional: functional(f)?,
                floor: *floor,
                cap: *cap,
            },
            DiffusionConfig::Pathological { floor, cap } => {
                Diffusion::Pathological(PathologicalDiffusion::new(*floor, *cap))
            }
        })
    }

    /// Coefficients with declared constants where given, derived otherwise.
    pub fn coefficients(&self, controls: &ControlSet) -> Result<CoefficientSet> {
        let derived = params(CoefficientSet::with_derived_constants(
            self.delay,
            self.drift()?,
            self.diffusion()?,
            self.bound,
            controls,
        ))?;
        if self.lipschitz.is_none() && self.ellipticity.is_none() {
            return Ok(derived);
        }
        let lipschitz = self.lipschitz.unwrap_or(derived.lipschitz());
        let ellipticity = self.ellipticity.unwrap_or(derived.ellipticity());
        params(derived.with_declared(self.bound, lipschitz, ellipticity))
    }

    pub fn cost_spec(&self) -> Result<CostSpec> {
        let c = &self.cost;
        params(CostSpec::new(
            RunningCost {
                constant: c.running.constant,
                state_sq: c.running.state_sq,
                control_sq: c.running.control_sq,
            },
            BoundaryCost {
                constant: c.boundary.constant,
                state_sq: c.boundary.state_sq,
            },
            c.discount,
            (c.interval[0], c.interval[1]),
            c.horizon,
        ))
    }

    pub fn initial_segment(&self) -> Result<InitialSegment> {
        Ok(match &self.initial {
            InitialConfig::Constant { value } => InitialSegment::constant(*value),
            &InitialConfig::Sine {
                offset,
                amplitude,
                frequency,
            } => InitialSegment::from_fn(move |s| offset + amplitude * (frequency * s).sin()),
            InitialConfig::Step {
                breakpoints,
                values,
            } => InitialSegment::Sampled(params(CadlagPath::new(
                breakpoints.clone(),
                values.clone(),
            ))?),
        })
    }

    pub fn problem(&self, degree: usize) -> Result<DiscreteProblem> {
        let controls = self.control_set()?;
        let coeffs = self.coefficients(&controls)?;
        let grid = params(TimeGrid::new(self.delay, degree))?;
        let problem = DiscreteProblem::new(
            coeffs,
            self.cost_spec()?,
            grid,
            controls,
            self.boundary_mode.into(),
            &self.initial_segment()?,
        );
        Ok(params(problem)?.with_state_budget(self.state_budget))
    }

    /// Degrees whose step exceeds the analytic bound `h*`; the kernel
    /// validation may reject them.
    pub fn feasibility_warnings(&self) -> Vec<String> {
        let Ok(controls) = self.control_set() else {
            return Vec::new();
        };
        let Ok(coeffs) = self.coefficients(&controls) else {
            return Vec::new();
        };
        let h_star = max_admissible_step(&coeffs, &controls);
        degrees_above_bound(&coeffs, &controls, &self.degrees)
            .into_iter()
            .map(|m| {
                format!(
                    "degree {m}: step h = {} exceeds h* = {h_star}; validate_kernel may find negative branches",
                    self.delay / m as f64
                )
            })
            .collect()
    }
}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<ProblemConfig> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::ConfigRead {
        path: path.to_path_buf(),
        source,
    })?;
    ProblemConfig::from_json(&text)
}

/// The driftless benchmark: `b = 0`, `sigma = K = 1`, `I = [-0.5, 0.5]`,
/// `phi = 0`, `r = 1`, `T = 2`, `k = 1`, `g = 0`.
pub fn brownian_config(degrees: &[usize]) -> ProblemConfig {
    ProblemConfig {
        schema_version: SCHEMA_VERSION,
        delay: 1.0,
        degrees: degrees.to_vec(),
        bound: 1,
        lipschitz: None,
        ellipticity: None,
        drift: DriftConfig::Constant { value: 0.0 },
        diffusion: DiffusionConfig::Constant { value: 1.0 },
        controls: vec![ControlConfig {
            label: "none".into(),
            value: 0.0,
        }],
        cost: CostConfig {
            running: RunningCostConfig {
                constant: 1.0,
                ..Default::default()
            },
            boundary: BoundaryCostConfig::default(),
            discount: 0.0,
            interval: [-0.5, 0.5],
            horizon: 2.0,
        },
        initial: InitialConfig::Constant { value: 0.0 },
        boundary_mode: BoundaryModeConfig::Interior,
        seed: 0,
        paths: default_paths(),
        state_budget: default_budget(),
        output_dir: default_output_dir(),
    }
}
