use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the core solver.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A branch of the transition function went negative.
    #[error("kernel infeasible at window {window:?} with control `{control}` (h = {step}): {branch} probability {probability}")]
    KernelInfeasible {
        window: Vec<i64>,
        control: String,
        step: f64,
        branch: &'static str,
        probability: f64,
    },

    #[error(
        "resource cap exceeded at layer {layer}: {count} expanded transitions (budget {budget})"
    )]
    ResourceCap {
        layer: usize,
        count: u64,
        budget: u64,
    },

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("no policy entry at layer {layer} for state {state:?}")]
    MissingState { layer: usize, state: Vec<i64> },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
