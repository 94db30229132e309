//! Markov chain approximation for stochastic optimal control with delay.
//!
//! The state of a delayed system is its recent history, so the discrete
//! chains built here live on windows of the last `M + 1` lattice values
//! (`M` time steps per delay length). The crate provides
//!
//! * [`paths`]: time grids, the `sqrt(h) Z` state lattice, windows and
//!   piecewise-constant paths,
//! * [`model`]: drift/diffusion families, cost data and relaxed-control
//!   bookkeeping,
//! * [`chain`]: the locally consistent three-point transition kernel,
//!   simulation and martingale diagnostics,
//! * [`solver`]: reachable-state backward dynamic programming for the
//!   discrete value function, a brute-force oracle and Monte Carlo policy
//!   evaluation.
//!
//! The crate is `no_std` (with `alloc`) when built without the default
//! `std` feature. The `parallel` feature spreads DP layers and path
//! simulation over a rayon pool; results do not depend on worker count.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod chain;
pub mod error;
pub mod model;
mod par;
pub mod paths;
pub mod solver;

pub use error::{Error, Result};
