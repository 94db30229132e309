//! Discrete control problem of degree `M` and its exact solution.
//!
//! The discrete cost of a control `u` is
//!
//! ```text
//! J(phi, u) = E[ sum_{n < N_h} exp(-beta n h) k(xi(n), u(n)) h + g(xi(N_h)) ]
//! ```
//!
//! with `N_h` the first step at which the chain leaves the interval, capped
//! at `floor(T / h)`. [`solve_dp`] computes its minimum by a forward sweep
//! over reachable windows followed by backward induction.
//!
//! States are keyed by the trailing `d` entries of the window, where `d` is
//! [`CoefficientSet::memory_depth`]: the kernel only sees `b` and `sigma`, and
//! costs and exit only see the present value, so windows that agree on the
//! last `d` entries have identical futures. For coefficients that read the
//! whole delay interval `d = M + 1` and the key is the full window.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::time::Duration;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::chain::{path_rng, ControlLaw, MeanEstimate, TransitionKernel};
use crate::error::{Error, Result};
use crate::model::{CoefficientSet, ControlPoint, ControlSet, CostSpec};
use crate::par::map_range;
use crate::paths::{discretize_initial, InitialSegment, LatticeSegment, TimeGrid};

pub const DEFAULT_STATE_BUDGET: u64 = 50_000_000;

/// Where the chain is stopped at the interval's end points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    /// Stop on leaving the open interval `(lo, hi)`.
    #[default]
    Interior,
    /// Stop on leaving the closed interval `[lo, hi]`.
    ClosedLattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Continue,
    Stopped,
}

/// Everything needed to pose the degree-`M` problem.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    coeffs: CoefficientSet,
    cost: CostSpec,
    grid: TimeGrid,
    controls: ControlSet,
    mode: BoundaryMode,
    initial: LatticeSegment,
    horizon_steps: usize,
    state_budget: u64,
    depth: usize,
    lo_units: f64,
    hi_units: f64,
}

/// Boundary in lattice units, snapped to an integer when it is one up to rounding.
fn lattice_units(x: f64, spacing: f64) -> f64 {
    let u = x / spacing;
    let r = u.round();
    if (u - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        u
    }
}

impl DiscreteProblem {
    pub fn new(
        coeffs: CoefficientSet,
        cost: CostSpec,
        grid: TimeGrid,
        controls: ControlSet,
        mode: BoundaryMode,
        initial: &InitialSegment,
    ) -> Result<Self> {
        TransitionKernel::new(&coeffs, grid)?;
        let horizon_steps = grid.steps_within(cost.horizon());
        if horizon_steps == 0 {
            return Err(Error::InvalidInput(format!(
                "horizon {} is shorter than one step h = {}",
                cost.horizon(),
                grid.step()
            )));
        }
        let initial = discretize_initial(initial, &grid)?;
        let (lo, hi) = cost.interval();
        Ok(Self {
            depth: coeffs.memory_depth(&grid),
            lo_units: lattice_units(lo, grid.spacing()),
            hi_units: lattice_units(hi, grid.spacing()),
            coeffs,
            cost,
            grid,
            controls,
            mode,
            initial,
            horizon_steps,
            state_budget: DEFAULT_STATE_BUDGET,
        })
    }

    pub fn with_state_budget(mut self, budget: u64) -> Self {
        self.state_budget = budget;
        self
    }

    /// The same problem with another cost specification.
    pub fn with_cost(mut self, cost: CostSpec) -> Result<Self> {
        if self.grid.steps_within(cost.horizon()) != self.horizon_steps {
            return Err(Error::InvalidInput(
                "replacement cost changes the horizon".into(),
            ));
        }
        let (lo, hi) = cost.interval();
        self.lo_units = lattice_units(lo, self.grid.spacing());
        self.hi_units = lattice_units(hi, self.grid.spacing());
        self.cost = cost;
        Ok(self)
    }

    pub fn coeffs(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn cost(&self) -> &CostSpec {
        &self.cost
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn controls(&self) -> &ControlSet {
        &self.controls
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    /// The discretised initial window.
    pub fn initial(&self) -> &LatticeSegment {
        &self.initial
    }

    /// `floor(T / h)`.
    pub fn horizon_steps(&self) -> usize {
        self.horizon_steps
    }

    pub fn state_budget(&self) -> u64 {
        self.state_budget
    }

    /// Trailing window entries that identify a DP state.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn kernel(&self) -> TransitionKernel<'_> {
        TransitionKernel::new(&self.coeffs, self.grid).expect("checked at construction")
    }

    pub fn exit_test(&self, index: i64, layer: usize) -> ExitStatus {
        let k = index as f64;
        let outside = match self.mode {
            BoundaryMode::Interior => k <= self.lo_units || k >= self.hi_units,
            BoundaryMode::ClosedLattice => k < self.lo_units || k > self.hi_units,
        };
        if layer >= self.horizon_steps || outside {
            ExitStatus::Stopped
        } else {
            ExitStatus::Continue
        }
    }

    /// Discounted running cost of one step, `h exp(-beta n h) k(x, gamma)`.
    pub fn stage_cost(&self, layer: usize, index: i64, control: &ControlPoint) -> f64 {
        let h = self.grid.step();
        let x = index as f64 * self.grid.spacing();
        h * (-self.cost.discount() * layer as f64 * h).exp() * self.cost.running().eval(x, control)
    }

    /// Undiscounted boundary cost at a lattice index.
    pub fn terminal_cost(&self, index: i64) -> f64 {
        self.cost
            .boundary()
            .eval(index as f64 * self.grid.spacing())
    }

    fn key_of(&self, window: &LatticeSegment) -> Box<[i64]> {
        let idx = window.indices();
        idx[idx.len() - self.depth..].into()
    }

    /// A full window whose trailing entries are `key`. Older entries repeat
    /// `key[0]`; the coefficients never read them.
    pub fn full_window(&self, key: &[i64]) -> LatticeSegment {
        let m = self.grid.degree();
        let mut indices = Vec::with_capacity(m + 1);
        indices.resize(m + 1 - key.len(), key[0]);
        indices.extend_from_slice(key);
        LatticeSegment::new(self.grid, indices).expect("key no longer than M + 1")
    }

    /// `0 <= V <= T sup k + sup g` with the sups over reachable states.
    pub fn value_bound(&self) -> f64 {
        let margin = self.coeffs.bound() as f64 * self.grid.spacing();
        self.horizon_steps as f64 * self.grid.step() * self.cost.running_sup(self.controls.points())
            + self.cost.boundary_sup(margin)
    }
}

/// Free-function form of [`DiscreteProblem::exit_test`].
pub fn exit_test(problem: &DiscreteProblem, index: i64, layer: usize) -> ExitStatus {
    problem.exit_test(index, layer)
}

fn shifted(key: &[i64], next: i64) -> Box<[i64]> {
    let mut out = Vec::with_capacity(key.len());
    out.extend_from_slice(&key[1..]);
    out.push(next);
    out.into_boxed_slice()
}

/// Reachable state keys per layer `0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachableLayers {
    pub layers: Vec<Vec<Box<[i64]>>>,
    pub expanded_transitions: u64,
    pub depth: usize,
}

/// Forward closure from the initial window under positive-probability moves
/// of any control. Stopped states are kept but not expanded.
pub fn enumerate_reachable(problem: &DiscreteProblem) -> Result<ReachableLayers> {
    let kernel = problem.kernel();
    let mut layers: Vec<Vec<Box<[i64]>>> = Vec::with_capacity(problem.horizon_steps + 1);
    layers.push(alloc::vec![problem.key_of(&problem.initial)]);
    let mut expanded: u64 = 0;
    for n in 0..problem.horizon_steps {
        let current = &layers[n];
        let per_state = map_range(current.len(), |i| -> Result<(Vec<Box<[i64]>>, u64)> {
            let key = &current[i];
            let now = key[key.len() - 1];
            if problem.exit_test(now, n) == ExitStatus::Stopped {
                return Ok((Vec::new(), 0));
            }
            let window = problem.full_window(key);
            let mut targets: Vec<i64> = Vec::with_capacity(3);
            let mut count = 0;
            for u in problem.controls.points() {
                let d = kernel.transition_distribution(&window, u)?;
                for (x, p) in d.outcomes() {
                    if p > 0.0 {
                        count += 1;
                        if !targets.contains(&x) {
                            targets.push(x);
                        }
                    }
                }
            }
            Ok((
                targets.into_iter().map(|x| shifted(key, x)).collect(),
                count,
            ))
        });
        let mut next: Vec<Box<[i64]>> = Vec::new();
        for r in per_state {
            let (succ, count) = r?;
            expanded += count;
            next.extend(succ);
        }
        if expanded > problem.state_budget {
            return Err(Error::ResourceCap {
                layer: n,
                count: expanded,
                budget: problem.state_budget,
            });
        }
        next.sort_unstable();
        next.dedup();
        layers.push(next);
    }
    Ok(ReachableLayers {
        layers,
        expanded_transitions: expanded,
        depth: problem.depth,
    })
}

/// One Bellman backup at `(layer, key)`, reading next-layer values through
/// `lookup`. Returns the value and the minimising control (lowest index on
/// ties), or `None` for stopped states.
pub fn bellman_backup(
    problem: &DiscreteProblem,
    kernel: &TransitionKernel<'_>,
    layer: usize,
    key: &[i64],
    lookup: &dyn Fn(&[i64]) -> Option<f64>,
) -> Result<(f64, Option<usize>)> {
    let now = key[key.len() - 1];
    if problem.exit_test(now, layer) == ExitStatus::Stopped {
        return Ok((problem.terminal_cost(now), None));
    }
    let window = problem.full_window(key);
    let mut best = (f64::INFINITY, None);
    for (i, u) in problem.controls.points().iter().enumerate() {
        let d = kernel.transition_distribution(&window, u)?;
        let mut total = problem.stage_cost(layer, now, u);
        for (x, p) in d.outcomes() {
            if p > 0.0 {
                let succ = shifted(key, x);
                let v = lookup(&succ).ok_or_else(|| Error::MissingState {
                    layer: layer + 1,
                    state: succ.to_vec(),
                })?;
                total += p * v;
            }
        }
        if total < best.0 {
            best = (total, Some(i));
        }
    }
    Ok(best)
}

/// Values and minimising controls for one time layer, sorted by key.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub states: Vec<Box<[i64]>>,
    pub values: Vec<f64>,
    pub controls: Vec<Option<usize>>,
}

impl Layer {
    fn position(&self, key: &[i64]) -> Option<usize> {
        self.states.binary_search_by(|s| (**s).cmp(key)).ok()
    }
}

/// `V_n` on every reachable state together with the optimal policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    grid: TimeGrid,
    depth: usize,
    layers: Vec<Layer>,
}

impl ValueTable {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn value(&self, layer: usize, key: &[i64]) -> Option<f64> {
        let l = self.layers.get(layer)?;
        l.position(key).map(|i| l.values[i])
    }

    /// `Some(None)` marks a stopped state.
    pub fn control(&self, layer: usize, key: &[i64]) -> Option<Option<usize>> {
        let l = self.layers.get(layer)?;
        l.position(key).map(|i| l.controls[i])
    }

    /// Trailing entries of a full window that key this table.
    pub fn key<'w>(&self, window: &'w LatticeSegment) -> &'w [i64] {
        let idx = window.indices();
        &idx[idx.len() - self.depth..]
    }
}

impl ControlLaw for ValueTable {
    fn control(&self, layer: usize, window: &LatticeSegment) -> Result<usize> {
        let key = self.key(window);
        match ValueTable::control(self, layer, key) {
            Some(Some(c)) => Ok(c),
            _ => Err(Error::MissingState {
                layer,
                state: key.to_vec(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// `V^M(phi)`.
    pub value: f64,
    pub layer_counts: Vec<usize>,
    pub expanded_transitions: u64,
    pub depth: usize,
    /// Measured when built with `std`.
    pub wall_time: Option<Duration>,
}

pub fn solve_dp(problem: &DiscreteProblem) -> Result<(SolveResult, ValueTable)> {
    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    let reach = enumerate_reachable(problem)?;
    let kernel = problem.kernel();
    let n_layers = reach.layers.len();
    let mut layers: Vec<Option<Layer>> = (0..n_layers).map(|_| None).collect();
    for (n, states) in reach.layers.into_iter().enumerate().rev() {
        let next = layers.get(n + 1).and_then(|l| l.as_ref());
        let lookup = |key: &[i64]| next.and_then(|l| l.position(key).map(|i| l.values[i]));
        let results = map_range(states.len(), |i| {
            bellman_backup(problem, &kernel, n, &states[i], &lookup)
        });
        let mut values = Vec::with_capacity(states.len());
        let mut controls = Vec::with_capacity(states.len());
        for r in results {
            let (v, c) = r?;
            values.push(v);
            controls.push(c);
        }
        layers[n] = Some(Layer {
            states,
            values,
            controls,
        });
    }
    let layers: Vec<Layer> = layers
        .into_iter()
        .map(|l| l.expect("every layer filled"))
        .collect();
    let table = ValueTable {
        grid: problem.grid,
        depth: problem.depth,
        layers,
    };
    let value = table.layers[0].values[0];

    #[cfg(feature = "std")]
    let wall_time = Some(started.elapsed());
    #[cfg(not(feature = "std"))]
    let wall_time = None;

    let result = SolveResult {
        value,
        layer_counts: table.layers.iter().map(|l| l.states.len()).collect(),
        expanded_transitions: reach.expanded_transitions,
        depth: problem.depth,
        wall_time,
    };
    Ok((result, table))
}

pub const BRUTE_FORCE_MAX_STEPS: usize = 12;
pub const BRUTE_FORCE_MAX_CONTROLS: usize = 3;
const BRUTE_FORCE_MAX_NODES: u64 = 50_000_000;

/// `V^M(phi)` by plain recursion over the full tree of windows, controls and
/// outcomes, without memoisation or state projection.
pub fn brute_force_value(problem: &DiscreteProblem) -> Result<f64> {
    if problem.horizon_steps > BRUTE_FORCE_MAX_STEPS
        || problem.controls.len() > BRUTE_FORCE_MAX_CONTROLS
    {
        return Err(Error::SizeGuard(format!(
            "brute force needs at most {BRUTE_FORCE_MAX_STEPS} steps and {BRUTE_FORCE_MAX_CONTROLS} controls, got {} and {}",
            problem.horizon_steps,
            problem.controls.len()
        )));
    }
    fn recurse(
        problem: &DiscreteProblem,
        kernel: &TransitionKernel<'_>,
        window: &LatticeSegment,
        n: usize,
        nodes: &mut u64,
    ) -> Result<f64> {
        *nodes += 1;
        if *nodes > BRUTE_FORCE_MAX_NODES {
            return Err(Error::SizeGuard(format!(
                "brute force tree exceeds {BRUTE_FORCE_MAX_NODES} nodes"
            )));
        }
        let now = window.current();
        if problem.exit_test(now, n) == ExitStatus::Stopped {
            return Ok(problem.terminal_cost(now));
        }
        let mut best = f64::INFINITY;
        for u in problem.controls.points() {
            let d = kernel.transition_distribution(window, u)?;
            let mut total = problem.stage_cost(n, now, u);
            for (x, p) in d.outcomes() {
                if p > 0.0 {
                    total += p * recurse(problem, kernel, &window.shift(x), n + 1, nodes)?;
                }
            }
            best = best.min(total);
        }
        Ok(best)
    }
    let kernel = problem.kernel();
    let mut nodes = 0;
    recurse(problem, &kernel, &problem.initial, 0, &mut nodes)
}

/// Cost of one simulated path under `law` from the discretised initial window.
pub fn simulate_cost(
    problem: &DiscreteProblem,
    law: &dyn ControlLaw,
    seed: u64,
    path: u64,
) -> Result<f64> {
    let kernel = problem.kernel();
    let mut rng = path_rng(seed, path);
    let mut window = problem.initial.clone();
    let mut total = 0.0;
    for n in 0.. {
        let now = window.current();
        if problem.exit_test(now, n) == ExitStatus::Stopped {
            total += problem.terminal_cost(now);
            break;
        }
        let c = law.control(n, &window)?;
        let u = problem
            .controls
            .get(c)
            .ok_or_else(|| Error::InvalidInput(format!("control index {c} out of range")))?;
        total += problem.stage_cost(n, now, u);
        let next = kernel
            .transition_distribution(&window, u)?
            .sample(rng.random());
        window = window.shift(next);
    }
    Ok(total)
}

/// Monte Carlo estimate of `J^M(phi, law)` over `paths` independent paths.
pub fn evaluate_policy_mc(
    problem: &DiscreteProblem,
    law: &dyn ControlLaw,
    paths: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    let costs = map_range(paths, |i| simulate_cost(problem, law, seed, i as u64))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanEstimate::from_samples(&costs))
}
