//! Grids, the state lattice, windows and piecewise-constant paths.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Time discretisation of degree `M` for delay length `r`: step `h = r / M`,
/// state lattice `sqrt(h) Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    delay: f64,
    degree: usize,
    step: f64,
    spacing: f64,
}

impl TimeGrid {
    pub fn new(delay: f64, degree: usize) -> Result<Self> {
        if !(delay.is_finite() && delay > 0.0) {
            return Err(Error::InvalidInput(format!(
                "delay must be positive, got {delay}"
            )));
        }
        if degree == 0 {
            return Err(Error::InvalidInput("degree must be at least 1".into()));
        }
        let step = delay / degree as f64;
        Ok(Self {
            delay,
            degree,
            step,
            spacing: step.sqrt(),
        })
    }

    /// Delay length `r`.
    pub fn delay(&self) -> f64 {
        self.delay
    }

    /// Discretisation degree `M`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Time step `h`.
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Lattice spacing `sqrt(h)`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Time of grid index `n`, computed the same way everywhere so that
    /// breakpoints and evaluation points agree bit for bit.
    pub fn time_of(&self, n: i64) -> f64 {
        n as f64 * self.step
    }

    /// Offset of window slot `j` relative to the window's present, `(j - M) h`.
    pub fn offset_of(&self, slot: usize) -> f64 {
        self.time_of(slot as i64 - self.degree as i64)
    }

    /// Number of whole steps in `[0, horizon]`, i.e. `floor(horizon / h)`.
    /// Quotients within `1e-9` of an integer snap to it.
    pub fn steps_within(&self, horizon: f64) -> usize {
        let q = horizon * self.degree as f64 / self.delay;
        let nearest = q.round();
        let q = if (q - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            q.floor()
        };
        q.max(0.0) as usize
    }

    /// Whether `t` lies on the grid `h Z`, returning its index.
    pub fn index_of_time(&self, t: f64) -> Option<i64> {
        let q = t / self.step;
        let n = q.round();
        ((q - n).abs() <= 1e-9 * n.abs().max(1.0)).then_some(n as i64)
    }
}

/// Nearest lattice index to `x`; exact ties go to the larger index.
pub fn round_to_lattice(x: f64, grid: &TimeGrid) -> Result<i64> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!(
            "cannot round non-finite value {x}"
        )));
    }
    let s = grid.spacing();
    let lower = (x / s).floor();
    // The quotient may be off by an ulp, so compare both neighbours directly.
    let mut best = lower - 1.0;
    let mut best_err = (x - best * s).abs();
    for k in [lower, lower + 1.0, lower + 2.0] {
        let err = (x - k * s).abs();
        if err <= best_err {
            best = k;
            best_err = err;
        }
    }
    Ok(best as i64)
}

/// A right-continuous step function: `values[i]` holds on
/// `[breakpoints[i], breakpoints[i + 1])`, the last value forever after.
#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl CadlagPath {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "path needs matching non-empty breakpoints and values ({} vs {})",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "path contains non-finite entries".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn constant(start: f64, value: f64) -> Self {
        Self {
            breakpoints: alloc::vec![start],
            values: alloc::vec![value],
        }
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value of the last breakpoint `<= t`, or `None` before the start.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        (idx > 0).then(|| self.values[idx - 1])
    }

    /// Left limit at `t` (the value just before `t`).
    pub fn left_limit(&self, t: f64) -> Option<f64> {
        let idx = self.breakpoints.partition_point(|&b| b < t);
        (idx > 0).then(|| self.values[idx - 1])
    }

    /// Breakpoints where the value actually changes, with the jump size.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (1..self.values.len())
            .filter(|&i| self.values[i] != self.values[i - 1])
            .map(|i| (self.breakpoints[i], self.values[i] - self.values[i - 1]))
    }

    /// Exact `\int_lo^hi self(s) other(s) ds` for two step functions.
    pub fn integrate_product(&self, other: &CadlagPath, lo: f64, hi: f64) -> Result<f64> {
        if lo < self.start() || lo < other.start() {
            return Err(Error::Domain(format!(
                "integration from {lo} precedes a path start"
            )));
        }
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(&other.breakpoints)
            .copied()
            .filter(|&t| t > lo && t < hi)
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            // Both are defined at w[0] >= lo >= start.
            let a = self.eval(w[0]).unwrap_or(0.0);
            let b = other.eval(w[0]).unwrap_or(0.0);
            total += a * b * (w[1] - w[0]);
        }
        Ok(total)
    }
}

/// The last `M + 1` chain values as lattice indices; slot `j` is the value
/// at time offset `(j - M) h`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatticeSegment {
    grid: TimeGrid,
    indices: Vec<i64>,
}

// TimeGrid holds floats; equality on grids built from the same (r, M) is exact.
impl Eq for TimeGrid {}
impl core::hash::Hash for TimeGrid {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.delay.to_bits().hash(state);
        self.degree.hash(state);
    }
}

impl fmt::Debug for LatticeSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeSegment")
            .field("degree", &self.grid.degree)
            .field("indices", &self.indices)
            .finish()
    }
}

impl LatticeSegment {
    pub fn new(grid: TimeGrid, indices: Vec<i64>) -> Result<Self> {
        if indices.len() != grid.degree() + 1 {
            return Err(Error::InvalidInput(format!(
                "window of degree {} needs {} entries, got {}",
                grid.degree(),
                grid.degree() + 1,
                indices.len()
            )));
        }
        Ok(Self { grid, indices })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    /// Lattice index of the present value.
    pub fn current(&self) -> i64 {
        self.indices[self.grid.degree()]
    }

    pub fn current_value(&self) -> f64 {
        self.current() as f64 * self.grid.spacing()
    }

    pub fn value_at_slot(&self, slot: usize) -> f64 {
        self.indices[slot] as f64 * self.grid.spacing()
    }

    /// The piecewise-constant interpolation on `[-r, 0]`.
    pub fn to_path(&self) -> CadlagPath {
        let s = self.grid.spacing();
        let breakpoints = (0..self.indices.len())
            .map(|j| self.grid.offset_of(j))
            .collect();
        let values = self.indices.iter().map(|&k| k as f64 * s).collect();
        CadlagPath {
            breakpoints,
            values,
        }
    }

    /// Drop the oldest entry and append `next`.
    pub fn shift(&self, next: i64) -> Self {
        let mut indices = Vec::with_capacity(self.indices.len());
        indices.extend_from_slice(&self.indices[1..]);
        indices.push(next);
        Self {
            grid: self.grid,
            indices,
        }
    }

    pub fn into_indices(self) -> Vec<i64> {
        self.indices
    }
}

/// Free-function form of [`LatticeSegment::shift`].
pub fn shift_segment(seg: &LatticeSegment, next: i64) -> LatticeSegment {
    seg.shift(next)
}

type SegmentFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Initial history `phi` on `[-r, 0]`.
#[derive(Clone)]
pub enum InitialSegment {
    /// Closed-form evaluator with the jump positions it is known to have.
    Function {
        eval: Arc<SegmentFn>,
        jumps: Vec<f64>,
    },
    Sampled(CadlagPath),
}

impl fmt::Debug for InitialSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Function { jumps, .. } => f
                .debug_struct("Function")
                .field("jumps", jumps)
                .finish_non_exhaustive(),
            Self::Sampled(p) => f.debug_tuple("Sampled").field(p).finish(),
        }
    }
}

impl InitialSegment {
    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self::Function {
            eval: Arc::new(f),
            jumps: Vec::new(),
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::from_fn(move |_| value)
    }

    pub fn evaluate(&self, s: f64) -> Result<f64> {
        let v = match self {
            Self::Function { eval, .. } => eval(s),
            Self::Sampled(path) => path
                .eval(s)
                .ok_or_else(|| Error::InvalidInput(format!("initial segment undefined at {s}")))?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidInput(format!(
                "initial segment is not finite at {s}"
            )))
        }
    }

    /// Known jump positions in `(-r, 0]`.
    pub fn jump_times(&self) -> Vec<f64> {
        match self {
            Self::Function { jumps, .. } => jumps.clone(),
            Self::Sampled(path) => path.jumps().map(|(t, _)| t).collect(),
        }
    }

    /// Jump positions that are not grid points of `grid`.
    pub fn unresolved_jumps(&self, grid: &TimeGrid) -> Vec<f64> {
        self.jump_times()
            .into_iter()
            .filter(|&t| grid.index_of_time(t).is_none())
            .collect()
    }
}

/// `phi` on the grid of degree `M`, rounded onto the lattice.
pub fn discretize_initial(phi: &InitialSegment, grid: &TimeGrid) -> Result<LatticeSegment> {
    let indices = (0..=grid.degree())
        .map(|j| round_to_lattice(phi.evaluate(grid.offset_of(j))?, grid))
        .collect::<Result<Vec<_>>>()?;
    LatticeSegment::new(*grid, indices)
}

/// `phi` sampled on the grid of degree `M` without state rounding, as a step
/// function on `[-r, 0]`.
pub fn sample_initial(phi: &InitialSegment, grid: &TimeGrid) -> Result<CadlagPath> {
    let breakpoints: Vec<f64> = (0..=grid.degree()).map(|j| grid.offset_of(j)).collect();
    let values = breakpoints
        .iter()
        .map(|&s| phi.evaluate(s))
        .collect::<Result<Vec<_>>>()?;
    CadlagPath::new(breakpoints, values)
}

/// Step-function interpolation of chain values `values[i]` at grid index
/// `first_index + i`.
pub fn interpolate_chain(values: &[f64], first_index: i64, grid: &TimeGrid) -> Result<CadlagPath> {
    if values.is_empty() {
        return Err(Error::InvalidInput(
            "cannot interpolate an empty chain".into(),
        ));
    }
    let breakpoints = (0..values.len())
        .map(|i| grid.time_of(first_index + i as i64))
        .collect();
    CadlagPath::new(breakpoints, values.to_vec())
}

/// The window `path(t + s)` for grid offsets `s` in `[-r, 0]`.
pub fn segment_at(path: &CadlagPath, t: f64, grid: &TimeGrid) -> Result<LatticeSegment> {
    if t < 0.0 {
        return Err(Error::Domain(format!("segment time {t} is negative")));
    }
    let n = grid
        .index_of_time(t)
        .ok_or_else(|| Error::Domain(format!("segment time {t} is not on the grid")))?;
    let m = grid.degree() as i64;
    let indices = (0..=m)
        .map(|j| {
            let v = path.eval(grid.time_of(n + j - m)).ok_or_else(|| {
                Error::Domain(format!("path starts after {}", grid.time_of(n - m)))
            })?;
            round_to_lattice(v, grid)
        })
        .collect::<Result<Vec<_>>>()?;
    LatticeSegment::new(*grid, indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid(r: f64, m: usize) -> TimeGrid {
        TimeGrid::new(r, m).unwrap()
    }

    #[test]
    fn grid_invariants() {
        for m in 1..50 {
            let g = grid(1.7, m);
            assert!((g.step() * m as f64 - 1.7).abs() <= f64::EPSILON * 1.7);
            assert!((g.spacing() * g.spacing() - g.step()).abs() <= 1e-12 * g.step());
        }
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn rounding_examples() {
        let g = grid(0.25, 1); // spacing 0.5
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(round_to_lattice(0.0, &g).unwrap(), 0);
        assert_eq!(round_to_lattice(0.26, &g).unwrap(), 1);
        assert_eq!(round_to_lattice(-0.25, &g).unwrap(), 0);
        assert_eq!(round_to_lattice(0.25, &g).unwrap(), 1);
        assert!(matches!(
            round_to_lattice(f64::NAN, &g),
            Err(Error::InvalidInput(_))
        ));
        assert!(round_to_lattice(f64::INFINITY, &g).is_err());
    }

    #[test]
    fn discretize_examples() {
        let g = grid(1.0, 4);
        let zero = discretize_initial(&InitialSegment::constant(0.0), &g).unwrap();
        assert_eq!(zero.indices(), &[0; 5]);

        let c = 3.0 * g.spacing();
        let lat = discretize_initial(&InitialSegment::constant(c), &g).unwrap();
        assert_eq!(lat.indices(), &[3; 5]);

        let g2 = grid(1.0, 2);
        let ramp = discretize_initial(&InitialSegment::from_fn(|s| s), &g2).unwrap();
        assert_eq!(ramp.indices(), &[-1, -1, 0]);
        assert!((ramp.value_at_slot(0) + core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
    }

    #[test]
    fn discretize_propagates_failures() {
        let g = grid(1.0, 2);
        let bad = InitialSegment::from_fn(|s| if s < -0.6 { f64::NAN } else { 0.0 });
        assert!(matches!(
            discretize_initial(&bad, &g),
            Err(Error::InvalidInput(_))
        ));
        let short = InitialSegment::Sampled(CadlagPath::constant(-0.5, 1.0));
        assert!(matches!(
            discretize_initial(&short, &g),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn discretize_is_idempotent_on_aligned_lattice_steps() {
        let g = grid(1.0, 4);
        let s = g.spacing();
        let path = CadlagPath::new(vec![-1.0, -0.5, -0.25], vec![2.0 * s, -s, 0.0]).unwrap();
        let first = discretize_initial(&InitialSegment::Sampled(path), &g).unwrap();
        let again = discretize_initial(&InitialSegment::Sampled(first.to_path()), &g).unwrap();
        assert_eq!(first, again);
        assert_eq!(first.indices(), &[2, 2, -1, 0, 0]);
    }

    #[test]
    fn shift_examples() {
        let g = grid(1.0, 2);
        let seg = LatticeSegment::new(g, vec![0, 0, 0]).unwrap();
        assert_eq!(shift_segment(&seg, 1).indices(), &[0, 0, 1]);
        let seg = LatticeSegment::new(g, vec![-1, 0, 1]).unwrap();
        assert_eq!(seg.shift(1).indices(), &[0, 1, 1]);
        let a = LatticeSegment::new(g, vec![5, -3, 7]).unwrap();
        let b = LatticeSegment::new(g, vec![0, 0, 0]).unwrap();
        let push = |s: LatticeSegment| s.shift(1).shift(-1).shift(2);
        assert_eq!(push(a), push(b));
        assert!(LatticeSegment::new(g, vec![0, 0]).is_err());
    }

    #[test]
    fn interpolation_is_cadlag() {
        let g = grid(1.0, 4);
        let single = interpolate_chain(&[0.7], 0, &g).unwrap();
        assert_eq!(single.eval(0.0), Some(0.7));
        assert_eq!(single.eval(123.0), Some(0.7));
        assert_eq!(single.eval(-1e-9), None);

        let two = interpolate_chain(&[0.0, 1.0], 0, &g).unwrap();
        let h = g.step();
        assert_eq!(two.eval(h - 1e-12), Some(0.0));
        assert_eq!(two.eval(h), Some(1.0));
        assert_eq!(two.left_limit(h), Some(0.0));
        assert!(interpolate_chain(&[], 0, &g).is_err());
    }

    #[test]
    fn segment_at_examples() {
        let g = grid(1.0, 2);
        let s = g.spacing();
        let vals: Vec<f64> = [1, 0, -1, 2, 2, 3].iter().map(|&k| k as f64 * s).collect();
        let path = interpolate_chain(&vals, -2, &g).unwrap();
        assert_eq!(segment_at(&path, 0.0, &g).unwrap().indices(), &[1, 0, -1]);
        let seg = segment_at(&path, 2.0 * g.step(), &g).unwrap();
        assert_eq!(seg.indices(), &[-1, 2, 2]);
        assert_eq!(seg.current_value(), path.eval(2.0 * g.step()).unwrap());
        assert!(matches!(
            segment_at(&path, -g.step(), &g),
            Err(Error::Domain(_))
        ));
        assert!(matches!(segment_at(&path, 0.3, &g), Err(Error::Domain(_))));
        let late = interpolate_chain(&vals, 0, &g).unwrap();
        assert!(matches!(segment_at(&late, 0.0, &g), Err(Error::Domain(_))));

        let flat = CadlagPath::constant(-1.0, 2.0 * s);
        let a = segment_at(&flat, 0.0, &g).unwrap();
        for n in 1..10 {
            assert_eq!(segment_at(&flat, g.time_of(n), &g).unwrap(), a);
        }
    }

    #[test]
    fn jumps_and_products() {
        let p = CadlagPath::new(vec![-1.0, -0.5, -0.25], vec![0.0, 0.3, 0.3]).unwrap();
        let jumps: Vec<_> = p.jumps().collect();
        assert_eq!(jumps.len(), 1);
        assert_eq!(jumps[0].0, -0.5);
        assert!((jumps[0].1 - 0.3).abs() < 1e-15);

        let w = CadlagPath::new(vec![-1.0, -0.75], vec![2.0, 0.0]).unwrap();
        // phi = 0 on [-1, -0.5): integral is zero; weight only on [-1,-0.75).
        assert_eq!(p.integrate_product(&w, -1.0, 0.0).unwrap(), 0.0);
        let one = CadlagPath::constant(-1.0, 1.0);
        assert!((p.integrate_product(&one, -1.0, 0.0).unwrap() - 0.15).abs() < 1e-15);
        assert!(p.integrate_product(&one, -2.0, 0.0).is_err());
    }

    #[test]
    fn unresolved_jumps_are_reported() {
        let p = CadlagPath::new(vec![-1.0, -0.5], vec![0.0, 1.0]).unwrap();
        let phi = InitialSegment::Sampled(p);
        assert!(phi.unresolved_jumps(&grid(1.0, 4)).is_empty());
        assert_eq!(phi.unresolved_jumps(&grid(1.0, 3)), vec![-0.5]);
    }
}
