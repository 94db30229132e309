//! The three-point extended Markov kernel and its diagnostics.
//!
//! From window `Z` under control `gamma` the chain moves by `+-K sqrt(h)` or
//! stays, with
//!
//! ```text
//! up   = sigma^2 / (2K^2) + sqrt(h) b / (2K)
//! down = sigma^2 / (2K^2) - sqrt(h) b / (2K)
//! stay = 1 - sigma^2 / K^2
//! ```
//!
//! where `b`, `sigma` are evaluated at the step interpolation of `Z`. The
//! one-step mean is exactly `h b` and the variance exactly
//! `h sigma^2 - h^2 b^2`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{CoefficientSet, ControlPoint, ControlSet};
use crate::par::map_range;
use crate::paths::{CadlagPath, LatticeSegment, TimeGrid};

/// The degree-`M` transition function for a coefficient set.
#[derive(Debug, Clone, Copy)]
pub struct TransitionKernel<'a> {
    coeffs: &'a CoefficientSet,
    grid: TimeGrid,
}

impl<'a> TransitionKernel<'a> {
    pub fn new(coeffs: &'a CoefficientSet, grid: TimeGrid) -> Result<Self> {
        if (coeffs.delay() - grid.delay()).abs() > 1e-12 * grid.delay() {
            return Err(Error::InvalidInput(format!(
                "grid delay {} does not match coefficient delay {}",
                grid.delay(),
                coeffs.delay()
            )));
        }
        Ok(Self { coeffs, grid })
    }

    pub fn coeffs(&self) -> &'a CoefficientSet {
        self.coeffs
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Jump height in lattice units (`K`).
    pub fn jump(&self) -> i64 {
        self.coeffs.bound() as i64
    }

    /// Branch probabilities for given `b` and `sigma`, without the sign check.
    pub fn branches(&self, drift: f64, diffusion: f64) -> (f64, f64, f64) {
        let k = self.coeffs.bound() as f64;
        let half_var = diffusion * diffusion / (2.0 * k * k);
        let tilt = self.grid.spacing() * drift / (2.0 * k);
        (half_var - tilt, 1.0 - 2.0 * half_var, half_var + tilt)
    }

    pub fn transition_distribution(
        &self,
        window: &LatticeSegment,
        control: &ControlPoint,
    ) -> Result<TransitionDistribution> {
        let (drift, diffusion) = self.coeffs.eval_on_window(window, control)?;
        let (down, stay, up) = self.branches(drift, diffusion);
        for (branch, p) in [("down", down), ("stay", stay), ("up", up)] {
            if p < 0.0 || !p.is_finite() {
                return Err(Error::KernelInfeasible {
                    window: window.indices().to_vec(),
                    control: control.label.clone(),
                    step: self.grid.step(),
                    branch,
                    probability: p,
                });
            }
        }
        Ok(TransitionDistribution {
            down,
            stay,
            up,
            current: window.current(),
            jump: self.jump(),
            drift,
            diffusion,
        })
    }
}

/// Free-function form of [`TransitionKernel::transition_distribution`].
pub fn transition_distribution(
    kernel: &TransitionKernel<'_>,
    window: &LatticeSegment,
    control: &ControlPoint,
) -> Result<TransitionDistribution> {
    kernel.transition_distribution(window, control)
}

/// Law of the next lattice index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionDistribution {
    pub down: f64,
    pub stay: f64,
    pub up: f64,
    current: i64,
    jump: i64,
    /// `b` and `sigma` the probabilities were built from.
    pub drift: f64,
    pub diffusion: f64,
}

impl TransitionDistribution {
    pub fn up_target(&self) -> i64 {
        self.current + self.jump
    }

    pub fn down_target(&self) -> i64 {
        self.current - self.jump
    }

    pub fn current(&self) -> i64 {
        self.current
    }

    /// `(target index, probability)` for down, stay, up in that order.
    pub fn outcomes(&self) -> [(i64, f64); 3] {
        [
            (self.down_target(), self.down),
            (self.current, self.stay),
            (self.up_target(), self.up),
        ]
    }

    /// Conditional mean of the increment in state units.
    pub fn mean_increment(&self, spacing: f64) -> f64 {
        self.outcomes()
            .iter()
            .map(|&(x, p)| p * (x - self.current) as f64 * spacing)
            .sum()
    }

    /// Conditional variance of the increment in state units.
    pub fn variance_increment(&self, spacing: f64) -> f64 {
        let m = self.mean_increment(spacing);
        self.outcomes()
            .iter()
            .map(|&(x, p)| {
                let d = (x - self.current) as f64 * spacing - m;
                p * d * d
            })
            .sum()
    }

    /// Inverse-CDF draw for `u` in `[0, 1)`; never returns a zero-probability target.
    pub fn sample(&self, u: f64) -> i64 {
        let mut cum = 0.0;
        let mut last = self.current;
        for (x, p) in self.outcomes() {
            if p <= 0.0 {
                continue;
            }
            cum += p;
            last = x;
            if u < cum {
                return x;
            }
        }
        last
    }
}

/// Deterministic per-path stream: the same `(seed, path)` pair always yields
/// the same draws, whichever worker runs it.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// A random window with indices uniform in `[-span, span]`.
pub fn random_window(rng: &mut ChaCha8Rng, grid: &TimeGrid, span: i64) -> LatticeSegment {
    let indices = (0..=grid.degree())
        .map(|_| rng.random_range(-span..=span))
        .collect();
    LatticeSegment::new(*grid, indices).expect("length is M + 1")
}

/// Lattice span covering roughly `[-2, 2]` in state units.
pub fn default_span(grid: &TimeGrid) -> i64 {
    (2.0 / grid.spacing()).ceil() as i64
}

/// Sampled nonnegativity margins of the kernel plus the analytic
/// sufficient step bound `h* = (sigma0^2 / (K sup|b|))^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFeasibility {
    pub samples: usize,
    pub step: f64,
    /// `min (1 - sigma^2 / K^2)` over samples.
    pub min_stay_margin: f64,
    /// `min (sigma^2 / (2K^2) - sqrt(h) |b| / (2K))` over samples and controls.
    pub min_branch_margin: f64,
    pub h_star: f64,
}

impl KernelFeasibility {
    /// Every sampled distribution was nonnegative.
    pub fn sampled_feasible(&self) -> bool {
        self.min_stay_margin >= 0.0 && self.min_branch_margin >= 0.0
    }

    /// The step satisfies the analytic sufficient condition `h <= h*`.
    pub fn within_analytic_bound(&self) -> bool {
        self.step <= self.h_star
    }
}

/// `h* = (sigma0^2 / (K sup|b|))^2`; infinite when the drift vanishes.
pub fn max_admissible_step(coeffs: &CoefficientSet, controls: &ControlSet) -> f64 {
    let sup_b = coeffs.drift_sup(controls);
    if sup_b == 0.0 {
        return f64::INFINITY;
    }
    let s0 = coeffs.ellipticity();
    (s0 * s0 / (coeffs.bound() as f64 * sup_b)).powi(2)
}

/// Degrees among `degrees` whose step `r / M` exceeds `h*`.
pub fn degrees_above_bound(
    coeffs: &CoefficientSet,
    controls: &ControlSet,
    degrees: &[usize],
) -> Vec<usize> {
    let h_star = max_admissible_step(coeffs, controls);
    degrees
        .iter()
        .copied()
        .filter(|&m| coeffs.delay() / m as f64 > h_star)
        .collect()
}

pub fn validate_kernel(
    kernel: &TransitionKernel<'_>,
    controls: &ControlSet,
    sampler: &mut dyn FnMut(&mut ChaCha8Rng) -> LatticeSegment,
    samples: usize,
    seed: u64,
) -> Result<KernelFeasibility> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = kernel.coeffs.bound() as f64;
    let sqrt_h = kernel.grid.spacing();
    let mut stay = f64::INFINITY;
    let mut branch = f64::INFINITY;
    for _ in 0..samples.max(1) {
        let w = sampler(&mut rng);
        let path = w.to_path();
        let sigma = kernel.coeffs.eval_diffusion(&path)?;
        stay = stay.min(1.0 - sigma * sigma / (k * k));
        for u in controls.points() {
            let b = kernel.coeffs.eval_drift(&path, u)?;
            branch = branch.min(sigma * sigma / (2.0 * k * k) - sqrt_h * b.abs() / (2.0 * k));
        }
    }
    Ok(KernelFeasibility {
        samples: samples.max(1),
        step: kernel.grid.step(),
        min_stay_margin: stay,
        min_branch_margin: branch,
        h_star: max_admissible_step(kernel.coeffs, controls),
    })
}

/// Moments of one transition against `h b` and `h sigma^2 - h^2 b^2`.
/// Errors are relative, with `max(|expected|, h)` as the scale so that
/// vanishing drifts do not divide by zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyEntry {
    pub mean: f64,
    pub expected_mean: f64,
    pub mean_error: f64,
    pub variance: f64,
    pub expected_variance: f64,
    pub variance_error: f64,
    /// Largest increment magnitude with positive probability.
    pub max_jump: f64,
}

pub fn local_consistency_check(
    kernel: &TransitionKernel<'_>,
    window: &LatticeSegment,
    control: &ControlPoint,
) -> Result<ConsistencyEntry> {
    let d = kernel.transition_distribution(window, control)?;
    let h = kernel.grid.step();
    let s = kernel.grid.spacing();
    let mean = d.mean_increment(s);
    let variance = d.variance_increment(s);
    let expected_mean = h * d.drift;
    let expected_variance = h * d.diffusion * d.diffusion - h * h * d.drift * d.drift;
    let rel = |a: f64, e: f64| (a - e).abs() / e.abs().max(h);
    let max_jump = d
        .outcomes()
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|&(x, _)| ((x - d.current()) as f64 * s).abs())
        .fold(0.0, f64::max);
    Ok(ConsistencyEntry {
        mean,
        expected_mean,
        mean_error: rel(mean, expected_mean),
        variance,
        expected_variance,
        variance_error: rel(variance, expected_variance),
        max_jump,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub entries: Vec<ConsistencyEntry>,
    pub worst_mean_error: f64,
    pub worst_variance_error: f64,
    pub worst_probability_sum_error: f64,
}

/// Consistency over `samples` random windows (uniform indices in `[-span, span]`)
/// with a uniformly drawn control each.
pub fn consistency_report(
    kernel: &TransitionKernel<'_>,
    controls: &ControlSet,
    samples: usize,
    span: i64,
    seed: u64,
) -> Result<ConsistencyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(samples);
    let mut worst_sum: f64 = 0.0;
    for _ in 0..samples {
        let w = random_window(&mut rng, &kernel.grid, span);
        let u = &controls.points()[rng.random_range(0..controls.len())];
        let d = kernel.transition_distribution(&w, u)?;
        worst_sum = worst_sum.max((d.up + d.stay + d.down - 1.0).abs());
        entries.push(local_consistency_check(kernel, &w, u)?);
    }
    Ok(ConsistencyReport {
        worst_mean_error: entries.iter().map(|e| e.mean_error).fold(0.0, f64::max),
        worst_variance_error: entries.iter().map(|e| e.variance_error).fold(0.0, f64::max),
        worst_probability_sum_error: worst_sum,
        entries,
    })
}

/// Chooses a control index at each step from the current window.
pub trait ControlLaw: Sync {
    fn control(&self, layer: usize, window: &LatticeSegment) -> Result<usize>;
}

/// The same control at every step.
#[derive(Debug, Clone, Copy)]
pub struct ConstantControl(pub usize);

impl ControlLaw for ConstantControl {
    fn control(&self, _: usize, _: &LatticeSegment) -> Result<usize> {
        Ok(self.0)
    }
}

/// A fixed open-loop control sequence.
#[derive(Debug, Clone)]
pub struct ControlSequence(pub Vec<usize>);

impl ControlLaw for ControlSequence {
    fn control(&self, layer: usize, _: &LatticeSegment) -> Result<usize> {
        self.0.get(layer).copied().ok_or_else(|| {
            Error::InvalidInput(format!("control sequence has no entry for step {layer}"))
        })
    }
}

/// A simulated chain: `indices[i]` is the lattice index at step `i - M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPath {
    grid: TimeGrid,
    indices: Vec<i64>,
    controls: Vec<usize>,
}

impl ChainPath {
    pub fn new(grid: TimeGrid, indices: Vec<i64>, controls: Vec<usize>) -> Result<Self> {
        if indices.len() != grid.degree() + 1 + controls.len() {
            return Err(Error::InvalidInput(format!(
                "chain with {} controls needs {} values, got {}",
                controls.len(),
                grid.degree() + 1 + controls.len(),
                indices.len()
            )));
        }
        Ok(Self {
            grid,
            indices,
            controls,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Number of simulated steps `N`.
    pub fn steps(&self) -> usize {
        self.controls.len()
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn controls(&self) -> &[usize] {
        &self.controls
    }

    /// Lattice index at step `n` in `-M..=N`.
    pub fn index_at(&self, n: i64) -> i64 {
        self.indices[(n + self.grid.degree() as i64) as usize]
    }

    pub fn value_at(&self, n: i64) -> f64 {
        self.index_at(n) as f64 * self.grid.spacing()
    }

    /// Window ending at step `n >= 0`.
    pub fn window(&self, n: usize) -> LatticeSegment {
        LatticeSegment::new(self.grid, self.indices[n..=n + self.grid.degree()].to_vec())
            .expect("M + 1 entries")
    }

    /// Step interpolation on `[-r, N h]`.
    pub fn interpolate(&self) -> CadlagPath {
        let s = self.grid.spacing();
        let values: Vec<f64> = self.indices.iter().map(|&k| k as f64 * s).collect();
        crate::paths::interpolate_chain(&values, -(self.grid.degree() as i64), &self.grid)
            .expect("non-empty chain")
    }
}

/// One chain of `steps` transitions from `initial`, the law picking controls.
pub fn simulate_chain(
    kernel: &TransitionKernel<'_>,
    controls: &ControlSet,
    law: &dyn ControlLaw,
    initial: &LatticeSegment,
    steps: usize,
    seed: u64,
    path_index: u64,
) -> Result<ChainPath> {
    if initial.grid() != kernel.grid() {
        return Err(Error::InvalidInput(
            "initial window is on a different grid".into(),
        ));
    }
    let mut rng = path_rng(seed, path_index);
    let mut indices = Vec::with_capacity(initial.indices().len() + steps);
    indices.extend_from_slice(initial.indices());
    let mut used = Vec::with_capacity(steps);
    let mut window = initial.clone();
    for n in 0..steps {
        let c = law.control(n, &window)?;
        let point = controls
            .get(c)
            .ok_or_else(|| Error::InvalidInput(format!("control index {c} out of range")))?;
        let next = kernel
            .transition_distribution(&window, point)?
            .sample(rng.random());
        indices.push(next);
        used.push(c);
        window = window.shift(next);
    }
    ChainPath::new(kernel.grid, indices, used)
}

/// `count` independent chains with streams `0..count`, in path order.
pub fn simulate_paths(
    kernel: &TransitionKernel<'_>,
    controls: &ControlSet,
    law: &dyn ControlLaw,
    initial: &LatticeSegment,
    steps: usize,
    seed: u64,
    count: usize,
) -> Result<Vec<ChainPath>> {
    map_range(count, |i| {
        simulate_chain(kernel, controls, law, initial, steps, seed, i as u64)
    })
    .into_iter()
    .collect()
}

/// Martingale part `L`, reconstructed noise `W` and its previsible quadratic
/// variation along one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub step: f64,
    /// `L(n)`, `n = 0..=N`.
    pub martingale: Vec<f64>,
    /// `W(n)`, `n = 0..=N`.
    pub noise: Vec<f64>,
    /// `<W>_n`, `n = 0..=N`.
    pub quadratic_variation: Vec<f64>,
}

/// `L(n) = xi(n) - xi(0) - sum_{i<n} h b_i`, `W(n) = sum_{i<n} dL_i / sigma_i`
/// and `<W>_n = sum_{i<n} (h - h^2 b_i^2 / sigma_i^2)`, all coefficients taken
/// at the window before each step.
pub fn reconstruct_noise(
    path: &ChainPath,
    controls: &ControlSet,
    kernel: &TransitionKernel<'_>,
) -> Result<NoisePath> {
    if path.grid() != kernel.grid() {
        return Err(Error::InvalidInput("chain and kernel grids differ".into()));
    }
    let n_steps = path.steps();
    if path.indices.len() != path.grid.degree() + 1 + n_steps {
        return Err(Error::InvalidInput(
            "chain values and controls have mismatched lengths".into(),
        ));
    }
    let h = kernel.grid.step();
    let mut martingale = Vec::with_capacity(n_steps + 1);
    let mut noise = Vec::with_capacity(n_steps + 1);
    let mut qv = Vec::with_capacity(n_steps + 1);
    martingale.push(0.0);
    noise.push(0.0);
    qv.push(0.0);
    let mut drift_sum = 0.0;
    for i in 0..n_steps {
        let point = controls.get(path.controls[i]).ok_or_else(|| {
            Error::InvalidInput(format!("control index {} out of range", path.controls[i]))
        })?;
        let (b, sigma) = kernel.coeffs.eval_on_window(&path.window(i), point)?;
        drift_sum += h * b;
        let l_next = path.value_at(i as i64 + 1) - path.value_at(0) - drift_sum;
        let dl = l_next - martingale[i];
        martingale.push(l_next);
        noise.push(noise[i] + dl / sigma);
        qv.push(qv[i] + h - h * h * b * b / (sigma * sigma));
    }
    Ok(NoisePath {
        step: h,
        martingale,
        noise,
        quadratic_variation: qv,
    })
}

/// `n h^2 K^2 / sigma0^2`, the deterministic bound on `|<W>_n - n h|`.
pub fn qv_bound(n: usize, coeffs: &CoefficientSet, grid: &TimeGrid) -> f64 {
    let h = grid.step();
    let k = coeffs.bound() as f64;
    let s0 = coeffs.ellipticity();
    n as f64 * h * h * k * k / (s0 * s0)
}

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self {
                mean: 0.0,
                stderr: 0.0,
                count: 0,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            count: n,
        }
    }

    /// `|mean - target| <= z * stderr`.
    pub fn within(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleReport {
    /// One-step increments of `L`.
    pub martingale: MeanEstimate,
    /// One-step increments of the chain itself; centred at `h b`.
    pub chain: MeanEstimate,
    pub expected_chain_mean: f64,
    pub control: String,
    /// `|mean of L increments| > 3 stderr`.
    pub flagged: bool,
}

pub fn martingale_check(
    kernel: &TransitionKernel<'_>,
    window: &LatticeSegment,
    control: &ControlPoint,
    paths: usize,
    seed: u64,
) -> Result<MartingaleReport> {
    let d = kernel.transition_distribution(window, control)?;
    let h = kernel.grid.step();
    let s = kernel.grid.spacing();
    let xi: Vec<f64> = map_range(paths, |i| {
        let mut rng = path_rng(seed, i as u64);
        (d.sample(rng.random()) - d.current()) as f64 * s
    });
    let l: Vec<f64> = xi.iter().map(|dx| dx - h * d.drift).collect();
    let martingale = MeanEstimate::from_samples(&l);
    Ok(MartingaleReport {
        flagged: !martingale.within(0.0, 3.0),
        martingale,
        chain: MeanEstimate::from_samples(&xi),
        expected_chain_mean: h * d.drift,
        control: control.label.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ControlFactor, Diffusion, Drift, Lag, LinearFunctional, SaturatedLinearDrift,
    };
    use alloc::vec;

    fn constant(b: f64, sigma: f64, k: u32) -> CoefficientSet {
        CoefficientSet::new(
            1.0,
            Drift::Constant(b),
            Diffusion::Constant(sigma),
            k,
            0.0,
            sigma,
        )
        .unwrap()
    }

    fn origin(grid: TimeGrid) -> LatticeSegment {
        LatticeSegment::new(grid, vec![0; grid.degree() + 1]).unwrap()
    }

    fn u0() -> ControlPoint {
        ControlPoint::new("u", 0.0)
    }

    #[test]
    fn symmetric_distribution() {
        let c = constant(0.0, 1.0, 1);
        let g = TimeGrid::new(1.0, 4).unwrap();
        let k = TransitionKernel::new(&c, g).unwrap();
        let d = k.transition_distribution(&origin(g), &u0()).unwrap();
        assert_eq!((d.up, d.stay, d.down), (0.5, 0.0, 0.5));
        assert_eq!((d.up_target(), d.down_target()), (1, -1));
    }

    #[test]
    fn drifted_distribution() {
        // sigma^2 = 0.64, b = 0.5, K = 1, h = 0.04
        let c = constant(0.5, 0.8, 1);
        let g = TimeGrid::new(1.0, 25).unwrap();
        let k = TransitionKernel::new(&c, g).unwrap();
        let d = k.transition_distribution(&origin(g), &u0()).unwrap();
        assert!((d.up - 0.37).abs() < 1e-15);
        assert!((d.down - 0.27).abs() < 1e-15);
        assert!((d.stay - 0.36).abs() < 1e-15);
        let e = local_consistency_check(&k, &origin(g), &u0()).unwrap();
        assert!((e.mean - 0.02).abs() < 1e-15);
        assert!((e.variance - 0.0252).abs() < 1e-15);
        assert!(e.mean_error < 1e-12 && e.variance_error < 1e-12);
    }

    #[test]
    fn infeasible_distribution() {
        let c = constant(3.0, 0.5, 1);
        let g = TimeGrid::new(1.0, 25).unwrap();
        let k = TransitionKernel::new(&c, g).unwrap();
        match k.transition_distribution(&origin(g), &u0()) {
            Err(Error::KernelInfeasible {
                branch,
                probability,
                step,
                ..
            }) => {
                assert_eq!(branch, "down");
                assert!((probability - (0.125 - 0.3)).abs() < 1e-12);
                assert_eq!(step, 0.04);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn h_star_examples() {
        let controls = ControlSet::from_values(&[-1.0, 1.0]).unwrap();
        let unit = CoefficientSet::new(
            1.0,
            Drift::Constant(1.0),
            Diffusion::Constant(1.0),
            1,
            0.0,
            1.0,
        )
        .unwrap();
        assert_eq!(max_admissible_step(&unit, &controls), 1.0);
        assert!(degrees_above_bound(&unit, &controls, &[1, 2, 5]).is_empty());

        let half = CoefficientSet::new(
            1.0,
            Drift::SaturatedLinear(SaturatedLinearDrift {
                functional: LinearFunctional {
                    bias: 0.0,
                    lags: vec![Lag {
                        offset: -1.0,
                        gain: 1.0,
                    }],
                    integrals: vec![],
                },
                saturation: 1.0,
                control: ControlFactor::IDENTITY,
            }),
            Diffusion::AbsCurrent {
                floor: 0.5,
                cap: 1.0,
            },
            1,
            2.0,
            0.5,
        )
        .unwrap();
        assert_eq!(max_admissible_step(&half, &controls), 0.0625);
        assert_eq!(
            degrees_above_bound(&half, &controls, &[8, 15, 16, 20]),
            vec![8, 15]
        );

        let g = TimeGrid::new(1.0, 16).unwrap();
        let k = TransitionKernel::new(&half, g).unwrap();
        let span = default_span(&g);
        let r = validate_kernel(
            &k,
            &controls,
            &mut |rng| random_window(rng, &g, span),
            300,
            1,
        )
        .unwrap();
        assert!(r.within_analytic_bound());
        assert!(r.sampled_feasible(), "{r:?}");
    }

    #[test]
    fn sigma_equal_to_k_never_stays() {
        let c = constant(0.3, 2.0, 2);
        let g = TimeGrid::new(1.0, 9).unwrap();
        let k = TransitionKernel::new(&c, g).unwrap();
        let controls = ControlSet::from_values(&[0.0]).unwrap();
        let r =
            validate_kernel(&k, &controls, &mut |rng| random_window(rng, &g, 5), 10, 2).unwrap();
        assert_eq!(r.min_stay_margin, 0.0);
        assert!(r.sampled_feasible());
        assert_eq!(
            k.transition_distribution(&origin(g), &u0()).unwrap().stay,
            0.0
        );
    }

    #[test]
    fn sampling_respects_zero_branches() {
        let d = TransitionDistribution {
            down: 0.5,
            stay: 0.0,
            up: 0.5,
            current: 3,
            jump: 2,
            drift: 0.0,
            diffusion: 1.0,
        };
        assert_eq!(d.sample(0.0), 1);
        assert_eq!(d.sample(0.4999), 1);
        assert_eq!(d.sample(0.5), 5);
        assert_eq!(d.sample(0.999_999_999), 5);
        let only_down = TransitionDistribution {
            down: 1.0,
            stay: 0.0,
            up: 0.0,
            ..d
        };
        assert_eq!(only_down.sample(0.999_999_999_999), 1);
    }

    #[test]
    fn seeded_simulation_is_reproducible() {
        let c = constant(0.0, 1.0, 1);
        let g = TimeGrid::new(1.0, 4).unwrap();
        let k = TransitionKernel::new(&c, g).unwrap();
        let controls = ControlSet::from_values(&[0.0]).unwrap();
        let a = simulate_chain(&k, &controls, &ConstantControl(0), &origin(g), 20, 9, 3).unwrap();
        let b = simulate_chain(&k, &controls, &ConstantControl(0), &origin(g), 20, 9, 3).unwrap();
        assert_eq!(a, b);
        let other =
            simulate_chain(&k, &controls, &ConstantControl(0), &origin(g), 20, 9, 4).unwrap();
        assert_ne!(a, other);
        assert!(a
            .indices()
            .windows(2)
            .skip(g.degree())
            .all(|w| (w[1] - w[0]).abs() == 1));
    }

    #[test]
    fn driftless_noise_is_the_chain() {
        let c = constant(0.0, 1.0, 1);
        let g = TimeGrid::new(1.0, 4).unwrap();
        let k = TransitionKernel::new(&c, g).unwrap();
        let controls = ControlSet::from_values(&[0.0]).unwrap();
        let p = simulate_chain(&k, &controls, &ConstantControl(0), &origin(g), 12, 1, 0).unwrap();
        let w = reconstruct_noise(&p, &controls, &k).unwrap();
        assert_eq!(w.noise[0], 0.0);
        for n in 0..=12 {
            assert_eq!(w.noise[n], p.value_at(n as i64) - p.value_at(0));
            assert_eq!(w.quadratic_variation[n], n as f64 * g.step());
        }
    }

    #[test]
    fn control_sequence_runs_out() {
        let c = constant(0.0, 1.0, 1);
        let g = TimeGrid::new(1.0, 2).unwrap();
        let k = TransitionKernel::new(&c, g).unwrap();
        let controls = ControlSet::from_values(&[0.0]).unwrap();
        let seq = ControlSequence(vec![0, 0]);
        assert!(simulate_chain(&k, &controls, &seq, &origin(g), 3, 0, 0).is_err());
        assert!(simulate_chain(&k, &controls, &ConstantControl(5), &origin(g), 3, 0, 0).is_err());
    }

    #[test]
    fn mismatched_chain_lengths() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        assert!(ChainPath::new(g, vec![0, 0, 0, 1], vec![0, 0]).is_err());
    }

    #[test]
    fn symmetric_martingale_check() {
        let c = constant(0.0, 1.0, 1);
        let g = TimeGrid::new(1.0, 4).unwrap();
        let k = TransitionKernel::new(&c, g).unwrap();
        let r = martingale_check(&k, &origin(g), &u0(), 20_000, 5).unwrap();
        assert!(!r.flagged);
        assert!(r.martingale.mean.abs() < 0.02);
    }
}
