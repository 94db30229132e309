mod common;

use common::{random_problem, Shape};
use delaymca_core::chain::{
    consistency_report, default_span, path_rng, qv_bound, random_window, reconstruct_noise,
    simulate_chain, ConstantControl, ControlSequence,
};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn moments_match_drift_and_diffusion(seed in any::<u64>(), degree in 2usize..12) {
        let p = random_problem(seed, Shape { degree, controls: 3, steps: 1 });
        let kernel = p.kernel();
        let report = consistency_report(&kernel, p.controls(), 64, default_span(p.grid()), seed).unwrap();
        prop_assert!(report.worst_probability_sum_error <= 1e-12);
        prop_assert!(report.worst_mean_error <= 1e-12);
        prop_assert!(report.worst_variance_error <= 1e-12);
        let bound = p.coeffs().bound() as f64 * p.grid().spacing();
        for e in &report.entries {
            prop_assert!(e.max_jump <= bound * (1.0 + 1e-15));
        }
    }

    #[test]
    fn branch_probabilities_lie_in_unit_interval(seed in any::<u64>()) {
        let p = random_problem(seed, Shape { degree: 5, controls: 2, steps: 1 });
        let kernel = p.kernel();
        let mut rng = path_rng(seed, 0);
        for _ in 0..32 {
            let w = random_window(&mut rng, p.grid(), default_span(p.grid()));
            for u in p.controls().points() {
                let d = kernel.transition_distribution(&w, u).unwrap();
                for (_, pr) in d.outcomes() {
                    prop_assert!((0.0..=1.0).contains(&pr));
                }
            }
        }
    }

    #[test]
    fn previsible_qv_stays_within_bound(seed in any::<u64>()) {
        let p = random_problem(seed, Shape { degree: 8, controls: 2, steps: 1 });
        let kernel = p.kernel();
        let mut rng = path_rng(seed, 1);
        let law = ControlSequence((0..16).map(|_| rng.random_range(0..2)).collect());
        let path = simulate_chain(&kernel, p.controls(), &law, p.initial(), 16, seed, 0).unwrap();
        let noise = reconstruct_noise(&path, p.controls(), &kernel).unwrap();
        let h = p.grid().step();
        for (n, qv) in noise.quadratic_variation.iter().enumerate() {
            prop_assert!((qv - n as f64 * h).abs() <= qv_bound(n, p.coeffs(), p.grid()) * (1.0 + 1e-12));
        }
        // W increments are the martingale increments rescaled by sigma.
        prop_assert_eq!(noise.noise[0], 0.0);
        prop_assert_eq!(noise.martingale.len(), 17);
    }
}

#[test]
fn simulation_is_reproducible_per_stream() {
    let p = random_problem(
        5,
        Shape {
            degree: 6,
            controls: 2,
            steps: 1,
        },
    );
    let kernel = p.kernel();
    let a = simulate_chain(
        &kernel,
        p.controls(),
        &ConstantControl(1),
        p.initial(),
        30,
        9,
        4,
    )
    .unwrap();
    let b = simulate_chain(
        &kernel,
        p.controls(),
        &ConstantControl(1),
        p.initial(),
        30,
        9,
        4,
    )
    .unwrap();
    let c = simulate_chain(
        &kernel,
        p.controls(),
        &ConstantControl(1),
        p.initial(),
        30,
        9,
        5,
    )
    .unwrap();
    assert_eq!(a, b);
    assert_ne!(a.indices(), c.indices());
}
