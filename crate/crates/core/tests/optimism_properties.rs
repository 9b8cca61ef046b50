use optbandits_core::optimism::{
    expected_max_mc, klearning_policy, optimism_gradient, optimism_map, ts_policy_mc, vbos_policy,
};
use optbandits_core::{Belief, GaussianPosterior, Policy, RngStream, SolverConfig, TwoPointPosterior};
use proptest::prelude::*;

fn arms_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, 0.01..4.0f64), 2..8)
}

fn gaussians(spec: &[(f64, f64)]) -> Vec<GaussianPosterior> {
    spec.iter()
        .map(|&(m, v)| GaussianPosterior::new(m, v, 1.0).unwrap())
        .collect()
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..1.0f64, n)
}

fn arms_and_two_policies() -> impl Strategy<Value = (Vec<(f64, f64)>, Vec<f64>, Vec<f64>)> {
    arms_strategy().prop_flat_map(|a| {
        let n = a.len();
        (Just(a), weights(n), weights(n))
    })
}

// golden-section minimum of a unimodal function on [lo, hi]
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..300 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimism_map_is_concave((spec, w1, w2) in arms_and_two_policies(), t in 0.0..1.0f64) {
        let arms = gaussians(&spec);
        let p1 = Policy::from_weights(w1).unwrap();
        let p2 = Policy::from_weights(w2).unwrap();
        let mix: Vec<f64> = p1.probs().iter().zip(p2.probs()).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let mid = optimism_map(&arms, &Policy::new(mix).unwrap()).unwrap().value;
        let chord = t * optimism_map(&arms, &p1).unwrap().value + (1.0 - t) * optimism_map(&arms, &p2).unwrap().value;
        prop_assert!(mid >= chord - 1e-10, "{mid} < {chord}");
    }

    #[test]
    fn gradient_matches_directional_differences((spec, w, _) in arms_and_two_policies(), i in 0usize..8, j in 0usize..8) {
        let arms = gaussians(&spec);
        let n = arms.len();
        let (i, j) = (i % n, j % n);
        prop_assume!(i != j);
        let pi = Policy::from_weights(w).unwrap();
        let g = optimism_gradient(&arms, &pi, &SolverConfig::default()).unwrap();
        let h = 1e-6 * pi.probs()[i].min(pi.probs()[j]);
        let shifted = |s: f64| {
            let mut p = pi.probs().to_vec();
            p[i] += s;
            p[j] -= s;
            optimism_map(&arms, &Policy::new(p).unwrap()).unwrap().value
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        let analytic = g[i] - g[j];
        prop_assert!((fd - analytic).abs() <= 1e-4 * (1.0 + analytic.abs()), "fd {fd} vs {analytic}");
    }

    #[test]
    fn vbos_shifts_with_the_means(spec in arms_strategy(), c in -5.0..5.0f64) {
        let cfg = SolverConfig::default();
        let base = vbos_policy(&gaussians(&spec), &cfg).unwrap();
        let moved: Vec<(f64, f64)> = spec.iter().map(|&(m, v)| (m + c, v)).collect();
        let shifted = vbos_policy(&gaussians(&moved), &cfg).unwrap();
        prop_assert!((shifted.value - base.value - c).abs() < 1e-8);
        for (a, b) in shifted.policy.probs().iter().zip(base.policy.probs()) {
            prop_assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn more_uncertainty_never_lowers_the_map((spec, w, _) in arms_and_two_policies(), scale in 1.0..5.0f64) {
        let pi = Policy::from_weights(w).unwrap();
        let wider: Vec<(f64, f64)> = spec.iter().map(|&(m, v)| (m, v * scale)).collect();
        let narrow = optimism_map(&gaussians(&spec), &pi).unwrap().value;
        let wide = optimism_map(&gaussians(&wider), &pi).unwrap().value;
        prop_assert!(wide >= narrow - 1e-12);
    }

    #[test]
    fn vbos_favours_the_more_uncertain_arm(spec in arms_strategy(), i in 0usize..8, scale in 1.0..4.0f64, m in -1.0..1.0f64) {
        let i = i % spec.len();
        let equal: Vec<(f64, f64)> = spec.iter().map(|&(_, v)| (m, v)).collect();
        let mut wider = equal.clone();
        wider[i].1 *= scale;
        let cfg = SolverConfig::default();
        let before = vbos_policy(&gaussians(&equal), &cfg).unwrap().policy.probs()[i];
        let after = vbos_policy(&gaussians(&wider), &cfg).unwrap().policy.probs()[i];
        prop_assert!(after >= before - 1e-9, "{after} < {before}");
    }

    #[test]
    fn klearning_bound_dominates_vbos(spec in arms_strategy()) {
        let arms = gaussians(&spec);
        let cfg = SolverConfig::default();
        let v = vbos_policy(&arms, &cfg).unwrap();
        let k = klearning_policy(&arms, &cfg).unwrap();
        prop_assert!(k.objective >= v.value - 1e-8, "K {} < VBOS {}", k.objective, v.value);
        let gk = optimism_map(&arms, &k.policy).unwrap().value;
        prop_assert!(gk <= v.value + 1e-8);
    }

    #[test]
    fn vbos_beats_every_policy((spec, w, _) in arms_and_two_policies()) {
        let arms = gaussians(&spec);
        let v = vbos_policy(&arms, &SolverConfig::default()).unwrap();
        let other = optimism_map(&arms, &Policy::from_weights(w).unwrap()).unwrap().value;
        prop_assert!(v.value >= other - 1e-9);
    }

    #[test]
    fn gaussian_perspective_identity(var in 0.01..9.0f64, y in 0.01..10.0f64) {
        let arm = GaussianPosterior::new(0.0, var, 1.0).unwrap();
        let numeric = golden_min(|tau| tau * arm.cgf(1.0 / tau) + tau * y, 1e-6, 1e3);
        let closed = (2.0 * var * y).sqrt();
        prop_assert!((numeric - closed).abs() < 1e-6);
        prop_assert!((arm.rate_bonus(y).radius - closed).abs() < 1e-12);
    }

    #[test]
    fn two_point_rate_bonus_matches_numeric_infimum(p in 0.05..0.95f64, gap in 0.1..4.0f64, y in 0.01..3.0f64) {
        let arm = TwoPointPosterior::new(-gap / 2.0, gap / 2.0, p, 1.0).unwrap();
        let numeric = golden_min(|tau| tau * arm.cgf(1.0 / tau) + tau * y, 1e-12, 1e3);
        let rb = arm.rate_bonus(y);
        prop_assert!((rb.radius - numeric).abs() < 1e-6, "{} vs {numeric}", rb.radius);
        // the bonus of a bounded law never exceeds the distance to the top atom
        prop_assert!(rb.radius <= gap / 2.0 - arm.mean() + 1e-9);
    }
}

#[test]
fn sandwich_on_fixed_instances() {
    let cfg = SolverConfig::default();
    let mut rng = RngStream::new(77);
    for k in 0..12 {
        let spec: Vec<(f64, f64)> = (0..3 + k % 5)
            .map(|_| (rng.standard_normal(), 0.05 + 2.0 * rng.uniform()))
            .collect();
        let arms = gaussians(&spec);
        let emax = expected_max_mc(&arms, &mut rng, 200_000);
        let ts = ts_policy_mc(&arms, &mut rng, 200_000);
        let g_ts = optimism_map(&arms, &ts).unwrap().value;
        let g_vbos = vbos_policy(&arms, &cfg).unwrap().value;
        assert!(emax.estimate <= g_ts + 3.0 * emax.std_error, "instance {k}: E max {emax:?} > G(TS) {g_ts}");
        assert!(g_ts <= g_vbos + 1e-9, "instance {k}: G(TS) {g_ts} > G(VBOS) {g_vbos}");
    }
}

#[test]
fn uniform_gaussian_arms_attain_the_max_bound() {
    for a in [2usize, 3, 10, 50] {
        for sigma in [0.5, 1.0, 2.0] {
            let arms = vec![GaussianPosterior::new(0.0, sigma * sigma, 1.0).unwrap(); a];
            let v = vbos_policy(&arms, &SolverConfig::default()).unwrap();
            assert!((v.value - sigma * (2.0 * (a as f64).ln()).sqrt()).abs() < 1e-9);
            for p in v.policy.probs() {
                assert!((p - 1.0 / a as f64).abs() < 1e-9);
            }
        }
    }
}
