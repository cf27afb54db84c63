use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specstat_core::model::{build_box_operator, sample_disorder, BoxSize, Density, ModelSpec, SingleSiteProfile};
use specstat_core::sensitivity::{
    fd_gradient, fd_relative_error, gradjac_bound_check, hessian_norm_estimate, hf_gradient, max_jacobian_pair,
    max_jacobian_pair_brute, GRADIENT_FD_STEP,
};
use specstat_core::spectral::eigen_all;

fn families() -> Vec<(ModelSpec, BoxSize)> {
    vec![
        (ModelSpec::anderson(2.0), BoxSize::Sites(30)),
        (
            ModelSpec::discrete_alloy(vec![1.0, 0.5, 0.25], Density::UniformSymmetric { bound: 1.0 }),
            BoxSize::Sites(30),
        ),
        (ModelSpec::multimer(vec![1.0, 0.6], vec![1.0, 0.8], Density::Uniform01), BoxSize::Sites(30)),
        (ModelSpec::simple_continuum(0.02), BoxSize::Length(6.0)),
        (ModelSpec::continuum_alloy(SingleSiteProfile::tent(1, 2.0).unwrap(), 0.02), BoxSize::Length(6.0)),
    ]
}

#[test]
fn hellmann_feynman_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (model, size) in families() {
        for inst in 0..20 {
            let sample = sample_disorder(&model, size, 1000 + inst).unwrap();
            let op = build_box_operator(&model, &sample, size).unwrap();
            let spec = eigen_all(&op, true, None).unwrap();
            let which = rng.random_range(0..spec.len().min(30));
            let g = hf_gradient(&spec, which, &op).unwrap();
            let fd = fd_gradient(&op, which, GRADIENT_FD_STEP).unwrap();
            let err = fd_relative_error(&g, &fd);
            assert!(err < 1e-5, "{} instance {inst}: {err:e}", model.family.name());
            if model.family.is_continuum() {
                assert!(g.partials.iter().all(|p| *p >= -1e-15));
            }
        }
    }
}

#[test]
fn simple_continuum_gradient_sums_to_one() {
    let model = ModelSpec::simple_continuum(0.02);
    let size = BoxSize::Length(6.0);
    for inst in 0..20 {
        let op = build_box_operator(&model, &sample_disorder(&model, size, inst).unwrap(), size).unwrap();
        let spec = eigen_all(&op, true, None).unwrap();
        for which in [0, 3, 10] {
            let g = hf_gradient(&spec, which, &op).unwrap();
            let total: f64 = g.partials.iter().sum();
            assert!((total - 1.0).abs() < 1e-6, "{total}");
        }
    }
}

#[test]
fn norm_gap_product_is_stable_across_sizes() {
    // C is a bound, so it is fitted as the ensemble maximum of ‖Hess E‖·gap
    // at the band centre; typical values drift down with the box size
    let model = ModelSpec::anderson(2.0);
    let fitted = |l: usize| {
        (0..30)
            .filter_map(|s| {
                let size = BoxSize::Sites(l);
                let op = build_box_operator(&model, &sample_disorder(&model, size, s).unwrap(), size).unwrap();
                hessian_norm_estimate(&op, l / 2).ok().map(|h| h.norm * h.gap)
            })
            .fold(0.0f64, f64::max)
    };
    let (small, large) = (fitted(50), fitted(200));
    assert!(small > 0.0 && large > 0.0);
    let ratio = large / small;
    assert!((1.0 / 3.0..=3.0).contains(&ratio), "{small} {large}");
}

fn pair(max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_n).prop_flat_map(|n| (prop::collection::vec(0.0..1.0f64, n), prop::collection::vec(0.0..1.0f64, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn gradjac_lemma((u, v) in pair(12)) {
        prop_assume!(u.iter().sum::<f64>() > 0.0 && v.iter().sum::<f64>() > 0.0);
        let c = gradjac_bound_check(&u, &v).unwrap();
        prop_assert!(c.holds, "{c:?}");
    }

    #[test]
    fn hull_search_is_exhaustive((u, v) in pair(40)) {
        let fast = max_jacobian_pair(&u, &v).map(|p| p.2.abs());
        let slow = max_jacobian_pair_brute(&u, &v).map(|p| p.2.abs());
        match (fast, slow) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0)),
            (a, b) => prop_assert_eq!(a, b),
        }
    }
}
