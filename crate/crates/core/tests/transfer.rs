use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specstat_core::linalg::Polynomial;
use specstat_core::model::{build_box_operator, sample_disorder, BoxSize, Density, ModelSpec};
use specstat_core::spectral::eigen_all;
use specstat_core::transfer::{
    chain_transfer, direction_transport, Gram, matrix_a_closed_form, matrix_a_determinant, n_step_transfer,
    one_step_transfer, pruefer_trace, resultant_from_grams, resultant_pair, root_proximity, LatticeInstance, ContinuumInstance,
    Provenance, ResultantCoeffs, TransferMatrix,
};
use specstat_core::Mat2f64;

fn random_multimer(rng: &mut ChaCha8Rng) -> ModelSpec {
    let period = rng.random_range(2..=3);
    let a = (0..period).map(|_| 0.5 + rng.random::<f64>()).collect();
    let b = (0..rng.random_range(1..=4)).map(|_| 0.5 + rng.random::<f64>()).collect();
    ModelSpec::multimer(a, b, Density::UniformSymmetric { bound: 2.0 })
}

/// `ũ(k) = (−1)^k u(k)` with `u(−1) = u(n) = 0`.
fn staggered(v: &[f64], k: i64) -> f64 {
    if k < 0 || k as usize >= v.len() {
        return 0.0;
    }
    if k % 2 == 0 {
        v[k as usize]
    } else {
        -v[k as usize]
    }
}

#[test]
fn chained_transfers_reproduce_eigenvectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for inst in 0..100 {
        let model = random_multimer(&mut rng);
        let p = model.period() as i64;
        let cells = rng.random_range(2..=6);
        let size = BoxSize::Sites((p * cells) as usize);
        let sample = sample_disorder(&model, size, inst).unwrap();
        let op = build_box_operator(&model, &sample, size).unwrap();
        let spec = eigen_all(&op, true, None).unwrap();
        let which = rng.random_range(0..spec.len());
        let (e, v) = (spec.eigenvalues[which], spec.vector(which).unwrap());
        let start = [staggered(v, 0), 0.0];
        for c in 1..=cells {
            let t = chain_transfer(&model, &sample, e, 0..c).unwrap();
            let got = t.apply(start);
            let want = [staggered(v, p * c), staggered(v, p * c - 1)];
            worst = worst.max((got[0] - want[0]).abs()).max((got[1] - want[1]).abs());
        }
    }
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn one_step_follows_the_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for inst in 0..50 {
        let model = random_multimer(&mut rng);
        let p = model.period();
        let size = BoxSize::Sites(4 * p);
        let sample = sample_disorder(&model, size, 100 + inst).unwrap();
        let op = build_box_operator(&model, &sample, size).unwrap();
        let spec = eigen_all(&op, true, None).unwrap();
        let which = rng.random_range(0..spec.len());
        let (e, v) = (spec.eigenvalues[which], spec.vector(which).unwrap());
        for k in 0..(4 * p) as i64 {
            let (n, m) = (k.div_euclid(p as i64), k.rem_euclid(p as i64) as usize);
            let got = one_step_transfer(&model, &sample, e, n, m).unwrap().apply([staggered(v, k), staggered(v, k - 1)]);
            assert!((got[0] - staggered(v, k + 1)).abs() < 1e-9);
            assert!((got[1] - staggered(v, k)).abs() < 1e-15);
        }
    }
}

#[test]
fn cell_determinant_is_blind_to_disorder() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for inst in 0..20 {
        let model = random_multimer(&mut rng);
        let size = BoxSize::Sites(model.period());
        let base = sample_disorder(&model, size, inst).unwrap();
        let e = 4.0 * rng.random::<f64>() - 2.0;
        let dets: Vec<f64> = (0..10)
            .map(|j| {
                let s = base.with_value(0, -2.0 + 0.4 * j as f64).unwrap();
                n_step_transfer(&model, &s, e, 0).unwrap().det()
            })
            .collect();
        assert!(dets.iter().all(|d| (d - dets[0]).abs() < 1e-12), "{dets:?}");
    }
}

#[test]
fn det_a_identity_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10_000 {
        let mut draw = || 4.0 * rng.random::<f64>() - 2.0;
        let d = [draw(), draw(), draw(), draw()];
        let (pp, pm) = (draw(), draw());
        let direct = matrix_a_determinant(d, pp, pm);
        let closed = matrix_a_closed_form(d, pp, pm);
        assert!((direct - closed).abs() < 1e-10, "{direct} vs {closed}");
    }
}

fn random_transfer(rng: &mut ChaCha8Rng) -> TransferMatrix {
    let mut x = || 2.0 * rng.random::<f64>() - 1.0;
    TransferMatrix::new(Mat2f64::new(x(), x(), x(), x()), Provenance::CellBasis)
}

#[test]
fn rotated_transfers_share_every_root() {
    // G = R F keeps the Gram entries, so R₁ and R₂ vanish on the diagonal
    // t_u = t_v and the resultant vanishes identically
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let (fp, fm) = (random_transfer(&mut rng), random_transfer(&mut rng));
        let rot = |a: f64| Mat2f64::new(a.cos(), -a.sin(), a.sin(), a.cos());
        let gp = TransferMatrix::new(rot(rng.random::<f64>()) * fp.entries, Provenance::CellBasis);
        let gm = TransferMatrix::new(rot(rng.random::<f64>()) * fm.entries, Provenance::CellBasis);
        let r = resultant_pair(&fp, &fm, &gp, &gm).unwrap();
        let tv = 2.0 * rng.random::<f64>() - 1.0;
        assert!(r.eval(tv).abs() <= 1e-10 * r.scale.max(1.0), "{:e}", r.eval(tv));
    }
}

#[test]
fn planted_common_root_in_floating_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..200 {
        let mut x = || 2.0 * rng.random::<f64>() - 1.0;
        let fp = Gram::new(1.0 + x().abs(), 0.5 * x(), 1.0 + x().abs());
        let fm = Gram::new(1.0 + x().abs(), 0.5 * x(), 1.0 + x().abs());
        let (tu, tv) = (x(), 0.3 + 0.5 * x().abs());
        // solve (1 + t_v²) P_F(t_u) = (1 + t_u²) P_G(t_v) for g11 of G
        let mut plant = |f: &Gram<f64>| {
            let (g12, g22) = (0.5 * x(), 1.0 + x().abs());
            let pf = tu * tu * f.g11 + 2.0 * tu * f.g12 + f.g22;
            let rhs = (1.0 + tv * tv) * pf / (1.0 + tu * tu) - 2.0 * tv * g12 - g22;
            Gram::new(rhs / (tv * tv), g12, g22)
        };
        let (gp, gm) = (plant(&fp), plant(&fm));
        let (r, degenerate) = resultant_from_grams(&fp, &fm, &gp, &gm);
        assert!(!degenerate);
        let scale = [&fp, &fm, &gp, &gm]
            .iter()
            .flat_map(|g| [g.g11.abs(), g.g12.abs(), g.g22.abs()])
            .fold(1.0f64, f64::max)
            .powi(4);
        assert!(r.eval(&tv).abs() <= 1e-10 * scale, "{:e}", r.eval(&tv));
    }
}

#[test]
fn root_proximity_bound_on_grid_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..1000 {
        let roots: Vec<f64> = (0..8).map(|_| rng.random_range(-8..=8) as f64 / 4.0).collect();
        let lead = 0.5 + rng.random::<f64>();
        let mut p = Polynomial::constant(lead);
        for &z in &roots {
            p = p * Polynomial::new(vec![-z, 1.0]);
        }
        let mut c = [0.0; 9];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = p.coeff(k);
        }
        let coeffs = ResultantCoeffs { c, mirrored: false, degenerate: false, vanishing: false, scale: 1.0 };
        let t = roots[0] + 0.1 * (2.0 * rng.random::<f64>() - 1.0);
        let value = coeffs.eval(t).abs();
        let eps = value * (1.0 + rng.random::<f64>());
        let r = root_proximity(&coeffs, t, 0.5, eps).unwrap();
        assert!(r.distance <= r.bound * (1.0 + 1e-9) + 1e-9, "{r:?}");
    }
}

#[test]
fn transport_is_lipschitz_in_the_potential() {
    // the constant is fitted once on a pilot run and frozen here
    const C: f64 = 20.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let (a, b, k) = (rng.random::<f64>(), rng.random::<f64>(), 1.0 + 3.0 * rng.random::<f64>());
        let w = move |x: f64| a + b * (k * x).sin();
        let wt = move |x: f64| w(x) + 1e-4 * (3.0 * x).cos();
        let t = direction_transport(&w, 0.0, 1.0).unwrap();
        let tt = direction_transport(&wt, 0.0, 1.0).unwrap();
        let d = t.max_displacement(&tt, 64).unwrap();
        assert!(d <= C * 1e-4, "{d:e}");
        assert!((t.matrix.det() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn pruefer_mass_is_the_gradient_norm() {
    let model = ModelSpec::multimer(vec![1.0, 0.6], vec![1.0, 0.8], Density::Uniform01);
    for seed in 0..10 {
        let size = BoxSize::Sites(24);
        let sample = sample_disorder(&model, size, seed).unwrap();
        let op = build_box_operator(&model, &sample, size).unwrap();
        let spec = eigen_all(&op, true, None).unwrap();
        for which in [0, 7, 15, 23] {
            let tr = pruefer_trace(&op, &spec, which).unwrap();
            let residual: f64 = tr.mass_residual.iter().map(|r| r.abs()).sum::<f64>() / tr.normalization;
            assert!((tr.normalized_mass() - 1.0).abs() <= residual + 1e-10, "{} {residual:e}", tr.normalized_mass());
            assert!(tr.theta.iter().all(|t| (0.0..std::f64::consts::TAU).contains(t)));
        }
    }
}

#[test]
fn pruefer_continuum_cells_balance() {
    let model = ModelSpec::simple_continuum(0.01);
    let size = BoxSize::Length(6.0);
    let sample = sample_disorder(&model, size, 3).unwrap();
    let op = build_box_operator(&model, &sample, size).unwrap();
    let spec = eigen_all(&op, true, Some((f64::NEG_INFINITY, 60.0))).unwrap();
    for (which, _) in spec.eigenvectors.iter().take(4) {
        let tr = pruefer_trace(&op, &spec, *which).unwrap();
        assert_eq!(tr.len(), 5);
        // each cell mass plus its residual is the cell's gradient entry
        for k in 0..tr.len() {
            let (a, b) = tr.coeffs[k];
            assert!(a * a + b * b + tr.mass_residual[k] >= -1e-12);
        }
        assert!(tr.normalized_mass() <= 1.0 + tr.mass_residual.iter().map(|r| r.abs()).sum::<f64>() / tr.normalization);
    }
}

#[test]
fn oscillation_lemmas_hold_on_random_instances() {
    let mut violations = 0;
    for seed in 0..500 {
        let c = ContinuumInstance::random(seed);
        violations += (!c.check_onezero(4.0).unwrap().holds()) as usize;
        violations += (!c.check_threezero(4.0).unwrap().holds()) as usize;
        let l = LatticeInstance::random(seed);
        violations += (!l.check_onezero(40).unwrap().holds()) as usize;
        violations += (!l.check_threezero(40).unwrap().holds()) as usize;
    }
    assert_eq!(violations, 0);
}
