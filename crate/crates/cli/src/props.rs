//! Randomised property suites for the deterministic lemmas: the
//! gradient-to-Jacobian bound, the oscillation lemmas, the `det A` identity
//! with planted resultant roots, and sublevel-set exponents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use specstat_core::sensitivity::gradjac_bound_check;
use specstat_core::seed::trial_seed;
use specstat_core::stats::{par_tally, size_stream, streams};
use specstat_core::transfer::{
    matrix_a_closed_form, matrix_a_determinant, resultant_from_grams, sublevel_profile, ContinuumInstance, Gram,
    LatticeInstance, LemmaCheck, SublevelProfile,
};
use specstat_core::Result;

/// Zero-width tolerance of the `det A` identity.
pub const DET_A_TOL: f64 = 1e-10;
/// `|ℛ(t_v*)|` allowed at a planted root, relative to the Gram scale.
pub const PLANTED_ROOT_TOL: f64 = 1e-10;
/// Continuum half-length and lattice half-width of the oscillation runs.
pub const OSCILLATION_HALF: (f64, usize) = (4.0, 40);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub instances: u64,
    pub violations: u64,
    /// Suite-specific extreme: smallest margin for inequalities, largest
    /// deviation for identities.
    pub worst: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// One lemma check per instance seed.
type LemmaFn<'a> = &'a (dyn Fn(u64) -> Result<LemmaCheck> + Sync);

fn rng(seed: u64, suite: usize, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(seed, size_stream(streams::PROPS, suite), i))
}

/// Count of violations and an extreme value, merged order-free.
fn tally(
    n: u64,
    extreme: fn(f64, f64) -> f64,
    start: f64,
    task: impl Fn(u64) -> Result<(bool, f64)> + Sync + Send,
) -> Result<(u64, f64)> {
    par_tally(
        n,
        (0, start),
        |i| task(i).map(|(bad, x)| (bad as u64, x)),
        |a, b| (a.0 + b.0, extreme(a.1, b.1)),
    )
}

/// Nonnegative vector with some exact zeros and a positive sum.
fn sparse_vector(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| if r.random::<f64>() < 0.25 { 0.0 } else { r.random::<f64>() })
        .collect();
    if v.iter().all(|x| *x == 0.0) {
        v[r.random_range(0..n)] = 1.0;
    }
    v
}

/// `max_{γ,γ'} det² ≥ ‖u − v‖₁²/(4n⁵)` on random normalised pairs.
pub fn gradjac_suite(pairs: u64, max_n: usize, seed: u64) -> Result<SuiteOutcome> {
    let (violations, worst) = tally(pairs, f64::min, f64::INFINITY, |i| {
        let mut r = rng(seed, 0, i);
        let n = r.random_range(1..=max_n);
        let (u, v) = (sparse_vector(&mut r, n), sparse_vector(&mut r, n));
        let c = gradjac_bound_check(&u, &v)?;
        Ok((!c.holds, c.lhs - c.rhs))
    })?;
    Ok(SuiteOutcome {
        suite: "gradjac".into(),
        instances: pairs,
        violations,
        worst,
    })
}

/// Both lemmas on random continuum and lattice instances; `worst` is the
/// largest number of sign changes seen.
pub fn oscillation_suite(instances: u64, seed: u64) -> Result<Vec<SuiteOutcome>> {
    let (half_c, half_l) = OSCILLATION_HALF;
    let run = |suite, label, check: LemmaFn| lemma_run(suite, label, instances, seed, check);
    Ok(vec![
        run("onezero_continuum", 1, &|s| ContinuumInstance::random(s).check_onezero(half_c))?,
        run("threezero_continuum", 1, &|s| ContinuumInstance::random(s).check_threezero(half_c))?,
        run("onezero_lattice", 2, &|s| LatticeInstance::random(s).check_onezero(half_l))?,
        run("threezero_lattice", 2, &|s| LatticeInstance::random(s).check_threezero(half_l))?,
    ])
}

fn lemma_run(
    suite: &str,
    label: usize,
    instances: u64,
    seed: u64,
    check: LemmaFn,
) -> Result<SuiteOutcome> {
    let (violations, worst) = tally(instances, f64::max, 0.0, |i| {
        let c = check(trial_seed(seed, size_stream(streams::PROPS, label), i))?;
        Ok((!c.holds(), c.sign_changes as f64))
    })?;
    Ok(SuiteOutcome {
        suite: suite.into(),
        instances,
        violations,
        worst,
    })
}

/// Direct 4×4 determinant against the closed form on coefficients in
/// `[−2, 2]`; `worst` is the largest absolute deviation.
pub fn det_a_suite(draws: u64, seed: u64) -> Result<SuiteOutcome> {
    let (violations, worst) = tally(draws, f64::max, 0.0, |i| {
        let mut r = rng(seed, 3, i);
        let mut x = || 4.0 * r.random::<f64>() - 2.0;
        let d = [x(), x(), x(), x()];
        let (pp, pm) = (x(), x());
        let dev = (matrix_a_determinant(d, pp, pm) - matrix_a_closed_form(d, pp, pm)).abs();
        Ok((dev.is_nan() || dev > DET_A_TOL, dev))
    })?;
    Ok(SuiteOutcome {
        suite: "det_a_identity".into(),
        instances: draws,
        violations,
        worst,
    })
}

/// Grams of `G±` solved so that both norm-matching equations hold at a
/// chosen `(t_u*, t_v*)`; `worst` is the largest `|ℛ(t_v*)|/scale`.
pub fn planted_root_suite(draws: u64, seed: u64) -> Result<SuiteOutcome> {
    let (violations, worst) = tally(draws, f64::max, 0.0, |i| {
        let mut r = rng(seed, 4, i);
        let mut x = || 2.0 * r.random::<f64>() - 1.0;
        let fp = Gram::new(1.0 + x().abs(), 0.5 * x(), 1.0 + x().abs());
        let fm = Gram::new(1.0 + x().abs(), 0.5 * x(), 1.0 + x().abs());
        let (tu, tv) = (x(), 0.3 + 0.5 * x().abs());
        let mut plant = |f: &Gram<f64>| {
            let (g12, g22) = (0.5 * x(), 1.0 + x().abs());
            let pf = tu * tu * f.g11 + 2.0 * tu * f.g12 + f.g22;
            let rhs = (1.0 + tv * tv) * pf / (1.0 + tu * tu) - 2.0 * tv * g12 - g22;
            Gram::new(rhs / (tv * tv), g12, g22)
        };
        let (gp, gm) = (plant(&fp), plant(&fm));
        let (res, _) = resultant_from_grams(&fp, &fm, &gp, &gm);
        let scale = [&fp, &fm, &gp, &gm]
            .iter()
            .flat_map(|g| [g.g11.abs(), g.g12.abs(), g.g22.abs()])
            .fold(1.0f64, f64::max)
            .powi(4);
        let rel = res.eval(&tv).abs() / scale;
        Ok((rel.is_nan() || rel > PLANTED_ROOT_TOL, rel))
    })?;
    Ok(SuiteOutcome {
        suite: "planted_root".into(),
        instances: draws,
        violations,
        worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SublevelOutcome {
    pub function: String,
    pub expected: f64,
    pub profile: SublevelProfile,
}

impl SublevelOutcome {
    pub fn relative_error(&self) -> f64 {
        (self.profile.exponent / self.expected - 1.0).abs()
    }
}

/// Exponents of `x`, `x²`, `x⁴` on `[−1, 1]`, expected `1, 1/2, 1/4`.
pub fn sublevel_suite(samples: u64, eps: &[f64], seed: u64) -> Result<Vec<SublevelOutcome>> {
    [("x", 1), ("x^2", 2), ("x^4", 4)]
        .into_iter()
        .enumerate()
        .map(|(k, (name, p))| {
            let f = move |x: &[f64]| x[0].powi(p);
            let s = trial_seed(seed, size_stream(streams::PROPS, 5), k as u64);
            Ok(SublevelOutcome {
                function: name.into(),
                expected: 1.0 / p as f64,
                profile: sublevel_profile(&f, &[(-1.0, 1.0)], eps, samples, s)?,
            })
        })
        .collect()
}
