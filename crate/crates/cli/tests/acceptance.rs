//! Acceptance run: one PASS/FAIL line per criterion, with timings.
//!
//! The process exits 0 even when a criterion fails, so that an honest FAIL
//! does not mask the rest of the test suite; set `SPECSTAT_ACCEPTANCE_STRICT`
//! to turn failures into a nonzero exit.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specstat_cli::config::Reference;
use specstat_cli::experiments::reference_ids;
use specstat_cli::props;
use specstat_core::model::{
    build_box_operator, sample_disorder, BoxSize, Density, DisorderSample, ModelSpec, SingleSiteProfile,
};
use specstat_core::sensitivity::{fd_gradient, fd_relative_error, hf_gradient, GRADIENT_FD_STEP};
use specstat_core::spectral::{count_in_interval, eigen_all};
use specstat_core::stats::{decorrelation_probe, level_statistics};
use specstat_core::transfer::{chain_transfer, log_grid, n_step_transfer};

const SEED: u64 = 20_241;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn free_lattice(n: usize) -> Vec<f64> {
    let model = ModelSpec::anderson(1.0);
    let s = DisorderSample::from_values(-1, vec![0.0; n + 2], 0, 1.0).unwrap();
    eigen_all(&build_box_operator(&model, &s, BoxSize::Sites(n)).unwrap(), false, None)
        .unwrap()
        .eigenvalues
}

fn oracle_spectra() -> Verdict {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for n in [3usize, 10, 100] {
        let mut want: Vec<f64> = (1..=n).map(|k| -2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos()).collect();
        want.sort_by(f64::total_cmp);
        for (g, w) in free_lattice(n).iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    let model = ModelSpec::simple_continuum(1e-3);
    let s = DisorderSample::from_values(-1, vec![0.0; 3], 0, 1.0).unwrap();
    let op = build_box_operator(&model, &s, BoxSize::Length(1.0)).unwrap();
    let rel = (eigen_all(&op, false, None).unwrap().eigenvalues[0] / (PI * PI) - 1.0).abs();
    let secs = t.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-12 && rel <= 1e-3 && secs < 5.0,
        format!("lattice max err {worst:.1e}, continuum rel err {rel:.1e}, {secs:.2}s < 5s"),
    )
}

fn random_model(rng: &mut ChaCha8Rng) -> (ModelSpec, BoxSize) {
    match rng.random_range(0..5) {
        0 => (ModelSpec::anderson(0.5 + 4.0 * rng.random::<f64>()), BoxSize::Sites(rng.random_range(1..=200))),
        1 => (
            ModelSpec::discrete_alloy(vec![1.0, rng.random::<f64>()], Density::UniformSymmetric { bound: 2.0 }),
            BoxSize::Sites(rng.random_range(1..=200)),
        ),
        2 => {
            let p = rng.random_range(2..=3);
            let a = (0..p).map(|_| 0.5 + rng.random::<f64>()).collect();
            (ModelSpec::multimer(a, vec![1.0, 0.7], Density::Uniform01), BoxSize::Sites(rng.random_range(1..=200)))
        }
        3 => (ModelSpec::simple_continuum(0.05), BoxSize::Length(rng.random_range(1..=10) as f64)),
        _ => (
            ModelSpec::continuum_alloy(SingleSiteProfile::tent(1, 1.0).unwrap(), 0.05),
            BoxSize::Length(rng.random_range(1..=10) as f64),
        ),
    }
}

fn sturm_equivalence() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    for inst in 0..500u64 {
        let (model, size) = random_model(&mut rng);
        let op = build_box_operator(&model, &sample_disorder(&model, size, inst).unwrap(), size).unwrap();
        let evals = eigen_all(&op, false, None).unwrap().eigenvalues;
        let (lo, hi) = if inst % 2 == 0 {
            let i = rng.random_range(0..evals.len());
            (evals[i], evals[rng.random_range(i..evals.len())])
        } else {
            let (a, b) = (evals[0] - 1.0, evals[evals.len() - 1] + 1.0);
            let x = a + (b - a) * rng.random::<f64>();
            (x, x + (b - x) * rng.random::<f64>())
        };
        let want = evals.iter().filter(|e| lo <= **e && **e <= hi).count();
        mismatches += (count_in_interval(&op, lo, hi).unwrap() != want) as usize;
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        mismatches == 0 && secs < 60.0,
        format!("{mismatches} mismatches in 500 instances, {secs:.1}s < 60s"),
    )
}

fn hellmann_feynman() -> Verdict {
    let families = [
        (ModelSpec::anderson(2.0), BoxSize::Sites(30)),
        (
            ModelSpec::discrete_alloy(vec![1.0, 0.5, 0.25], Density::UniformSymmetric { bound: 1.0 }),
            BoxSize::Sites(30),
        ),
        (ModelSpec::multimer(vec![1.0, 0.6], vec![1.0, 0.8], Density::Uniform01), BoxSize::Sites(30)),
        (ModelSpec::simple_continuum(0.02), BoxSize::Length(6.0)),
        (ModelSpec::continuum_alloy(SingleSiteProfile::tent(1, 2.0).unwrap(), 0.02), BoxSize::Length(6.0)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst, mut sum_dev) = (0.0f64, 0.0f64);
    for (model, size) in &families {
        for inst in 0..20 {
            let op = build_box_operator(model, &sample_disorder(model, *size, SEED + inst).unwrap(), *size).unwrap();
            let spec = eigen_all(&op, true, None).unwrap();
            let which = rng.random_range(0..spec.len().min(30));
            let g = hf_gradient(&spec, which, &op).unwrap();
            worst = worst.max(fd_relative_error(&g, &fd_gradient(&op, which, GRADIENT_FD_STEP).unwrap()));
            if model.family.name() == "simple_continuum" {
                sum_dev = sum_dev.max((g.partials.iter().sum::<f64>() - 1.0).abs());
            }
        }
    }
    verdict(
        worst < 1e-5 && sum_dev <= 1e-6,
        format!("max HF/FD rel err {worst:.1e} over 5×20, |Σ∂E − 1| ≤ {sum_dev:.1e}"),
    )
}

fn gradjac() -> Verdict {
    let s = props::gradjac_suite(100_000, 12, SEED).unwrap();
    verdict(
        s.violations == 0 && s.worst >= -1e-14,
        format!("{} violations in {} pairs, min lhs − rhs = {:.2e}", s.violations, s.instances, s.worst),
    )
}

fn staggered(v: &[f64], k: i64) -> f64 {
    if k < 0 || k as usize >= v.len() {
        0.0
    } else if k % 2 == 0 {
        v[k as usize]
    } else {
        -v[k as usize]
    }
}

fn transfer_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let multimer = |rng: &mut ChaCha8Rng| {
        let p = rng.random_range(2..=3);
        let a = (0..p).map(|_| 0.5 + rng.random::<f64>()).collect();
        let b = (0..rng.random_range(1..=4)).map(|_| 0.5 + rng.random::<f64>()).collect();
        ModelSpec::multimer(a, b, Density::UniformSymmetric { bound: 2.0 })
    };
    let mut endpoint = 0.0f64;
    for inst in 0..100 {
        let model = multimer(&mut rng);
        let p = model.period() as i64;
        let cells = rng.random_range(2..=6);
        let size = BoxSize::Sites((p * cells) as usize);
        let sample = sample_disorder(&model, size, inst).unwrap();
        let spec = eigen_all(&build_box_operator(&model, &sample, size).unwrap(), true, None).unwrap();
        let which = rng.random_range(0..spec.len());
        let (e, v) = (spec.eigenvalues[which], spec.vector(which).unwrap());
        let got = chain_transfer(&model, &sample, e, 0..cells).unwrap().apply([staggered(v, 0), 0.0]);
        let want = [staggered(v, p * cells), staggered(v, p * cells - 1)];
        endpoint = endpoint.max((got[0] - want[0]).abs()).max((got[1] - want[1]).abs());
    }
    let mut det_spread = 0.0f64;
    for inst in 0..20 {
        let model = multimer(&mut rng);
        let base = sample_disorder(&model, BoxSize::Sites(model.period()), 500 + inst).unwrap();
        let e = 4.0 * rng.random::<f64>() - 2.0;
        let dets: Vec<f64> = (0..10)
            .map(|j| n_step_transfer(&model, &base.with_value(0, -2.0 + 0.4 * j as f64).unwrap(), e, 0).unwrap().det())
            .collect();
        det_spread = dets.iter().fold(det_spread, |m, d| m.max((d - dets[0]).abs()));
    }
    verdict(
        endpoint < 1e-8 && det_spread < 1e-12,
        format!("endpoint err {endpoint:.1e} on 100 multimers, det T⁰ spread {det_spread:.1e} over 10 values"),
    )
}

fn det_a() -> Verdict {
    let s = props::det_a_suite(10_000, SEED).unwrap();
    verdict(s.passed(), format!("{} violations in {} draws, max |diff| {:.1e}", s.violations, s.instances, s.worst))
}

fn oscillation() -> Verdict {
    let suites = props::oscillation_suite(500, SEED).unwrap();
    let detail: Vec<String> = suites.iter().map(|s| format!("{} {}/{}", s.suite, s.violations, s.instances)).collect();
    verdict(suites.iter().all(props::SuiteOutcome::passed), format!("violations: {}", detail.join(", ")))
}

fn sublevel() -> Verdict {
    let t = Instant::now();
    let subs = props::sublevel_suite(1_000_000, &log_grid(1e-4, 1e-1, 8), SEED).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let detail: Vec<String> = subs
        .iter()
        .map(|s| format!("{} {:.3} (want {:.3})", s.function, s.profile.exponent, s.expected))
        .collect();
    verdict(
        subs.iter().all(|s| s.relative_error() <= 0.2) && secs < 30.0,
        format!("{}, {secs:.1}s < 30s", detail.join(", ")),
    )
}

fn poisson() -> Verdict {
    let t = Instant::now();
    let model = ModelSpec::anderson(2.0);
    let (e0, size) = (1.0, 1000);
    let reference = Reference {
        size: 4 * size,
        trials: 2000,
        halfwidth: 0.25,
        points: 51,
    };
    let ids = reference_ids(&model, &[e0], &reference, SEED).unwrap();
    let rep = level_statistics(&model, &ids, e0, size, 2000, &[(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)], SEED).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let ps: Vec<String> = rep
        .intervals
        .iter()
        .map(|f| format!("p={:.1e} P0={:.3}", f.p_value, f.p_zero_observed))
        .collect();
    verdict(
        rep.intervals.iter().all(|f| f.p_value > 0.01),
        format!("E0={e0} L={size}: {} (target P0=0.368), {secs:.1}s", ps.join("; ")),
    )
}

fn decorrelation() -> Verdict {
    let t = Instant::now();
    let model = ModelSpec::anderson(2.0);
    let rep = decorrelation_probe(&model, 0.0, 2.0, 0.3, &[200, 400, 800, 1600], 4_000_000, false, SEED).unwrap();
    let last = rep.points.last().expect("four sizes");
    let ratio_ok = last.ratio_ci.0 <= 1.0 && 1.0 <= last.ratio_ci.1;
    let exp_ok = rep.one_plus_gamma.is_some_and(|x| x > 1.0) && rep.gamma_positive(2.0);
    verdict(
        ratio_ok && exp_ok,
        format!(
            "1+γ̂ = {:.2} ± {:.2}, ratio at L=1600 {:.2} CI [{:.2}, {:.2}], {:.1}s",
            rep.one_plus_gamma.unwrap_or(f64::NAN),
            rep.gamma_stderr.unwrap_or(f64::NAN),
            last.ratio,
            last.ratio_ci.0,
            last.ratio_ci.1,
            t.elapsed().as_secs_f64()
        ),
    )
}

const MODEL: &str = "[model]\nfamily = \"discrete_alloy\"\ndiscrete_site_profile_d = [2.0]\n";

fn determinism_configs() -> Vec<(&'static str, String)> {
    let e = |body: &str, trials: u64| format!("{MODEL}[experiment]\n{body}\n[ensemble]\ntrials = {trials}\nseed = 11\n");
    vec![
        ("ids", e("energy_min = -1.0\nenergy_max = 3.0\nenergy_points = 21\nsize = 100", 50)),
        ("levelstats", e("e0 = 1.0\nsize = 200\nreference_trials = 50", 250)),
        (
            "joint",
            e(
                "e0 = 0.75\ne0_prime = 1.25\nsize = 200\nintervals_plus = [[0.0, 1.0]]\nintervals_minus = [[0.0, 1.0]]\nreference_trials = 50",
                250,
            ),
        ),
        ("wegner", e("energy = 1.0\nwidths = [0.001, 0.01, 0.1]\nsizes = [20, 40]", 2000)),
        ("minami", e("energy = 1.0\neps = [0.05, 0.1, 0.2]\nsizes = [20, 40]", 2000)),
        ("decorrelate", e("f = 0.0\ng = 2.0\nalpha = 0.3\nsizes = [200, 400]", 20000)),
        (
            "props",
            e(
                "gradjac_pairs = 2000\noscillation_instances = 50\nresultant_draws = 500\nsublevel_samples = 20000",
                1,
            ),
        ),
        ("gradients", e("size = 40\nenergy_min = 0.5\nenergy_max = 1.5\nfd_check = true\nhessian = true", 20)),
    ]
}

fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().is_some_and(|n| n != "manifest.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut files = 0;
    for (kind, text) in determinism_configs() {
        let cfg = tmp.path().join(format!("{kind}.toml"));
        fs::write(&cfg, text).unwrap();
        let run = |workers: u32| {
            let out = tmp.path().join(format!("{kind}-{workers}"));
            let status = Command::new(env!("CARGO_BIN_EXE_specstat"))
                .args([kind, "--config"])
                .arg(&cfg)
                .args(["--workers", &workers.to_string(), "--out"])
                .arg(&out)
                .env_remove("SPECSTAT_WORKERS")
                .output()
                .unwrap();
            assert!(status.status.success(), "{kind}: {}", String::from_utf8_lossy(&status.stderr));
            outputs(&out)
        };
        let (one, eight) = (run(1), run(8));
        files += one.len();
        if one != eight || one.is_empty() {
            differing.push(kind);
        }
    }
    verdict(
        differing.is_empty(),
        format!("8 experiments, {files} files byte-identical at workers 1 and 8; differing: {differing:?}"),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 11] = [
        ("oracle spectra", oracle_spectra),
        ("Sturm equivalence", sturm_equivalence),
        ("Hellmann-Feynman", hellmann_feynman),
        ("gradient-to-Jacobian lemma", gradjac),
        ("transfer-matrix consistency", transfer_consistency),
        ("det A identity", det_a),
        ("oscillation lemmas", oscillation),
        ("sublevel power law", sublevel),
        ("Poisson statistics", poisson),
        ("decorrelation", decorrelation),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        failed += !v.pass as usize;
        println!(
            "{} [{:>2}] {name}: {} ({:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 && std::env::var_os("SPECSTAT_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
