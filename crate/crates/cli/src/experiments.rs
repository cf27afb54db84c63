//! One driver per subcommand: run the core estimator and flatten its report
//! into tables.

use rayon::prelude::*;

use specstat_core::model::{build_box_operator, sample_disorder, ModelSpec};
use specstat_core::seed::trial_seed;
use specstat_core::sensitivity::{
    colinearity_gap, fd_gradient, fd_relative_error, hessian_norm_estimate, hf_gradient, lambda_threshold,
    max_jacobian_pair, GradientVector, GRADIENT_FD_STEP,
};
use specstat_core::spectral::eigen_all;
use specstat_core::stats::{
    box_for, decorrelation_probe, estimate_ids, joint_counts_two_energies, level_statistics, minami_estimate,
    poisson_pmf, streams, wegner_estimate, wilson_interval, IdsTable, IntervalPair, Z95,
};
use specstat_core::{Error, Result};

use crate::config::{Experiment, PropsParams, Reference, RunConfig};
use crate::props;
use crate::table::{Cell, Table};

/// Tables of one run plus any non-fatal warnings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let (model, trials, seed) = (&cfg.model, cfg.ensemble.trials, cfg.ensemble.seed);
    match &cfg.experiment {
        Experiment::Ids { energies, size } => {
            let ids = estimate_ids(model, energies, box_for(model, *size), trials, seed)?;
            Ok(Outcome {
                warnings: ids.warnings.clone(),
                tables: vec![ids_table("ids", &ids)],
            })
        }
        Experiment::LevelStats {
            e0,
            size,
            intervals,
            reference,
        } => levelstats(model, *e0, *size, intervals, reference, trials, seed),
        Experiment::Joint {
            e0,
            e0_prime,
            size,
            intervals,
            reference,
        } => joint(model, (*e0, *e0_prime), *size, intervals, reference, trials, seed),
        Experiment::Wegner { energy, widths, sizes } => wegner(model, *energy, widths, sizes, trials, seed),
        Experiment::Minami { energy, eps, sizes } => minami(model, *energy, eps, sizes, trials, seed),
        Experiment::Decorrelate {
            f,
            g,
            alpha,
            sizes,
            decoupled,
        } => decorrelate(model, (*f, *g, *alpha), sizes, *decoupled, trials, seed),
        Experiment::Props(p) => property_suites(p, seed),
        Experiment::Gradients { .. } => gradients(cfg),
    }
}

/// Energy grid covering `[min − hw, max + hw]` at the spacing `2hw/(points − 1)`.
pub fn reference_grid(centres: &[f64], r: &Reference) -> Vec<f64> {
    let lo = centres.iter().copied().fold(f64::INFINITY, f64::min) - r.halfwidth;
    let hi = centres.iter().copied().fold(f64::NEG_INFINITY, f64::max) + r.halfwidth;
    let step = 2.0 * r.halfwidth / (r.points.max(2) - 1) as f64;
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// Large-box IDS on [`reference_grid`], seeded apart from the ensemble.
pub fn reference_ids(model: &ModelSpec, centres: &[f64], r: &Reference, seed: u64) -> Result<IdsTable> {
    let grid = reference_grid(centres, r);
    estimate_ids(model, &grid, box_for(model, r.size), r.trials, trial_seed(seed, streams::IDS, u64::MAX))
}

fn ids_table(name: &str, ids: &IdsTable) -> Table {
    let mut t = Table::new(name, &["energy", "n_hat", "density", "counts", "trials", "volume"], 1);
    for k in 0..ids.energies.len() {
        t.push(row![ids.energies[k], ids.n_hat[k], ids.density[k], ids.counts[k], ids.trials, ids.volume]);
    }
    t
}

fn levelstats(
    model: &ModelSpec,
    e0: f64,
    size: usize,
    intervals: &[(f64, f64)],
    reference: &Reference,
    trials: u64,
    seed: u64,
) -> Result<Outcome> {
    let ids = reference_ids(model, &[e0], reference, seed)?;
    let density = ids.density_at(e0)?;
    let rep = level_statistics(model, &ids, e0, size, trials, intervals, seed)?;

    let mut fits = Table::new(
        "poisson_intervals",
        &["lo", "hi", "mean", "chi2", "dof", "p_value", "p_zero_observed", "p_zero_target"],
        2,
    );
    let mut hist = Table::new("poisson_histogram", &["lo", "hi", "count", "processes", "frequency", "poisson"], 3);
    for f in &rep.intervals {
        fits.push(row![f.lo, f.hi, f.mean, f.chi2, f.dof, f.p_value, f.p_zero_observed, f.p_zero_target]);
        let total: u64 = f.histogram.iter().sum();
        for (k, &c) in f.histogram.iter().enumerate() {
            let freq = if total > 0 { c as f64 / total as f64 } else { f64::NAN };
            hist.push(row![f.lo, f.hi, k, c, freq, poisson_pmf(k, f.hi - f.lo)]);
        }
    }
    let mut cov = Table::new(
        "poisson_covariances",
        &["first_lo", "first_hi", "second_lo", "second_hi", "covariance", "ci_lo", "ci_hi"],
        4,
    );
    for c in &rep.covariances {
        let (a, b) = (&rep.intervals[c.first], &rep.intervals[c.second]);
        cov.push(row![a.lo, a.hi, b.lo, b.hi, c.covariance, c.ci.0, c.ci.1]);
    }
    let mut summary = Table::new("levelstats_summary", &["e0", "size", "processes", "density", "min_p_value"], 2);
    summary.push(row![e0, size, rep.processes, density, rep.min_p_value]);

    Ok(Outcome {
        warnings: ids.warnings.clone(),
        tables: vec![ids_table("reference_ids", &ids), fits, hist, cov, summary],
    })
}

fn joint(
    model: &ModelSpec,
    (e0, e0p): (f64, f64),
    size: usize,
    intervals: &[IntervalPair],
    reference: &Reference,
    trials: u64,
    seed: u64,
) -> Result<Outcome> {
    let ids = reference_ids(model, &[e0, e0p], reference, seed)?;
    let rep = joint_counts_two_energies(model, &ids, e0, e0p, size, trials, intervals, seed)?;

    let keys = ["plus_lo", "plus_hi", "minus_lo", "minus_hi"];
    let mut cols = keys.to_vec();
    cols.extend([
        "mean_plus",
        "mean_minus",
        "covariance",
        "ci_lo",
        "ci_hi",
        "max_product_deviation",
        "chi2",
        "dof",
        "p_value",
    ]);
    let mut pairs = Table::new("joint_pairs", &cols, 4);
    let mut hcols = keys.to_vec();
    hcols.extend(["k_plus", "k_minus", "count"]);
    let mut hist = Table::new("joint_histogram", &hcols, 6);
    for p in &rep.pairs {
        let key = row![p.plus.0, p.plus.1, p.minus.0, p.minus.1];
        let mut r = key.clone();
        r.extend(row![
            p.mean_plus,
            p.mean_minus,
            p.covariance,
            p.covariance_ci.0,
            p.covariance_ci.1,
            p.max_product_deviation,
            p.independence_chi2,
            p.independence_dof,
            p.independence_p,
        ]);
        pairs.push(r);
        for &((a, b), c) in &p.histogram {
            let mut r = key.clone();
            r.extend(row![a, b, c]);
            hist.push(r);
        }
    }
    let mut summary = Table::new(
        "joint_summary",
        &["e0", "e0_prime", "density", "density_prime", "size", "trials"],
        2,
    );
    summary.push(row![rep.e0, rep.e0_prime, rep.density, rep.density_prime, rep.size, rep.trials]);
    Ok(Outcome {
        warnings: ids.warnings.clone(),
        tables: vec![ids_table("reference_ids", &ids), pairs, hist, summary],
    })
}

fn wegner(model: &ModelSpec, energy: f64, widths: &[f64], sizes: &[usize], trials: u64, seed: u64) -> Result<Outcome> {
    let rep = wegner_estimate(model, energy, widths, sizes, trials, seed)?;
    let mut pts = Table::new(
        "wegner_points",
        &["size", "width", "scaled", "hits", "trials", "frequency", "ci_lo", "ci_hi"],
        2,
    );
    for p in &rep.points {
        pts.push(row![p.size, p.width, p.scaled, p.hits, p.trials, p.frequency, p.ci.0, p.ci.1]);
    }
    let mut fit = Table::new("wegner_fit", &["energy", "c", "intercept", "r2", "points"], 1);
    if let Some(f) = rep.fit {
        fit.push(row![energy, f.c, f.intercept, f.r2, f.points]);
    }
    let mut sat = Table::new("wegner_saturation", &["size", "saturation_width"], 1);
    let mut warnings = Vec::new();
    for &(l, w) in &rep.saturation {
        sat.push(row![l, w]);
        if let Some(w) = w {
            warnings.push(format!("wegner: frequency saturates at width {w} for size {l}"));
        }
    }
    Ok(Outcome {
        tables: vec![pts, fit, sat],
        warnings,
    })
}

fn minami(model: &ModelSpec, energy: f64, eps: &[f64], sizes: &[usize], trials: u64, seed: u64) -> Result<Outcome> {
    let rep = minami_estimate(model, energy, eps, sizes, trials, seed)?;
    let mut pts = Table::new(
        "minami_points",
        &["size", "eps", "scaled", "excess", "doubles", "trials", "value", "ci_lo", "ci_hi"],
        2,
    );
    for p in &rep.points {
        pts.push(row![
            p.size,
            p.eps,
            p.scaled,
            p.excess,
            p.doubles,
            p.trials,
            p.value,
            p.doubles_ci.0,
            p.doubles_ci.1
        ]);
    }
    let mut fit = Table::new(
        "minami_fit",
        &["energy", "slope", "intercept", "stderr", "points", "r2", "rho_hat", "bound_only"],
        1,
    );
    let f = rep.fit.as_ref();
    fit.push(row![
        energy,
        f.map(|f| f.slope),
        f.map(|f| f.intercept),
        f.map(|f| f.stderr),
        f.map_or(0, |f| f.points),
        f.map(|f| f.r2),
        rep.rho_hat,
        rep.bound_only,
    ]);
    let warnings = match rep.bound_only {
        Some(b) => vec![format!("minami: too few double counts for a fit; upper bound {b:e}")],
        None => Vec::new(),
    };
    Ok(Outcome {
        tables: vec![pts, fit],
        warnings,
    })
}

fn decorrelate(
    model: &ModelSpec,
    (f, g, alpha): (f64, f64, f64),
    sizes: &[usize],
    decoupled: bool,
    trials: u64,
    seed: u64,
) -> Result<Outcome> {
    let rep = decorrelation_probe(model, f, g, alpha, sizes, trials, decoupled, seed)?;
    let mut pts = Table::new(
        "decorrelation_points",
        &[
            "size", "box_side", "trials", "hits_f", "hits_g", "hits_joint", "freq_f", "freq_g", "freq_joint", "ci_lo",
            "ci_hi", "ratio", "ratio_ci_lo", "ratio_ci_hi",
        ],
        1,
    );
    for p in &rep.points {
        pts.push(row![
            p.size,
            p.box_side,
            p.trials,
            p.hits_f,
            p.hits_g,
            p.hits_joint,
            p.freq_f,
            p.freq_g,
            p.freq_joint,
            p.ci_joint.0,
            p.ci_joint.1,
            p.ratio,
            p.ratio_ci.0,
            p.ratio_ci.1
        ]);
    }
    let mut fit = Table::new(
        "decorrelation_fit",
        &["f", "g", "alpha", "decoupled", "slope", "one_plus_gamma", "gamma", "gamma_stderr", "gamma_positive"],
        2,
    );
    fit.push(row![
        f,
        g,
        alpha,
        decoupled,
        rep.fit.as_ref().map(|x| x.slope),
        rep.one_plus_gamma,
        rep.gamma,
        rep.gamma_stderr,
        rep.gamma_positive(2.0)
    ]);
    let warnings = if rep.fit.is_none() {
        vec!["decorrelate: fewer than two sizes with joint hits; no exponent fitted".into()]
    } else {
        Vec::new()
    };
    Ok(Outcome {
        tables: vec![pts, fit],
        warnings,
    })
}

fn property_suites(p: &PropsParams, seed: u64) -> Result<Outcome> {
    let mut suites = vec![props::gradjac_suite(p.gradjac_pairs, p.gradjac_max_n, seed)?];
    suites.extend(props::oscillation_suite(p.oscillation_instances, seed)?);
    suites.push(props::det_a_suite(p.resultant_draws, seed)?);
    suites.push(props::planted_root_suite(p.resultant_draws, seed)?);
    let sub = props::sublevel_suite(p.sublevel_samples, &p.sublevel_eps, seed)?;

    let mut summary = Table::new("props_summary", &["suite", "instances", "violations", "worst", "passed"], 1);
    let mut warnings = Vec::new();
    for s in &suites {
        summary.push(row![s.suite.as_str(), s.instances, s.violations, s.worst, s.passed()]);
        if !s.passed() {
            warnings.push(format!("props: {} violated on {} of {} instances", s.suite, s.violations, s.instances));
        }
    }
    let mut measures = Table::new("sublevel_measures", &["function", "eps", "measure", "ci_lo", "ci_hi"], 2);
    let mut fits = Table::new(
        "sublevel_fit",
        &["function", "expected", "exponent", "stderr", "eps0", "relative_error"],
        1,
    );
    for s in &sub {
        for e in &s.profile.estimates {
            measures.push(row![s.function.as_str(), e.eps, e.measure, e.ci.0, e.ci.1]);
        }
        fits.push(row![
            s.function.as_str(),
            s.expected,
            s.profile.exponent,
            s.profile.fit.stderr,
            s.profile.eps0,
            s.relative_error()
        ]);
    }
    Ok(Outcome {
        tables: vec![summary, measures, fits],
        warnings,
    })
}

struct TrialGradients {
    eigen: Vec<Vec<Cell>>,
    pairs: Vec<Vec<Cell>>,
    colinear: u64,
    sites: Vec<Vec<Cell>>,
    skipped: u64,
}

fn gradients(cfg: &RunConfig) -> Result<Outcome> {
    let Experiment::Gradients {
        size,
        energy_min,
        energy_max,
        threshold,
        beta,
        fd_check,
        hessian,
    } = cfg.experiment
    else {
        unreachable!("gradients driver called with another experiment")
    };
    let (model, seed) = (&cfg.model, cfg.ensemble.seed);
    let bx = box_for(model, size);
    let one = |t: u64| -> Result<TrialGradients> {
        let sample = sample_disorder(model, bx, trial_seed(seed, streams::GRADIENTS, t))?;
        let op = build_box_operator(model, &sample, bx)?;
        let spec = eigen_all(&op, true, Some((energy_min, energy_max)))?;
        let mut out = TrialGradients {
            eigen: Vec::new(),
            pairs: Vec::new(),
            colinear: 0,
            sites: Vec::new(),
            skipped: 0,
        };
        let mut grads: Vec<GradientVector> = Vec::new();
        for &(which, _) in &spec.eigenvectors {
            let g = match hf_gradient(&spec, which, &op) {
                Ok(g) => g,
                Err(Error::Degenerate(_)) => {
                    out.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let fd_err = if fd_check {
                fd_relative_error(&g, &fd_gradient(&op, which, GRADIENT_FD_STEP)?)
            } else {
                f64::NAN
            };
            let (hn, hg) = if hessian {
                let h = hessian_norm_estimate(&op, which)?;
                (h.norm, h.gap)
            } else {
                (f64::NAN, f64::NAN)
            };
            out.eigen.push(row![t, which, g.energy, g.l1_norm, g.covering_constant, fd_err, hn, hg]);
            if t == 0 {
                for (n, p) in g.sites.iter().zip(&g.partials) {
                    out.sites.push(row![which, *n, *p]);
                }
            }
            grads.push(g);
        }
        for w in grads.windows(2) {
            let (g, gp) = (&w[0], &w[1]);
            if g.which + 1 != gp.which {
                continue;
            }
            let gap = colinearity_gap(g, gp)?;
            let u: Vec<f64> = g.partials.iter().map(|x| x / g.l1_norm).collect();
            let v: Vec<f64> = gp.partials.iter().map(|x| x / gp.l1_norm).collect();
            let (i, j, det) = max_jacobian_pair(&u, &v).map_or((-1, -1, 0.0), |(i, j, d)| (g.sites[i], g.sites[j], d));
            let colinear = gap < threshold;
            out.colinear += colinear as u64;
            out.pairs.push(row![
                t,
                g.which,
                g.energy,
                gp.energy,
                gap,
                colinear,
                lambda_threshold(size as f64, beta, g, gp),
                i,
                j,
                det
            ]);
        }
        Ok(out)
    };
    let per_trial = (0..cfg.ensemble.trials)
        .into_par_iter()
        .map(one)
        .collect::<Result<Vec<_>>>()?;

    let mut eigen = Table::new(
        "gradient_norms",
        &["trial", "which", "energy", "l1_norm", "covering_constant", "fd_error", "hessian_norm", "hessian_gap"],
        2,
    );
    let mut pairs = Table::new(
        "gradient_pairs",
        &["trial", "which", "energy", "energy_next", "colinearity_gap", "colinear", "lambda_threshold", "site_i", "site_j", "jacobian"],
        2,
    );
    let mut sites = Table::new("gradient_sites", &["which", "site", "partial"], 2);
    let (mut colinear, mut skipped) = (0u64, 0u64);
    for tr in per_trial {
        eigen.rows.extend(tr.eigen);
        pairs.rows.extend(tr.pairs);
        sites.rows.extend(tr.sites);
        colinear += tr.colinear;
        skipped += tr.skipped;
    }
    let n_pairs = pairs.rows.len() as u64;
    let (lo, hi) = wilson_interval(colinear, n_pairs, Z95);
    let freq = if n_pairs > 0 { colinear as f64 / n_pairs as f64 } else { f64::NAN };
    let mut summary = Table::new(
        "gradient_summary",
        &["size", "trials", "pairs", "colinear", "frequency", "ci_lo", "ci_hi", "threshold", "beta", "skipped_degenerate"],
        1,
    );
    summary.push(row![size, cfg.ensemble.trials, n_pairs, colinear, freq, lo, hi, threshold, beta, skipped]);
    let mut warnings = Vec::new();
    if skipped > 0 {
        warnings.push(format!("gradients: {skipped} near-degenerate eigenvalues skipped"));
    }
    if n_pairs == 0 {
        warnings.push("gradients: no adjacent eigenvalue pairs in the energy window".into());
    }
    Ok(Outcome {
        tables: vec![eigen, pairs, sites, summary],
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid_keeps_the_spacing() {
        let r = Reference {
            size: 100,
            trials: 10,
            halfwidth: 0.25,
            points: 51,
        };
        let g = reference_grid(&[1.0], &r);
        assert_eq!(g.len(), 51);
        assert!((g[0] - 0.75).abs() < 1e-15 && (g[50] - 1.25).abs() < 1e-15);
        let g = reference_grid(&[0.0, 1.0], &r);
        assert_eq!(g.len(), 151);
        assert!(g.windows(2).all(|w| ((w[1] - w[0]) - 0.01).abs() < 1e-12));
    }
}
