//! Run configuration: four flat TOML sections, validated in full before any
//! computation starts.
//!
//! ```toml
//! [model]
//! family = "discrete_alloy"
//! discrete_site_profile_d = [2.0]
//!
//! [experiment]
//! e0 = 1.0
//! size = 1000
//!
//! [ensemble]
//! trials = 2000
//! seed = 7
//!
//! [output]
//! dir = "out"
//! format = "both"
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};
use specstat_core::model::{Density, Family, ModelSpec, SingleSiteProfile};
use specstat_core::stats::IntervalPair;
use toml::{Table, Value};

use crate::error::{CliError, CliResult, Issue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    Ids,
    LevelStats,
    Joint,
    Wegner,
    Minami,
    Decorrelate,
    Props,
    Gradients,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Ids,
        Kind::LevelStats,
        Kind::Joint,
        Kind::Wegner,
        Kind::Minami,
        Kind::Decorrelate,
        Kind::Props,
        Kind::Gradients,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Ids => "ids",
            Kind::LevelStats => "levelstats",
            Kind::Joint => "joint",
            Kind::Wegner => "wegner",
            Kind::Minami => "minami",
            Kind::Decorrelate => "decorrelate",
            Kind::Props => "props",
            Kind::Gradients => "gradients",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn jsonl(self) -> bool {
        matches!(self, Format::Jsonl | Format::Both)
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            "both" => Ok(Format::Both),
            _ => Err(format!("expected csv, jsonl or both, got {s:?}")),
        }
    }
}

/// Reference IDS used to unfold local level statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub size: usize,
    pub trials: u64,
    /// Grid half-width around each reference energy.
    pub halfwidth: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropsParams {
    pub gradjac_pairs: u64,
    pub gradjac_max_n: usize,
    pub oscillation_instances: u64,
    pub resultant_draws: u64,
    pub sublevel_samples: u64,
    pub sublevel_eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Experiment {
    Ids {
        energies: Vec<f64>,
        size: usize,
    },
    LevelStats {
        e0: f64,
        size: usize,
        intervals: Vec<(f64, f64)>,
        reference: Reference,
    },
    Joint {
        e0: f64,
        e0_prime: f64,
        size: usize,
        intervals: Vec<IntervalPair>,
        reference: Reference,
    },
    Wegner {
        energy: f64,
        widths: Vec<f64>,
        sizes: Vec<usize>,
    },
    Minami {
        energy: f64,
        eps: Vec<f64>,
        sizes: Vec<usize>,
    },
    Decorrelate {
        f: f64,
        g: f64,
        alpha: f64,
        sizes: Vec<usize>,
        decoupled: bool,
    },
    Props(PropsParams),
    Gradients {
        size: usize,
        energy_min: f64,
        energy_max: f64,
        /// Absolute cutoff for the colinearity-frequency diagnostic.
        threshold: f64,
        /// Exponent of the `e^{−l^β}` cutoff, reported alongside.
        beta: f64,
        fd_check: bool,
        hessian: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub trials: u64,
    pub seed: u64,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: Kind,
    pub model: ModelSpec,
    pub experiment: Experiment,
    pub ensemble: Ensemble,
    pub output: OutputSpec,
}

pub const DEFAULT_TRIALS: u64 = 2000;
pub const DEFAULT_OUT_DIR: &str = "specstat-out";

impl RunConfig {
    /// SHA-256 of everything that determines the results: kind, model
    /// (including q-table samples), experiment, trials and seed. Worker
    /// count and output settings are excluded.
    pub fn config_hash(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            kind: Kind,
            model: &'a ModelSpec,
            experiment: &'a Experiment,
            trials: u64,
            seed: u64,
        }
        let view = View {
            kind: self.kind,
            model: &self.model,
            experiment: &self.experiment,
            trials: self.ensemble.trials,
            seed: self.ensemble.seed,
        };
        let bytes = serde_json::to_vec(&view).expect("config view serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

pub fn parse_config(path: &Path, kind: Kind) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![Issue::new("config", format!("cannot read {}: {e}", path.display()))]))?;
    parse_str(&text, path.parent().unwrap_or(Path::new(".")), kind)
}

/// Relative paths inside the file resolve against `base`.
pub fn parse_str(text: &str, base: &Path, kind: Kind) -> CliResult<RunConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(vec![Issue::new("config", e.message().to_string())]))?;
    let mut issues = Vec::new();
    for (k, v) in &root {
        if !["model", "experiment", "ensemble", "output"].contains(&k.as_str()) {
            issues.push(Issue::new(k.clone(), "unknown key"));
        } else if !v.is_table() {
            issues.push(Issue::new(k.clone(), "must be a section"));
        }
    }
    let empty = Table::new();
    let section = |name: &'static str| Section::new(name, root.get(name).and_then(Value::as_table).unwrap_or(&empty));
    let model = read_model(section("model"), base, &mut issues);
    let experiment = read_experiment(section("experiment"), kind, &mut issues);
    let ensemble = read_ensemble(section("ensemble"), &mut issues);
    let output = read_output(section("output"), base, &mut issues);
    if !root.contains_key("model") {
        issues.push(Issue::new("model", "missing section"));
    }
    match (model, experiment, issues.is_empty()) {
        (Some(model), Some(experiment), true) => Ok(RunConfig {
            kind,
            model,
            experiment,
            ensemble,
            output,
        }),
        _ => Err(CliError::Config(issues)),
    }
}

trait FromToml: Sized {
    fn from_toml(v: &Value) -> Result<Self, String>;
}

impl FromToml for f64 {
    fn from_toml(v: &Value) -> Result<Self, String> {
        match v {
            Value::Float(x) => Ok(*x),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(format!("expected a number, got {}", v.type_str())),
        }
    }
}

impl FromToml for u64 {
    fn from_toml(v: &Value) -> Result<Self, String> {
        match v {
            Value::Integer(i) => u64::try_from(*i).map_err(|_| format!("expected a nonnegative integer, got {i}")),
            _ => Err(format!("expected an integer, got {}", v.type_str())),
        }
    }
}

impl FromToml for usize {
    fn from_toml(v: &Value) -> Result<Self, String> {
        u64::from_toml(v).map(|x| x as usize)
    }
}

impl FromToml for bool {
    fn from_toml(v: &Value) -> Result<Self, String> {
        v.as_bool().ok_or_else(|| format!("expected a boolean, got {}", v.type_str()))
    }
}

impl FromToml for String {
    fn from_toml(v: &Value) -> Result<Self, String> {
        v.as_str()
            .map(str::to_string)
            .ok_or_else(|| format!("expected a string, got {}", v.type_str()))
    }
}

impl<T: FromToml> FromToml for Vec<T> {
    fn from_toml(v: &Value) -> Result<Self, String> {
        let arr = v.as_array().ok_or_else(|| format!("expected an array, got {}", v.type_str()))?;
        arr.iter()
            .enumerate()
            .map(|(i, x)| T::from_toml(x).map_err(|m| format!("entry {i}: {m}")))
            .collect()
    }
}

impl FromToml for (f64, f64) {
    fn from_toml(v: &Value) -> Result<Self, String> {
        match Vec::<f64>::from_toml(v)?.as_slice() {
            &[a, b] => Ok((a, b)),
            other => Err(format!("expected a pair, got {} numbers", other.len())),
        }
    }
}

/// Typed access to one section; records every problem and, on `finish`,
/// every key that was never read.
struct Section<'a> {
    name: &'static str,
    table: &'a Table,
    read: BTreeSet<String>,
    issues: Vec<Issue>,
}

impl<'a> Section<'a> {
    fn new(name: &'static str, table: &'a Table) -> Self {
        Self {
            name,
            table,
            read: BTreeSet::new(),
            issues: Vec::new(),
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{}", self.name, key)
    }

    fn issue(&mut self, key: &str, message: impl Into<String>) {
        let path = self.path(key);
        self.issues.push(Issue::new(path, message));
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn opt<T: FromToml>(&mut self, key: &str) -> Option<T> {
        self.read.insert(key.to_string());
        let v = self.table.get(key)?;
        match T::from_toml(v) {
            Ok(x) => Some(x),
            Err(m) => {
                self.issue(key, m);
                None
            }
        }
    }

    fn req<T: FromToml>(&mut self, key: &str) -> Option<T> {
        if !self.has(key) {
            self.read.insert(key.to_string());
            self.issue(key, "missing key");
            return None;
        }
        self.opt(key)
    }

    fn or<T: FromToml>(&mut self, key: &str, default: T) -> T {
        self.opt(key).unwrap_or(default)
    }

    fn check(&mut self, key: &str, ok: bool, message: impl Into<String>) {
        if !ok {
            self.issue(key, message);
        }
    }

    fn finish(self, issues: &mut Vec<Issue>) {
        issues.extend(self.issues);
        for k in self.table.keys() {
            if !self.read.contains(k) {
                issues.push(Issue::new(format!("{}.{}", self.name, k), "unknown key"));
            }
        }
    }
}

const FAMILY_KEYS: [(&str, Family); 5] = [
    ("single_site_q", Family::ContinuumAlloy),
    ("discrete_site_profile_d", Family::DiscreteAlloy),
    ("multimer_weights_a", Family::Multimer),
    ("hopping_b", Family::Multimer),
    ("grid_step_h", Family::SimpleContinuum),
];

fn read_model(mut s: Section, base: &Path, issues: &mut Vec<Issue>) -> Option<ModelSpec> {
    let model = model_from(&mut s, base);
    let ok = s.issues.is_empty();
    s.finish(issues);
    model.filter(|_| ok)
}

fn model_from(s: &mut Section, base: &Path) -> Option<ModelSpec> {
    let family_name: Option<String> = s.req("family");
    let family = family_name.as_deref().and_then(|f| {
        let fam = Family::from_name(f);
        if fam.is_none() {
            s.issue(
                "family",
                format!("unknown family {f:?}; expected simple_continuum, continuum_alloy, discrete_alloy or multimer"),
            );
        }
        fam
    });
    let density = match s.or("disorder_density", "uniform01".to_string()).as_str() {
        "uniform01" => {
            if s.has("density_bound") {
                s.issue("density_bound", "only used with disorder_density = \"uniform_symmetric\"");
            }
            s.read.insert("density_bound".into());
            Some(Density::Uniform01)
        }
        "uniform_symmetric" => s.req::<f64>("density_bound").map(|bound| Density::UniformSymmetric { bound }),
        other => {
            s.issue("disorder_density", format!("expected uniform01 or uniform_symmetric, got {other:?}"));
            None
        }
    };
    let radius: Option<usize> = s.opt("support_radius_N");
    let h: Option<f64> = s.opt("grid_step_h");
    let d: Option<Vec<f64>> = s.opt("discrete_site_profile_d");
    let a: Option<Vec<f64>> = s.opt("multimer_weights_a");
    let b: Option<Vec<f64>> = s.opt("hopping_b");
    let q_path: Option<String> = s.opt("single_site_q");
    let family = family?;
    for (key, owner) in FAMILY_KEYS {
        let allowed = owner == family || (key == "grid_step_h" && family.is_continuum());
        if s.has(key) && !allowed {
            s.issue(key, format!("not used by the {} family", family.name()));
        }
    }
    let required = |s: &mut Section, key: &str, present: bool| {
        if !present && !s.issues.iter().any(|i| i.key == s.path(key)) {
            s.issue(key, "missing key");
        }
    };
    let mut model = match family {
        Family::SimpleContinuum => ModelSpec::simple_continuum(h.unwrap_or(specstat_core::model::DEFAULT_GRID_STEP)),
        Family::ContinuumAlloy => {
            required(s, "single_site_q", q_path.is_some());
            let path = base.join(q_path?);
            let q = match SingleSiteProfile::from_csv(&path, radius.unwrap_or(1)) {
                Ok(q) => q,
                Err(e) => {
                    s.issue("single_site_q", format!("{}: {e}", path.display()));
                    return None;
                }
            };
            ModelSpec::continuum_alloy(q, h.unwrap_or(specstat_core::model::DEFAULT_GRID_STEP))
        }
        Family::DiscreteAlloy => {
            required(s, "discrete_site_profile_d", d.is_some());
            ModelSpec::discrete_alloy(d?, Density::Uniform01)
        }
        Family::Multimer => {
            required(s, "multimer_weights_a", a.is_some());
            required(s, "hopping_b", b.is_some());
            ModelSpec::multimer(a?, b?, Density::Uniform01)
        }
    };
    if let Some(density) = density {
        model.disorder_density = density;
    }
    if let Some(r) = radius {
        model.support_radius_n = r;
    }
    for (key, message) in model.violations() {
        if !s.issues.iter().any(|i| i.key == s.path(key)) {
            s.issue(key, message);
        }
    }
    Some(model)
}

fn read_reference(s: &mut Section, size: Option<usize>) -> Reference {
    let r = Reference {
        size: s.or("reference_size", size.unwrap_or(1).saturating_mul(4)),
        trials: s.or("reference_trials", 2000),
        halfwidth: s.or("reference_halfwidth", 0.25),
        points: s.or("reference_points", 51),
    };
    s.check("reference_size", r.size > 0, "must be positive");
    s.check("reference_trials", r.trials > 0, "must be positive");
    s.check("reference_halfwidth", r.halfwidth > 0.0 && r.halfwidth.is_finite(), "must be positive");
    s.check("reference_points", r.points >= 3, "need at least 3 grid points");
    r
}

fn check_sizes(s: &mut Section, key: &str, sizes: &Option<Vec<usize>>) {
    if let Some(v) = sizes {
        s.check(key, !v.is_empty() && !v.contains(&0), "need a nonempty list of positive sizes");
    }
}

fn check_intervals(s: &mut Section, key: &str, iv: &[(f64, f64)]) {
    s.check(key, !iv.is_empty(), "need at least one interval");
    for (i, (lo, hi)) in iv.iter().enumerate() {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            s.issue(key, format!("entry {i}: need lo < hi, got [{lo}, {hi}]"));
        }
    }
}

fn read_experiment(mut s: Section, kind: Kind, issues: &mut Vec<Issue>) -> Option<Experiment> {
    let exp = experiment_from(&mut s, kind);
    let ok = s.issues.is_empty();
    s.finish(issues);
    exp.filter(|_| ok)
}

fn experiment_from(s: &mut Section, kind: Kind) -> Option<Experiment> {
    if let Some(k) = s.opt::<String>("kind") {
        if k != kind.name() {
            s.issue("kind", format!("config is for {k:?} but the subcommand is {:?}", kind.name()));
        }
    }
    let exp = match kind {
        Kind::Ids => {
            let size = s.req("size");
            let energies = if s.has("energies") {
                for k in ["energy_min", "energy_max", "energy_points"] {
                    if s.has(k) {
                        s.issue(k, "give either energies or energy_min/energy_max/energy_points");
                    }
                }
                s.opt::<Vec<f64>>("energies")
            } else {
                match (s.req::<f64>("energy_min"), s.req::<f64>("energy_max"), s.req::<usize>("energy_points")) {
                    (Some(lo), Some(hi), Some(n)) if n >= 2 && lo < hi => {
                        Some((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
                    }
                    (Some(_), Some(_), Some(_)) => {
                        s.issue("energy_points", "need energy_min < energy_max and at least 2 points");
                        None
                    }
                    _ => None,
                }
            };
            s.check("size", size != Some(0), "must be positive");
            Experiment::Ids {
                energies: energies?,
                size: size?,
            }
        }
        Kind::LevelStats => {
            let e0 = s.req("e0");
            let size = s.req("size");
            let intervals: Vec<(f64, f64)> = s.or("intervals", vec![(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]);
            check_intervals(s, "intervals", &intervals);
            s.check("size", size != Some(0), "must be positive");
            let reference = read_reference(s, size);
            Experiment::LevelStats {
                e0: e0?,
                size: size?,
                intervals,
                reference,
            }
        }
        Kind::Joint => {
            let e0: Option<f64> = s.req("e0");
            let e0_prime: Option<f64> = s.req("e0_prime");
            let size = s.req("size");
            let plus: Vec<(f64, f64)> = s.or("intervals_plus", vec![(0.0, 1.0)]);
            let minus: Vec<(f64, f64)> = s.or("intervals_minus", plus.clone());
            check_intervals(s, "intervals_plus", &plus);
            check_intervals(s, "intervals_minus", &minus);
            s.check("intervals_minus", plus.len() == minus.len(), "must pair up with intervals_plus");
            s.check("e0_prime", e0.is_none() || e0 != e0_prime, "must differ from e0");
            s.check("size", size != Some(0), "must be positive");
            let reference = read_reference(s, size);
            Experiment::Joint {
                e0: e0?,
                e0_prime: e0_prime?,
                size: size?,
                intervals: plus.into_iter().zip(minus).collect(),
                reference,
            }
        }
        Kind::Wegner => {
            let energy = s.req("energy");
            let widths: Option<Vec<f64>> = s.req("widths");
            let sizes = s.req("sizes");
            if let Some(w) = &widths {
                s.check("widths", !w.is_empty() && w.iter().all(|x| *x >= 0.0 && x.is_finite()), "need nonnegative widths");
            }
            check_sizes(s, "sizes", &sizes);
            Experiment::Wegner {
                energy: energy?,
                widths: widths?,
                sizes: sizes?,
            }
        }
        Kind::Minami => {
            let energy = s.req("energy");
            let eps: Option<Vec<f64>> = s.req("eps");
            let sizes = s.req("sizes");
            if let Some(e) = &eps {
                s.check("eps", !e.is_empty() && e.iter().all(|x| *x >= 0.0 && x.is_finite()), "need nonnegative eps");
            }
            check_sizes(s, "sizes", &sizes);
            Experiment::Minami {
                energy: energy?,
                eps: eps?,
                sizes: sizes?,
            }
        }
        Kind::Decorrelate => {
            let f: Option<f64> = s.req("f");
            let g: Option<f64> = s.req("g");
            let alpha: Option<f64> = s.req("alpha");
            let sizes = s.req("sizes");
            let decoupled = s.or("decoupled", false);
            s.check("g", f.is_none() || f != g, "must differ from f");
            s.check("alpha", alpha.is_none_or(|a| a > 0.0 && a < 1.0), "must lie in (0, 1)");
            check_sizes(s, "sizes", &sizes);
            Experiment::Decorrelate {
                f: f?,
                g: g?,
                alpha: alpha?,
                sizes: sizes?,
                decoupled,
            }
        }
        Kind::Props => {
            let p = PropsParams {
                gradjac_pairs: s.or("gradjac_pairs", 100_000),
                gradjac_max_n: s.or("gradjac_max_n", 12),
                oscillation_instances: s.or("oscillation_instances", 500),
                resultant_draws: s.or("resultant_draws", 10_000),
                sublevel_samples: s.or("sublevel_samples", 1_000_000),
                sublevel_eps: s.or("sublevel_eps", specstat_core::transfer::log_grid(1e-4, 1e-1, 8)),
            };
            s.check("gradjac_max_n", p.gradjac_max_n >= 1, "must be positive");
            s.check("sublevel_samples", p.sublevel_samples > 0, "must be positive");
            s.check(
                "sublevel_eps",
                p.sublevel_eps.len() >= 3 && p.sublevel_eps.iter().all(|e| *e > 0.0),
                "need at least 3 positive values",
            );
            Experiment::Props(p)
        }
        Kind::Gradients => {
            let size = s.req("size");
            let lo: Option<f64> = s.req("energy_min");
            let hi: Option<f64> = s.req("energy_max");
            let threshold = s.or("threshold", 1e-3);
            let beta = s.or("beta", 0.75);
            let fd_check = s.or("fd_check", false);
            let hessian = s.or("hessian", false);
            s.check("size", size != Some(0), "must be positive");
            if let (Some(lo), Some(hi)) = (lo, hi) {
                s.check("energy_max", lo <= hi, "must not be below energy_min");
            }
            s.check("threshold", threshold > 0.0, "must be positive");
            s.check("beta", beta > 0.0 && beta < 1.0, "must lie in (0, 1)");
            Experiment::Gradients {
                size: size?,
                energy_min: lo?,
                energy_max: hi?,
                threshold,
                beta,
                fd_check,
                hessian,
            }
        }
    };
    Some(exp)
}

fn read_ensemble(mut s: Section, issues: &mut Vec<Issue>) -> Ensemble {
    let e = Ensemble {
        trials: s.or("trials", DEFAULT_TRIALS),
        seed: s.or("seed", 0),
        workers: s.opt("workers"),
    };
    s.check("trials", e.trials > 0, "must be positive");
    s.check("workers", e.workers != Some(0), "must be positive");
    s.finish(issues);
    e
}

fn read_output(mut s: Section, base: &Path, issues: &mut Vec<Issue>) -> OutputSpec {
    let dir = base.join(s.or("dir", DEFAULT_OUT_DIR.to_string()));
    let format = match s.opt::<String>("format").map(|f| f.parse::<Format>()) {
        None => Format::Both,
        Some(Ok(f)) => f,
        Some(Err(m)) => {
            s.issue("format", m);
            Format::Both
        }
    };
    s.finish(issues);
    OutputSpec { dir, format }
}
