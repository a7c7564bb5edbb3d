//! Config-driven experiment suites: TOML in, one [`ReportRecord`] per trial out.

mod emit;
mod params;
mod suites;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emit::{emit, read_json, render_csv, render_json, render_plotdata, OutputFormat, HEADLINE_SERIES};
pub use params::Params;

/// Errors in the configuration rather than in the numerics.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("parameter `{key}`: {message}")]
    Param { key: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

impl ConfigError {
    pub(crate) fn param(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Param {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    TuranNazarov,
    MontgomeryVaughan,
    ProdLemma,
    ProductLemma,
    Independence,
    Witness,
    Cascade,
    Lattice,
    MainRecursion,
    ExpTail,
    Density,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::TuranNazarov,
        Suite::MontgomeryVaughan,
        Suite::ProdLemma,
        Suite::ProductLemma,
        Suite::Independence,
        Suite::Witness,
        Suite::Cascade,
        Suite::Lattice,
        Suite::MainRecursion,
        Suite::ExpTail,
        Suite::Density,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::TuranNazarov => "turan_nazarov",
            Suite::MontgomeryVaughan => "montgomery_vaughan",
            Suite::ProdLemma => "prod_lemma",
            Suite::ProductLemma => "product_lemma",
            Suite::Independence => "independence",
            Suite::Witness => "witness",
            Suite::Cascade => "cascade",
            Suite::Lattice => "lattice",
            Suite::MainRecursion => "main_recursion",
            Suite::ExpTail => "exp_tail",
            Suite::Density => "density",
        }
    }

    /// What the suite checks, for `list-suites`.
    pub fn anchor(self) -> &'static str {
        match self {
            Suite::TuranNazarov => "Turan-Nazarov inequality: sup over I against sup over E",
            Suite::MontgomeryVaughan => "Montgomery-Vaughan mean-value bounds and modulation invariance",
            Suite::ProdLemma => "single-shift product lemma: Chebyshev removal of the log_- mass",
            Suite::ProductLemma => "multi-index product lemma: lattice sum below e^{eta k log k} on half of I",
            Suite::Independence => "Gram-matrix independence score of time-frequency translates",
            Suite::Witness => "witness set {|u f| > M sum |f(. + b)|} for the x log x decay class",
            Suite::Cascade => "Gaussian-decay cascade: nested sets with the claimed lower bounds",
            Suite::Lattice => "lattice-shift recursion and its tail bound",
            Suite::MainRecursion => "general-shift recursion against the x log x tail",
            Suite::ExpTail => "exponential-tail dichotomy for collapsed relations",
            Suite::Density => "lower density scan and three-shift covering of support sets",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub params: Params,
}

fn default_trials() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Checks the trial count and every suite parameter.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        suites::Settings::parse(self.suite, &self.params).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordVerdict {
    Pass,
    Fail,
    Inconclusive,
}

/// One trial of one suite. Only finite numbers are stored, so the JSON
/// form round-trips exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub suite: Suite,
    pub trial: usize,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub measured: BTreeMap<String, f64>,
    pub fitted: BTreeMap<String, f64>,
    pub verdict: RecordVerdict,
    pub label: String,
    pub series: BTreeMap<String, Vec<[f64; 2]>>,
    pub runtime_ms: Option<f64>,
}

impl ReportRecord {
    pub(crate) fn new(suite: Suite, trial: usize) -> Self {
        Self {
            suite,
            trial,
            parameters: BTreeMap::new(),
            measured: BTreeMap::new(),
            fitted: BTreeMap::new(),
            verdict: RecordVerdict::Inconclusive,
            label: String::new(),
            series: BTreeMap::new(),
            runtime_ms: None,
        }
    }

    pub(crate) fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        if is_finite_json(&v) {
            self.parameters.insert(key.to_string(), v);
        }
    }

    pub(crate) fn measure(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.measured.insert(key.to_string(), value);
        }
    }

    pub(crate) fn fit(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.fitted.insert(key.to_string(), value);
        }
    }

    pub(crate) fn add_series(&mut self, key: &str, points: impl IntoIterator<Item = (f64, f64)>) {
        let pts: Vec<[f64; 2]> = points
            .into_iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| [x, y])
            .collect();
        self.series.insert(key.to_string(), pts);
    }

    pub(crate) fn set_verdict(&mut self, pass: bool, label: impl Into<String>) {
        self.verdict = if pass { RecordVerdict::Pass } else { RecordVerdict::Fail };
        self.label = label.into();
    }
}

fn is_finite_json(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Null => false,
        serde_json::Value::Array(a) => a.iter().all(is_finite_json),
        serde_json::Value::Object(o) => o.values().all(is_finite_json),
        _ => true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Record wall-clock time per trial. Off by default so reports are
    /// byte-identical across runs.
    pub timing: bool,
}

/// Runs every trial of `config`. Trial `i` draws from its own seeded
/// stream, so the records do not depend on the worker count.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ReportRecord>, ConfigError> {
    if config.trials == 0 {
        return Err(ConfigError::Invalid("trials must be at least 1".into()));
    }
    let settings = suites::Settings::parse(config.suite, &config.params)?;
    let work = || -> Vec<ReportRecord> {
        let mut records: Vec<ReportRecord> = (0..config.trials)
            .into_par_iter()
            .map(|i| {
                let start = Instant::now();
                let mut rec = settings.trial(config.seed, i);
                if opts.timing {
                    rec.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
                }
                rec
            })
            .collect();
        settings.finish(&mut records);
        records
    };
    match opts.jobs {
        Some(0) => Err(ConfigError::Invalid("--jobs must be at least 1".into())),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| ConfigError::Pool(e.to_string()))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// `(pass, fail, inconclusive)` counts.
pub fn tally(records: &[ReportRecord]) -> (usize, usize, usize) {
    records.iter().fold((0, 0, 0), |(p, f, i), r| match r.verdict {
        RecordVerdict::Pass => (p + 1, f, i),
        RecordVerdict::Fail => (p, f + 1, i),
        RecordVerdict::Inconclusive => (p, f, i + 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()), Some(s));
            let v: Suite = serde_json::from_value(serde_json::json!(s.name())).unwrap();
            assert_eq!(v, s);
        }
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let e = ExperimentConfig::from_toml_str("suite = \"cascade\"\nseed = 1\ntrails = 3\n");
        assert!(matches!(e, Err(ConfigError::Parse(_))));
    }

    #[test]
    fn missing_seed_is_rejected() {
        assert!(ExperimentConfig::from_toml_str("suite = \"cascade\"\n").is_err());
    }

    #[test]
    fn zero_trials_is_rejected() {
        let e = ExperimentConfig::from_toml_str("suite = \"cascade\"\nseed = 1\ntrials = 0\n");
        assert!(matches!(e, Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn unknown_param_is_rejected() {
        let e = ExperimentConfig::from_toml_str("suite = \"cascade\"\nseed = 1\n[params]\nkmax = 3\n");
        assert!(matches!(e, Err(ConfigError::Param { .. })), "{e:?}");
    }

    #[test]
    fn non_finite_values_are_dropped() {
        let mut r = ReportRecord::new(Suite::Cascade, 0);
        r.measure("a", f64::NAN);
        r.measure("b", 1.0);
        r.add_series("s", [(0.0, f64::INFINITY), (1.0, 2.0)]);
        r.param("p", f64::NAN);
        assert_eq!(r.measured.len(), 1);
        assert_eq!(r.series["s"], vec![[1.0, 2.0]]);
        assert!(r.parameters.is_empty());
    }
}
