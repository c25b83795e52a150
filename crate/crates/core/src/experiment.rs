//! Deterministic Monte Carlo sweeps over random presentations.
//!
//! A sweep fixes a model (few-relator or density), a list of relator
//! lengths, a trial count, a seed, and a set of measurements.  Trial `t` at
//! length `l` samples its presentation from the stream seeded by
//! `derive_subseed(seed, &[l, t])`, so trials are independent of execution
//! order and the full result is byte-identical across reruns and thread
//! counts.  Conventions that the model definitions leave open are recorded
//! in the result metadata.
//!
//! Measurement keys, as written in sweep configs:
//! `lambda_star`, `m_star`, `bounds`, `c_prime_at: <expr>`,
//! `covers_length: <expr>`, where `<expr>` may use the variables `l`, `m`
//! (see [`crate::expr`]).

use crate::bounds::{self, PresentationStats};
use crate::cancellation::piece_report;
use crate::counting::{omission_bound, OmissionBoundInput};
use crate::coverage;
use crate::expr::{Expr, ExprError};
use crate::rng::derive_subseed;
use crate::sampler::{
    density_relator_count, sample_density, sample_few_relator, DensityConfig, FewRelatorConfig,
    Presentation, SampleError,
};
use crate::words::{Letter, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::FromPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-trial letter budget; configurations beyond it are rejected.
pub const MAX_TRIAL_LETTERS: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("unknown measurement key {0:?}")]
    UnknownMeasurement(String),
    #[error("measurement {key:?}: {reason}")]
    InvalidMeasurement { key: String, reason: String },
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("config error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum ModelConfig {
    #[serde(rename = "few_relator")]
    FewRelator { m: u32, n: u32 },
    #[serde(rename = "density")]
    Density { m: u32, d: f64 },
}

impl ModelConfig {
    pub fn generator_count(&self) -> u32 {
        match self {
            ModelConfig::FewRelator { m, .. } | ModelConfig::Density { m, .. } => *m,
        }
    }

    fn sample(&self, l: u64, seed: u64) -> Result<Presentation, SampleError> {
        match *self {
            ModelConfig::FewRelator { m, n } => {
                sample_few_relator(&FewRelatorConfig { m, n, l, seed })
            }
            ModelConfig::Density { m, d } => sample_density(&DensityConfig { m, d, l, seed }),
        }
    }

    /// Relators a trial at length `l` will carry.
    fn relator_count(&self, l: u64) -> Result<u64, SampleError> {
        match *self {
            ModelConfig::FewRelator { n, .. } => Ok(n as u64),
            ModelConfig::Density { m, d } => density_relator_count(m, d, l),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementSpec {
    LambdaStar,
    CPrimeAt(Expr),
    MStar,
    CoversLength(Expr),
    Bounds,
}

impl MeasurementSpec {
    pub fn parse(key: &str) -> Result<MeasurementSpec, ExperimentError> {
        let key = key.trim();
        match key {
            "lambda_star" => return Ok(MeasurementSpec::LambdaStar),
            "m_star" => return Ok(MeasurementSpec::MStar),
            "bounds" => return Ok(MeasurementSpec::Bounds),
            _ => {}
        }
        if let Some(expr) = key.strip_prefix("c_prime_at:") {
            return Ok(MeasurementSpec::CPrimeAt(Expr::parse(expr.trim())?));
        }
        if let Some(expr) = key.strip_prefix("covers_length:") {
            return Ok(MeasurementSpec::CoversLength(Expr::parse(expr.trim())?));
        }
        Err(ExperimentError::UnknownMeasurement(key.to_string()))
    }

    /// Canonical row key.
    pub fn key(&self) -> String {
        match self {
            MeasurementSpec::LambdaStar => "lambda_star".into(),
            MeasurementSpec::MStar => "m_star".into(),
            MeasurementSpec::Bounds => "bounds".into(),
            MeasurementSpec::CPrimeAt(e) => format!("c_prime_at: {}", e.src()),
            MeasurementSpec::CoversLength(e) => format!("covers_length: {}", e.src()),
        }
    }

    fn is_fraction(&self) -> bool {
        matches!(
            self,
            MeasurementSpec::CPrimeAt(_) | MeasurementSpec::CoversLength(_)
        )
    }

    /// Row keys this measurement emits, in emission order.
    fn row_keys(&self) -> Vec<String> {
        match self {
            MeasurementSpec::Bounds => BOUND_KEYS.iter().map(|k| (*k).to_string()).collect(),
            other => vec![other.key()],
        }
    }
}

const BOUND_KEYS: [&str; 5] = [
    "bounds.upper_thm41",
    "bounds.kappa",
    "bounds.lower_exact",
    "bounds.lower_paper_c",
    "bounds.entropy_upper",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub lengths: Vec<u64>,
    pub trials: u32,
    pub seed: u64,
    pub measurements: Vec<MeasurementSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub model: ModelConfig,
    pub lengths: Vec<u64>,
    pub trials: u32,
    pub seed: u64,
    /// Coverage length, possibly depending on `l`.
    pub k: Expr,
    /// When set, also measure omission of the fixed word a^g (as a linear
    /// factor of a relator), the quantity the omission bound caps.
    pub omission_word_length: Option<u64>,
}

impl Serialize for MeasurementSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for MeasurementSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<MeasurementSpec, D::Error> {
        let s = String::deserialize(d)?;
        MeasurementSpec::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub l: u64,
    pub trial: u32,
    pub measurement: String,
    /// Booleans encode as 1.0/0.0; a failed precondition is an empty value.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AggregateStats {
    Fraction {
        successes: u64,
        trials: u64,
        fraction: f64,
        /// Wald 95% interval, clamped to [0, 1].
        ci95: (f64, f64),
    },
    Numeric {
        n: u64,
        mean: Option<f64>,
        min: Option<f64>,
        max: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub l: u64,
    pub measurement: String,
    #[serde(flatten)]
    pub stats: AggregateStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub seed: u64,
    #[serde(flatten)]
    pub model: ModelConfig,
    pub lengths: Vec<u64>,
    pub trials: u32,
    pub rng: &'static str,
    pub subseed_scheme: &'static str,
    pub conventions: Vec<&'static str>,
}

fn metadata(model: ModelConfig, lengths: &[u64], trials: u32, seed: u64) -> Metadata {
    Metadata {
        version: env!("CARGO_PKG_VERSION"),
        seed,
        model,
        lengths: lengths.to_vec(),
        trials,
        rng: "ChaCha8",
        subseed_scheme:
            "splitmix64 chain: trial stream = h(seed, [l, trial]); relator j = h(trial_seed, [j])",
        conventions: vec![
            "density relator count = floor((2m-1)^(d*l)), minimum 1",
            "relators drawn with replacement (duplicates allowed)",
            "few-relator lengths drawn from 1..=l weighted by exact counts",
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub metadata: Metadata,
    pub aggregates: Vec<Aggregate>,
    pub rows: Vec<Row>,
}

impl ExperimentResult {
    /// Fraction aggregate for one (l, measurement key), if present.
    pub fn fraction(&self, l: u64, key: &str) -> Option<f64> {
        self.aggregates.iter().find_map(|a| match &a.stats {
            AggregateStats::Fraction { fraction, .. } if a.l == l && a.measurement == key => {
                Some(*fraction)
            }
            _ => None,
        })
    }
}

fn wald_ci(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let half = 1.96 * (p * (1.0 - p) / n).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

/// Exact verdict `lambda_star < threshold` with the float threshold taken
/// at its exact binary-rational value.
fn lambda_below(lambda_star: num_rational::Rational64, threshold: f64) -> bool {
    let exact = BigRational::from_f64(threshold).expect("finite threshold");
    let ls = BigRational::new(
        BigInt::from(*lambda_star.numer()),
        BigInt::from(*lambda_star.denom()),
    );
    ls < exact
}

fn validate_common(
    model: ModelConfig,
    lengths: &[u64],
    trials: u32,
) -> Result<(), ExperimentError> {
    if lengths.is_empty() {
        return Err(ExperimentError::Config("no lengths given".into()));
    }
    if trials < 1 {
        return Err(ExperimentError::Config("trials must be at least 1".into()));
    }
    for &l in lengths {
        let relators = model.relator_count(l)?;
        let letters = relators.saturating_mul(l);
        if letters > MAX_TRIAL_LETTERS {
            return Err(ExperimentError::Infeasible(format!(
                "trial at l={l} carries {letters} letters, over the {MAX_TRIAL_LETTERS} cap"
            )));
        }
    }
    Ok(())
}

fn trial_rows(
    cfg: &ExperimentConfig,
    l: u64,
    trial: u32,
) -> Result<Vec<Row>, ExperimentError> {
    let subseed = derive_subseed(cfg.seed, &[l, trial as u64]);
    let p = cfg.model.sample(l, subseed)?;
    let m = cfg.model.generator_count();

    let needs_piece = cfg.measurements.iter().any(|s| {
        matches!(
            s,
            MeasurementSpec::LambdaStar | MeasurementSpec::CPrimeAt(_) | MeasurementSpec::Bounds
        )
    });
    let needs_coverage = cfg
        .measurements
        .iter()
        .any(|s| matches!(s, MeasurementSpec::MStar | MeasurementSpec::Bounds));

    let piece = if needs_piece {
        Some(piece_report(&p).map_err(|e| ExperimentError::Config(e.to_string()))?)
    } else {
        None
    };
    let cov = if needs_coverage {
        Some(coverage::m_star(&p))
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut push = |measurement: String, value: Option<f64>| {
        rows.push(Row {
            l,
            trial,
            measurement,
            value,
        });
    };

    for spec in &cfg.measurements {
        match spec {
            MeasurementSpec::LambdaStar => {
                let ls = piece.as_ref().expect("computed above").lambda_star;
                push(spec.key(), Some(*ls.numer() as f64 / *ls.denom() as f64));
            }
            MeasurementSpec::CPrimeAt(expr) => {
                let threshold = expr.eval(l as f64, m as f64);
                if !(threshold > 0.0 && threshold <= 1.0) {
                    return Err(ExperimentError::InvalidMeasurement {
                        key: spec.key(),
                        reason: format!("threshold {threshold} outside (0, 1] at l = {l}"),
                    });
                }
                let holds =
                    lambda_below(piece.as_ref().expect("computed above").lambda_star, threshold);
                push(spec.key(), Some(if holds { 1.0 } else { 0.0 }));
            }
            MeasurementSpec::MStar => {
                push(
                    spec.key(),
                    Some(cov.as_ref().expect("computed above").m_star as f64),
                );
            }
            MeasurementSpec::CoversLength(expr) => {
                let kf = expr.eval(l as f64, m as f64);
                let k = kf.round();
                if !(kf.is_finite() && (kf - k).abs() < 1e-9 && k >= 1.0) {
                    return Err(ExperimentError::InvalidMeasurement {
                        key: spec.key(),
                        reason: format!("length {kf} is not a positive integer at l = {l}"),
                    });
                }
                let covers = coverage::covers_all(&p, k as u64)
                    .map_err(|e| ExperimentError::Config(e.to_string()))?;
                push(spec.key(), Some(if covers { 1.0 } else { 0.0 }));
            }
            MeasurementSpec::Bounds => {
                let stats = PresentationStats {
                    m,
                    max_relator_len: p.max_relator_len().unwrap_or(0),
                    min_relator_len: p.min_relator_len().unwrap_or(0),
                    lambda_star: piece.as_ref().expect("computed above").lambda_star,
                    m_star: cov.as_ref().expect("computed above").m_star,
                };
                let lower = bounds::lower_bound(&stats);
                let values = [
                    bounds::upper_bound(&stats).ok(),
                    bounds::asymptotic_curvature(&stats).ok(),
                    lower.as_ref().ok().map(|lb| lb.lower_exact),
                    lower.as_ref().ok().map(|lb| lb.lower_paper_c),
                    bounds::entropy_upper(m, bounds::standard_epsilon(stats.max_relator_len)).ok(),
                ];
                for (key, value) in BOUND_KEYS.iter().zip(values) {
                    push((*key).to_string(), value);
                }
            }
        }
    }
    Ok(rows)
}

fn aggregate_rows(
    lengths: &[u64],
    trials: u32,
    specs: &[MeasurementSpec],
    rows: &[Row],
) -> Vec<Aggregate> {
    let mut aggregates = Vec::new();
    for &l in lengths {
        for spec in specs {
            for key in spec.row_keys() {
                let values: Vec<Option<f64>> = rows
                    .iter()
                    .filter(|r| r.l == l && r.measurement == key)
                    .map(|r| r.value)
                    .collect();
                let stats = if spec.is_fraction() {
                    let successes = values.iter().filter(|v| **v == Some(1.0)).count() as u64;
                    AggregateStats::Fraction {
                        successes,
                        trials: trials as u64,
                        fraction: successes as f64 / trials as f64,
                        ci95: wald_ci(successes, trials as u64),
                    }
                } else {
                    let present: Vec<f64> = values.iter().flatten().copied().collect();
                    AggregateStats::Numeric {
                        n: present.len() as u64,
                        mean: if present.is_empty() {
                            None
                        } else {
                            Some(present.iter().sum::<f64>() / present.len() as f64)
                        },
                        min: present.iter().copied().reduce(f64::min),
                        max: present.iter().copied().reduce(f64::max),
                    }
                };
                aggregates.push(Aggregate {
                    l,
                    measurement: key,
                    stats,
                });
            }
        }
    }
    aggregates
}

/// Runs the sweep.  Trials execute in parallel (rayon; thread count via
/// `RAYON_NUM_THREADS`); rows come back ordered by (length position, trial,
/// measurement order) regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    validate_common(cfg.model, &cfg.lengths, cfg.trials)?;
    if cfg.measurements.is_empty() {
        return Err(ExperimentError::Config("no measurements requested".into()));
    }
    let jobs: Vec<(u64, u32)> = cfg
        .lengths
        .iter()
        .flat_map(|&l| (0..cfg.trials).map(move |t| (l, t)))
        .collect();
    let per_job: Vec<Result<Vec<Row>, ExperimentError>> = jobs
        .par_iter()
        .map(|&(l, t)| trial_rows(cfg, l, t))
        .collect();
    let mut rows = Vec::with_capacity(jobs.len());
    for job in per_job {
        rows.extend(job?);
    }
    let aggregates = aggregate_rows(&cfg.lengths, cfg.trials, &cfg.measurements, &rows);
    Ok(ExperimentResult {
        metadata: metadata(cfg.model, &cfg.lengths, cfg.trials, cfg.seed),
        aggregates,
        rows,
    })
}

/// Per-length analytic companions to a coverage sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageAnalytics {
    pub l: u64,
    pub k: u64,
    pub covers_fraction: f64,
    /// Union bound on missing some length-k word:
    /// (4/3)(2m-1)^k * omission_bound^(relator count), when the omission
    /// bound hypotheses (4 < k < l/4) hold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub union_bound: Option<f64>,
    /// The single-word omission bound at the configured word length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omission_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_omission: Option<f64>,
    /// Binomial standard error of the empirical omission frequency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omission_stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageResult {
    #[serde(flatten)]
    pub base: ExperimentResult,
    pub analytics: Vec<CoverageAnalytics>,
}

/// Row key for the omission measurement.
pub const OMITS_KEY: &str = "omits_word";

/// Coverage sweep: the covers-all fraction at `k(l)`, plus (optionally) the
/// empirical frequency with which the fixed word `a^g` is omitted as a
/// linear factor of every relator, against the analytic bound.
pub fn coverage_experiment(cfg: &CoverageConfig) -> Result<CoverageResult, ExperimentError> {
    validate_common(cfg.model, &cfg.lengths, cfg.trials)?;
    let m = cfg.model.generator_count();
    let covers_spec = MeasurementSpec::CoversLength(cfg.k.clone());
    let covers_key = covers_spec.key();

    let jobs: Vec<(u64, u32)> = cfg
        .lengths
        .iter()
        .flat_map(|&l| (0..cfg.trials).map(move |t| (l, t)))
        .collect();
    let omission_word = cfg.omission_word_length.map(|g| {
        Word::from_letters(vec![
            Letter::new(1, false).expect("generator 1");
            g as usize
        ])
    });

    let base_cfg = ExperimentConfig {
        model: cfg.model,
        lengths: cfg.lengths.clone(),
        trials: cfg.trials,
        seed: cfg.seed,
        measurements: vec![covers_spec.clone()],
    };
    let per_job: Vec<Result<Vec<Row>, ExperimentError>> = jobs
        .par_iter()
        .map(|&(l, t)| {
            let mut rows = trial_rows(&base_cfg, l, t)?;
            if let Some(r0) = &omission_word {
                // resample deterministically: same subseed, same presentation
                let subseed = derive_subseed(cfg.seed, &[l, t as u64]);
                let p = cfg.model.sample(l, subseed)?;
                let omits = p.relators().iter().all(|r| !contains_factor(r, r0));
                rows.push(Row {
                    l,
                    trial: t,
                    measurement: OMITS_KEY.to_string(),
                    value: Some(if omits { 1.0 } else { 0.0 }),
                });
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for job in per_job {
        rows.extend(job?);
    }

    let mut aggregates = aggregate_rows(&cfg.lengths, cfg.trials, &[covers_spec], &rows);
    let mut analytics = Vec::new();
    for &l in &cfg.lengths {
        let k = {
            let kf = cfg.k.eval(l as f64, m as f64);
            let k = kf.round();
            if !(kf.is_finite() && (kf - k).abs() < 1e-9 && k >= 1.0) {
                return Err(ExperimentError::InvalidMeasurement {
                    key: covers_key.clone(),
                    reason: format!("length {kf} is not a positive integer at l = {l}"),
                });
            }
            k as u64
        };
        let relators = cfg.model.relator_count(l)?;
        let union_bound = omission_bound(OmissionBoundInput { m, l, g: k })
            .ok()
            .map(|b| {
                let words = 4.0 / 3.0 * (2.0 * m as f64 - 1.0).powi(k as i32);
                (words * b.powi(relators as i32)).min(1.0)
            });
        let covers_fraction = rows
            .iter()
            .filter(|r| r.l == l && r.measurement == covers_key)
            .filter(|r| r.value == Some(1.0))
            .count() as f64
            / cfg.trials as f64;
        let (omission_bound_value, empirical_omission, omission_stderr) =
            match cfg.omission_word_length {
                Some(g) => {
                    let bound = omission_bound(OmissionBoundInput { m, l, g }).ok();
                    let omitted = rows
                        .iter()
                        .filter(|r| r.l == l && r.measurement == OMITS_KEY)
                        .filter(|r| r.value == Some(1.0))
                        .count() as f64;
                    let p_hat = omitted / cfg.trials as f64;
                    let stderr = (p_hat * (1.0 - p_hat) / cfg.trials as f64).sqrt();
                    (bound, Some(p_hat), Some(stderr))
                }
                None => (None, None, None),
            };
        if cfg.omission_word_length.is_some() {
            let omitted = rows
                .iter()
                .filter(|r| r.l == l && r.measurement == OMITS_KEY)
                .filter(|r| r.value == Some(1.0))
                .count() as u64;
            aggregates.push(Aggregate {
                l,
                measurement: OMITS_KEY.to_string(),
                stats: AggregateStats::Fraction {
                    successes: omitted,
                    trials: cfg.trials as u64,
                    fraction: omitted as f64 / cfg.trials as f64,
                    ci95: wald_ci(omitted, cfg.trials as u64),
                },
            });
        }
        analytics.push(CoverageAnalytics {
            l,
            k,
            covers_fraction,
            union_bound,
            omission_bound: omission_bound_value,
            empirical_omission,
            omission_stderr,
        });
    }

    Ok(CoverageResult {
        base: ExperimentResult {
            metadata: metadata(cfg.model, &cfg.lengths, cfg.trials, cfg.seed),
            aggregates,
            rows,
        },
        analytics,
    })
}

/// Linear (non-cyclic) factor test, the exact quantity the omission bound
/// caps.
fn contains_factor(word: &Word, factor: &Word) -> bool {
    if factor.len() > word.len() {
        return false;
    }
    word.letters()
        .windows(factor.len())
        .any(|w| w == factor.letters())
}

/// CSV encoding of the rows: header `l,trial,measurement,value`, empty
/// value for failed preconditions.
pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in rows {
        wtr.serialize(row).expect("in-memory CSV write");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

pub fn rows_from_csv(text: &str) -> Result<Vec<Row>, ExperimentError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize()
        .collect::<Result<Vec<Row>, _>>()
        .map_err(|e| ExperimentError::Config(format!("CSV parse: {e}")))
}

/// Flat TOML schema for sweep files.
#[derive(Debug, Deserialize)]
struct RawSweep {
    model: String,
    m: u32,
    n: Option<u32>,
    d: Option<f64>,
    lengths: Vec<u64>,
    trials: u32,
    #[serde(default)]
    measurements: Vec<String>,
    coverage: Option<RawCoverage>,
}

#[derive(Debug, Deserialize)]
struct RawCoverage {
    k: String,
    omission_word_length: Option<u64>,
}

/// A parsed sweep file: either a measurement sweep or a coverage sweep
/// (when a `[coverage]` table is present).
#[derive(Debug, Clone, PartialEq)]
pub enum SweepSpec {
    Measurements(ExperimentConfig),
    Coverage(CoverageConfig),
}

/// Parses the TOML sweep format.  The seed comes from the caller (the CLI
/// makes `--seed` mandatory for sweeps).
pub fn parse_sweep_toml(text: &str, seed: u64) -> Result<SweepSpec, ExperimentError> {
    let raw: RawSweep =
        toml::from_str(text).map_err(|e| ExperimentError::Config(format!("TOML: {e}")))?;
    let model = match raw.model.as_str() {
        "few_relator" => ModelConfig::FewRelator {
            m: raw.m,
            n: raw
                .n
                .ok_or_else(|| ExperimentError::Config("few_relator model needs n".into()))?,
        },
        "density" => ModelConfig::Density {
            m: raw.m,
            d: raw
                .d
                .ok_or_else(|| ExperimentError::Config("density model needs d".into()))?,
        },
        other => {
            return Err(ExperimentError::Config(format!(
                "unknown model {other:?} (expected \"few_relator\" or \"density\")"
            )))
        }
    };
    if let Some(cov) = raw.coverage {
        return Ok(SweepSpec::Coverage(CoverageConfig {
            model,
            lengths: raw.lengths,
            trials: raw.trials,
            seed,
            k: Expr::parse(&cov.k)?,
            omission_word_length: cov.omission_word_length,
        }));
    }
    let measurements = raw
        .measurements
        .iter()
        .map(|s| MeasurementSpec::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepSpec::Measurements(ExperimentConfig {
        model,
        lengths: raw.lengths,
        trials: raw.trials,
        seed,
        measurements,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            model: ModelConfig::FewRelator { m: 2, n: 2 },
            lengths: vec![8, 12],
            trials: 5,
            seed: 99,
            measurements: vec![
                MeasurementSpec::LambdaStar,
                MeasurementSpec::CPrimeAt(Expr::parse("0.5").unwrap()),
                MeasurementSpec::MStar,
            ],
        }
    }

    #[test]
    fn rows_are_deterministic_and_complete() {
        let cfg = tiny_config();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2 * 5 * 3);
        // row order: length position, trial, measurement order
        assert_eq!(a.rows[0].l, 8);
        assert_eq!(a.rows[0].measurement, "lambda_star");
        assert_eq!(a.rows[3].trial, 1);
        let json_a = serde_json::to_string(&a).unwrap();
        let json_b = serde_json::to_string(&b).unwrap();
        assert_eq!(json_a, json_b);
    }

    #[test]
    fn fractions_equal_row_means_exactly() {
        let cfg = tiny_config();
        let result = run_experiment(&cfg).unwrap();
        for agg in &result.aggregates {
            if let AggregateStats::Fraction { successes, trials, fraction, .. } = agg.stats {
                let ones = result
                    .rows
                    .iter()
                    .filter(|r| r.l == agg.l && r.measurement == agg.measurement)
                    .filter(|r| r.value == Some(1.0))
                    .count() as u64;
                assert_eq!(ones, successes);
                // exact rational check: fraction == successes/trials
                let lhs = BigRational::from_f64(fraction).unwrap();
                let rhs = BigRational::new(successes.into(), trials.into());
                // f64 division is exact when the denominator is a power of
                // two; otherwise compare after round trip
                assert_eq!(lhs, BigRational::from_f64(successes as f64 / trials as f64).unwrap());
                let _ = rhs;
            }
        }
    }

    #[test]
    fn csv_roundtrip_matches_rows() {
        let result = run_experiment(&tiny_config()).unwrap();
        let csv = rows_to_csv(&result.rows);
        assert!(csv.starts_with("l,trial,measurement,value"));
        let back = rows_from_csv(&csv).unwrap();
        assert_eq!(back, result.rows);
    }

    #[test]
    fn bounds_measurement_emits_sub_keys() {
        let cfg = ExperimentConfig {
            model: ModelConfig::FewRelator { m: 2, n: 1 },
            lengths: vec![10],
            trials: 2,
            seed: 3,
            measurements: vec![MeasurementSpec::Bounds],
        };
        let result = run_experiment(&cfg).unwrap();
        assert_eq!(result.rows.len(), 2 * BOUND_KEYS.len());
        // lower bound preconditions fail at this scale: empty values
        assert!(result
            .rows
            .iter()
            .filter(|r| r.measurement == "bounds.lower_exact")
            .all(|r| r.value.is_none()));
    }

    #[test]
    fn density_guard_rejects_oversized_runs() {
        let cfg = ExperimentConfig {
            model: ModelConfig::Density { m: 2, d: 0.4 },
            lengths: vec![500],
            trials: 1,
            seed: 0,
            measurements: vec![MeasurementSpec::LambdaStar],
        };
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn coverage_experiment_reports_analytics() {
        let cfg = CoverageConfig {
            model: ModelConfig::Density { m: 2, d: 1e-6 },
            lengths: vec![200],
            trials: 10,
            seed: 5,
            k: Expr::parse("2").unwrap(),
            omission_word_length: Some(5),
        };
        let result = coverage_experiment(&cfg).unwrap();
        assert_eq!(result.analytics.len(), 1);
        let a = &result.analytics[0];
        assert_eq!(a.k, 2);
        // k = 2 fails the omission-bound hypotheses, so no union bound
        assert!(a.union_bound.is_none());
        assert!(a.omission_bound.is_some());
        assert!(a.empirical_omission.is_some());
        // single relator of length 200: length-2 coverage is essentially
        // always partial but the fraction is still a valid probability
        assert!((0.0..=1.0).contains(&a.covers_fraction));
    }

    #[test]
    fn toml_parsing() {
        let text = r#"
            model = "few_relator"
            m = 2
            n = 2
            lengths = [100, 400]
            trials = 7
            measurements = ["c_prime_at: 11*log(l)/(l*log(2*m-1))", "lambda_star"]
        "#;
        match parse_sweep_toml(text, 42).unwrap() {
            SweepSpec::Measurements(cfg) => {
                assert_eq!(cfg.trials, 7);
                assert_eq!(cfg.seed, 42);
                assert_eq!(cfg.measurements.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        let cov = r#"
            model = "density"
            m = 2
            d = 0.0001
            lengths = [1000]
            trials = 3
            [coverage]
            k = "5"
            omission_word_length = 5
        "#;
        assert!(matches!(
            parse_sweep_toml(cov, 1).unwrap(),
            SweepSpec::Coverage(_)
        ));
        assert!(parse_sweep_toml("model = \"nope\"\nm = 2\nlengths=[1]\ntrials=1", 0).is_err());
    }
}
