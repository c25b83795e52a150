//! Conformal-dimension bound formulas with explicit precondition checks.
//!
//! Every operation either returns a number with its hypotheses verified or a
//! [`BoundsError::Precondition`] naming the violated clause — a failed
//! precondition is never silently computed over.  All logarithms are
//! natural; every published ratio of logs is base independent, which the
//! tests confirm by recomputing in base 2.

use crate::cancellation::piece_report;
use crate::coverage;
use crate::sampler::Presentation;
use num_bigint::BigUint;
use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("{bound}: precondition failed: {reason}")]
    Precondition {
        bound: &'static str,
        reason: String,
    },
    #[error("presentation has no relators; no length statistics exist")]
    EmptyPresentation,
}

fn precondition(bound: &'static str, reason: String) -> BoundsError {
    BoundsError::Precondition { bound, reason }
}

/// The presentation statistics every bound formula consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PresentationStats {
    pub m: u32,
    /// Maximum relator length `M`.
    pub max_relator_len: u64,
    pub min_relator_len: u64,
    #[serde(with = "crate::ratio_json")]
    pub lambda_star: Rational64,
    pub m_star: u64,
}

impl PresentationStats {
    /// Computes the exact piece ratio and the coverage statistic for a
    /// concrete presentation.
    pub fn from_presentation(p: &Presentation) -> Result<PresentationStats, BoundsError> {
        let max_relator_len = p.max_relator_len().ok_or(BoundsError::EmptyPresentation)?;
        let min_relator_len = p.min_relator_len().expect("nonempty by the line above");
        let report = piece_report(p).map_err(|_| BoundsError::EmptyPresentation)?;
        let coverage = coverage::m_star(p);
        Ok(PresentationStats {
            m: p.generator_count(),
            max_relator_len,
            min_relator_len,
            lambda_star: report.lambda_star,
            m_star: coverage.m_star,
        })
    }
}

/// The lambda actually used by the curvature-flavored bounds: the exact
/// piece ratio when positive, else the weakest admissible hypothesis 1/6.
fn effective_lambda(stats: &PresentationStats) -> Rational64 {
    if stats.lambda_star.is_zero() {
        Rational64::new(1, 6)
    } else {
        stats.lambda_star
    }
}

/// `floor(1/lambda - 4)`, exactly, requiring `lambda <= 1/6` (equivalently
/// a floor of at least 2).
fn floor_inv_lambda_minus_4(bound: &'static str, lambda: Rational64) -> Result<u64, BoundsError> {
    if lambda <= Rational64::zero() {
        return Err(precondition(bound, format!("lambda = {lambda} is not positive")));
    }
    if lambda > Rational64::new(1, 6) {
        return Err(precondition(
            bound,
            format!("lambda = {lambda} exceeds 1/6"),
        ));
    }
    let num = *lambda.numer();
    let den = *lambda.denom();
    // 1/lambda - 4 = (den - 4 num)/num with both parts positive here
    let floor = (den - 4 * num).div_euclid(num);
    debug_assert!(floor >= 2);
    Ok(floor as u64)
}

/// Conformal-dimension upper bound
/// `M log(2m-1) / (2 log floor(1/lambda - 4))`.
pub fn upper_bound(stats: &PresentationStats) -> Result<f64, BoundsError> {
    let lambda = effective_lambda(stats);
    let floor = floor_inv_lambda_minus_4("upper_bound", lambda)?;
    let m = stats.m as f64;
    Ok(stats.max_relator_len as f64 * (2.0 * m - 1.0).ln() / (2.0 * (floor as f64).ln()))
}

/// Asymptotic upper curvature `kappa = -(4/M^2) log^2 floor(1/lambda - 4)`.
pub fn asymptotic_curvature(stats: &PresentationStats) -> Result<f64, BoundsError> {
    let lambda = effective_lambda(stats);
    let floor = floor_inv_lambda_minus_4("asymptotic_curvature", lambda)?;
    let m_len = stats.max_relator_len as f64;
    let log = (floor as f64).ln();
    Ok(-(4.0 / (m_len * m_len)) * log * log)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    /// `1 + log|T| / log(M)` — the bound with its internals made explicit.
    pub lower_exact: f64,
    /// `1 + (1/100) log(2m) M^* / log(M)` — the published shape at C = 1/100.
    pub lower_paper_c: f64,
    /// `K = floor(M^*/2 - 3)`.
    pub k: u64,
    /// `|T| = 3 (2m-2)^{K-3}`; serialized as a decimal string.
    #[serde(serialize_with = "serialize_biguint")]
    pub t_size: BigUint,
    /// Largest `i/1024` with C'(1/8 - delta) and min relator length >= 3/delta.
    #[serde(with = "crate::ratio_json")]
    pub delta_used: Rational64,
}

/// Conformal-dimension lower bound.  Preconditions: `M^* >= 12`, and some
/// `delta` in `(0, 1/8)` with the presentation C'(1/8 - delta) and all
/// relators of length at least `3/delta`.  `delta` is searched on the grid
/// `i/1024` and the largest admissible value is reported.
pub fn lower_bound(stats: &PresentationStats) -> Result<LowerBound, BoundsError> {
    const BOUND: &str = "lower_bound";
    if stats.m_star < 12 {
        return Err(precondition(
            BOUND,
            format!("M* >= 12 violated: m_star = {}", stats.m_star),
        ));
    }
    // lambda clause: i < 128 - 1024 lambda_star (strict C'(1/8 - i/1024))
    let t = Rational64::new(128, 1) - Rational64::new(1024, 1) * stats.lambda_star;
    if t <= Rational64::new(1, 1) {
        return Err(precondition(
            BOUND,
            format!(
                "not C'(1/8 - delta) for any delta >= 1/1024: lambda_star = {}",
                stats.lambda_star
            ),
        ));
    }
    // largest integer strictly below t, capped at 127 (delta < 1/8)
    let i_hi = (t.ceil().to_integer() - 1).min(127);
    // length clause: i >= 3*1024 / min_r
    if stats.min_relator_len == 0 {
        return Err(precondition(BOUND, "zero-length relator".to_string()));
    }
    let i_lo = (3 * 1024 + stats.min_relator_len - 1) / stats.min_relator_len;
    if i_lo > 127 {
        return Err(precondition(
            BOUND,
            format!(
                "min relator length {} < 3/delta for every delta < 1/8",
                stats.min_relator_len
            ),
        ));
    }
    if (i_hi as u64) < i_lo {
        return Err(precondition(
            BOUND,
            format!(
                "no delta on the 1/1024 grid satisfies both clauses: \
                 small-cancellation clause needs i <= {i_hi}, \
                 relator-length clause needs i >= {i_lo}"
            ),
        ));
    }
    let delta_used = Rational64::new(i_hi, 1024);

    let k = (stats.m_star as i64 - 6).div_euclid(2) as u64;
    debug_assert!(k >= 3);
    let branching = BigUint::from(2 * stats.m - 2);
    let t_size = BigUint::from(3u32) * branching.pow((k - 3) as u32);
    let ln_t = 3f64.ln() + (k - 3) as f64 * (2.0 * stats.m as f64 - 2.0).ln();
    let ln_m = (stats.max_relator_len as f64).ln();
    let lower_exact = 1.0 + ln_t / ln_m;
    let lower_paper_c = 1.0 + 0.01 * (2.0 * stats.m as f64).ln() * stats.m_star as f64 / ln_m;
    Ok(LowerBound {
        lower_exact,
        lower_paper_c,
        k,
        t_size,
        delta_used,
    })
}

/// Visual-metric upper bound `log(2m-1) / epsilon`.
pub fn entropy_upper(m: u32, epsilon: f64) -> Result<f64, BoundsError> {
    if m < 2 {
        return Err(precondition("entropy_upper", format!("m = {m} < 2")));
    }
    if !(epsilon > 0.0) {
        return Err(precondition(
            "entropy_upper",
            format!("epsilon = {epsilon} is not positive"),
        ));
    }
    Ok((2.0 * m as f64 - 1.0).ln() / epsilon)
}

/// The standard admissible visual parameter `log(2)/(4 delta)` with
/// `delta = 2M` (the Cayley graph of a C'(1/6) presentation with relators
/// of length at most `M` is `2M`-hyperbolic).
pub fn standard_epsilon(max_relator_len: u64) -> f64 {
    std::f64::consts::LN_2 / (8.0 * max_relator_len as f64)
}

/// Density-model upper bound `16 log(2m-1) / (log(2) (1-2d)) * l`,
/// valid for densities `0 < d < 1/2`.
pub fn density_upper(m: u32, d: f64, l: u64) -> Result<f64, BoundsError> {
    if m < 2 {
        return Err(precondition("density_upper", format!("m = {m} < 2")));
    }
    if !(d > 0.0 && d < 0.5) {
        return Err(precondition(
            "density_upper",
            format!("density d = {d} outside (0, 1/2)"),
        ));
    }
    Ok(16.0 * (2.0 * m as f64 - 1.0).ln() / (std::f64::consts::LN_2 * (1.0 - 2.0 * d))
        * l as f64)
}

/// A bound value or the reason its hypotheses fail.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Reported<T: Serialize> {
    Value(T),
    Failed { precondition_failed: String },
}

impl<T: Serialize> From<Result<T, BoundsError>> for Reported<T> {
    fn from(r: Result<T, BoundsError>) -> Self {
        match r {
            Ok(v) => Reported::Value(v),
            Err(e) => Reported::Failed {
                precondition_failed: e.to_string(),
            },
        }
    }
}

impl<T: Serialize> Reported<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Reported::Value(v) => Some(v),
            Reported::Failed { .. } => None,
        }
    }
}

/// The headline asymptotic shapes, printed with their constant left
/// symbolic and evaluated at C = 1 purely for scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Headline {
    pub note: &'static str,
    pub few_relator_lower_formula: &'static str,
    pub few_relator_lower_at_c1: f64,
    pub few_relator_upper_formula: &'static str,
    pub few_relator_upper_at_c1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_lower_formula: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_lower_at_c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_upper_formula: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_upper_at_c1: Option<f64>,
}

/// Everything the `bounds` surface reports for one presentation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<PresentationStats>,
    pub upper_thm41: Reported<f64>,
    pub kappa: Reported<f64>,
    pub lower_exact: Reported<f64>,
    pub lower_paper_c: Reported<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_size: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(with = "ratio_opt")]
    pub delta_used: Option<Rational64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_epsilon: Option<f64>,
    pub entropy_upper: Reported<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_upper: Option<Reported<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub headline: Option<Headline>,
    pub notes: Vec<String>,
}

fn serialize_biguint<S: serde::Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

mod ratio_opt {
    use num_rational::Rational64;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(
        r: &Option<Rational64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => crate::ratio_json::serialize(r, s),
            None => s.serialize_none(),
        }
    }
}

/// Assembles the full report.  `d` and `l` are the optional density-model
/// parameters; when `l` is absent the maximum relator length stands in for
/// it in the headline formulas.
pub fn bounds_report(p: &Presentation, d: Option<f64>, l: Option<u64>) -> BoundsReport {
    let mut notes = Vec::new();
    let stats = PresentationStats::from_presentation(p).ok();
    if stats.is_none() {
        notes.push("presentation has no relators; length-dependent bounds unavailable".into());
    } else if stats.as_ref().expect("checked").lambda_star.is_zero() {
        notes.push("lambda_star = 0 (no pieces); curvature bounds evaluated at lambda = 1/6".into());
    }

    let no_stats = || BoundsError::EmptyPresentation;
    let upper_thm41 = stats.as_ref().map_or_else(|| Err(no_stats()), |s| upper_bound(s));
    let kappa = stats
        .as_ref()
        .map_or_else(|| Err(no_stats()), |s| asymptotic_curvature(s));
    let lower = stats.as_ref().map_or_else(|| Err(no_stats()), |s| lower_bound(s));

    let (lower_exact, lower_paper_c, k, t_size, delta_used) = match &lower {
        Ok(lb) => (
            Ok(lb.lower_exact),
            Ok(lb.lower_paper_c),
            Some(lb.k),
            Some(lb.t_size.to_string()),
            Some(lb.delta_used),
        ),
        Err(e) => (Err(e.clone()), Err(e.clone()), None, None, None),
    };

    let entropy_epsilon = stats.as_ref().map(|s| standard_epsilon(s.max_relator_len));
    let entropy = match entropy_epsilon {
        Some(eps) => entropy_upper(p.generator_count(), eps),
        None => Err(no_stats()),
    };

    let l_eff = l.or_else(|| stats.as_ref().map(|s| s.max_relator_len));
    let density = match (d, l_eff) {
        (Some(d), Some(l)) => Some(Reported::from(density_upper(p.generator_count(), d, l))),
        _ => None,
    };

    let headline = l_eff.map(|l| {
        let m = p.generator_count() as f64;
        let lf = l as f64;
        let log_base = (2.0 * m - 1.0).ln();
        Headline {
            note: "numeric values use C = 1; the theorems assert an unspecified constant C > 1",
            few_relator_lower_formula: "1 + 1/C",
            few_relator_lower_at_c1: 2.0,
            few_relator_upper_formula: "C * log(2m-1) * l / log(l)",
            few_relator_upper_at_c1: log_base * lf / lf.ln(),
            density_lower_formula: d.map(|_| "1 + d * log(2m) * l / (C * log(l))"),
            density_lower_at_c1: d.map(|d| 1.0 + d * (2.0 * m).ln() * lf / lf.ln()),
            density_upper_formula: d.map(|_| "C * log(2m-1) * l / |log(d)|"),
            density_upper_at_c1: d.map(|d| log_base * lf / d.ln().abs()),
        }
    });

    BoundsReport {
        stats,
        upper_thm41: upper_thm41.into(),
        kappa: kappa.into(),
        lower_exact: lower_exact.into(),
        lower_paper_c: lower_paper_c.into(),
        k,
        t_size,
        delta_used,
        entropy_epsilon,
        entropy_upper: entropy.into(),
        density_upper: density,
        headline,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(m: u32, max: u64, min: u64, lambda: Rational64, m_star: u64) -> PresentationStats {
        PresentationStats {
            m,
            max_relator_len: max,
            min_relator_len: min,
            lambda_star: lambda,
            m_star,
        }
    }

    #[test]
    fn upper_bound_examples() {
        let s = stats(2, 8, 8, Rational64::new(1, 8), 1);
        let v = upper_bound(&s).unwrap();
        assert!((v - 8.0 * 3f64.ln() / (2.0 * 4f64.ln())).abs() < 1e-12);
        assert!((v - 3.170).abs() < 1e-3);

        let s = stats(2, 8, 8, Rational64::new(1, 6), 1);
        let v = upper_bound(&s).unwrap();
        assert!((v - 6.340).abs() < 1e-3);

        let s = stats(2, 8, 8, Rational64::new(1, 5), 1);
        assert!(matches!(upper_bound(&s), Err(BoundsError::Precondition { .. })));
    }

    #[test]
    fn upper_bound_monotone_in_lambda() {
        let lambdas = [
            Rational64::new(1, 24),
            Rational64::new(1, 12),
            Rational64::new(1, 8),
            Rational64::new(1, 6),
        ];
        let mut last = 0.0;
        for lambda in lambdas {
            let v = upper_bound(&stats(2, 20, 20, lambda, 1)).unwrap();
            assert!(v > last, "bound must increase with lambda");
            last = v;
        }
    }

    #[test]
    fn curvature_examples() {
        let v = asymptotic_curvature(&stats(2, 8, 8, Rational64::new(1, 6), 1)).unwrap();
        assert!((v + 0.03003).abs() < 1e-5, "got {v}");
        let v = asymptotic_curvature(&stats(2, 120, 120, Rational64::new(1, 12), 1)).unwrap();
        assert!((v + 0.001201).abs() < 1e-6, "got {v}");
        assert!(asymptotic_curvature(&stats(2, 8, 8, Rational64::new(1, 4), 1)).is_err());
    }

    #[test]
    fn lower_bound_example() {
        let s = stats(2, 120, 120, Rational64::new(1, 12), 12);
        let lb = lower_bound(&s).unwrap();
        assert_eq!(lb.k, 3);
        assert_eq!(lb.t_size, BigUint::from(3u32));
        assert!((lb.lower_exact - 1.2295).abs() < 1e-4, "{}", lb.lower_exact);
        assert!((lb.lower_paper_c - 1.0348).abs() < 1e-4, "{}", lb.lower_paper_c);
        assert!(lb.lower_exact > 1.0);
        // delta grid: lambda clause allows i <= 42, length clause i >= 26
        assert_eq!(lb.delta_used, Rational64::new(42, 1024));
    }

    #[test]
    fn lower_bound_preconditions() {
        let err = lower_bound(&stats(2, 120, 120, Rational64::new(1, 12), 11)).unwrap_err();
        assert!(err.to_string().contains("M*"), "{err}");
        // lambda too large
        let err = lower_bound(&stats(2, 120, 120, Rational64::new(1, 7), 12)).unwrap_err();
        assert!(err.to_string().contains("C'"), "{err}");
        // relators too short for any admissible delta
        let err = lower_bound(&stats(2, 20, 20, Rational64::new(1, 100), 12)).unwrap_err();
        assert!(err.to_string().contains("relator"), "{err}");
    }

    #[test]
    fn lower_bound_boundary_strictness() {
        // lambda_star = 1/8 - 42/1024 exactly: i = 42 fails the strict
        // inequality, i = 41 passes
        let lambda = Rational64::new(1, 8) - Rational64::new(42, 1024);
        let lb = lower_bound(&stats(2, 120, 120, lambda, 12)).unwrap();
        assert_eq!(lb.delta_used, Rational64::new(41, 1024));
    }

    #[test]
    fn entropy_examples() {
        let v = entropy_upper(2, std::f64::consts::LN_2 / 64.0).unwrap();
        assert!((v - 101.4).abs() < 0.05, "got {v}");
        assert!((entropy_upper(2, 3f64.ln()).unwrap() - 1.0).abs() < 1e-12);
        assert!((entropy_upper(3, 5f64.ln()).unwrap() - 1.0).abs() < 1e-12);
        assert!(entropy_upper(2, 0.0).is_err());
        assert!(entropy_upper(2, -1.0).is_err());
        // standard epsilon reproduces the 8 log(2m-1)/log(2) * M shape
        let m_len = 8u64;
        let v = entropy_upper(2, standard_epsilon(m_len)).unwrap();
        let direct = 8.0 * 3f64.ln() / std::f64::consts::LN_2 * m_len as f64;
        assert!((v - direct).abs() < 1e-9);
    }

    #[test]
    fn density_upper_examples() {
        let v = density_upper(2, 0.25, 100).unwrap();
        assert!((v - 5071.9).abs() < 0.1, "got {v}");
        let v = density_upper(2, 1e-12, 100).unwrap();
        assert!((v - 2536.0).abs() < 0.1, "got {v}");
        assert!(density_upper(2, 0.6, 100).is_err());
        assert!(density_upper(2, 0.0, 100).is_err());
    }

    /// Ratios of logs are base independent: recompute with log2.
    #[test]
    fn log_base_independence() {
        let s = stats(2, 8, 8, Rational64::new(1, 8), 1);
        let natural = upper_bound(&s).unwrap();
        let base2 = 8.0 * 3f64.log2() / (2.0 * 4f64.log2());
        assert!((natural - base2).abs() < 1e-12);

        let lb = lower_bound(&stats(2, 120, 120, Rational64::new(1, 12), 12)).unwrap();
        let base2 = 1.0 + 3f64.log2() / 120f64.log2();
        assert!((lb.lower_exact - base2).abs() < 1e-12);
    }

    #[test]
    fn report_on_free_presentation() {
        let p = Presentation::new(2, vec![]).unwrap();
        let report = bounds_report(&p, Some(0.25), Some(100));
        assert!(report.stats.is_none());
        assert!(report.upper_thm41.value().is_none());
        let density = report.density_upper.unwrap();
        let v = density.value().expect("density bound needs only m, d, l");
        assert!((v - 5071.9).abs() < 0.1);
        assert!(report.headline.is_some());
    }

    #[test]
    fn report_on_genus2() {
        let p = Presentation::from_strs(4, &["abABcdCD"]).unwrap();
        let report = bounds_report(&p, None, None);
        let s = report.stats.unwrap();
        assert_eq!(s.lambda_star, Rational64::new(1, 8));
        assert_eq!(s.m_star, 1);
        let upper = *report.upper_thm41.value().unwrap();
        assert!((upper - 8.0 * 7f64.ln() / (2.0 * 4f64.ln())).abs() < 1e-9);
        assert!(upper > 1.0);
        // lower bound hypotheses fail on this small presentation
        assert!(report.lower_exact.value().is_none());
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["stats"]["lambda_star"]["den"], 8);
    }
}
