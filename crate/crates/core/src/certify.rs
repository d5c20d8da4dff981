//! Certified bounds on the smoothed expected score under an l2 shift of
//! norm `R`, and the bisection that turns a bound into a certified radius.
//!
//! Every bound is a non-negative combination of terms `Φ(Φ⁻¹(p) ∓ R/σ)`.
//! The naive bound uses only a bound `p` on the normalized mean score. The
//! CDF bound uses the banded exceedance probabilities in [`LevelBounds`].
//! Lower forms are non-increasing in `R` and upper forms non-decreasing.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};
use crate::gauss::{std_normal_cdf, std_normal_quantile, Sigma};
use crate::levels::LevelBounds;
use crate::measures::{MeasureKind, ScoreRange};

/// `Φ(Φ⁻¹(p) + shift)` with the endpoints 0 and 1 held fixed.
fn shifted_probability(p: f64, shift: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else if p >= 1.0 {
        1.0
    } else {
        // p is in (0, 1), so the quantile cannot fail.
        std_normal_cdf(std_normal_quantile(p).unwrap_or(f64::NAN) + shift)
    }
}

/// Maps a mean bound in `[a, b]` to the probability scale, clamped to `[0, 1]`.
pub fn mean_to_probability(mean: f64, range: ScoreRange) -> f64 {
    ((mean - range.a) / range.width()).clamp(0.0, 1.0)
}

/// Naive lower bound `b Φσ(Φσ⁻¹(p) - R) + a (1 - Φσ(Φσ⁻¹(p) - R))`.
pub fn naive_lower(p_lower: f64, radius: f64, sigma: Sigma, range: ScoreRange) -> f64 {
    let q = shifted_probability(p_lower, -radius / sigma.value());
    range.b * q + range.a * (1.0 - q)
}

/// Naive upper bound, the mirror image of [`naive_lower`] with `+R`.
pub fn naive_upper(p_upper: f64, radius: f64, sigma: Sigma, range: ScoreRange) -> f64 {
    let q = shifted_probability(p_upper, radius / sigma.value());
    range.b * q + range.a * (1.0 - q)
}

/// CDF-based lower bound
/// `a + (s_1 - a) Φσ(Φσ⁻¹(p̲_1) - R) + Σ_{j≥2} (s_j - s_{j-1}) Φσ(Φσ⁻¹(p̲_j) - R)`.
pub fn cdf_lower(bounds: &LevelBounds, radius: f64, sigma: Sigma) -> f64 {
    let shift = -radius / sigma.value();
    let range = bounds.range();
    let mut previous = range.a;
    // All terms are non-negative, so a fixed summation order keeps the
    // result exactly monotone in R.
    let mut total = 0.0;
    for (&s, &p) in bounds.levels().iter().zip(bounds.p_lower()) {
        total += (s - previous) * shifted_probability(p, shift);
        previous = s;
    }
    range.a + total
}

/// CDF-based upper bound
/// `s_1 + (b - s_n) Φσ(Φσ⁻¹(p̄_n) + R) + Σ_{j<n} (s_{j+1} - s_j) Φσ(Φσ⁻¹(p̄_j) + R)`.
pub fn cdf_upper(bounds: &LevelBounds, radius: f64, sigma: Sigma) -> f64 {
    let shift = radius / sigma.value();
    let levels = bounds.levels();
    let p_upper = bounds.p_upper();
    let n = levels.len();
    let mut total = 0.0;
    for j in 0..n {
        let next = if j + 1 < n {
            levels[j + 1]
        } else {
            bounds.range().b
        };
        total += (next - levels[j]) * shifted_probability(p_upper[j], shift);
    }
    levels[0] + total
}

/// Best-possible baseline: the naive lower bound fed with the empirical mean.
pub fn best_baseline_lower(e_hat: f64, radius: f64, sigma: Sigma, range: ScoreRange) -> f64 {
    naive_lower(mean_to_probability(e_hat, range), radius, sigma, range)
}

/// Classic randomized-smoothing radius `σ Φ⁻¹(p̲)`.
pub fn cohen_radius(p1_lower: f64, sigma: Sigma) -> Result<f64> {
    if !(p1_lower > 0.0 && p1_lower < 1.0) {
        return Err(Error::ProbabilityNotInterior(p1_lower));
    }
    Ok(sigma.value() * std_normal_quantile(p1_lower)?)
}

/// A bound viewed as a function of the perturbation radius.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundCurve {
    NaiveLower {
        p: f64,
        range: ScoreRange,
        sigma: Sigma,
    },
    NaiveUpper {
        p: f64,
        range: ScoreRange,
        sigma: Sigma,
    },
    CdfLower {
        bounds: LevelBounds,
        sigma: Sigma,
    },
    CdfUpper {
        bounds: LevelBounds,
        sigma: Sigma,
    },
}

impl BoundCurve {
    pub fn eval(&self, radius: f64) -> f64 {
        match self {
            BoundCurve::NaiveLower { p, range, sigma } => naive_lower(*p, radius, *sigma, *range),
            BoundCurve::NaiveUpper { p, range, sigma } => naive_upper(*p, radius, *sigma, *range),
            BoundCurve::CdfLower { bounds, sigma } => cdf_lower(bounds, radius, *sigma),
            BoundCurve::CdfUpper { bounds, sigma } => cdf_upper(bounds, radius, *sigma),
        }
    }

    pub fn side(&self) -> BoundSide {
        match self {
            BoundCurve::NaiveLower { .. } | BoundCurve::CdfLower { .. } => BoundSide::Lower,
            BoundCurve::NaiveUpper { .. } | BoundCurve::CdfUpper { .. } => BoundSide::Upper,
        }
    }

    pub fn range(&self) -> ScoreRange {
        match self {
            BoundCurve::NaiveLower { range, .. } | BoundCurve::NaiveUpper { range, .. } => *range,
            BoundCurve::CdfLower { bounds, .. } | BoundCurve::CdfUpper { bounds, .. } => {
                bounds.range()
            }
        }
    }

    pub fn sigma(&self) -> Sigma {
        match self {
            BoundCurve::NaiveLower { sigma, .. }
            | BoundCurve::NaiveUpper { sigma, .. }
            | BoundCurve::CdfLower { sigma, .. }
            | BoundCurve::CdfUpper { sigma, .. } => *sigma,
        }
    }

    /// Whether the guarantee "score stays on the right side of `c`" holds at
    /// this bound value.
    fn holds(&self, value: f64, threshold: f64) -> bool {
        match self.side() {
            BoundSide::Lower => value >= threshold,
            BoundSide::Upper => value <= threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Lower,
    Upper,
}

/// Certified radius. `Unbounded` means the bound still clears the threshold
/// at the search ceiling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Finite(f64),
    Unbounded,
}

impl Radius {
    /// Whether the certificate covers every perturbation of norm `r`.
    pub fn covers(&self, r: f64) -> bool {
        match self {
            Radius::Finite(radius) => *radius >= r,
            Radius::Unbounded => true,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Radius::Finite(r) => Some(*r),
            Radius::Unbounded => None,
        }
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(r) => write!(f, "{r}"),
            Radius::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl Serialize for Radius {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Radius::Finite(r) => serializer.serialize_f64(*r),
            Radius::Unbounded => serializer.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(r) if r >= 0.0 => Ok(Radius::Finite(r)),
            Repr::Number(r) => Err(serde::de::Error::custom(format!("negative radius {r}"))),
            Repr::Text(s) if s == "unbounded" => Ok(Radius::Unbounded),
            Repr::Text(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"unbounded\", got {s:?}"
            ))),
        }
    }
}

/// Bisection precision `tau` and search ceiling `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    tau: f64,
    r_max: f64,
}

impl SearchParams {
    pub const DEFAULT_TAU: f64 = 1e-4;
    pub const DEFAULT_CEILING_IN_SIGMAS: f64 = 50.0;

    pub fn new(tau: f64, r_max: f64) -> Result<Self> {
        if tau > 0.0 && tau < r_max && r_max.is_finite() {
            Ok(Self { tau, r_max })
        } else {
            Err(Error::InvalidSearch { tau, r_max })
        }
    }

    /// `tau = 1e-4`, `r_max = 50 σ`.
    pub fn for_sigma(sigma: Sigma) -> Self {
        Self {
            tau: Self::DEFAULT_TAU,
            r_max: Self::DEFAULT_CEILING_IN_SIGMAS * sigma.value(),
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }
}

/// Result of a radius search, with the number of curve evaluations spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    pub radius: Radius,
    pub bound_at_zero: f64,
    pub evaluations: usize,
}

/// Largest radius at which the curve stays on the certified side of `c`.
///
/// For lower curves this is `curve(R) >= c`; for upper curves `curve(R) <= c`.
/// A finite result `R*` satisfies the condition at `R*` and fails it at
/// `R* + tau`.
pub fn certified_radius(
    curve: &BoundCurve,
    threshold: f64,
    search: &SearchParams,
) -> Result<Radius> {
    search_radius(curve, threshold, search).map(|o| o.radius)
}

pub fn search_radius(
    curve: &BoundCurve,
    threshold: f64,
    search: &SearchParams,
) -> Result<SearchOutcome> {
    curve.range().check_threshold(threshold)?;

    let bound_at_zero = curve.eval(0.0);
    if !curve.holds(bound_at_zero, threshold) {
        return Ok(SearchOutcome {
            radius: Radius::Finite(0.0),
            bound_at_zero,
            evaluations: 1,
        });
    }
    if curve.holds(curve.eval(search.r_max), threshold) {
        return Ok(SearchOutcome {
            radius: Radius::Unbounded,
            bound_at_zero,
            evaluations: 2,
        });
    }

    let mut evaluations = 2;
    let (mut lo, mut hi) = (0.0, search.r_max);
    while hi - lo > search.tau {
        let mid = lo + 0.5 * (hi - lo);
        evaluations += 1;
        if curve.holds(curve.eval(mid), threshold) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SearchOutcome {
        radius: Radius::Finite(lo),
        bound_at_zero,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Mean-based bound with a Hoeffding confidence bound on the mean.
    Naive,
    /// Step-function bound from DKW-banded exceedance probabilities.
    Cdf,
    /// Mean-based bound fed with the raw empirical mean.
    BestBaseline,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Cdf => "cdf",
            Method::BestBaseline => "best_baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One certificate record. Carries every setting needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub input_id: String,
    pub measure: MeasureKind,
    pub predicted_class: usize,
    pub method: Method,
    pub bound: BoundSide,
    pub threshold: f64,
    pub radius: Radius,
    pub bound_at_zero: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub m: usize,
    pub n_levels: usize,
    /// Levels left after duplicate collapse; only set for the CDF method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective_levels: Option<usize>,
    pub tau: f64,
    pub r_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Certificate {
    /// Whether the bound clears the threshold at zero and stays there up to norm `r`.
    pub fn certifies(&self, r: f64) -> bool {
        let holds = match self.bound {
            BoundSide::Lower => self.bound_at_zero >= self.threshold,
            BoundSide::Upper => self.bound_at_zero <= self.threshold,
        };
        holds && self.radius.covers(r)
    }
}
