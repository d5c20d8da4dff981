//! Level selection and DKW-banded exceedance probabilities.
//!
//! `LevelBounds` describes the score distribution at a point as a step
//! function. For each level `s_j` it holds lower and upper bounds on
//! `P(score >= s_j)`, which the CDF certificate consumes.

use serde::Serialize;

use crate::concentration::{dkw_epsilon, ConfidenceBudget};
use crate::error::{Error, Result};
use crate::measures::{ScalarSamples, ScoreRange};

/// Equal-count levels: sorts the samples and takes the element at 1-based
/// position `1 + floor((i - 1) m / n)` for `i = 1..=n`.
///
/// Repeated values are collapsed, so fewer than `n` levels may come back.
/// `n > m` is accepted; positions then repeat and collapse.
pub fn select_levels(samples: &ScalarSamples, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::NoLevels);
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sorted = samples.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let range = samples.range();

    let mut levels: Vec<f64> = Vec::with_capacity(n.min(m));
    for i in 0..n {
        let s = strictly_inside(range, sorted[i * m / n]);
        if levels.last() != Some(&s) {
            levels.push(s);
        }
    }
    Ok(levels)
}

fn strictly_inside(range: ScoreRange, s: f64) -> f64 {
    if range.contains_open(s) {
        s
    } else {
        range.nudge_inside(s)
    }
}

/// Certified snapshot of the exceedance function `s -> P(score >= s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelBounds {
    levels: Vec<f64>,
    p_lower: Vec<f64>,
    p_upper: Vec<f64>,
    range: ScoreRange,
    epsilon: f64,
    budget: Option<ConfidenceBudget>,
}

impl LevelBounds {
    /// Bounds built from exact exceedance probabilities (`epsilon = 0`).
    ///
    /// Used by oracle tests that know the true distribution.
    pub fn exact(levels: Vec<f64>, probabilities: Vec<f64>, range: ScoreRange) -> Result<Self> {
        check_levels(&levels, range)?;
        if levels.len() != probabilities.len() {
            return Err(Error::LevelLengthMismatch {
                levels: levels.len(),
                probs: probabilities.len(),
            });
        }
        if let Some(&p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        if probabilities.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::NonMonotoneProbabilities);
        }
        Ok(Self {
            levels,
            p_lower: probabilities.clone(),
            p_upper: probabilities,
            range,
            epsilon: 0.0,
            budget: None,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn p_lower(&self) -> &[f64] {
        &self.p_lower
    }

    pub fn p_upper(&self) -> &[f64] {
        &self.p_upper
    }

    pub fn range(&self) -> ScoreRange {
        self.range
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn budget(&self) -> Option<&ConfidenceBudget> {
        self.budget.as_ref()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

fn check_levels(levels: &[f64], range: ScoreRange) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::NoLevels);
    }
    if let Some(&value) = levels.iter().find(|s| !range.contains_open(**s)) {
        return Err(Error::OutsideRange {
            value,
            a: range.a,
            b: range.b,
        });
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedLevels);
    }
    Ok(())
}

/// DKW-banded bounds at each level, with `epsilon = dkw_epsilon(budget)`.
pub fn cdf_bounds(
    samples: &ScalarSamples,
    levels: &[f64],
    budget: &ConfidenceBudget,
) -> Result<LevelBounds> {
    if samples.len() != budget.m() {
        return Err(Error::SampleCountMismatch {
            expected: budget.m(),
            actual: samples.len(),
        });
    }
    let mut bounds = cdf_bounds_with_epsilon(samples, levels, dkw_epsilon(budget))?;
    bounds.budget = Some(*budget);
    Ok(bounds)
}

/// Same as [`cdf_bounds`] with an explicit band half-width.
pub fn cdf_bounds_with_epsilon(
    samples: &ScalarSamples,
    levels: &[f64],
    epsilon: f64,
) -> Result<LevelBounds> {
    let range = samples.range();
    check_levels(levels, range)?;
    let mut sorted = samples.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;

    let mut p_lower = Vec::with_capacity(levels.len());
    let mut p_upper = Vec::with_capacity(levels.len());
    for &s in levels {
        let exceeding = sorted.len() - sorted.partition_point(|&v| v < s);
        let p_hat = exceeding as f64 / m;
        p_lower.push((p_hat - epsilon).clamp(0.0, 1.0));
        p_upper.push((p_hat + epsilon).clamp(0.0, 1.0));
    }
    // Repair ulp-level monotonicity breaks; this can only lower a bound.
    for j in 1..levels.len() {
        p_lower[j] = p_lower[j].min(p_lower[j - 1]);
        p_upper[j] = p_upper[j].min(p_upper[j - 1]);
    }

    Ok(LevelBounds {
        levels: levels.to_vec(),
        p_lower,
        p_upper,
        range,
        epsilon,
        budget: None,
    })
}
