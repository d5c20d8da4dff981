//! Confidence measures built from per-sample softmax vectors.
//!
//! Two measures are supported: the average prediction score of a class,
//! with scores in `(0, 1)`, and the margin `h_i - max_{j != i} h_j`, with
//! values in `(-1, 1)`. A per-sample margin never exceeds any pairwise gap
//! `h_i - h_j`. The sample mean of the margin therefore lower-bounds
//! the gap between the mean scores of class `i` and every other class.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::gauss::Sigma;

/// Scores numerically equal to 0 or 1 are moved this far into the open interval.
pub const BOUNDARY_NUDGE: f64 = 1e-12;

/// Maximum tolerated deviation of a softmax row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Open interval `(a, b)` that a scalar score lives in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRange {
    pub a: f64,
    pub b: f64,
}

impl ScoreRange {
    pub const UNIT: ScoreRange = ScoreRange { a: 0.0, b: 1.0 };
    pub const SIGNED_UNIT: ScoreRange = ScoreRange { a: -1.0, b: 1.0 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Self { a, b })
        } else {
            Err(Error::InvalidRange { a, b })
        }
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    #[inline]
    pub fn contains_open(&self, v: f64) -> bool {
        self.a < v && v < self.b
    }

    /// Moves a value lying on a closed endpoint strictly inside the range.
    pub fn nudge_inside(&self, v: f64) -> f64 {
        let step = BOUNDARY_NUDGE * self.width();
        v.clamp(self.a + step, self.b - step)
    }

    pub fn check_threshold(&self, c: f64) -> Result<()> {
        if self.contains_open(c) {
            Ok(())
        } else {
            Err(Error::InvalidThreshold {
                c,
                a: self.a,
                b: self.b,
            })
        }
    }

    pub fn as_tuple(&self) -> (f64, f64) {
        (self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    AverageScore,
    Margin,
}

impl MeasureKind {
    pub fn range(self) -> ScoreRange {
        match self {
            MeasureKind::AverageScore => ScoreRange::UNIT,
            MeasureKind::Margin => ScoreRange::SIGNED_UNIT,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::AverageScore => "average_score",
            MeasureKind::Margin => "margin",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `m x k` matrix of softmax scores, one row per noise draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSamples {
    scores: Vec<f64>,
    m: usize,
    k: usize,
    sigma: Sigma,
}

impl ScoreSamples {
    /// Validates a row-major score matrix.
    ///
    /// Rows must sum to 1 within [`ROW_SUM_TOLERANCE`] and entries must lie in
    /// `[0, 1]`; entries on either endpoint are nudged into the open interval.
    pub fn from_row_major(mut scores: Vec<f64>, k: usize, sigma: Sigma) -> Result<Self> {
        if k == 0 || !scores.len().is_multiple_of(k) {
            return Err(Error::RaggedMatrix {
                len: scores.len(),
                k,
            });
        }
        let m = scores.len() / k;
        if m < 2 {
            return Err(Error::TooFewSamples(m));
        }
        for (row, chunk) in scores.chunks_exact_mut(k).enumerate() {
            validate_row(row, chunk)?;
        }
        Ok(Self {
            scores,
            m,
            k,
            sigma,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], sigma: Sigma) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::RaggedMatrix { len: bad.len(), k });
        }
        Self::from_row_major(rows.concat(), k, sigma)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> Sigma {
        self.sigma
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.scores[j * self.k..(j + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.scores.chunks_exact(self.k)
    }

    /// Per-class sample means, accumulated row by row.
    pub fn column_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.k];
        for row in self.rows() {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums.iter().map(|s| s / self.m as f64).collect()
    }
}

/// Validates one softmax row in place, nudging saturated entries.
pub(crate) fn validate_row(row: usize, chunk: &mut [f64]) -> Result<()> {
    let mut sum = 0.0;
    for v in chunk.iter_mut() {
        if !(0.0..=1.0).contains(v) {
            return Err(Error::InvalidScore { row, value: *v });
        }
        sum += *v;
        *v = ScoreRange::UNIT.nudge_inside(*v);
    }
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::RowSum { row, sum });
    }
    Ok(())
}

/// Scalar confidence values for one class under one measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSamples {
    values: Vec<f64>,
    range: ScoreRange,
    measure: MeasureKind,
    class_index: usize,
}

impl ScalarSamples {
    /// Every value must lie strictly inside `range`.
    pub fn new(
        values: Vec<f64>,
        range: ScoreRange,
        measure: MeasureKind,
        class_index: usize,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        if let Some(&value) = values.iter().find(|v| !range.contains_open(**v)) {
            return Err(Error::OutsideRange {
                value,
                a: range.a,
                b: range.b,
            });
        }
        Ok(Self {
            values,
            range,
            measure,
            class_index,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn range(&self) -> ScoreRange {
        self.range
    }

    pub fn measure(&self) -> MeasureKind {
        self.measure
    }

    pub fn class_index(&self) -> usize {
        self.class_index
    }
}

/// Argmax of the per-class sample means. Ties go to the lowest class index.
pub fn predict_class(samples: &ScoreSamples) -> usize {
    let means = samples.column_means();
    let mut best = 0;
    for (i, &mean) in means.iter().enumerate().skip(1) {
        if mean > means[best] {
            best = i;
        }
    }
    best
}

pub fn extract_scalar(
    samples: &ScoreSamples,
    measure: MeasureKind,
    class_index: usize,
) -> Result<ScalarSamples> {
    let k = samples.k();
    if class_index >= k {
        return Err(Error::ClassIndex {
            index: class_index,
            k,
        });
    }
    let values = match measure {
        MeasureKind::AverageScore => samples.rows().map(|row| row[class_index]).collect(),
        MeasureKind::Margin => {
            if k < 2 {
                return Err(Error::MarginNeedsTwoClasses);
            }
            samples
                .rows()
                .map(|row| {
                    let runner_up = row
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != class_index)
                        .map(|(_, &v)| v)
                        .fold(f64::NEG_INFINITY, f64::max);
                    row[class_index] - runner_up
                })
                .collect()
        }
    };
    ScalarSamples::new(values, measure.range(), measure, class_index)
}

pub fn empirical_mean(samples: &ScalarSamples) -> f64 {
    samples.values.iter().sum::<f64>() / samples.values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sigma() -> Sigma {
        Sigma::new(0.25).unwrap()
    }

    fn samples(rows: &[Vec<f64>]) -> ScoreSamples {
        ScoreSamples::from_rows(rows, sigma()).unwrap()
    }

    #[test]
    fn predict_class_examples() {
        let s = samples(&[vec![0.6, 0.3, 0.1], vec![0.6, 0.3, 0.1]]);
        assert_eq!(predict_class(&s), 0);

        let s = samples(&[vec![0.4, 0.4, 0.2], vec![0.4, 0.4, 0.2]]);
        assert_eq!(predict_class(&s), 0);

        let s = samples(&[vec![0.1, 0.6, 0.3], vec![0.3, 0.4, 0.3]]);
        assert_eq!(predict_class(&s), 1);
    }

    #[test]
    fn extract_examples() {
        let s = samples(&[vec![0.6, 0.3, 0.1], vec![0.6, 0.3, 0.1]]);
        let margin = extract_scalar(&s, MeasureKind::Margin, 0).unwrap();
        assert!((margin.values()[0] - 0.3).abs() < 1e-15);
        assert_eq!(margin.range(), ScoreRange::SIGNED_UNIT);
        let margin = extract_scalar(&s, MeasureKind::Margin, 1).unwrap();
        assert!((margin.values()[0] + 0.3).abs() < 1e-15);
        let avg = extract_scalar(&s, MeasureKind::AverageScore, 0).unwrap();
        assert_eq!(avg.values(), &[0.6, 0.6]);
        assert_eq!(avg.range(), ScoreRange::UNIT);
        assert_eq!(avg.len(), 2);
    }

    #[test]
    fn extract_errors() {
        let s = samples(&[vec![0.6, 0.4], vec![0.5, 0.5]]);
        assert!(matches!(
            extract_scalar(&s, MeasureKind::AverageScore, 2),
            Err(Error::ClassIndex { index: 2, k: 2 })
        ));
        let single = samples(&[vec![1.0], vec![1.0]]);
        assert_eq!(
            extract_scalar(&single, MeasureKind::Margin, 0),
            Err(Error::MarginNeedsTwoClasses)
        );
        assert!(extract_scalar(&single, MeasureKind::AverageScore, 0).is_ok());
    }

    #[test]
    fn saturated_scores_are_nudged() {
        let s = samples(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(s.row(0), &[1.0 - 1e-12, 1e-12]);
        let margin = extract_scalar(&s, MeasureKind::Margin, 0).unwrap();
        assert!(margin.values().iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn row_validation() {
        let err = ScoreSamples::from_rows(&[vec![0.5, 0.5], vec![0.9, 0.6]], sigma()).unwrap_err();
        assert!(matches!(err, Error::RowSum { row: 1, .. }));
        let err = ScoreSamples::from_rows(&[vec![1.2, -0.2], vec![0.5, 0.5]], sigma()).unwrap_err();
        assert!(matches!(err, Error::InvalidScore { row: 0, .. }));
        // float32-level rounding is accepted
        assert!(ScoreSamples::from_rows(&[vec![0.3, 0.7 + 5e-7], vec![0.5, 0.5]], sigma()).is_ok());
        assert_eq!(
            ScoreSamples::from_rows(&[vec![0.5, 0.5]], sigma()),
            Err(Error::TooFewSamples(1))
        );
        assert!(ScoreSamples::from_rows(&[vec![0.5, 0.5], vec![1.0]], sigma()).is_err());
    }

    #[test]
    fn empirical_mean_examples() {
        let r = ScoreRange::UNIT;
        let mean = |v: Vec<f64>| {
            empirical_mean(&ScalarSamples::new(v, r, MeasureKind::AverageScore, 0).unwrap())
        };
        assert_eq!(mean(vec![0.5, 0.5]), 0.5);
        assert!((mean(vec![0.2, 0.4, 0.6]) - 0.4).abs() < 1e-15);
        let m = mean(vec![1e-12, 2e-12, 1e-12]);
        assert!(r.contains_open(m));
    }

    #[test]
    fn scalar_samples_reject_endpoints() {
        assert!(ScalarSamples::new(
            vec![0.0, 0.5],
            ScoreRange::UNIT,
            MeasureKind::AverageScore,
            0
        )
        .is_err());
        assert!(
            ScalarSamples::new(vec![], ScoreRange::UNIT, MeasureKind::AverageScore, 0).is_err()
        );
    }

    fn softmax_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..6).prop_flat_map(|k| {
            proptest::collection::vec(proptest::collection::vec(-4.0f64..4.0, k), 2..40).prop_map(
                |logits| {
                    logits
                        .into_iter()
                        .map(|row| {
                            let z: f64 = row.iter().map(|x| x.exp()).sum();
                            row.iter().map(|x| x.exp() / z).collect()
                        })
                        .collect()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn margin_dominates_mean_gap(rows in softmax_rows()) {
            let s = samples(&rows);
            let means = s.column_means();
            for i in 0..s.k() {
                let margin = empirical_mean(&extract_scalar(&s, MeasureKind::Margin, i).unwrap());
                for j in (0..s.k()).filter(|&j| j != i) {
                    prop_assert!(means[i] - means[j] >= margin - 1e-12);
                }
            }
        }

        #[test]
        fn extracted_values_stay_in_range(rows in softmax_rows()) {
            let s = samples(&rows);
            for i in 0..s.k() {
                for measure in [MeasureKind::AverageScore, MeasureKind::Margin] {
                    let x = extract_scalar(&s, measure, i).unwrap();
                    prop_assert_eq!(x.len(), s.m());
                    prop_assert!(x.values().iter().all(|v| measure.range().contains_open(*v)));
                }
            }
        }

        #[test]
        fn prediction_ignores_row_order(rows in softmax_rows(), rot in 0usize..40) {
            let mut shuffled = rows.clone();
            let len = shuffled.len();
            shuffled.rotate_left(rot % len);
            shuffled.reverse();
            let a = samples(&rows);
            let b = samples(&shuffled);
            // Means can differ in the last ulp under reordering, so only
            // compare when the winner is not a near tie.
            let means = a.column_means();
            let best = predict_class(&a);
            let clear = means.iter().enumerate().all(|(j, m)| j == best || means[best] - m > 1e-12);
            if clear {
                prop_assert_eq!(predict_class(&b), best);
            }
        }
    }
}
