//! Finite-sample corrections: the DKW band half-width used by the CDF
//! certificate and the Hoeffding margin used by the mean-based baseline.
//!
//! Each certificate spends its whole failure probability `alpha` on a single
//! event. DKW is uniform over all levels, so one band covers every level of a
//! certificate at once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Failure probability `alpha` together with the number of noise samples `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBudget {
    alpha: f64,
    m: usize,
}

impl ConfidenceBudget {
    pub fn new(alpha: f64, m: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        if m < 2 {
            return Err(Error::TooFewSamples(m));
        }
        Ok(Self { alpha, m })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// DKW half-width `sqrt(ln(2/alpha) / 2m)`.
pub fn dkw_epsilon(budget: &ConfidenceBudget) -> f64 {
    ((2.0 / budget.alpha).ln() / (2.0 * budget.m as f64)).sqrt()
}

/// One-sided Hoeffding margin `(b - a) sqrt(ln(1/alpha) / 2m)`.
pub fn hoeffding_margin(budget: &ConfidenceBudget, range_width: f64) -> f64 {
    // -ln(alpha) instead of ln(1/alpha): 1/alpha rounds to 1.0 as alpha -> 1.
    range_width * (-budget.alpha.ln() / (2.0 * budget.m as f64)).sqrt()
}

/// Hoeffding lower confidence bound on the mean of samples drawn from `[a, b]`.
///
/// The result may fall below `a`; callers clamp before converting it into a
/// probability.
pub fn hoeffding_lower_mean(
    samples: &[f64],
    budget: &ConfidenceBudget,
    range: (f64, f64),
) -> Result<f64> {
    let mean = checked_mean(samples, budget, range)?;
    Ok(mean - hoeffding_margin(budget, range.1 - range.0))
}

/// Mirror image of [`hoeffding_lower_mean`].
pub fn hoeffding_upper_mean(
    samples: &[f64],
    budget: &ConfidenceBudget,
    range: (f64, f64),
) -> Result<f64> {
    let mean = checked_mean(samples, budget, range)?;
    Ok(mean + hoeffding_margin(budget, range.1 - range.0))
}

fn checked_mean(samples: &[f64], budget: &ConfidenceBudget, (a, b): (f64, f64)) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidRange { a, b });
    }
    if samples.len() != budget.m {
        return Err(Error::SampleCountMismatch {
            expected: budget.m,
            actual: samples.len(),
        });
    }
    if let Some(&value) = samples.iter().find(|v| !(a..=b).contains(*v)) {
        return Err(Error::OutsideRange { value, a, b });
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn budget(alpha: f64, m: usize) -> ConfidenceBudget {
        ConfidenceBudget::new(alpha, m).unwrap()
    }

    #[test]
    fn budget_validation() {
        assert!(ConfidenceBudget::new(0.0, 10).is_err());
        assert!(ConfidenceBudget::new(1.0, 10).is_err());
        assert!(ConfidenceBudget::new(f64::NAN, 10).is_err());
        assert!(ConfidenceBudget::new(0.01, 1).is_err());
        assert!(ConfidenceBudget::new(0.01, 2).is_ok());
    }

    // Golden values from oracles/golden_values.py (mpmath, 50 digits).
    #[test]
    fn dkw_examples() {
        assert!((dkw_epsilon(&budget(0.001, 100_000)) - 0.006_164_779_987_778_186).abs() < 1e-15);
        let alpha = 2.0 * (-2.0f64).exp();
        assert!((dkw_epsilon(&budget(alpha, 50)) - 0.141_421_356_237_309_5).abs() < 1e-14);
        assert!((dkw_epsilon(&budget(1.0 - 1e-12, 10)) - 0.186_164_870_553_086).abs() < 1e-12);
    }

    #[test]
    fn hoeffding_examples() {
        let samples = vec![0.5; 100_000];
        let b = budget(0.001, 100_000);
        let lower = hoeffding_lower_mean(&samples, &b, (0.0, 1.0)).unwrap();
        assert!((lower - 0.494_123_029_998_808).abs() < 1e-12);

        // alpha -> 1 shrinks the correction to zero.
        let lower = hoeffding_lower_mean(&[0.2, 0.4], &budget(1.0 - 1e-15, 2), (0.0, 1.0)).unwrap();
        assert!((lower - 0.3).abs() < 1e-7);

        let short = [0.3, 0.7, 0.5, 0.9];
        let b = budget(0.05, 4);
        let narrow = 0.6 - hoeffding_lower_mean(&short, &b, (0.0, 1.0)).unwrap();
        let wide = 0.6 - hoeffding_lower_mean(&short, &b, (0.0, 2.0)).unwrap();
        assert!((wide / narrow - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hoeffding_errors() {
        let b = budget(0.05, 2);
        assert_eq!(
            hoeffding_lower_mean(&[], &b, (0.0, 1.0)),
            Err(Error::EmptySamples)
        );
        assert!(matches!(
            hoeffding_lower_mean(&[0.5, 0.5, 0.5], &b, (0.0, 1.0)),
            Err(Error::SampleCountMismatch {
                expected: 2,
                actual: 3
            })
        ));
        assert!(matches!(
            hoeffding_lower_mean(&[0.5, 1.5], &b, (0.0, 1.0)),
            Err(Error::OutsideRange { .. })
        ));
    }

    proptest! {
        #[test]
        fn dkw_decreases_in_m(alpha in 1e-6f64..0.99, m in 2usize..1_000_000) {
            prop_assert!(dkw_epsilon(&budget(alpha, m + 1)) < dkw_epsilon(&budget(alpha, m)));
        }

        #[test]
        fn dkw_grows_as_alpha_shrinks(alpha in 1e-6f64..0.99, m in 2usize..1_000_000) {
            prop_assert!(dkw_epsilon(&budget(alpha * 0.5, m)) > dkw_epsilon(&budget(alpha, m)));
        }

        #[test]
        fn hoeffding_never_exceeds_mean(values in proptest::collection::vec(0.0f64..1.0, 2..200), alpha in 1e-6f64..0.99) {
            let b = budget(alpha, values.len());
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            prop_assert!(hoeffding_lower_mean(&values, &b, (0.0, 1.0)).unwrap() <= mean);
            prop_assert!(hoeffding_upper_mean(&values, &b, (0.0, 1.0)).unwrap() >= mean);
        }
    }
}
