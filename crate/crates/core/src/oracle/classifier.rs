use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{std_normal_cdf, std_normal_quantile, Sigma};
use crate::measures::ScoreRange;

/// Analytic score functions with known smoothed behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierKind {
    /// Constant score `value`.
    Flat { value: f64 },
    /// `a + (b - a)·logistic((uᵀz - offset) / temperature)`, increasing along `u`.
    LogisticHalfSpace {
        direction: Vec<f64>,
        offset: f64,
        temperature: f64,
    },
    /// Staircase that is non-increasing along `u`. With `y = uᵀz`, the score
    /// is `b` when `y < top_cutoff`, otherwise `s_J` where `J` counts the
    /// cutoffs with `y < cutoffs[j]`, and `a` when `J = 0`. Cutoffs are
    /// non-increasing, so `{score >= s_j} = {y < cutoffs[j]}`.
    WorstCaseStep {
        direction: Vec<f64>,
        levels: Vec<f64>,
        cutoffs: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        top_cutoff: Option<f64>,
    },
    /// Gaussian bump `a + (b - a)·exp(-‖z - center‖² / 2w²)`. Not a
    /// function of a single projection.
    Radial { center: Vec<f64>, width: f64 },
}

/// A synthetic base classifier for one class score.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticClassifier {
    kind: ClassifierKind,
    dimension: usize,
    range: ScoreRange,
}

/// Score as a function of the projection `uᵀz`, for classifiers that have one.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Profile<'a> {
    Constant(f64),
    Logistic {
        offset: f64,
        temperature: f64,
    },
    Step {
        levels: &'a [f64],
        cutoffs: &'a [f64],
        top_cutoff: Option<f64>,
    },
}

impl SyntheticClassifier {
    /// Validates the parameters and normalizes direction vectors.
    pub fn new(mut kind: ClassifierKind, dimension: usize, range: ScoreRange) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dimension must be positive"));
        }
        match &mut kind {
            ClassifierKind::Flat { value } => {
                if !range.contains_open(*value) {
                    return Err(invalid(format!("flat value {value} outside the range")));
                }
            }
            ClassifierKind::LogisticHalfSpace {
                direction,
                offset,
                temperature,
            } => {
                normalize(direction, dimension)?;
                if !offset.is_finite() || !(*temperature > 0.0 && temperature.is_finite()) {
                    return Err(invalid(
                        "logistic needs a finite offset and positive temperature",
                    ));
                }
            }
            ClassifierKind::WorstCaseStep {
                direction,
                levels,
                cutoffs,
                top_cutoff,
            } => {
                normalize(direction, dimension)?;
                if levels.is_empty() || levels.len() != cutoffs.len() {
                    return Err(invalid("step needs one cutoff per level"));
                }
                if levels.iter().any(|s| !range.contains_open(*s))
                    || levels.windows(2).any(|w| w[1] < w[0])
                {
                    return Err(invalid("step levels must be sorted inside the range"));
                }
                if cutoffs.iter().any(|c| c.is_nan()) || cutoffs.windows(2).any(|w| w[1] > w[0]) {
                    return Err(invalid("step cutoffs must be non-increasing"));
                }
                if let Some(top) = top_cutoff {
                    if top.is_nan() || *top > *cutoffs.last().unwrap() {
                        return Err(invalid("top cutoff must not exceed the last cutoff"));
                    }
                }
            }
            ClassifierKind::Radial { center, width } => {
                if center.len() != dimension {
                    return Err(Error::DimensionMismatch {
                        expected: dimension,
                        actual: center.len(),
                    });
                }
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(invalid("radial width must be positive"));
                }
            }
        }
        Ok(Self {
            kind,
            dimension,
            range,
        })
    }

    pub fn flat(value: f64, dimension: usize, range: ScoreRange) -> Result<Self> {
        Self::new(ClassifierKind::Flat { value }, dimension, range)
    }

    pub fn logistic(
        direction: Vec<f64>,
        offset: f64,
        temperature: f64,
        range: ScoreRange,
    ) -> Result<Self> {
        let dimension = direction.len();
        Self::new(
            ClassifierKind::LogisticHalfSpace {
                direction,
                offset,
                temperature,
            },
            dimension,
            range,
        )
    }

    /// The staircase that attains the CDF lower bound with equality.
    ///
    /// Places `cutoffs[j] = uᵀx + σΦ⁻¹(p_j)` so that `P(score >= s_j) = p_j`
    /// under noise centred at `center`. Moving the centre a distance `R`
    /// along `u` then turns every `p_j` into `Φ(Φ⁻¹(p_j) - R/σ)`.
    pub fn worst_case_lower(
        levels: Vec<f64>,
        probabilities: &[f64],
        direction: Vec<f64>,
        center: &[f64],
        sigma: Sigma,
        range: ScoreRange,
    ) -> Result<Self> {
        let dimension = direction.len();
        if center.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: center.len(),
            });
        }
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        let along = dot(&direction, center) / norm;
        let cutoffs = probabilities
            .iter()
            .map(|&p| Ok(along + sigma.value() * std_normal_quantile(p)?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            ClassifierKind::WorstCaseStep {
                direction,
                levels,
                cutoffs,
                top_cutoff: None,
            },
            dimension,
            range,
        )
    }

    pub fn kind(&self) -> &ClassifierKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn range(&self) -> ScoreRange {
        self.range
    }

    /// Unit direction for half-space classifiers.
    pub fn direction(&self) -> Option<&[f64]> {
        match &self.kind {
            ClassifierKind::LogisticHalfSpace { direction, .. }
            | ClassifierKind::WorstCaseStep { direction, .. } => Some(direction),
            _ => None,
        }
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[f64]) -> f64 {
        match &self.kind {
            ClassifierKind::Radial { center, width } => {
                let d2: f64 = point
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum();
                self.range.a + self.range.width() * (-d2 / (2.0 * width * width)).exp()
            }
            _ => {
                let y = self.direction().map_or(0.0, |u| dot(u, point));
                self.profile_value(y)
            }
        }
    }

    pub(crate) fn profile(&self) -> Option<Profile<'_>> {
        match &self.kind {
            ClassifierKind::Flat { value } => Some(Profile::Constant(*value)),
            ClassifierKind::LogisticHalfSpace {
                offset,
                temperature,
                ..
            } => Some(Profile::Logistic {
                offset: *offset,
                temperature: *temperature,
            }),
            ClassifierKind::WorstCaseStep {
                levels,
                cutoffs,
                top_cutoff,
                ..
            } => Some(Profile::Step {
                levels,
                cutoffs,
                top_cutoff: *top_cutoff,
            }),
            ClassifierKind::Radial { .. } => None,
        }
    }

    /// Score at projection `y = uᵀz`. Radial classifiers have no profile.
    pub(crate) fn profile_value(&self, y: f64) -> f64 {
        let (a, b) = self.range.as_tuple();
        match self.profile() {
            Some(Profile::Constant(v)) => v,
            Some(Profile::Logistic {
                offset,
                temperature,
            }) => a + (b - a) * logistic((y - offset) / temperature),
            Some(Profile::Step {
                levels,
                cutoffs,
                top_cutoff,
            }) => {
                if top_cutoff.is_some_and(|t| y < t) {
                    return b;
                }
                // cutoffs are non-increasing, so {j : y < cutoffs[j]} is a prefix.
                let count = cutoffs.partition_point(|&c| y < c);
                if count == 0 {
                    a
                } else {
                    levels[count - 1]
                }
            }
            None => f64::NAN,
        }
    }

    /// Projection of a point onto the classifier direction (0 for flat).
    pub fn projection(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: point.len(),
            });
        }
        match self.profile() {
            None => Err(Error::NotOneDimensional),
            Some(_) => Ok(self.direction().map_or(0.0, |u| dot(u, point))),
        }
    }

    /// Exact `P(score(center + δ) >= s)` for `δ ~ N(0, σ² I)`.
    pub fn exceedance_probability(&self, center: &[f64], sigma: Sigma, s: f64) -> Result<f64> {
        let mu = self.projection(center)?;
        let (a, b) = self.range.as_tuple();
        // P(y < c) and P(y >= c) for y ~ N(mu, σ²)
        let below = |c: f64| std_normal_cdf((c - mu) / sigma.value());
        let above = |c: f64| std_normal_cdf((mu - c) / sigma.value());
        Ok(match self.profile().ok_or(Error::NotOneDimensional)? {
            Profile::Constant(v) => {
                if v >= s {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Logistic {
                offset,
                temperature,
            } => {
                let q = (s - a) / (b - a);
                if q <= 0.0 {
                    1.0
                } else if q >= 1.0 {
                    0.0
                } else {
                    above(offset + temperature * (q / (1.0 - q)).ln())
                }
            }
            Profile::Step {
                levels,
                cutoffs,
                top_cutoff,
            } => {
                if s <= a {
                    1.0
                } else if s > b {
                    0.0
                } else {
                    let j = levels.partition_point(|&l| l < s);
                    if j < levels.len() {
                        below(cutoffs[j])
                    } else {
                        top_cutoff.map_or(0.0, below)
                    }
                }
            }
        })
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidClassifier(msg.into())
}

fn normalize(direction: &mut [f64], dimension: usize) -> Result<()> {
    if direction.len() != dimension {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            actual: direction.len(),
        });
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(invalid("direction must be a non-zero finite vector"));
    }
    direction.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}
