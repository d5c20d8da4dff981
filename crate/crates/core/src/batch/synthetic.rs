//! JSON specification of synthetic inputs.
//!
//! ```json
//! {
//!   "dimension": 16,
//!   "inputs": [
//!     {"id": "flat", "classifier": {"kind": "flat", "value": 0.55}},
//!     {"id": "tilted",
//!      "classifier": {"kind": "logistic_half_space", "direction": [1, 0, ...],
//!                     "offset": -0.5, "temperature": 1.0},
//!      "center": [0.1, 0, ...]}
//!   ]
//! }
//! ```
//!
//! Every synthetic classifier scores class 0 in `(0, 1)`. A draw with score
//! `g` becomes the two-class softmax row `(g, 1 - g)`.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::batch::BatchError;
use crate::error::Result;
use crate::gauss::Sigma;
use crate::measures::{ScoreRange, ScoreSamples};
use crate::oracle::{ClassifierKind, NoiseSampler, SyntheticClassifier};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub dimension: usize,
    pub inputs: Vec<SyntheticInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticInput {
    pub id: String,
    pub classifier: ClassifierKind,
    /// Defaults to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

impl SyntheticSpec {
    pub fn load(path: &Path) -> Result<Self, BatchError> {
        let text = fs::read_to_string(path).map_err(|source| BatchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, BatchError> {
        let spec: SyntheticSpec = serde_json::from_str(text)?;
        if spec.inputs.is_empty() {
            return Err(BatchError::NoInputs);
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

impl SyntheticInput {
    pub fn classifier(&self, dimension: usize) -> Result<SyntheticClassifier> {
        SyntheticClassifier::new(self.classifier.clone(), dimension, ScoreRange::UNIT)
    }

    pub fn center(&self, dimension: usize) -> Vec<f64> {
        self.center.clone().unwrap_or_else(|| vec![0.0; dimension])
    }

    /// Draws `m` noisy evaluations on stream `stream` of `seed`.
    pub fn sample(
        &self,
        dimension: usize,
        sigma: Sigma,
        m: usize,
        seed: u64,
        stream: u64,
    ) -> Result<ScoreSamples> {
        let classifier = self.classifier(dimension)?;
        let center = self.center(dimension);
        let mut sampler = NoiseSampler::with_stream(sigma, dimension, seed, stream);
        let scores = crate::oracle::sample_scores(&classifier, &center, &mut sampler, m)?;
        let rows: Vec<f64> = scores.values().iter().flat_map(|&g| [g, 1.0 - g]).collect();
        ScoreSamples::from_row_major(rows, 2, sigma)
    }
}

/// Logistic half-space inputs whose scores concentrate around a target mean.
///
/// Each input gets a random unit direction, a temperature in `[0.5, 2]` and
/// an offset placing the score at the origin uniformly in `[0.55, 0.95]`.
/// Under noise with σ well below the temperature, the scores barely move.
pub fn concentrated_logistic_suite(count: usize, dimension: usize, seed: u64) -> SyntheticSpec {
    let unit = Sigma::new(1.0).expect("unit sigma");
    let mut rng = NoiseSampler::new(unit, dimension, seed);
    let inputs = (0..count)
        .map(|i| {
            let direction: Vec<f64> = (0..dimension).map(|_| rng.standard_normal()).collect();
            let temperature = 0.5 + 1.5 * rng.uniform();
            let target = 0.55 + 0.4 * rng.uniform();
            let offset = -temperature * (target / (1.0 - target)).ln();
            SyntheticInput {
                id: format!("logistic-{i:04}"),
                classifier: ClassifierKind::LogisticHalfSpace {
                    direction,
                    offset,
                    temperature,
                },
                center: None,
            }
        })
        .collect();
    SyntheticSpec { dimension, inputs }
}
