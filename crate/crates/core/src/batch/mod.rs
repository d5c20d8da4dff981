//! File-driven certification: ingest samples, certify every input in
//! parallel, and write certificates as JSON lines.

mod config;
mod curve;
mod ingest;
mod synthetic;

pub use config::{
    CertifySettings, InputSource, RunConfig, DEFAULT_ALPHA, DEFAULT_LEVELS,
    DEFAULT_SYNTHETIC_SAMPLES,
};
pub use curve::{curve, parse_grid, read_jsonl, CurveRow, CurveTable};
pub use ingest::{
    ingest_samples, ingest_samples_strict, read_binary, read_csv, write_binary, write_csv,
    IngestError, IngestedInput, SampleFormat, BINARY_MAGIC, BINARY_VERSION,
};
pub use synthetic::{concentrated_logistic_suite, SyntheticInput, SyntheticSpec};

use rayon::prelude::*;
use std::io::{self, Write};
use std::path::PathBuf;
use thiserror::Error;

use crate::certify::{
    mean_to_probability, search_radius, BoundCurve, BoundSide, Certificate, Method,
};
use crate::concentration::{hoeffding_lower_mean, hoeffding_upper_mean, ConfidenceBudget};
use crate::error::Error;
use crate::gauss::Sigma;
use crate::levels::{cdf_bounds, select_levels};
use crate::measures::{empirical_mean, extract_scalar, predict_class, ScalarSamples, ScoreSamples};

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("no inputs found")]
    NoInputs,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Ingest(#[from] IngestError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] Error),
}

/// An input that could not be certified, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct InputFailure {
    pub input_id: String,
    pub message: String,
}

/// Certificates in input order, followed by per-input failures.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub certificates: Vec<Certificate>,
    pub failures: Vec<InputFailure>,
    pub inputs: usize,
}

enum Job {
    Ready(ScoreSamples),
    Failed(String),
    Synthetic {
        input: SyntheticInput,
        dimension: usize,
        stream: u64,
    },
}

/// Runs the full pipeline. File-level problems abort the run; a bad input
/// only fails that input.
pub fn certify_batch(config: &RunConfig) -> Result<BatchReport, BatchError> {
    let settings = &config.settings;
    settings.validate()?;

    let jobs: Vec<(String, Job)> = match &config.source {
        InputSource::SamplesFile { path, format } => ingest_samples(path, *format, settings.sigma)?
            .into_iter()
            .map(|input| {
                let job = match input.samples {
                    Ok(s) => Job::Ready(s),
                    Err(e) => Job::Failed(e.to_string()),
                };
                (input.id, job)
            })
            .collect(),
        InputSource::Samples(samples) => {
            if samples.is_empty() {
                return Err(BatchError::NoInputs);
            }
            samples
                .iter()
                .map(|(id, s)| {
                    let job = if s.sigma() == settings.sigma {
                        Job::Ready(s.clone())
                    } else {
                        Job::Failed(format!(
                            "samples drawn at sigma {} but the run uses {}",
                            s.sigma().value(),
                            settings.sigma.value()
                        ))
                    };
                    (id.clone(), job)
                })
                .collect()
        }
        InputSource::SyntheticFile(path) => synthetic_jobs(SyntheticSpec::load(path)?),
        InputSource::Synthetic(spec) => {
            if spec.inputs.is_empty() {
                return Err(BatchError::NoInputs);
            }
            synthetic_jobs(spec.clone())
        }
    };

    let seed = match config.source {
        InputSource::SyntheticFile(_) | InputSource::Synthetic(_) => Some(settings.seed),
        _ => None,
    };
    let inputs = jobs.len();
    let results: Vec<(String, Result<Vec<Certificate>, String>)> = jobs
        .into_par_iter()
        .map(|(id, job)| {
            let result = match job {
                Job::Failed(message) => Err(message),
                Job::Ready(samples) => {
                    certify_scores(&id, &samples, settings, seed).map_err(|e| e.to_string())
                }
                Job::Synthetic {
                    input,
                    dimension,
                    stream,
                } => input
                    .sample(dimension, settings.sigma, settings.m, settings.seed, stream)
                    .and_then(|samples| certify_scores(&id, &samples, settings, seed))
                    .map_err(|e| e.to_string()),
            };
            (id, result)
        })
        .collect();

    let mut report = BatchReport {
        certificates: Vec::new(),
        failures: Vec::new(),
        inputs,
    };
    for (input_id, result) in results {
        match result {
            Ok(certs) => report.certificates.extend(certs),
            Err(message) => report.failures.push(InputFailure { input_id, message }),
        }
    }
    Ok(report)
}

fn synthetic_jobs(spec: SyntheticSpec) -> Vec<(String, Job)> {
    let dimension = spec.dimension;
    spec.inputs
        .into_iter()
        .enumerate()
        .map(|(i, input)| {
            let id = input.id.clone();
            let job = Job::Synthetic {
                input,
                dimension,
                stream: i as u64,
            };
            (id, job)
        })
        .collect()
}

/// Certificates for one input: every measure × method × side × threshold,
/// in that nesting order.
pub fn certify_scores(
    input_id: &str,
    samples: &ScoreSamples,
    settings: &CertifySettings,
    seed: Option<u64>,
) -> Result<Vec<Certificate>, Error> {
    let search = settings.search()?;
    let class = predict_class(samples);
    let budget = ConfidenceBudget::new(settings.alpha, samples.m())?;
    let sigma = settings.sigma;
    let mut sides = vec![BoundSide::Lower];
    if settings.upper {
        sides.push(BoundSide::Upper);
    }

    let mut out = Vec::new();
    for &measure in &settings.measures {
        let scalar = extract_scalar(samples, measure, class)?;
        let range = scalar.range();
        for &method in &settings.methods {
            let mut effective_levels = None;
            let curves = match method {
                Method::Naive => {
                    let bounds = (
                        hoeffding_lower_mean(scalar.values(), &budget, range.as_tuple())?,
                        hoeffding_upper_mean(scalar.values(), &budget, range.as_tuple())?,
                    );
                    naive_curves(&sides, bounds, &scalar, sigma)
                }
                Method::BestBaseline => {
                    let mean = empirical_mean(&scalar);
                    naive_curves(&sides, (mean, mean), &scalar, sigma)
                }
                Method::Cdf => {
                    let levels = select_levels(&scalar, settings.n_levels)?;
                    let bounds = cdf_bounds(&scalar, &levels, &budget)?;
                    effective_levels = Some(bounds.len());
                    sides
                        .iter()
                        .map(|side| match side {
                            BoundSide::Lower => BoundCurve::CdfLower {
                                bounds: bounds.clone(),
                                sigma,
                            },
                            BoundSide::Upper => BoundCurve::CdfUpper {
                                bounds: bounds.clone(),
                                sigma,
                            },
                        })
                        .collect()
                }
            };
            for curve in &curves {
                for &threshold in &settings.thresholds {
                    let outcome = search_radius(curve, threshold, &search)?;
                    out.push(Certificate {
                        input_id: input_id.to_string(),
                        measure,
                        predicted_class: class,
                        method,
                        bound: curve.side(),
                        threshold,
                        radius: outcome.radius,
                        bound_at_zero: outcome.bound_at_zero,
                        sigma: sigma.value(),
                        alpha: settings.alpha,
                        m: samples.m(),
                        n_levels: settings.n_levels,
                        effective_levels,
                        tau: search.tau(),
                        r_max: search.r_max(),
                        seed,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn naive_curves(
    sides: &[BoundSide],
    (lower_mean, upper_mean): (f64, f64),
    scalar: &ScalarSamples,
    sigma: Sigma,
) -> Vec<BoundCurve> {
    let range = scalar.range();
    sides
        .iter()
        .map(|side| match side {
            BoundSide::Lower => BoundCurve::NaiveLower {
                p: mean_to_probability(lower_mean, range),
                range,
                sigma,
            },
            BoundSide::Upper => BoundCurve::NaiveUpper {
                p: mean_to_probability(upper_mean, range),
                range,
                sigma,
            },
        })
        .collect()
}

/// One JSON object per line, in slice order.
pub fn write_jsonl<W: Write>(mut writer: W, certificates: &[Certificate]) -> io::Result<()> {
    for cert in certificates {
        serde_json::to_writer(&mut writer, cert)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::MeasureKind;
    use crate::oracle::ClassifierKind;

    fn sigma() -> Sigma {
        Sigma::new(0.25).unwrap()
    }

    fn two_inputs() -> Vec<(String, ScoreSamples)> {
        let good: Vec<Vec<f64>> = (0..200)
            .map(|j| {
                let g = 0.7 + 0.1 * ((j % 7) as f64 / 7.0);
                vec![g, 1.0 - g]
            })
            .collect();
        let elsewhere = Sigma::new(0.5).unwrap();
        vec![
            ("a".into(), ScoreSamples::from_rows(&good, sigma()).unwrap()),
            (
                "b".into(),
                ScoreSamples::from_rows(&good, elsewhere).unwrap(),
            ),
        ]
    }

    #[test]
    fn certificate_grid_order() {
        let mut settings = CertifySettings::new(sigma(), vec![0.5, 0.6]);
        settings.methods = vec![Method::Naive, Method::Cdf, Method::BestBaseline];
        settings.upper = true;
        settings.alpha = 0.05;
        let (_, samples) = &two_inputs()[0];
        let certs = certify_scores("a", samples, &settings, None).unwrap();
        assert_eq!(certs.len(), 3 * 2 * 2);
        assert_eq!(certs[0].method, Method::Naive);
        assert_eq!(certs[0].bound, BoundSide::Lower);
        assert_eq!(certs[1].threshold, 0.6);
        assert_eq!(certs[2].bound, BoundSide::Upper);
        assert_eq!(certs[4].method, Method::Cdf);
        assert!(certs[4].effective_levels.is_some());
        assert!(certs[0].effective_levels.is_none());
        for cert in &certs {
            assert_eq!(cert.m, 200);
            assert_eq!(cert.predicted_class, 0);
            assert_eq!(cert.measure, MeasureKind::AverageScore);
        }
    }

    #[test]
    fn failing_input_does_not_stop_batch() {
        let mut settings = CertifySettings::new(sigma(), vec![0.5]);
        settings.alpha = 0.05;
        let config = RunConfig::new(InputSource::Samples(two_inputs()), settings);
        let report = certify_batch(&config).unwrap();
        assert_eq!(report.inputs, 2);
        assert_eq!(report.certificates.len(), 2);
        assert!(report.certificates.iter().all(|c| c.input_id == "a"));
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].input_id, "b");
    }

    #[test]
    fn synthetic_runs_are_deterministic() {
        let spec = SyntheticSpec {
            dimension: 8,
            inputs: (0..6)
                .map(|i| SyntheticInput {
                    id: format!("x{i}"),
                    classifier: ClassifierKind::LogisticHalfSpace {
                        direction: vec![1.0; 8],
                        offset: -0.1 * i as f64,
                        temperature: 0.5,
                    },
                    center: None,
                })
                .collect(),
        };
        let mut settings = CertifySettings::new(sigma(), vec![0.5]);
        settings.m = 2_000;
        settings.seed = 11;
        let config = RunConfig::new(InputSource::Synthetic(spec), settings);
        let first = certify_batch(&config).unwrap();
        let second = certify_batch(&config).unwrap();
        assert_eq!(first, second);
        let ids: Vec<&str> = first
            .certificates
            .iter()
            .map(|c| c.input_id.as_str())
            .collect();
        assert_eq!(
            ids,
            ["x0", "x0", "x1", "x1", "x2", "x2", "x3", "x3", "x4", "x4", "x5", "x5"]
        );
        assert!(first.certificates.iter().all(|c| c.seed == Some(11)));

        let mut a = Vec::new();
        let mut b = Vec::new();
        write_jsonl(&mut a, &first.certificates).unwrap();
        write_jsonl(&mut b, &second.certificates).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|&&c| c == b'\n').count(), 12);
    }

    #[test]
    fn sigma_mismatch_fails_input() {
        let settings = CertifySettings::new(Sigma::new(0.5).unwrap(), vec![0.5]);
        let config = RunConfig::new(InputSource::Samples(two_inputs()), settings);
        let report = certify_batch(&config).unwrap();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].input_id, "a");
    }

    #[test]
    fn empty_sources_rejected() {
        let settings = CertifySettings::new(sigma(), vec![0.5]);
        let config = RunConfig::new(InputSource::Samples(vec![]), settings);
        assert!(matches!(certify_batch(&config), Err(BatchError::NoInputs)));
    }
}
