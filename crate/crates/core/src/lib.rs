//! Certified confidence bounds for Gaussian-smoothed classifiers.
//!
//! Given base-classifier scores sampled under Gaussian noise, the crate
//! bounds the smoothed expected score of the predicted class under every
//! l2 perturbation of norm `R`. It also finds the largest `R` at which
//! that score provably stays above a threshold. Two certificates are provided:
//!
//! * a mean-based bound that only uses a confidence bound on the expected
//!   score ([`certify::naive_lower`]);
//! * a CDF-based bound that uses DKW-banded exceedance probabilities at a
//!   set of score levels ([`certify::cdf_lower`]).
//!
//! The [`oracle`] module holds synthetic classifiers whose smoothed behaviour
//! is known exactly, and [`batch`] is the file-driven pipeline behind the CLI.

pub mod batch;
pub mod certify;
pub mod concentration;
pub mod error;
pub mod gauss;
pub mod levels;
pub mod measures;
pub mod oracle;

pub use certify::{BoundCurve, BoundSide, Certificate, Method, Radius, SearchParams};
pub use concentration::ConfidenceBudget;
pub use error::{Error, Result};
pub use gauss::Sigma;
pub use levels::LevelBounds;
pub use measures::{MeasureKind, ScalarSamples, ScoreRange, ScoreSamples};
