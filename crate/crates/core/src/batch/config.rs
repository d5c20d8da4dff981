use std::path::{Path, PathBuf};

use crate::batch::ingest::SampleFormat;
use crate::batch::synthetic::SyntheticSpec;
use crate::batch::BatchError;
use crate::certify::{Method, SearchParams};
use crate::concentration::ConfidenceBudget;
use crate::gauss::Sigma;
use crate::measures::{MeasureKind, ScoreSamples};

pub const DEFAULT_ALPHA: f64 = 0.001;
pub const DEFAULT_SYNTHETIC_SAMPLES: usize = 100_000;
pub const DEFAULT_LEVELS: usize = 100;

/// Where the score samples come from.
#[derive(Debug, Clone)]
pub enum InputSource {
    SamplesFile {
        path: PathBuf,
        format: SampleFormat,
    },
    SyntheticFile(PathBuf),
    Synthetic(SyntheticSpec),
    /// Already-loaded samples, keyed by input id.
    Samples(Vec<(String, ScoreSamples)>),
}

impl InputSource {
    /// Samples file with the format inferred from the extension.
    pub fn samples_file(path: impl AsRef<Path>) -> Self {
        let path = path.as_ref().to_path_buf();
        let format = SampleFormat::from_path(&path);
        InputSource::SamplesFile { path, format }
    }
}

/// Numeric settings shared by every certificate in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifySettings {
    pub sigma: Sigma,
    pub alpha: f64,
    /// Noise samples per input; only used for synthetic inputs.
    pub m: usize,
    pub n_levels: usize,
    pub measures: Vec<MeasureKind>,
    pub thresholds: Vec<f64>,
    pub methods: Vec<Method>,
    pub tau: f64,
    /// Search ceiling; `None` means 50σ.
    pub r_max: Option<f64>,
    pub seed: u64,
    /// Also emit upper-bound certificates.
    pub upper: bool,
}

impl CertifySettings {
    pub fn new(sigma: Sigma, thresholds: Vec<f64>) -> Self {
        Self {
            sigma,
            alpha: DEFAULT_ALPHA,
            m: DEFAULT_SYNTHETIC_SAMPLES,
            n_levels: DEFAULT_LEVELS,
            measures: vec![MeasureKind::AverageScore],
            thresholds,
            methods: vec![Method::Naive, Method::Cdf],
            tau: SearchParams::DEFAULT_TAU,
            r_max: None,
            seed: 0,
            upper: false,
        }
    }

    pub fn search(&self) -> crate::error::Result<SearchParams> {
        let r_max = self
            .r_max
            .unwrap_or(SearchParams::DEFAULT_CEILING_IN_SIGMAS * self.sigma.value());
        SearchParams::new(self.tau, r_max)
    }

    pub fn validate(&self) -> Result<(), BatchError> {
        let fail = |msg: String| Err(BatchError::Config(msg));
        if self.measures.is_empty() {
            return fail("at least one measure is required".into());
        }
        if self.methods.is_empty() {
            return fail("at least one method is required".into());
        }
        if self.thresholds.is_empty() {
            return fail("at least one threshold is required".into());
        }
        if self.n_levels == 0 {
            return fail("the number of levels must be positive".into());
        }
        ConfidenceBudget::new(self.alpha, self.m.max(2))?;
        self.search()?;
        for measure in &self.measures {
            for &c in &self.thresholds {
                measure.range().check_threshold(c)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: InputSource,
    pub settings: CertifySettings,
}

impl RunConfig {
    pub fn new(source: InputSource, settings: CertifySettings) -> Self {
        Self { source, settings }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> CertifySettings {
        CertifySettings::new(Sigma::new(0.25).unwrap(), vec![0.5])
    }

    #[test]
    fn defaults() {
        let s = settings();
        assert_eq!(s.alpha, 0.001);
        assert_eq!(s.m, 100_000);
        assert_eq!(s.n_levels, 100);
        assert_eq!(s.search().unwrap().r_max(), 12.5);
        assert_eq!(s.search().unwrap().tau(), 1e-4);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn thresholds_checked_per_measure() {
        let mut s = settings();
        s.thresholds = vec![-0.2];
        assert!(s.validate().is_err());
        s.measures = vec![MeasureKind::Margin];
        assert!(s.validate().is_ok());
        s.measures.push(MeasureKind::AverageScore);
        assert!(s.validate().is_err());
    }

    #[test]
    fn empty_lists_rejected() {
        let mut s = settings();
        s.methods.clear();
        assert!(s.validate().is_err());
        let mut s = settings();
        s.thresholds.clear();
        assert!(s.validate().is_err());
        let mut s = settings();
        s.tau = 100.0;
        assert!(s.validate().is_err());
    }
}
