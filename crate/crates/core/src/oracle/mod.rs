//! Ground truth for validating certificates: synthetic base classifiers,
//! a reproducible Gaussian sampler, and estimators of the smoothed mean.

mod classifier;
pub mod quadrature;
mod sampler;

pub use classifier::{ClassifierKind, SyntheticClassifier};
pub use sampler::NoiseSampler;

use classifier::Profile;

use crate::error::{Error, Result};
use crate::gauss::{std_normal_cdf, std_normal_pdf, Sigma};
use crate::measures::{MeasureKind, ScalarSamples};

/// Half-width, in standard deviations, of the quadrature window.
const WINDOW: f64 = 10.0;
const QUADRATURE_TOL: f64 = 1e-12;

/// Draws `m` scores at `center + δ_j` and wraps them as average-score samples
/// for class 0. Scores on the closed endpoints are nudged inside the range.
pub fn sample_scores(
    classifier: &SyntheticClassifier,
    center: &[f64],
    sampler: &mut NoiseSampler,
    m: usize,
) -> Result<ScalarSamples> {
    if m < 2 {
        return Err(Error::TooFewSamples(m));
    }
    let range = classifier.range();
    let values = draw(classifier, center, sampler, m)?
        .map(|v| range.nudge_inside(v))
        .collect();
    ScalarSamples::new(values, range, MeasureKind::AverageScore, 0)
}

/// Sample mean and standard error of `score(center + δ)`.
pub fn mc_smoothed_mean(
    classifier: &SyntheticClassifier,
    center: &[f64],
    sampler: &mut NoiseSampler,
    m: usize,
) -> Result<(f64, f64)> {
    if m < 100 {
        return Err(Error::TooFewSamples(m));
    }
    // Shifted accumulation keeps the variance accurate for tight scores.
    let mut iter = draw(classifier, center, sampler, m)?;
    let shift = iter.next().unwrap_or(0.0);
    let (mut sum, mut sq) = (0.0, 0.0);
    for v in iter {
        let d = v - shift;
        sum += d;
        sq += d * d;
    }
    let n = m as f64;
    let mean_dev = sum / n;
    let variance = ((sq - n * mean_dev * mean_dev) / (n - 1.0)).max(0.0);
    Ok((shift + mean_dev, (variance / n).sqrt()))
}

fn draw<'a>(
    classifier: &'a SyntheticClassifier,
    center: &'a [f64],
    sampler: &'a mut NoiseSampler,
    m: usize,
) -> Result<impl Iterator<Item = f64> + 'a> {
    let d = classifier.dimension();
    if center.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: center.len(),
        });
    }
    if sampler.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: sampler.dimension(),
        });
    }
    let mut noise = vec![0.0; d];
    let mut point = vec![0.0; d];
    Ok((0..m).map(move |_| {
        sampler.fill(&mut noise);
        for ((p, c), n) in point.iter_mut().zip(center).zip(&noise) {
            *p = c + n;
        }
        classifier.eval_unchecked(&point)
    }))
}

/// `E[score(center + δ)]` by adaptive quadrature along the classifier's
/// direction, for classifiers whose score depends only on `uᵀz`.
///
/// The window `[μ - 10σ, μ + 10σ]` is split at every discontinuity and the
/// two tails are added as `score(edge) · Φ(-10)`.
pub fn smoothed_mean_quadrature(
    classifier: &SyntheticClassifier,
    center: &[f64],
    sigma: Sigma,
) -> Result<f64> {
    let mu = classifier.projection(center)?;
    let s = sigma.value();
    let profile = classifier.profile().ok_or(Error::NotOneDimensional)?;
    let breakpoints: Vec<f64> = match profile {
        Profile::Constant(v) => return Ok(v),
        Profile::Logistic { offset, .. } => vec![(offset - mu) / s],
        Profile::Step {
            cutoffs,
            top_cutoff,
            ..
        } => cutoffs
            .iter()
            .chain(top_cutoff.as_ref())
            .filter(|c| c.is_finite())
            .map(|c| (c - mu) / s)
            .collect(),
    };
    let score = |z: f64| classifier.profile_value(mu + s * z);
    let body = quadrature::integrate(
        |z| score(z) * std_normal_pdf(z),
        -WINDOW,
        WINDOW,
        &breakpoints,
        QUADRATURE_TOL,
    );
    let tail = std_normal_cdf(-WINDOW);
    Ok(body + tail * (score(-WINDOW) + score(WINDOW)))
}

/// Closed-form smoothed mean of a staircase classifier:
/// `a + Σ_j (s_j - s_{j-1}) Φ((c_j - μ)/σ) + (b - s_n) Φ((c_top - μ)/σ)`.
pub fn step_closed_form_mean(
    classifier: &SyntheticClassifier,
    center: &[f64],
    sigma: Sigma,
) -> Result<f64> {
    let mu = classifier.projection(center)?;
    let Some(Profile::Step {
        levels,
        cutoffs,
        top_cutoff,
    }) = classifier.profile()
    else {
        return Err(Error::InvalidClassifier(
            "not a staircase classifier".into(),
        ));
    };
    let (a, b) = classifier.range().as_tuple();
    let below = |c: f64| std_normal_cdf((c - mu) / sigma.value());
    let mut previous = a;
    let mut total = a;
    for (&level, &cutoff) in levels.iter().zip(cutoffs) {
        total += (level - previous) * below(cutoff);
        previous = level;
    }
    if let Some(top) = top_cutoff {
        total += (b - previous) * below(top);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::ScoreRange;

    fn sigma(v: f64) -> Sigma {
        Sigma::new(v).unwrap()
    }

    fn e1(d: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[0] = 1.0;
        v
    }

    #[test]
    fn flat_is_exact() {
        let c = SyntheticClassifier::flat(0.55, 16, ScoreRange::UNIT).unwrap();
        assert_eq!(
            smoothed_mean_quadrature(&c, &[0.0; 16], sigma(0.3)).unwrap(),
            0.55
        );
        let mut s = NoiseSampler::new(sigma(0.3), 16, 1);
        assert_eq!(
            mc_smoothed_mean(&c, &[0.0; 16], &mut s, 100).unwrap(),
            (0.55, 0.0)
        );
        let samples = sample_scores(&c, &[0.0; 16], &mut s, 100).unwrap();
        assert!(samples.values().iter().all(|&v| v == 0.55));
    }

    #[test]
    fn step_expectation_identity() {
        let center = vec![0.0; 4];
        let c = SyntheticClassifier::worst_case_lower(
            vec![0.3, 0.7],
            &[0.9, 0.4],
            e1(4),
            &center,
            sigma(0.25),
            ScoreRange::UNIT,
        )
        .unwrap();
        let q = smoothed_mean_quadrature(&c, &center, sigma(0.25)).unwrap();
        assert!((q - 0.43).abs() < 1e-12, "{q}");
        let closed = step_closed_form_mean(&c, &center, sigma(0.25)).unwrap();
        assert!((closed - 0.43).abs() < 1e-14);
    }

    #[test]
    fn step_with_top_slab_matches_closed_form() {
        let c = SyntheticClassifier::new(
            ClassifierKind::WorstCaseStep {
                direction: vec![1.0, -2.0, 0.5],
                levels: vec![0.2, 0.45, 0.8],
                cutoffs: vec![0.9, 0.1, -0.3],
                top_cutoff: Some(-0.7),
            },
            3,
            ScoreRange::UNIT,
        )
        .unwrap();
        let center = [0.1, 0.2, -0.4];
        for s in [0.1, 0.5, 2.0] {
            let q = smoothed_mean_quadrature(&c, &center, sigma(s)).unwrap();
            let closed = step_closed_form_mean(&c, &center, sigma(s)).unwrap();
            assert!((q - closed).abs() < 1e-9);
        }
    }

    #[test]
    fn far_below_first_cutoff_samples_top_score() {
        let c = SyntheticClassifier::new(
            ClassifierKind::WorstCaseStep {
                direction: e1(16),
                levels: vec![0.4],
                cutoffs: vec![0.0],
                top_cutoff: Some(0.0),
            },
            16,
            ScoreRange::UNIT,
        )
        .unwrap();
        let mut center = vec![0.0; 16];
        center[0] = -10.0 * 0.25;
        let mut sampler = NoiseSampler::new(sigma(0.25), 16, 9);
        let samples = sample_scores(&c, &center, &mut sampler, 100_000).unwrap();
        assert!(samples.values().iter().all(|&v| v == 1.0 - 1e-12));
    }

    #[test]
    fn logistic_quadrature_matches_mc() {
        let c = SyntheticClassifier::logistic(e1(16), 0.0, 0.2, ScoreRange::UNIT).unwrap();
        let center = vec![0.05; 16];
        let q = smoothed_mean_quadrature(&c, &center, sigma(0.25)).unwrap();
        let mut s = NoiseSampler::new(sigma(0.25), 16, 42);
        let (mean, se) = mc_smoothed_mean(&c, &center, &mut s, 1_000_000).unwrap();
        assert!((mean - q).abs() < 3.0 * se, "{mean} vs {q} (se {se})");
    }

    #[test]
    fn logistic_at_offset_is_midpoint() {
        // Symmetric noise around the logistic midpoint averages to (a+b)/2.
        let range = ScoreRange::new(-1.0, 1.0).unwrap();
        let c = SyntheticClassifier::logistic(vec![0.0, 1.0], 0.3, 0.5, range).unwrap();
        let q = smoothed_mean_quadrature(&c, &[7.0, 0.3], sigma(0.8)).unwrap();
        assert!(q.abs() < 1e-12);
    }

    #[test]
    fn stderr_scales_with_root_m() {
        let c = SyntheticClassifier::logistic(e1(16), 0.0, 0.3, ScoreRange::UNIT).unwrap();
        let center = vec![0.0; 16];
        let mut ratios = Vec::new();
        for seed in 0..5 {
            let mut s = NoiseSampler::new(sigma(0.25), 16, seed);
            let (_, se1) = mc_smoothed_mean(&c, &center, &mut s, 20_000).unwrap();
            let (_, se2) = mc_smoothed_mean(&c, &center, &mut s, 40_000).unwrap();
            ratios.push(se2 / se1);
        }
        let target = std::f64::consts::FRAC_1_SQRT_2;
        assert!(
            ratios.iter().all(|r| (r - target).abs() < 0.2 * target),
            "{ratios:?}"
        );
    }

    #[test]
    fn translation_covariance() {
        let c = SyntheticClassifier::logistic(vec![0.6, 0.8, 0.0], -0.1, 0.4, ScoreRange::UNIT)
            .unwrap();
        let base = smoothed_mean_quadrature(&c, &[0.2, 0.1, 0.0], sigma(0.5)).unwrap();
        // (0.6, 0.8, 0)·(−0.2, 0.15, 3) = 0: orthogonal shift
        let moved = smoothed_mean_quadrature(&c, &[0.0, 0.25, 3.0], sigma(0.5)).unwrap();
        assert!((base - moved).abs() < 1e-12);
    }

    #[test]
    fn radial_rejected_by_quadrature() {
        let c = SyntheticClassifier::new(
            ClassifierKind::Radial {
                center: vec![0.0; 2],
                width: 1.0,
            },
            2,
            ScoreRange::UNIT,
        )
        .unwrap();
        assert_eq!(
            smoothed_mean_quadrature(&c, &[0.0, 0.0], sigma(1.0)),
            Err(Error::NotOneDimensional)
        );
    }

    #[test]
    fn seeded_samples_repeat() {
        let c = SyntheticClassifier::logistic(e1(16), 0.0, 1.0, ScoreRange::UNIT).unwrap();
        let center = vec![0.0; 16];
        let a =
            sample_scores(&c, &center, &mut NoiseSampler::new(sigma(0.25), 16, 3), 500).unwrap();
        let b =
            sample_scores(&c, &center, &mut NoiseSampler::new(sigma(0.25), 16, 3), 500).unwrap();
        assert_eq!(a, b);
    }
}
