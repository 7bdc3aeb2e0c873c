//! Feature extraction for the two classifiers.
//!
//! Both pipelines map each channel's first `N` samples to trigonometric
//! coefficients, shrink them, and concatenate channels. The Pinsker pipeline
//! applies a fixed profile `c_k` to `2T + 1` coefficients. The BJS pipeline
//! computes every coefficient below Nyquist and applies blockwise James-Stein
//! with `eps = 1/sqrt(N)`, `J = floor(log2 N)`.

use rayon::prelude::*;

use super::lda::{PriorMode, Ridge};
use super::pca::PcaProjection;
use crate::basis::{forward_coefficients, max_harmonics, CoefficientVector};
use crate::error::{Error, Result};
use crate::shrinkage::{bjs_estimate, cutoff_for_samples, dyadic_blocks, ShrinkageProfile};
use crate::synth::{LabeledDataset, Trial};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("feature {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

/// Per-channel coefficient shrinkage.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureShrinkage {
    /// Fixed diagonal weights over `2T + 1` coefficients.
    Profile(ShrinkageProfile),
    /// Blockwise James-Stein; blocks `j <= pass_through` are kept as is.
    Bjs { pass_through: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Samples per channel used (`N`).
    pub samples: usize,
    pub shrinkage: FeatureShrinkage,
    /// PCA dimension `P`; 0 skips PCA.
    pub pca_dim: usize,
    pub ridge: Ridge,
    pub priors: PriorMode,
    /// Replace each (cos, sin) pair by (magnitude, 0) and the mean by its
    /// absolute value, discarding phase.
    pub magnitude_only: bool,
    pub seed: u64,
}

impl PipelineConfig {
    /// `N = 500`, `T = 5`, `c_k = 1` for `k <= 5` and 0 otherwise, `P = 165`.
    pub fn pinsker_default() -> Self {
        Self {
            samples: 500,
            shrinkage: FeatureShrinkage::Profile(
                ShrinkageProfile::band(1, 5, 11).expect("static band"),
            ),
            pca_dim: 165,
            ridge: Ridge::Auto,
            priors: PriorMode::Empirical,
            magnitude_only: false,
            seed: 0,
        }
    }

    /// `N = 500`, `L = 2`, `P = 190`.
    pub fn bjs_default() -> Self {
        Self {
            samples: 500,
            shrinkage: FeatureShrinkage::Bjs { pass_through: 2 },
            pca_dim: 190,
            ridge: Ridge::Auto,
            priors: PriorMode::Empirical,
            magnitude_only: false,
            seed: 0,
        }
    }

    pub fn pipeline_name(&self) -> &'static str {
        match self.shrinkage {
            FeatureShrinkage::Profile(_) => "pinsker",
            FeatureShrinkage::Bjs { .. } => "bjs",
        }
    }

    /// Coefficients per channel before shrinkage.
    pub fn coefficient_count(&self) -> usize {
        match &self.shrinkage {
            FeatureShrinkage::Profile(p) => p.len(),
            FeatureShrinkage::Bjs { .. } => bjs_coefficient_count(self.samples),
        }
    }

    /// Features per channel after shrinkage, before PCA.
    pub fn channel_feature_len(&self) -> Result<usize> {
        match &self.shrinkage {
            FeatureShrinkage::Profile(p) => Ok(p.len()),
            FeatureShrinkage::Bjs { pass_through } => {
                let cutoff = cutoff_for_samples(self.samples)?;
                let partition = dyadic_blocks(*pass_through, cutoff)?;
                Ok(partition.coefficient_count().max(self.coefficient_count()))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let count = self.coefficient_count();
        if count == 0 {
            return Err(Error::Domain(format!(
                "N = {} leaves no coefficient below Nyquist",
                self.samples
            )));
        }
        if 2 * count >= self.samples {
            return Err(Error::FrequencyOverflow {
                coefficients: count,
                samples: self.samples,
            });
        }
        if let FeatureShrinkage::Bjs { pass_through } = self.shrinkage {
            dyadic_blocks(pass_through, cutoff_for_samples(self.samples)?)?;
        }
        if let Ridge::Fixed(r) = self.ridge {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Domain(format!("ridge must be nonnegative, got {r}")));
            }
        }
        Ok(())
    }
}

/// Coefficients the BJS pipeline computes for `N` samples: the largest odd
/// count below `N/2`, i.e. `2 floor((N/2 - 1)/2) + 1`.
pub fn bjs_coefficient_count(samples: usize) -> usize {
    if samples < 3 {
        return 0;
    }
    (2 * max_harmonics(samples) + 1).min(samples)
}

/// Replaces `(y_2h, y_2h+1)` by `(|(y_2h, y_2h+1)|, 0)` and `y_1` by `|y_1|`.
pub fn magnitude_only(coeffs: &[f64]) -> Vec<f64> {
    let mut out = coeffs.to_vec();
    if let Some(first) = out.first_mut() {
        *first = first.abs();
    }
    let mut i = 1;
    while i < out.len() {
        let sin = out.get(i + 1).copied().unwrap_or(0.0);
        out[i] = out[i].hypot(sin);
        if i + 1 < out.len() {
            out[i + 1] = 0.0;
        }
        i += 2;
    }
    out
}

fn channel_coefficients(trial: &Trial, config: &PipelineConfig) -> Result<Vec<CoefficientVector>> {
    trial
        .channels
        .iter()
        .map(|ch| {
            let signal = if ch.len() == config.samples {
                ch.clone()
            } else {
                ch.truncated(config.samples)?
            };
            forward_coefficients(&signal, config.coefficient_count())
        })
        .collect()
}

fn finish(
    per_channel: Vec<Vec<f64>>,
    config: &PipelineConfig,
    pca: Option<&PcaProjection>,
) -> Result<FeatureVector> {
    let raw: Vec<f64> = per_channel
        .into_iter()
        .flat_map(|c| if config.magnitude_only { magnitude_only(&c) } else { c })
        .collect();
    match pca {
        Some(p) => FeatureVector::new(p.project(&raw)?),
        None => FeatureVector::new(raw),
    }
}

/// Shrunk Fourier features `c_k y_k`, concatenated over channels and
/// optionally projected.
pub fn pinsker_pipeline_features(
    trial: &Trial,
    config: &PipelineConfig,
    pca: Option<&PcaProjection>,
) -> Result<FeatureVector> {
    let FeatureShrinkage::Profile(profile) = &config.shrinkage else {
        return Err(Error::Invalid("Pinsker features need a shrinkage profile".into()));
    };
    config.validate()?;
    let per_channel = channel_coefficients(trial, config)?
        .iter()
        .map(|y| profile.apply(y).into_coeffs())
        .collect();
    finish(per_channel, config, pca)
}

/// Blockwise James-Stein features, concatenated over channels and optionally
/// projected.
pub fn bjs_pipeline_features(
    trial: &Trial,
    config: &PipelineConfig,
    pca: Option<&PcaProjection>,
) -> Result<FeatureVector> {
    let FeatureShrinkage::Bjs { pass_through } = config.shrinkage else {
        return Err(Error::Invalid("BJS features need a BJS shrinkage setting".into()));
    };
    config.validate()?;
    let partition = dyadic_blocks(pass_through, cutoff_for_samples(config.samples)?)?;
    let per_channel = channel_coefficients(trial, config)?
        .iter()
        .map(|y| bjs_estimate(y, &partition).map(CoefficientVector::into_coeffs))
        .collect::<Result<Vec<_>>>()?;
    finish(per_channel, config, pca)
}

pub fn pipeline_features(
    trial: &Trial,
    config: &PipelineConfig,
    pca: Option<&PcaProjection>,
) -> Result<FeatureVector> {
    match config.shrinkage {
        FeatureShrinkage::Profile(_) => pinsker_pipeline_features(trial, config, pca),
        FeatureShrinkage::Bjs { .. } => bjs_pipeline_features(trial, config, pca),
    }
}

/// Pre-PCA features for every trial, in dataset order.
pub fn dataset_features(dataset: &LabeledDataset, config: &PipelineConfig) -> Result<Vec<FeatureVector>> {
    config.validate()?;
    if dataset.meta().samples < config.samples {
        return Err(Error::Domain(format!(
            "dataset trials have {} samples, pipeline needs {}",
            dataset.meta().samples,
            config.samples
        )));
    }
    dataset
        .trials()
        .par_iter()
        .map(|t| pipeline_features(t, config, None))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::SampledSignal;
    use crate::shrinkage::james_stein;
    use std::f64::consts::{PI, SQRT_2};

    fn trial_from(channels: Vec<Vec<f64>>) -> Trial {
        Trial {
            channels: channels.into_iter().map(|c| SampledSignal::new(c).unwrap()).collect(),
            label: 1,
            session: 1,
        }
    }

    fn harmonic(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|l| f(l as f64 / n as f64)).collect()
    }

    fn pinsker_config(weights: Vec<f64>, n: usize) -> PipelineConfig {
        PipelineConfig {
            samples: n,
            shrinkage: FeatureShrinkage::Profile(ShrinkageProfile::new(weights).unwrap()),
            pca_dim: 0,
            ..PipelineConfig::pinsker_default()
        }
    }

    #[test]
    fn identity_profile_gives_raw_coefficients() {
        let n = 64;
        let ch0 = harmonic(n, |x| 1.0 + SQRT_2 * (2.0 * PI * x).cos());
        let ch1 = harmonic(n, |x| 2.0 * SQRT_2 * (2.0 * PI * 2.0 * x).sin());
        let f = pinsker_pipeline_features(&trial_from(vec![ch0, ch1]), &pinsker_config(vec![1.0; 5], n), None).unwrap();
        let expected = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0];
        for (a, b) in f.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = pinsker_pipeline_features(&trial_from(vec![harmonic(n, |x| x)]), &pinsker_config(vec![0.0; 5], n), None).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shrunk_harmonics_hand_computed() {
        let n = 40;
        let ch = harmonic(n, |x| 3.0 + 2.0 * SQRT_2 * (2.0 * PI * x).sin() - 4.0 * SQRT_2 * (2.0 * PI * 2.0 * x).cos());
        let cfg = pinsker_config(vec![1.0, 0.5, 0.25, 0.1, 0.0], n);
        let f = pinsker_pipeline_features(&trial_from(vec![ch]), &cfg, None).unwrap();
        let expected = [3.0, 0.0, 0.5, -0.4, 0.0];
        for (a, b) in f.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn longer_channels_are_truncated() {
        let cfg = pinsker_config(vec![1.0; 3], 20);
        let mut long = harmonic(20, |_| 2.0);
        long.extend([100.0; 5]);
        let f = pinsker_pipeline_features(&trial_from(vec![long]), &cfg, None).unwrap();
        assert!((f.values()[0] - 2.0).abs() < 1e-12);
        let short = trial_from(vec![vec![1.0; 10]]);
        assert!(pinsker_pipeline_features(&short, &cfg, None).is_err());
    }

    #[test]
    fn bjs_features_zero_and_layout() {
        let n = 64;
        let cfg = PipelineConfig {
            samples: n,
            pca_dim: 0,
            ..PipelineConfig::bjs_default()
        };
        assert_eq!(bjs_coefficient_count(64), 31);
        assert_eq!(bjs_coefficient_count(500), 249);
        assert_eq!(cfg.channel_feature_len().unwrap(), 63);
        let zero = bjs_pipeline_features(&trial_from(vec![vec![0.0; n]; 2]), &cfg, None).unwrap();
        assert_eq!(zero.len(), 126);
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bjs_features_hand_trace() {
        // N = 64: eps^2 = 1/64, J = 6, L = 2, 31 coefficients computed.
        let n = 64;
        let signal = harmonic(n, |x| {
            0.5 + 0.3 * SQRT_2 * (2.0 * PI * 3.0 * x).cos()
                + 0.2 * SQRT_2 * (2.0 * PI * 5.0 * x).sin()
                + 0.05 * SQRT_2 * (2.0 * PI * 9.0 * x).cos()
        });
        let cfg = PipelineConfig {
            samples: n,
            pca_dim: 0,
            ..PipelineConfig::bjs_default()
        };
        let f = bjs_pipeline_features(&trial_from(vec![signal]), &cfg, None).unwrap();
        let mut y = vec![0.0; 63];
        y[0] = 0.5; // k = 1
        y[5] = 0.3; // k = 6: cos, harmonic 3
        y[10] = 0.2; // k = 11: sin, harmonic 5
        y[17] = 0.05; // k = 18: cos, harmonic 9
        let eps = 1.0 / 8.0;
        let mut expected = y.clone();
        // block 3 = k 8..=15 (n = 8), block 4 = k 16..=31 (n = 16), block 5 = k 32..=63
        let b3 = james_stein(&y[7..15], eps).unwrap();
        expected[7..15].copy_from_slice(&b3);
        let b4 = james_stein(&y[15..31], eps).unwrap();
        expected[15..31].copy_from_slice(&b4);
        let b5 = james_stein(&y[31..63], eps).unwrap();
        expected[31..63].copy_from_slice(&b5);
        // block 3 factor: 1 - 6/64/0.04 < 0, so it is zeroed
        assert_eq!(expected[10], 0.0);
        for (a, b) in f.values().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!(f.values()[..7].iter().zip(&y[..7]).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn magnitude_transform() {
        assert_eq!(magnitude_only(&[-1.0, 3.0, 4.0, 0.0, -2.0]), vec![1.0, 5.0, 0.0, 2.0, 0.0]);
        assert_eq!(magnitude_only(&[2.0, -3.0]), vec![2.0, 3.0]);
    }

    #[test]
    fn wrong_variant_is_rejected() {
        let t = trial_from(vec![vec![0.0; 64]]);
        let mut cfg = PipelineConfig::bjs_default();
        cfg.samples = 64;
        assert!(pinsker_pipeline_features(&t, &cfg, None).is_err());
        let cfg = pinsker_config(vec![1.0; 3], 64);
        assert!(bjs_pipeline_features(&t, &cfg, None).is_err());
        assert!(pinsker_config(vec![1.0; 40], 64).validate().is_err());
    }
}
