//! Linear discriminant analysis with a pooled, ridge-stabilized covariance.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::pca::rows_to_matrix;
use super::pipeline::FeatureVector;
use crate::error::{Error, Result};

/// Diagonal loading added to the pooled covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ridge {
    /// `1e-6 * trace(S) / d`.
    Auto,
    Fixed(f64),
}

impl Default for Ridge {
    fn default() -> Self {
        Ridge::Auto
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriorMode {
    /// Class frequencies in the training data.
    #[default]
    Empirical,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    labels: Vec<usize>,
    means: Vec<DVector<f64>>,
    covariance: DMatrix<f64>,
    priors: Vec<f64>,
    ridge: f64,
    // Sigma^{-1} mu_k and -1/2 mu_k' Sigma^{-1} mu_k + log pi_k.
    weights: Vec<DVector<f64>>,
    offsets: Vec<f64>,
}

impl LdaModel {
    /// Class labels in increasing order.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    /// Pooled within-class covariance including the ridge.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    /// Trains on the rows of `data` (`n x d`) with 1-based `labels`.
    pub fn fit(data: &DMatrix<f64>, labels: &[usize], ridge: Ridge, priors: PriorMode) -> Result<Self> {
        let (n, d) = data.shape();
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: labels.len(),
            });
        }
        let mut classes: Vec<usize> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::Domain(format!(
                "LDA needs at least 2 classes, got {}",
                classes.len()
            )));
        }
        let mut counts = vec![0usize; classes.len()];
        let mut means = vec![DVector::<f64>::zeros(d); classes.len()];
        let slot = |label: usize| classes.binary_search(&label).expect("label collected above");
        for (row, &label) in data.row_iter().zip(labels) {
            let k = slot(label);
            counts[k] += 1;
            means[k] += row.transpose();
        }
        if let Some(k) = counts.iter().position(|&c| c < 2) {
            return Err(Error::Domain(format!(
                "class {} has {} training sample(s); LDA needs at least 2",
                classes[k], counts[k]
            )));
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            *m /= c as f64;
        }
        let mut centered = data.clone();
        for (mut row, &label) in centered.row_iter_mut().zip(labels) {
            row -= means[slot(label)].transpose();
        }
        let mut covariance = centered.transpose() * &centered / n as f64;
        let ridge = match ridge {
            Ridge::Fixed(r) if r >= 0.0 && r.is_finite() => r,
            Ridge::Fixed(r) => return Err(Error::Domain(format!("ridge must be nonnegative, got {r}"))),
            Ridge::Auto => {
                let trace = covariance.trace();
                if trace > 0.0 {
                    1e-6 * trace / d as f64
                } else {
                    1.0
                }
            }
        };
        for i in 0..d {
            covariance[(i, i)] += ridge;
        }
        let chol = Cholesky::new(covariance.clone()).ok_or(Error::SingularCovariance)?;
        let scale = covariance.diagonal().max().max(f64::MIN_POSITIVE);
        if chol.l().diagonal().iter().any(|v| v * v <= 1e-14 * scale) {
            return Err(Error::SingularCovariance);
        }

        let priors: Vec<f64> = match priors {
            PriorMode::Empirical => counts.iter().map(|&c| c as f64 / n as f64).collect(),
            PriorMode::Uniform => vec![1.0 / classes.len() as f64; classes.len()],
        };
        let weights: Vec<DVector<f64>> = means.iter().map(|m| chol.solve(m)).collect();
        let offsets = means
            .iter()
            .zip(&weights)
            .zip(&priors)
            .map(|((m, w), p)| -0.5 * m.dot(w) + p.ln())
            .collect();
        Ok(Self {
            labels: classes,
            means,
            covariance,
            priors,
            ridge,
            weights,
            offsets,
        })
    }

    /// Discriminant scores `x' S^{-1} mu_k - mu_k' S^{-1} mu_k / 2 + log pi_k`,
    /// one per label.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.offsets)
            .map(|(w, b)| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<LdaPrediction> {
        let scores = self.scores(x)?;
        let mut best = 0;
        for (k, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = k;
            }
        }
        Ok(LdaPrediction {
            label: self.labels[best],
            scores: self.labels.iter().copied().zip(scores).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaPrediction {
    pub label: usize,
    /// `(label, discriminant)` pairs in label order.
    pub scores: Vec<(usize, f64)>,
}

pub fn lda_train(features: &[FeatureVector], labels: &[usize], ridge: Ridge) -> Result<LdaModel> {
    LdaModel::fit(&rows_to_matrix(features)?, labels, ridge, PriorMode::Empirical)
}

pub fn lda_predict(model: &LdaModel, feature: &FeatureVector) -> Result<LdaPrediction> {
    model.predict(feature.values())
}
