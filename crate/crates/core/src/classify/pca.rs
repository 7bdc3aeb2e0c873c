//! Principal component projection.
//!
//! With fewer samples than dimensions the eigenvectors are taken from the
//! `n x n` Gram matrix of the centered data rather than the `d x d`
//! covariance; both give the same leading subspace.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::pipeline::FeatureVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    mean: DVector<f64>,
    /// `P x d`, orthonormal rows.
    components: DMatrix<f64>,
    /// Sample-covariance eigenvalues of the retained components.
    variances: Vec<f64>,
}

impl PcaProjection {
    /// Fits on the rows of `data` (`n x d`).
    pub fn fit(data: &DMatrix<f64>, dim: usize) -> Result<Self> {
        let (n, d) = data.shape();
        if n < 2 {
            return Err(Error::Domain(format!("PCA needs at least 2 samples, got {n}")));
        }
        if dim == 0 || dim > (n - 1).min(d) {
            return Err(Error::Domain(format!(
                "PCA dimension {dim} must lie in 1..={} for {n} samples of dimension {d}",
                (n - 1).min(d)
            )));
        }
        let mean = data.row_mean().transpose();
        let mut centered = data.clone();
        for mut row in centered.row_iter_mut() {
            row -= mean.transpose();
        }
        let scale = 1.0 / (n - 1) as f64;

        // Components are assembled as columns (`d x P`) so that the
        // orthonormalization below runs over contiguous memory.
        let (mut columns, variances) = if d <= n {
            let cov = centered.transpose() * &centered * scale;
            let (vals, vecs) = sorted_eigen(cov);
            (vecs.columns(0, dim).into_owned(), vals[..dim].to_vec())
        } else {
            let gram = &centered * centered.transpose();
            let (vals, vecs) = sorted_eigen(gram);
            let cols = centered.tr_mul(&vecs.columns(0, dim));
            (cols, vals[..dim].iter().map(|v| v * scale).collect())
        };
        orthonormalize_columns(&mut columns);
        fix_signs(&mut columns);
        let components = columns.transpose();
        Ok(Self {
            mean,
            components,
            variances: variances.into_iter().map(|v| v.max(0.0)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.components.ncols()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    /// Variance captured by each retained component, nonincreasing.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let centered = DVector::from_iterator(x.len(), x.iter().zip(self.mean.iter()).map(|(a, m)| a - m));
        Ok((&self.components * centered).iter().copied().collect())
    }

    /// Projects every row of `data`.
    pub fn project_rows(&self, data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if data.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: data.ncols(),
            });
        }
        let mut centered = data.clone();
        for mut row in centered.row_iter_mut() {
            row -= self.mean.transpose();
        }
        Ok(centered * self.components.transpose())
    }
}

/// Eigenpairs sorted by decreasing eigenvalue (stable in the original order).
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (vals, vecs)
}

/// Modified Gram-Schmidt over columns. Columns that vanish (null
/// directions of rank-deficient data) are replaced by the first coordinate
/// axis that is still independent of the columns before them.
fn orthonormalize_columns(m: &mut DMatrix<f64>) {
    let (rows, cols) = m.shape();
    let mut axis = 0;
    for i in 0..cols {
        let (done, mut rest) = m.columns_range_pair_mut(0..i, i..);
        let mut col = rest.column_mut(0);
        for _ in 0..2 {
            for j in 0..i {
                let prev = done.column(j);
                let dot = col.dot(&prev);
                col.axpy(-dot, &prev, 1.0);
            }
        }
        let norm = col.norm();
        if norm > 1e-10 {
            col /= norm;
            continue;
        }
        while axis < rows {
            let mut candidate = DVector::<f64>::zeros(rows);
            candidate[axis] = 1.0;
            axis += 1;
            for j in 0..i {
                let prev = done.column(j);
                let dot = candidate.dot(&prev);
                candidate.axpy(-dot, &prev, 1.0);
            }
            let n = candidate.norm();
            if n > 1e-6 {
                col.copy_from(&(candidate / n));
                break;
            }
        }
    }
}

/// Makes the largest-magnitude entry of each column positive.
fn fix_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .fold(0.0_f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
}

pub(crate) fn rows_to_matrix(features: &[FeatureVector]) -> Result<DMatrix<f64>> {
    let n = features.len();
    let d = features.first().map(|f| f.len()).unwrap_or(0);
    if let Some(f) = features.iter().find(|f| f.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: f.len(),
        });
    }
    Ok(DMatrix::from_fn(n, d, |r, c| features[r].values()[c]))
}

/// Fits a `dim`-component projection to the feature vectors.
pub fn pca_fit(features: &[FeatureVector], dim: usize) -> Result<PcaProjection> {
    PcaProjection::fit(&rows_to_matrix(features)?, dim)
}

pub fn pca_apply(projection: &PcaProjection, feature: &FeatureVector) -> Result<FeatureVector> {
    FeatureVector::new(projection.project(feature.values())?)
}
