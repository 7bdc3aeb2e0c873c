//! Cross-validation and the shrinkage/PCA grid search.
//!
//! PCA and LDA are refit inside every fold on the training trials only.
//! Folds run in parallel; results are assembled in fold order so reports do
//! not depend on scheduling.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::lda::LdaModel;
use super::pca::{rows_to_matrix, PcaProjection};
use super::pipeline::{dataset_features, FeatureShrinkage, FeatureVector, PipelineConfig};
use crate::error::{Error, Result};
use crate::rng;
use crate::shrinkage::{EllipsoidSpec, ShrinkageProfile};
use crate::synth::LabeledDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvScheme {
    /// One fold per session id.
    LeaveOneSessionOut,
    /// `k` folds over a seeded shuffle of the trials.
    KFold(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub classes: usize,
    /// `confusion[t][p]`: trials of true class `t + 1` predicted as `p + 1`.
    pub confusion: Vec<Vec<usize>>,
    /// Out-of-fold prediction for every trial, in dataset order.
    pub predictions: Vec<usize>,
    pub folds: usize,
    /// Conditions worth surfacing, such as a capped PCA dimension.
    pub notes: Vec<String>,
}

impl CvReport {
    pub fn trials(&self) -> usize {
        self.predictions.len()
    }

    pub fn correct(&self) -> usize {
        (0..self.classes).map(|k| self.confusion[k][k]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.trials() as f64
    }

    /// Diagonal of the row-normalized confusion matrix; classes with no
    /// trials report NaN.
    pub fn per_class_accuracy(&self) -> Vec<f64> {
        self.confusion
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let total: usize = row.iter().sum();
                if total == 0 {
                    f64::NAN
                } else {
                    row[k] as f64 / total as f64
                }
            })
            .collect()
    }

    /// `max_k (1 - per-class accuracy_k)` over classes that have trials.
    pub fn worst_case_error(&self) -> f64 {
        self.per_class_accuracy()
            .into_iter()
            .filter(|a| !a.is_nan())
            .map(|a| 1.0 - a)
            .fold(0.0, f64::max)
    }

    /// Binomial standard error of the overall accuracy.
    pub fn accuracy_std_error(&self) -> f64 {
        let p = self.accuracy();
        (p * (1.0 - p) / self.trials() as f64).sqrt()
    }
}

fn fold_assignment(trials: usize, sessions: &[usize], scheme: CvScheme, seed: u64) -> Result<Vec<Vec<usize>>> {
    match scheme {
        CvScheme::LeaveOneSessionOut => {
            let mut ids: Vec<usize> = sessions.to_vec();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() < 2 {
                return Err(Error::Domain(
                    "leave-one-session-out needs at least 2 sessions".into(),
                ));
            }
            Ok(ids
                .iter()
                .map(|id| (0..trials).filter(|&i| sessions[i] == *id).collect())
                .collect())
        }
        CvScheme::KFold(k) => {
            if k < 2 || k > trials {
                return Err(Error::Domain(format!(
                    "k-fold needs 2 <= k <= {trials} trials, got k = {k}"
                )));
            }
            let mut order: Vec<usize> = (0..trials).collect();
            order.shuffle(&mut rng::stream(seed, &[u64::from_le_bytes(*b"kfoldcv_")]));
            let mut folds = vec![Vec::new(); k];
            for (pos, &i) in order.iter().enumerate() {
                folds[pos % k].push(i);
            }
            folds.iter_mut().for_each(|f| f.sort_unstable());
            Ok(folds)
        }
    }
}

struct FoldOutcome {
    predictions: Vec<(usize, usize)>,
    notes: Vec<String>,
}

fn run_fold(
    data: &DMatrix<f64>,
    labels: &[usize],
    test: &[usize],
    classes: usize,
    fold: usize,
    config: &PipelineConfig,
) -> Result<FoldOutcome> {
    let mut notes = Vec::new();
    let mut in_test = vec![false; labels.len()];
    test.iter().for_each(|&i| in_test[i] = true);
    let mut train: Vec<usize> = (0..labels.len()).filter(|&i| !in_test[i]).collect();

    let mut counts = vec![0usize; classes + 1];
    for &i in &train {
        counts[labels[i]] += 1;
    }
    let thin: Vec<usize> = (1..=classes).filter(|&l| counts[l] < 2).collect();
    if !thin.is_empty() {
        notes.push(format!(
            "fold {fold}: classes {thin:?} have fewer than 2 training trials and were left out of training"
        ));
        train.retain(|&i| !thin.contains(&labels[i]));
    }
    let train_x = data.select_rows(&train);
    let train_y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    let test_x = data.select_rows(test);

    let (train_x, test_x) = if config.pca_dim > 0 {
        let cap = (train.len().saturating_sub(1)).min(data.ncols());
        let dim = config.pca_dim.min(cap);
        if dim < config.pca_dim {
            notes.push(format!(
                "fold {fold}: PCA dimension capped from {} to {dim} by training rank",
                config.pca_dim
            ));
        }
        let pca = PcaProjection::fit(&train_x, dim)?;
        (pca.project_rows(&train_x)?, pca.project_rows(&test_x)?)
    } else {
        (train_x, test_x)
    };
    let model = LdaModel::fit(&train_x, &train_y, config.ridge, config.priors)?;
    let predictions = test
        .iter()
        .zip(test_x.row_iter())
        .map(|(&i, row)| {
            let x: Vec<f64> = row.iter().copied().collect();
            model.predict(&x).map(|p| (i, p.label))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FoldOutcome { predictions, notes })
}

/// Cross-validates PCA + LDA on precomputed features. `labels` are 1-based
/// class ids in `1..=classes`; `sessions` are only read for
/// leave-one-session-out.
pub fn cross_validate_features(
    features: &[FeatureVector],
    labels: &[usize],
    sessions: &[usize],
    classes: usize,
    config: &PipelineConfig,
    scheme: CvScheme,
) -> Result<CvReport> {
    let n = features.len();
    if labels.len() != n || sessions.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: labels.len().min(sessions.len()),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l == 0 || l > classes) {
        return Err(Error::Domain(format!("label {bad} outside 1..={classes}")));
    }
    let data = rows_to_matrix(features)?;
    let folds = fold_assignment(n, sessions, scheme, config.seed)?;
    let outcomes = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| run_fold(&data, labels, test, classes, f, config))
        .collect::<Result<Vec<_>>>()?;

    let mut predictions = vec![0; n];
    let mut notes = Vec::new();
    for outcome in outcomes {
        for (i, p) in outcome.predictions {
            predictions[i] = p;
        }
        notes.extend(outcome.notes);
    }
    let mut confusion = vec![vec![0usize; classes]; classes];
    for (&t, &p) in labels.iter().zip(&predictions) {
        confusion[t - 1][p - 1] += 1;
    }
    Ok(CvReport {
        classes,
        confusion,
        predictions,
        folds: folds.len(),
        notes,
    })
}

/// Extracts pipeline features and cross-validates PCA + LDA on them.
pub fn cross_validate(dataset: &LabeledDataset, config: &PipelineConfig, scheme: CvScheme) -> Result<CvReport> {
    let features = dataset_features(dataset, config)?;
    let mut report = cross_validate_features(
        &features,
        &dataset.labels(),
        &dataset.sessions(),
        dataset.meta().classes,
        config,
        scheme,
    )?;
    if let FeatureShrinkage::Bjs { .. } = config.shrinkage {
        report.notes.insert(
            0,
            format!(
                "BJS coefficients computed up to index {} (below Nyquist for N = {}) rather than N",
                config.coefficient_count(),
                config.samples
            ),
        );
    }
    Ok(report)
}

/// Shrinkage pattern searched by [`grid_search`].
#[derive(Debug, Clone, PartialEq)]
pub enum MaskPattern {
    /// Binary mask keeping coefficients `lo..=hi` (1-based); the part past
    /// the coefficient count is dropped.
    Band { lo: usize, hi: usize },
    /// Pinsker weights `(1 - a_k/mu)_+` of the given smoothness.
    Pinsker { alpha: f64, mu: f64 },
}

impl MaskPattern {
    pub fn profile(&self, len: usize) -> Result<ShrinkageProfile> {
        match *self {
            MaskPattern::Band { lo, hi } => {
                if lo == 0 || lo > hi {
                    return Err(Error::Domain(format!("invalid band {lo}..={hi}")));
                }
                ShrinkageProfile::new(
                    (1..=len)
                        .map(|k| if (lo..=hi).contains(&k) { 1.0 } else { 0.0 })
                        .collect(),
                )
            }
            MaskPattern::Pinsker { alpha, mu } => {
                ShrinkageProfile::pinsker(&EllipsoidSpec::new(alpha, 1.0)?, mu, len)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MaskPattern::Band { lo, hi } => format!("band:{lo}-{hi}"),
            MaskPattern::Pinsker { alpha, mu } => format!("pinsker:{alpha}:{mu}"),
        }
    }
}

/// Every contiguous band `lo..=hi` within `1..=len`: low-pass masks
/// (`lo = 1`) and band-pass masks.
pub fn contiguous_bands(len: usize) -> Vec<MaskPattern> {
    let mut out = Vec::new();
    for lo in 1..=len {
        for hi in lo..=len {
            out.push(MaskPattern::Band { lo, hi });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub harmonics: Vec<usize>,
    pub patterns: Vec<MaskPattern>,
    pub pca_dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub harmonics: usize,
    pub pattern: MaskPattern,
    pub pca_dim: usize,
    pub accuracy: f64,
    pub worst_case_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: PipelineConfig,
    pub best_index: usize,
    pub best_report: CvReport,
    /// One row per `(T, pattern, P)` in lexicographic grid order.
    pub rows: Vec<GridRow>,
}

/// Exhaustive search of the Pinsker pipeline over `T x pattern x P`. Ties go
/// to the earliest row in grid order.
pub fn grid_search(
    dataset: &LabeledDataset,
    base: &PipelineConfig,
    grid: &GridSpec,
    scheme: CvScheme,
) -> Result<GridResult> {
    if grid.harmonics.is_empty() || grid.patterns.is_empty() || grid.pca_dims.is_empty() {
        return Err(Error::EmptyGrid(
            "harmonics, patterns and PCA dimensions all need at least one value".into(),
        ));
    }
    if let FeatureShrinkage::Bjs { .. } = base.shrinkage {
        return Err(Error::Invalid("the BJS pipeline has no shrinkage grid".into()));
    }
    let labels = dataset.labels();
    let sessions = dataset.sessions();
    let classes = dataset.meta().classes;

    let mut cells = Vec::new();
    for &t in &grid.harmonics {
        let len = 2 * t + 1;
        let raw_config = PipelineConfig {
            shrinkage: FeatureShrinkage::Profile(ShrinkageProfile::identity(len)?),
            magnitude_only: false,
            ..base.clone()
        };
        let raw = dataset_features(dataset, &raw_config)?;
        let channels = dataset.meta().channels;
        for pattern in &grid.patterns {
            let profile = pattern.profile(len)?;
            let shrunk: Vec<FeatureVector> = raw
                .iter()
                .map(|f| {
                    let mut v: Vec<f64> = f
                        .values()
                        .iter()
                        .enumerate()
                        .map(|(i, x)| x * profile.weights()[i % len])
                        .collect();
                    if base.magnitude_only {
                        v = v
                            .chunks(len)
                            .flat_map(super::pipeline::magnitude_only)
                            .collect();
                    }
                    debug_assert_eq!(v.len(), channels * len);
                    FeatureVector::new(v)
                })
                .collect::<Result<_>>()?;
            for &p in &grid.pca_dims {
                let config = PipelineConfig {
                    shrinkage: FeatureShrinkage::Profile(profile.clone()),
                    pca_dim: p,
                    ..base.clone()
                };
                let report = cross_validate_features(&shrunk, &labels, &sessions, classes, &config, scheme)?;
                cells.push((
                    GridRow {
                        harmonics: t,
                        pattern: pattern.clone(),
                        pca_dim: p,
                        accuracy: report.accuracy(),
                        worst_case_error: report.worst_case_error(),
                    },
                    config,
                    report,
                ));
            }
        }
    }
    let mut best_index = 0;
    for (i, (row, _, _)) in cells.iter().enumerate() {
        if row.accuracy > cells[best_index].0.accuracy {
            best_index = i;
        }
    }
    let best = cells[best_index].1.clone();
    let best_report = cells[best_index].2.clone();
    Ok(GridResult {
        best,
        best_index,
        best_report,
        rows: cells.into_iter().map(|(r, _, _)| r).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::synth::{generate_dataset, make_class_model, NoiseModel};

    fn blobs(per_class: usize, classes: usize, dim: usize, spread: f64, seed: u64) -> (Vec<FeatureVector>, Vec<usize>, Vec<usize>) {
        let mut r = rng::stream(seed, &[]);
        let centers: Vec<Vec<f64>> = (0..classes).map(|_| (0..dim).map(|_| 3.0 * rng::normal(&mut r)).collect()).collect();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut ss = Vec::new();
        for i in 0..per_class * classes {
            let label = i % classes + 1;
            xs.push(FeatureVector::new(centers[label - 1].iter().map(|c| c + spread * rng::normal(&mut r)).collect()).unwrap());
            ys.push(label);
            ss.push((i / classes) % 4 + 1);
        }
        (xs, ys, ss)
    }

    fn lda_config(pca_dim: usize) -> PipelineConfig {
        PipelineConfig {
            pca_dim,
            ..PipelineConfig::pinsker_default()
        }
    }

    #[test]
    fn separable_data_is_perfect() {
        let (xs, ys, ss) = blobs(20, 4, 6, 0.01, 1);
        let r = cross_validate_features(&xs, &ys, &ss, 4, &lda_config(0), CvScheme::LeaveOneSessionOut).unwrap();
        assert_eq!(r.accuracy(), 1.0);
        assert_eq!(r.folds, 4);
        assert_eq!(r.worst_case_error(), 0.0);
        let rows: Vec<usize> = r.confusion.iter().map(|row| row.iter().sum()).collect();
        assert_eq!(rows, vec![20; 4]);
    }

    #[test]
    fn permuted_labels_are_near_chance() {
        let (xs, ys, ss) = blobs(60, 8, 5, 0.5, 2);
        let mut perm = ys.clone();
        perm.shuffle(&mut rng::stream(3, &[]));
        let r = cross_validate_features(&xs, &perm, &ss, 8, &lda_config(0), CvScheme::KFold(10)).unwrap();
        let se = (0.125 * 0.875 / 480.0_f64).sqrt();
        assert!((r.accuracy() - 0.125).abs() < 4.0 * se, "accuracy {}", r.accuracy());
    }

    #[test]
    fn kfold_with_n_folds_is_leave_one_out() {
        let (xs, ys, _) = blobs(5, 3, 3, 1.5, 4);
        let n = xs.len();
        let loo_sessions: Vec<usize> = (1..=n).collect();
        let a = cross_validate_features(&xs, &ys, &loo_sessions, 3, &lda_config(0), CvScheme::LeaveOneSessionOut).unwrap();
        let b = cross_validate_features(&xs, &ys, &loo_sessions, 3, &lda_config(0), CvScheme::KFold(n)).unwrap();
        assert_eq!(a.predictions, b.predictions);
        assert_eq!(b.folds, n);
    }

    #[test]
    fn rotation_does_not_change_accuracy() {
        let (xs, ys, ss) = blobs(25, 4, 6, 2.0, 5);
        // Random orthogonal matrix from a QR factorization.
        let mut r = rng::stream(6, &[]);
        let q = DMatrix::from_fn(6, 6, |_, _| rng::normal(&mut r)).qr().q();
        let rotated: Vec<FeatureVector> = xs
            .iter()
            .map(|x| FeatureVector::new((&q * nalgebra::DVector::from_column_slice(x.values())).iter().copied().collect()).unwrap())
            .collect();
        for p in [0, 4] {
            let a = cross_validate_features(&xs, &ys, &ss, 4, &lda_config(p), CvScheme::LeaveOneSessionOut).unwrap();
            let b = cross_validate_features(&rotated, &ys, &ss, 4, &lda_config(p), CvScheme::LeaveOneSessionOut).unwrap();
            assert!((a.accuracy() - b.accuracy()).abs() < 1e-9);
        }
    }

    #[test]
    fn pca_cap_is_noted() {
        let (xs, ys, ss) = blobs(3, 2, 10, 1.0, 7);
        let r = cross_validate_features(&xs, &ys, &ss, 2, &lda_config(50), CvScheme::LeaveOneSessionOut).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("capped")));
    }

    #[test]
    fn missing_class_in_training_is_noted() {
        let (xs, ys, _) = blobs(4, 3, 3, 0.5, 8);
        // class 3 lives only in session 1
        let ss: Vec<usize> = ys.iter().enumerate().map(|(i, &y)| if y == 3 { 1 } else { i % 2 + 1 }).collect();
        let r = cross_validate_features(&xs, &ys, &ss, 3, &lda_config(0), CvScheme::LeaveOneSessionOut).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("left out of training")));
        assert_eq!(r.per_class_accuracy()[2], 0.0);
    }

    #[test]
    fn scheme_errors() {
        let (xs, ys, _) = blobs(3, 2, 2, 1.0, 9);
        let one_session = vec![1; xs.len()];
        assert!(cross_validate_features(&xs, &ys, &one_session, 2, &lda_config(0), CvScheme::LeaveOneSessionOut).is_err());
        assert!(cross_validate_features(&xs, &ys, &one_session, 2, &lda_config(0), CvScheme::KFold(1)).is_err());
        assert!(cross_validate_features(&xs, &ys, &one_session, 2, &lda_config(0), CvScheme::KFold(100)).is_err());
    }

    #[test]
    fn deterministic_reports() {
        let (xs, ys, ss) = blobs(20, 3, 4, 2.0, 10);
        let a = cross_validate_features(&xs, &ys, &ss, 3, &lda_config(2), CvScheme::KFold(5)).unwrap();
        let b = cross_validate_features(&xs, &ys, &ss, 3, &lda_config(2), CvScheme::KFold(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_table_shape_and_single_point() {
        let spec = EllipsoidSpec::new(2.0, 10.0).unwrap();
        let model = make_class_model(3, &spec, 2, 0.5, 0.1, 1).unwrap();
        let ds = generate_dataset(&model, 8, 2, 40, 4, &NoiseModel::new(0.5, 1).unwrap(), 2).unwrap();
        let base = PipelineConfig {
            samples: 40,
            pca_dim: 0,
            ..PipelineConfig::pinsker_default()
        };
        let grid = GridSpec {
            harmonics: vec![1, 2],
            patterns: vec![MaskPattern::Band { lo: 1, hi: 3 }, MaskPattern::Pinsker { alpha: 1.0, mu: 5.0 }],
            pca_dims: vec![0, 3, 4],
        };
        let res = grid_search(&ds, &base, &grid, CvScheme::LeaveOneSessionOut).unwrap();
        assert_eq!(res.rows.len(), 12);
        assert_eq!(res.rows[0].harmonics, 1);
        assert_eq!(res.rows[11].pca_dim, 4);
        let max = res.rows.iter().map(|r| r.accuracy).fold(0.0, f64::max);
        let first = res.rows.iter().position(|r| r.accuracy == max).unwrap();
        assert_eq!(res.best_index, first);

        let single = GridSpec {
            harmonics: vec![2],
            patterns: vec![MaskPattern::Band { lo: 2, hi: 4 }],
            pca_dims: vec![3],
        };
        let res = grid_search(&ds, &base, &single, CvScheme::LeaveOneSessionOut).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.best.pca_dim, 3);
        assert_eq!(
            res.best.shrinkage,
            FeatureShrinkage::Profile(ShrinkageProfile::band(2, 4, 5).unwrap())
        );
        let empty = GridSpec {
            pca_dims: vec![],
            ..single
        };
        assert!(matches!(grid_search(&ds, &base, &empty, CvScheme::LeaveOneSessionOut), Err(Error::EmptyGrid(_))));
    }

    #[test]
    fn contiguous_band_count() {
        assert_eq!(contiguous_bands(11).len(), 66);
        assert_eq!(contiguous_bands(1), vec![MaskPattern::Band { lo: 1, hi: 1 }]);
    }
}
