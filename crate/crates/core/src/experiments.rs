//! Monte-Carlo experiments: risk curves, linear minimax checks, BJS
//! adaptivity, decoder consistency, classifier benchmarks and the phase
//! ablation.
//!
//! Every driver is a pure function of its arguments and seed. Work is split
//! into independent cells (one per θ, class or fold) with their own derived
//! random streams, run in parallel and reduced in cell order.

use rayon::prelude::*;

use crate::basis::{coeff_l2_distance, forward_coefficients, padded_distance_sq, CoefficientVector};
use crate::classify::{
    bjs_coefficient_count, cross_validate_features, dataset_features, min_distance_decode, CvReport, CvScheme,
    FeatureVector, PipelineConfig,
};
use crate::error::{Error, Result};
use crate::rng::{self, derive_seed, StreamRng};
use crate::shrinkage::{
    bjs_estimate, cutoff_for_epsilon, cutoff_for_samples, dyadic_blocks, pinsker_mu, BlockPartition, EllipsoidSpec,
};
use crate::synth::{generate_trial_with_truth, sobolev_point, ClassModel, LabeledDataset, NoiseModel};

/// Fewest Monte-Carlo draws accepted per risk estimate.
pub const MIN_TRIALS: usize = 100;
/// Fewest parameter points used to approximate a supremum over the class.
pub const MIN_THETAS: usize = 50;

/// Single-realization squared L2 error `||f - f_est||^2`.
pub fn mse_function(f_true: &CoefficientVector, f_est: &CoefficientVector) -> f64 {
    let d = coeff_l2_distance(f_true, f_est);
    d * d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskPoint {
    /// Noise level `eps` or sample count `N`.
    pub abscissa: f64,
    pub mse: f64,
    pub std_error: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskCurve {
    pub points: Vec<RiskPoint>,
}

impl RiskCurve {
    /// Least-squares slope of `ln mse` against `ln abscissa`.
    pub fn log_log_slope(&self) -> Option<f64> {
        if self.points.len() < 2 {
            return None;
        }
        let xs: Vec<f64> = self.points.iter().map(|p| p.abscissa.ln()).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| p.mse.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

/// Mean and standard error of a sample.
fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::Domain(format!(
            "Monte-Carlo needs at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("noise level must be positive, got {epsilon}")));
    }
    Ok(())
}

/// Number of leading coefficients with `a_k < mu`, i.e. those Pinsker keeps.
fn pinsker_support(spec: &EllipsoidSpec, mu: f64) -> usize {
    let mut k = 1;
    while spec.weight(k + 1) < mu {
        k += 1;
    }
    k
}

/// Points on the boundary `sum a_k^2 theta_k^2 = C^2` of the ellipsoid,
/// truncated to `dim` coordinates, where linear estimators attain their
/// worst case:
///
/// * the vertices `C / a_k e_k` for `2 <= k <= vertex_limit`;
/// * the least favorable profile `|theta_k| = eps sqrt((mu/a_k - 1)_+)` with
///   all-positive and random signs;
/// * random boundary points, until `MIN_THETAS` points are reached.
pub fn boundary_thetas(
    spec: &EllipsoidSpec,
    epsilon: f64,
    dim: usize,
    vertex_limit: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_epsilon(epsilon)?;
    if dim < 2 {
        return Err(Error::Domain(format!("need at least 2 coordinates, got {dim}")));
    }
    let c = spec.radius();
    let mu = pinsker_mu(spec, epsilon)?;
    let mut rng = rng::stream(seed, &[u64::from_le_bytes(*b"boundary")]);
    let mut out = Vec::new();

    for k in 2..=vertex_limit.min(dim) {
        let mut theta = vec![0.0; dim];
        theta[k - 1] = c / spec.weight(k);
        out.push(theta);
    }

    let profile: Vec<f64> = (1..=dim)
        .map(|k| {
            let a = spec.weight(k);
            if a > 0.0 {
                epsilon * (mu / a - 1.0).max(0.0).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let energy = spec.energy(&profile);
    if energy > 0.0 {
        let scale = c / energy.sqrt();
        let base: Vec<f64> = profile.iter().map(|v| v * scale).collect();
        out.push(base.clone());
        for _ in 0..3 {
            out.push(
                base.iter()
                    .map(|v| if rand::Rng::random::<bool>(&mut rng) { *v } else { -v })
                    .collect(),
            );
        }
    }

    while out.len() < MIN_THETAS {
        let mut theta = sobolev_point(&mut rng, spec, dim, 1.0);
        theta[0] = 0.0;
        out.push(theta);
    }
    Ok(out)
}

/// Monte-Carlo risk of `estimator` at `theta` under `y = theta + eps z`,
/// returning per-draw squared errors.
fn squared_errors<F>(theta: &[f64], epsilon: f64, trials: usize, rng: &mut StreamRng, mut estimator: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut y = vec![0.0; theta.len()];
    (0..trials)
        .map(|_| {
            rng::fill_normal(rng, &mut y);
            y.iter_mut().zip(theta).for_each(|(v, t)| *v = t + epsilon * *v);
            let est = estimator(&y);
            padded_distance_sq(&est, theta)
        })
        .collect()
}

fn pinsker_weights(spec: &EllipsoidSpec, mu: f64, len: usize) -> Vec<f64> {
    (1..=len).map(|k| (1.0 - spec.weight(k) / mu).max(0.0)).collect()
}

/// Worst-case Monte-Carlo risk of the Pinsker estimator at each noise level,
/// the supremum over the class being approximated by the maximum over
/// [`boundary_thetas`]. `epsilons` must be strictly decreasing.
pub fn risk_curve_pinsker(spec: &EllipsoidSpec, epsilons: &[f64], trials: usize, seed: u64) -> Result<RiskCurve> {
    check_trials(trials)?;
    if epsilons.is_empty() {
        return Err(Error::Domain("risk curve needs at least one noise level".into()));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("noise levels must be strictly decreasing".into()));
    }
    let mut points = Vec::with_capacity(epsilons.len());
    for (e, &epsilon) in epsilons.iter().enumerate() {
        check_epsilon(epsilon)?;
        let mu = pinsker_mu(spec, epsilon)?;
        let dim = pinsker_support(spec, mu) + 2;
        let cell_seed = derive_seed(seed, &[e as u64]);
        let thetas = boundary_thetas(spec, epsilon, dim, dim, cell_seed)?;
        let weights = pinsker_weights(spec, mu, dim);
        let risks: Vec<(f64, f64)> = thetas
            .par_iter()
            .enumerate()
            .map(|(i, theta)| {
                let mut rng = rng::stream(cell_seed, &[i as u64]);
                let errs = squared_errors(theta, epsilon, trials, &mut rng, |y| {
                    y.iter().zip(&weights).map(|(v, c)| v * c).collect()
                });
                mean_se(&errs)
            })
            .collect();
        let (mse, std_error) = sup_point(&risks);
        points.push(RiskPoint {
            abscissa: epsilon,
            mse,
            std_error,
            trials,
        });
    }
    Ok(RiskCurve { points })
}

/// Largest mean (first one on ties) with its standard error.
fn sup_point(risks: &[(f64, f64)]) -> (f64, f64) {
    let mut best = risks[0];
    for &r in &risks[1..] {
        if r.0 > best.0 {
            best = r;
        }
    }
    best
}

/// Exact risk `count * eps^2` of the unshrunk observation over `count`
/// coordinates.
pub fn identity_risk(epsilon: f64, count: usize) -> f64 {
    count as f64 * epsilon * epsilon
}

/// Exact worst-case risk over the ellipsoid truncated to `weights.len()`
/// coordinates of the diagonal estimator `c_k y_k`:
/// `eps^2 sum c_k^2 + C^2 max_k (1 - c_k)^2 / a_k^2`. Infinite when some
/// unconstrained coordinate (`a_k = 0`) is shrunk.
pub fn linear_worst_case_risk(weights: &[f64], spec: &EllipsoidSpec, epsilon: f64) -> f64 {
    let variance: f64 = weights.iter().map(|c| c * c).sum::<f64>() * epsilon * epsilon;
    let mut bias: f64 = 0.0;
    for (i, c) in weights.iter().enumerate() {
        let a = spec.weight(i + 1);
        let gap = (1.0 - c) * (1.0 - c);
        if a == 0.0 {
            if gap > 0.0 {
                return f64::INFINITY;
            }
        } else {
            bias = bias.max(gap / (a * a));
        }
    }
    variance + spec.radius() * spec.radius() * bias
}

/// Worst-case risk of `c_k y_k` maximized over a grid of boundary points:
/// `theta_k^2 = t_k C^2 / a_k^2` for `t` on the simplex grid with step
/// `1/steps` over the constrained coordinates. The unconstrained coordinates
/// are fixed at zero and must carry `c_k = 1`.
pub fn grid_worst_case_risk(weights: &[f64], spec: &EllipsoidSpec, epsilon: f64, steps: usize) -> f64 {
    let variance: f64 = weights.iter().map(|c| c * c).sum::<f64>() * epsilon * epsilon;
    let constrained: Vec<f64> = weights
        .iter()
        .enumerate()
        .filter(|(i, _)| spec.weight(i + 1) > 0.0)
        .map(|(i, c)| {
            let a = spec.weight(i + 1);
            (1.0 - c) * (1.0 - c) * spec.radius() * spec.radius() / (a * a)
        })
        .collect();
    if weights
        .iter()
        .enumerate()
        .any(|(i, c)| spec.weight(i + 1) == 0.0 && *c != 1.0)
    {
        return f64::INFINITY;
    }
    fn walk(slopes: &[f64], remaining: usize, steps: usize, acc: f64, best: &mut f64) {
        match slopes {
            [] => {}
            [last] => *best = best.max(acc + last * remaining as f64 / steps as f64),
            [first, rest @ ..] => {
                for take in 0..=remaining {
                    walk(rest, remaining - take, steps, acc + first * take as f64 / steps as f64, best);
                }
            }
        }
    }
    let mut best = 0.0;
    walk(&constrained, steps, steps, 0.0, &mut best);
    variance + best
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearOptimalityReport {
    pub pinsker_weights: Vec<f64>,
    pub pinsker_risk: f64,
    pub best_competitor: Vec<f64>,
    pub best_competitor_risk: f64,
    pub competitors: usize,
}

/// Compares the Pinsker weights against every diagonal competitor `c` on
/// the grid `{0, h, 2h, ..., 1}^dim`, by exact worst-case risk over the
/// `dim`-coordinate ellipsoid.
pub fn linear_optimality_check(
    spec: &EllipsoidSpec,
    epsilon: f64,
    dim: usize,
    resolution: f64,
) -> Result<LinearOptimalityReport> {
    check_epsilon(epsilon)?;
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::Domain(format!("grid resolution must be in (0, 1], got {resolution}")));
    }
    let levels = (1.0 / resolution).round() as usize;
    let mu = pinsker_mu(spec, epsilon)?;
    let pinsker = pinsker_weights(spec, mu, dim);
    let pinsker_risk = linear_worst_case_risk(&pinsker, spec, epsilon);

    let total = (levels + 1).checked_pow(dim as u32).ok_or_else(|| {
        Error::Domain(format!("competitor grid of {} levels in {dim} dimensions is too large", levels + 1))
    })?;
    let best = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let c: Vec<f64> = (0..dim)
                .map(|_| {
                    let level = idx % (levels + 1);
                    idx /= levels + 1;
                    level as f64 / levels as f64
                })
                .collect();
            let risk = linear_worst_case_risk(&c, spec, epsilon);
            (risk, c)
        })
        .reduce_with(|a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("grid is nonempty");
    Ok(LinearOptimalityReport {
        pinsker_weights: pinsker,
        pinsker_risk,
        best_competitor: best.1,
        best_competitor_risk: best.0,
        competitors: total,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptivityRow {
    pub spec: EllipsoidSpec,
    pub bjs_risk: f64,
    pub bjs_std_error: f64,
    pub pinsker_risk: f64,
    pub pinsker_std_error: f64,
    /// `bjs_risk / pinsker_risk`.
    pub ratio: f64,
}

/// Blockwise James-Stein with `L = 2` and `J = floor(log2 eps^-2)`.
pub fn bjs_partition_for_epsilon(epsilon: f64) -> Result<BlockPartition> {
    dyadic_blocks(2, cutoff_for_epsilon(epsilon)?)
}

/// Monte-Carlo risk of BJS at `theta`; draws depend only on `(seed, theta)`.
pub fn bjs_risk(theta: &[f64], epsilon: f64, trials: usize, seed: u64) -> Result<(f64, f64)> {
    check_trials(trials)?;
    let partition = bjs_partition_for_epsilon(epsilon)?;
    let mut rng = rng::stream(seed, &[]);
    let mut failure = None;
    let errs = squared_errors(theta, epsilon, trials, &mut rng, |y| {
        match bjs_estimate(&CoefficientVector::from_parts_unchecked(y.to_vec(), epsilon), &partition) {
            Ok(v) => v.into_coeffs(),
            Err(e) => {
                failure = Some(e);
                vec![]
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(mean_se(&errs)),
    }
}

/// For each spec, worst-case risks of the parameter-free BJS estimator and
/// of Pinsker's estimator tuned to that spec, over the spec's
/// [`boundary_thetas`] in `2^J - 1` coordinates. Both estimators see the
/// same noise draws, and the noise stream for the i-th parameter point is
/// the same for every spec.
pub fn adaptivity_ratio_bjs(
    specs: &[EllipsoidSpec],
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<AdaptivityRow>> {
    check_trials(trials)?;
    let partition = bjs_partition_for_epsilon(epsilon)?;
    let dim = partition.coefficient_count();
    specs
        .iter()
        .map(|spec| {
            let mu = pinsker_mu(spec, epsilon)?;
            let weights = pinsker_weights(spec, mu, dim);
            let vertex_limit = pinsker_support(spec, mu) + 2;
            let theta_seed = derive_seed(
                seed,
                &[u64::from_le_bytes(*b"thetas__"), spec.alpha().to_bits(), spec.radius().to_bits()],
            );
            let thetas = boundary_thetas(spec, epsilon, dim, vertex_limit, theta_seed)?;
            let cells = thetas
                .par_iter()
                .enumerate()
                .map(|(i, theta)| {
                    let mut rng = rng::stream(seed, &[i as u64]);
                    let mut y = vec![0.0; dim];
                    let mut bjs = Vec::with_capacity(trials);
                    let mut pin = Vec::with_capacity(trials);
                    for _ in 0..trials {
                        rng::fill_normal(&mut rng, &mut y);
                        y.iter_mut().zip(theta).for_each(|(v, t)| *v = t + epsilon * *v);
                        let est = bjs_estimate(&CoefficientVector::from_parts_unchecked(y.clone(), epsilon), &partition)?;
                        bjs.push(padded_distance_sq(est.coeffs(), theta));
                        let p: Vec<f64> = y.iter().zip(&weights).map(|(v, c)| v * c).collect();
                        pin.push(padded_distance_sq(&p, theta));
                    }
                    Ok((mean_se(&bjs), mean_se(&pin)))
                })
                .collect::<Result<Vec<_>>>()?;
            let bjs: Vec<(f64, f64)> = cells.iter().map(|c| c.0).collect();
            let pin: Vec<(f64, f64)> = cells.iter().map(|c| c.1).collect();
            let (bjs_risk, bjs_std_error) = sup_point(&bjs);
            let (pinsker_risk, pinsker_std_error) = sup_point(&pin);
            Ok(AdaptivityRow {
                spec: *spec,
                bjs_risk,
                bjs_std_error,
                pinsker_risk,
                pinsker_std_error,
                ratio: bjs_risk / pinsker_risk,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub samples: usize,
    /// Misclassification rate per class (index `k - 1`).
    pub class_errors: Vec<f64>,
    /// `max_k` of `class_errors`.
    pub worst_class_error: f64,
    /// Binomial standard error of the worst class's rate.
    pub error_std_error: f64,
    /// Largest per-class mean squared estimation error.
    pub sup_mse: f64,
    pub mse_std_error: f64,
    /// Chebyshev term `sup_mse / s^2`.
    pub bound: f64,
}

/// For each `N`, draws `trials_per_class` single-channel trials of every
/// class, estimates the function by BJS (`eps = sigma / sqrt(N)`, `L = 2`,
/// `J = floor(log2 N)`), decodes with [`min_distance_decode`], and tabulates
/// the worst-class error against the Chebyshev bound.
pub fn consistency_experiment(
    model: &ClassModel,
    sample_sizes: &[usize],
    trials_per_class: usize,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Vec<ConsistencyRow>> {
    if trials_per_class == 0 {
        return Err(Error::Domain("need at least one trial per class".into()));
    }
    if sample_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("sample sizes must be strictly increasing".into()));
    }
    let s = model.separation();
    sample_sizes
        .iter()
        .map(|&n| {
            let partition = dyadic_blocks(2, cutoff_for_samples(n)?)?;
            let count = bjs_coefficient_count(n);
            let epsilon = noise.sigma() / (n as f64).sqrt();
            let cells = (1..=model.classes())
                .into_par_iter()
                .map(|label| {
                    let mut wrong = 0usize;
                    let mut errs = Vec::with_capacity(trials_per_class);
                    for t in 0..trials_per_class {
                        let trial_seed = derive_seed(seed, &[n as u64, label as u64, t as u64]);
                        let (trial, truth) = generate_trial_with_truth(model, label, 1, n, noise, trial_seed)?;
                        let y = forward_coefficients(&trial.channels[0], count)?.with_epsilon(epsilon)?;
                        let est = bjs_estimate(&y, &partition)?;
                        if min_distance_decode(&est, model) != label {
                            wrong += 1;
                        }
                        errs.push(mse_function(&truth[0], &est));
                    }
                    Ok((wrong as f64 / trials_per_class as f64, mean_se(&errs)))
                })
                .collect::<Result<Vec<_>>>()?;
            let class_errors: Vec<f64> = cells.iter().map(|c| c.0).collect();
            let mut worst = 0;
            for (k, e) in class_errors.iter().enumerate() {
                if *e > class_errors[worst] {
                    worst = k;
                }
            }
            let p = class_errors[worst];
            let mut sup = 0;
            for k in 0..cells.len() {
                if cells[k].1 .0 > cells[sup].1 .0 {
                    sup = k;
                }
            }
            let (sup_mse, mse_std_error) = cells[sup].1;
            Ok(ConsistencyRow {
                samples: n,
                worst_class_error: p,
                error_std_error: (p * (1.0 - p) / trials_per_class as f64).sqrt(),
                class_errors,
                sup_mse,
                mse_std_error,
                bound: sup_mse / (s * s),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub pipeline: String,
    pub config: PipelineConfig,
    pub seed: u64,
    pub overall_accuracy: f64,
    pub accuracy_std_error: f64,
    pub per_class_accuracy: Vec<f64>,
    pub confusion: Vec<Vec<usize>>,
    /// Worst-case error `P_e = max_k (1 - per_class_accuracy_k)`.
    pub worst_case_error: f64,
    pub predictions: Vec<usize>,
    pub notes: Vec<String>,
}

impl BenchmarkReport {
    pub fn from_cv(config: &PipelineConfig, seed: u64, cv: CvReport) -> Self {
        Self {
            pipeline: config.pipeline_name().to_string(),
            config: config.clone(),
            seed,
            overall_accuracy: cv.accuracy(),
            accuracy_std_error: cv.accuracy_std_error(),
            per_class_accuracy: cv.per_class_accuracy(),
            worst_case_error: cv.worst_case_error(),
            confusion: cv.confusion,
            predictions: cv.predictions,
            notes: cv.notes,
        }
    }
}

fn benchmark_one(dataset: &LabeledDataset, config: &PipelineConfig, scheme: CvScheme, seed: u64) -> Result<BenchmarkReport> {
    let config = PipelineConfig {
        seed,
        ..config.clone()
    };
    let cv = crate::classify::cross_validate(dataset, &config, scheme)?;
    Ok(BenchmarkReport::from_cv(&config, seed, cv))
}

/// Cross-validates each configuration on the same dataset and folds.
pub fn benchmark_classifiers(
    dataset: &LabeledDataset,
    configs: &[PipelineConfig],
    scheme: CvScheme,
    seed: u64,
) -> Result<Vec<BenchmarkReport>> {
    if configs.is_empty() {
        return Err(Error::Domain("benchmark needs at least one configuration".into()));
    }
    configs.iter().map(|c| benchmark_one(dataset, c, scheme, seed)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAblation {
    pub full: BenchmarkReport,
    pub magnitude: BenchmarkReport,
    /// Full minus magnitude-only accuracy.
    pub difference: f64,
    /// Standard error of the per-trial paired difference in correctness.
    pub paired_std_error: f64,
}

/// Runs `config` with full coefficients and with magnitude-only features on
/// identical folds and seeds.
pub fn phase_ablation(
    dataset: &LabeledDataset,
    config: &PipelineConfig,
    scheme: CvScheme,
    seed: u64,
) -> Result<PhaseAblation> {
    let run = |magnitude_only: bool| -> Result<BenchmarkReport> {
        let cfg = PipelineConfig {
            magnitude_only,
            seed,
            ..config.clone()
        };
        let features: Vec<FeatureVector> = dataset_features(dataset, &cfg)?;
        let cv = cross_validate_features(
            &features,
            &dataset.labels(),
            &dataset.sessions(),
            dataset.meta().classes,
            &cfg,
            scheme,
        )?;
        Ok(BenchmarkReport::from_cv(&cfg, seed, cv))
    };
    let full = run(false)?;
    let magnitude = run(true)?;
    let labels = dataset.labels();
    let diffs: Vec<f64> = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let a = (full.predictions[i] == l) as u8 as f64;
            let b = (magnitude.predictions[i] == l) as u8 as f64;
            a - b
        })
        .collect();
    let (difference, paired_std_error) = mean_se(&diffs);
    Ok(PhaseAblation {
        full,
        magnitude,
        difference,
        paired_std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::reconstruct;
    use crate::synth::make_class_model;

    #[test]
    fn mse_examples() {
        let a = CoefficientVector::exact(vec![1.0, 0.0]).unwrap();
        let b = CoefficientVector::exact(vec![0.0, 0.0]).unwrap();
        assert_eq!(mse_function(&a, &a), 0.0);
        assert_eq!(mse_function(&a, &b), 1.0);
    }

    #[test]
    fn mse_matches_quadrature() {
        let mut r = rng::stream(3, &[]);
        let a: Vec<f64> = (0..9).map(|_| rng::normal(&mut r)).collect();
        let b: Vec<f64> = (0..7).map(|_| rng::normal(&mut r)).collect();
        let (ca, cb) = (CoefficientVector::exact(a).unwrap(), CoefficientVector::exact(b).unwrap());
        // Trapezoid on a periodic grid integrates trigonometric polynomials exactly.
        let m = 4096;
        let fa = reconstruct(&ca, m).unwrap();
        let fb = reconstruct(&cb, m).unwrap();
        let integral: f64 = fa
            .samples()
            .iter()
            .zip(fb.samples())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / m as f64;
        assert!((integral - mse_function(&ca, &cb)).abs() < 1e-8 * integral.max(1.0));
    }

    #[test]
    fn closed_form_worst_case_matches_boundary_grid() {
        let spec = EllipsoidSpec::new(1.0, 1.0).unwrap();
        for c in [
            vec![1.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0],
            vec![1.0, 0.5, 0.2, 0.9, 0.0],
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
        ] {
            let exact = linear_worst_case_risk(&c, &spec, 0.5);
            let grid = grid_worst_case_risk(&c, &spec, 0.5, 20);
            assert!((exact - grid).abs() < 1e-12, "{exact} vs {grid}");
        }
        assert!(linear_worst_case_risk(&[0.5, 1.0], &spec, 0.5).is_infinite());
    }

    #[test]
    fn pinsker_worst_case_is_linear_minimax_value() {
        // mu = 3 exactly for alpha = 1, C = 1, eps = 0.5 on five coordinates.
        let spec = EllipsoidSpec::new(1.0, 1.0).unwrap();
        let r = linear_optimality_check(&spec, 0.5, 5, 0.25).unwrap();
        assert!((r.pinsker_risk - 0.25 * (1.0 + 2.0 / 3.0)).abs() < 1e-9);
        assert_eq!(r.competitors, 5usize.pow(5));
        assert!(r.best_competitor_risk >= r.pinsker_risk - 1e-12);
    }

    #[test]
    fn boundary_points_lie_on_the_boundary() {
        let spec = EllipsoidSpec::new(2.0, 10.0).unwrap();
        let thetas = boundary_thetas(&spec, 0.1, 12, 12, 4).unwrap();
        assert!(thetas.len() >= MIN_THETAS);
        for t in thetas {
            assert!((spec.energy(&t) - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn risk_curve_shape_and_identity_comparison() {
        let spec = EllipsoidSpec::new(2.0, 10.0).unwrap();
        let curve = risk_curve_pinsker(&spec, &[0.5, 0.2], 200, 1).unwrap();
        assert_eq!(curve.points.len(), 2);
        for p in &curve.points {
            assert!(p.mse > 0.0);
            let mu = pinsker_mu(&spec, p.abscissa).unwrap();
            let kept = pinsker_support(&spec, mu);
            assert!(p.mse < identity_risk(p.abscissa, kept) + spec.radius().powi(2) / mu.powi(2) + 3.0 * p.std_error);
        }
        assert!(curve.points[1].mse < curve.points[0].mse);
        assert!(curve.log_log_slope().unwrap() > 0.0);
        assert!(risk_curve_pinsker(&spec, &[0.2, 0.5], 200, 1).is_err());
        assert!(risk_curve_pinsker(&spec, &[0.5], 10, 1).is_err());
    }

    #[test]
    fn bjs_risk_ignores_spec() {
        let a = EllipsoidSpec::new(2.0, 5.0).unwrap();
        let rows = adaptivity_ratio_bjs(&[a, a], 0.1, 100, 9).unwrap();
        assert_eq!(rows[0], rows[1]);
        let theta = vec![0.3; 20];
        assert_eq!(bjs_risk(&theta, 0.1, 100, 1).unwrap(), bjs_risk(&theta, 0.1, 100, 1).unwrap());
    }

    #[test]
    fn noiseless_consistency_is_error_free() {
        let spec = EllipsoidSpec::new(2.0, 10.0).unwrap();
        let model = make_class_model(4, &spec, 3, 0.5, 0.0, 2).unwrap();
        let noise = NoiseModel::new(1e-9, 1).unwrap();
        let rows = consistency_experiment(&model, &[64, 128], 5, &noise, 3).unwrap();
        for r in rows {
            assert_eq!(r.worst_class_error, 0.0);
        }
    }
}
