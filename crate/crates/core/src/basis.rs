//! Orthonormal trigonometric basis on `[0, 1]` and the maps between sampled
//! signals and sequence-model coefficients.
//!
//! Basis functions are indexed from 1:
//!
//! ```text
//! phi_1(x)    = 1
//! phi_2k(x)   = sqrt(2) cos(2 pi k x)
//! phi_2k+1(x) = sqrt(2) sin(2 pi k x)
//! ```
//!
//! Coefficients are stored densely in a `Vec<f64>` where slot `i` holds the
//! coefficient of `phi_{i+1}`. The forward map is the Riemann sum
//! `y_k = (1/N) sum_l Y_l phi_k(l/N)`, so white noise of unit variance on the
//! samples becomes noise of standard deviation `1/sqrt(N)` per coefficient.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// One channel's samples `Y_0, ..., Y_{N-1}` taken on the grid `l/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<f64>,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("a sampled signal needs at least one sample".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("sample {i} is not finite")));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The first `n` samples, or an error if the signal is shorter.
    pub fn truncated(&self, n: usize) -> Result<SampledSignal> {
        if n == 0 || n > self.samples.len() {
            return Err(Error::Domain(format!(
                "cannot take {n} samples from a signal of length {}",
                self.samples.len()
            )));
        }
        Ok(Self {
            samples: self.samples[..n].to_vec(),
        })
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Sequence-model coefficients `y_1, y_2, ...` together with their noise
/// level `epsilon`. Slot 0 holds `y_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    coeffs: Vec<f64>,
    epsilon: f64,
}

impl CoefficientVector {
    pub fn new(coeffs: Vec<f64>, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!(
                "noise level must be finite and nonnegative, got {epsilon}"
            )));
        }
        if let Some(i) = coeffs.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("coefficient {} is not finite", i + 1)));
        }
        Ok(Self { coeffs, epsilon })
    }

    /// Noise-free coefficients (`epsilon = 0`).
    pub fn exact(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(coeffs, 0.0)
    }

    pub(crate) fn from_parts_unchecked(coeffs: Vec<f64>, epsilon: f64) -> Self {
        debug_assert!(coeffs.iter().all(|v| v.is_finite()));
        Self { coeffs, epsilon }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient `k` (1-based); indices past the end read as zero.
    pub fn get(&self, k: usize) -> f64 {
        assert!(k >= 1, "coefficient indices start at 1");
        self.coeffs.get(k - 1).copied().unwrap_or(0.0)
    }

    /// Copy zero-padded or truncated to exactly `len` coefficients.
    pub fn resized(&self, len: usize) -> CoefficientVector {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len, 0.0);
        Self {
            coeffs,
            epsilon: self.epsilon,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!(
                "noise level must be finite and nonnegative, got {epsilon}"
            )));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }
}

/// Evaluates `phi_k(x)`; `k` starts at 1.
pub fn trig_basis_eval(k: usize, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("basis index k must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} lies outside [0, 1]")));
    }
    Ok(phi(k, x))
}

#[inline]
pub(crate) fn phi(k: usize, x: f64) -> f64 {
    if k == 1 {
        return 1.0;
    }
    let freq = (k / 2) as f64;
    if k % 2 == 0 {
        SQRT_2 * (2.0 * PI * freq * x).cos()
    } else {
        SQRT_2 * (2.0 * PI * freq * x).sin()
    }
}

/// Largest harmonic count `T` with `2T + 1 < N/2`, i.e. every basis
/// frequency stays strictly below Nyquist on an `N`-point grid.
pub fn max_harmonics(samples: usize) -> usize {
    // 2(2T + 1) < N  <=>  T < (N - 2) / 4
    if samples < 3 {
        return 0;
    }
    (samples - 3) / 4
}

/// Coefficients `y_1, ..., y_{2T+1}` of `signal`, with `epsilon = 1/sqrt(N)`.
pub fn forward_transform(signal: &SampledSignal, harmonics: usize) -> Result<CoefficientVector> {
    forward_coefficients(signal, 2 * harmonics + 1)
}

/// Coefficients `y_1, ..., y_count` by direct summation.
///
/// Requires `count < N/2`. The cosine and sine values are read from a table
/// of `cos(2 pi m / N)` indexed by `k l mod N`, which keeps the sum direct
/// while avoiding a transcendental call per term.
pub fn forward_coefficients(signal: &SampledSignal, count: usize) -> Result<CoefficientVector> {
    let n = signal.len();
    if count == 0 {
        return Err(Error::Domain("coefficient count must be positive".into()));
    }
    if 2 * count >= n {
        return Err(Error::FrequencyOverflow {
            coefficients: count,
            samples: n,
        });
    }
    let table = TrigTable::new(n);
    let samples = signal.samples();
    let mut coeffs = vec![0.0; count];
    coeffs[0] = samples.iter().sum::<f64>() / n as f64;
    let top = count / 2;
    for freq in 1..=top {
        let (mut c, mut s) = (0.0, 0.0);
        let mut idx = 0usize;
        for &y in samples {
            c += y * table.cos[idx];
            s += y * table.sin[idx];
            idx += freq;
            if idx >= n {
                idx -= n;
            }
        }
        coeffs[2 * freq - 1] = SQRT_2 * c / n as f64;
        if 2 * freq < count {
            coeffs[2 * freq] = SQRT_2 * s / n as f64;
        }
    }
    Ok(CoefficientVector::from_parts_unchecked(
        coeffs,
        1.0 / (n as f64).sqrt(),
    ))
}

struct TrigTable {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigTable {
    fn new(n: usize) -> Self {
        let (cos, sin) = (0..n)
            .map(|m| {
                let angle = 2.0 * PI * m as f64 / n as f64;
                (angle.cos(), angle.sin())
            })
            .unzip();
        Self { cos, sin }
    }
}

/// Evaluates `sum_k coeffs_k phi_k(l / grid_size)` for `l = 0..grid_size`.
///
/// Frequencies at or above `grid_size / 2` alias on the grid; they are
/// evaluated faithfully at the grid points all the same.
pub fn reconstruct(coeffs: &CoefficientVector, grid_size: usize) -> Result<SampledSignal> {
    if grid_size == 0 {
        return Err(Error::Domain("grid size must be at least 1".into()));
    }
    let table = TrigTable::new(grid_size);
    let c = coeffs.coeffs();
    let mut values = vec![c.first().copied().unwrap_or(0.0); grid_size];
    for freq in 1..=(c.len() / 2) {
        let ca = SQRT_2 * c[2 * freq - 1];
        let sa = SQRT_2 * c.get(2 * freq).copied().unwrap_or(0.0);
        if ca == 0.0 && sa == 0.0 {
            continue;
        }
        let step = freq % grid_size;
        let mut idx = 0usize;
        for v in values.iter_mut() {
            *v += ca * table.cos[idx] + sa * table.sin[idx];
            idx += step;
            if idx >= grid_size {
                idx -= grid_size;
            }
        }
    }
    SampledSignal::new(values)
}

/// Evaluates the truncated series at a single point.
pub fn eval_series(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| if c == 0.0 { 0.0 } else { c * phi(i + 1, x) })
        .sum()
}

/// Euclidean distance between two coefficient sequences, the shorter one
/// zero-padded. By Parseval this is the `L2[0,1]` distance of the
/// corresponding functions.
pub fn coeff_l2_distance(a: &CoefficientVector, b: &CoefficientVector) -> f64 {
    padded_distance(a.coeffs(), b.coeffs())
}

pub(crate) fn padded_distance(a: &[f64], b: &[f64]) -> f64 {
    padded_distance_sq(a, b).sqrt()
}

pub(crate) fn padded_distance_sq(a: &[f64], b: &[f64]) -> f64 {
    let common = a.len().min(b.len());
    let shared: f64 = a[..common]
        .iter()
        .zip(&b[..common])
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let tail: f64 = a[common..].iter().chain(&b[common..]).map(|x| x * x).sum();
    shared + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signal_from(n: usize, f: impl Fn(f64) -> f64) -> SampledSignal {
        SampledSignal::new((0..n).map(|l| f(l as f64 / n as f64)).collect()).unwrap()
    }

    /// Direct summation with `phi` evaluated from scratch at every point.
    fn naive_forward(samples: &[f64], count: usize) -> Vec<f64> {
        let n = samples.len();
        (1..=count)
            .map(|k| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(l, y)| y * trig_basis_eval(k, l as f64 / n as f64).unwrap())
                    .sum::<f64>()
                    / n as f64
            })
            .collect()
    }

    #[test]
    fn basis_values() {
        assert_eq!(trig_basis_eval(1, 0.37).unwrap(), 1.0);
        assert!((trig_basis_eval(2, 0.0).unwrap() - 2f64.sqrt()).abs() < 1e-7);
        assert!((trig_basis_eval(3, 0.25).unwrap() - 2f64.sqrt()).abs() < 1e-7);
        assert!(matches!(trig_basis_eval(0, 0.5), Err(Error::Domain(_))));
        assert!(trig_basis_eval(2, 1.5).is_err());
    }

    #[test]
    fn constant_signal_has_only_mean() {
        let y = forward_transform(&signal_from(64, |_| 5.0), 3).unwrap();
        assert_eq!(y.len(), 7);
        assert!((y.get(1) - 5.0).abs() < 1e-12);
        for k in 2..=7 {
            assert!(y.get(k).abs() < 1e-12, "k = {k}");
        }
        assert!((y.epsilon() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn single_cosine() {
        let s = signal_from(64, |x| SQRT_2 * (2.0 * PI * x).cos());
        let y = forward_transform(&s, 2).unwrap();
        let oracle = naive_forward(s.samples(), 5);
        for k in 1..=5 {
            let expected = if k == 2 { 1.0 } else { 0.0 };
            assert!((oracle[k - 1] - expected).abs() < 1e-12);
            assert!((y.get(k) - expected).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn scaled_second_sine() {
        let s = signal_from(128, |x| 3.0 * SQRT_2 * (2.0 * PI * 2.0 * x).sin());
        let y = forward_transform(&s, 3).unwrap();
        let oracle = naive_forward(s.samples(), 7);
        for k in 1..=7 {
            let expected = if k == 5 { 3.0 } else { 0.0 };
            assert!((oracle[k - 1] - expected).abs() < 1e-12);
            assert!((y.get(k) - expected).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn table_transform_matches_naive_sum() {
        let s = signal_from(97, |x| (7.0 * x).sin() + x * x - 0.3 * (31.0 * x).cos());
        let count = 2 * max_harmonics(97) + 1;
        let fast = forward_coefficients(&s, count).unwrap();
        let slow = naive_forward(s.samples(), count);
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn nyquist_guard() {
        let s = signal_from(20, |x| x);
        assert_eq!(max_harmonics(20), 4);
        assert!(forward_transform(&s, 4).is_ok());
        assert_eq!(
            forward_transform(&s, 5),
            Err(Error::FrequencyOverflow {
                coefficients: 11,
                samples: 20
            })
        );
    }

    #[test]
    fn reconstruct_simple_cases() {
        let c = CoefficientVector::exact(vec![2.5, 0.0, 0.0]).unwrap();
        assert!(reconstruct(&c, 17).unwrap().samples().iter().all(|&v| v == 2.5));
        let z = CoefficientVector::exact(vec![0.0; 5]).unwrap();
        assert!(reconstruct(&z, 8).unwrap().samples().iter().all(|&v| v == 0.0));
        assert!(reconstruct(&z, 0).is_err());
    }

    #[test]
    fn harmonic_round_trip() {
        let s = signal_from(64, |x| 0.5 + 2.0 * (2.0 * PI * 3.0 * x).sin() - (2.0 * PI * x).cos());
        let back = reconstruct(&forward_transform(&s, 4).unwrap(), 64).unwrap();
        let err = s
            .samples()
            .iter()
            .zip(back.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "max error {err}");
    }

    #[test]
    fn distance_basic() {
        let a = CoefficientVector::exact(vec![1.0, 0.0]).unwrap();
        let b = CoefficientVector::exact(vec![0.0, 1.0]).unwrap();
        assert_eq!(coeff_l2_distance(&a, &a), 0.0);
        assert!((coeff_l2_distance(&a, &b) - SQRT_2).abs() < 1e-15);
        let short = CoefficientVector::exact(vec![1.0]).unwrap();
        let long = CoefficientVector::exact(vec![1.0, 0.0, 3.0]).unwrap();
        assert!((coeff_l2_distance(&short, &long) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_vectors() {
        assert!(SampledSignal::new(vec![]).is_err());
        assert!(SampledSignal::new(vec![1.0, f64::NAN]).is_err());
        assert!(CoefficientVector::new(vec![1.0], -1.0).is_err());
        assert!(CoefficientVector::new(vec![f64::INFINITY], 0.1).is_err());
    }
}
