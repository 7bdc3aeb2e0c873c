//! Shrinkage estimators for sequence-model coefficients.
//!
//! * Pinsker: linear diagonal shrinkage `(1 - a_k / mu)_+ y_k`, minimax among
//!   linear estimators over a Sobolev ellipsoid.
//! * James-Stein: a common positive-part factor applied to a whole vector.
//! * Blockwise James-Stein: James-Stein per dyadic block, with pass-through
//!   low blocks and zeroed high blocks. It needs no smoothness parameters.

use std::ops::RangeInclusive;

use crate::basis::CoefficientVector;
use crate::error::{Error, Result};

/// Sobolev ellipsoid `{theta : sum_k a_k^2 theta_k^2 <= C^2}` with weights
/// `a_1 = 0`, `a_{2k} = a_{2k+1} = (2k)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidSpec {
    alpha: f64,
    radius: f64,
}

impl EllipsoidSpec {
    pub fn new(alpha: f64, radius: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("smoothness alpha must be positive, got {alpha}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("radius C must be positive, got {radius}")));
        }
        Ok(Self { alpha, radius })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `a_k` for 1-based `k`.
    pub fn weight(&self, k: usize) -> f64 {
        assert!(k >= 1, "ellipsoid weights are indexed from 1");
        if k == 1 {
            0.0
        } else {
            ((2 * (k / 2)) as f64).powf(self.alpha)
        }
    }

    pub fn weights(&self, count: usize) -> Vec<f64> {
        (1..=count).map(|k| self.weight(k)).collect()
    }

    /// `sum_k a_k^2 theta_k^2` for the given coefficients.
    pub fn energy(&self, coeffs: &[f64]) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let a = self.weight(i + 1);
                a * a * t * t
            })
            .sum()
    }

    pub fn contains(&self, coeffs: &[f64]) -> bool {
        self.energy(coeffs) <= self.radius * self.radius
    }
}

/// `(a_1, ..., a_count)` of the ellipsoid.
pub fn ellipsoid_weights(spec: &EllipsoidSpec, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Domain("weight count must be at least 1".into()));
    }
    Ok(spec.weights(count))
}

/// Diagonal weights `c_k` in `[0, 1]`. Coefficients past `len()` are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkageProfile {
    weights: Vec<f64>,
}

impl ShrinkageProfile {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("a shrinkage profile needs at least one weight".into()));
        }
        if let Some((i, c)) = weights
            .iter()
            .enumerate()
            .find(|(_, c)| !(0.0..=1.0).contains(*c))
        {
            return Err(Error::Domain(format!(
                "shrinkage weight c_{} = {c} lies outside [0, 1]",
                i + 1
            )));
        }
        Ok(Self { weights })
    }

    /// All ones: no shrinkage over `len` coefficients.
    pub fn identity(len: usize) -> Result<Self> {
        Self::new(vec![1.0; len])
    }

    /// Binary mask keeping coefficients `lo..=hi` (1-based) out of `len`.
    pub fn band(lo: usize, hi: usize, len: usize) -> Result<Self> {
        if lo == 0 || lo > hi || hi > len {
            return Err(Error::Domain(format!(
                "band {lo}..={hi} is not a valid range within 1..={len}"
            )));
        }
        Self::new(
            (1..=len)
                .map(|k| if (lo..=hi).contains(&k) { 1.0 } else { 0.0 })
                .collect(),
        )
    }

    /// Pinsker weights `(1 - a_k/mu)_+` over `len` coefficients.
    pub fn pinsker(spec: &EllipsoidSpec, mu: f64, len: usize) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
        Self::new((1..=len).map(|k| pinsker_factor(spec.weight(k), mu)).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Truncation length: number of coefficients kept.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `c_k y_k` for `k <= len()`; output has exactly `len()` entries.
    pub fn apply(&self, y: &CoefficientVector) -> CoefficientVector {
        let coeffs = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, c)| c * y.coeffs().get(i).copied().unwrap_or(0.0))
            .collect();
        CoefficientVector::from_parts_unchecked(coeffs, y.epsilon())
    }
}

#[inline]
fn pinsker_factor(a: f64, mu: f64) -> f64 {
    (1.0 - a / mu).max(0.0)
}

/// Left side of the water-filling equation, `eps^2 sum_k a_k (mu - a_k)_+`.
fn water_level(spec: &EllipsoidSpec, epsilon: f64, mu: f64) -> f64 {
    let mut total = 0.0;
    let mut k = 2;
    loop {
        let a = spec.weight(k);
        if a >= mu {
            break;
        }
        total += a * (mu - a);
        k += 1;
    }
    epsilon * epsilon * total
}

/// The Pinsker constant `mu`: root of `eps^2 sum_k a_k (mu - a_k)_+ = C^2`.
///
/// The left side is continuous, nondecreasing and unbounded in `mu`, so a
/// bracket is found by doubling from `a_2` and refined by bisection to a
/// relative width of `1e-12`.
pub fn pinsker_mu(spec: &EllipsoidSpec, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("noise level must be positive, got {epsilon}")));
    }
    let target = spec.radius() * spec.radius();
    // Below a_2 the sum is empty.
    let mut lo = spec.weight(2);
    let mut hi = 2.0 * lo;
    while water_level(spec, epsilon, hi) < target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Domain(format!(
                "no finite Pinsker constant for epsilon = {epsilon}"
            )));
        }
    }
    while (hi - lo) > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if water_level(spec, epsilon, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Pinsker's estimator `(1 - a_k/mu)_+ y_k`. Coordinates with `a_k >= mu`
/// come out exactly zero.
pub fn pinsker_shrink(y: &CoefficientVector, spec: &EllipsoidSpec, mu: f64) -> Result<CoefficientVector> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let coeffs = y
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, v)| pinsker_factor(spec.weight(i + 1), mu) * v)
        .collect();
    Ok(CoefficientVector::from_parts_unchecked(coeffs, y.epsilon()))
}

/// Positive-part James-Stein estimate of a mean vector observed with noise
/// level `epsilon`. Defined for `n > 2`; a zero input maps to zero.
pub fn james_stein(y: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    let n = y.len();
    if n <= 2 {
        return Err(Error::Domain(format!(
            "James-Stein shrinkage needs more than 2 coordinates, got {n}"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("noise level must be positive, got {epsilon}")));
    }
    let factor = james_stein_factor(y, epsilon);
    Ok(y.iter().map(|v| factor * v).collect())
}

fn james_stein_factor(y: &[f64], epsilon: f64) -> f64 {
    let norm_sq: f64 = y.iter().map(|v| v * v).sum();
    if norm_sq == 0.0 {
        return 0.0;
    }
    let n = y.len() as f64;
    (1.0 - (n - 2.0) * epsilon * epsilon / norm_sq).max(0.0)
}

/// Dyadic blocks `B_j = {2^j, ..., 2^{j+1} - 1}` for `j = 0..J`, with blocks
/// `j <= L` passed through and blocks `j >= J` zeroed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPartition {
    pass_through: usize,
    cutoff: usize,
}

impl BlockPartition {
    /// Last block index copied unchanged (`L`).
    pub fn pass_through(&self) -> usize {
        self.pass_through
    }

    /// First block index that is zeroed (`J`).
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// 1-based index range of block `j`.
    pub fn block(&self, j: usize) -> RangeInclusive<usize> {
        (1usize << j)..=((1usize << (j + 1)) - 1)
    }

    pub fn blocks(&self) -> Vec<RangeInclusive<usize>> {
        (0..self.cutoff).map(|j| self.block(j)).collect()
    }

    /// Number of coefficients covered by blocks `0..J`, i.e. `2^J - 1`.
    pub fn coefficient_count(&self) -> usize {
        (1usize << self.cutoff) - 1
    }
}

pub fn dyadic_blocks(pass_through: usize, cutoff: usize) -> Result<BlockPartition> {
    if cutoff == 0 {
        return Err(Error::Domain("block cutoff J must be positive".into()));
    }
    if pass_through >= cutoff {
        return Err(Error::Domain(format!(
            "pass-through limit L = {pass_through} must be below cutoff J = {cutoff}"
        )));
    }
    if cutoff >= usize::BITS as usize - 1 {
        return Err(Error::Domain(format!("block cutoff J = {cutoff} is too large")));
    }
    Ok(BlockPartition {
        pass_through,
        cutoff,
    })
}

/// `floor(log2(1/eps^2))`, the block cutoff for noise level `eps`.
pub fn cutoff_for_epsilon(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "block cutoff needs 0 < epsilon < 1, got {epsilon}"
        )));
    }
    Ok((1.0 / (epsilon * epsilon)).log2().floor() as usize)
}

/// `floor(log2(N))`, the block cutoff for a regression with `N` samples.
pub fn cutoff_for_samples(samples: usize) -> Result<usize> {
    if samples < 2 {
        return Err(Error::Domain(format!(
            "block cutoff needs at least 2 samples, got {samples}"
        )));
    }
    Ok((usize::BITS - 1 - samples.leading_zeros()) as usize)
}

/// Blockwise James-Stein estimate.
///
/// The output has `max(y.len(), 2^J - 1)` coefficients: blocks `j <= L` are
/// copied, blocks `L < j < J` are James-Stein shrunk with `n = 2^j` and
/// `eps = y.epsilon()`, and everything from index `2^J` on is zero. Missing
/// coefficients inside `1..2^J` read as zero. Blocks of size 2 or less in the
/// shrinkage range are copied because James-Stein is undefined there.
pub fn bjs_estimate(y: &CoefficientVector, partition: &BlockPartition) -> Result<CoefficientVector> {
    let epsilon = y.epsilon();
    if !(epsilon > 0.0) {
        return Err(Error::Domain(
            "blockwise James-Stein needs a positive noise level".into(),
        ));
    }
    let covered = partition.coefficient_count();
    let mut out = y.coeffs().to_vec();
    if out.len() < covered {
        out.resize(covered, 0.0);
    }
    for j in (partition.pass_through + 1)..partition.cutoff {
        let range = partition.block(j);
        let block = &mut out[(range.start() - 1)..*range.end()];
        if block.len() <= 2 {
            continue;
        }
        let factor = james_stein_factor(block, epsilon);
        block.iter_mut().for_each(|v| *v *= factor);
    }
    out[covered..].iter_mut().for_each(|v| *v = 0.0);
    Ok(CoefficientVector::from_parts_unchecked(out, epsilon))
}
