//! Seeded generators for Sobolev-class functions, separated function classes
//! and noisy multichannel trials.
//!
//! Everything here is a pure function of its parameters and seed. Trials are
//! generated from per-trial derived streams so datasets can be built in
//! parallel without changing a single bit of the output.

use rand::Rng;
use rayon::prelude::*;

use crate::basis::{padded_distance, reconstruct, CoefficientVector, SampledSignal};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::shrinkage::EllipsoidSpec;

/// I.i.d. Gaussian sample noise `Z_l ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
    seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("noise sigma must be positive, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }

    /// Unit-variance noise.
    pub fn standard(seed: u64) -> Self {
        Self { sigma: 1.0, seed }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn coefficient_count(harmonics: usize) -> usize {
    2 * harmonics + 1
}

/// Random point of the ellipsoid: `g_k / max(a_k, 1)` rescaled so that its
/// energy `sum a_k^2 theta_k^2` equals `fraction * C^2`.
pub(crate) fn sobolev_point(
    rng: &mut StreamRng,
    spec: &EllipsoidSpec,
    len: usize,
    fraction: f64,
) -> Vec<f64> {
    let mut theta: Vec<f64> = (1..=len)
        .map(|k| rng::normal(rng) / spec.weight(k).max(1.0))
        .collect();
    let energy = spec.energy(&theta);
    let scale = if energy > 0.0 {
        (fraction * spec.radius() * spec.radius() / energy).sqrt()
    } else {
        0.0
    };
    theta.iter_mut().for_each(|t| *t *= scale);
    theta
}

/// Draws a coefficient vector `theta_1..theta_{2T+1}` inside the ellipsoid,
/// with energy a uniform fraction in `[0.2, 1)` of `C^2`.
pub fn sample_sobolev(spec: &EllipsoidSpec, harmonics: usize, seed: u64) -> Result<CoefficientVector> {
    if harmonics == 0 {
        return Err(Error::Domain("harmonic count T must be at least 1".into()));
    }
    let mut rng = rng::stream(seed, &[]);
    let fraction = rng.random_range(0.2..1.0);
    let theta = sobolev_point(&mut rng, spec, coefficient_count(harmonics), fraction);
    CoefficientVector::exact(theta)
}

/// How class prototypes relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrototypeLayout {
    /// Independent Sobolev draws.
    Independent,
    /// One base function circularly shifted by `(k - 1) / K` for class `k`:
    /// harmonic `h` of the pair is rotated by `2 pi h (k - 1) / K`, so
    /// per-harmonic magnitudes are identical across classes.
    PhaseCoded,
    /// One base function; each class rescales every harmonic pair by its own
    /// factor in `[0.2, 1]`, keeping phases fixed.
    MagnitudeCoded,
}

impl PrototypeLayout {
    pub fn name(&self) -> &'static str {
        match self {
            PrototypeLayout::Independent => "independent",
            PrototypeLayout::PhaseCoded => "phase",
            PrototypeLayout::MagnitudeCoded => "magnitude",
        }
    }
}

impl std::str::FromStr for PrototypeLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Self::Independent),
            "phase" => Ok(Self::PhaseCoded),
            "magnitude" => Ok(Self::MagnitudeCoded),
            other => Err(Error::Invalid(format!(
                "unknown prototype layout `{other}` (expected independent, phase or magnitude)"
            ))),
        }
    }
}

/// `K` disjoint function classes. Class `k` is the ball of radius
/// `within_spread` around prototype `k`, intersected with the ellipsoid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    spec: EllipsoidSpec,
    harmonics: usize,
    separation: f64,
    within_spread: f64,
    prototypes: Vec<CoefficientVector>,
}

impl ClassModel {
    /// Validates the separation invariant: every pair of prototypes is more
    /// than `2 s + 2 within_spread` apart, and `within_spread < s / 2`.
    pub fn new(
        spec: EllipsoidSpec,
        harmonics: usize,
        prototypes: Vec<CoefficientVector>,
        separation: f64,
        within_spread: f64,
    ) -> Result<Self> {
        if prototypes.len() < 2 {
            return Err(Error::Domain(format!(
                "a class model needs at least 2 classes, got {}",
                prototypes.len()
            )));
        }
        check_geometry(separation, within_spread)?;
        let len = coefficient_count(harmonics);
        for (i, p) in prototypes.iter().enumerate() {
            if p.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    got: p.len(),
                });
            }
            if spec.energy(p.coeffs()) > spec.radius() * spec.radius() + 1e-12 {
                return Err(Error::Invalid(format!(
                    "prototype of class {} lies outside the ellipsoid",
                    i + 1
                )));
            }
        }
        let model = Self {
            spec,
            harmonics,
            separation,
            within_spread,
            prototypes,
        };
        let required = model.required_distance();
        let achieved = model.min_pairwise_distance();
        if achieved <= required {
            return Err(Error::Construction {
                required,
                achieved,
                attempts: 0,
            });
        }
        Ok(model)
    }

    pub fn spec(&self) -> &EllipsoidSpec {
        &self.spec
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn classes(&self) -> usize {
        self.prototypes.len()
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn within_spread(&self) -> f64 {
        self.within_spread
    }

    pub fn prototypes(&self) -> &[CoefficientVector] {
        &self.prototypes
    }

    /// Prototype of class `label` (1-based).
    pub fn prototype(&self, label: usize) -> &CoefficientVector {
        &self.prototypes[label - 1]
    }

    /// `2 s + 2 within_spread`: the prototype distance that keeps the class
    /// balls at least `2 s` apart.
    pub fn required_distance(&self) -> f64 {
        2.0 * self.separation + 2.0 * self.within_spread
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        min_pairwise(&self.prototypes)
    }

    /// L2 distance from `coeffs` to class `label`: distance to its prototype
    /// minus the ball radius, floored at zero.
    pub fn distance_to_class(&self, coeffs: &[f64], label: usize) -> f64 {
        (padded_distance(coeffs, self.prototype(label).coeffs()) - self.within_spread).max(0.0)
    }

    /// Random member of class `label`: the prototype plus a uniform draw from
    /// the `within_spread` ball, halved until it lands inside the ellipsoid.
    pub fn draw_member(&self, label: usize, rng: &mut StreamRng) -> CoefficientVector {
        let proto = self.prototype(label).coeffs();
        let dim = proto.len();
        let mut delta = vec![0.0; dim];
        if self.within_spread > 0.0 {
            rng::fill_normal(rng, &mut delta);
            let norm = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
            let u: f64 = rng.random();
            let radius = self.within_spread * u.powf(1.0 / dim as f64);
            let scale = if norm > 0.0 { radius / norm } else { 0.0 };
            delta.iter_mut().for_each(|v| *v *= scale);
        }
        let mut member: Vec<f64> = proto.iter().zip(&delta).map(|(p, d)| p + d).collect();
        let mut tries = 0;
        while !self.spec.contains(&member) && tries < 64 {
            delta.iter_mut().for_each(|v| *v *= 0.5);
            member = proto.iter().zip(&delta).map(|(p, d)| p + d).collect();
            tries += 1;
        }
        if !self.spec.contains(&member) {
            member = proto.to_vec();
        }
        CoefficientVector::from_parts_unchecked(member, 0.0)
    }
}

fn check_geometry(separation: f64, within_spread: f64) -> Result<()> {
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::Domain(format!(
            "class separation s must be positive, got {separation}"
        )));
    }
    if !(within_spread >= 0.0 && within_spread < separation / 2.0) {
        return Err(Error::Domain(format!(
            "within-class spread {within_spread} must satisfy 0 <= spread < s/2 = {}",
            separation / 2.0
        )));
    }
    Ok(())
}

fn min_pairwise(points: &[CoefficientVector]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.min(padded_distance(points[i].coeffs(), points[j].coeffs()));
        }
    }
    best
}

/// Candidate draws allowed per class (independent layout) or whole
/// prototype sets (structured layouts) before construction gives up.
pub const CANDIDATES_PER_CLASS: usize = 2000;

/// Rejection-samples `classes` independent prototypes whose pairwise
/// distances all exceed `2 s + 2 within_spread`.
pub fn make_class_model(
    classes: usize,
    spec: &EllipsoidSpec,
    harmonics: usize,
    separation: f64,
    within_spread: f64,
    seed: u64,
) -> Result<ClassModel> {
    make_structured_class_model(
        PrototypeLayout::Independent,
        classes,
        spec,
        harmonics,
        separation,
        within_spread,
        seed,
    )
}

/// Like [`make_class_model`] with a chosen prototype layout.
pub fn make_structured_class_model(
    layout: PrototypeLayout,
    classes: usize,
    spec: &EllipsoidSpec,
    harmonics: usize,
    separation: f64,
    within_spread: f64,
    seed: u64,
) -> Result<ClassModel> {
    if classes < 2 {
        return Err(Error::Domain(format!("need at least 2 classes, got {classes}")));
    }
    if harmonics == 0 {
        return Err(Error::Domain("harmonic count T must be at least 1".into()));
    }
    check_geometry(separation, within_spread)?;
    let len = coefficient_count(harmonics);
    let required = 2.0 * separation + 2.0 * within_spread;
    let mut rng = rng::stream(seed, &[u64::from_le_bytes(*b"classmdl")]);

    if layout != PrototypeLayout::Independent {
        let mut best = 0.0_f64;
        for _ in 0..CANDIDATES_PER_CLASS {
            let fraction = rng.random_range(0.5..1.0);
            let base = sobolev_point(&mut rng, spec, len, fraction);
            let prototypes: Vec<CoefficientVector> = (0..classes)
                .map(|k| {
                    let coeffs = match layout {
                        PrototypeLayout::PhaseCoded => {
                            shift_pairs(&base, k as f64 / classes as f64)
                        }
                        _ => scale_pairs(&base, &mut rng),
                    };
                    CoefficientVector::from_parts_unchecked(coeffs, 0.0)
                })
                .collect();
            let achieved = min_pairwise(&prototypes);
            if achieved > required {
                return ClassModel::new(*spec, harmonics, prototypes, separation, within_spread);
            }
            best = best.max(achieved);
        }
        return Err(Error::Construction {
            required,
            achieved: best,
            attempts: CANDIDATES_PER_CLASS,
        });
    }

    let mut accepted: Vec<CoefficientVector> = Vec::with_capacity(classes);
    let mut attempts = 0;
    while accepted.len() < classes {
        let mut stalled_best = 0.0_f64;
        let mut placed = false;
        for _ in 0..CANDIDATES_PER_CLASS {
            attempts += 1;
            let fraction = rng.random_range(0.2..1.0);
            let c = sobolev_point(&mut rng, spec, len, fraction);
            let nearest = accepted
                .iter()
                .map(|p| padded_distance(p.coeffs(), &c))
                .fold(f64::INFINITY, f64::min);
            if nearest > required {
                accepted.push(CoefficientVector::from_parts_unchecked(c, 0.0));
                placed = true;
                break;
            }
            stalled_best = stalled_best.max(nearest);
        }
        if !placed {
            let achieved = if accepted.len() >= 2 {
                min_pairwise(&accepted).min(stalled_best)
            } else {
                stalled_best
            };
            return Err(Error::Construction {
                required,
                achieved,
                attempts,
            });
        }
    }
    ClassModel::new(*spec, harmonics, accepted, separation, within_spread)
}

/// Coefficients of `x -> f(x - shift)`.
fn shift_pairs(base: &[f64], shift: f64) -> Vec<f64> {
    let mut out = base.to_vec();
    for h in 1..=(base.len() / 2) {
        let angle = std::f64::consts::TAU * h as f64 * shift;
        let (s, c) = angle.sin_cos();
        let (x, y) = (base[2 * h - 1], base[2 * h]);
        out[2 * h - 1] = c * x - s * y;
        out[2 * h] = s * x + c * y;
    }
    out
}

fn scale_pairs(base: &[f64], rng: &mut StreamRng) -> Vec<f64> {
    let mut out = base.to_vec();
    for h in 1..=(base.len() / 2) {
        let factor = rng.random_range(0.2..=1.0);
        out[2 * h - 1] *= factor;
        out[2 * h] *= factor;
    }
    out
}

/// One multichannel recording with its class label and session id.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub channels: Vec<SampledSignal>,
    pub label: usize,
    pub session: usize,
}

/// Generates one trial of class `label` and returns the true per-channel
/// coefficient vectors alongside it. Session is left at 1.
pub fn generate_trial_with_truth(
    model: &ClassModel,
    label: usize,
    channels: usize,
    samples: usize,
    noise: &NoiseModel,
    seed: u64,
) -> Result<(Trial, Vec<CoefficientVector>)> {
    if label == 0 || label > model.classes() {
        return Err(Error::Domain(format!(
            "label {label} outside 1..={}",
            model.classes()
        )));
    }
    if channels == 0 {
        return Err(Error::Domain("channel count must be positive".into()));
    }
    if samples <= coefficient_count(model.harmonics()) {
        return Err(Error::Domain(format!(
            "sample count {samples} must exceed 2T + 1 = {}",
            coefficient_count(model.harmonics())
        )));
    }
    let mut member_rng = rng::stream(seed, &[1]);
    let mut noise_rng = rng::stream(noise.seed(), &[seed, 2]);
    let mut signals = Vec::with_capacity(channels);
    let mut truths = Vec::with_capacity(channels);
    for _ in 0..channels {
        let member = model.draw_member(label, &mut member_rng);
        let mut values = reconstruct(&member, samples)?.into_samples();
        for v in values.iter_mut() {
            *v += noise.sigma() * rng::normal(&mut noise_rng);
        }
        signals.push(SampledSignal::new(values)?);
        truths.push(member);
    }
    Ok((
        Trial {
            channels: signals,
            label,
            session: 1,
        },
        truths,
    ))
}

pub fn generate_trial(
    model: &ClassModel,
    label: usize,
    channels: usize,
    samples: usize,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Trial> {
    generate_trial_with_truth(model, label, channels, samples, noise, seed).map(|(t, _)| t)
}

/// Shape and provenance of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub samples: usize,
    pub channels: usize,
    pub classes: usize,
    pub seed: u64,
    /// Free-form generator parameters, kept in insertion order.
    pub params: Vec<(String, String)>,
}

/// Labeled multichannel trials sharing one sample count and channel count.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    trials: Vec<Trial>,
    meta: DatasetMeta,
}

impl LabeledDataset {
    pub fn new(trials: Vec<Trial>, meta: DatasetMeta) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::Invalid("dataset has no trials".into()));
        }
        if meta.classes == 0 {
            return Err(Error::Invalid("dataset declares zero classes".into()));
        }
        for (i, t) in trials.iter().enumerate() {
            if t.channels.len() != meta.channels {
                return Err(Error::Invalid(format!(
                    "trial {i} has {} channels, expected {}",
                    t.channels.len(),
                    meta.channels
                )));
            }
            if let Some(c) = t.channels.iter().find(|c| c.len() != meta.samples) {
                return Err(Error::Invalid(format!(
                    "trial {i} has a channel of {} samples, expected {}",
                    c.len(),
                    meta.samples
                )));
            }
            if t.label == 0 || t.label > meta.classes {
                return Err(Error::Invalid(format!(
                    "trial {i} has label {} outside 1..={}",
                    t.label, meta.classes
                )));
            }
        }
        Ok(Self { trials, meta })
    }

    pub fn trials(&self) -> &[Trial] {
        &self.trials
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.trials.iter().map(|t| t.label).collect()
    }

    pub fn sessions(&self) -> Vec<usize> {
        self.trials.iter().map(|t| t.session).collect()
    }

    /// Same trials with labels replaced, e.g. by a permutation.
    pub fn with_labels(&self, labels: &[usize]) -> Result<Self> {
        if labels.len() != self.trials.len() {
            return Err(Error::DimensionMismatch {
                expected: self.trials.len(),
                got: labels.len(),
            });
        }
        let trials = self
            .trials
            .iter()
            .zip(labels)
            .map(|(t, &label)| Trial {
                label,
                ..t.clone()
            })
            .collect();
        Self::new(trials, self.meta.clone())
    }
}

/// Balanced dataset: trial `i` has label `i / trials_per_class + 1` and
/// session `i mod sessions + 1`.
pub fn generate_dataset(
    model: &ClassModel,
    trials_per_class: usize,
    channels: usize,
    samples: usize,
    sessions: usize,
    noise: &NoiseModel,
    seed: u64,
) -> Result<LabeledDataset> {
    if trials_per_class == 0 || channels == 0 || samples == 0 || sessions == 0 {
        return Err(Error::Domain(
            "trial, channel, sample and session counts must all be positive".into(),
        ));
    }
    let total = trials_per_class * model.classes();
    let trials = (0..total)
        .into_par_iter()
        .map(|i| {
            let label = i / trials_per_class + 1;
            let trial_seed = rng::derive_seed(seed, &[i as u64]);
            let mut trial = generate_trial(model, label, channels, samples, noise, trial_seed)?;
            trial.session = i % sessions + 1;
            Ok(trial)
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = model.spec();
    let params = vec![
        ("alpha".to_string(), fmt_param(spec.alpha())),
        ("radius".to_string(), fmt_param(spec.radius())),
        ("harmonics".to_string(), model.harmonics().to_string()),
        ("separation".to_string(), fmt_param(model.separation())),
        ("within_spread".to_string(), fmt_param(model.within_spread())),
        ("sigma".to_string(), fmt_param(noise.sigma())),
        ("noise_seed".to_string(), noise.seed().to_string()),
        ("trials_per_class".to_string(), trials_per_class.to_string()),
        ("sessions".to_string(), sessions.to_string()),
        (
            "min_prototype_distance".to_string(),
            fmt_param(model.min_pairwise_distance()),
        ),
    ];
    LabeledDataset::new(
        trials,
        DatasetMeta {
            samples,
            channels,
            classes: model.classes(),
            seed,
            params,
        },
    )
}

fn fmt_param(v: f64) -> String {
    crate::io::fmt_f64(v)
}
