//! Fourier-series shrinkage estimation and function classification for noisy
//! sampled signals.
//!
//! A sampled signal `Y_l = f(l/N) + Z_l` is mapped to trigonometric
//! coefficients, which behave like a Gaussian sequence model
//! `y_k = theta_k + eps z_k` with `eps ~ 1/sqrt(N)`. The crate provides
//!
//! * [`basis`]: the trigonometric basis and forward/inverse transforms,
//! * [`shrinkage`]: Pinsker, James-Stein and blockwise James-Stein estimators,
//! * [`synth`]: seeded Sobolev-class signal and dataset generators,
//! * [`classify`]: the minimum-distance decoder, PCA, LDA, the two feature
//!   pipelines and cross-validation,
//! * [`experiments`]: Monte-Carlo risk curves, adaptivity and consistency
//!   studies, classifier benchmarks and the phase ablation,
//! * [`io`]: dataset and report file formats.

pub mod basis;
pub mod classify;
pub mod error;
pub mod experiments;
pub mod io;
pub mod rng;
pub mod shrinkage;
pub mod synth;

pub use error::{Error, Result};
