//! Noise synthesis: standardized samplers for nine distributions, the
//! first-order coloring filter, and calibrated injection into images.

mod color;
mod dist;
mod inject;
mod moments;

pub use color::{color, color_in_place};
pub use dist::{
    raised_cosine_cdf, raised_cosine_inverse_cdf, raised_cosine_std, sample_standardized, DistKind,
    Distribution, Gaussianity, DEFAULT_WEIBULL_K,
};
pub use inject::{inject, inject_detailed, noise_field, ColoringAxis, Injection, NoiseField, NoiseSpec};
pub use moments::{autocorrelation, estimate_moments, Moments};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("need at least 4 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sequence has zero variance; skewness and kurtosis are undefined")]
    DegenerateVariance,
}
