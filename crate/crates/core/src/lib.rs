//! Spectrogram denoising lab.
//!
//! The pipeline runs accelerometer traces through STFT spectrogram images,
//! corrupts them with calibrated noise from nine distributions (optionally
//! colored by a first-order filter), and trains a convolutional denoising
//! auto-encoder written from scratch on top of the [`nn`] module. The
//! [`sweep`] module runs noise-factor by coloring by distribution grids and
//! renders CSV tables and SVG charts.

pub mod cdae;
pub mod dataset;
pub mod fft;
pub mod imageio;
pub mod nn;
pub mod noisegen;
pub mod rng;
pub mod stft;
pub mod sweep;
pub mod timeseries;

pub use nn::Tensor;
