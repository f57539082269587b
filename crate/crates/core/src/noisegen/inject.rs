use std::str::FromStr;

use super::{color_in_place, sample_standardized, Distribution, NoiseError};
use crate::nn::Tensor;
use crate::stft::SpectrogramImage;

/// Direction along which the coloring filter runs over an `[H, W, C]` field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ColoringAxis {
    /// Each image row (one frequency bin over time) filtered independently.
    #[default]
    Time,
    /// One long sequence in row-major `H, W, C` order.
    Flattened,
}

impl FromStr for ColoringAxis {
    type Err = NoiseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "time" | "row" | "rows" => Ok(Self::Time),
            "flattened" | "flat" => Ok(Self::Flattened),
            other => Err(NoiseError::InvalidParam(format!("unknown coloring axis {other:?}"))),
        }
    }
}

impl std::fmt::Display for ColoringAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Time => "time",
            Self::Flattened => "flattened",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub dist: Distribution,
    /// Added-noise power over clean-image power.
    pub noise_factor: f64,
    pub coloring_a: f64,
    pub seed: u64,
    pub axis: ColoringAxis,
}

impl NoiseSpec {
    pub fn white(dist: Distribution, noise_factor: f64, seed: u64) -> Self {
        Self {
            dist,
            noise_factor,
            coloring_a: 0.0,
            seed,
            axis: ColoringAxis::Time,
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.noise_factor.is_finite() && self.noise_factor >= 0.0) {
            return Err(NoiseError::InvalidParam(format!(
                "noise factor must be >= 0, got {}",
                self.noise_factor
            )));
        }
        if !(0.0..1.0).contains(&self.coloring_a) {
            return Err(NoiseError::InvalidParam(format!(
                "coloring parameter must be in [0, 1), got {}",
                self.coloring_a
            )));
        }
        Ok(())
    }
}

/// Standardized (optionally colored) noise with the shape of a target image.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseField {
    pub values: Tensor,
    pub provenance: NoiseSpec,
}

/// Draw a noise field for an `[H, W, C]` image. Mean and variance are the
/// distribution's (0 and 1) up to sampling error; no scaling is applied.
pub fn noise_field(shape: &[usize], spec: &NoiseSpec) -> Result<NoiseField, NoiseError> {
    spec.validate()?;
    let (h, w, c) = match *shape {
        [h, w, c] if h > 0 && w > 0 && c > 0 => (h, w, c),
        _ => return Err(NoiseError::InvalidParam(format!("bad field shape {shape:?}"))),
    };
    let mut raw = sample_standardized(&spec.dist, h * w * c, spec.seed)?;
    let values = match spec.axis {
        ColoringAxis::Flattened => {
            color_in_place(&mut raw, spec.coloring_a)?;
            raw
        }
        ColoringAxis::Time => {
            // raw is laid out channel-major, one contiguous trace per row
            let mut out = vec![0.0; h * w * c];
            for (trace_idx, trace) in raw.chunks_mut(w).enumerate() {
                color_in_place(trace, spec.coloring_a)?;
                let (ch, row) = (trace_idx / h, trace_idx % h);
                for (col, v) in trace.iter().enumerate() {
                    out[(row * w + col) * c + ch] = *v;
                }
            }
            out
        }
    };
    Ok(NoiseField {
        values: Tensor::from_vec(shape, values).map_err(|e| NoiseError::InvalidParam(e.to_string()))?,
        provenance: *spec,
    })
}

#[derive(Clone, Debug)]
pub struct Injection {
    pub noisy: SpectrogramImage,
    /// Standard deviation applied to the re-standardized field.
    pub sigma: f64,
    /// Variance of the added noise before clamping, over the clean variance.
    /// `None` when the clean image has zero variance.
    pub preclamp_ratio: Option<f64>,
}

/// Corrupt `clean` so the added noise carries `noise_factor` times the
/// clean pixel variance, then clamp to `[0, 1]`.
///
/// The drawn field is re-centred and rescaled to exactly unit population
/// variance before scaling, so the pre-clamp power ratio equals the noise
/// factor up to rounding.
pub fn inject_detailed(clean: &SpectrogramImage, spec: &NoiseSpec) -> Result<Injection, NoiseError> {
    spec.validate()?;
    let px = &clean.pixels;
    if px.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(NoiseError::InvalidParam("clean pixels must lie in [0, 1]".into()));
    }
    let signal_power = px.variance();
    if spec.noise_factor == 0.0 || signal_power == 0.0 {
        return Ok(Injection {
            noisy: clean.clone(),
            sigma: 0.0,
            preclamp_ratio: (signal_power > 0.0).then_some(0.0),
        });
    }
    let field = noise_field(px.shape(), spec)?;
    let f = field.values.data();
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let std = (f.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let sigma = (spec.noise_factor * signal_power).sqrt();
    let scale = if std > 0.0 { sigma / std } else { 0.0 };

    let added: Vec<f64> = f.iter().map(|v| (v - mean) * scale).collect();
    let added_mean = added.iter().sum::<f64>() / n;
    let added_var = added.iter().map(|v| (v - added_mean).powi(2)).sum::<f64>() / n;
    let noisy: Vec<f64> = px
        .data()
        .iter()
        .zip(&added)
        .map(|(c, e)| (c + e).clamp(0.0, 1.0))
        .collect();
    Ok(Injection {
        noisy: SpectrogramImage {
            pixels: Tensor::from_vec(px.shape(), noisy).expect("same shape"),
            source_id: clean.source_id.clone(),
            db_floor: clean.db_floor,
        },
        sigma,
        preclamp_ratio: Some(added_var / signal_power),
    })
}

pub fn inject(clean: &SpectrogramImage, spec: &NoiseSpec) -> Result<SpectrogramImage, NoiseError> {
    inject_detailed(clean, spec).map(|inj| inj.noisy)
}
