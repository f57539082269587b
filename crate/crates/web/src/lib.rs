//! Browser bindings for the noise explorer page in `www/`.
//!
//! Each exported function wraps a plain Rust function that returns
//! `Result<_, String>`, so the logic is testable without a JS host.

use specdenoise::noisegen::{
    autocorrelation, color, estimate_moments, inject_detailed, sample_standardized, ColoringAxis, DistKind,
    Distribution, NoiseSpec,
};
use specdenoise::stft::{apply_colormap, stft, to_image, ImageShape, StftConfig};
use specdenoise::timeseries::{segment, synthesize};
use specdenoise::Tensor;
use wasm_bindgen::prelude::*;

const MAX_TRACE: usize = 1 << 20;

/// A sampled noise sequence with its summary statistics.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct NoiseTrace {
    values: Vec<f64>,
    histogram: Vec<u32>,
    hist_lo: f64,
    hist_hi: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub target_excess_kurtosis: f64,
    pub lag1: f64,
}

#[wasm_bindgen]
impl NoiseTrace {
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// Equal-width bin counts over `[hist_lo, hist_hi]`.
    #[wasm_bindgen(getter)]
    pub fn histogram(&self) -> Vec<u32> {
        self.histogram.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn hist_lo(&self) -> f64 {
        self.hist_lo
    }

    #[wasm_bindgen(getter)]
    pub fn hist_hi(&self) -> f64 {
        self.hist_hi
    }
}

/// A clean spectrogram and its corrupted copy as RGBA bytes.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct Corruption {
    clean: Vec<u8>,
    noisy: Vec<u8>,
    pub width: usize,
    pub height: usize,
    pub psnr_db: f64,
    pub preclamp_ratio: f64,
}

#[wasm_bindgen]
impl Corruption {
    #[wasm_bindgen(getter)]
    pub fn clean_rgba(&self) -> Vec<u8> {
        self.clean.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn noisy_rgba(&self) -> Vec<u8> {
        self.noisy.clone()
    }
}

pub fn parse_dist(name: &str) -> Result<Distribution, String> {
    name.parse().map_err(|e: specdenoise::noisegen::NoiseError| e.to_string())
}

pub fn histogram(x: &[f64], bins: usize, lo: f64, hi: f64) -> Vec<u32> {
    let mut h = vec![0u32; bins];
    let width = (hi - lo) / bins as f64;
    for &v in x {
        if v >= lo && v <= hi {
            h[(((v - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    h
}

pub fn noise_trace_native(dist: &str, n: usize, a: f64, seed: u64, bins: usize) -> Result<NoiseTrace, String> {
    if !(4..=MAX_TRACE).contains(&n) {
        return Err(format!("n must be in 4..={MAX_TRACE}"));
    }
    if bins == 0 {
        return Err("bins must be positive".into());
    }
    let dist = parse_dist(dist)?;
    let white = sample_standardized(&dist, n, seed).map_err(|e| e.to_string())?;
    let values = color(&white, a).map_err(|e| e.to_string())?;
    let m = estimate_moments(&values).map_err(|e| e.to_string())?;
    let (hist_lo, hist_hi) = (-5.0, 5.0);
    Ok(NoiseTrace {
        histogram: histogram(&values, bins, hist_lo, hist_hi),
        hist_lo,
        hist_hi,
        mean: m.mean,
        variance: m.variance,
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
        target_excess_kurtosis: dist.excess_kurtosis(),
        lag1: autocorrelation(&values, 1),
        values,
    })
}

fn rgba(img: &Tensor) -> Vec<u8> {
    let rgb = if img.shape()[2] == 1 { apply_colormap(img) } else { img.clone() };
    rgb.data()
        .chunks(3)
        .flat_map(|p| {
            let b = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
            [b(p[0]), b(p[1]), b(p[2]), 255]
        })
        .collect()
}

/// Render one synthetic vibration segment and corrupt it.
pub fn corrupt_native(dist: &str, nf: f64, a: f64, seed: u64, size: usize) -> Result<Corruption, String> {
    if !(8..=256).contains(&size) {
        return Err("size must be in 8..=256".into());
    }
    let dist = parse_dist(dist)?;
    let ts = synthesize(seed, 300, 1, 100.0).map_err(|e| e.to_string())?;
    let seg = segment(&ts, 300, 300).map_err(|e| e.to_string())?.remove(0);
    let grid = stft(&seg, &StftConfig::default()).map_err(|e| e.to_string())?;
    let shape = ImageShape { h: size, w: size, c: 1 };
    let clean = to_image(&grid, shape, -80.0, "demo").map_err(|e| e.to_string())?;
    let spec = NoiseSpec {
        dist,
        noise_factor: nf,
        coloring_a: a,
        seed: seed ^ 0x9e37_79b9_7f4a_7c15,
        axis: ColoringAxis::Time,
    };
    let inj = inject_detailed(&clean, &spec).map_err(|e| e.to_string())?;
    let psnr_db = specdenoise::cdae::psnr(&inj.noisy.pixels, &clean.pixels).map_err(|e| e.to_string())?;
    Ok(Corruption {
        clean: rgba(&clean.pixels),
        noisy: rgba(&inj.noisy.pixels),
        width: size,
        height: size,
        psnr_db,
        preclamp_ratio: inj.preclamp_ratio.unwrap_or(f64::NAN),
    })
}

/// Distribution names accepted by the other functions, comma separated.
#[wasm_bindgen]
pub fn distributions() -> String {
    DistKind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(",")
}

#[wasm_bindgen]
pub fn noise_trace(dist: &str, n: usize, a: f64, seed: u64, bins: usize) -> Result<NoiseTrace, JsError> {
    noise_trace_native(dist, n, a, seed, bins).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn corrupt_spectrogram(dist: &str, nf: f64, a: f64, seed: u64, size: usize) -> Result<Corruption, JsError> {
    corrupt_native(dist, nf, a, seed, size).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_moments_follow_the_distribution() {
        let t = noise_trace_native("laplace", 200_000, 0.0, 1, 50).unwrap();
        assert!((t.variance - 1.0).abs() < 0.02);
        assert!((t.excess_kurtosis - 3.0).abs() < 0.3, "{}", t.excess_kurtosis);
        assert_eq!(t.target_excess_kurtosis, 3.0);
        assert_eq!(t.values().len(), 200_000);
        let counted: u32 = t.histogram().iter().sum();
        assert!(counted > 199_000 && counted <= 200_000);

        let c = noise_trace_native("gaussian", 100_000, 0.6, 1, 10).unwrap();
        assert!((c.lag1 - 0.6).abs() < 0.02);
    }

    #[test]
    fn bad_arguments_are_errors() {
        assert!(noise_trace_native("cauchy", 100, 0.0, 0, 10).is_err());
        assert!(noise_trace_native("gaussian", 2, 0.0, 0, 10).is_err());
        assert!(noise_trace_native("gaussian", 100, 1.0, 0, 10).is_err());
        assert!(corrupt_native("gaussian", -0.1, 0.0, 0, 64).is_err());
        assert!(corrupt_native("gaussian", 0.3, 0.0, 0, 4).is_err());
    }

    #[test]
    fn corruption_is_calibrated_and_sized() {
        let c = corrupt_native("uniform", 0.3, 0.0, 4, 64).unwrap();
        assert_eq!(c.clean_rgba().len(), 64 * 64 * 4);
        assert_eq!(c.noisy_rgba().len(), 64 * 64 * 4);
        assert!((c.preclamp_ratio - 0.3).abs() < 1e-9);
        assert!(c.psnr_db.is_finite());
        let louder = corrupt_native("uniform", 0.9, 0.0, 4, 64).unwrap();
        assert!(louder.psnr_db < c.psnr_db);
        let none = corrupt_native("uniform", 0.0, 0.0, 4, 64).unwrap();
        assert_eq!(none.clean_rgba(), none.noisy_rgba());
    }

    #[test]
    fn histogram_bins_edges() {
        assert_eq!(histogram(&[-1.0, 0.0, 0.99, 1.0, 2.0], 2, -1.0, 1.0), vec![1, 3]);
        assert_eq!(distributions().split(',').count(), 9);
    }
}
