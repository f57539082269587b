//! Short-time Fourier transform and spectrogram images.

use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::fft::Fft;
use crate::nn::Tensor;
use crate::timeseries::Segment;

/// Offset added to magnitudes before taking logs.
pub const LOG_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StftError {
    #[error("invalid STFT configuration: {0}")]
    InvalidConfig(String),
    #[error("window of {window_len} samples is longer than the segment ({segment_len})")]
    WindowTooLong {
        window_len: usize,
        segment_len: usize,
    },
    #[error("bad image shape: {0}")]
    BadShape(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    Hann,
    Hamming,
    Rectangular,
}

impl FromStr for WindowKind {
    type Err = StftError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hann" => Ok(Self::Hann),
            "hamming" => Ok(Self::Hamming),
            "rect" | "rectangular" => Ok(Self::Rectangular),
            other => Err(StftError::InvalidConfig(format!("unknown window {other:?}"))),
        }
    }
}

impl std::fmt::Display for WindowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Hann => "hann",
            Self::Hamming => "hamming",
            Self::Rectangular => "rectangular",
        })
    }
}

/// Symmetric window of length `len` (MATLAB `hann`/`hamming` convention).
pub fn window(kind: WindowKind, len: usize) -> Vec<f64> {
    if len == 1 || kind == WindowKind::Rectangular {
        return vec![1.0; len];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| {
            let c = (2.0 * std::f64::consts::PI * n as f64 / denom).cos();
            match kind {
                WindowKind::Hann => 0.5 - 0.5 * c,
                WindowKind::Hamming => 0.54 - 0.46 * c,
                WindowKind::Rectangular => 1.0,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StftConfig {
    pub window_len: usize,
    pub overlap: usize,
    pub window: WindowKind,
    pub fft_len: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_len: 64,
            overlap: 32,
            window: WindowKind::Hann,
            fft_len: 64,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<(), StftError> {
        if self.window_len == 0 {
            return Err(StftError::InvalidConfig("window_len must be positive".into()));
        }
        if self.overlap >= self.window_len {
            return Err(StftError::InvalidConfig(format!(
                "overlap {} must be smaller than window_len {}",
                self.overlap, self.window_len
            )));
        }
        if !self.fft_len.is_power_of_two() || self.fft_len < self.window_len {
            return Err(StftError::InvalidConfig(format!(
                "fft_len {} must be a power of two >= window_len {}",
                self.fft_len, self.window_len
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> usize {
        self.window_len - self.overlap
    }

    pub fn bins(&self) -> usize {
        self.fft_len / 2 + 1
    }
}

pub fn frame_count(segment_len: usize, window_len: usize, overlap: usize) -> usize {
    (segment_len - window_len) / (window_len - overlap) + 1
}

/// One-sided STFT: `bins` rows (0..=fft_len/2) by `frames` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct StftGrid {
    values: Vec<Complex64>,
    bins: usize,
    frames: usize,
    pub bin_hz: f64,
    pub frame_step_s: f64,
}

impl StftGrid {
    pub fn from_values(values: Vec<Complex64>, bins: usize, frames: usize) -> Self {
        assert_eq!(values.len(), bins * frames);
        Self {
            values,
            bins,
            frames,
            bin_hz: 1.0,
            frame_step_s: 1.0,
        }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    #[inline]
    pub fn get(&self, bin: usize, frame: usize) -> Complex64 {
        self.values[bin * self.frames + frame]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn frame(&self, frame: usize) -> Vec<Complex64> {
        (0..self.bins).map(|b| self.get(b, frame)).collect()
    }
}

pub fn stft(seg: &Segment, cfg: &StftConfig) -> Result<StftGrid, StftError> {
    cfg.validate()?;
    let len = seg.samples.len();
    if len < cfg.window_len {
        return Err(StftError::WindowTooLong {
            window_len: cfg.window_len,
            segment_len: len,
        });
    }
    let plan = Fft::new(cfg.fft_len).map_err(|e| StftError::InvalidConfig(e.to_string()))?;
    let win = window(cfg.window, cfg.window_len);
    let frames = frame_count(len, cfg.window_len, cfg.overlap);
    let bins = cfg.bins();
    let step = cfg.step();
    let mut values = vec![Complex64::new(0.0, 0.0); bins * frames];
    let mut buf = vec![Complex64::new(0.0, 0.0); cfg.fft_len];
    for f in 0..frames {
        let start = f * step;
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (k, (x, w)) in seg.samples[start..start + cfg.window_len]
            .iter()
            .zip(&win)
            .enumerate()
        {
            buf[k] = Complex64::new(x * w, 0.0);
        }
        plan.forward(&mut buf);
        for b in 0..bins {
            values[b * frames + f] = buf[b];
        }
    }
    Ok(StftGrid {
        values,
        bins,
        frames,
        bin_hz: seg.sample_rate_hz / cfg.fft_len as f64,
        frame_step_s: step as f64 / seg.sample_rate_hz,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImageShape {
    pub h: usize,
    pub w: usize,
    pub c: usize,
}

impl ImageShape {
    pub const DESK: ImageShape = ImageShape { h: 64, w: 64, c: 1 };
    pub const PAPER: ImageShape = ImageShape { h: 256, w: 256, c: 3 };

    pub fn dims(&self) -> [usize; 3] {
        [self.h, self.w, self.c]
    }
}

impl std::fmt::Display for ImageShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.h, self.w, self.c)
    }
}

/// `[H, W, C]` image with pixels in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrogramImage {
    pub pixels: Tensor,
    pub source_id: String,
    /// Floor used when rendering; NaN when unknown (images read from disk).
    pub db_floor: f64,
}

impl SpectrogramImage {
    pub fn shape(&self) -> ImageShape {
        let s = self.pixels.shape();
        ImageShape {
            h: s[0],
            w: s[1],
            c: s[2],
        }
    }
}

/// Peak-relative dB map of the grid, one value per cell, oriented as an
/// image: row 0 holds the highest frequency bin, columns run forward in time.
pub fn normalized_db(grid: &StftGrid, db_floor: f64) -> Tensor {
    let db: Vec<f64> = grid
        .values()
        .iter()
        .map(|v| 20.0 * (v.norm() + LOG_EPS).log10())
        .collect();
    let peak = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = peak + db_floor;
    let (bins, frames) = (grid.bins(), grid.frames());
    let mut out = vec![0.0; bins * frames];
    for b in 0..bins {
        let row = bins - 1 - b;
        for f in 0..frames {
            let v = (db[b * frames + f] - lo) / (-db_floor);
            out[row * frames + f] = v.clamp(0.0, 1.0);
        }
    }
    Tensor::from_vec(&[bins, frames, 1], out).expect("shape matches data")
}

pub fn to_image(
    grid: &StftGrid,
    shape: ImageShape,
    db_floor: f64,
    source_id: &str,
) -> Result<SpectrogramImage, StftError> {
    if !(db_floor < 0.0) {
        return Err(StftError::BadShape(format!(
            "db_floor must be negative, got {db_floor}"
        )));
    }
    if shape.h < 8 || shape.w < 8 || !(shape.c == 1 || shape.c == 3) {
        return Err(StftError::BadShape(format!(
            "image must be at least 8x8 with 1 or 3 channels, got {shape}"
        )));
    }
    let level = normalized_db(grid, db_floor);
    let level = resize_bilinear(&level, shape.h, shape.w)?;
    let pixels = if shape.c == 1 {
        level
    } else {
        apply_colormap(&level)
    };
    Ok(SpectrogramImage {
        pixels,
        source_id: source_id.to_string(),
        db_floor,
    })
}

#[inline]
fn lerp_bounded(a: f64, b: f64, t: f64) -> f64 {
    (a + t * (b - a)).clamp(a.min(b), a.max(b))
}

/// Bilinear resize of an `[H, W, C]` tensor with corner-aligned sampling
/// (output corners coincide with input corners).
pub fn resize_bilinear(img: &Tensor, out_h: usize, out_w: usize) -> Result<Tensor, StftError> {
    let (h, w, c) = img
        .dims3()
        .map_err(|e| StftError::BadShape(e.to_string()))?;
    if h < 2 || w < 2 || out_h == 0 || out_w == 0 {
        return Err(StftError::BadShape(format!(
            "resize {h}x{w} -> {out_h}x{out_w}: input needs at least 2x2"
        )));
    }
    let src = img.data();
    let coord = |i: usize, n_in: usize, n_out: usize| -> (usize, usize, f64) {
        if n_out == 1 {
            return (0, 0, 0.0);
        }
        let pos = (i * (n_in - 1)) as f64 / (n_out - 1) as f64;
        let i0 = (pos.floor() as usize).min(n_in - 1);
        let i1 = (i0 + 1).min(n_in - 1);
        (i0, i1, pos - i0 as f64)
    };
    let mut out = Vec::with_capacity(out_h * out_w * c);
    for y in 0..out_h {
        let (y0, y1, ty) = coord(y, h, out_h);
        for x in 0..out_w {
            let (x0, x1, tx) = coord(x, w, out_w);
            for ch in 0..c {
                let at = |yy: usize, xx: usize| src[(yy * w + xx) * c + ch];
                let top = lerp_bounded(at(y0, x0), at(y0, x1), tx);
                let bottom = lerp_bounded(at(y1, x0), at(y1, x1), tx);
                out.push(lerp_bounded(top, bottom, ty));
            }
        }
    }
    Ok(Tensor::from_vec(&[out_h, out_w, c], out).expect("sized above"))
}

/// 256-entry RGB lookup table: a polynomial fit of the viridis colormap,
/// evaluated at `i / 255` and clamped to `[0, 1]`.
pub fn colormap() -> &'static [[f64; 3]; 256] {
    static LUT: OnceLock<[[f64; 3]; 256]> = OnceLock::new();
    LUT.get_or_init(|| {
        const C: [[f64; 3]; 7] = [
            [0.277_727_327_223_417_7, 0.005_407_344_544_966_578, 0.334_099_805_335_306_1],
            [0.105_093_043_108_577_4, 1.404_613_529_898_575, 1.384_590_162_594_685],
            [-0.330_861_828_725_556_3, 0.214_847_559_468_213, 0.095_095_163_028_236_59],
            [-4.634_230_498_983_486, -5.799_100_973_351_585, -19.332_440_956_279_87],
            [6.228_269_936_347_081, 14.179_933_366_805_09, 56.690_552_600_681_05],
            [4.776_384_997_670_288, -13.745_145_377_746_01, -65.353_032_633_372_34],
            [-5.435_455_855_934_631, 4.645_852_612_178_535, 26.312_435_249_583_2],
        ];
        let mut lut = [[0.0; 3]; 256];
        for (i, entry) in lut.iter_mut().enumerate() {
            let t = i as f64 / 255.0;
            for ch in 0..3 {
                let v = C.iter().rev().fold(0.0, |acc, c| acc * t + c[ch]);
                entry[ch] = v.clamp(0.0, 1.0);
            }
        }
        lut
    })
}

/// Map a single-channel `[H, W, 1]` level image through [`colormap`].
pub fn apply_colormap(level: &Tensor) -> Tensor {
    let s = level.shape();
    let lut = colormap();
    let mut out = Vec::with_capacity(level.len() * 3);
    for &v in level.data() {
        let idx = (v.clamp(0.0, 1.0) * 255.0).round() as usize;
        out.extend_from_slice(&lut[idx]);
    }
    Tensor::from_vec(&[s[0], s[1], 3], out).expect("sized above")
}
