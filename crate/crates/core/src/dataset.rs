//! From traces to a directory of spectrogram images.
//!
//! A dataset directory holds:
//!
//! * `images.bin`: magic `SDAEDSET`, version `u32`, count, h, w, c (`u32`
//!   each), then every pixel as little-endian `f64`, image after image;
//! * `manifest.csv`: `id,source,offset,shape`;
//! * `previews/img_NNNNN.pgm` (or `.ppm`) for eyeballing.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::imageio;
use crate::nn::Tensor;
use crate::rng::derive_seed;
use crate::stft::{stft, to_image, ImageShape, SpectrogramImage, StftConfig, StftError};
use crate::timeseries::{segment, synthesize, TimeSeries, TimeSeriesError, DEFAULT_SEGMENT_LEN};

const MAGIC: &[u8; 8] = b"SDAEDSET";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    TimeSeries(#[from] TimeSeriesError),
    #[error(transparent)]
    Stft(#[from] StftError),
    #[error("dataset i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset format: {0}")]
    Format(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub series: usize,
    pub duration_samples: usize,
    pub bursts: usize,
    pub sample_rate_hz: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        // 16 series x 3 segments = 48 images
        Self {
            series: 16,
            duration_samples: 900,
            bursts: 3,
            sample_rate_hz: 100.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig {
    pub segment_len: usize,
    pub hop: usize,
    pub stft: StftConfig,
    pub shape: ImageShape,
    pub db_floor: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            segment_len: DEFAULT_SEGMENT_LEN,
            hop: DEFAULT_SEGMENT_LEN,
            stft: StftConfig::default(),
            shape: ImageShape::DESK,
            db_floor: -80.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetEntry {
    pub id: usize,
    pub source: String,
    pub offset: usize,
    pub image: SpectrogramImage,
}

/// Series `i` uses seed `derive_seed(cfg.seed, [i])`.
pub fn synthetic_series(cfg: &SynthConfig) -> Result<Vec<TimeSeries>, DatasetError> {
    (0..cfg.series)
        .map(|i| {
            synthesize(
                derive_seed(cfg.seed, &[i as u64]),
                cfg.duration_samples,
                cfg.bursts,
                cfg.sample_rate_hz,
            )
            .map_err(DatasetError::from)
        })
        .collect()
}

/// Segment every series and render each segment as an image.
pub fn images_from_series(series: &[TimeSeries], cfg: &PipelineConfig) -> Result<Vec<DatasetEntry>, DatasetError> {
    let mut out = Vec::new();
    for ts in series {
        for seg in segment(ts, cfg.segment_len, cfg.hop)? {
            let grid = stft(&seg, &cfg.stft)?;
            let id = out.len();
            let tag = format!("{}@{}", seg.source_id, seg.offset);
            out.push(DatasetEntry {
                id,
                source: seg.source_id.clone(),
                offset: seg.offset,
                image: to_image(&grid, cfg.shape, cfg.db_floor, &tag)?,
            });
        }
    }
    Ok(out)
}

/// `count` synthetic spectrograms of the given shape, three per 900-sample
/// series.
pub fn synthetic_images(count: usize, shape: ImageShape, seed: u64) -> Result<Vec<DatasetEntry>, DatasetError> {
    let synth = SynthConfig {
        series: count.div_ceil(3),
        seed,
        ..Default::default()
    };
    let pipe = PipelineConfig {
        shape,
        ..Default::default()
    };
    let mut entries = images_from_series(&synthetic_series(&synth)?, &pipe)?;
    entries.truncate(count);
    Ok(entries)
}

pub fn manifest_csv(entries: &[DatasetEntry]) -> String {
    let mut s = String::from("id,source,offset,shape\n");
    for e in entries {
        let _ = writeln!(s, "{},{},{},{}", e.id, e.source, e.offset, e.image.shape());
    }
    s
}

pub fn write_dataset(dir: &Path, entries: &[DatasetEntry]) -> Result<(), DatasetError> {
    let first = entries
        .first()
        .ok_or_else(|| DatasetError::Format("no images to write".into()))?;
    let shape = first.image.shape();
    std::fs::create_dir_all(dir.join("previews"))?;
    let mut bin = Vec::new();
    bin.extend_from_slice(MAGIC);
    for v in [VERSION, entries.len() as u32, shape.h as u32, shape.w as u32, shape.c as u32] {
        bin.extend_from_slice(&v.to_le_bytes());
    }
    let ext = if shape.c == 1 { "pgm" } else { "ppm" };
    for e in entries {
        if e.image.shape() != shape {
            return Err(DatasetError::Format("images differ in shape".into()));
        }
        for v in e.image.pixels.data() {
            bin.extend_from_slice(&v.to_le_bytes());
        }
        imageio::write_pnm(dir.join("previews").join(format!("img_{:05}.{ext}", e.id)), &e.image.pixels)?;
    }
    std::fs::write(dir.join("images.bin"), bin)?;
    std::fs::write(dir.join("manifest.csv"), manifest_csv(entries))?;
    Ok(())
}

pub fn read_dataset(dir: &Path) -> Result<Vec<DatasetEntry>, DatasetError> {
    let bin = std::fs::read(dir.join("images.bin"))?;
    let manifest = std::fs::read_to_string(dir.join("manifest.csv"))?;
    if bin.len() < 28 || &bin[..8] != MAGIC {
        return Err(DatasetError::Format("images.bin: bad header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bin[8 + 4 * i..12 + 4 * i].try_into().unwrap()) as usize;
    if word(0) != VERSION as usize {
        return Err(DatasetError::Format(format!("unsupported version {}", word(0))));
    }
    let (count, h, w, c) = (word(1), word(2), word(3), word(4));
    let per = h * w * c;
    if bin.len() != 28 + count * per * 8 {
        return Err(DatasetError::Format("images.bin: size does not match header".into()));
    }
    let rows: Vec<&str> = manifest.lines().skip(1).filter(|l| !l.is_empty()).collect();
    if rows.len() != count {
        return Err(DatasetError::Format(format!(
            "manifest lists {} images, images.bin holds {count}",
            rows.len()
        )));
    }
    let shape = ImageShape { h, w, c };
    rows.iter()
        .enumerate()
        .map(|(k, row)| {
            let cols: Vec<&str> = row.split(',').collect();
            if cols.len() != 4 {
                return Err(DatasetError::Format(format!("manifest row {}: {row:?}", k + 1)));
            }
            let bad = || DatasetError::Format(format!("manifest row {}: {row:?}", k + 1));
            let id = cols[0].parse().map_err(|_| bad())?;
            let offset = cols[2].parse().map_err(|_| bad())?;
            let start = 28 + k * per * 8;
            let pixels: Vec<f64> = bin[start..start + per * 8]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            Ok(DatasetEntry {
                id,
                source: cols[1].to_string(),
                offset,
                image: SpectrogramImage {
                    pixels: Tensor::from_vec(&shape.dims(), pixels).map_err(|e| DatasetError::Format(e.to_string()))?,
                    source_id: format!("{}@{}", cols[1], offset),
                    db_floor: f64::NAN,
                },
            })
        })
        .collect()
}
