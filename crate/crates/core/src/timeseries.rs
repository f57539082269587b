//! Accelerometer traces: CSV ingestion, a synthetic surrogate generator, and
//! fixed-length segmentation.
//!
//! CSV contract: a header row, then comma-separated decimal reals. Columns
//! are located by name (`ax`, `ay`, `az`, optional `t` in seconds) through a
//! [`ColumnMap`]. The sample rate comes from [`CsvOptions::sample_rate_hz`]
//! or, failing that, from the time column.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::rng::{Rng64, Stream};

pub const DEFAULT_SEGMENT_LEN: usize = 300;

#[derive(Debug, Error)]
pub enum TimeSeriesError {
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("malformed value {value:?} at data row {row}, column `{column}`")]
    MalformedRow {
        row: usize,
        column: String,
        value: String,
    },
    #[error("file contains no data rows")]
    EmptyFile,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("series of {len} samples is shorter than segment length {segment_len}")]
    TooShort { len: usize, segment_len: usize },
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Axis {
    X,
    Y,
    #[default]
    Z,
}

impl FromStr for Axis {
    type Err = TimeSeriesError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(TimeSeriesError::InvalidParam(format!(
                "axis must be X, Y or Z, got {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        })
    }
}

/// Header names for each axis and the optional time column.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnMap {
    pub x: String,
    pub y: String,
    pub z: String,
    pub t: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            x: "ax".into(),
            y: "ay".into(),
            z: "az".into(),
            t: "t".into(),
        }
    }
}

impl ColumnMap {
    pub fn column(&self, axis: Axis) -> &str {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CsvOptions {
    pub columns: ColumnMap,
    /// Overrides the time column when set.
    pub sample_rate_hz: Option<f64>,
}

/// Uniformly sampled scalar signal.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate_hz: f64,
    source: String,
}

impl TimeSeries {
    pub fn new(
        samples: Vec<f64>,
        sample_rate_hz: f64,
        source: impl Into<String>,
    ) -> Result<Self, TimeSeriesError> {
        if samples.is_empty() {
            return Err(TimeSeriesError::InvalidParam("empty series".into()));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(TimeSeriesError::InvalidParam(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(TimeSeriesError::InvalidParam(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            source: source.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Two-column CSV (`t,<column>`), values printed with round-trip precision.
    pub fn to_csv_string(&self, column: &str) -> String {
        let mut out = format!("t,{column}\n");
        for (i, v) in self.samples.iter().enumerate() {
            let t = i as f64 / self.sample_rate_hz;
            let _ = writeln!(out, "{t},{v}");
        }
        out
    }
}

/// Fixed-length window cut from a [`TimeSeries`].
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub samples: Vec<f64>,
    pub source_id: String,
    pub offset: usize,
    pub sample_rate_hz: f64,
}

pub fn ingest_csv(
    path: impl AsRef<Path>,
    axis: Axis,
    opts: &CsvOptions,
) -> Result<TimeSeries, TimeSeriesError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TimeSeriesError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text, axis, opts, &path.display().to_string())
}

/// Parse CSV text; `source` names the series. Row numbers in errors count
/// data rows from 1 (the header is not counted).
pub fn parse_csv(
    text: &str,
    axis: Axis,
    opts: &CsvOptions,
    source: &str,
) -> Result<TimeSeries, TimeSeriesError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or(TimeSeriesError::EmptyFile)?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let wanted = opts.columns.column(axis);
    let col = names
        .iter()
        .position(|n| *n == wanted)
        .ok_or_else(|| TimeSeriesError::MissingColumn(wanted.to_string()))?;
    let tcol = names.iter().position(|n| *n == opts.columns.t);

    let parse_cell = |cells: &[&str], idx: usize, row: usize| -> Result<f64, TimeSeriesError> {
        let raw = cells.get(idx).map(|c| c.trim()).unwrap_or("");
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(TimeSeriesError::MalformedRow {
                row,
                column: names[idx].to_string(),
                value: raw.to_string(),
            }),
        }
    };

    let mut samples = Vec::new();
    let mut times = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let cells: Vec<&str> = line.split(',').collect();
        samples.push(parse_cell(&cells, col, row)?);
        if let (Some(t), None) = (tcol, opts.sample_rate_hz) {
            times.push(parse_cell(&cells, t, row)?);
        }
    }
    if samples.is_empty() {
        return Err(TimeSeriesError::EmptyFile);
    }

    let rate = match opts.sample_rate_hz {
        Some(r) => r,
        None if times.len() >= 2 => {
            let span = times[times.len() - 1] - times[0];
            if span <= 0.0 {
                return Err(TimeSeriesError::InvalidParam(
                    "time column is not increasing".into(),
                ));
            }
            (times.len() - 1) as f64 / span
        }
        None => {
            return Err(TimeSeriesError::InvalidParam(
                "sample rate not configured and no usable time column".into(),
            ))
        }
    };
    TimeSeries::new(samples, rate, source)
}

/// Location of one injected transient in a synthetic series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Burst {
    pub offset: usize,
    pub len: usize,
    pub amplitude: f64,
    pub freq_hz: f64,
}

/// Standard deviation of the synthetic broadband baseline.
pub const SYNTH_BASELINE_SIGMA: f64 = 0.01;

/// Synthetic surrogate for an accelerometer trace: white Gaussian baseline
/// plus `burst_count` damped sinusoids, one per equal-width slot so bursts
/// never overlap.
pub fn synthesize(
    seed: u64,
    duration_samples: usize,
    burst_count: usize,
    sample_rate_hz: f64,
) -> Result<TimeSeries, TimeSeriesError> {
    synthesize_with_bursts(seed, duration_samples, burst_count, sample_rate_hz).map(|(ts, _)| ts)
}

pub fn synthesize_with_bursts(
    seed: u64,
    duration_samples: usize,
    burst_count: usize,
    sample_rate_hz: f64,
) -> Result<(TimeSeries, Vec<Burst>), TimeSeriesError> {
    if duration_samples < DEFAULT_SEGMENT_LEN {
        return Err(TimeSeriesError::InvalidParam(format!(
            "duration must be at least {DEFAULT_SEGMENT_LEN} samples, got {duration_samples}"
        )));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(TimeSeriesError::InvalidParam(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    let mut rng = Rng64::new(seed, Stream::Synth);
    let mut samples: Vec<f64> = (0..duration_samples)
        .map(|_| SYNTH_BASELINE_SIGMA * rng.standard_normal())
        .collect();

    let mut bursts = Vec::with_capacity(burst_count);
    if burst_count > 0 {
        let slot = duration_samples / burst_count;
        for b in 0..burst_count {
            // decay constant in samples; support is 4 time constants
            let tau = rng.uniform_in(8.0, 30.0).min(slot as f64 / 4.0).max(1.0);
            let len = ((4.0 * tau).ceil() as usize).min(slot).max(1);
            let start = b * slot + rng.below(slot - len + 1);
            let amplitude = SYNTH_BASELINE_SIGMA * rng.uniform_in(1000.0, 3000.0);
            let freq_hz = sample_rate_hz * rng.uniform_in(0.03, 0.3);
            let phase = rng.uniform_in(0.0, std::f64::consts::TAU);
            for k in 0..len {
                let t = k as f64;
                samples[start + k] += amplitude
                    * (-t / tau).exp()
                    * (std::f64::consts::TAU * freq_hz * t / sample_rate_hz + phase).cos();
            }
            bursts.push(Burst {
                offset: start,
                len,
                amplitude,
                freq_hz,
            });
        }
    }
    let ts = TimeSeries::new(samples, sample_rate_hz, format!("synthetic-{seed}"))?;
    Ok((ts, bursts))
}

/// Cut `ts` into windows of `segment_len` samples starting every `hop`
/// samples. A trailing partial window is dropped.
pub fn segment(
    ts: &TimeSeries,
    segment_len: usize,
    hop: usize,
) -> Result<Vec<Segment>, TimeSeriesError> {
    if segment_len < 2 {
        return Err(TimeSeriesError::InvalidParam(format!(
            "segment_len must be >= 2, got {segment_len}"
        )));
    }
    if hop == 0 || hop > segment_len {
        return Err(TimeSeriesError::InvalidParam(format!(
            "hop must be in 1..={segment_len}, got {hop}"
        )));
    }
    if ts.len() < segment_len {
        return Err(TimeSeriesError::TooShort {
            len: ts.len(),
            segment_len,
        });
    }
    let count = (ts.len() - segment_len) / hop + 1;
    Ok((0..count)
        .map(|i| {
            let offset = i * hop;
            Segment {
                samples: ts.samples[offset..offset + segment_len].to_vec(),
                source_id: ts.source.clone(),
                offset,
                sample_rate_hz: ts.sample_rate_hz,
            }
        })
        .collect())
}
