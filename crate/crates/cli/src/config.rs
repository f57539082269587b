//! INI-style configuration. Keys are dotted (`train.epochs`); a `[train]`
//! header prefixes the keys below it. Unknown keys are errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use specdenoise::cdae::TrainConfig;
use specdenoise::dataset::{PipelineConfig, SynthConfig};
use specdenoise::nn::LossKind;
use specdenoise::noisegen::{ColoringAxis, DistKind, Distribution, NoiseSpec};
use specdenoise::stft::ImageShape;
use specdenoise::sweep::{default_levels, SweepGrid};
use specdenoise::timeseries::{Axis, ColumnMap, CsvOptions};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("unknown config key {0:?} (see --help for the full list)")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {msg}")]
    BadValue { key: String, value: String, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Every key with a one-line description, in the order used for
/// `config.resolved` and `--help`.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "master seed for every random stream"),
    ("workers", "parallel sweep workers"),
    ("data.inputs", "comma-separated CSV files; empty means synthetic series"),
    ("data.axis", "accelerometer axis to read (x, y, z)"),
    ("data.x_column", "CSV column for the x axis"),
    ("data.y_column", "CSV column for the y axis"),
    ("data.z_column", "CSV column for the z axis"),
    ("data.time_column", "CSV time column in seconds"),
    ("data.sample_rate_hz", "sample rate override; empty derives it from the time column"),
    ("data.synth_series", "number of synthetic series"),
    ("data.synth_length", "samples per synthetic series"),
    ("data.synth_bursts", "vibration bursts per synthetic series"),
    ("data.synth_rate_hz", "sample rate of synthetic series"),
    ("data.segment_len", "samples per segment"),
    ("data.hop", "samples between segment starts"),
    ("stft.window_len", "STFT window length"),
    ("stft.overlap", "STFT window overlap"),
    ("stft.window", "window function (hann, hamming, rectangular)"),
    ("stft.fft_len", "FFT length, a power of two >= window_len"),
    ("image.height", "image height in pixels"),
    ("image.width", "image width in pixels"),
    ("image.channels", "1 for grey levels, 3 for a colour map"),
    ("image.db_floor", "lowest dB level relative to the peak"),
    ("noise.dist", "noise distribution (weibull:K sets the Weibull shape)"),
    ("noise.nf", "noise factor: added noise power over image power"),
    ("noise.a", "coloring parameter in [0, 1)"),
    ("noise.axis", "coloring direction (time, flattened)"),
    ("train.epochs", "training epochs"),
    ("train.batch_size", "mini-batch size"),
    ("train.lr", "Adam learning rate"),
    ("train.beta1", "Adam first-moment decay"),
    ("train.beta2", "Adam second-moment decay"),
    ("train.eps", "Adam epsilon"),
    ("train.loss", "loss function (mse, bce)"),
    ("train.val_fraction", "share of images held out for validation"),
    ("sweep.distributions", "comma-separated distributions, or all"),
    ("sweep.nf", "comma-separated noise factors"),
    ("sweep.a", "comma-separated coloring parameters"),
    ("sweep.epochs", "comma-separated epoch counts"),
    ("sweep.record_timing", "record wall-clock times in results (breaks byte-identical reruns)"),
    ("preview.n", "samples in a noise preview trace"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub workers: usize,
    pub inputs: Vec<PathBuf>,
    pub axis: Axis,
    pub columns: ColumnMap,
    pub sample_rate_hz: Option<f64>,
    pub synth: SynthConfig,
    pub pipeline: PipelineConfig,
    pub noise_dist: Distribution,
    pub noise_nf: f64,
    pub noise_a: f64,
    pub noise_axis: ColoringAxis,
    pub train: TrainConfig,
    pub sweep_distributions: Vec<Distribution>,
    pub sweep_nf: Vec<f64>,
    pub sweep_a: Vec<f64>,
    pub sweep_epochs: Vec<usize>,
    pub record_timing: bool,
    pub preview_n: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 1,
            inputs: Vec::new(),
            axis: Axis::Z,
            columns: ColumnMap::default(),
            sample_rate_hz: None,
            synth: SynthConfig::default(),
            pipeline: PipelineConfig::default(),
            noise_dist: Distribution::new(DistKind::Gaussian),
            noise_nf: 0.3,
            noise_a: 0.0,
            noise_axis: ColoringAxis::Time,
            train: TrainConfig::default(),
            sweep_distributions: vec![Distribution::new(DistKind::Gaussian)],
            sweep_nf: default_levels(),
            sweep_a: default_levels(),
            sweep_epochs: vec![30],
            record_timing: false,
            preview_n: 4096,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        msg: e.to_string(),
    })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.into(),
            value: value.into(),
            msg: "expected true or false".into(),
        }),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl Config {
    /// Settings for the larger 75-image, 256x256x3 dataset.
    pub fn paper_scale() -> Self {
        let mut c = Self::default();
        c.synth.series = 25;
        c.pipeline.shape = ImageShape::PAPER;
        c
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "seed" => self.seed = parse(key, v)?,
            "workers" => self.workers = parse(key, v)?,
            "data.inputs" => {
                self.inputs = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(PathBuf::from).collect()
            }
            "data.axis" => self.axis = parse(key, v)?,
            "data.x_column" => self.columns.x = v.into(),
            "data.y_column" => self.columns.y = v.into(),
            "data.z_column" => self.columns.z = v.into(),
            "data.time_column" => self.columns.t = v.into(),
            "data.sample_rate_hz" => self.sample_rate_hz = if v.is_empty() { None } else { Some(parse(key, v)?) },
            "data.synth_series" => self.synth.series = parse(key, v)?,
            "data.synth_length" => self.synth.duration_samples = parse(key, v)?,
            "data.synth_bursts" => self.synth.bursts = parse(key, v)?,
            "data.synth_rate_hz" => self.synth.sample_rate_hz = parse(key, v)?,
            "data.segment_len" => self.pipeline.segment_len = parse(key, v)?,
            "data.hop" => self.pipeline.hop = parse(key, v)?,
            "stft.window_len" => self.pipeline.stft.window_len = parse(key, v)?,
            "stft.overlap" => self.pipeline.stft.overlap = parse(key, v)?,
            "stft.window" => self.pipeline.stft.window = parse(key, v)?,
            "stft.fft_len" => self.pipeline.stft.fft_len = parse(key, v)?,
            "image.height" => self.pipeline.shape.h = parse(key, v)?,
            "image.width" => self.pipeline.shape.w = parse(key, v)?,
            "image.channels" => self.pipeline.shape.c = parse(key, v)?,
            "image.db_floor" => self.pipeline.db_floor = parse(key, v)?,
            "noise.dist" => self.noise_dist = parse(key, v)?,
            "noise.nf" => self.noise_nf = parse(key, v)?,
            "noise.a" => self.noise_a = parse(key, v)?,
            "noise.axis" => self.noise_axis = parse(key, v)?,
            "train.epochs" => self.train.epochs = parse(key, v)?,
            "train.batch_size" => self.train.batch_size = parse(key, v)?,
            "train.lr" => self.train.adam.lr = parse(key, v)?,
            "train.beta1" => self.train.adam.beta1 = parse(key, v)?,
            "train.beta2" => self.train.adam.beta2 = parse(key, v)?,
            "train.eps" => self.train.adam.eps = parse(key, v)?,
            "train.loss" => self.train.loss = parse::<LossKind>(key, v)?,
            "train.val_fraction" => self.train.val_fraction = parse(key, v)?,
            "sweep.distributions" => {
                self.sweep_distributions = if v.eq_ignore_ascii_case("all") {
                    DistKind::ALL.iter().map(|&k| Distribution::new(k)).collect()
                } else {
                    parse_list(key, v)?
                }
            }
            "sweep.nf" => self.sweep_nf = parse_list(key, v)?,
            "sweep.a" => self.sweep_a = parse_list(key, v)?,
            "sweep.epochs" => self.sweep_epochs = parse_list(key, v)?,
            "sweep.record_timing" => self.record_timing = parse_bool(key, v)?,
            "preview.n" => self.preview_n = parse(key, v)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// `KEY=VALUE` as given on the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair.split_once('=').ok_or_else(|| ConfigError::BadValue {
            key: pair.into(),
            value: String::new(),
            msg: "expected KEY=VALUE".into(),
        })?;
        self.set(k.trim(), v)
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let p = &self.pipeline;
        let t = &self.train;
        Some(match key {
            "seed" => self.seed.to_string(),
            "workers" => self.workers.to_string(),
            "data.inputs" => self.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","),
            "data.axis" => self.axis.to_string(),
            "data.x_column" => self.columns.x.clone(),
            "data.y_column" => self.columns.y.clone(),
            "data.z_column" => self.columns.z.clone(),
            "data.time_column" => self.columns.t.clone(),
            "data.sample_rate_hz" => self.sample_rate_hz.map(|v| v.to_string()).unwrap_or_default(),
            "data.synth_series" => self.synth.series.to_string(),
            "data.synth_length" => self.synth.duration_samples.to_string(),
            "data.synth_bursts" => self.synth.bursts.to_string(),
            "data.synth_rate_hz" => self.synth.sample_rate_hz.to_string(),
            "data.segment_len" => p.segment_len.to_string(),
            "data.hop" => p.hop.to_string(),
            "stft.window_len" => p.stft.window_len.to_string(),
            "stft.overlap" => p.stft.overlap.to_string(),
            "stft.window" => p.stft.window.to_string(),
            "stft.fft_len" => p.stft.fft_len.to_string(),
            "image.height" => p.shape.h.to_string(),
            "image.width" => p.shape.w.to_string(),
            "image.channels" => p.shape.c.to_string(),
            "image.db_floor" => p.db_floor.to_string(),
            "noise.dist" => self.noise_dist.label(),
            "noise.nf" => self.noise_nf.to_string(),
            "noise.a" => self.noise_a.to_string(),
            "noise.axis" => self.noise_axis.to_string(),
            "train.epochs" => t.epochs.to_string(),
            "train.batch_size" => t.batch_size.to_string(),
            "train.lr" => t.adam.lr.to_string(),
            "train.beta1" => t.adam.beta1.to_string(),
            "train.beta2" => t.adam.beta2.to_string(),
            "train.eps" => t.adam.eps.to_string(),
            "train.loss" => t.loss.to_string(),
            "train.val_fraction" => t.val_fraction.to_string(),
            "sweep.distributions" => {
                self.sweep_distributions.iter().map(|d| d.label()).collect::<Vec<_>>().join(",")
            }
            "sweep.nf" => join(&self.sweep_nf),
            "sweep.a" => join(&self.sweep_a),
            "sweep.epochs" => join(&self.sweep_epochs),
            "sweep.record_timing" => self.record_timing.to_string(),
            "preview.n" => self.preview_n.to_string(),
            _ => return None,
        })
    }

    pub fn apply_ini(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let syntax = |msg: &str| ConfigError::Syntax {
                path: origin.into(),
                line: i + 1,
                msg: msg.into(),
            };
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| syntax("unterminated section header"))?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| syntax("expected key = value"))?;
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{section}.{}", k.trim())
            };
            self.set(&key, v).map_err(|e| match e {
                ConfigError::UnknownKey(k) => syntax(&format!("unknown key {k:?}")),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_ini(&text, &path.display().to_string())
    }

    /// The effective configuration in the same INI dialect it is read from.
    pub fn resolved(&self) -> String {
        let mut s = String::new();
        let mut section = "";
        for (key, _) in KEYS {
            let (sec, name) = key.split_once('.').unwrap_or(("", key));
            if sec != section {
                let _ = writeln!(s, "\n[{sec}]");
                section = sec;
            }
            let _ = writeln!(s, "{name} = {}", self.get(key).unwrap_or_default());
        }
        s.trim_start().to_string()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.pipeline.stft.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let s = self.pipeline.shape;
        if !s.h.is_multiple_of(4) || !s.w.is_multiple_of(4) || s.h < 8 || s.w < 8 {
            return bad(format!("image size {s} must be at least 8x8 and divisible by 4"));
        }
        if s.c != 1 && s.c != 3 {
            return bad(format!("image.channels must be 1 or 3, got {}", s.c));
        }
        if !(self.pipeline.db_floor < 0.0) {
            return bad("image.db_floor must be negative".into());
        }
        if self.pipeline.hop == 0 || self.pipeline.segment_len < self.pipeline.stft.window_len {
            return bad("data.hop must be >= 1 and data.segment_len >= stft.window_len".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        if self.preview_n < 4 {
            return bad("preview.n must be >= 4".into());
        }
        self.noise_spec(self.seed).validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.train.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.grid().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            columns: self.columns.clone(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    pub fn synth(&self) -> SynthConfig {
        SynthConfig {
            seed: self.seed,
            ..self.synth
        }
    }

    pub fn noise_spec(&self, seed: u64) -> NoiseSpec {
        NoiseSpec {
            dist: self.noise_dist,
            noise_factor: self.noise_nf,
            coloring_a: self.noise_a,
            seed,
            axis: self.noise_axis,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train
        }
    }

    pub fn grid(&self) -> SweepGrid {
        SweepGrid {
            distributions: self.sweep_distributions.clone(),
            nf_values: self.sweep_nf.clone(),
            a_values: self.sweep_a.clone(),
            epochs_values: self.sweep_epochs.clone(),
            master_seed: self.seed,
            axis: self.noise_axis,
            train: self.train,
        }
    }
}

/// Text appended to `--help`: every key and its default.
pub fn help_text() -> String {
    let d = Config::default();
    let mut s = String::from("Configuration keys (file sections or --set KEY=VALUE), with defaults:\n");
    for (key, help) in KEYS {
        let value = d.get(key).unwrap_or_default();
        let shown = if value.is_empty() { "(empty)".to_string() } else { value };
        let _ = writeln!(s, "  {key} = {shown}\n      {help}");
    }
    s.push_str(
        "\nEnvironment: SPECDENOISE_OUT sets --out, SPECDENOISE_WORKERS sets --workers.\n\
         Exit codes: 0 ok, 1 usage or config, 2 data, 3 numeric, 4 sweep.",
    );
    s
}
