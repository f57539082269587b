use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use specdenoise::cdae::{self, split_indices, CdaeError, ImagePair};
use specdenoise::dataset::{self, DatasetEntry, DatasetError};
use specdenoise::imageio::{hconcat, write_pnm};
use specdenoise::nn::{gradcheck_model, GradcheckOptions, LossKind, Tensor};
use specdenoise::noisegen::{autocorrelation, color, estimate_moments, inject, sample_standardized, NoiseError};
use specdenoise::rng::{derive_seed, Rng64, Stream};
use specdenoise::stft::ImageShape;
use specdenoise::sweep::{emit_report, errors_csv, read_results_csv, run_grid, RunOptions, SweepError};
use specdenoise::timeseries::ingest_csv;
use thiserror::Error;

use crate::config::{Config, ConfigError};

/// Gradient checks at or above this relative error fail.
pub const GRADCHECK_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("noise: {0}")]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Train(CdaeError),
    #[error("{0}")]
    Numeric(String),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<CdaeError> for CliError {
    fn from(e: CdaeError) -> Self {
        match e {
            CdaeError::NonFiniteLoss { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Train(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Dataset(_) | CliError::Noise(_) | CliError::Train(_) | CliError::Write { .. } => 2,
            CliError::Numeric(_) => 3,
            CliError::Sweep(_) => 4,
        }
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn write_image(path: &Path, img: &Tensor) -> Result<(), CliError> {
    write_pnm(path, img).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_resolved(cfg: &Config, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    write(&out.join("config.resolved"), cfg.resolved())
}

/// Images from the configured CSV inputs, or synthetic series when none
/// are given.
pub fn build_dataset(cfg: &Config) -> Result<Vec<DatasetEntry>, CliError> {
    let series = if cfg.inputs.is_empty() {
        dataset::synthetic_series(&cfg.synth())?
    } else {
        cfg.inputs
            .iter()
            .map(|p| ingest_csv(p, cfg.axis, &cfg.csv_options()).map_err(DatasetError::from))
            .collect::<Result<Vec<_>, _>>()?
    };
    let entries = dataset::images_from_series(&series, &cfg.pipeline)?;
    if entries.is_empty() {
        return Err(DatasetError::Format(format!(
            "inputs are shorter than one {}-sample segment",
            cfg.pipeline.segment_len
        ))
        .into());
    }
    Ok(entries)
}

fn load_or_build(cfg: &Config, dataset_dir: Option<&Path>) -> Result<Vec<DatasetEntry>, CliError> {
    match dataset_dir {
        Some(dir) => Ok(dataset::read_dataset(dir)?),
        None => build_dataset(cfg),
    }
}

pub fn prepare(cfg: &Config, out: &Path) -> Result<String, CliError> {
    let entries = build_dataset(cfg)?;
    dataset::write_dataset(out, &entries)?;
    Ok(format!(
        "wrote {} images of {} to {}",
        entries.len(),
        entries[0].image.shape(),
        out.display()
    ))
}

pub fn train(cfg: &Config, out: &Path, dataset_dir: Option<&Path>) -> Result<String, CliError> {
    let entries = load_or_build(cfg, dataset_dir)?;
    let spec_seed = |i: usize| derive_seed(cfg.seed, &[i as u64]);
    let pairs = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let noisy = inject(&e.image, &cfg.noise_spec(spec_seed(i)))?;
            Ok(ImagePair {
                noisy: noisy.pixels,
                clean: e.image.pixels.clone(),
            })
        })
        .collect::<Result<Vec<_>, NoiseError>>()?;
    let shape = entries[0].image.shape();
    let tcfg = cfg.train_config();
    let mut model = cdae::build(shape, cfg.seed)?;
    let trace = match cdae::train(&mut model, &pairs, &tcfg) {
        Ok(t) => t,
        Err(e) => {
            if let CdaeError::NonFiniteLoss { partial, .. } = &e {
                write(&out.join("trace.csv"), specdenoise::sweep::trace_csv(partial))?;
            }
            return Err(e.into());
        }
    };
    write(&out.join("trace.csv"), specdenoise::sweep::trace_csv(&trace))?;
    model.save(&out.join("model.ckpt"))?;

    let (_, val) = split_indices(pairs.len(), tcfg.val_fraction, tcfg.seed);
    let mut gain = 0.0;
    for (k, &i) in val.iter().enumerate() {
        let p = &pairs[i];
        let denoised = cdae::denoise(&model, &p.noisy)?;
        gain += cdae::psnr(&denoised, &p.clean)? - cdae::psnr(&p.noisy, &p.clean)?;
        if k < 4 {
            let strip = hconcat(&[&p.clean, &p.noisy, &denoised]).expect("equal image shapes");
            let ext = if shape.c == 1 { "pgm" } else { "ppm" };
            write_image(&out.join(format!("triptych_{k}.{ext}")), &strip)?;
        }
    }
    let best = cdae::min_loss(&trace)?;
    Ok(format!(
        "{} epochs on {} images: min val loss {:.6} at epoch {}, mean PSNR gain {:.2} dB",
        trace.len(),
        pairs.len(),
        best.value,
        best.epoch,
        gain / val.len() as f64
    ))
}

pub fn sweep(cfg: &Config, out: &Path, dataset_dir: Option<&Path>, resume: bool) -> Result<String, CliError> {
    let entries = match load_or_build(cfg, dataset_dir) {
        Ok(e) => e,
        Err(CliError::Dataset(e)) => return Err(SweepError::InvalidGrid(format!("dataset: {e}")).into()),
        Err(e) => return Err(e),
    };
    let images: Vec<_> = entries.into_iter().map(|e| e.image).collect();
    let opts = RunOptions {
        workers: cfg.workers,
        cell_dir: Some(out.join("cells")),
        resume,
        record_timing: cfg.record_timing,
    };
    let outcome = run_grid(&cfg.grid(), &images, &opts)?;
    write(&out.join("errors.csv"), errors_csv(&outcome.failures))?;
    if outcome.records.is_empty() {
        return Err(SweepError::NoRecords.into());
    }
    emit_report(&outcome.records, out)?;
    let mut msg = format!(
        "{} cells done ({} resumed), {} failed; report in {}",
        outcome.records.len(),
        outcome.resumed,
        outcome.failures.len(),
        out.display()
    );
    for f in &outcome.failures {
        let _ = write!(msg, "\n  cell {}: {}", f.index, f.message);
    }
    Ok(msg)
}

pub fn report(results: &Path, out: &Path) -> Result<String, CliError> {
    let records = read_results_csv(results)?;
    let files = emit_report(&records, out)?;
    Ok(format!("{} records, {} files written to {}", records.len(), files.len(), out.display()))
}

pub fn noise_preview(cfg: &Config, out: &Path) -> Result<String, CliError> {
    let white = sample_standardized(&cfg.noise_dist, cfg.preview_n, derive_seed(cfg.seed, &[0]))?;
    let trace = color(&white, cfg.noise_a)?;
    let mut csv = String::from("index,value\n");
    for (i, v) in trace.iter().enumerate() {
        let _ = writeln!(csv, "{i},{v}");
    }
    write(&out.join("noise_trace.csv"), csv)?;

    let m = estimate_moments(&trace)?;
    let r1 = autocorrelation(&trace, 1);
    let target = cfg.noise_dist.excess_kurtosis();
    let moments = format!(
        "dist,a,n,mean,variance,skewness,excess_kurtosis,target_excess_kurtosis,lag1_autocorrelation\n\
         {},{},{},{},{},{},{},{},{}\n",
        cfg.noise_dist.label(),
        cfg.noise_a,
        trace.len(),
        m.mean,
        m.variance,
        m.skewness,
        m.excess_kurtosis,
        target,
        r1
    );
    write(&out.join("noise_moments.csv"), moments)?;
    Ok(format!(
        "{} (a = {}), n = {}: mean {:+.4}, variance {:.4}, excess kurtosis {:+.3} (target {:+.3}), lag-1 {:.3}",
        cfg.noise_dist.label(),
        cfg.noise_a,
        trace.len(),
        m.mean,
        m.variance,
        m.excess_kurtosis,
        target,
        r1
    ))
}

/// Full-model check on a 16x16x1 CDAE for both losses.
pub fn gradcheck(out: &Path, model_seed: u64, data_seed: u64) -> Result<String, CliError> {
    let shape = ImageShape { h: 16, w: 16, c: 1 };
    let mut csv = String::from("loss,max_relative_error,worst_index,checked,skipped,total_params\n");
    let mut lines = Vec::new();
    let mut worst = 0.0f64;
    for kind in [LossKind::Mse, LossKind::Bce] {
        let mut model = cdae::build(shape, model_seed)?;
        let mut rng = Rng64::new(data_seed, Stream::Synth);
        let mut random = || {
            let v = (0..256).map(|_| rng.uniform()).collect();
            Tensor::from_vec(&[1, 16, 16, 1], v).expect("256 values")
        };
        let (x, y) = (random(), random());
        let r = gradcheck_model(&mut model.net, &x, &y, kind, &GradcheckOptions::default()).map_err(CdaeError::from)?;
        let _ = writeln!(
            csv,
            "{kind},{},{},{},{},{}",
            r.max_relative_error, r.worst_index, r.checked, r.skipped, r.total_params
        );
        lines.push(format!(
            "{kind}: max relative error {:.3e} over {} of {} parameters ({} skipped at kinks)",
            r.max_relative_error, r.checked, r.total_params, r.skipped
        ));
        worst = worst.max(r.max_relative_error);
    }
    write(&out.join("gradcheck.csv"), csv)?;
    let summary = lines.join("\n");
    if worst >= GRADCHECK_THRESHOLD {
        return Err(CliError::Numeric(format!(
            "{summary}\ngradient check failed: {worst:.3e} >= {GRADCHECK_THRESHOLD:e}"
        )));
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        let nonfinite = CdaeError::NonFiniteLoss {
            epoch: 2,
            partial: Vec::new(),
        };
        assert_eq!(CliError::from(nonfinite).exit_code(), 3);
        assert_eq!(CliError::from(CdaeError::TooFewPairs(1)).exit_code(), 2);
        assert_eq!(CliError::from(DatasetError::Format("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(SweepError::NoRecords).exit_code(), 4);
        assert_eq!(CliError::from(ConfigError::UnknownKey("k".into())).exit_code(), 1);
    }

    #[test]
    fn csv_inputs_shorter_than_a_segment_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("short.csv");
        std::fs::write(&csv, "t,ax,ay,az\n0,0,0,1\n0.01,0,0,2\n").unwrap();
        let cfg = Config {
            inputs: vec![csv],
            ..Default::default()
        };
        assert!(matches!(build_dataset(&cfg), Err(CliError::Dataset(_))));
    }
}
