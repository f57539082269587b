//! Convolutional denoising auto-encoder: architecture, training loop,
//! inference and quality metrics.
//!
//! Layer stack for an `H x W x C` input:
//!
//! ```text
//! conv 3x3 C->32  + ReLU   H   x W
//! maxpool 2x2              H/2 x W/2
//! conv 3x3 32->64 + ReLU
//! maxpool 2x2              H/4 x W/4   (bottleneck)
//! conv 3x3 64->64 + ReLU
//! upsample 2x2             H/2 x W/2
//! conv 3x3 64->32 + ReLU
//! upsample 2x2             H   x W
//! conv 3x3 32->C  + sigmoid
//! ```

use std::time::Instant;

use thiserror::Error;

use crate::nn::{
    checkpoint, loss, Adam, AdamConfig, Conv2d, Layer, LossKind, MaxPool2x2, NnError, Relu,
    Sequential, Sigmoid, Tensor, Upsample2x2,
};
use crate::rng::{Rng64, Stream};
use crate::stft::ImageShape;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CdaeError {
    #[error("input {h}x{w} must be divisible by 4 on both sides")]
    ShapeNotDivisible { h: usize, w: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("need at least 2 image pairs, got {0}")]
    TooFewPairs(usize),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("loss became non-finite in epoch {epoch}; {} epochs completed", partial.len())]
    NonFiniteLoss { epoch: usize, partial: Vec<EpochTrace> },
    #[error("trace is empty")]
    EmptyTrace,
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// The denoiser: a [`Sequential`] plus the image shape it was built for.
#[derive(Clone, Debug, PartialEq)]
pub struct CdaeModel {
    pub net: Sequential,
    pub input_shape: ImageShape,
}

pub fn build(shape: ImageShape, seed: u64) -> Result<CdaeModel, CdaeError> {
    if !shape.h.is_multiple_of(4) || !shape.w.is_multiple_of(4) || shape.h == 0 || shape.w == 0 {
        return Err(CdaeError::ShapeNotDivisible { h: shape.h, w: shape.w });
    }
    if shape.c == 0 {
        return Err(CdaeError::ShapeMismatch("zero channels".into()));
    }
    let mut rng = Rng64::new(seed, Stream::WeightInit);
    let mut conv = |cin: usize, cout: usize, glorot: bool| {
        let mut c = Conv2d::new(cin, cout, 3);
        let limit = if glorot {
            (6.0 / (c.fan_in() + c.fan_out()) as f64).sqrt()
        } else {
            (6.0 / c.fan_in() as f64).sqrt()
        };
        c.init_uniform(limit, &mut rng);
        Layer::Conv2d(c)
    };
    let layers = vec![
        conv(shape.c, 32, false),
        Layer::Relu(Relu::default()),
        Layer::MaxPool2x2(MaxPool2x2::default()),
        conv(32, 64, false),
        Layer::Relu(Relu::default()),
        Layer::MaxPool2x2(MaxPool2x2::default()),
        conv(64, 64, false),
        Layer::Relu(Relu::default()),
        Layer::UpsampleNearest2x2(Upsample2x2),
        conv(64, 32, false),
        Layer::Relu(Relu::default()),
        Layer::UpsampleNearest2x2(Upsample2x2),
        conv(32, shape.c, true),
        Layer::Sigmoid(Sigmoid::default()),
    ];
    Ok(CdaeModel {
        net: Sequential::new(layers),
        input_shape: shape,
    })
}

impl CdaeModel {
    /// Activation after the encoder (index 5 of the stack), for inspection.
    pub fn bottleneck(&self, batch: &Tensor) -> Result<Tensor, CdaeError> {
        let mut cur = batch.clone();
        for layer in &self.net.layers()[..6] {
            cur = layer.infer(&cur)?;
        }
        Ok(cur)
    }

    fn check_image(&self, img: &Tensor) -> Result<(), CdaeError> {
        if img.shape() != self.input_shape.dims() {
            return Err(CdaeError::ShapeMismatch(format!(
                "model expects {}, got {:?}",
                self.input_shape,
                img.shape()
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), CdaeError> {
        let f = std::fs::File::create(path).map_err(|e| NnError::Checkpoint(e.to_string()))?;
        checkpoint::write(&self.net, std::io::BufWriter::new(f))?;
        Ok(())
    }

    pub fn load(path: &std::path::Path, shape: ImageShape) -> Result<Self, CdaeError> {
        let f = std::fs::File::open(path).map_err(|e| NnError::Checkpoint(e.to_string()))?;
        let net = checkpoint::read(std::io::BufReader::new(f))?;
        Ok(Self { net, input_shape: shape })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub loss: LossKind,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 8,
            adam: AdamConfig::default(),
            loss: LossKind::Mse,
            val_fraction: 0.2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CdaeError> {
        if self.epochs == 0 {
            return Err(CdaeError::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(CdaeError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(CdaeError::InvalidConfig(format!(
                "val_fraction must be in (0, 1), got {}",
                self.val_fraction
            )));
        }
        if !(self.adam.lr.is_finite() && self.adam.lr > 0.0) {
            return Err(CdaeError::InvalidConfig("lr must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochTrace {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub wall_time_s: f64,
}

impl EpochTrace {
    /// Equality ignoring wall-clock time.
    pub fn same_losses(&self, other: &EpochTrace) -> bool {
        self.epoch == other.epoch
            && self.train_loss.to_bits() == other.train_loss.to_bits()
            && self.val_loss.to_bits() == other.val_loss.to_bits()
    }
}

/// A corrupted input and the clean image it should map to, both `[H, W, C]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePair {
    pub noisy: Tensor,
    pub clean: Tensor,
}

/// Seeded train/validation split. The validation set has
/// `round(n * val_fraction)` items, kept within `1..n`.
pub fn split_indices(n: usize, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    Rng64::new(seed, Stream::Split).shuffle(&mut idx);
    let n_val = ((n as f64 * val_fraction).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let val = idx.split_off(n - n_val);
    (idx, val)
}

fn batch_of(pairs: &[ImagePair], idx: &[usize]) -> Result<(Tensor, Tensor), NnError> {
    let noisy: Vec<&Tensor> = idx.iter().map(|&i| &pairs[i].noisy).collect();
    let clean: Vec<&Tensor> = idx.iter().map(|&i| &pairs[i].clean).collect();
    Ok((Tensor::stack(&noisy)?, Tensor::stack(&clean)?))
}

/// Mean loss of the model over `idx`, evaluated in batches.
pub fn evaluate(
    model: &CdaeModel,
    pairs: &[ImagePair],
    idx: &[usize],
    kind: LossKind,
    batch_size: usize,
) -> Result<f64, CdaeError> {
    let mut total = 0.0;
    for chunk in idx.chunks(batch_size.max(1)) {
        let (x, y) = batch_of(pairs, chunk)?;
        let pred = model.net.infer(&x)?;
        total += loss(kind, &pred, &y)?.value * chunk.len() as f64;
    }
    Ok(total / idx.len() as f64)
}

/// Train on `pairs` (loss always against the clean image). Returns one trace
/// entry per epoch; the model keeps its final-epoch weights.
pub fn train(model: &mut CdaeModel, pairs: &[ImagePair], cfg: &TrainConfig) -> Result<Vec<EpochTrace>, CdaeError> {
    cfg.validate()?;
    if pairs.len() < 2 {
        return Err(CdaeError::TooFewPairs(pairs.len()));
    }
    for p in pairs {
        model.check_image(&p.noisy)?;
        model.check_image(&p.clean)?;
    }
    let (mut train_idx, val_idx) = split_indices(pairs.len(), cfg.val_fraction, cfg.seed);
    let mut order_rng = Rng64::new(cfg.seed, Stream::DataOrder);
    let mut opt = Adam::new(cfg.adam);
    let mut trace = Vec::with_capacity(cfg.epochs);
    let start = Instant::now();

    for epoch in 1..=cfg.epochs {
        order_rng.shuffle(&mut train_idx);
        let mut sum = 0.0;
        for chunk in train_idx.chunks(cfg.batch_size) {
            let (x, y) = batch_of(pairs, chunk)?;
            let step = (|| -> Result<f64, NnError> {
                let pred = model.net.forward(&x)?;
                let out = loss(cfg.loss, &pred, &y)?;
                if !out.value.is_finite() {
                    return Err(NnError::NonFinite { layer: "loss".into() });
                }
                model.net.backward(&out.grad)?;
                model.net.adam_step(&mut opt)?;
                Ok(out.value)
            })();
            match step {
                Ok(v) => sum += v * chunk.len() as f64,
                Err(NnError::NonFinite { .. }) => {
                    return Err(CdaeError::NonFiniteLoss { epoch, partial: trace })
                }
                Err(e) => return Err(e.into()),
            }
        }
        let train_loss = sum / train_idx.len() as f64;
        let val_loss = match evaluate(model, pairs, &val_idx, cfg.loss, cfg.batch_size) {
            Ok(v) if v.is_finite() => v,
            Ok(_) | Err(CdaeError::Nn(NnError::NonFinite { .. })) => {
                return Err(CdaeError::NonFiniteLoss { epoch, partial: trace })
            }
            Err(e) => return Err(e),
        };
        trace.push(EpochTrace {
            epoch,
            train_loss,
            val_loss,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(trace)
}

/// Forward pass on one `[H, W, C]` image.
pub fn denoise(model: &CdaeModel, noisy: &Tensor) -> Result<Tensor, CdaeError> {
    model.check_image(noisy)?;
    let x = noisy.clone().reshape(&[1, noisy.shape()[0], noisy.shape()[1], noisy.shape()[2]])?;
    let y = model.net.infer(&x)?;
    Ok(y.reshape(noisy.shape())?)
}

/// `10 log10(1 / MSE)` for images in `[0, 1]`; identical images give `+inf`.
pub fn psnr(a: &Tensor, b: &Tensor) -> Result<f64, CdaeError> {
    if a.shape() != b.shape() {
        return Err(CdaeError::ShapeMismatch(format!(
            "psnr: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mse = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.len() as f64;
    Ok(if mse == 0.0 { f64::INFINITY } else { -10.0 * mse.log10() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinLoss {
    pub value: f64,
    pub epoch: usize,
}

/// Lowest validation loss; ties resolve to the earliest epoch.
pub fn min_loss(trace: &[EpochTrace]) -> Result<MinLoss, CdaeError> {
    let first = trace.first().ok_or(CdaeError::EmptyTrace)?;
    let mut best = MinLoss {
        value: first.val_loss,
        epoch: first.epoch,
    };
    for t in &trace[1..] {
        if t.val_loss < best.value {
            best = MinLoss {
                value: t.val_loss,
                epoch: t.epoch,
            };
        }
    }
    Ok(best)
}
