use std::str::FromStr;

use super::{NnError, Tensor};

/// Predictions are clamped to `[BCE_CLAMP, 1 - BCE_CLAMP]` inside BCE.
pub const BCE_CLAMP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LossKind {
    #[default]
    Mse,
    Bce,
}

impl FromStr for LossKind {
    type Err = NnError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mse" => Ok(Self::Mse),
            "bce" | "cross-entropy" => Ok(Self::Bce),
            other => Err(NnError::InvalidParam(format!("unknown loss {other:?}"))),
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Mse => "mse",
            Self::Bce => "bce",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossOutput {
    pub value: f64,
    /// d(value)/d(pred), same shape as the prediction.
    pub grad: Tensor,
}

/// Error-free sum of two floats: `a + b = s + e` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Sum of `(value, rounding error)` terms carried as an unevaluated pair
/// `hi + lo`, roughly twice the precision of a plain `f64` sum.
fn extended_sum(terms: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (v, err) in terms {
        let (s, e) = two_sum(hi, v);
        hi = s;
        lo += e + err;
    }
    two_sum(hi, lo)
}

fn extended_div(hi: f64, lo: f64, n: f64) -> (f64, f64) {
    let q = hi / n;
    let rem = (-q).mul_add(n, hi);
    two_sum(q, (rem + lo) / n)
}

fn check_shapes(pred: &Tensor, target: &Tensor) -> Result<(), NnError> {
    if pred.shape() != target.shape() {
        return Err(NnError::ShapeMismatch(format!(
            "loss: prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    Ok(())
}

fn clamp_bce(p: f64) -> f64 {
    p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP)
}

/// Mean loss as `hi + lo` with `hi` the correctly rounded value.
///
/// Finite differences subtract two losses that agree to within a few ulps;
/// the extra low word keeps that difference accurate.
pub fn loss_extended(kind: LossKind, pred: &Tensor, target: &Tensor) -> Result<(f64, f64), NnError> {
    check_shapes(pred, target)?;
    let pairs = pred.data().iter().zip(target.data());
    let (hi, lo) = match kind {
        LossKind::Mse => extended_sum(pairs.map(|(a, b)| {
            let d = a - b;
            let sq = d * d;
            (sq, d.mul_add(d, -sq))
        })),
        LossKind::Bce => {
            let (hi, lo) = extended_sum(pairs.map(|(&pv, &tv)| {
                let q = clamp_bce(pv);
                (tv * q.ln() + (1.0 - tv) * (1.0 - q).ln(), 0.0)
            }));
            (-hi, -lo)
        }
    };
    Ok(extended_div(hi, lo, pred.len() as f64))
}

/// Mean loss over every element, and its gradient.
pub fn loss(kind: LossKind, pred: &Tensor, target: &Tensor) -> Result<LossOutput, NnError> {
    let (value, _) = loss_extended(kind, pred, target)?;
    let n = pred.len() as f64;
    let pairs = pred.data().iter().zip(target.data());
    let grad = match kind {
        LossKind::Mse => pairs.map(|(a, b)| 2.0 * (a - b) / n).collect(),
        LossKind::Bce => pairs
            .map(|(&pv, &tv)| {
                // the clamp has zero slope outside its range
                let q = clamp_bce(pv);
                let inside = pv > BCE_CLAMP && pv < 1.0 - BCE_CLAMP;
                if inside {
                    (q - tv) / (q * (1.0 - q)) / n
                } else {
                    0.0
                }
            })
            .collect(),
    };
    Ok(LossOutput {
        value,
        grad: Tensor::from_vec(pred.shape(), grad)?,
    })
}
