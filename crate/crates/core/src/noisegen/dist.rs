//! Standardized (zero mean, unit variance) noise distributions.

use std::f64::consts::PI;
use std::str::FromStr;

use super::NoiseError;
use crate::rng::{Rng64, Stream};

pub const DEFAULT_WEIBULL_K: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistKind {
    Gaussian,
    Uniform,
    RaisedCosine,
    WignerSemicircle,
    Laplace,
    /// Same sampler as [`DistKind::Laplace`]; kept as its own label.
    DoubleExponential,
    HyperbolicSecant,
    Logistic,
    Weibull,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gaussianity {
    Gaussian,
    SubGaussian,
    SuperGaussian,
}

impl std::fmt::Display for Gaussianity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "Gaussian",
            Self::SubGaussian => "Sub-Gaussian",
            Self::SuperGaussian => "Super-Gaussian",
        })
    }
}

impl DistKind {
    pub const ALL: [DistKind; 9] = [
        DistKind::Gaussian,
        DistKind::Uniform,
        DistKind::RaisedCosine,
        DistKind::WignerSemicircle,
        DistKind::Laplace,
        DistKind::DoubleExponential,
        DistKind::HyperbolicSecant,
        DistKind::Logistic,
        DistKind::Weibull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Uniform => "uniform",
            Self::RaisedCosine => "raised-cosine",
            Self::WignerSemicircle => "wigner-semicircle",
            Self::Laplace => "laplace",
            Self::DoubleExponential => "double-exponential",
            Self::HyperbolicSecant => "hyperbolic-secant",
            Self::Logistic => "logistic",
            Self::Weibull => "weibull",
        }
    }

    /// Stable numeric id, used when deriving per-cell seeds.
    pub fn id(self) -> u64 {
        match self {
            Self::Gaussian => 0,
            Self::Uniform => 1,
            Self::RaisedCosine => 2,
            Self::WignerSemicircle => 3,
            Self::Laplace => 4,
            Self::DoubleExponential => 5,
            Self::HyperbolicSecant => 6,
            Self::Logistic => 7,
            Self::Weibull => 8,
        }
    }

    pub fn gaussianity(self) -> Gaussianity {
        match self {
            Self::Gaussian => Gaussianity::Gaussian,
            Self::Uniform | Self::RaisedCosine | Self::WignerSemicircle => Gaussianity::SubGaussian,
            _ => Gaussianity::SuperGaussian,
        }
    }
}

impl FromStr for DistKind {
    type Err = NoiseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        let kind = match norm.as_str() {
            "gaussian" | "normal" | "gaussian-white" => Self::Gaussian,
            "uniform" => Self::Uniform,
            "raised-cosine" | "raisedcosine" => Self::RaisedCosine,
            "wigner-semicircle" | "semicircle" | "wiener-semicircle" => Self::WignerSemicircle,
            "laplace" => Self::Laplace,
            "double-exponential" | "doubleexponential" => Self::DoubleExponential,
            "hyperbolic-secant" | "sech" => Self::HyperbolicSecant,
            "logistic" => Self::Logistic,
            "weibull" => Self::Weibull,
            _ => return Err(NoiseError::InvalidParam(format!("unknown distribution {s:?}"))),
        };
        Ok(kind)
    }
}

/// A noise distribution, standardized to mean 0 and variance 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distribution {
    kind: DistKind,
    weibull_k: f64,
}

impl Distribution {
    pub fn new(kind: DistKind) -> Self {
        Self {
            kind,
            weibull_k: DEFAULT_WEIBULL_K,
        }
    }

    pub fn weibull(k: f64) -> Result<Self, NoiseError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(NoiseError::InvalidParam(format!("Weibull shape must be > 0, got {k}")));
        }
        Ok(Self {
            kind: DistKind::Weibull,
            weibull_k: k,
        })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn weibull_k(&self) -> f64 {
        self.weibull_k
    }

    /// Label used in CSV output: the kind name, plus `:k` for Weibull with a
    /// non-default shape.
    pub fn label(&self) -> String {
        if self.kind == DistKind::Weibull && self.weibull_k != DEFAULT_WEIBULL_K {
            format!("weibull:{}", self.weibull_k)
        } else {
            self.kind.name().to_string()
        }
    }

    /// Analytic excess kurtosis of the distribution.
    pub fn excess_kurtosis(&self) -> f64 {
        match self.kind {
            DistKind::Gaussian => 0.0,
            DistKind::Uniform => -1.2,
            DistKind::RaisedCosine => 6.0 * (90.0 - PI.powi(4)) / (5.0 * (PI * PI - 6.0).powi(2)),
            DistKind::WignerSemicircle => -1.0,
            DistKind::Laplace | DistKind::DoubleExponential => 3.0,
            DistKind::HyperbolicSecant => 2.0,
            DistKind::Logistic => 1.2,
            DistKind::Weibull => {
                let k = self.weibull_k;
                let g = |j: f64| libm::tgamma(1.0 + j / k);
                let (g1, g2, g3, g4) = (g(1.0), g(2.0), g(3.0), g(4.0));
                let var = g2 - g1 * g1;
                (g4 - 4.0 * g1 * g3 + 6.0 * g1 * g1 * g2 - 3.0 * g1.powi(4)) / (var * var) - 3.0
            }
        }
    }

    /// One standardized draw.
    pub fn sample(&self, rng: &mut Rng64) -> f64 {
        match self.kind {
            DistKind::Gaussian => rng.standard_normal(),
            DistKind::Uniform => 3f64.sqrt() * (2.0 * rng.uniform() - 1.0),
            DistKind::RaisedCosine => raised_cosine_inverse_cdf(rng.uniform()) / raised_cosine_std(),
            DistKind::WignerSemicircle => {
                // x-coordinate of a uniform point in the disk of radius 2,
                // i.e. 2 * (2B - 1) with B ~ Beta(3/2, 3/2)
                let r = 2.0 * rng.uniform().sqrt();
                r * (2.0 * PI * rng.uniform()).cos()
            }
            DistKind::Laplace | DistKind::DoubleExponential => {
                let b = std::f64::consts::FRAC_1_SQRT_2;
                let u = rng.open_uniform() - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            DistKind::HyperbolicSecant => {
                let u = rng.open_uniform();
                (2.0 / PI) * (PI * u / 2.0).tan().ln()
            }
            DistKind::Logistic => {
                let s = 3f64.sqrt() / PI;
                let u = rng.open_uniform();
                s * (u / (1.0 - u)).ln()
            }
            DistKind::Weibull => {
                let k = self.weibull_k;
                let mean = libm::tgamma(1.0 + 1.0 / k);
                let std = (libm::tgamma(1.0 + 2.0 / k) - mean * mean).sqrt();
                let u = rng.open_uniform();
                ((-(1.0 - u).ln()).powf(1.0 / k) - mean) / std
            }
        }
    }
}

impl FromStr for Distribution {
    type Err = NoiseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some((name, k)) => {
                let kind: DistKind = name.parse()?;
                if kind != DistKind::Weibull {
                    return Err(NoiseError::InvalidParam(format!(
                        "only weibull takes a shape parameter: {s:?}"
                    )));
                }
                let k: f64 = k
                    .trim()
                    .parse()
                    .map_err(|_| NoiseError::InvalidParam(format!("bad Weibull shape in {s:?}")))?;
                Distribution::weibull(k)
            }
            None => Ok(Distribution::new(s.parse()?)),
        }
    }
}

/// Standard deviation of the raised-cosine law with unit half-width.
pub fn raised_cosine_std() -> f64 {
    (1.0 / 3.0 - 2.0 / (PI * PI)).sqrt()
}

/// CDF of the raised-cosine law on `[-1, 1]`.
pub fn raised_cosine_cdf(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        0.5 * (1.0 + x + (PI * x).sin() / PI)
    }
}

/// Inverse CDF by bisection. 52 halvings of `[-1, 1]` leave an interval
/// narrower than 1e-15; the density is at most 1, so the CDF error is below
/// 1e-12.
pub fn raised_cosine_inverse_cdf(u: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..52 {
        let mid = 0.5 * (lo + hi);
        if raised_cosine_cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `n` i.i.d. standardized draws from `dist`, reproducible per `seed`.
pub fn sample_standardized(dist: &Distribution, n: usize, seed: u64) -> Result<Vec<f64>, NoiseError> {
    if n == 0 {
        return Err(NoiseError::InvalidParam("n must be >= 1".into()));
    }
    let mut rng = Rng64::new(seed, Stream::Noise);
    Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
}
