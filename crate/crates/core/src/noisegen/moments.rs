use super::NoiseError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased (n - 1) variance.
    pub variance: f64,
    /// `m3 / m2^1.5` with biased central moments.
    pub skewness: f64,
    /// `m4 / m2^2 - 3` with biased central moments.
    pub excess_kurtosis: f64,
}

/// Two-pass sample moments.
pub fn estimate_moments(x: &[f64]) -> Result<Moments, NoiseError> {
    if x.len() < 4 {
        return Err(NoiseError::TooFewSamples(x.len()));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    // a constant sequence leaves only rounding residue in m2
    if m2 == 0.0 || m2 / n <= (f64::EPSILON * mean).powi(2) {
        return Err(NoiseError::DegenerateVariance);
    }
    let variance = m2 / (n - 1.0);
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    Ok(Moments {
        mean,
        variance,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}

/// Sample autocorrelation at `lag`, normalized by the lag-0 term.
pub fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let denom: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let num: f64 = (0..n - lag).map(|i| (x[i] - mean) * (x[i + lag] - mean)).sum();
    num / denom
}
