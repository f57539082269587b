use num_complex::Complex64;
use proptest::prelude::*;
use specdenoise::cdae::psnr;
use specdenoise::fft::Fft;
use specdenoise::noisegen::{
    autocorrelation, color, estimate_moments, inject, inject_detailed, noise_field, raised_cosine_cdf,
    raised_cosine_inverse_cdf, sample_standardized, ColoringAxis, DistKind, Distribution, NoiseSpec,
};
use specdenoise::stft::SpectrogramImage;
use specdenoise::Tensor;

const N: usize = 1_000_000;

/// Composite Simpson rule on `[lo, hi]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn kurtosis_by_quadrature(pdf: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 200_000;
    let m0 = simpson(&pdf, lo, hi, n);
    let m1 = simpson(|x| x * pdf(x), lo, hi, n) / m0;
    let m2 = simpson(|x| (x - m1).powi(2) * pdf(x), lo, hi, n) / m0;
    let m4 = simpson(|x| (x - m1).powi(4) * pdf(x), lo, hi, n) / m0;
    m4 / (m2 * m2) - 3.0
}

#[test]
fn raised_cosine_kurtosis_matches_quadrature() {
    use std::f64::consts::PI;
    let oracle = kurtosis_by_quadrature(|x| 0.5 * (1.0 + (PI * x).cos()), -1.0, 1.0);
    assert!((oracle - -0.5938).abs() < 5e-5, "{oracle}");
    let analytic = Distribution::new(DistKind::RaisedCosine).excess_kurtosis();
    assert!((analytic - oracle).abs() < 1e-9, "{analytic} vs {oracle}");
}

#[test]
fn weibull_kurtosis_matches_quadrature() {
    for k in [1.0, 1.5, 2.0, 3.5] {
        let pdf = |x: f64| if x <= 0.0 { 0.0 } else { k * x.powf(k - 1.0) * (-x.powf(k)).exp() };
        let oracle = kurtosis_by_quadrature(pdf, 0.0, 40.0);
        let analytic = Distribution::weibull(k).unwrap().excess_kurtosis();
        assert!((analytic - oracle).abs() < 1e-4, "k={k}: {analytic} vs {oracle}");
    }
}

#[test]
fn raised_cosine_inverse_cdf_round_trips() {
    for i in 1..200 {
        let u = i as f64 / 200.0;
        assert!((raised_cosine_cdf(raised_cosine_inverse_cdf(u)) - u).abs() < 1e-12);
    }
}

#[test]
fn sampler_moments_match_targets() {
    let mut dists: Vec<Distribution> = DistKind::ALL.iter().map(|&k| Distribution::new(k)).collect();
    dists.push(Distribution::weibull(3.0).unwrap());
    for (i, d) in dists.iter().enumerate() {
        let x = sample_standardized(d, N, 1000 + i as u64).unwrap();
        let m = estimate_moments(&x).unwrap();
        let label = d.label();
        assert!(m.mean.abs() < 0.01, "{label}: mean {}", m.mean);
        assert!((m.variance - 1.0).abs() < 0.01, "{label}: var {}", m.variance);
        let tol = if d.kind() == DistKind::Uniform { 0.05 } else { 0.2 };
        assert!(
            (m.excess_kurtosis - d.excess_kurtosis()).abs() < tol,
            "{label}: kurtosis {} vs {}",
            m.excess_kurtosis,
            d.excess_kurtosis()
        );
    }
}

#[test]
fn bounded_samplers_respect_support() {
    let check = |k, bound: f64| {
        let x = sample_standardized(&Distribution::new(k), 100_000, 5).unwrap();
        assert!(x.iter().all(|v| v.abs() <= bound + 1e-12), "{k:?}");
    };
    check(DistKind::Uniform, 3f64.sqrt());
    check(DistKind::WignerSemicircle, 2.0);
    check(DistKind::RaisedCosine, 1.0 / specdenoise::noisegen::raised_cosine_std());
}

#[test]
fn coloring_keeps_variance_and_sets_lag_one_correlation() {
    let white = sample_standardized(&Distribution::new(DistKind::Gaussian), N, 21).unwrap();
    assert_eq!(color(&white, 0.0).unwrap(), white);
    for i in 1..10 {
        let a = i as f64 / 10.0;
        let y = color(&white, a).unwrap();
        let m = estimate_moments(&y).unwrap();
        assert!((m.variance - 1.0).abs() < 0.01, "a={a}: var {}", m.variance);
        let r1 = autocorrelation(&y, 1);
        assert!((r1 - a).abs() < 0.01, "a={a}: r1 {r1}");
    }
}

/// Averaged periodogram power in the lowest and highest quarter of the
/// positive-frequency band.
fn quartile_powers(x: &[f64]) -> (f64, f64) {
    let n = 1024;
    let fft = Fft::new(n).unwrap();
    let mut psd = vec![0.0; n / 2];
    for chunk in x.chunks_exact(n) {
        let mut buf: Vec<Complex64> = chunk.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.forward(&mut buf);
        for (p, c) in psd.iter_mut().zip(&buf) {
            *p += c.norm_sqr();
        }
    }
    let q = psd.len() / 4;
    (psd[1..q].iter().sum(), psd[3 * q..].iter().sum())
}

#[test]
fn colored_noise_is_low_pass() {
    let white = sample_standardized(&Distribution::new(DistKind::Laplace), 1 << 18, 4).unwrap();
    let (lo_w, hi_w) = quartile_powers(&white);
    assert!((lo_w / hi_w - 1.0).abs() < 0.1);
    for a in [0.3, 0.5, 0.7, 0.9] {
        let (lo, hi) = quartile_powers(&color(&white, a).unwrap());
        assert!(lo > 1.5 * hi, "a={a}: {lo} vs {hi}");
    }
}

fn test_image(h: usize, w: usize) -> SpectrogramImage {
    let data = (0..h * w)
        .map(|i| {
            let (r, c) = ((i / w) as f64, (i % w) as f64);
            0.5 + 0.3 * (r / 5.0).sin() * (c / 7.0).cos()
        })
        .collect();
    SpectrogramImage {
        pixels: Tensor::from_vec(&[h, w, 1], data).unwrap(),
        source_id: "t".into(),
        db_floor: -80.0,
    }
}

#[test]
fn injection_power_ratio_matches_noise_factor() {
    let img = test_image(64, 64);
    for nf in [0.1, 0.3, 0.9] {
        for kind in DistKind::ALL {
            let spec = NoiseSpec::white(Distribution::new(kind), nf, 8);
            let r = inject_detailed(&img, &spec).unwrap().preclamp_ratio.unwrap();
            assert!((r - nf).abs() < 0.02, "{kind:?} nf={nf}: {r}");
        }
    }
}

#[test]
fn zero_noise_factor_is_bit_exact() {
    let img = test_image(64, 64);
    let out = inject(&img, &NoiseSpec::white(Distribution::new(DistKind::Logistic), 0.0, 3)).unwrap();
    assert_eq!(out.pixels, img.pixels);
}

#[test]
fn more_noise_means_lower_psnr() {
    let img = test_image(64, 64);
    let g = Distribution::new(DistKind::Gaussian);
    let p3 = psnr(&inject(&img, &NoiseSpec::white(g, 0.3, 1)).unwrap().pixels, &img.pixels).unwrap();
    let p9 = psnr(&inject(&img, &NoiseSpec::white(g, 0.9, 1)).unwrap().pixels, &img.pixels).unwrap();
    assert!(p9 < p3, "{p9} vs {p3}");
}

#[test]
fn injection_is_deterministic_per_seed() {
    let img = test_image(32, 32);
    let spec = NoiseSpec {
        coloring_a: 0.6,
        ..NoiseSpec::white(Distribution::new(DistKind::HyperbolicSecant), 0.5, 77)
    };
    assert_eq!(inject(&img, &spec).unwrap().pixels, inject(&img, &spec).unwrap().pixels);
    let other = NoiseSpec { seed: 78, ..spec };
    assert_ne!(inject(&img, &spec).unwrap().pixels, inject(&img, &other).unwrap().pixels);
}

#[test]
fn time_axis_colors_each_row() {
    let spec = NoiseSpec {
        coloring_a: 0.8,
        ..NoiseSpec::white(Distribution::new(DistKind::Gaussian), 1.0, 2)
    };
    let f = noise_field(&[64, 512, 1], &spec).unwrap().values;
    let (mut along, mut across) = (0.0, 0.0);
    for r in 0..64 {
        let row = &f.data()[r * 512..(r + 1) * 512];
        along += autocorrelation(row, 1) / 64.0;
    }
    for c in 0..512 {
        let col: Vec<f64> = (0..64).map(|r| f.data()[r * 512 + c]).collect();
        across += autocorrelation(&col, 1) / 512.0;
    }
    assert!((along - 0.8).abs() < 0.03, "{along}");
    assert!(across.abs() < 0.03, "{across}");

    let flat = noise_field(&[64, 512, 1], &NoiseSpec { axis: ColoringAxis::Flattened, ..spec }).unwrap();
    assert!((autocorrelation(flat.values.data(), 1) - 0.8).abs() < 0.01);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn injected_pixels_stay_in_unit_range(nf in 0.0f64..2.0, a in 0.0f64..0.95, seed in any::<u64>(), k in 0usize..9) {
        let img = test_image(16, 16);
        let spec = NoiseSpec {
            dist: Distribution::new(DistKind::ALL[k]),
            noise_factor: nf,
            coloring_a: a,
            seed,
            axis: ColoringAxis::Time,
        };
        let out = inject(&img, &spec).unwrap();
        prop_assert!(out.pixels.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn coloring_is_linear(a in 0.0f64..0.99, xs in prop::collection::vec(-5.0f64..5.0, 1..64), s in -3.0f64..3.0) {
        let scaled: Vec<f64> = xs.iter().map(|x| s * x).collect();
        let y1 = color(&scaled, a).unwrap();
        let y2 = color(&xs, a).unwrap();
        for (u, v) in y1.iter().zip(&y2) {
            prop_assert!((u - s * v).abs() < 1e-9);
        }
    }
}
