//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p specdenoise --test acceptance`.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use specdenoise::cdae::{self, ImagePair, TrainConfig};
use specdenoise::dataset::synthetic_images;
use specdenoise::noisegen::{
    autocorrelation, color, estimate_moments, inject, inject_detailed, sample_standardized, ColoringAxis, DistKind,
    Distribution, NoiseSpec,
};
use specdenoise::nn::{
    conv2d_forward, gradcheck, gradcheck_model, Conv2d, GradcheckOptions, Layer, LossKind, MaxPool2x2,
    NnError, Objective, Relu, Sequential, Sigmoid, Upsample2x2,
};
use specdenoise::rng::{Rng64, Stream};
use specdenoise::stft::{stft, window, ImageShape, SpectrogramImage, StftConfig, WindowKind};
use specdenoise::sweep::{default_levels, emit_report, results_csv, run_cell, run_grid, RunOptions, SweepGrid};
use specdenoise::timeseries::Segment;
use specdenoise::Tensor;

type Outcome = Result<String, String>;

fn random(shape: &[usize], rng: &mut Rng64, lo: f64, hi: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.uniform_in(lo, hi)).collect()).unwrap()
}

fn within_budget(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    let s = elapsed.as_secs_f64();
    if s < limit_s {
        Ok(())
    } else {
        Err(format!("took {s:.1} s, budget {limit_s} s"))
    }
}

// ---------------------------------------------------------------- 1

struct LayerInput {
    layer: Layer,
    x: Tensor,
    probe: Tensor,
}

impl Objective for LayerInput {
    fn param_count(&self) -> usize {
        self.x.len()
    }
    fn param(&self, i: usize) -> f64 {
        self.x.data()[i]
    }
    fn set_param(&mut self, i: usize, v: f64) {
        self.x.data_mut()[i] = v;
    }
    fn value(&mut self) -> Result<f64, NnError> {
        let y = self.layer.infer(&self.x)?;
        Ok(y.data().iter().zip(self.probe.data()).map(|(a, b)| a * b).sum())
    }
    fn gradient(&mut self) -> Result<Vec<f64>, NnError> {
        self.layer.forward(&self.x)?;
        Ok(self.layer.backward(&self.probe)?.into_data())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = Rng64::new(5, Stream::Synth);
    let opts = GradcheckOptions::default();

    // inputs kept at least 0.01 from the ReLU kink and from pooling ties
    let mut signed = random(&[1, 8, 8, 4], &mut rng, 0.01, 1.0);
    for (i, v) in signed.data_mut().iter_mut().enumerate() {
        if i % 2 == 1 {
            *v = -*v;
        }
    }
    let mut distinct = Tensor::from_vec(&[1, 8, 8, 4], (0..256).map(|i| i as f64 * 0.01).collect()).unwrap();
    rng.shuffle(distinct.data_mut());
    let mut conv = Conv2d::new(4, 3, 3);
    conv.init_uniform(0.5, &mut rng);
    let cases = vec![
        ("conv2d", Layer::Conv2d(conv.clone()), random(&[1, 8, 8, 4], &mut rng, -1.0, 1.0)),
        ("relu", Layer::Relu(Relu::default()), signed),
        ("sigmoid", Layer::Sigmoid(Sigmoid::default()), random(&[1, 8, 8, 4], &mut rng, -4.0, 4.0)),
        ("maxpool", Layer::MaxPool2x2(MaxPool2x2::default()), distinct),
        ("upsample", Layer::UpsampleNearest2x2(Upsample2x2), random(&[1, 4, 4, 4], &mut rng, -1.0, 1.0)),
    ];
    let mut layer_worst = 0.0f64;
    for (name, layer, x) in cases {
        let probe_shape = layer.infer(&x).map_err(|e| e.to_string())?.shape().to_vec();
        let probe = random(&probe_shape, &mut rng, -1.0, 1.0);
        let mut obj = LayerInput { layer, x, probe };
        let r = gradcheck(&mut obj, &opts).map_err(|e| e.to_string())?;
        if r.max_relative_error >= 1e-6 {
            return Err(format!("{name} input gradient: {:.2e} >= 1e-6", r.max_relative_error));
        }
        layer_worst = layer_worst.max(r.max_relative_error);
    }
    let mut single = Sequential::new(vec![Layer::Conv2d(conv)]);
    let x = random(&[1, 8, 8, 4], &mut rng, -1.0, 1.0);
    let y = random(&[1, 8, 8, 3], &mut rng, -1.0, 1.0);
    let r = gradcheck_model(&mut single, &x, &y, LossKind::Mse, &opts).map_err(|e| e.to_string())?;
    if r.max_relative_error >= 1e-6 {
        return Err(format!("conv2d weights: {:.2e} >= 1e-6", r.max_relative_error));
    }
    layer_worst = layer_worst.max(r.max_relative_error);

    let mut full = Vec::new();
    for kind in [LossKind::Mse, LossKind::Bce] {
        let mut model = cdae::build(ImageShape { h: 16, w: 16, c: 1 }, 3).map_err(|e| e.to_string())?;
        let mut drng = Rng64::new(8, Stream::Synth);
        let x = random(&[1, 16, 16, 1], &mut drng, 0.0, 1.0);
        let y = random(&[1, 16, 16, 1], &mut drng, 0.0, 1.0);
        let r = gradcheck_model(&mut model.net, &x, &y, kind, &opts).map_err(|e| e.to_string())?;
        if r.max_relative_error >= 1e-5 {
            return Err(format!("full model {kind}: {:.2e} >= 1e-5", r.max_relative_error));
        }
        full.push(format!("{kind} {:.2e} ({} checked, {} skipped)", r.max_relative_error, r.checked, r.skipped));
    }
    within_budget(start.elapsed(), 30.0)?;
    Ok(format!(
        "per-layer worst {layer_worst:.2e}; full model {}; {:.1} s",
        full.join(", "),
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 2

fn naive_conv(x: &Tensor, w: &Tensor, b: &Tensor) -> Tensor {
    let s = x.shape();
    let (n, h, wd, cin) = (s[0], s[1], s[2], s[3]);
    let ws = w.shape();
    let (cout, kh, kw) = (ws[0], ws[2], ws[3]);
    let mut out = vec![0.0; n * h * wd * cout];
    for bi in 0..n {
        for y in 0..h as isize {
            for xx in 0..wd as isize {
                for co in 0..cout {
                    let mut acc = b.data()[co];
                    for ci in 0..cin {
                        for ky in 0..kh as isize {
                            for kx in 0..kw as isize {
                                let iy = y + ky - (kh / 2) as isize;
                                let ix = xx + kx - (kw / 2) as isize;
                                if (0..h as isize).contains(&iy) && (0..wd as isize).contains(&ix) {
                                    acc += x.data()[((bi * h + iy as usize) * wd + ix as usize) * cin + ci]
                                        * w.data()[((co * cin + ci) * kh + ky as usize) * kw + kx as usize];
                                }
                            }
                        }
                    }
                    out[((bi * h + y as usize) * wd + xx as usize) * cout + co] = acc;
                }
            }
        }
    }
    Tensor::from_vec(&[n, h, wd, cout], out).unwrap()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = Rng64::new(2, Stream::Synth);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (h, w) = (1 + rng.below(8), 1 + rng.below(8));
        let (cin, cout) = (1 + rng.below(4), 1 + rng.below(4));
        let k = [1, 3, 5][rng.below(3)];
        let x = random(&[1, h, w, cin], &mut rng, -1.0, 1.0);
        let wt = random(&[cout, cin, k, k], &mut rng, -1.0, 1.0);
        let b = random(&[cout], &mut rng, -1.0, 1.0);
        let fast = conv2d_forward(&x, &wt, &b).map_err(|e| e.to_string())?;
        let slow = naive_conv(&x, &wt, &b);
        let err = fast.data().iter().zip(slow.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 1e-12 {
            return Err(format!("{h}x{w}x{cin}->{cout} k={k}: {err:.2e} > 1e-12"));
        }
        worst = worst.max(err);
    }
    within_budget(start.elapsed(), 10.0)?;
    Ok(format!("200 shapes, worst {worst:.2e}; {:.2} s", start.elapsed().as_secs_f64()))
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let targets = [
        (DistKind::Uniform, -1.2),
        (DistKind::WignerSemicircle, -1.0),
        (DistKind::RaisedCosine, -0.5938),
        (DistKind::Logistic, 1.2),
        (DistKind::HyperbolicSecant, 2.0),
        (DistKind::Laplace, 3.0),
        (DistKind::DoubleExponential, 3.0),
        (DistKind::Gaussian, 0.0),
    ];
    let mut summary = Vec::new();
    for (i, (kind, kurt)) in targets.iter().enumerate() {
        let x = sample_standardized(&Distribution::new(*kind), 1_000_000, 300 + i as u64).map_err(|e| e.to_string())?;
        let m = estimate_moments(&x).map_err(|e| e.to_string())?;
        let name = kind.name();
        if m.mean.abs() > 0.01 {
            return Err(format!("{name}: mean {:.4}", m.mean));
        }
        if (m.variance - 1.0).abs() > 0.01 {
            return Err(format!("{name}: variance {:.4}", m.variance));
        }
        if (m.excess_kurtosis - kurt).abs() > 0.2 {
            return Err(format!("{name}: excess kurtosis {:.3} vs {kurt}", m.excess_kurtosis));
        }
        summary.push(format!("{name} {:+.3}", m.excess_kurtosis));
    }
    within_budget(start.elapsed(), 60.0)?;
    Ok(format!("kurtosis {}; {:.1} s", summary.join(", "), start.elapsed().as_secs_f64()))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let white = sample_standardized(&Distribution::new(DistKind::Gaussian), 1_000_000, 44).map_err(|e| e.to_string())?;
    if color(&white, 0.0).map_err(|e| e.to_string())? != white {
        return Err("a=0 is not the identity".into());
    }
    let (mut dv, mut dr) = (0.0f64, 0.0f64);
    for i in 1..10 {
        let a = i as f64 / 10.0;
        let y = color(&white, a).map_err(|e| e.to_string())?;
        let var = estimate_moments(&y).map_err(|e| e.to_string())?.variance;
        let r1 = autocorrelation(&y, 1);
        if (var - 1.0).abs() > 0.01 || (r1 - a).abs() > 0.01 {
            return Err(format!("a={a}: variance {var:.4}, lag-1 {r1:.4}"));
        }
        dv = dv.max((var - 1.0).abs());
        dr = dr.max((r1 - a).abs());
    }
    within_budget(start.elapsed(), 30.0)?;
    Ok(format!(
        "max |var-1| {dv:.4}, max |r1-a| {dr:.4}, a=0 identical; {:.1} s",
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Outcome {
    let img = synthetic_images(1, ImageShape::DESK, 5).map_err(|e| e.to_string())?.remove(0).image;
    let mut ratios = Vec::new();
    for nf in [0.1, 0.3, 0.9] {
        let spec = NoiseSpec::white(Distribution::new(DistKind::Gaussian), nf, 17);
        let r = inject_detailed(&img, &spec)
            .map_err(|e| e.to_string())?
            .preclamp_ratio
            .ok_or("clean image has zero variance")?;
        if (r - nf).abs() > 0.02 {
            return Err(format!("NF={nf}: ratio {r:.4}"));
        }
        ratios.push(format!("{nf}->{r:.6}"));
    }
    let zero = inject(&img, &NoiseSpec::white(Distribution::new(DistKind::Gaussian), 0.0, 17)).map_err(|e| e.to_string())?;
    if zero.pixels != img.pixels {
        return Err("NF=0 changed the image".into());
    }
    Ok(format!("pre-clamp ratios {}; NF=0 bit-exact", ratios.join(", ")))
}

// ---------------------------------------------------------------- 6

fn direct_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| Complex64::from_polar(*v, -2.0 * PI * ((k * t) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let seg = |samples: Vec<f64>| Segment { samples, source_id: "acc".into(), offset: 0, sample_rate_hz: 100.0 };
    let rect = StftConfig { window: WindowKind::Rectangular, ..Default::default() };
    for k in 1..32 {
        let x = (0..300).map(|t| (2.0 * PI * k as f64 * t as f64 / 64.0).cos()).collect();
        let g = stft(&seg(x), &rect).map_err(|e| e.to_string())?;
        for f in 0..g.frames() {
            let frame = g.frame(f);
            let peak = (0..frame.len()).max_by(|&a, &b| frame[a].norm().total_cmp(&frame[b].norm())).unwrap();
            if peak != k {
                return Err(format!("sinusoid at bin {k} peaked at {peak}"));
            }
        }
    }
    let mut rng = Rng64::new(6, Stream::Synth);
    let mut worst = 0.0f64;
    for &(wl, ov, fl) in &[(64usize, 32usize, 64usize), (100, 60, 128), (256, 192, 256), (30, 0, 32)] {
        let x: Vec<f64> = (0..400).map(|_| rng.standard_normal()).collect();
        let cfg = StftConfig { window_len: wl, overlap: ov, window: WindowKind::Hann, fft_len: fl };
        let g = stft(&seg(x.clone()), &cfg).map_err(|e| e.to_string())?;
        let w = window(WindowKind::Hann, wl);
        for f in 0..g.frames() {
            let mut frame: Vec<f64> = x[f * cfg.step()..][..wl].iter().zip(&w).map(|(a, b)| a * b).collect();
            let energy: f64 = frame.iter().map(|v| v * v).sum();
            frame.resize(fl, 0.0);
            let oracle = direct_dft(&frame);
            let got = g.frame(f);
            let scale = oracle.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let bin_err = got.iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
            let half = fl / 2;
            let two_sided =
                got[0].norm_sqr() + got[half].norm_sqr() + 2.0 * got[1..half].iter().map(|v| v.norm_sqr()).sum::<f64>();
            let oracle_energy: f64 = oracle.iter().map(|v| v.norm_sqr()).sum();
            let rel = ((two_sided - fl as f64 * energy) / (fl as f64 * energy))
                .abs()
                .max(((oracle_energy - fl as f64 * energy) / (fl as f64 * energy)).abs());
            if rel > 1e-9 || bin_err > 1e-9 {
                return Err(format!("window {wl}, fft {fl}, frame {f}: Parseval {rel:.2e}, bins {bin_err:.2e}"));
            }
            worst = worst.max(rel).max(bin_err);
        }
    }
    Ok(format!("31 bin-centred tones peak at their bin; Parseval worst {worst:.2e}"))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let shape = ImageShape::DESK;
    let images = synthetic_images(32, shape, 7).map_err(|e| e.to_string())?;
    let pairs: Vec<ImagePair> = images
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let spec = NoiseSpec::white(Distribution::new(DistKind::Gaussian), 0.3, i as u64);
            Ok(ImagePair { noisy: inject(&e.image, &spec)?.pixels, clean: e.image.pixels.clone() })
        })
        .collect::<Result<_, specdenoise::noisegen::NoiseError>>()
        .map_err(|e| e.to_string())?;
    let mut model = cdae::build(shape, 1).map_err(|e| e.to_string())?;
    let cfg = TrainConfig { epochs: 30, seed: 3, ..Default::default() };
    let trace = cdae::train(&mut model, &pairs, &cfg).map_err(|e| e.to_string())?;
    let best = cdae::min_loss(&trace).map_err(|e| e.to_string())?;
    let first = trace[0].val_loss;

    let (_, val) = cdae::split_indices(pairs.len(), cfg.val_fraction, cfg.seed);
    let (mut noisy, mut cleaned) = (0.0, 0.0);
    for &i in &val {
        noisy += cdae::psnr(&pairs[i].noisy, &pairs[i].clean).map_err(|e| e.to_string())?;
        let d = cdae::denoise(&model, &pairs[i].noisy).map_err(|e| e.to_string())?;
        cleaned += cdae::psnr(&d, &pairs[i].clean).map_err(|e| e.to_string())?;
    }
    noisy /= val.len() as f64;
    cleaned /= val.len() as f64;
    let detail = format!(
        "val MSE epoch 1 {first:.5}, min {:.5} at epoch {}; PSNR noisy {noisy:.2} dB, denoised {cleaned:.2} dB; {:.0} s",
        best.value,
        best.epoch,
        start.elapsed().as_secs_f64()
    );
    if best.value > 0.5 * first {
        return Err(format!("loss did not halve: {detail}"));
    }
    if cleaned < noisy + 2.0 {
        return Err(format!("PSNR gain below 2 dB: {detail}"));
    }
    within_budget(start.elapsed(), 600.0)?;
    Ok(detail)
}

// ---------------------------------------------------------------- 8

fn small_dataset(n: usize, side: usize) -> Result<Vec<SpectrogramImage>, String> {
    Ok(synthetic_images(n, ImageShape { h: side, w: side, c: 1 }, 21)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|e| e.image)
        .collect())
}

fn criterion_8() -> Outcome {
    let data = small_dataset(8, 32)?;
    let grid = SweepGrid {
        distributions: vec![Distribution::new(DistKind::Gaussian), Distribution::new(DistKind::Laplace)],
        nf_values: vec![0.1, 0.3, 0.6],
        a_values: vec![0.0],
        epochs_values: vec![3],
        master_seed: 2024,
        axis: ColoringAxis::Time,
        train: TrainConfig { batch_size: 4, ..Default::default() },
    };
    let run = |workers| run_grid(&grid, &data, &RunOptions { workers, ..Default::default() });
    let one = run(1).map_err(|e| e.to_string())?;
    let four = run(4).map_err(|e| e.to_string())?;
    if one.records.len() != 6 || !one.failures.is_empty() {
        return Err(format!("{} records, {} failures", one.records.len(), one.failures.len()));
    }
    let (a, b) = (results_csv(&one.records), results_csv(&four.records));
    if a != b {
        return Err("results.csv differs between 1 and 4 workers".into());
    }
    for cell in grid.cells() {
        let solo = run_cell(&grid, &cell, &data, false).map_err(|f| f.message)?;
        if solo != one.records[cell.index] {
            return Err(format!("cell {} differs when run alone", cell.index));
        }
    }
    Ok(format!("6-cell results.csv identical ({} bytes); every cell reproduced standalone", a.len()))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let data = small_dataset(16, 32)?;
    let grid = SweepGrid {
        distributions: vec![Distribution::new(DistKind::Gaussian)],
        nf_values: default_levels(),
        a_values: vec![0.0],
        epochs_values: vec![10],
        master_seed: 9,
        axis: ColoringAxis::Time,
        train: TrainConfig { batch_size: 4, ..Default::default() },
    };
    let out = run_grid(&grid, &data, &RunOptions::default()).map_err(|e| e.to_string())?;
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-report");
    emit_report(&out.records, &dir).map_err(|e| e.to_string())?;
    let md = std::fs::read_to_string(dir.join("report.md")).map_err(|e| e.to_string())?;
    let svg = std::fs::read_to_string(dir.join("loss_vs_nf_gaussian.svg")).map_err(|e| e.to_string())?;
    for needle in ["not expected", "NF=0.3", "0.0032", "0.0038"] {
        if !md.contains(needle) {
            return Err(format!("report.md lacks {needle:?}"));
        }
    }
    if !svg.contains("reference optimum NF=0.3") {
        return Err("NF chart lacks the reference marker".into());
    }
    let best = out
        .records
        .iter()
        .filter(|r| r.nf > 0.0)
        .min_by(|a, b| a.min_val_loss.total_cmp(&b.min_val_loss))
        .ok_or("no records")?;
    Ok(format!(
        "report in {}; lowest loss {:.5} at NF={} (reference near 0.3, non-gating); {:.0} s",
        dir.display(),
        best.min_val_loss,
        best.nf,
        start.elapsed().as_secs_f64()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("gradient correctness", criterion_1),
        ("convolution oracle equivalence", criterion_2),
        ("sampler statistics", criterion_3),
        ("coloring filter", criterion_4),
        ("noise calibration", criterion_5),
        ("STFT correctness", criterion_6),
        ("end-to-end training", criterion_7),
        ("determinism and parallel equivalence", criterion_8),
        ("trend report", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
