use proptest::prelude::*;
use specdenoise::cdae;
use specdenoise::nn::checkpoint;
use specdenoise::nn::{
    conv2d_backward, conv2d_forward, gradcheck, gradcheck_model, loss, maxpool2x2_forward, upsample2x2_forward, Conv2d,
    GradcheckOptions, Layer, LossKind, MaxPool2x2, NnError, Objective, Relu, Sequential, Sigmoid, Upsample2x2,
};
use specdenoise::rng::{Rng64, Stream};
use specdenoise::stft::ImageShape;
use specdenoise::Tensor;

fn random(shape: &[usize], rng: &mut Rng64, lo: f64, hi: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.uniform_in(lo, hi)).collect()).unwrap()
}

/// Direct evaluation of the zero-padded "same" cross-correlation.
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
                                    let xv = x.data()[((bi * h + iy as usize) * wd + ix as usize) * cin + ci];
                                    let wv = w.data()[((co * cin + ci) * kh + ky as usize) * kw + kx as usize];
                                    acc += xv * wv;
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

#[test]
fn conv_matches_naive_oracle_on_random_shapes() {
    let mut rng = Rng64::new(2024, Stream::Synth);
    for _ in 0..200 {
        let n = 1 + rng.below(3);
        let h = 1 + rng.below(8);
        let w = 1 + rng.below(8);
        let cin = 1 + rng.below(4);
        let cout = 1 + rng.below(4);
        let k = [1, 3, 5][rng.below(3)];
        let x = random(&[n, h, w, cin], &mut rng, -1.0, 1.0);
        let wt = random(&[cout, cin, k, k], &mut rng, -1.0, 1.0);
        let b = random(&[cout], &mut rng, -1.0, 1.0);
        let fast = conv2d_forward(&x, &wt, &b).unwrap();
        let slow = naive_conv(&x, &wt, &b);
        let err = fast.data().iter().zip(slow.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "shape {n}x{h}x{w}x{cin}->{cout} k={k}: {err}");
    }
}

/// Gradient of a fixed random linear functional of the output with respect
/// to the layer input, checked against central differences.
struct InputObjective {
    layer: Layer,
    x: Tensor,
    probe: Tensor,
}

impl InputObjective {
    fn value_at(&self, x: &Tensor) -> f64 {
        let y = self.layer.infer(x).unwrap();
        y.data().iter().zip(self.probe.data()).map(|(a, b)| a * b).sum()
    }
}

impl Objective for InputObjective {
    fn param_count(&self) -> usize {
        self.x.len()
    }
    fn param(&self, i: usize) -> f64 {
        self.x.data()[i]
    }
    fn set_param(&mut self, i: usize, value: f64) {
        self.x.data_mut()[i] = value;
    }
    fn value(&mut self) -> Result<f64, NnError> {
        Ok(self.value_at(&self.x))
    }
    fn gradient(&mut self) -> Result<Vec<f64>, NnError> {
        self.layer.forward(&self.x)?;
        Ok(self.layer.backward(&self.probe)?.into_data())
    }
}

fn conv_layer(cin: usize, cout: usize, rng: &mut Rng64) -> Conv2d {
    let mut c = Conv2d::new(cin, cout, 3);
    c.init_uniform(0.5, rng);
    c.bias = random(&[cout], rng, -0.2, 0.2);
    c
}

fn input_check(layer: Layer, x: Tensor, rng: &mut Rng64) -> f64 {
    let out_shape = layer.infer(&x).unwrap().shape().to_vec();
    let probe = random(&out_shape, rng, -1.0, 1.0);
    let mut obj = InputObjective { layer, x, probe };
    gradcheck(&mut obj, &GradcheckOptions::default()).unwrap().max_relative_error
}

#[test]
fn per_layer_input_gradients() {
    let mut rng = Rng64::new(5, Stream::Synth);
    // values kept away from the ReLU kink and with distinct pooling maxima
    let mut away_from_zero = random(&[2, 6, 6, 3], &mut rng, 0.1, 1.0);
    for (i, v) in away_from_zero.data_mut().iter_mut().enumerate() {
        if i % 2 == 0 {
            *v = -*v;
        }
    }
    let mut distinct = Tensor::from_vec(&[2, 6, 6, 3], (0..216).map(|i| i as f64 * 0.01).collect()).unwrap();
    rng.shuffle(distinct.data_mut());

    let layers: Vec<(Layer, Tensor)> = vec![
        (Layer::Conv2d(conv_layer(3, 4, &mut rng)), random(&[2, 6, 6, 3], &mut rng, -1.0, 1.0)),
        (Layer::Relu(Relu::default()), away_from_zero),
        (Layer::Sigmoid(Sigmoid::default()), random(&[2, 6, 6, 3], &mut rng, -4.0, 4.0)),
        (Layer::MaxPool2x2(MaxPool2x2::default()), distinct),
        (Layer::UpsampleNearest2x2(Upsample2x2), random(&[2, 3, 3, 3], &mut rng, -1.0, 1.0)),
    ];
    for (layer, x) in layers {
        let name = layer.name();
        let err = input_check(layer, x, &mut rng);
        assert!(err < 1e-6, "{name}: {err}");
    }
}

#[test]
fn conv_parameter_gradients_of_linear_model_are_exact() {
    let mut rng = Rng64::new(6, Stream::Synth);
    let mut model = Sequential::new(vec![Layer::Conv2d(conv_layer(2, 3, &mut rng))]);
    let x = random(&[2, 5, 5, 2], &mut rng, -1.0, 1.0);
    let y = random(&[2, 5, 5, 3], &mut rng, -1.0, 1.0);
    let r = gradcheck_model(&mut model, &x, &y, LossKind::Mse, &GradcheckOptions::default()).unwrap();
    assert_eq!(r.checked, r.total_params);
    assert!(r.max_relative_error < 1e-9, "{}", r.max_relative_error);
}

#[test]
fn conv_backward_matches_finite_differences_of_weights_and_bias() {
    let mut rng = Rng64::new(7, Stream::Synth);
    let x = random(&[1, 4, 5, 2], &mut rng, -1.0, 1.0);
    let w = random(&[3, 2, 3, 3], &mut rng, -1.0, 1.0);
    let b = random(&[3], &mut rng, -1.0, 1.0);
    let g = random(&[1, 4, 5, 3], &mut rng, -1.0, 1.0);
    let grads = conv2d_backward(&x, &w, &g).unwrap();
    let f = |w: &Tensor, b: &Tensor| -> f64 {
        let y = naive_conv(&x, w, b);
        y.data().iter().zip(g.data()).map(|(a, c)| a * c).sum()
    };
    for i in 0..w.len() {
        let (mut wp, mut wm) = (w.clone(), w.clone());
        wp.data_mut()[i] += 1e-6;
        wm.data_mut()[i] -= 1e-6;
        let num = (f(&wp, &b) - f(&wm, &b)) / 2e-6;
        assert!((num - grads.grad_w.data()[i]).abs() < 1e-7);
    }
    let bias_num: Vec<f64> = (0..3).map(|co| (0..20).map(|p| g.data()[p * 3 + co]).sum()).collect();
    for (a, e) in grads.grad_b.data().iter().zip(&bias_num) {
        assert!((a - e).abs() < 1e-12);
    }
}

fn cdae_case(kind: LossKind) -> f64 {
    let shape = ImageShape { h: 16, w: 16, c: 1 };
    let mut model = cdae::build(shape, 3).unwrap();
    let mut rng = Rng64::new(8, Stream::Synth);
    let x = random(&[1, 16, 16, 1], &mut rng, 0.0, 1.0);
    let y = random(&[1, 16, 16, 1], &mut rng, 0.0, 1.0);
    let r = gradcheck_model(&mut model.net, &x, &y, kind, &GradcheckOptions::default()).unwrap();
    assert_eq!(r.checked + r.skipped, 1024);
    assert!(r.skipped < 50, "{} coordinates crossed a kink", r.skipped);
    r.max_relative_error
}

#[test]
fn full_model_gradcheck_mse() {
    let e = cdae_case(LossKind::Mse);
    assert!(e < 1e-5, "{e}");
}

#[test]
fn full_model_gradcheck_bce() {
    let e = cdae_case(LossKind::Bce);
    assert!(e < 1e-5, "{e}");
}

/// Reports a gradient with one coordinate deliberately off.
struct Corrupted<O>(O, usize);

impl<O: Objective> Objective for Corrupted<O> {
    fn param_count(&self) -> usize {
        self.0.param_count()
    }
    fn param(&self, i: usize) -> f64 {
        self.0.param(i)
    }
    fn set_param(&mut self, i: usize, v: f64) {
        self.0.set_param(i, v)
    }
    fn value(&mut self) -> Result<f64, NnError> {
        self.0.value()
    }
    fn gradient(&mut self) -> Result<Vec<f64>, NnError> {
        let mut g = self.0.gradient()?;
        g[self.1] = g[self.1] * 1.5 + 1e-3;
        Ok(g)
    }
}

#[test]
fn gradcheck_flags_a_wrong_gradient() {
    let mut rng = Rng64::new(9, Stream::Synth);
    let mut model = Sequential::new(vec![
        Layer::Conv2d(conv_layer(1, 2, &mut rng)),
        Layer::Sigmoid(Sigmoid::default()),
    ]);
    let x = random(&[1, 4, 4, 1], &mut rng, 0.0, 1.0);
    let y = random(&[1, 4, 4, 2], &mut rng, 0.0, 1.0);
    let inner = specdenoise::nn::SupervisedObjective::new(&mut model, x, y, LossKind::Mse);
    let mut obj = Corrupted(inner, 4);
    let r = gradcheck(&mut obj, &GradcheckOptions::default()).unwrap();
    assert!(r.max_relative_error > 1e-2, "{}", r.max_relative_error);
    assert_eq!(r.worst_index, 4);
}

#[test]
fn loss_gradients_match_mean_reduction() {
    let mut rng = Rng64::new(10, Stream::Synth);
    let p = random(&[1, 3, 3, 1], &mut rng, 0.05, 0.95);
    let t = random(&[1, 3, 3, 1], &mut rng, 0.0, 1.0);
    for kind in [LossKind::Mse, LossKind::Bce] {
        let out = loss(kind, &p, &t).unwrap();
        for i in 0..p.len() {
            let (mut pp, mut pm) = (p.clone(), p.clone());
            pp.data_mut()[i] += 1e-6;
            pm.data_mut()[i] -= 1e-6;
            let num = (loss(kind, &pp, &t).unwrap().value - loss(kind, &pm, &t).unwrap().value) / 2e-6;
            assert!((num - out.grad.data()[i]).abs() < 1e-7, "{kind:?}");
        }
    }
}

#[test]
fn checkpoint_round_trip_preserves_outputs() {
    let model = cdae::build(ImageShape { h: 8, w: 8, c: 3 }, 12).unwrap();
    let mut bytes = Vec::new();
    checkpoint::write(&model.net, &mut bytes).unwrap();
    let back = checkpoint::read(bytes.as_slice()).unwrap();
    assert_eq!(back, model.net);
    let mut rng = Rng64::new(1, Stream::Synth);
    let x = random(&[1, 8, 8, 3], &mut rng, 0.0, 1.0);
    assert_eq!(back.infer(&x).unwrap(), model.net.infer(&x).unwrap());

    assert!(checkpoint::read(&bytes[..bytes.len() - 1]).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(checkpoint::read(bad.as_slice()).is_err());
    bytes.push(0);
    assert!(checkpoint::read(bytes.as_slice()).is_err());
}

#[test]
fn training_is_deterministic() {
    let shape = ImageShape { h: 8, w: 8, c: 1 };
    let mut rng = Rng64::new(13, Stream::Synth);
    let pairs: Vec<cdae::ImagePair> = (0..5)
        .map(|_| {
            let clean = random(&[8, 8, 1], &mut rng, 0.0, 1.0);
            cdae::ImagePair { noisy: clean.map(|v| (v * 0.8 + 0.1).clamp(0.0, 1.0)), clean }
        })
        .collect();
    let cfg = cdae::TrainConfig { epochs: 3, batch_size: 2, seed: 4, ..Default::default() };
    let run = || {
        let mut m = cdae::build(shape, 4).unwrap();
        let t = cdae::train(&mut m, &pairs, &cfg).unwrap();
        (t, m.net)
    };
    let (t1, n1) = run();
    let (t2, n2) = run();
    assert!(t1.iter().zip(&t2).all(|(a, b)| a.same_losses(b)));
    assert_eq!(n1.params(), n2.params());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pooling_undoes_upsampling(n in 1usize..3, h in 1usize..6, w in 1usize..6, c in 1usize..4, seed in any::<u64>()) {
        let mut rng = Rng64::new(seed, Stream::Synth);
        let x = random(&[n, h, w, c], &mut rng, -1.0, 1.0);
        let (pooled, _) = maxpool2x2_forward(&upsample2x2_forward(&x).unwrap()).unwrap();
        prop_assert_eq!(pooled, x);
    }

    #[test]
    fn conv_is_linear_in_input(seed in any::<u64>(), s in -2.0f64..2.0) {
        let mut rng = Rng64::new(seed, Stream::Synth);
        let x = random(&[1, 4, 4, 2], &mut rng, -1.0, 1.0);
        let w = random(&[2, 2, 3, 3], &mut rng, -1.0, 1.0);
        let zero = Tensor::zeros(&[2]);
        let y = conv2d_forward(&x.map(|v| v * s), &w, &zero).unwrap();
        let y0 = conv2d_forward(&x, &w, &zero).unwrap();
        for (a, b) in y.data().iter().zip(y0.data()) {
            prop_assert!((a - s * b).abs() < 1e-12);
        }
    }
}
