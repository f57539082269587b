use super::{NnError, Tensor};
use crate::rng::Rng64;

/// Gradients of a convolution with respect to its input and parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvGrads {
    pub grad_x: Tensor,
    pub grad_w: Tensor,
    pub grad_b: Tensor,
}

fn conv_dims(
    x: &Tensor,
    weight: &Tensor,
) -> Result<((usize, usize, usize, usize), (usize, usize, usize)), NnError> {
    let (n, h, w, cin) = x.dims4()?;
    let (cout, wcin, kh, kw) = match weight.shape()[..] {
        [a, b, c, d] => (a, b, c, d),
        _ => {
            return Err(NnError::ShapeMismatch(format!(
                "conv weight must be (out, in, kh, kw), got {:?}",
                weight.shape()
            )))
        }
    };
    if wcin != cin {
        return Err(NnError::ShapeMismatch(format!(
            "conv expects {wcin} input channels, got {cin}"
        )));
    }
    if kh % 2 == 0 || kw % 2 == 0 {
        return Err(NnError::ShapeMismatch(format!(
            "same padding needs odd kernels, got {kh}x{kw}"
        )));
    }
    let _ = cout;
    Ok(((n, h, w, cin), (cout, kh, kw)))
}

/// Reorder an `(out, in, kh, kw)` weight into `[kh][kw][in][out]`.
fn taps_in_out(weight: &Tensor) -> Vec<f64> {
    let s = weight.shape();
    let (cout, cin, kh, kw) = (s[0], s[1], s[2], s[3]);
    let wd = weight.data();
    let mut t = vec![0.0; wd.len()];
    for co in 0..cout {
        for ci in 0..cin {
            for ky in 0..kh {
                for kx in 0..kw {
                    t[((ky * kw + kx) * cin + ci) * cout + co] = wd[((co * cin + ci) * kh + ky) * kw + kx];
                }
            }
        }
    }
    t
}

/// Reorder an `(out, in, kh, kw)` weight into `[kh][kw][out][in]`.
fn taps_out_in(weight: &Tensor) -> Vec<f64> {
    let s = weight.shape();
    let (cout, cin, kh, kw) = (s[0], s[1], s[2], s[3]);
    let wd = weight.data();
    let mut t = vec![0.0; wd.len()];
    for co in 0..cout {
        for ci in 0..cin {
            for ky in 0..kh {
                for kx in 0..kw {
                    t[((ky * kw + kx) * cout + co) * cin + ci] = wd[((co * cin + ci) * kh + ky) * kw + kx];
                }
            }
        }
    }
    t
}

#[inline]
fn axpy(out: &mut [f64], alpha: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += alpha * v;
    }
}

/// Stride-1 cross-correlation with zero "same" padding, plus bias.
/// `x` is NHWC, `weight` is `(out, in, kh, kw)`, `bias` has `out` entries.
pub fn conv2d_forward(x: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Tensor, NnError> {
    let ((n, h, w, cin), (cout, kh, kw)) = conv_dims(x, weight)?;
    if bias.len() != cout {
        return Err(NnError::ShapeMismatch(format!(
            "bias has {} entries for {cout} filters",
            bias.len()
        )));
    }
    let taps = taps_in_out(weight);
    let (ph, pw) = (kh / 2, kw / 2);
    let xd = x.data();
    let mut out = vec![0.0; n * h * w * cout];
    for b in 0..n {
        for y in 0..h {
            for xx in 0..w {
                let o = &mut out[((b * h + y) * w + xx) * cout..][..cout];
                o.copy_from_slice(bias.data());
                for ky in 0..kh {
                    let Some(iy) = (y + ky).checked_sub(ph).filter(|&v| v < h) else {
                        continue;
                    };
                    for kx in 0..kw {
                        let Some(ix) = (xx + kx).checked_sub(pw).filter(|&v| v < w) else {
                            continue;
                        };
                        let xin = &xd[((b * h + iy) * w + ix) * cin..][..cin];
                        let wrow = &taps[(ky * kw + kx) * cin * cout..][..cin * cout];
                        for (ci, &v) in xin.iter().enumerate() {
                            if v != 0.0 {
                                axpy(o, v, &wrow[ci * cout..(ci + 1) * cout]);
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::from_vec(&[n, h, w, cout], out)
}

/// Exact gradients of [`conv2d_forward`] given the upstream gradient.
pub fn conv2d_backward(x: &Tensor, weight: &Tensor, grad_out: &Tensor) -> Result<ConvGrads, NnError> {
    let ((n, h, w, cin), (cout, kh, kw)) = conv_dims(x, weight)?;
    if grad_out.shape() != [n, h, w, cout] {
        return Err(NnError::ShapeMismatch(format!(
            "conv grad_out {:?} does not match output [{n}, {h}, {w}, {cout}]",
            grad_out.shape()
        )));
    }
    let (ph, pw) = (kh / 2, kw / 2);
    let xd = x.data();
    let gd = grad_out.data();

    let mut grad_b = vec![0.0; cout];
    for g in gd.chunks_exact(cout) {
        for (acc, v) in grad_b.iter_mut().zip(g) {
            *acc += v;
        }
    }

    // grad_w in [kh][kw][in][out] layout, permuted at the end
    let mut gw = vec![0.0; kh * kw * cin * cout];
    for b in 0..n {
        for y in 0..h {
            for xx in 0..w {
                let g = &gd[((b * h + y) * w + xx) * cout..][..cout];
                for ky in 0..kh {
                    let Some(iy) = (y + ky).checked_sub(ph).filter(|&v| v < h) else {
                        continue;
                    };
                    for kx in 0..kw {
                        let Some(ix) = (xx + kx).checked_sub(pw).filter(|&v| v < w) else {
                            continue;
                        };
                        let xin = &xd[((b * h + iy) * w + ix) * cin..][..cin];
                        let gw_tap = &mut gw[(ky * kw + kx) * cin * cout..][..cin * cout];
                        for (ci, &v) in xin.iter().enumerate() {
                            if v != 0.0 {
                                axpy(&mut gw_tap[ci * cout..(ci + 1) * cout], v, g);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut grad_w = vec![0.0; gw.len()];
    for ky in 0..kh {
        for kx in 0..kw {
            for ci in 0..cin {
                for co in 0..cout {
                    grad_w[((co * cin + ci) * kh + ky) * kw + kx] = gw[((ky * kw + kx) * cin + ci) * cout + co];
                }
            }
        }
    }

    // grad_x gathered per input pixel from every output it touched
    let taps = taps_out_in(weight);
    let mut grad_x = vec![0.0; xd.len()];
    for b in 0..n {
        for iy in 0..h {
            for ix in 0..w {
                let gx = &mut grad_x[((b * h + iy) * w + ix) * cin..][..cin];
                for ky in 0..kh {
                    let Some(y) = (iy + ph).checked_sub(ky).filter(|&v| v < h) else {
                        continue;
                    };
                    for kx in 0..kw {
                        let Some(xx) = (ix + pw).checked_sub(kx).filter(|&v| v < w) else {
                            continue;
                        };
                        let g = &gd[((b * h + y) * w + xx) * cout..][..cout];
                        let wtap = &taps[(ky * kw + kx) * cout * cin..][..cout * cin];
                        for (co, &gv) in g.iter().enumerate() {
                            if gv != 0.0 {
                                axpy(gx, gv, &wtap[co * cin..(co + 1) * cin]);
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(ConvGrads {
        grad_x: Tensor::from_vec(x.shape(), grad_x)?,
        grad_w: Tensor::from_vec(weight.shape(), grad_w)?,
        grad_b: Tensor::from_vec(&[cout], grad_b)?,
    })
}

/// 2x2 max-pool with stride 2. Returns the pooled tensor and, per output
/// element, the winning position within its window (row-major 0..4).
/// Ties go to the first position.
pub fn maxpool2x2_forward(x: &Tensor) -> Result<(Tensor, Vec<u8>), NnError> {
    let (n, h, w, c) = x.dims4()?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(NnError::OddSpatialDim { h, w });
    }
    let (oh, ow) = (h / 2, w / 2);
    let xd = x.data();
    let mut out = vec![0.0; n * oh * ow * c];
    let mut arg = vec![0u8; out.len()];
    for b in 0..n {
        for oy in 0..oh {
            for ox in 0..ow {
                let o = ((b * oh + oy) * ow + ox) * c;
                for ch in 0..c {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_k = 0u8;
                    for k in 0..4u8 {
                        let (dy, dx) = ((k / 2) as usize, (k % 2) as usize);
                        let v = xd[((b * h + 2 * oy + dy) * w + 2 * ox + dx) * c + ch];
                        if k == 0 || v > best {
                            best = v;
                            best_k = k;
                        }
                    }
                    out[o + ch] = best;
                    arg[o + ch] = best_k;
                }
            }
        }
    }
    Ok((Tensor::from_vec(&[n, oh, ow, c], out)?, arg))
}

pub fn maxpool2x2_backward(input_shape: &[usize], argmax: &[u8], grad_out: &Tensor) -> Result<Tensor, NnError> {
    let (n, h, w, c) = match *input_shape {
        [n, h, w, c] => (n, h, w, c),
        _ => return Err(NnError::ShapeMismatch("max-pool input must be rank 4".into())),
    };
    let (oh, ow) = (h / 2, w / 2);
    if grad_out.shape() != [n, oh, ow, c] || argmax.len() != grad_out.len() {
        return Err(NnError::ShapeMismatch(format!(
            "max-pool grad_out {:?} does not match [{n}, {oh}, {ow}, {c}]",
            grad_out.shape()
        )));
    }
    let gd = grad_out.data();
    let mut gx = vec![0.0; n * h * w * c];
    for b in 0..n {
        for oy in 0..oh {
            for ox in 0..ow {
                let o = ((b * oh + oy) * ow + ox) * c;
                for ch in 0..c {
                    let k = argmax[o + ch] as usize;
                    let (dy, dx) = (k / 2, k % 2);
                    gx[((b * h + 2 * oy + dy) * w + 2 * ox + dx) * c + ch] = gd[o + ch];
                }
            }
        }
    }
    Tensor::from_vec(input_shape, gx)
}

/// Nearest-neighbour 2x upsampling: each pixel becomes a 2x2 block.
pub fn upsample2x2_forward(x: &Tensor) -> Result<Tensor, NnError> {
    let (n, h, w, c) = x.dims4()?;
    let xd = x.data();
    let (oh, ow) = (2 * h, 2 * w);
    let mut out = vec![0.0; n * oh * ow * c];
    for b in 0..n {
        for y in 0..oh {
            for xx in 0..ow {
                let src = &xd[((b * h + y / 2) * w + xx / 2) * c..][..c];
                out[((b * oh + y) * ow + xx) * c..][..c].copy_from_slice(src);
            }
        }
    }
    Tensor::from_vec(&[n, oh, ow, c], out)
}

pub fn upsample2x2_backward(grad_out: &Tensor) -> Result<Tensor, NnError> {
    let (n, oh, ow, c) = grad_out.dims4()?;
    if oh % 2 != 0 || ow % 2 != 0 {
        return Err(NnError::OddSpatialDim { h: oh, w: ow });
    }
    let (h, w) = (oh / 2, ow / 2);
    let gd = grad_out.data();
    let mut gx = vec![0.0; n * h * w * c];
    for b in 0..n {
        for y in 0..oh {
            for xx in 0..ow {
                let dst = &mut gx[((b * h + y / 2) * w + xx / 2) * c..][..c];
                for (d, g) in dst.iter_mut().zip(&gd[((b * oh + y) * ow + xx) * c..][..c]) {
                    *d += g;
                }
            }
        }
    }
    Tensor::from_vec(&[n, h, w, c], gx)
}

#[inline]
pub fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Logistic function, evaluated on the branch that never overflows.
#[inline]
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// 3x3 (or any odd size) same-padded convolution layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv2d {
    pub weight: Tensor,
    pub bias: Tensor,
    pub grad_weight: Tensor,
    pub grad_bias: Tensor,
    cached_input: Option<Tensor>,
}

impl Conv2d {
    /// Zero-initialized layer with `(out, in, k, k)` weights.
    pub fn new(in_ch: usize, out_ch: usize, kernel: usize) -> Self {
        let wshape = [out_ch, in_ch, kernel, kernel];
        Self {
            weight: Tensor::zeros(&wshape),
            bias: Tensor::zeros(&[out_ch]),
            grad_weight: Tensor::zeros(&wshape),
            grad_bias: Tensor::zeros(&[out_ch]),
            cached_input: None,
        }
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn out_channels(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn fan_in(&self) -> usize {
        let s = self.weight.shape();
        s[1] * s[2] * s[3]
    }

    pub fn fan_out(&self) -> usize {
        let s = self.weight.shape();
        s[0] * s[2] * s[3]
    }

    /// Weights uniform in `[-limit, limit]`, bias zero.
    pub fn init_uniform(&mut self, limit: f64, rng: &mut Rng64) {
        for v in self.weight.data_mut() {
            *v = rng.uniform_in(-limit, limit);
        }
        self.bias.data_mut().iter_mut().for_each(|b| *b = 0.0);
    }

    pub fn infer(&self, x: &Tensor) -> Result<Tensor, NnError> {
        conv2d_forward(x, &self.weight, &self.bias)
    }

    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor, NnError> {
        let y = self.infer(x)?;
        self.cached_input = Some(x.clone());
        Ok(y)
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let x = self.cached_input.as_ref().ok_or(NnError::NoCachedForward("conv2d"))?;
        let g = conv2d_backward(x, &self.weight, grad_out)?;
        self.grad_weight = g.grad_w;
        self.grad_bias = g.grad_b;
        Ok(g.grad_x)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Relu {
    cached_input: Option<Tensor>,
}

impl Relu {
    pub fn infer(&self, x: &Tensor) -> Tensor {
        x.map(relu)
    }

    pub fn forward(&mut self, x: &Tensor) -> Tensor {
        self.cached_input = Some(x.clone());
        self.infer(x)
    }

    /// The derivative at exactly zero is taken as 0.
    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let x = self.cached_input.as_ref().ok_or(NnError::NoCachedForward("relu"))?;
        if x.shape() != grad_out.shape() {
            return Err(NnError::ShapeMismatch("relu grad_out shape".into()));
        }
        let data = x
            .data()
            .iter()
            .zip(grad_out.data())
            .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
            .collect();
        Tensor::from_vec(x.shape(), data)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sigmoid {
    cached_output: Option<Tensor>,
}

impl Sigmoid {
    pub fn infer(&self, x: &Tensor) -> Tensor {
        x.map(sigmoid)
    }

    pub fn forward(&mut self, x: &Tensor) -> Tensor {
        let y = self.infer(x);
        self.cached_output = Some(y.clone());
        y
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let y = self.cached_output.as_ref().ok_or(NnError::NoCachedForward("sigmoid"))?;
        if y.shape() != grad_out.shape() {
            return Err(NnError::ShapeMismatch("sigmoid grad_out shape".into()));
        }
        let data = y
            .data()
            .iter()
            .zip(grad_out.data())
            .map(|(&s, &g)| g * s * (1.0 - s))
            .collect();
        Tensor::from_vec(y.shape(), data)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MaxPool2x2 {
    cache: Option<(Vec<usize>, Vec<u8>)>,
}

impl MaxPool2x2 {
    pub fn infer(&self, x: &Tensor) -> Result<Tensor, NnError> {
        maxpool2x2_forward(x).map(|(y, _)| y)
    }

    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor, NnError> {
        let (y, arg) = maxpool2x2_forward(x)?;
        self.cache = Some((x.shape().to_vec(), arg));
        Ok(y)
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let (shape, arg) = self.cache.as_ref().ok_or(NnError::NoCachedForward("maxpool2x2"))?;
        maxpool2x2_backward(shape, arg, grad_out)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Upsample2x2;

impl Upsample2x2 {
    pub fn infer(&self, x: &Tensor) -> Result<Tensor, NnError> {
        upsample2x2_forward(x)
    }

    pub fn backward(&self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        upsample2x2_backward(grad_out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Conv2d(Conv2d),
    Relu(Relu),
    MaxPool2x2(MaxPool2x2),
    UpsampleNearest2x2(Upsample2x2),
    Sigmoid(Sigmoid),
}

impl Layer {
    pub fn name(&self) -> &'static str {
        match self {
            Layer::Conv2d(_) => "conv2d",
            Layer::Relu(_) => "relu",
            Layer::MaxPool2x2(_) => "maxpool2x2",
            Layer::UpsampleNearest2x2(_) => "upsample2x2",
            Layer::Sigmoid(_) => "sigmoid",
        }
    }

    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor, NnError> {
        match self {
            Layer::Conv2d(l) => l.forward(x),
            Layer::Relu(l) => Ok(l.forward(x)),
            Layer::MaxPool2x2(l) => l.forward(x),
            Layer::UpsampleNearest2x2(l) => l.infer(x),
            Layer::Sigmoid(l) => Ok(l.forward(x)),
        }
    }

    pub fn infer(&self, x: &Tensor) -> Result<Tensor, NnError> {
        match self {
            Layer::Conv2d(l) => l.infer(x),
            Layer::Relu(l) => Ok(l.infer(x)),
            Layer::MaxPool2x2(l) => l.infer(x),
            Layer::UpsampleNearest2x2(l) => l.infer(x),
            Layer::Sigmoid(l) => Ok(l.infer(x)),
        }
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        match self {
            Layer::Conv2d(l) => l.backward(grad_out),
            Layer::Relu(l) => l.backward(grad_out),
            Layer::MaxPool2x2(l) => l.backward(grad_out),
            Layer::UpsampleNearest2x2(l) => l.backward(grad_out),
            Layer::Sigmoid(l) => l.backward(grad_out),
        }
    }

    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            Layer::Conv2d(l) => vec![&l.weight, &l.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Conv2d(l) => vec![&mut l.weight, &mut l.bias],
            _ => Vec::new(),
        }
    }

    pub fn grads(&self) -> Vec<&Tensor> {
        match self {
            Layer::Conv2d(l) => vec![&l.grad_weight, &l.grad_bias],
            _ => Vec::new(),
        }
    }

    pub fn params_and_grads(&mut self) -> Vec<(&mut Tensor, &Tensor)> {
        match self {
            Layer::Conv2d(l) => vec![(&mut l.weight, &l.grad_weight), (&mut l.bias, &l.grad_bias)],
            _ => Vec::new(),
        }
    }
}
