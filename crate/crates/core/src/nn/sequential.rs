use super::{maxpool2x2_forward, Adam, Layer, NnError, Tensor};
use crate::rng::splitmix64;

/// Ordered stack of layers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sequential {
    layers: Vec<Layer>,
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    fn check_finite(t: &Tensor, idx: usize, layer: &Layer) -> Result<(), NnError> {
        if t.all_finite() {
            Ok(())
        } else {
            Err(NnError::NonFinite {
                layer: format!("{}#{idx}", layer.name()),
            })
        }
    }

    /// Training forward pass; caches what backward needs.
    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor, NnError> {
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            cur = layer.forward(&cur)?;
            Self::check_finite(&cur, i, layer)?;
        }
        Ok(cur)
    }

    /// Forward pass without touching caches.
    pub fn infer(&self, x: &Tensor) -> Result<Tensor, NnError> {
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            cur = layer.infer(&cur)?;
            Self::check_finite(&cur, i, layer)?;
        }
        Ok(cur)
    }

    /// Inference plus a hash of the piecewise-linear region the input falls
    /// in: the sign pattern at every ReLU and the winner of every pooling
    /// window. Two evaluations with equal fingerprints are related by a
    /// smooth map, so a finite difference between them is meaningful.
    pub fn infer_with_region(&self, x: &Tensor) -> Result<(Tensor, u64), NnError> {
        let mut h = 0u64;
        let mut mix = |bits: u64| h = splitmix64(h ^ bits);
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Relu(_) => {
                    for chunk in cur.data().chunks(64) {
                        mix(chunk.iter().enumerate().fold(0u64, |acc, (k, &v)| acc | (u64::from(v > 0.0) << k)));
                    }
                }
                Layer::MaxPool2x2(_) => {
                    let (_, arg) = maxpool2x2_forward(&cur)?;
                    for chunk in arg.chunks(32) {
                        mix(chunk.iter().enumerate().fold(0u64, |acc, (k, &v)| acc | (u64::from(v) << (2 * k))));
                    }
                }
                _ => {}
            }
            cur = layer.infer(&cur)?;
            Self::check_finite(&cur, i, layer)?;
        }
        Ok((cur, h))
    }

    /// Backpropagate `grad_out`; parameter gradients are stored in the layers
    /// (overwritten, not accumulated). Returns the gradient w.r.t. the input.
    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let mut g = grad_out.clone();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        Ok(g)
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    pub fn grads(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.grads()).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn adam_step(&mut self, opt: &mut Adam) -> Result<(), NnError> {
        let pairs: Vec<(&mut Tensor, &Tensor)> =
            self.layers.iter_mut().flat_map(|l| l.params_and_grads()).collect();
        opt.step(pairs)
    }
}
