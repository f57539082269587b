use super::{loss, loss_extended, LossKind, NnError, Sequential, Tensor};
use crate::rng::{Rng64, Stream};

/// A scalar function of a flat parameter vector with an analytic gradient.
pub trait Objective {
    fn param_count(&self) -> usize;
    fn param(&self, i: usize) -> f64;
    fn set_param(&mut self, i: usize, value: f64);
    fn value(&mut self) -> Result<f64, NnError>;
    fn gradient(&mut self) -> Result<Vec<f64>, NnError>;

    /// Value for finite differencing. Implementations may supply extra
    /// precision and a fingerprint of the smooth piece the current
    /// parameters lie in; coordinates whose `±h` evaluations land in another
    /// piece than the base point are excluded from the check.
    fn evaluate(&mut self) -> Result<Evaluation, NnError> {
        Ok(Evaluation {
            hi: self.value()?,
            lo: 0.0,
            region: None,
        })
    }
}

/// Objective value as the unevaluated sum `hi + lo`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub hi: f64,
    pub lo: f64,
    pub region: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradcheckOptions {
    /// Models with more parameters than this are checked on a seeded subsample.
    pub full_check_limit: usize,
    /// Subsample size used above `full_check_limit`.
    pub subsample: usize,
    pub seed: u64,
    /// Step is `rel_step * max(1, |theta|)`.
    pub rel_step: f64,
    /// Added to the relative-error denominator so exact zeros compare cleanly.
    pub abs_floor: f64,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self {
            full_check_limit: 10_000,
            subsample: 1024,
            seed: 0,
            rel_step: 1e-6,
            abs_floor: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradcheckReport {
    pub max_relative_error: f64,
    pub worst_index: usize,
    pub checked: usize,
    /// Coordinates excluded because a perturbation crossed a kink.
    pub skipped: usize,
    pub total_params: usize,
}

/// Compare the analytic gradient against central differences.
///
/// Relative error per coordinate is `|a - n| / (max(|a|, |n|) + abs_floor)`.
pub fn gradcheck<O: Objective>(obj: &mut O, opts: &GradcheckOptions) -> Result<GradcheckReport, NnError> {
    let total = obj.param_count();
    let analytic = obj.gradient()?;
    if analytic.len() != total {
        return Err(NnError::ShapeMismatch(format!(
            "gradient has {} entries for {total} parameters",
            analytic.len()
        )));
    }
    let indices: Vec<usize> = if total <= opts.full_check_limit {
        (0..total).collect()
    } else {
        let mut rng = Rng64::new(opts.seed, Stream::Subsample);
        let mut all: Vec<usize> = (0..total).collect();
        // partial Fisher-Yates: first `subsample` entries are a uniform draw
        let k = opts.subsample.min(total);
        for i in 0..k {
            let j = i + rng.below(total - i);
            all.swap(i, j);
        }
        all.truncate(k);
        all.sort_unstable();
        all
    };

    let base_region = obj.evaluate()?.region;
    let mut worst = (0.0f64, 0usize);
    let mut skipped = 0;
    for &i in &indices {
        let theta = obj.param(i);
        let h = opts.rel_step * theta.abs().max(1.0);
        obj.set_param(i, theta + h);
        let fp = obj.evaluate()?;
        obj.set_param(i, theta - h);
        let fm = obj.evaluate()?;
        obj.set_param(i, theta);
        if fp.region != base_region || fm.region != base_region {
            skipped += 1;
            continue;
        }
        let numeric = ((fp.hi - fm.hi) + (fp.lo - fm.lo)) / (2.0 * h);
        let a = analytic[i];
        let rel = (a - numeric).abs() / (a.abs().max(numeric.abs()) + opts.abs_floor);
        if rel > worst.0 || worst.0.is_nan() {
            worst = (rel, i);
        }
    }
    Ok(GradcheckReport {
        max_relative_error: worst.0,
        worst_index: worst.1,
        checked: indices.len() - skipped,
        skipped,
        total_params: total,
    })
}

/// Loss of a [`Sequential`] on a fixed `(input, target)` pair, as a function
/// of the model parameters.
pub struct SupervisedObjective<'a> {
    pub model: &'a mut Sequential,
    pub input: Tensor,
    pub target: Tensor,
    pub loss: LossKind,
    offsets: Vec<usize>,
}

impl<'a> SupervisedObjective<'a> {
    pub fn new(model: &'a mut Sequential, input: Tensor, target: Tensor, loss: LossKind) -> Self {
        let mut offsets = vec![0];
        for p in model.params() {
            offsets.push(offsets.last().unwrap() + p.len());
        }
        Self {
            model,
            input,
            target,
            loss,
            offsets,
        }
    }

    fn locate(&self, i: usize) -> (usize, usize) {
        let t = self.offsets.partition_point(|&o| o <= i) - 1;
        (t, i - self.offsets[t])
    }
}

impl Objective for SupervisedObjective<'_> {
    fn param_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn param(&self, i: usize) -> f64 {
        let (t, j) = self.locate(i);
        self.model.params()[t].data()[j]
    }

    fn set_param(&mut self, i: usize, value: f64) {
        let (t, j) = self.locate(i);
        self.model.params_mut()[t].data_mut()[j] = value;
    }

    fn value(&mut self) -> Result<f64, NnError> {
        let pred = self.model.infer(&self.input)?;
        Ok(loss(self.loss, &pred, &self.target)?.value)
    }

    fn evaluate(&mut self) -> Result<Evaluation, NnError> {
        let (pred, region) = self.model.infer_with_region(&self.input)?;
        let (hi, lo) = loss_extended(self.loss, &pred, &self.target)?;
        Ok(Evaluation {
            hi,
            lo,
            region: Some(region),
        })
    }

    fn gradient(&mut self) -> Result<Vec<f64>, NnError> {
        let pred = self.model.forward(&self.input)?;
        let out = loss(self.loss, &pred, &self.target)?;
        self.model.backward(&out.grad)?;
        Ok(self.model.grads().iter().flat_map(|g| g.data().iter().copied()).collect())
    }
}

pub fn gradcheck_model(
    model: &mut Sequential,
    input: &Tensor,
    target: &Tensor,
    loss: LossKind,
    opts: &GradcheckOptions,
) -> Result<GradcheckReport, NnError> {
    let mut obj = SupervisedObjective::new(model, input.clone(), target.clone(), loss);
    gradcheck(&mut obj, opts)
}
