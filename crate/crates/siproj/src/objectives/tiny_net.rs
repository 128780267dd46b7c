//! A two-layer network with per-unit batch normalization.
//!
//! Hidden pre-activations are normalized across the batch per unit before
//! the tanh, so each first-layer weight vector only matters up to scale:
//! those blocks are declared scale-invariant. The final linear layer feeds
//! softmax cross-entropy directly and is scale-variant. Data is a fixed
//! synthetic two-blob classification set, so evaluation is a pure function
//! of the parameters.

use crate::error::{Error, Result};
use crate::objectives::{normalize, Objective};
use crate::rng::Rng;
use crate::vecmath::{ParamBlock, Vector};

const INPUT_DIM: usize = 2;
const CLASSES: usize = 2;
const SAMPLES: usize = 64;
const BLOB_SPREAD: f64 = 0.8;
const BLOB_CENTERS: [[f64; 2]; 2] = [[-1.5, -1.0], [1.5, 1.0]];

/// Two-layer tanh network over a fixed synthetic batch.
///
/// Blocks 0..hidden are the per-unit input weights (dimension 2 each);
/// block `hidden` is the flattened class-by-unit output matrix.
#[derive(Debug, Clone)]
pub struct TinyNormNet {
    inputs: Vec<[f64; INPUT_DIM]>,
    labels: Vec<usize>,
    hidden: usize,
}

impl TinyNormNet {
    /// Builds the network description with a freshly sampled two-blob batch
    /// of 64 points (32 per class, interleaved).
    pub fn synthetic(seed: u64, hidden: usize) -> Result<Self> {
        if hidden < 2 {
            return Err(Error::DomainError(format!(
                "hidden width must be at least 2, got {hidden}"
            )));
        }
        let mut rng = Rng::with_seed(seed);
        let mut inputs = Vec::with_capacity(SAMPLES);
        let mut labels = Vec::with_capacity(SAMPLES);
        for i in 0..SAMPLES {
            let class = i % CLASSES;
            let c = BLOB_CENTERS[class];
            inputs.push([
                c[0] + BLOB_SPREAD * rng.standard_normal(),
                c[1] + BLOB_SPREAD * rng.standard_normal(),
            ]);
            labels.push(class);
        }
        Ok(Self {
            inputs,
            labels,
            hidden,
        })
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden
    }

    pub fn batch_size(&self) -> usize {
        self.inputs.len()
    }

    /// Number of first-layer (scale-invariant) blocks.
    pub fn invariant_blocks(&self) -> usize {
        self.hidden
    }

    /// Random initial parameters for this architecture.
    pub fn init_params(&self, rng: &mut Rng) -> Result<Vec<ParamBlock>> {
        let mut params = Vec::with_capacity(self.hidden + 1);
        let in_scale = 1.0 / (INPUT_DIM as f64).sqrt();
        for _ in 0..self.hidden {
            let w: Vec<f64> = (0..INPUT_DIM)
                .map(|_| in_scale * rng.standard_normal())
                .collect();
            params.push(ParamBlock::whole(Vector::new(w)?));
        }
        let out_scale = 1.0 / (self.hidden as f64).sqrt();
        let v: Vec<f64> = (0..CLASSES * self.hidden)
            .map(|_| out_scale * rng.standard_normal())
            .collect();
        params.push(ParamBlock::whole(Vector::new(v)?));
        Ok(params)
    }
}

impl Objective for TinyNormNet {
    fn block_dims(&self) -> Vec<usize> {
        let mut dims = vec![INPUT_DIM; self.hidden];
        dims.push(CLASSES * self.hidden);
        dims
    }

    fn is_scale_invariant(&self, index: usize) -> bool {
        index < self.hidden
    }

    fn evaluate(&self, params: &[ParamBlock]) -> Result<(f64, Vec<Vector>)> {
        if params.len() != self.hidden + 1 {
            return Err(Error::ShapeMismatch {
                expected: self.hidden + 1,
                actual: params.len(),
            });
        }
        let n = self.inputs.len();
        let h = self.hidden;
        let out = params[h].values();
        if out.len() != CLASSES * h {
            return Err(Error::ShapeMismatch {
                expected: CLASSES * h,
                actual: out.len(),
            });
        }

        // Forward: per-unit pre-activation across the batch, normalized,
        // then tanh.
        let mut normed = Vec::with_capacity(h); // y_j over the batch
        let mut sigmas = Vec::with_capacity(h);
        let mut acts = vec![vec![0.0; n]; h]; // tanh(y_j)
        for (j, block) in params[..h].iter().enumerate() {
            let w = block.values();
            if w.len() != INPUT_DIM {
                return Err(Error::ShapeMismatch {
                    expected: INPUT_DIM,
                    actual: w.len(),
                });
            }
            let z: Vec<f64> = self
                .inputs
                .iter()
                .map(|x| w[0] * x[0] + w[1] * x[1])
                .collect();
            let (y, sigma) = normalize::forward(&z)?;
            for s in 0..n {
                acts[j][s] = y[s].tanh();
            }
            normed.push(y);
            sigmas.push(sigma);
        }

        // Logits and mean cross-entropy.
        let mut loss = 0.0;
        let mut dlogits = vec![[0.0; CLASSES]; n];
        for s in 0..n {
            let mut logits = [0.0; CLASSES];
            for (k, logit) in logits.iter_mut().enumerate() {
                *logit = (0..h).map(|j| out[k * h + j] * acts[j][s]).sum();
            }
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum_exp: f64 = logits.iter().map(|l| (l - max).exp()).sum();
            let lse = max + sum_exp.ln();
            loss += (lse - logits[self.labels[s]]) / n as f64;
            for k in 0..CLASSES {
                let softmax = (logits[k] - lse).exp();
                let target = if k == self.labels[s] { 1.0 } else { 0.0 };
                dlogits[s][k] = (softmax - target) / n as f64;
            }
        }

        // Backward.
        let mut grads: Vec<Vector> = Vec::with_capacity(h + 1);
        let mut grad_out = vec![0.0; CLASSES * h];
        for k in 0..CLASSES {
            for j in 0..h {
                grad_out[k * h + j] = (0..n).map(|s| dlogits[s][k] * acts[j][s]).sum();
            }
        }
        for j in 0..h {
            let dact: Vec<f64> = (0..n)
                .map(|s| {
                    let upstream: f64 = (0..CLASSES).map(|k| dlogits[s][k] * out[k * h + j]).sum();
                    upstream * (1.0 - acts[j][s] * acts[j][s])
                })
                .collect();
            let dz = normalize::backward(&normed[j], sigmas[j], &dact);
            let mut gw = [0.0; INPUT_DIM];
            for (s, x) in self.inputs.iter().enumerate() {
                gw[0] += dz[s] * x[0];
                gw[1] += dz[s] * x[1];
            }
            grads.push(Vector::new(gw.to_vec())?);
        }
        grads.push(Vector::new(grad_out)?);

        Ok((loss, grads))
    }
}
