//! Parameterized layers built on [`functional`](super::functional).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::functional::{self as F, AttentionWeights, LstmWeights};
use super::scalar::{cast, Scalar};
use super::tensor::Tensor;
use crate::error::Result;

/// A named tensor owned by a model.
#[derive(Clone, Debug)]
pub struct Parameter<T: Scalar> {
    pub name: String,
    pub tensor: Tensor<T>,
}

impl<T: Scalar> Parameter<T> {
    pub fn new(name: impl Into<String>, tensor: Tensor<T>) -> Self {
        Parameter { name: name.into(), tensor }
    }
}

/// Anything holding trainable parameters and (non-trainable) buffers.
pub trait Module<T: Scalar> {
    fn parameters(&self) -> Vec<Parameter<T>>;

    fn buffers(&self) -> Vec<Parameter<T>> {
        Vec::new()
    }

    /// Parameters followed by buffers, the unit of checkpointing.
    fn state(&self) -> Vec<Parameter<T>> {
        let mut s = self.parameters();
        s.extend(self.buffers());
        s
    }

    fn num_parameters(&self) -> usize {
        self.parameters().iter().map(|p| p.tensor.numel()).sum()
    }

    fn zero_grad(&self) {
        for p in self.parameters() {
            p.tensor.zero_grad();
        }
    }
}

/// Per-forward state: mode flag plus the RNG driving dropout.
pub struct ForwardCtx {
    pub train: bool,
    pub rng: ChaCha8Rng,
}

impl ForwardCtx {
    pub fn train(seed: u64) -> Self {
        ForwardCtx { train: true, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn eval() -> Self {
        ForwardCtx { train: false, rng: ChaCha8Rng::seed_from_u64(0) }
    }
}

/// Seeded parameter initializer.
pub struct Init {
    rng: ChaCha8Rng,
}

impl Init {
    pub fn new(seed: u64) -> Self {
        Init { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Kaiming-uniform for ReLU networks: `U(-b, b)`, `b = sqrt(6 / fan_in)`.
    pub fn kaiming_uniform<T: Scalar>(&mut self, shape: &[usize], fan_in: usize) -> Vec<T> {
        let bound = (6.0 / fan_in as f64).sqrt();
        let n: usize = shape.iter().product();
        (0..n).map(|_| cast(self.rng.random_range(-bound..bound))).collect()
    }

    pub fn normal<T: Scalar>(&mut self, n: usize, std: f64) -> Vec<T> {
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                cast(z * std)
            })
            .collect()
    }

    /// Row-stacked square orthogonal blocks, `[blocks * size, size]`.
    pub fn orthogonal_blocks<T: Scalar>(&mut self, blocks: usize, size: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(blocks * size * size);
        for _ in 0..blocks {
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(size);
            while rows.len() < size {
                let mut v: Vec<f64> = (0..size).map(|_| StandardNormal.sample(&mut self.rng)).collect();
                // modified Gram-Schmidt, twice for stability
                for _ in 0..2 {
                    for r in &rows {
                        let d: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                        v.iter_mut().zip(r).for_each(|(x, y)| *x -= d * y);
                    }
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-6 {
                    v.iter_mut().for_each(|x| *x /= norm);
                    rows.push(v);
                }
            }
            out.extend(rows.into_iter().flatten().map(cast::<T>));
        }
        out
    }
}

pub struct Linear<T: Scalar> {
    pub weight: Parameter<T>,
    pub bias: Option<Parameter<T>>,
}

impl<T: Scalar> Linear<T> {
    pub fn new(name: &str, in_dim: usize, out_dim: usize, bias: bool, init: &mut Init) -> Result<Self> {
        let weight = Tensor::param(init.kaiming_uniform(&[out_dim, in_dim], in_dim), &[out_dim, in_dim])?;
        let bias = if bias {
            Some(Parameter::new(format!("{name}.bias"), Tensor::param(vec![T::zero(); out_dim], &[out_dim])?))
        } else {
            None
        };
        Ok(Linear { weight: Parameter::new(format!("{name}.weight"), weight), bias })
    }

    pub fn in_dim(&self) -> usize {
        self.weight.tensor.shape()[1]
    }

    pub fn out_dim(&self) -> usize {
        self.weight.tensor.shape()[0]
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        F::linear(x, &self.weight.tensor, self.bias.as_ref().map(|b| &b.tensor))
    }
}

impl<T: Scalar> Module<T> for Linear<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        let mut p = vec![self.weight.clone()];
        p.extend(self.bias.clone());
        p
    }
}

pub struct Conv1d<T: Scalar> {
    pub weight: Parameter<T>,
    pub bias: Parameter<T>,
    pub stride: usize,
    pub padding: usize,
}

impl<T: Scalar> Conv1d<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        init: &mut Init,
    ) -> Result<Self> {
        let shape = [out_ch, in_ch, kernel];
        Ok(Conv1d {
            weight: Parameter::new(format!("{name}.weight"), Tensor::param(init.kaiming_uniform(&shape, in_ch * kernel), &shape)?),
            bias: Parameter::new(format!("{name}.bias"), Tensor::param(vec![T::zero(); out_ch], &[out_ch])?),
            stride,
            padding,
        })
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        F::conv1d(x, &self.weight.tensor, Some(&self.bias.tensor), self.stride, self.padding)
    }

    pub fn out_len(&self, len: usize) -> Option<usize> {
        F::conv_out_len(len, self.weight.tensor.shape()[2], self.stride, self.padding)
    }
}

impl<T: Scalar> Module<T> for Conv1d<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        vec![self.weight.clone(), self.bias.clone()]
    }
}

pub struct ConvTranspose1d<T: Scalar> {
    pub weight: Parameter<T>,
    pub bias: Parameter<T>,
    pub stride: usize,
    pub padding: usize,
}

impl<T: Scalar> ConvTranspose1d<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        init: &mut Init,
    ) -> Result<Self> {
        let shape = [in_ch, out_ch, kernel];
        Ok(ConvTranspose1d {
            weight: Parameter::new(format!("{name}.weight"), Tensor::param(init.kaiming_uniform(&shape, in_ch * kernel), &shape)?),
            bias: Parameter::new(format!("{name}.bias"), Tensor::param(vec![T::zero(); out_ch], &[out_ch])?),
            stride,
            padding,
        })
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        F::conv_transpose1d(x, &self.weight.tensor, Some(&self.bias.tensor), self.stride, self.padding)
    }
}

impl<T: Scalar> Module<T> for ConvTranspose1d<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        vec![self.weight.clone(), self.bias.clone()]
    }
}

pub struct BatchNorm1d<T: Scalar> {
    pub gamma: Parameter<T>,
    pub beta: Parameter<T>,
    pub running_mean: Parameter<T>,
    pub running_var: Parameter<T>,
    pub momentum: f64,
    pub eps: f64,
}

impl<T: Scalar> BatchNorm1d<T> {
    pub fn new(name: &str, channels: usize) -> Result<Self> {
        Ok(BatchNorm1d {
            gamma: Parameter::new(format!("{name}.weight"), Tensor::param(vec![T::one(); channels], &[channels])?),
            beta: Parameter::new(format!("{name}.bias"), Tensor::param(vec![T::zero(); channels], &[channels])?),
            running_mean: Parameter::new(format!("{name}.running_mean"), Tensor::zeros(&[channels])),
            running_var: Parameter::new(format!("{name}.running_var"), Tensor::full(&[channels], T::one())),
            momentum: 0.1,
            eps: 1e-5,
        })
    }

    pub fn forward(&self, x: &Tensor<T>, train: bool) -> Result<Tensor<T>> {
        F::batch_norm(
            x,
            &self.gamma.tensor,
            &self.beta.tensor,
            &self.running_mean.tensor,
            &self.running_var.tensor,
            train,
            self.momentum,
            self.eps,
        )
    }
}

impl<T: Scalar> Module<T> for BatchNorm1d<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        vec![self.gamma.clone(), self.beta.clone()]
    }

    fn buffers(&self) -> Vec<Parameter<T>> {
        vec![self.running_mean.clone(), self.running_var.clone()]
    }
}

pub struct LayerNorm<T: Scalar> {
    pub gamma: Parameter<T>,
    pub beta: Parameter<T>,
    pub eps: f64,
}

impl<T: Scalar> LayerNorm<T> {
    pub fn new(name: &str, dim: usize) -> Result<Self> {
        Ok(LayerNorm {
            gamma: Parameter::new(format!("{name}.weight"), Tensor::param(vec![T::one(); dim], &[dim])?),
            beta: Parameter::new(format!("{name}.bias"), Tensor::param(vec![T::zero(); dim], &[dim])?),
            eps: 1e-5,
        })
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        F::layer_norm(x, &self.gamma.tensor, &self.beta.tensor, self.eps)
    }
}

impl<T: Scalar> Module<T> for LayerNorm<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        vec![self.gamma.clone(), self.beta.clone()]
    }
}

/// Stacked unidirectional LSTM.
pub struct Lstm<T: Scalar> {
    layers: Vec<[Parameter<T>; 4]>,
    pub hidden: usize,
}

impl<T: Scalar> Lstm<T> {
    pub fn new(name: &str, input: usize, hidden: usize, num_layers: usize, init: &mut Init) -> Result<Self> {
        let mut layers = Vec::with_capacity(num_layers);
        for l in 0..num_layers {
            let in_dim = if l == 0 { input } else { hidden };
            let p = |suffix: &str, t: Tensor<T>| Parameter::new(format!("{name}.{suffix}_l{l}"), t);
            layers.push([
                p("weight_ih", Tensor::param(init.kaiming_uniform(&[4 * hidden, in_dim], in_dim), &[4 * hidden, in_dim])?),
                p("weight_hh", Tensor::param(init.orthogonal_blocks(4, hidden), &[4 * hidden, hidden])?),
                p("bias_ih", Tensor::param(vec![T::zero(); 4 * hidden], &[4 * hidden])?),
                p("bias_hh", Tensor::param(vec![T::zero(); 4 * hidden], &[4 * hidden])?),
            ]);
        }
        Ok(Lstm { layers, hidden })
    }

    /// Hidden states of the top layer, `[batch, time, hidden]`.
    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut h = x.clone();
        for [w_ih, w_hh, b_ih, b_hh] in &self.layers {
            h = F::lstm_layer(
                &h,
                &LstmWeights { w_ih: &w_ih.tensor, w_hh: &w_hh.tensor, b_ih: &b_ih.tensor, b_hh: &b_hh.tensor },
            )?;
        }
        Ok(h)
    }
}

impl<T: Scalar> Module<T> for Lstm<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        self.layers.iter().flat_map(|l| l.iter().cloned()).collect()
    }
}

pub struct MultiHeadAttention<T: Scalar> {
    pub qkv: Linear<T>,
    pub out: Linear<T>,
    pub heads: usize,
}

impl<T: Scalar> MultiHeadAttention<T> {
    pub fn new(name: &str, dim: usize, heads: usize, init: &mut Init) -> Result<Self> {
        Ok(MultiHeadAttention {
            qkv: Linear::new(&format!("{name}.in_proj"), dim, 3 * dim, true, init)?,
            out: Linear::new(&format!("{name}.out_proj"), dim, dim, true, init)?,
            heads,
        })
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, Tensor<T>)> {
        let w = AttentionWeights {
            w_qkv: &self.qkv.weight.tensor,
            b_qkv: &self.qkv.bias.as_ref().expect("attention projections carry biases").tensor,
            w_out: &self.out.weight.tensor,
            b_out: &self.out.bias.as_ref().expect("attention projections carry biases").tensor,
        };
        F::multi_head_attention(x, &w, self.heads)
    }
}

impl<T: Scalar> Module<T> for MultiHeadAttention<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        let mut p = self.qkv.parameters();
        p.extend(self.out.parameters());
        p
    }
}
