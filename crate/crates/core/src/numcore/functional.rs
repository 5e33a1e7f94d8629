//! Network layer primitives as functions of `(input, parameters)`.
//!
//! Layouts follow the usual channels-first convention: sequences are
//! `[batch, channels, length]`, token sequences are `[batch, tokens, dim]`.

use super::scalar::{cast, gemm, Scalar};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// `y = x W^T + b` on the last axis of `x`.
pub fn linear<T: Scalar>(x: &Tensor<T>, weight: &Tensor<T>, bias: Option<&Tensor<T>>) -> Result<Tensor<T>> {
    if weight.ndim() != 2 {
        return Err(Error::shape("linear", &[0, 0], weight.shape()));
    }
    let (out_dim, in_dim) = (weight.shape()[0], weight.shape()[1]);
    let last = *x.shape().last().unwrap_or(&0);
    if last != in_dim {
        let mut expected = x.shape().to_vec();
        *expected.last_mut().unwrap() = in_dim;
        return Err(Error::shape("linear", &expected, x.shape()));
    }
    let rows = x.numel() / in_dim;
    let flat = if x.ndim() == 2 { x.clone() } else { x.reshape(&[rows, in_dim])? };
    let mut y = flat.matmul_t(weight)?;
    if let Some(b) = bias {
        y = y.add_bias(b, 1)?;
    }
    if x.ndim() == 2 {
        Ok(y)
    } else {
        let mut shape = x.shape().to_vec();
        *shape.last_mut().unwrap() = out_dim;
        y.reshape(&shape)
    }
}

/// Output length of a 1-D convolution.
pub fn conv_out_len(len: usize, kernel: usize, stride: usize, padding: usize) -> Option<usize> {
    let padded = len + 2 * padding;
    (stride > 0 && padded >= kernel).then(|| (padded - kernel) / stride + 1)
}

/// Gathers `cols[(c * k + j) * cols_len + t] = src[c, t * stride + j - padding]`.
fn im2col<T: Scalar>(
    src: &[T],
    channels: usize,
    src_len: usize,
    kernel: usize,
    stride: usize,
    padding: usize,
    cols_len: usize,
) -> Vec<T> {
    let mut cols = vec![T::zero(); channels * kernel * cols_len];
    for c in 0..channels {
        let row = &src[c * src_len..(c + 1) * src_len];
        for j in 0..kernel {
            let dst = &mut cols[(c * kernel + j) * cols_len..(c * kernel + j + 1) * cols_len];
            for (t, d) in dst.iter_mut().enumerate() {
                let pos = (t * stride + j) as isize - padding as isize;
                if pos >= 0 && (pos as usize) < src_len {
                    *d = row[pos as usize];
                }
            }
        }
    }
    cols
}

/// Adjoint of [`im2col`]: scatters-adds columns back into `dst`.
#[allow(clippy::too_many_arguments)]
fn col2im<T: Scalar>(
    cols: &[T],
    channels: usize,
    dst_len: usize,
    kernel: usize,
    stride: usize,
    padding: usize,
    cols_len: usize,
    dst: &mut [T],
) {
    for c in 0..channels {
        let row = &mut dst[c * dst_len..(c + 1) * dst_len];
        for j in 0..kernel {
            let src = &cols[(c * kernel + j) * cols_len..(c * kernel + j + 1) * cols_len];
            for (t, &v) in src.iter().enumerate() {
                let pos = (t * stride + j) as isize - padding as isize;
                if pos >= 0 && (pos as usize) < dst_len {
                    row[pos as usize] += v;
                }
            }
        }
    }
}

fn sum_bias_grad<T: Scalar>(grad: &[T], batch: usize, channels: usize, len: usize) -> Vec<T> {
    let mut gb = vec![T::zero(); channels];
    for n in 0..batch {
        for (c, acc) in gb.iter_mut().enumerate() {
            let base = (n * channels + c) * len;
            *acc += grad[base..base + len].iter().copied().sum::<T>();
        }
    }
    gb
}

/// 1-D convolution. `x: [n, c_in, len]`, `weight: [c_out, c_in, k]`.
pub fn conv1d<T: Scalar>(
    x: &Tensor<T>,
    weight: &Tensor<T>,
    bias: Option<&Tensor<T>>,
    stride: usize,
    padding: usize,
) -> Result<Tensor<T>> {
    if x.ndim() != 3 || weight.ndim() != 3 || x.shape()[1] != weight.shape()[1] {
        let expected = [x.shape().first().copied().unwrap_or(0), weight.shape().get(1).copied().unwrap_or(0), 0];
        return Err(Error::shape("conv1d", &expected, x.shape()));
    }
    let (batch, c_in, len) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (c_out, kernel) = (weight.shape()[0], weight.shape()[2]);
    if let Some(b) = bias {
        if b.shape() != [c_out] {
            return Err(Error::shape("conv1d bias", &[c_out], b.shape()));
        }
    }
    let out_len = conv_out_len(len, kernel, stride, padding).ok_or_else(|| {
        Error::UnsupportedGeometry(format!("conv1d: length {len} with padding {padding} shorter than kernel {kernel}"))
    })?;
    let ck = c_in * kernel;
    let mut out = vec![T::zero(); batch * c_out * out_len];
    {
        let xd = x.data();
        let wd = weight.data();
        for n in 0..batch {
            let cols = im2col(&xd[n * c_in * len..(n + 1) * c_in * len], c_in, len, kernel, stride, padding, out_len);
            gemm(c_out, ck, out_len, &wd, false, &cols, false, T::zero(), &mut out[n * c_out * out_len..(n + 1) * c_out * out_len]);
        }
        if let Some(b) = bias {
            let bd = b.data();
            for n in 0..batch {
                for (c, &bc) in bd.iter().enumerate() {
                    let base = (n * c_out + c) * out_len;
                    out[base..base + out_len].iter_mut().for_each(|v| *v += bc);
                }
            }
        }
    }
    let mut inputs = vec![x.clone(), weight.clone()];
    inputs.extend(bias.cloned());
    Ok(Tensor::from_op(
        vec![batch, c_out, out_len],
        out,
        inputs,
        Box::new(move |ctx| {
            let xd = ctx.inputs[0].data();
            let wd = ctx.inputs[1].data();
            let mut gx = ctx.needs[0].then(|| vec![T::zero(); batch * c_in * len]);
            let mut gw = ctx.needs[1].then(|| vec![T::zero(); c_out * ck]);
            let mut dcols = vec![T::zero(); ck * out_len];
            for n in 0..batch {
                let g = &ctx.grad[n * c_out * out_len..(n + 1) * c_out * out_len];
                if let Some(gw) = gw.as_mut() {
                    let cols = im2col(&xd[n * c_in * len..(n + 1) * c_in * len], c_in, len, kernel, stride, padding, out_len);
                    gemm(c_out, out_len, ck, g, false, &cols, true, T::one(), gw);
                }
                if let Some(gx) = gx.as_mut() {
                    gemm(ck, c_out, out_len, &wd, true, g, false, T::zero(), &mut dcols);
                    col2im(&dcols, c_in, len, kernel, stride, padding, out_len, &mut gx[n * c_in * len..(n + 1) * c_in * len]);
                }
            }
            let mut grads = vec![gx, gw];
            if ctx.inputs.len() == 3 {
                grads.push(ctx.needs[2].then(|| sum_bias_grad(ctx.grad, batch, c_out, out_len)));
            }
            grads
        }),
    ))
}

/// Transposed 1-D convolution (the adjoint of [`conv1d`]).
/// `x: [n, c_in, len]`, `weight: [c_in, c_out, k]`; output length is
/// `(len - 1) * stride - 2 * padding + k`.
pub fn conv_transpose1d<T: Scalar>(
    x: &Tensor<T>,
    weight: &Tensor<T>,
    bias: Option<&Tensor<T>>,
    stride: usize,
    padding: usize,
) -> Result<Tensor<T>> {
    if x.ndim() != 3 || weight.ndim() != 3 || x.shape()[1] != weight.shape()[0] {
        let expected = [x.shape().first().copied().unwrap_or(0), weight.shape().first().copied().unwrap_or(0), 0];
        return Err(Error::shape("conv_transpose1d", &expected, x.shape()));
    }
    let (batch, c_in, len) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (c_out, kernel) = (weight.shape()[1], weight.shape()[2]);
    let full = (len - 1) * stride + kernel;
    if full <= 2 * padding || stride == 0 {
        return Err(Error::UnsupportedGeometry(format!(
            "conv_transpose1d: length {len} kernel {kernel} padding {padding} gives empty output"
        )));
    }
    let out_len = full - 2 * padding;
    let ck = c_out * kernel;
    let mut out = vec![T::zero(); batch * c_out * out_len];
    {
        let xd = x.data();
        let wd = weight.data();
        let mut cols = vec![T::zero(); ck * len];
        for n in 0..batch {
            gemm(ck, c_in, len, &wd, true, &xd[n * c_in * len..(n + 1) * c_in * len], false, T::zero(), &mut cols);
            col2im(&cols, c_out, out_len, kernel, stride, padding, len, &mut out[n * c_out * out_len..(n + 1) * c_out * out_len]);
        }
        if let Some(b) = bias {
            let bd = b.data();
            for n in 0..batch {
                for (c, &bc) in bd.iter().enumerate() {
                    let base = (n * c_out + c) * out_len;
                    out[base..base + out_len].iter_mut().for_each(|v| *v += bc);
                }
            }
        }
    }
    let mut inputs = vec![x.clone(), weight.clone()];
    inputs.extend(bias.cloned());
    Ok(Tensor::from_op(
        vec![batch, c_out, out_len],
        out,
        inputs,
        Box::new(move |ctx| {
            let xd = ctx.inputs[0].data();
            let wd = ctx.inputs[1].data();
            let mut gx = ctx.needs[0].then(|| vec![T::zero(); batch * c_in * len]);
            let mut gw = ctx.needs[1].then(|| vec![T::zero(); c_in * ck]);
            for n in 0..batch {
                let g = &ctx.grad[n * c_out * out_len..(n + 1) * c_out * out_len];
                let dcols = im2col(g, c_out, out_len, kernel, stride, padding, len);
                if let Some(gx) = gx.as_mut() {
                    gemm(c_in, ck, len, &wd, false, &dcols, false, T::zero(), &mut gx[n * c_in * len..(n + 1) * c_in * len]);
                }
                if let Some(gw) = gw.as_mut() {
                    gemm(c_in, len, ck, &xd[n * c_in * len..(n + 1) * c_in * len], false, &dcols, true, T::one(), gw);
                }
            }
            let mut grads = vec![gx, gw];
            if ctx.inputs.len() == 3 {
                grads.push(ctx.needs[2].then(|| sum_bias_grad(ctx.grad, batch, c_out, out_len)));
            }
            grads
        }),
    ))
}

/// Arg-max positions recorded by [`max_pool1d`], needed for unpooling.
#[derive(Clone, Debug)]
pub struct PoolIndices {
    /// Per output element, the input position along the length axis.
    pub indices: Vec<usize>,
    pub input_len: usize,
}

/// Max pooling over the last axis of `[n, c, len]`, no padding.
/// Ties go to the first maximal position.
pub fn max_pool1d<T: Scalar>(x: &Tensor<T>, kernel: usize, stride: usize) -> Result<(Tensor<T>, PoolIndices)> {
    if x.ndim() != 3 {
        return Err(Error::shape("max_pool1d", &[0, 0, 0], x.shape()));
    }
    let (batch, ch, len) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let out_len = conv_out_len(len, kernel, stride, 0)
        .ok_or_else(|| Error::UnsupportedGeometry(format!("max_pool1d: length {len} shorter than kernel {kernel}")))?;
    let rows = batch * ch;
    let mut out = Vec::with_capacity(rows * out_len);
    let mut indices = Vec::with_capacity(rows * out_len);
    {
        let xd = x.data();
        for r in 0..rows {
            let row = &xd[r * len..(r + 1) * len];
            for t in 0..out_len {
                let start = t * stride;
                let mut best = start;
                for p in start + 1..start + kernel {
                    if row[p] > row[best] {
                        best = p;
                    }
                }
                out.push(row[best]);
                indices.push(best);
            }
        }
    }
    let idx = indices.clone();
    let y = Tensor::from_op(
        vec![batch, ch, out_len],
        out,
        vec![x.clone()],
        Box::new(move |ctx| {
            let mut g = vec![T::zero(); rows * len];
            for (o, &p) in idx.iter().enumerate() {
                g[(o / out_len) * len + p] += ctx.grad[o];
            }
            vec![Some(g)]
        }),
    );
    Ok((y, PoolIndices { indices, input_len: len }))
}

/// Places each value at its recorded arg-max position; everything else is 0.
pub fn max_unpool1d<T: Scalar>(x: &Tensor<T>, pool: &PoolIndices) -> Result<Tensor<T>> {
    if x.ndim() != 3 || pool.indices.len() != x.numel() {
        return Err(Error::shape("max_unpool1d", &[pool.indices.len()], &[x.numel()]));
    }
    let (batch, ch, pooled) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let len = pool.input_len;
    let mut out = vec![T::zero(); batch * ch * len];
    {
        let xd = x.data();
        for (o, &p) in pool.indices.iter().enumerate() {
            out[(o / pooled) * len + p] = xd[o];
        }
    }
    let idx = pool.indices.clone();
    Ok(Tensor::from_op(
        vec![batch, ch, len],
        out,
        vec![x.clone()],
        Box::new(move |ctx| {
            let g = idx.iter().enumerate().map(|(o, &p)| ctx.grad[(o / pooled) * len + p]).collect();
            vec![Some(g)]
        }),
    ))
}

/// Batch normalization over channel axis 1 of `[n, c]` or `[n, c, len]`.
///
/// In training mode batch statistics are used and the running estimates
/// are updated in place (`running = (1 - momentum) running + momentum batch`,
/// unbiased variance); in evaluation mode the running estimates are used.
#[allow(clippy::too_many_arguments)]
pub fn batch_norm<T: Scalar>(
    x: &Tensor<T>,
    gamma: &Tensor<T>,
    beta: &Tensor<T>,
    running_mean: &Tensor<T>,
    running_var: &Tensor<T>,
    train: bool,
    momentum: f64,
    eps: f64,
) -> Result<Tensor<T>> {
    if !(x.ndim() == 2 || x.ndim() == 3) {
        return Err(Error::shape("batch_norm", &[0, 0], x.shape()));
    }
    let (batch, ch) = (x.shape()[0], x.shape()[1]);
    let len = if x.ndim() == 3 { x.shape()[2] } else { 1 };
    for p in [gamma, beta, running_mean, running_var] {
        if p.shape() != [ch] {
            return Err(Error::shape("batch_norm parameter", &[ch], p.shape()));
        }
    }
    let count = batch * len;
    if train && count < 2 {
        return Err(Error::invalid("batch_norm in training mode needs more than one value per channel"));
    }
    let eps_t: T = cast(eps);
    let xd = x.to_vec();
    let (mean, var) = if train {
        let mut mean = vec![T::zero(); ch];
        let mut var = vec![T::zero(); ch];
        let inv: T = cast(1.0 / count as f64);
        for c in 0..ch {
            let mut s = T::zero();
            for n in 0..batch {
                s += xd[(n * ch + c) * len..(n * ch + c + 1) * len].iter().copied().sum::<T>();
            }
            let m = s * inv;
            let mut v = T::zero();
            for n in 0..batch {
                v += xd[(n * ch + c) * len..(n * ch + c + 1) * len].iter().map(|&a| (a - m) * (a - m)).sum::<T>();
            }
            mean[c] = m;
            var[c] = v * inv;
        }
        let mom: T = cast(momentum);
        let unbias: T = cast(count as f64 / (count - 1) as f64);
        let mut rm = running_mean.data_mut();
        let mut rv = running_var.data_mut();
        for c in 0..ch {
            rm[c] = (T::one() - mom) * rm[c] + mom * mean[c];
            rv[c] = (T::one() - mom) * rv[c] + mom * var[c] * unbias;
        }
        (mean, var)
    } else {
        (running_mean.to_vec(), running_var.to_vec())
    };
    let inv_std: Vec<T> = var.iter().map(|&v| T::one() / (v + eps_t).sqrt()).collect();
    let mut xhat = vec![T::zero(); xd.len()];
    let mut out = vec![T::zero(); xd.len()];
    {
        let g = gamma.data();
        let b = beta.data();
        for n in 0..batch {
            for c in 0..ch {
                for i in (n * ch + c) * len..(n * ch + c + 1) * len {
                    xhat[i] = (xd[i] - mean[c]) * inv_std[c];
                    out[i] = g[c] * xhat[i] + b[c];
                }
            }
        }
    }
    Ok(Tensor::from_op(
        x.shape().to_vec(),
        out,
        vec![x.clone(), gamma.clone(), beta.clone()],
        Box::new(move |ctx| {
            let g = ctx.grad;
            let gamma = ctx.inputs[1].data();
            let mut sum_g = vec![T::zero(); ch];
            let mut sum_gx = vec![T::zero(); ch];
            for n in 0..batch {
                for c in 0..ch {
                    for i in (n * ch + c) * len..(n * ch + c + 1) * len {
                        sum_g[c] += g[i];
                        sum_gx[c] += g[i] * xhat[i];
                    }
                }
            }
            let gx = ctx.needs[0].then(|| {
                let mut gx = vec![T::zero(); g.len()];
                let m: T = cast(count as f64);
                for n in 0..batch {
                    for c in 0..ch {
                        let k = gamma[c] * inv_std[c];
                        for i in (n * ch + c) * len..(n * ch + c + 1) * len {
                            gx[i] = if train {
                                k * (g[i] - sum_g[c] / m - xhat[i] * sum_gx[c] / m)
                            } else {
                                k * g[i]
                            };
                        }
                    }
                }
                gx
            });
            vec![gx, Some(sum_gx), Some(sum_g)]
        }),
    ))
}

/// Layer normalization over the last axis.
pub fn layer_norm<T: Scalar>(x: &Tensor<T>, gamma: &Tensor<T>, beta: &Tensor<T>, eps: f64) -> Result<Tensor<T>> {
    let d = *x.shape().last().unwrap_or(&0);
    if gamma.shape() != [d] || beta.shape() != [d] {
        return Err(Error::shape("layer_norm", &[d], gamma.shape()));
    }
    let eps_t: T = cast(eps);
    let inv_d: T = cast(1.0 / d as f64);
    let xd = x.to_vec();
    let rows = xd.len() / d;
    let mut xhat = vec![T::zero(); xd.len()];
    let mut inv_std = vec![T::zero(); rows];
    let mut out = vec![T::zero(); xd.len()];
    {
        let g = gamma.data();
        let b = beta.data();
        for r in 0..rows {
            let row = &xd[r * d..(r + 1) * d];
            let m = row.iter().copied().sum::<T>() * inv_d;
            let v = row.iter().map(|&a| (a - m) * (a - m)).sum::<T>() * inv_d;
            let s = T::one() / (v + eps_t).sqrt();
            inv_std[r] = s;
            for j in 0..d {
                let h = (row[j] - m) * s;
                xhat[r * d + j] = h;
                out[r * d + j] = g[j] * h + b[j];
            }
        }
    }
    Ok(Tensor::from_op(
        x.shape().to_vec(),
        out,
        vec![x.clone(), gamma.clone(), beta.clone()],
        Box::new(move |ctx| {
            let g = ctx.grad;
            let gamma = ctx.inputs[1].data();
            let mut ggamma = vec![T::zero(); d];
            let mut gbeta = vec![T::zero(); d];
            let mut gx = vec![T::zero(); g.len()];
            for r in 0..rows {
                let mut sum_dh = T::zero();
                let mut sum_dh_h = T::zero();
                for j in 0..d {
                    let i = r * d + j;
                    ggamma[j] += g[i] * xhat[i];
                    gbeta[j] += g[i];
                    let dh = g[i] * gamma[j];
                    sum_dh += dh;
                    sum_dh_h += dh * xhat[i];
                }
                for j in 0..d {
                    let i = r * d + j;
                    let dh = g[i] * gamma[j];
                    gx[i] = inv_std[r] * (dh - sum_dh * inv_d - xhat[i] * sum_dh_h * inv_d);
                }
            }
            vec![Some(gx), Some(ggamma), Some(gbeta)]
        }),
    ))
}

/// Weights of one LSTM layer, gate order (input, forget, cell, output).
pub struct LstmWeights<'a, T: Scalar> {
    /// `[4 * hidden, input]`
    pub w_ih: &'a Tensor<T>,
    /// `[4 * hidden, hidden]`
    pub w_hh: &'a Tensor<T>,
    pub b_ih: &'a Tensor<T>,
    pub b_hh: &'a Tensor<T>,
}

/// Runs one LSTM layer over `x: [batch, time, input]` from zero state and
/// returns every hidden state, `[batch, time, hidden]`.
pub fn lstm_layer<T: Scalar>(x: &Tensor<T>, w: &LstmWeights<'_, T>) -> Result<Tensor<T>> {
    if x.ndim() != 3 {
        return Err(Error::shape("lstm_layer", &[0, 0, 0], x.shape()));
    }
    let (batch, steps, input) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let hidden = w.w_hh.shape()[1];
    if w.w_ih.shape() != [4 * hidden, input] || w.w_hh.shape() != [4 * hidden, hidden] {
        return Err(Error::shape("lstm_layer", &[4 * hidden, input], w.w_ih.shape()));
    }
    let xw = linear(&x.reshape(&[batch * steps, input])?, w.w_ih, Some(w.b_ih))?.reshape(&[batch, steps, 4 * hidden])?;
    let mut h = Tensor::zeros(&[batch, hidden]);
    let mut c = Tensor::zeros(&[batch, hidden]);
    let mut outputs = Vec::with_capacity(steps);
    for t in 0..steps {
        let gates = xw
            .narrow(1, t, 1)?
            .reshape(&[batch, 4 * hidden])?
            .add(&h.matmul_t(w.w_hh)?)?
            .add_bias(w.b_hh, 1)?;
        let i = gates.narrow(1, 0, hidden)?.sigmoid();
        let f = gates.narrow(1, hidden, hidden)?.sigmoid();
        let g = gates.narrow(1, 2 * hidden, hidden)?.tanh();
        let o = gates.narrow(1, 3 * hidden, hidden)?.sigmoid();
        c = f.mul(&c)?.add(&i.mul(&g)?)?;
        h = o.mul(&c.tanh())?;
        outputs.push(h.reshape(&[batch, 1, hidden])?);
    }
    Tensor::cat(&outputs, 1)
}

/// Projection weights of multi-head self-attention.
pub struct AttentionWeights<'a, T: Scalar> {
    /// `[3 * dim, dim]`, rows ordered query, key, value.
    pub w_qkv: &'a Tensor<T>,
    pub b_qkv: &'a Tensor<T>,
    /// `[dim, dim]`
    pub w_out: &'a Tensor<T>,
    pub b_out: &'a Tensor<T>,
}

/// Scaled dot-product self-attention over `x: [batch, tokens, dim]`.
///
/// Returns the projected output and the attention weights
/// `[batch * heads, tokens, tokens]`.
pub fn multi_head_attention<T: Scalar>(
    x: &Tensor<T>,
    w: &AttentionWeights<'_, T>,
    heads: usize,
) -> Result<(Tensor<T>, Tensor<T>)> {
    if x.ndim() != 3 {
        return Err(Error::shape("multi_head_attention", &[0, 0, 0], x.shape()));
    }
    let (batch, tokens, dim) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    if heads == 0 || dim % heads != 0 {
        return Err(Error::invalid(format!("attention dim {dim} not divisible by {heads} heads")));
    }
    let head_dim = dim / heads;
    let qkv = linear(x, w.w_qkv, Some(w.b_qkv))?;
    let split = |i: usize| -> Result<Tensor<T>> {
        qkv.narrow(2, i * dim, dim)?
            .reshape(&[batch, tokens, heads, head_dim])?
            .permute(&[0, 2, 1, 3])?
            .reshape(&[batch * heads, tokens, head_dim])
    };
    let (q, k, v) = (split(0)?, split(1)?, split(2)?);
    let scores = q.bmm(&k, true)?.scale(1.0 / (head_dim as f64).sqrt());
    let attn = scores.softmax();
    let ctx = attn
        .bmm(&v, false)?
        .reshape(&[batch, heads, tokens, head_dim])?
        .permute(&[0, 2, 1, 3])?
        .reshape(&[batch, tokens, dim])?;
    Ok((linear(&ctx, w.w_out, Some(w.b_out))?, attn))
}

/// Cosine similarity of two vectors.
///
/// A zero vector on either side yields 0 (with a logged warning) rather than
/// NaN.
pub fn cosine_sim<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::shape("cosine_sim", &[a.len()], &[b.len()]));
    }
    let dot: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
    let na = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    let nb = b.iter().map(|&x| x * x).sum::<T>().sqrt();
    if na == T::zero() || nb == T::zero() {
        log::warn!("cosine_sim: zero vector, similarity defined as 0");
        return Ok(T::zero());
    }
    Ok((dot / (na * nb)).max(-T::one()).min(T::one()))
}
