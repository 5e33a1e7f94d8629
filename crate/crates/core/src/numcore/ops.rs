//! Differentiable tensor operations.
//!
//! Broadcasting is deliberately narrow: binary ops need equal shapes, and the
//! only broadcast is [`Tensor::add_bias`] along a single axis.

use rand::Rng;

use super::scalar::{cast, gemm, Scalar};
use super::tensor::Tensor;
use crate::error::{Error, Result};

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Splits `shape` around `axis` into (outer, extent, inner).
fn split_axis(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

impl<T: Scalar> Tensor<T> {
    fn same_shape(&self, other: &Tensor<T>, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(op, self.shape(), other.shape()));
        }
        Ok(())
    }

    fn map_unary(&self, f: impl Fn(T) -> T, df: impl Fn(T, T) -> T + 'static) -> Tensor<T> {
        let out: Vec<T> = self.data().iter().map(|&x| f(x)).collect();
        Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(move |ctx| {
                let x = ctx.inputs[0].data();
                let g = ctx
                    .grad
                    .iter()
                    .zip(x.iter())
                    .zip(ctx.output)
                    .map(|((&g, &x), &y)| g * df(x, y))
                    .collect();
                vec![Some(g)]
            }),
        )
    }

    pub fn add(&self, other: &Tensor<T>) -> Result<Tensor<T>> {
        self.same_shape(other, "add")?;
        let out = self.data().iter().zip(other.data().iter()).map(|(&a, &b)| a + b).collect();
        Ok(Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone(), other.clone()],
            Box::new(|ctx| vec![Some(ctx.grad.to_vec()), Some(ctx.grad.to_vec())]),
        ))
    }

    pub fn sub(&self, other: &Tensor<T>) -> Result<Tensor<T>> {
        self.same_shape(other, "sub")?;
        let out = self.data().iter().zip(other.data().iter()).map(|(&a, &b)| a - b).collect();
        Ok(Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone(), other.clone()],
            Box::new(|ctx| {
                vec![
                    Some(ctx.grad.to_vec()),
                    Some(ctx.grad.iter().map(|&g| -g).collect()),
                ]
            }),
        ))
    }

    pub fn mul(&self, other: &Tensor<T>) -> Result<Tensor<T>> {
        self.same_shape(other, "mul")?;
        let out = self.data().iter().zip(other.data().iter()).map(|(&a, &b)| a * b).collect();
        Ok(Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone(), other.clone()],
            Box::new(|ctx| {
                let a = ctx.inputs[0].data();
                let b = ctx.inputs[1].data();
                let ga = ctx.needs[0].then(|| ctx.grad.iter().zip(b.iter()).map(|(&g, &b)| g * b).collect());
                let gb = ctx.needs[1].then(|| ctx.grad.iter().zip(a.iter()).map(|(&g, &a)| g * a).collect());
                vec![ga, gb]
            }),
        ))
    }

    pub fn div(&self, other: &Tensor<T>) -> Result<Tensor<T>> {
        self.same_shape(other, "div")?;
        let out = self.data().iter().zip(other.data().iter()).map(|(&a, &b)| a / b).collect();
        Ok(Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone(), other.clone()],
            Box::new(|ctx| {
                let b = ctx.inputs[1].data();
                let ga = ctx.needs[0].then(|| ctx.grad.iter().zip(b.iter()).map(|(&g, &b)| g / b).collect());
                let gb = ctx.needs[1].then(|| {
                    ctx.grad
                        .iter()
                        .zip(b.iter())
                        .zip(ctx.output)
                        .map(|((&g, &b), &y)| -g * y / b)
                        .collect()
                });
                vec![ga, gb]
            }),
        ))
    }

    /// Adds a 1-D `bias` along `axis`, broadcasting over all other axes.
    pub fn add_bias(&self, bias: &Tensor<T>, axis: usize) -> Result<Tensor<T>> {
        if axis >= self.ndim() || bias.shape() != [self.shape()[axis]] {
            let expected = self.shape().get(axis).map(|&d| vec![d]).unwrap_or_default();
            return Err(Error::shape("add_bias", &expected, bias.shape()));
        }
        let (outer, n, inner) = split_axis(self.shape(), axis);
        let mut out = self.to_vec();
        {
            let b = bias.data();
            for o in 0..outer {
                for (c, &bc) in b.iter().enumerate() {
                    let base = (o * n + c) * inner;
                    out[base..base + inner].iter_mut().for_each(|v| *v += bc);
                }
            }
        }
        Ok(Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone(), bias.clone()],
            Box::new(move |ctx| {
                let gb = ctx.needs[1].then(|| {
                    let mut gb = vec![T::zero(); n];
                    for o in 0..outer {
                        for (c, acc) in gb.iter_mut().enumerate() {
                            let base = (o * n + c) * inner;
                            *acc += ctx.grad[base..base + inner].iter().copied().sum::<T>();
                        }
                    }
                    gb
                });
                vec![Some(ctx.grad.to_vec()), gb]
            }),
        ))
    }

    pub fn neg(&self) -> Tensor<T> {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Tensor<T> {
        let c: T = cast(c);
        self.map_unary(move |x| x * c, move |_, _| c)
    }

    pub fn add_scalar(&self, c: f64) -> Tensor<T> {
        let c: T = cast(c);
        self.map_unary(move |x| x + c, |_, _| T::one())
    }

    pub fn exp(&self) -> Tensor<T> {
        self.map_unary(|x| x.exp(), |_, y| y)
    }

    pub fn log(&self) -> Tensor<T> {
        self.map_unary(|x| x.ln(), |x, _| T::one() / x)
    }

    pub fn square(&self) -> Tensor<T> {
        self.map_unary(|x| x * x, |x, _| x + x)
    }

    pub fn sqrt(&self) -> Tensor<T> {
        self.map_unary(|x| x.sqrt(), |_, y| T::one() / (y + y))
    }

    pub fn relu(&self) -> Tensor<T> {
        self.map_unary(
            |x| if x > T::zero() { x } else { T::zero() },
            |x, _| if x > T::zero() { T::one() } else { T::zero() },
        )
    }

    pub fn sigmoid(&self) -> Tensor<T> {
        self.map_unary(
            |x| {
                if x >= T::zero() {
                    T::one() / (T::one() + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (T::one() + e)
                }
            },
            |_, y| y * (T::one() - y),
        )
    }

    pub fn tanh(&self) -> Tensor<T> {
        self.map_unary(|x| x.tanh(), |_, y| T::one() - y * y)
    }

    /// Sum of all elements as a one-element tensor.
    pub fn sum(&self) -> Tensor<T> {
        let s = self.data().iter().copied().sum::<T>();
        let n = self.numel();
        Tensor::from_op(
            vec![1],
            vec![s],
            vec![self.clone()],
            Box::new(move |ctx| vec![Some(vec![ctx.grad[0]; n])]),
        )
    }

    pub fn mean(&self) -> Tensor<T> {
        let n = self.numel();
        self.sum().scale(1.0 / n as f64)
    }

    /// Sums out `axis`, removing it from the shape.
    pub fn sum_axis(&self, axis: usize) -> Result<Tensor<T>> {
        if axis >= self.ndim() {
            return Err(Error::invalid(format!("sum_axis: axis {axis} out of range for {:?}", self.shape())));
        }
        let (outer, n, inner) = split_axis(self.shape(), axis);
        let mut out = vec![T::zero(); outer * inner];
        {
            let x = self.data();
            for o in 0..outer {
                for c in 0..n {
                    let src = &x[(o * n + c) * inner..(o * n + c + 1) * inner];
                    out[o * inner..(o + 1) * inner].iter_mut().zip(src).for_each(|(a, &b)| *a += b);
                }
            }
        }
        let mut shape = self.shape().to_vec();
        shape.remove(axis);
        if shape.is_empty() {
            shape.push(1);
        }
        Ok(Tensor::from_op(
            shape,
            out,
            vec![self.clone()],
            Box::new(move |ctx| {
                let mut g = vec![T::zero(); outer * n * inner];
                for o in 0..outer {
                    for c in 0..n {
                        g[(o * n + c) * inner..(o * n + c + 1) * inner]
                            .copy_from_slice(&ctx.grad[o * inner..(o + 1) * inner]);
                    }
                }
                vec![Some(g)]
            }),
        ))
    }

    pub fn mean_axis(&self, axis: usize) -> Result<Tensor<T>> {
        let n = *self
            .shape()
            .get(axis)
            .ok_or_else(|| Error::invalid(format!("mean_axis: axis {axis} out of range")))?;
        Ok(self.sum_axis(axis)?.scale(1.0 / n as f64))
    }

    /// `[m, k] x [k, n] -> [m, n]`.
    pub fn matmul(&self, rhs: &Tensor<T>) -> Result<Tensor<T>> {
        self.matmul_impl(rhs, false)
    }

    /// `[m, k] x [n, k]^T -> [m, n]`.
    pub fn matmul_t(&self, rhs: &Tensor<T>) -> Result<Tensor<T>> {
        self.matmul_impl(rhs, true)
    }

    fn matmul_impl(&self, rhs: &Tensor<T>, trans_b: bool) -> Result<Tensor<T>> {
        let op = if trans_b { "matmul_t" } else { "matmul" };
        if self.ndim() != 2 || rhs.ndim() != 2 {
            return Err(Error::shape(op, &[0, 0], rhs.shape()));
        }
        let (m, k) = (self.shape()[0], self.shape()[1]);
        let (rk, n) = if trans_b {
            (rhs.shape()[1], rhs.shape()[0])
        } else {
            (rhs.shape()[0], rhs.shape()[1])
        };
        if rk != k {
            let expected = if trans_b { [n, k] } else { [k, n] };
            return Err(Error::shape(op, &expected, rhs.shape()));
        }
        let mut out = vec![T::zero(); m * n];
        gemm(m, k, n, &self.data(), false, &rhs.data(), trans_b, T::zero(), &mut out);
        Ok(Tensor::from_op(
            vec![m, n],
            out,
            vec![self.clone(), rhs.clone()],
            Box::new(move |ctx| {
                let a = ctx.inputs[0].data();
                let b = ctx.inputs[1].data();
                // dA = G B^T (or G B when B was transposed)
                let ga = ctx.needs[0].then(|| {
                    let mut ga = vec![T::zero(); m * k];
                    gemm(m, n, k, ctx.grad, false, &b, !trans_b, T::zero(), &mut ga);
                    ga
                });
                let gb = ctx.needs[1].then(|| {
                    if trans_b {
                        // B is [n, k]: dB = G^T A
                        let mut gb = vec![T::zero(); n * k];
                        gemm(n, m, k, ctx.grad, true, &a, false, T::zero(), &mut gb);
                        gb
                    } else {
                        let mut gb = vec![T::zero(); k * n];
                        gemm(k, m, n, &a, true, ctx.grad, false, T::zero(), &mut gb);
                        gb
                    }
                });
                vec![ga, gb]
            }),
        ))
    }

    /// Batched product `[g, m, k] x [g, k, n] -> [g, m, n]`; with `trans_b`
    /// the right operand is `[g, n, k]`.
    pub fn bmm(&self, rhs: &Tensor<T>, trans_b: bool) -> Result<Tensor<T>> {
        if self.ndim() != 3 || rhs.ndim() != 3 || self.shape()[0] != rhs.shape()[0] {
            return Err(Error::shape("bmm", self.shape(), rhs.shape()));
        }
        let (g, m, k) = (self.shape()[0], self.shape()[1], self.shape()[2]);
        let (rk, n) = if trans_b {
            (rhs.shape()[2], rhs.shape()[1])
        } else {
            (rhs.shape()[1], rhs.shape()[2])
        };
        if rk != k {
            let expected = if trans_b { [g, n, k] } else { [g, k, n] };
            return Err(Error::shape("bmm", &expected, rhs.shape()));
        }
        let mut out = vec![T::zero(); g * m * n];
        {
            let a = self.data();
            let b = rhs.data();
            for i in 0..g {
                gemm(
                    m,
                    k,
                    n,
                    &a[i * m * k..(i + 1) * m * k],
                    false,
                    &b[i * k * n..(i + 1) * k * n],
                    trans_b,
                    T::zero(),
                    &mut out[i * m * n..(i + 1) * m * n],
                );
            }
        }
        Ok(Tensor::from_op(
            vec![g, m, n],
            out,
            vec![self.clone(), rhs.clone()],
            Box::new(move |ctx| {
                let a = ctx.inputs[0].data();
                let b = ctx.inputs[1].data();
                let ga = ctx.needs[0].then(|| {
                    let mut ga = vec![T::zero(); g * m * k];
                    for i in 0..g {
                        gemm(
                            m,
                            n,
                            k,
                            &ctx.grad[i * m * n..(i + 1) * m * n],
                            false,
                            &b[i * k * n..(i + 1) * k * n],
                            !trans_b,
                            T::zero(),
                            &mut ga[i * m * k..(i + 1) * m * k],
                        );
                    }
                    ga
                });
                let gb = ctx.needs[1].then(|| {
                    let mut gb = vec![T::zero(); g * k * n];
                    for i in 0..g {
                        let gi = &ctx.grad[i * m * n..(i + 1) * m * n];
                        let ai = &a[i * m * k..(i + 1) * m * k];
                        let dst = &mut gb[i * k * n..(i + 1) * k * n];
                        if trans_b {
                            gemm(n, m, k, gi, true, ai, false, T::zero(), dst);
                        } else {
                            gemm(k, m, n, ai, true, gi, false, T::zero(), dst);
                        }
                    }
                    gb
                });
                vec![ga, gb]
            }),
        ))
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor<T>> {
        if shape.iter().product::<usize>() != self.numel() {
            return Err(Error::shape("reshape", self.shape(), shape));
        }
        Ok(Tensor::from_op(
            shape.to_vec(),
            self.to_vec(),
            vec![self.clone()],
            Box::new(|ctx| vec![Some(ctx.grad.to_vec())]),
        ))
    }

    /// Reorders axes: output axis `i` is input axis `axes[i]`.
    pub fn permute(&self, axes: &[usize]) -> Result<Tensor<T>> {
        let nd = self.ndim();
        let mut seen = vec![false; nd];
        if axes.len() != nd || axes.iter().any(|&a| a >= nd || std::mem::replace(&mut seen[a], true)) {
            return Err(Error::invalid(format!("permute: {axes:?} is not a permutation of {nd} axes")));
        }
        let in_shape = self.shape().to_vec();
        let in_strides = strides(&in_shape);
        let out_shape: Vec<usize> = axes.iter().map(|&a| in_shape[a]).collect();
        // Source offset for each output element, in output order.
        let src_strides: Vec<usize> = axes.iter().map(|&a| in_strides[a]).collect();
        let n = self.numel();
        let mut index = Vec::with_capacity(n);
        let mut counter = vec![0usize; nd];
        let mut offset = 0usize;
        for _ in 0..n {
            index.push(offset);
            for d in (0..nd).rev() {
                counter[d] += 1;
                offset += src_strides[d];
                if counter[d] < out_shape[d] {
                    break;
                }
                offset -= src_strides[d] * counter[d];
                counter[d] = 0;
            }
        }
        let out = {
            let x = self.data();
            index.iter().map(|&i| x[i]).collect()
        };
        Ok(Tensor::from_op(
            out_shape,
            out,
            vec![self.clone()],
            Box::new(move |ctx| {
                let mut g = vec![T::zero(); n];
                for (o, &i) in index.iter().enumerate() {
                    g[i] = ctx.grad[o];
                }
                vec![Some(g)]
            }),
        ))
    }

    /// Slice `[start, start + len)` along `axis`.
    pub fn narrow(&self, axis: usize, start: usize, len: usize) -> Result<Tensor<T>> {
        if axis >= self.ndim() || len == 0 || start + len > self.shape()[axis] {
            return Err(Error::invalid(format!(
                "narrow: axis {axis} range {start}..{} out of bounds for {:?}",
                start + len,
                self.shape()
            )));
        }
        let (outer, n, inner) = split_axis(self.shape(), axis);
        let mut out = Vec::with_capacity(outer * len * inner);
        {
            let x = self.data();
            for o in 0..outer {
                let base = (o * n + start) * inner;
                out.extend_from_slice(&x[base..base + len * inner]);
            }
        }
        let mut shape = self.shape().to_vec();
        shape[axis] = len;
        Ok(Tensor::from_op(
            shape,
            out,
            vec![self.clone()],
            Box::new(move |ctx| {
                let mut g = vec![T::zero(); outer * n * inner];
                for o in 0..outer {
                    let base = (o * n + start) * inner;
                    g[base..base + len * inner].copy_from_slice(&ctx.grad[o * len * inner..(o + 1) * len * inner]);
                }
                vec![Some(g)]
            }),
        ))
    }

    /// Concatenates along `axis`; all other extents must agree.
    pub fn cat(parts: &[Tensor<T>], axis: usize) -> Result<Tensor<T>> {
        let first = parts.first().ok_or_else(|| Error::invalid("cat of zero tensors"))?;
        if axis >= first.ndim() {
            return Err(Error::invalid(format!("cat: axis {axis} out of range")));
        }
        for p in parts {
            let ok = p.ndim() == first.ndim()
                && p.shape().iter().zip(first.shape()).enumerate().all(|(i, (a, b))| i == axis || a == b);
            if !ok {
                return Err(Error::shape("cat", first.shape(), p.shape()));
            }
        }
        let outer: usize = first.shape()[..axis].iter().product();
        let inner: usize = first.shape()[axis + 1..].iter().product();
        let extents: Vec<usize> = parts.iter().map(|p| p.shape()[axis]).collect();
        let total: usize = extents.iter().sum();
        let mut out = Vec::with_capacity(outer * total * inner);
        {
            let datas: Vec<_> = parts.iter().map(|p| p.data()).collect();
            for o in 0..outer {
                for (d, &e) in datas.iter().zip(&extents) {
                    out.extend_from_slice(&d[o * e * inner..(o + 1) * e * inner]);
                }
            }
        }
        let mut shape = first.shape().to_vec();
        shape[axis] = total;
        Ok(Tensor::from_op(
            shape,
            out,
            parts.to_vec(),
            Box::new(move |ctx| {
                let mut grads: Vec<Vec<T>> = extents.iter().map(|&e| Vec::with_capacity(outer * e * inner)).collect();
                let mut pos = 0;
                for _ in 0..outer {
                    for (g, &e) in grads.iter_mut().zip(&extents) {
                        g.extend_from_slice(&ctx.grad[pos..pos + e * inner]);
                        pos += e * inner;
                    }
                }
                grads.into_iter().map(Some).collect()
            }),
        ))
    }

    /// Softmax over the last axis.
    pub fn softmax(&self) -> Tensor<T> {
        let d = *self.shape().last().expect("non-empty shape");
        let mut out = self.to_vec();
        for row in out.chunks_mut(d) {
            let max = row.iter().copied().fold(T::neg_infinity(), T::max);
            let mut s = T::zero();
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                s += *v;
            }
            row.iter_mut().for_each(|v| *v /= s);
        }
        Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(move |ctx| {
                let mut g = vec![T::zero(); ctx.grad.len()];
                for ((gi, go), y) in g.chunks_mut(d).zip(ctx.grad.chunks(d)).zip(ctx.output.chunks(d)) {
                    let dot: T = go.iter().zip(y).map(|(&a, &b)| a * b).sum();
                    for j in 0..d {
                        gi[j] = y[j] * (go[j] - dot);
                    }
                }
                vec![Some(g)]
            }),
        )
    }

    /// Log-softmax over the last axis.
    pub fn log_softmax(&self) -> Tensor<T> {
        let d = *self.shape().last().expect("non-empty shape");
        let mut out = self.to_vec();
        for row in out.chunks_mut(d) {
            let max = row.iter().copied().fold(T::neg_infinity(), T::max);
            let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<T>().ln();
            row.iter_mut().for_each(|v| *v -= lse);
        }
        Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(move |ctx| {
                let mut g = vec![T::zero(); ctx.grad.len()];
                for ((gi, go), y) in g.chunks_mut(d).zip(ctx.grad.chunks(d)).zip(ctx.output.chunks(d)) {
                    let s: T = go.iter().copied().sum();
                    for j in 0..d {
                        gi[j] = go[j] - y[j].exp() * s;
                    }
                }
                vec![Some(g)]
            }),
        )
    }

    /// Mean softmax cross-entropy of `[n, c]` logits against class indices.
    pub fn cross_entropy(&self, targets: &[usize]) -> Result<Tensor<T>> {
        if self.ndim() != 2 || self.shape()[0] != targets.len() {
            return Err(Error::shape("cross_entropy", &[targets.len(), 0], self.shape()));
        }
        let (n, c) = (self.shape()[0], self.shape()[1]);
        if let Some(&bad) = targets.iter().find(|&&t| t >= c) {
            return Err(Error::invalid(format!("cross_entropy: target {bad} >= {c} classes")));
        }
        let mut probs = self.to_vec();
        let mut loss = T::zero();
        for (row, &t) in probs.chunks_mut(c).zip(targets) {
            let max = row.iter().copied().fold(T::neg_infinity(), T::max);
            let mut s = T::zero();
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                s += *v;
            }
            row.iter_mut().for_each(|v| *v /= s);
            loss -= row[t].ln();
        }
        let inv_n: T = cast(1.0 / n as f64);
        let targets = targets.to_vec();
        Ok(Tensor::from_op(
            vec![1],
            vec![loss * inv_n],
            vec![self.clone()],
            Box::new(move |ctx| {
                let scale = ctx.grad[0] * inv_n;
                let mut g = probs.clone();
                for (row, &t) in g.chunks_mut(c).zip(&targets) {
                    row[t] -= T::one();
                    row.iter_mut().for_each(|v| *v *= scale);
                }
                vec![Some(g)]
            }),
        ))
    }

    /// Scales each last-axis row to unit Euclidean norm (rows with norm
    /// below `eps` are divided by `eps`).
    pub fn normalize_rows(&self, eps: f64) -> Tensor<T> {
        let d = *self.shape().last().expect("non-empty shape");
        let eps: T = cast(eps);
        let x = self.to_vec();
        let norms: Vec<T> = x
            .chunks(d)
            .map(|r| r.iter().map(|&v| v * v).sum::<T>().sqrt().max(eps))
            .collect();
        let out: Vec<T> = x
            .chunks(d)
            .zip(&norms)
            .flat_map(|(r, &n)| r.iter().map(move |&v| v / n))
            .collect();
        Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(move |ctx| {
                let mut g = vec![T::zero(); ctx.grad.len()];
                for (((gi, go), y), (&n, xr)) in g
                    .chunks_mut(d)
                    .zip(ctx.grad.chunks(d))
                    .zip(ctx.output.chunks(d))
                    .zip(norms.iter().zip(x.chunks(d)))
                {
                    let raw_norm = xr.iter().map(|&v| v * v).sum::<T>().sqrt();
                    if raw_norm < eps {
                        gi.iter_mut().zip(go).for_each(|(a, &b)| *a = b / n);
                    } else {
                        let dot: T = go.iter().zip(y).map(|(&a, &b)| a * b).sum();
                        for j in 0..d {
                            gi[j] = (go[j] - y[j] * dot) / n;
                        }
                    }
                }
                vec![Some(g)]
            }),
        )
    }

    /// Inverted dropout. Identity when `train` is false or `rate` is zero.
    pub fn dropout(&self, rate: f64, train: bool, rng: &mut impl Rng) -> Result<Tensor<T>> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::invalid(format!("dropout rate {rate} outside [0, 1)")));
        }
        if !train || rate == 0.0 {
            return Ok(self.clone());
        }
        let keep: T = cast(1.0 / (1.0 - rate));
        let mask: Vec<T> = (0..self.numel())
            .map(|_| if rng.random::<f64>() < rate { T::zero() } else { keep })
            .collect();
        let out = self.data().iter().zip(&mask).map(|(&x, &m)| x * m).collect();
        Ok(Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(move |ctx| vec![Some(ctx.grad.iter().zip(&mask).map(|(&g, &m)| g * m).collect())]),
        ))
    }
}
