//! Central finite differences (f64, h = 1e-5) against `backward()` for
//! every differentiable primitive.

use har_cl::numcore::functional as F;
use har_cl::numcore::gradcheck::check_gradients;
use har_cl::numcore::{Parameter, Tensor};
use har_cl::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;
const TOL: f64 = 1e-4;
const FLOOR: f64 = 1e-6;

struct Fixture {
    rng: ChaCha8Rng,
    params: Vec<Parameter<f64>>,
}

impl Fixture {
    fn new(seed: u64) -> Self {
        Fixture { rng: ChaCha8Rng::seed_from_u64(seed), params: vec![] }
    }

    fn param(&mut self, name: &str, shape: &[usize]) -> Tensor<f64> {
        self.param_range(name, shape, -1.0, 1.0)
    }

    fn param_range(&mut self, name: &str, shape: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
        let n = shape.iter().product();
        let data = (0..n).map(|_| self.rng.random_range(lo..hi)).collect();
        let t = Tensor::param(data, shape).unwrap();
        self.params.push(Parameter::new(name, t.clone()));
        t
    }

    /// Random projection turning any output into a scalar.
    fn probe(&mut self, shape: &[usize]) -> Tensor<f64> {
        let n = shape.iter().product();
        Tensor::new((0..n).map(|_| self.rng.random_range(-1.0..1.0)).collect(), shape).unwrap()
    }

    fn check(self, f: impl Fn() -> Result<Tensor<f64>>) -> f64 {
        let report = check_gradients(&self.params, f, H, 64, FLOOR, 7).unwrap();
        assert!(report.entries_checked > 0);
        assert!(report.max_rel_error < TOL, "max relative error {} at {}", report.max_rel_error, report.worst_param);
        report.max_rel_error
    }
}

fn project(y: &Tensor<f64>, probe: &Tensor<f64>) -> Result<Tensor<f64>> {
    Ok(y.mul(probe)?.sum())
}

#[test]
fn elementwise_binary() {
    let mut fx = Fixture::new(1);
    let a = fx.param("a", &[3, 4]);
    let b = fx.param_range("b", &[3, 4], 0.5, 2.0);
    let p = fx.probe(&[3, 4]);
    fx.check(|| {
        let y = a.add(&b)?.mul(&a)?.sub(&b)?.div(&b)?;
        project(&y, &p)
    });
}

#[test]
fn unary_maps() {
    let mut fx = Fixture::new(2);
    let x = fx.param_range("x", &[10], 0.2, 2.0);
    let p = fx.probe(&[10]);
    fx.check(|| {
        let y = x.exp().add(&x.log())?.add(&x.sqrt())?.add(&x.square())?;
        let y = y.add(&x.sigmoid())?.add(&x.tanh())?.add(&x.scale(-0.3).add_scalar(0.1).neg())?;
        project(&y, &p)
    });
}

#[test]
fn relu_away_from_kink() {
    let mut fx = Fixture::new(3);
    let x = fx.param("x", &[20]);
    let p = fx.probe(&[20]);
    fx.check(|| project(&x.relu(), &p));
}

#[test]
fn reductions_and_bias() {
    let mut fx = Fixture::new(4);
    let x = fx.param("x", &[2, 3, 4]);
    let b = fx.param("b", &[3]);
    let p = fx.probe(&[2, 4]);
    fx.check(|| {
        let y = x.add_bias(&b, 1)?.sum_axis(1)?;
        project(&y, &p)?.add(&x.mean_axis(2)?.sum())?.add(&x.mean())
    });
}

#[test]
fn matmul_variants() {
    let mut fx = Fixture::new(5);
    let a = fx.param("a", &[3, 4]);
    let b = fx.param("b", &[4, 5]);
    let c = fx.param("c", &[5, 4]);
    let p = fx.probe(&[3, 5]);
    fx.check(|| {
        let y = a.matmul(&b)?.add(&a.matmul_t(&c)?)?;
        project(&y, &p)
    });
}

#[test]
fn batched_matmul() {
    let mut fx = Fixture::new(6);
    let a = fx.param("a", &[2, 3, 4]);
    let b = fx.param("b", &[2, 4, 5]);
    let c = fx.param("c", &[2, 5, 4]);
    let p = fx.probe(&[2, 3, 5]);
    fx.check(|| {
        let y = a.bmm(&b, false)?.add(&a.bmm(&c, true)?)?;
        project(&y, &p)
    });
}

#[test]
fn shape_ops() {
    let mut fx = Fixture::new(7);
    let x = fx.param("x", &[2, 3, 4]);
    let y = fx.param("y", &[2, 2, 4]);
    let p = fx.probe(&[4, 2, 5]);
    fx.check(|| {
        let z = Tensor::cat(&[x.clone(), y.clone()], 1)?; // [2, 5, 4]
        let z = z.permute(&[2, 0, 1])?; // [4, 2, 5]
        let z = z.reshape(&[8, 5])?.reshape(&[4, 2, 5])?;
        let w = z.narrow(2, 1, 3)?;
        project(&z, &p)?.add(&w.square().sum())
    });
}

#[test]
fn softmax_family() {
    let mut fx = Fixture::new(8);
    let x = fx.param("x", &[4, 5]);
    let p = fx.probe(&[4, 5]);
    fx.check(|| {
        let y = x.softmax().add(&x.log_softmax())?;
        project(&y, &p)?.add(&x.cross_entropy(&[0, 4, 2, 2])?)
    });
}

#[test]
fn row_normalization() {
    let mut fx = Fixture::new(9);
    let x = fx.param("x", &[4, 6]);
    let p = fx.probe(&[4, 6]);
    fx.check(|| project(&x.normalize_rows(1e-8), &p));
}

#[test]
fn dropout_with_fixed_mask() {
    let mut fx = Fixture::new(10);
    let x = fx.param("x", &[30]);
    let p = fx.probe(&[30]);
    fx.check(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        project(&x.dropout(0.35, true, &mut rng)?, &p)
    });
}

#[test]
fn linear_layer() {
    let mut fx = Fixture::new(11);
    let x = fx.param("x", &[2, 3, 4]);
    let w = fx.param("w", &[5, 4]);
    let b = fx.param("b", &[5]);
    let p = fx.probe(&[2, 3, 5]);
    fx.check(|| project(&F::linear(&x, &w, Some(&b))?, &p));
}

#[test]
fn conv1d_strided_padded() {
    let mut fx = Fixture::new(12);
    let x = fx.param("x", &[2, 3, 11]);
    let w = fx.param("w", &[4, 3, 5]);
    let b = fx.param("b", &[4]);
    let out_len = F::conv_out_len(11, 5, 2, 2).unwrap();
    let p = fx.probe(&[2, 4, out_len]);
    fx.check(|| project(&F::conv1d(&x, &w, Some(&b), 2, 2)?, &p));
}

#[test]
fn conv_transpose1d_layer() {
    let mut fx = Fixture::new(13);
    let x = fx.param("x", &[2, 3, 6]);
    let w = fx.param("w", &[3, 2, 4]);
    let b = fx.param("b", &[2]);
    let p = fx.probe(&[2, 2, (6 - 1) * 2 + 4 - 2]);
    fx.check(|| project(&F::conv_transpose1d(&x, &w, Some(&b), 2, 1)?, &p));
}

#[test]
fn max_pool_and_unpool() {
    let mut fx = Fixture::new(14);
    let x = fx.param("x", &[2, 3, 9]);
    let p = fx.probe(&[2, 3, 4]);
    let q = fx.probe(&[2, 3, 9]);
    fx.check(|| {
        let (y, idx) = F::max_pool1d(&x, 2, 2)?;
        let up = F::max_unpool1d(&y, &idx)?;
        project(&y, &p)?.add(&project(&up, &q)?)
    });
}

#[test]
fn batch_norm_train_and_eval() {
    let mut fx = Fixture::new(15);
    let x = fx.param("x", &[4, 3, 5]);
    let g = fx.param_range("gamma", &[3], 0.5, 1.5);
    let b = fx.param("beta", &[3]);
    let p = fx.probe(&[4, 3, 5]);
    let rm = Tensor::new(vec![0.1, -0.2, 0.3], &[3]).unwrap();
    let rv = Tensor::new(vec![1.5, 0.7, 1.1], &[3]).unwrap();
    fx.check(|| {
        let train = F::batch_norm(&x, &g, &b, &rm.detach(), &rv.detach(), true, 0.1, 1e-5)?;
        let eval = F::batch_norm(&x, &g, &b, &rm, &rv, false, 0.1, 1e-5)?;
        project(&train, &p)?.add(&project(&eval, &p)?)
    });
}

#[test]
fn batch_norm_two_dimensional() {
    let mut fx = Fixture::new(16);
    let x = fx.param("x", &[6, 4]);
    let g = fx.param_range("gamma", &[4], 0.5, 1.5);
    let b = fx.param("beta", &[4]);
    let p = fx.probe(&[6, 4]);
    fx.check(|| {
        let rm = Tensor::zeros(&[4]);
        let rv = Tensor::full(&[4], 1.0);
        project(&F::batch_norm(&x, &g, &b, &rm, &rv, true, 0.1, 1e-5)?, &p)
    });
}

#[test]
fn layer_norm_layer() {
    let mut fx = Fixture::new(17);
    let x = fx.param("x", &[3, 6]);
    let g = fx.param_range("gamma", &[6], 0.5, 1.5);
    let b = fx.param("beta", &[6]);
    let p = fx.probe(&[3, 6]);
    fx.check(|| project(&F::layer_norm(&x, &g, &b, 1e-5)?, &p));
}

#[test]
fn lstm_layer_bptt() {
    let mut fx = Fixture::new(18);
    let (batch, steps, input, hidden) = (2, 5, 3, 4);
    let x = fx.param("x", &[batch, steps, input]);
    let w_ih = fx.param("w_ih", &[4 * hidden, input]);
    let w_hh = fx.param("w_hh", &[4 * hidden, hidden]);
    let b_ih = fx.param("b_ih", &[4 * hidden]);
    let b_hh = fx.param("b_hh", &[4 * hidden]);
    let p = fx.probe(&[batch, steps, hidden]);
    fx.check(|| {
        let w = F::LstmWeights { w_ih: &w_ih, w_hh: &w_hh, b_ih: &b_ih, b_hh: &b_hh };
        project(&F::lstm_layer(&x, &w)?, &p)
    });
}

#[test]
fn multi_head_attention_layer() {
    let mut fx = Fixture::new(19);
    let (batch, tokens, dim) = (2, 4, 6);
    let x = fx.param("x", &[batch, tokens, dim]);
    let w_qkv = fx.param("w_qkv", &[3 * dim, dim]);
    let b_qkv = fx.param("b_qkv", &[3 * dim]);
    let w_out = fx.param("w_out", &[dim, dim]);
    let b_out = fx.param("b_out", &[dim]);
    let p = fx.probe(&[batch, tokens, dim]);
    fx.check(|| {
        let w = F::AttentionWeights { w_qkv: &w_qkv, b_qkv: &b_qkv, w_out: &w_out, b_out: &b_out };
        let (y, _) = F::multi_head_attention(&x, &w, 3)?;
        project(&y, &p)
    });
}
