//! Central finite-difference gradient checking in 64-bit precision.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::Parameter;
use super::tensor::{no_grad, Tensor};
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_param: String,
    pub entries_checked: usize,
}

/// Relative error with an absolute floor so that entries whose true
/// gradient is ~0 are compared on an absolute scale.
pub fn rel_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares `backward()` of `loss_fn` against central differences with step
/// `h`, probing at most `max_entries` coordinates of every parameter.
///
/// `loss_fn` must be a deterministic function of the parameter values.
pub fn check_gradients(
    params: &[Parameter<f64>],
    loss_fn: impl Fn() -> Result<Tensor<f64>>,
    h: f64,
    max_entries: usize,
    floor: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    for p in params {
        p.tensor.zero_grad();
    }
    loss_fn()?.backward()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradCheckReport { max_rel_error: 0.0, worst_param: String::new(), entries_checked: 0 };
    for p in params {
        let analytic = p.tensor.grad_or_zeros();
        let n = p.tensor.numel();
        let picks: Vec<usize> = if n <= max_entries { (0..n).collect() } else { sample(&mut rng, n, max_entries).into_vec() };
        for i in picks {
            let orig = p.tensor.data()[i];
            p.tensor.data_mut()[i] = orig + h;
            let plus = no_grad(&loss_fn)?.item();
            p.tensor.data_mut()[i] = orig - h;
            let minus = no_grad(&loss_fn)?.item();
            p.tensor.data_mut()[i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let e = rel_error(analytic[i], numeric, floor);
            report.entries_checked += 1;
            if e > report.max_rel_error {
                report.max_rel_error = e;
                report.worst_param = format!("{}[{i}] analytic={:e} numeric={:e}", p.name, analytic[i], numeric);
            }
        }
    }
    Ok(report)
}
