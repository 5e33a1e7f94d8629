use serde::{Deserialize, Serialize};

use super::layers::Parameter;
use super::scalar::{cast, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty added to the gradient before the moment updates.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, weight_decay: 0.0 }
    }
}

struct Moments<T> {
    name: String,
    first: Vec<T>,
    second: Vec<T>,
}

/// Adam optimizer state; moment buffers are created on the first step and
/// bound to parameters by name and position.
pub struct AdamState<T: Scalar> {
    pub config: AdamConfig,
    step_count: u64,
    moments: Vec<Moments<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(config: AdamConfig) -> Self {
        AdamState { config, step_count: 0, moments: Vec::new() }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected Adam update of every parameter in `params`.
    pub fn step(&mut self, params: &[Parameter<T>]) -> Result<()> {
        for p in params {
            if p.tensor.grad_ref().is_none() {
                return Err(Error::MissingGrad(p.name.clone()));
            }
        }
        if self.moments.is_empty() {
            self.moments = params
                .iter()
                .map(|p| Moments {
                    name: p.name.clone(),
                    first: vec![T::zero(); p.tensor.numel()],
                    second: vec![T::zero(); p.tensor.numel()],
                })
                .collect();
        }
        if self.moments.len() != params.len()
            || self.moments.iter().zip(params).any(|(m, p)| m.name != p.name || m.first.len() != p.tensor.numel())
        {
            return Err(Error::invalid("adam: parameter list differs from the one seen at the first step"));
        }
        self.step_count += 1;
        let c = self.config;
        let t = self.step_count as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        let (b1, b2): (T, T) = (cast(c.beta1), cast(c.beta2));
        let (lr, eps, wd): (T, T, T) = (cast(c.lr), cast(c.epsilon), cast(c.weight_decay));
        let (inv_bc1, inv_bc2): (T, T) = (cast(1.0 / bc1), cast(1.0 / bc2));
        for (m, p) in self.moments.iter_mut().zip(params) {
            let grad = p.tensor.grad_ref();
            let grad = grad.as_ref().expect("checked above");
            let mut theta = p.tensor.data_mut();
            for i in 0..theta.len() {
                let g = grad[i] + wd * theta[i];
                m.first[i] = b1 * m.first[i] + (T::one() - b1) * g;
                m.second[i] = b2 * m.second[i] + (T::one() - b2) * g * g;
                let m_hat = m.first[i] * inv_bc1;
                let v_hat = m.second[i] * inv_bc2;
                theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::Tensor;

    fn scalar_param(v: f64, g: Option<f64>) -> Parameter<f64> {
        let t = Tensor::param(vec![v], &[1]).unwrap();
        if let Some(g) = g {
            t.zero_grad();
            t.backward_from_grad_for_tests(g);
        }
        Parameter::new("theta", t)
    }

    impl Tensor<f64> {
        fn backward_from_grad_for_tests(&self, g: f64) {
            self.scale(g).sum().backward().unwrap();
        }
    }

    #[test]
    fn first_step_closed_form() {
        let p = scalar_param(0.0, Some(1.0));
        let mut adam = AdamState::new(AdamConfig::default());
        adam.step(std::slice::from_ref(&p)).unwrap();
        assert!((p.tensor.item() + 1e-3).abs() < 1e-9);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let p = scalar_param(0.7, Some(0.0));
        let mut adam = AdamState::new(AdamConfig::default());
        for _ in 0..5 {
            adam.step(std::slice::from_ref(&p)).unwrap();
        }
        assert_eq!(p.tensor.item(), 0.7);
    }

    #[test]
    fn constant_gradient_descends_monotonically() {
        // Scalar simulation of the same recursion.
        let (b1, b2, lr, eps) = (0.9f64, 0.999f64, 1e-3, 1e-8);
        let (mut m, mut v, mut theta) = (0.0, 0.0, 0.0);
        let mut expected = vec![];
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1);
            v = b2 * v + (1.0 - b2);
            theta -= lr * (m / (1.0 - b1.powi(t))) / ((v / (1.0 - b2.powi(t))).sqrt() + eps);
            expected.push(theta);
        }
        let p = scalar_param(0.0, Some(1.0));
        let mut adam = AdamState::new(AdamConfig::default());
        let mut prev = 0.0;
        for e in expected {
            adam.step(std::slice::from_ref(&p)).unwrap();
            let now = p.tensor.item();
            assert!(now < prev);
            assert!((now - e).abs() < 1e-15);
            prev = now;
        }
    }

    #[test]
    fn missing_gradient_is_an_error() {
        let p = scalar_param(1.0, None);
        let mut adam = AdamState::new(AdamConfig::default());
        assert!(matches!(adam.step(&[p]), Err(Error::MissingGrad(_))));
        assert_eq!(adam.step_count(), 0);
    }

    #[test]
    fn weight_decay_enters_the_gradient() {
        let p = scalar_param(2.0, Some(0.0));
        let mut adam = AdamState::new(AdamConfig { weight_decay: 0.5, ..AdamConfig::default() });
        adam.step(std::slice::from_ref(&p)).unwrap();
        // g = 0 + 0.5 * 2 > 0, so the first step moves by -lr.
        assert!((p.tensor.item() - (2.0 - 1e-3)).abs() < 1e-9);
    }
}
