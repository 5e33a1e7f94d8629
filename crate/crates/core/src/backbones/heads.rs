use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{BatchNorm1d, Init, Linear, Module, Parameter, Scalar, Tensor};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub depth: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
}

impl HeadConfig {
    pub fn projector() -> Self {
        HeadConfig { depth: 2, hidden_dim: 256, output_dim: 128 }
    }

    pub fn predictor() -> Self {
        HeadConfig { depth: 2, hidden_dim: 64, output_dim: 128 }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(1..=4).contains(&self.depth) {
            return Err(Error::config(format!("{field}.depth"), format!("must be in 1..=4, got {}", self.depth)));
        }
        if self.hidden_dim == 0 || self.output_dim == 0 {
            return Err(Error::config(format!("{field}.hidden_dim"), "dimensions must be positive"));
        }
        Ok(())
    }
}

/// `depth - 1` blocks of `linear -> bn -> relu`, then a final linear.
/// Serves as both projection and predictor head.
pub struct MlpHead<T: Scalar> {
    blocks: Vec<(Linear<T>, BatchNorm1d<T>)>,
    last: Linear<T>,
    pub config: HeadConfig,
}

pub type ProjectionHead<T> = MlpHead<T>;
pub type PredictorHead<T> = MlpHead<T>;

impl<T: Scalar> MlpHead<T> {
    pub fn new(name: &str, input_dim: usize, config: &HeadConfig, init: &mut Init) -> Result<Self> {
        config.validate(name)?;
        let mut blocks = Vec::with_capacity(config.depth - 1);
        let mut dim = input_dim;
        for i in 0..config.depth - 1 {
            blocks.push((
                Linear::new(&format!("{name}.fc{i}"), dim, config.hidden_dim, true, init)?,
                BatchNorm1d::new(&format!("{name}.bn{i}"), config.hidden_dim)?,
            ));
            dim = config.hidden_dim;
        }
        let last = Linear::new(&format!("{name}.fc{}", config.depth - 1), dim, config.output_dim, true, init)?;
        Ok(MlpHead { blocks, last, config: config.clone() })
    }

    pub fn forward(&self, x: &Tensor<T>, train: bool) -> Result<Tensor<T>> {
        let mut h = x.clone();
        for (fc, bn) in &self.blocks {
            h = bn.forward(&fc.forward(&h)?, train)?.relu();
        }
        self.last.forward(&h)
    }

    pub fn output_dim(&self) -> usize {
        self.config.output_dim
    }
}

impl<T: Scalar> Module<T> for MlpHead<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        let mut p = vec![];
        for (fc, bn) in &self.blocks {
            p.extend(fc.parameters());
            p.extend(bn.parameters());
        }
        p.extend(self.last.parameters());
        p
    }

    fn buffers(&self) -> Vec<Parameter<T>> {
        self.blocks.iter().flat_map(|(_, bn)| bn.buffers()).collect()
    }
}
