use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ema::{copy_state, ema_update};
use super::loss::{byol_simsiam_loss, cross_view_nce, info_nce, info_nce_one_sided};
use super::queue::SupportQueue;
use crate::backbones::{Encoder, EncoderConfig, HeadConfig, MlpHead};
use crate::error::{Error, Result};
use crate::numcore::{ForwardCtx, Module, Parameter, Scalar, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framework {
    SimClr,
    Nnclr,
    Byol,
    SimSiam,
}

impl Framework {
    pub const ALL: [Framework; 4] = [Framework::SimClr, Framework::Nnclr, Framework::Byol, Framework::SimSiam];

    pub fn name(self) -> &'static str {
        match self {
            Framework::SimClr => "simclr",
            Framework::Nnclr => "nnclr",
            Framework::Byol => "byol",
            Framework::SimSiam => "simsiam",
        }
    }

    pub fn has_predictor(self) -> bool {
        !matches!(self, Framework::SimClr)
    }

    pub fn uses_negatives(self) -> bool {
        matches!(self, Framework::SimClr | Framework::Nnclr)
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Framework {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Framework::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown framework `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContrastiveConfig {
    pub framework: Framework,
    pub temperature: f64,
    /// Average the loss over both view orders.
    pub symmetrize: bool,
    pub ema_momentum: f64,
    pub queue_size: usize,
    pub projector: HeadConfig,
    pub predictor: HeadConfig,
    /// Weight of the reconstruction term for autoencoding backbones.
    pub recon_weight: f64,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        ContrastiveConfig {
            framework: Framework::SimClr,
            temperature: 0.1,
            symmetrize: true,
            ema_momentum: 0.996,
            queue_size: 1024,
            projector: HeadConfig::projector(),
            predictor: HeadConfig::predictor(),
            recon_weight: 1.0,
        }
    }
}

impl ContrastiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) {
            return Err(Error::config("temperature", format!("must be positive, got {}", self.temperature)));
        }
        if !(0.0..=1.0).contains(&self.ema_momentum) {
            return Err(Error::config("ema_momentum", format!("must be in [0, 1], got {}", self.ema_momentum)));
        }
        if self.queue_size == 0 {
            return Err(Error::config("queue_size", "must be positive"));
        }
        if !(self.recon_weight >= 0.0) {
            return Err(Error::config("recon_weight", "must be non-negative"));
        }
        self.projector.validate("projector")?;
        self.predictor.validate("predictor")
    }
}

/// Momentum copy of the online encoder and projector.
pub struct TargetNetwork<T: Scalar> {
    pub encoder: Encoder<T>,
    pub projector: MlpHead<T>,
    pub momentum: f64,
}

impl<T: Scalar> TargetNetwork<T> {
    pub fn parameters(&self) -> Vec<Parameter<T>> {
        let mut p = self.encoder.parameters();
        p.extend(self.projector.parameters());
        p
    }
}

pub struct ContrastiveModel<T: Scalar = f32> {
    pub config: ContrastiveConfig,
    pub encoder: Encoder<T>,
    pub projector: MlpHead<T>,
    pub predictor: Option<MlpHead<T>>,
    pub target: Option<TargetNetwork<T>>,
    pub queue: Option<SupportQueue<T>>,
}

/// Projections of one view through the online network.
struct ViewOut<T: Scalar> {
    z: Tensor<T>,
    p: Option<Tensor<T>>,
    recon: Option<Tensor<T>>,
}

impl<T: Scalar> ContrastiveModel<T> {
    pub fn new(config: &ContrastiveConfig, encoder_config: &EncoderConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let encoder = Encoder::build(encoder_config, seed)?;
        let mut init = crate::numcore::Init::new(seed ^ 0x9e37_79b9_7f4a_7c15);
        let projector = MlpHead::new("projector", encoder.feature_dim(), &config.projector, &mut init)?;
        let z_dim = projector.output_dim();
        let predictor = if config.framework.has_predictor() {
            let cfg = HeadConfig { output_dim: z_dim, ..config.predictor.clone() };
            Some(MlpHead::new("predictor", z_dim, &cfg, &mut init)?)
        } else {
            None
        };
        let target = if config.framework == Framework::Byol {
            let t_enc = Encoder::build(encoder_config, seed)?;
            let t_proj = MlpHead::new("projector", encoder.feature_dim(), &config.projector, &mut init)?;
            copy_state(&t_enc.state(), &encoder.state())?;
            copy_state(&t_proj.state(), &projector.state())?;
            let t = TargetNetwork { encoder: t_enc, projector: t_proj, momentum: config.ema_momentum };
            for p in t.parameters() {
                p.tensor.set_requires_grad(false);
            }
            Some(t)
        } else {
            None
        };
        let queue = if config.framework == Framework::Nnclr { Some(SupportQueue::new(config.queue_size, z_dim)?) } else { None };
        Ok(ContrastiveModel { config: config.clone(), encoder, projector, predictor, target, queue })
    }

    pub fn framework(&self) -> Framework {
        self.config.framework
    }

    /// Everything the optimizer updates.
    pub fn online_parameters(&self) -> Vec<Parameter<T>> {
        let mut p = self.encoder.parameters();
        p.extend(self.projector.parameters());
        if let Some(pred) = &self.predictor {
            p.extend(pred.parameters());
        }
        p
    }

    pub fn zero_grad(&self) {
        for p in self.online_parameters() {
            p.tensor.zero_grad();
        }
    }

    fn online(&self, x: &Tensor<T>, ctx: &mut ForwardCtx) -> Result<ViewOut<T>> {
        let (h, recon) = if self.encoder.kind().is_autoencoder() {
            let r = self.encoder.reconstruct(x, ctx)?;
            (r.features, Some(r.loss))
        } else {
            (self.encoder.encode(x, ctx)?, None)
        };
        let z = self.projector.forward(&h, ctx.train)?;
        let p = match &self.predictor {
            Some(pred) => Some(pred.forward(&z, ctx.train)?),
            None => None,
        };
        Ok(ViewOut { z, p, recon })
    }

    fn target_projection(&self, x: &Tensor<T>, ctx: &mut ForwardCtx) -> Result<Tensor<T>> {
        let t = self.target.as_ref().ok_or_else(|| Error::invalid("framework has no target network"))?;
        let h = t.encoder.encode(x, ctx)?;
        Ok(t.projector.forward(&h, ctx.train)?.detach())
    }

    /// Loss for one pair of view batches `[B, L, D]`.
    ///
    /// Returns `None` when the batch only primes the NNCLR support queue.
    /// The queue is pushed after the loss is formed, so a batch never
    /// retrieves its own embeddings.
    pub fn batch_loss(&mut self, view_a: &Tensor<T>, view_b: &Tensor<T>, ctx: &mut ForwardCtx) -> Result<Option<Tensor<T>>> {
        let a = self.online(view_a, ctx)?;
        let b = self.online(view_b, ctx)?;
        let tau = self.config.temperature;
        let sym = self.config.symmetrize;
        let mut loss = match self.config.framework {
            Framework::SimClr => {
                if sym {
                    info_nce(&a.z, &b.z, tau)?
                } else {
                    info_nce_one_sided(&a.z, &b.z, tau)?
                }
            }
            Framework::Nnclr => {
                let queue = self.queue.as_mut().ok_or_else(|| Error::invalid("NNCLR model without a queue"))?;
                if queue.is_empty() {
                    queue.push(&a.z.detach())?;
                    return Ok(None);
                }
                let (p_a, p_b) = (a.p.as_ref().unwrap(), b.p.as_ref().unwrap());
                let l = cross_view_nce(&queue.lookup(&a.z.detach())?, p_b, tau)?;
                let l = if sym { l.add(&cross_view_nce(&queue.lookup(&b.z.detach())?, p_a, tau)?)?.scale(0.5) } else { l };
                queue.push(&a.z.detach())?;
                l
            }
            Framework::Byol => {
                let tz_a = self.target_projection(view_a, ctx)?;
                let tz_b = self.target_projection(view_b, ctx)?;
                byol_simsiam_loss(a.p.as_ref().unwrap(), &tz_b, b.p.as_ref().unwrap(), &tz_a)?
            }
            Framework::SimSiam => byol_simsiam_loss(a.p.as_ref().unwrap(), &b.z.detach(), b.p.as_ref().unwrap(), &a.z.detach())?,
        };
        if let (Some(ra), Some(rb)) = (&a.recon, &b.recon) {
            if self.config.recon_weight > 0.0 {
                loss = loss.add(&ra.add(rb)?.scale(0.5 * self.config.recon_weight))?;
            }
        }
        Ok(Some(loss))
    }

    /// Post-optimizer bookkeeping: the EMA step of the target network.
    pub fn after_update(&self) -> Result<()> {
        if let Some(t) = &self.target {
            let mut online = self.encoder.parameters();
            online.extend(self.projector.parameters());
            ema_update(&t.parameters(), &online, t.momentum)?;
        }
        Ok(())
    }
}
