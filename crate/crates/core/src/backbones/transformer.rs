use super::config::EncoderConfig;
use crate::error::Result;
use crate::numcore::{cast, ForwardCtx, Init, LayerNorm, Linear, Module, MultiHeadAttention, Parameter, Scalar, Tensor};

/// Fixed sinusoidal table `[tokens, dim]`.
pub fn sinusoidal_encoding<T: Scalar>(tokens: usize, dim: usize) -> Vec<T> {
    let mut pe = Vec::with_capacity(tokens * dim);
    for pos in 0..tokens {
        for i in 0..dim {
            let rate = 10000f64.powf((2 * (i / 2)) as f64 / dim as f64);
            let a = pos as f64 / rate;
            pe.push(cast(if i % 2 == 0 { a.sin() } else { a.cos() }));
        }
    }
    pe
}

struct EncoderBlock<T: Scalar> {
    attn: MultiHeadAttention<T>,
    norm1: LayerNorm<T>,
    ff1: Linear<T>,
    ff2: Linear<T>,
    norm2: LayerNorm<T>,
}

/// Post-norm transformer encoder with a learned class token.
pub(crate) struct TransformerNet<T: Scalar> {
    embed: Linear<T>,
    cls: Parameter<T>,
    blocks: Vec<EncoderBlock<T>>,
    dropout: f64,
    positional: Option<Vec<T>>,
    dim: usize,
}

impl<T: Scalar> TransformerNet<T> {
    pub fn new(cfg: &EncoderConfig, init: &mut Init) -> Result<Self> {
        let dim = cfg.d_model;
        let blocks = (0..cfg.transformer_blocks)
            .map(|b| {
                let n = format!("encoder.block{b}");
                Ok(EncoderBlock {
                    attn: MultiHeadAttention::new(&format!("{n}.attn"), dim, cfg.heads, init)?,
                    norm1: LayerNorm::new(&format!("{n}.norm1"), dim)?,
                    ff1: Linear::new(&format!("{n}.ff1"), dim, cfg.ffn_dim, true, init)?,
                    ff2: Linear::new(&format!("{n}.ff2"), cfg.ffn_dim, dim, true, init)?,
                    norm2: LayerNorm::new(&format!("{n}.norm2"), dim)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TransformerNet {
            embed: Linear::new("encoder.embed", cfg.input_channels, dim, true, init)?,
            cls: Parameter::new("encoder.cls_token", Tensor::param(init.normal(dim, 0.02), &[1, 1, dim])?),
            blocks,
            dropout: cfg.transformer_dropout,
            positional: cfg.positional_encoding.then(|| sinusoidal_encoding(cfg.input_length + 1, dim)),
            dim,
        })
    }

    /// Class-token features and the attention maps of every block.
    pub fn forward_with_attention(&self, x: &Tensor<T>, ctx: &mut ForwardCtx) -> Result<(Tensor<T>, Vec<Tensor<T>>)> {
        let (batch, len) = (x.shape()[0], x.shape()[1]);
        let tokens = len + 1;
        let e = self.embed.forward(x)?;
        let cls = Tensor::cat(&vec![self.cls.tensor.clone(); batch], 0)?;
        let mut h = Tensor::cat(&[cls, e], 1)?;
        if let Some(pe) = &self.positional {
            let table: Vec<T> = (0..batch).flat_map(|_| pe.iter().copied()).collect();
            h = h.add(&Tensor::new(table, &[batch, tokens, self.dim])?)?;
        }
        h = h.dropout(self.dropout, ctx.train, &mut ctx.rng)?;
        let mut maps = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let (a, attn) = b.attn.forward(&h)?;
            maps.push(attn);
            h = b.norm1.forward(&h.add(&a.dropout(self.dropout, ctx.train, &mut ctx.rng)?)?)?;
            let f = b.ff2.forward(&b.ff1.forward(&h)?.relu())?;
            h = b.norm2.forward(&h.add(&f.dropout(self.dropout, ctx.train, &mut ctx.rng)?)?)?;
        }
        Ok((h.narrow(1, 0, 1)?.reshape(&[batch, self.dim])?, maps))
    }
}

impl<T: Scalar> Module<T> for TransformerNet<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        let mut p = self.embed.parameters();
        p.push(self.cls.clone());
        for b in &self.blocks {
            p.extend(b.attn.parameters());
            p.extend(b.norm1.parameters());
            p.extend(b.ff1.parameters());
            p.extend(b.ff2.parameters());
            p.extend(b.norm2.parameters());
        }
        p
    }
}
