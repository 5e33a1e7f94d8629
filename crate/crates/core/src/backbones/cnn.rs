use super::config::EncoderConfig;
use crate::error::{Error, Result};
use crate::numcore::functional::{self as F, PoolIndices};
use crate::numcore::{BatchNorm1d, Conv1d, ConvTranspose1d, ForwardCtx, Init, Module, Parameter, Scalar, Tensor};

struct Block<T: Scalar> {
    conv: Conv1d<T>,
    bn: Option<BatchNorm1d<T>>,
}

/// Conv blocks `conv -> [bn] -> relu -> [maxpool 2/2]`, dropout after the
/// first block. Input `[B, L, D]`, output the flattened final map.
pub(crate) struct CnnNet<T: Scalar> {
    blocks: Vec<Block<T>>,
    pooling: bool,
    dropout: f64,
    pub out_channels: usize,
    pub out_len: usize,
}

/// Intermediate lengths and pool indices the decoder needs.
pub(crate) struct CnnTrace {
    pub pools: Vec<Option<PoolIndices>>,
}

impl<T: Scalar> CnnNet<T> {
    pub fn new(cfg: &EncoderConfig, init: &mut Init) -> Result<Self> {
        let mut blocks = Vec::with_capacity(cfg.num_conv_blocks);
        let mut len = cfg.input_length;
        let mut in_ch = cfg.input_channels;
        for b in 0..cfg.num_conv_blocks {
            let out = cfg.block_channels(b);
            let conv = Conv1d::new(&format!("encoder.conv{b}"), in_ch, out, cfg.kernel_size, 1, cfg.padding, init)?;
            len = conv.out_len(len).ok_or_else(|| {
                Error::UnsupportedGeometry(format!("conv block {b} receives length {len}, shorter than kernel {}", cfg.kernel_size))
            })?;
            if cfg.use_pooling {
                len /= 2;
                if len == 0 {
                    return Err(Error::UnsupportedGeometry(format!(
                        "pooling in block {b} reduces length {} below 1",
                        cfg.input_length
                    )));
                }
            }
            let bn = if cfg.use_batch_norm { Some(BatchNorm1d::new(&format!("encoder.bn{b}"), out)?) } else { None };
            blocks.push(Block { conv, bn });
            in_ch = out;
        }
        Ok(CnnNet { blocks, pooling: cfg.use_pooling, dropout: cfg.conv_dropout, out_channels: in_ch, out_len: len })
    }

    pub fn feature_dim(&self) -> usize {
        self.out_channels * self.out_len
    }

    /// Final map `[B, C, L']` plus the trace for unpooling.
    pub fn forward_map(&self, x: &Tensor<T>, ctx: &mut ForwardCtx) -> Result<(Tensor<T>, CnnTrace)> {
        let mut h = x.permute(&[0, 2, 1])?;
        let mut pools = Vec::with_capacity(self.blocks.len());
        for (b, block) in self.blocks.iter().enumerate() {
            h = block.conv.forward(&h)?;
            if let Some(bn) = &block.bn {
                h = bn.forward(&h, ctx.train)?;
            }
            h = h.relu();
            if self.pooling {
                let (p, idx) = F::max_pool1d(&h, 2, 2)?;
                h = p;
                pools.push(Some(idx));
            } else {
                pools.push(None);
            }
            if b == 0 && self.dropout > 0.0 {
                h = h.dropout(self.dropout, ctx.train, &mut ctx.rng)?;
            }
        }
        Ok((h, CnnTrace { pools }))
    }

    pub fn forward(&self, x: &Tensor<T>, ctx: &mut ForwardCtx) -> Result<Tensor<T>> {
        let (h, _) = self.forward_map(x, ctx)?;
        let batch = h.shape()[0];
        h.reshape(&[batch, self.feature_dim()])
    }
}

impl<T: Scalar> Module<T> for CnnNet<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        let mut p = vec![];
        for b in &self.blocks {
            p.extend(b.conv.parameters());
            if let Some(bn) = &b.bn {
                p.extend(bn.parameters());
            }
        }
        p
    }

    fn buffers(&self) -> Vec<Parameter<T>> {
        self.blocks.iter().filter_map(|b| b.bn.as_ref()).flat_map(|bn| bn.buffers()).collect()
    }
}

struct DecoderLayer<T: Scalar> {
    deconv: ConvTranspose1d<T>,
    bn: Option<BatchNorm1d<T>>,
    last: bool,
}

/// Mirror of the CNN encoder: `unpool -> conv^T -> bn -> relu` per block,
/// plain `conv^T` for the layer producing the input channels.
pub(crate) struct CaeDecoder<T: Scalar> {
    layers: Vec<DecoderLayer<T>>,
}

impl<T: Scalar> CaeDecoder<T> {
    pub fn new(cfg: &EncoderConfig, init: &mut Init) -> Result<Self> {
        let n = cfg.num_conv_blocks;
        let mut layers = Vec::with_capacity(n);
        for b in (0..n).rev() {
            let in_ch = cfg.block_channels(b);
            let out_ch = if b == 0 { cfg.input_channels } else { cfg.block_channels(b - 1) };
            let deconv = ConvTranspose1d::new(&format!("decoder.deconv{b}"), in_ch, out_ch, cfg.kernel_size, 1, cfg.padding, init)?;
            let last = b == 0;
            let bn = if !last && cfg.use_batch_norm { Some(BatchNorm1d::new(&format!("decoder.bn{b}"), out_ch)?) } else { None };
            layers.push(DecoderLayer { deconv, bn, last });
        }
        Ok(CaeDecoder { layers })
    }

    /// Maps the final encoder map back to `[B, L, D]`.
    pub fn forward(&self, map: &Tensor<T>, trace: &CnnTrace, train: bool, input_len: usize) -> Result<Tensor<T>> {
        let mut h = map.clone();
        for (layer, pool) in self.layers.iter().zip(trace.pools.iter().rev()) {
            if let Some(idx) = pool {
                h = F::max_unpool1d(&h, idx)?;
            }
            h = layer.deconv.forward(&h)?;
            if let Some(bn) = &layer.bn {
                h = bn.forward(&h, train)?;
            }
            if !layer.last {
                h = h.relu();
            }
        }
        if h.shape()[2] != input_len {
            return Err(Error::UnsupportedGeometry(format!(
                "decoder produced length {} for input length {input_len}; kernel/padding do not invert",
                h.shape()[2]
            )));
        }
        h.permute(&[0, 2, 1])
    }
}

impl<T: Scalar> Module<T> for CaeDecoder<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        let mut p = vec![];
        for l in &self.layers {
            p.extend(l.deconv.parameters());
            if let Some(bn) = &l.bn {
                p.extend(bn.parameters());
            }
        }
        p
    }

    fn buffers(&self) -> Vec<Parameter<T>> {
        self.layers.iter().filter_map(|l| l.bn.as_ref()).flat_map(|bn| bn.buffers()).collect()
    }
}
