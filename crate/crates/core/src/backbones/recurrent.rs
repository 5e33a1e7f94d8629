use super::config::EncoderConfig;
use crate::error::{Error, Result};
use crate::numcore::{Conv1d, ForwardCtx, Init, Lstm, Module, Parameter, Scalar, Tensor};

fn last_step<T: Scalar>(h: &Tensor<T>) -> Result<Tensor<T>> {
    let (batch, steps, hidden) = (h.shape()[0], h.shape()[1], h.shape()[2]);
    h.narrow(1, steps - 1, 1)?.reshape(&[batch, hidden])
}

pub(crate) struct LstmNet<T: Scalar> {
    pub lstm: Lstm<T>,
}

impl<T: Scalar> LstmNet<T> {
    pub fn new(cfg: &EncoderConfig, init: &mut Init) -> Result<Self> {
        Ok(LstmNet { lstm: Lstm::new("encoder.lstm", cfg.input_channels, cfg.lstm_hidden, cfg.lstm_layers, init)? })
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        last_step(&self.lstm.forward(x)?)
    }
}

impl<T: Scalar> Module<T> for LstmNet<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        self.lstm.parameters()
    }
}

/// Per-sensor temporal convolutions (shared across channels, no padding)
/// feeding a stacked LSTM.
pub(crate) struct DeepConvLstmNet<T: Scalar> {
    convs: Vec<Conv1d<T>>,
    lstm: Lstm<T>,
    filters: usize,
    dropout: f64,
    pub steps: usize,
}

impl<T: Scalar> DeepConvLstmNet<T> {
    pub fn new(cfg: &EncoderConfig, init: &mut Init) -> Result<Self> {
        let shrink = cfg.dcl_conv_layers * (cfg.dcl_kernel - 1);
        if cfg.input_length <= shrink {
            return Err(Error::UnsupportedGeometry(format!(
                "deepconvlstm needs length > {shrink}, got {}",
                cfg.input_length
            )));
        }
        let convs = (0..cfg.dcl_conv_layers)
            .map(|i| {
                let in_ch = if i == 0 { 1 } else { cfg.dcl_filters };
                Conv1d::new(&format!("encoder.conv{i}"), in_ch, cfg.dcl_filters, cfg.dcl_kernel, 1, 0, init)
            })
            .collect::<Result<Vec<_>>>()?;
        let lstm = Lstm::new("encoder.lstm", cfg.dcl_filters * cfg.input_channels, cfg.lstm_hidden, cfg.lstm_layers, init)?;
        Ok(DeepConvLstmNet { convs, lstm, filters: cfg.dcl_filters, dropout: cfg.dcl_dropout, steps: cfg.input_length - shrink })
    }

    pub fn forward(&self, x: &Tensor<T>, ctx: &mut ForwardCtx) -> Result<Tensor<T>> {
        let (batch, len, d) = (x.shape()[0], x.shape()[1], x.shape()[2]);
        let mut h = x.permute(&[0, 2, 1])?.reshape(&[batch * d, 1, len])?;
        for conv in &self.convs {
            h = conv.forward(&h)?.relu();
        }
        // [B*D, F, T'] -> [B, T', D*F]
        let h = h
            .reshape(&[batch, d, self.filters, self.steps])?
            .permute(&[0, 3, 1, 2])?
            .reshape(&[batch, self.steps, d * self.filters])?;
        let h = h.dropout(self.dropout, ctx.train, &mut ctx.rng)?;
        last_step(&self.lstm.forward(&h)?)
    }
}

impl<T: Scalar> Module<T> for DeepConvLstmNet<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        let mut p: Vec<_> = self.convs.iter().flat_map(|c| c.parameters()).collect();
        p.extend(self.lstm.parameters());
        p
    }
}
