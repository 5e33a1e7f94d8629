use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    DeepConvLstm,
    Lstm,
    Cnn,
    Ae,
    Cae,
    Transformer,
}

impl EncoderKind {
    pub const ALL: [EncoderKind; 6] = [
        EncoderKind::DeepConvLstm,
        EncoderKind::Lstm,
        EncoderKind::Cnn,
        EncoderKind::Ae,
        EncoderKind::Cae,
        EncoderKind::Transformer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::DeepConvLstm => "deepconvlstm",
            EncoderKind::Lstm => "lstm",
            EncoderKind::Cnn => "cnn",
            EncoderKind::Ae => "ae",
            EncoderKind::Cae => "cae",
            EncoderKind::Transformer => "transformer",
        }
    }

    pub fn is_autoencoder(self) -> bool {
        matches!(self, EncoderKind::Ae | EncoderKind::Cae)
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        EncoderKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown backbone `{s}`")))
    }
}

/// Architecture hyperparameters. Fields irrelevant to `kind` are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub kind: EncoderKind,
    pub input_length: usize,
    pub input_channels: usize,

    /// Output channels per conv block; blocks past the end reuse the last.
    pub conv_channels: Vec<usize>,
    pub num_conv_blocks: usize,
    pub kernel_size: usize,
    pub padding: usize,
    pub use_batch_norm: bool,
    pub use_pooling: bool,
    pub conv_dropout: f64,

    pub dcl_filters: usize,
    pub dcl_kernel: usize,
    pub dcl_conv_layers: usize,
    pub dcl_dropout: f64,

    pub lstm_hidden: usize,
    pub lstm_layers: usize,

    pub ae_channel_dim: usize,
    pub ae_bottleneck: usize,

    pub d_model: usize,
    pub heads: usize,
    pub ffn_dim: usize,
    pub transformer_blocks: usize,
    pub transformer_dropout: f64,
    pub positional_encoding: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            kind: EncoderKind::Cnn,
            input_length: 128,
            input_channels: 9,
            conv_channels: vec![32, 64, 64],
            num_conv_blocks: 3,
            kernel_size: 8,
            padding: 4,
            use_batch_norm: true,
            use_pooling: true,
            conv_dropout: 0.35,
            dcl_filters: 5,
            dcl_kernel: 5,
            dcl_conv_layers: 4,
            dcl_dropout: 0.5,
            lstm_hidden: 128,
            lstm_layers: 2,
            ae_channel_dim: 8,
            ae_bottleneck: 128,
            d_model: 128,
            heads: 4,
            ffn_dim: 256,
            transformer_blocks: 4,
            transformer_dropout: 0.1,
            positional_encoding: true,
        }
    }
}

impl EncoderConfig {
    pub fn new(kind: EncoderKind, input_length: usize, input_channels: usize) -> Self {
        EncoderConfig { kind, input_length, input_channels, ..Default::default() }
    }

    pub fn block_channels(&self, block: usize) -> usize {
        let last = *self.conv_channels.last().unwrap_or(&64);
        self.conv_channels.get(block).copied().unwrap_or(last)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_length == 0 || self.input_channels == 0 {
            return Err(Error::config("backbone.input_length", "input length and channels must be positive"));
        }
        if !(1..=6).contains(&self.num_conv_blocks) {
            return Err(Error::config("backbone.num_conv_blocks", format!("must be in 1..=6, got {}", self.num_conv_blocks)));
        }
        if self.conv_channels.is_empty() || self.conv_channels.contains(&0) {
            return Err(Error::config("backbone.conv_channels", "need at least one positive channel count"));
        }
        for (field, rate) in [
            ("backbone.conv_dropout", self.conv_dropout),
            ("backbone.dcl_dropout", self.dcl_dropout),
            ("backbone.transformer_dropout", self.transformer_dropout),
        ] {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::config(field, format!("dropout {rate} outside [0, 1)")));
            }
        }
        if self.heads == 0 || !self.d_model.is_multiple_of(self.heads) {
            return Err(Error::config("backbone.heads", format!("d_model {} not divisible by {} heads", self.d_model, self.heads)));
        }
        let positive = [
            ("backbone.kernel_size", self.kernel_size),
            ("backbone.dcl_filters", self.dcl_filters),
            ("backbone.dcl_kernel", self.dcl_kernel),
            ("backbone.dcl_conv_layers", self.dcl_conv_layers),
            ("backbone.lstm_hidden", self.lstm_hidden),
            ("backbone.lstm_layers", self.lstm_layers),
            ("backbone.ae_channel_dim", self.ae_channel_dim),
            ("backbone.ae_bottleneck", self.ae_bottleneck),
            ("backbone.ffn_dim", self.ffn_dim),
            ("backbone.transformer_blocks", self.transformer_blocks),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(Error::config(field, "must be positive"));
            }
        }
        Ok(())
    }
}
