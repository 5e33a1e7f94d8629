use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugKind {
    Noise,
    Scale,
    Shuffle,
    Negate,
    Permute,
    Resample,
    Rotation,
    TFlip,
    TWarp,
    PermJit,
    JitScal,
    Hfc,
    Lfc,
    PShift,
    ApP,
    ApF,
    Identity,
}

impl AugKind {
    pub const TIME: [AugKind; 11] = [
        AugKind::Noise,
        AugKind::Scale,
        AugKind::Shuffle,
        AugKind::Negate,
        AugKind::Permute,
        AugKind::Resample,
        AugKind::Rotation,
        AugKind::TFlip,
        AugKind::TWarp,
        AugKind::PermJit,
        AugKind::JitScal,
    ];
    pub const FREQUENCY: [AugKind; 5] = [AugKind::Hfc, AugKind::Lfc, AugKind::PShift, AugKind::ApP, AugKind::ApF];

    /// All sixteen transforms, time-domain first.
    pub fn all() -> impl Iterator<Item = AugKind> {
        Self::TIME.into_iter().chain(Self::FREQUENCY)
    }

    pub fn is_frequency(self) -> bool {
        Self::FREQUENCY.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            AugKind::Noise => "noise",
            AugKind::Scale => "scale",
            AugKind::Shuffle => "shuffle",
            AugKind::Negate => "negate",
            AugKind::Permute => "permute",
            AugKind::Resample => "resample",
            AugKind::Rotation => "rotation",
            AugKind::TFlip => "t_flip",
            AugKind::TWarp => "t_warp",
            AugKind::PermJit => "perm_jit",
            AugKind::JitScal => "jit_scal",
            AugKind::Hfc => "hfc",
            AugKind::Lfc => "lfc",
            AugKind::PShift => "p_shift",
            AugKind::ApP => "ap_p",
            AugKind::ApF => "ap_f",
            AugKind::Identity => "identity",
        }
    }
}

impl fmt::Display for AugKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        AugKind::all()
            .chain([AugKind::Identity])
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown augmentation `{s}`")))
    }
}

/// Distribution parameters of the random transforms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugParams {
    pub noise_std: f64,
    pub scale_mean: f64,
    pub scale_std: f64,
    pub max_segments: usize,
    pub min_segment_len: usize,
    pub resample_factor: usize,
    pub warp_knots: usize,
    pub warp_sigma: f64,
    pub ap_amplitude_std: f64,
    /// Half-width of the uniform phase perturbation.
    pub ap_phase_range: f64,
}

impl Default for AugParams {
    fn default() -> Self {
        AugParams {
            noise_std: 0.8,
            scale_mean: 2.0,
            scale_std: 1.1,
            max_segments: 5,
            min_segment_len: 2,
            resample_factor: 3,
            warp_knots: 4,
            warp_sigma: 0.2,
            ap_amplitude_std: 0.8,
            ap_phase_range: std::f64::consts::PI,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub kind: AugKind,
    pub rng_seed: u64,
    #[serde(default)]
    pub params: AugParams,
}

impl AugmentationSpec {
    pub fn new(kind: AugKind, rng_seed: u64) -> Self {
        AugmentationSpec { kind, rng_seed, params: AugParams::default() }
    }

    pub fn with_seed(&self, rng_seed: u64) -> Self {
        AugmentationSpec { rng_seed, ..self.clone() }
    }
}
