//! The sixteen augmentation transforms and the DFT they rely on.
//!
//! Every random draw comes from a ChaCha8 stream seeded with
//! [`AugmentationSpec::rng_seed`], so a spec applied twice to the same
//! window yields bit-identical output.

mod fft;
mod freq;
mod spec;
mod time;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use fft::{dft_direct, dft_forward, dft_inverse, fft, folded, inverse_complex, Spectrum, RESIDUE_TOLERANCE};
pub use freq::{is_low_bin, window_bins, window_spectra};
pub use spec::{AugKind, AugParams, AugmentationSpec};
pub use time::{pchip, rodrigues};

use crate::data::TimeSeriesWindow;
use crate::error::{Error, Result};

pub fn apply_time_aug(spec: &AugmentationSpec, w: &TimeSeriesWindow) -> Result<TimeSeriesWindow> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    time::apply(spec.kind, w, &spec.params, &mut rng)
}

pub fn apply_freq_aug(spec: &AugmentationSpec, w: &TimeSeriesWindow) -> Result<TimeSeriesWindow> {
    if !spec.kind.is_frequency() {
        return Err(Error::invalid(format!("`{}` is not a frequency-domain transform", spec.kind)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    freq::apply(spec.kind, w, &spec.params, &mut rng)
}

/// Dispatches on the transform's domain.
pub fn apply(spec: &AugmentationSpec, w: &TimeSeriesWindow) -> Result<TimeSeriesWindow> {
    if spec.kind.is_frequency() {
        apply_freq_aug(spec, w)
    } else {
        apply_time_aug(spec, w)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairMode {
    /// One augmented view against the raw window.
    #[serde(rename = "1aug")]
    OneAug,
    #[default]
    #[serde(rename = "2augs")]
    TwoAugs,
}

impl std::str::FromStr for PairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1aug" => Ok(PairMode::OneAug),
            "2augs" => Ok(PairMode::TwoAugs),
            other => Err(Error::invalid(format!("unknown pair mode `{other}` (expected 1aug or 2augs)"))),
        }
    }
}

impl std::fmt::Display for PairMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PairMode::OneAug => "1aug",
            PairMode::TwoAugs => "2augs",
        })
    }
}

/// `(T1(x), T2(x))`, or `(T1(x), x)` in single-augmentation mode.
pub fn make_views(
    w: &TimeSeriesWindow,
    spec1: &AugmentationSpec,
    spec2: &AugmentationSpec,
    mode: PairMode,
) -> Result<(TimeSeriesWindow, TimeSeriesWindow)> {
    let a = apply(spec1, w)?;
    let b = match mode {
        PairMode::OneAug => w.clone(),
        PairMode::TwoAugs => apply(spec2, w)?,
    };
    Ok((a, b))
}

#[cfg(test)]
mod tests;
