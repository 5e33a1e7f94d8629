use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::fft::{fft, folded, inverse_complex, Spectrum};
use super::spec::{AugKind, AugParams};
use crate::data::TimeSeriesWindow;
use crate::error::{Error, Result};

/// Complex bins of every channel.
pub fn window_bins(w: &TimeSeriesWindow) -> Vec<Vec<Complex64>> {
    (0..w.channels)
        .map(|c| {
            let x: Vec<Complex64> = (0..w.length).map(|t| Complex64::new(w.at(t, c) as f64, 0.0)).collect();
            fft(&x, -1.0)
        })
        .collect()
}

/// Amplitude/phase spectra of every channel.
pub fn window_spectra(w: &TimeSeriesWindow) -> Vec<Spectrum> {
    window_bins(w).iter().map(|b| Spectrum::from_complex(b)).collect()
}

fn from_bins(w: &TimeSeriesWindow, bins: &[Vec<Complex64>]) -> Result<TimeSeriesWindow> {
    let mut out = w.clone();
    for (c, b) in bins.iter().enumerate() {
        let x: Vec<f32> = inverse_complex(b)?.into_iter().map(|v| v as f32).collect();
        out.set_channel(c, &x);
    }
    Ok(out)
}

/// Bins whose folded index lies below a quarter of the length.
pub fn is_low_bin(k: usize, len: usize) -> bool {
    4 * folded(k, len) < len
}

/// Highest bin index that has a distinct conjugate partner.
fn positive_half(len: usize) -> usize {
    (len - 1) / 2
}

fn uniform_sym<R: Rng>(rng: &mut R, range: f64) -> f64 {
    if range > 0.0 { range - rng.random_range(0.0..2.0 * range) } else { 0.0 }
}

/// Perturbs bins `lo..=hi` and mirrors them onto their conjugates.
fn perturb(bins: &mut [Complex64], lo: usize, hi: usize, p: &AugParams, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = bins.len();
    let amp = Normal::new(0.0, p.ap_amplitude_std).map_err(|e| Error::invalid(e.to_string()))?;
    for k in lo..=hi {
        let a = bins[k].norm() + amp.sample(rng);
        let theta = bins[k].arg() + uniform_sym(rng, p.ap_phase_range);
        // a negative amplitude is |a| at phase + pi, which from_polar already encodes
        bins[k] = Complex64::from_polar(a, theta);
        bins[n - k] = bins[k].conj();
    }
    Ok(())
}

pub(crate) fn apply(kind: AugKind, w: &TimeSeriesWindow, p: &AugParams, rng: &mut ChaCha8Rng) -> Result<TimeSeriesWindow> {
    let l = w.length;
    let half = positive_half(l);
    let mut bins = window_bins(w);
    match kind {
        AugKind::Hfc | AugKind::Lfc => {
            let keep_low = kind == AugKind::Lfc;
            for ch in &mut bins {
                for (k, b) in ch.iter_mut().enumerate() {
                    if is_low_bin(k, l) != keep_low {
                        *b = Complex64::new(0.0, 0.0);
                    }
                }
            }
        }
        AugKind::PShift => {
            let phi = PI - rng.random_range(0.0..2.0 * PI);
            let rot = Complex64::from_polar(1.0, phi);
            for ch in &mut bins {
                for k in 1..=half {
                    ch[k] *= rot;
                    ch[l - k] = ch[k].conj();
                }
            }
        }
        AugKind::ApF => {
            if half >= 1 {
                for ch in &mut bins {
                    perturb(ch, 1, half, p, rng)?;
                }
            }
        }
        AugKind::ApP => {
            if half >= 1 {
                let seg = (half / 2).max(1);
                for ch in &mut bins {
                    let start = rng.random_range(1..=half - seg + 1);
                    perturb(ch, start, start + seg - 1, p, rng)?;
                }
            }
        }
        other => return Err(Error::invalid(format!("`{other}` is not a frequency-domain transform"))),
    }
    from_bins(w, &bins)
}
