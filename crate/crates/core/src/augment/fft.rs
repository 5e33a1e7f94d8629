//! Unnormalized forward DFT and `1/L` inverse, amplitude/phase form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative bound on the imaginary part left after an inverse transform.
pub const RESIDUE_TOLERANCE: f64 = 1e-5;

/// Amplitude and phase per frequency bin of one channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
}

impl Spectrum {
    pub fn from_complex(bins: &[Complex64]) -> Self {
        let amplitude = bins.iter().map(|c| c.norm()).collect();
        let phase = bins
            .iter()
            .map(|c| {
                let p = c.arg();
                if p <= -PI { PI } else { p }
            })
            .collect();
        Spectrum { amplitude, phase }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.amplitude.iter().zip(&self.phase).map(|(&a, &p)| Complex64::from_polar(a, p)).collect()
    }

    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }
}

fn smallest_factor(n: usize) -> usize {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return p;
        }
        p += 2;
    }
    n
}

/// Direct O(n^2) evaluation; `sign` is -1 for forward, +1 for inverse.
pub fn dft_direct(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * Complex64::from_polar(1.0, sign * 2.0 * PI * ((k * t) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Mixed-radix decimation in time; prime lengths fall back to the direct sum.
pub fn fft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    if n <= 1 {
        return x.to_vec();
    }
    let p = smallest_factor(n);
    if p == n {
        return dft_direct(x, sign);
    }
    let m = n / p;
    let subs: Vec<Vec<Complex64>> = (0..p)
        .map(|r| {
            let sub: Vec<Complex64> = (0..m).map(|j| x[j * p + r]).collect();
            fft(&sub, sign)
        })
        .collect();
    let w: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, sign * 2.0 * PI * j as f64 / n as f64)).collect();
    (0..n)
        .map(|k| subs.iter().enumerate().map(|(r, f)| f[k % m] * w[(r * k) % n]).sum())
        .collect()
}

pub fn dft_forward(x: &[f64]) -> Result<Spectrum> {
    if x.len() < 2 {
        return Err(Error::invalid(format!("DFT needs at least 2 samples, got {}", x.len())));
    }
    let c: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(Spectrum::from_complex(&fft(&c, -1.0)))
}

/// Inverse of complex bins, checking the imaginary residue.
pub fn inverse_complex(bins: &[Complex64]) -> Result<Vec<f64>> {
    let n = bins.len();
    if n < 2 {
        return Err(Error::invalid(format!("DFT needs at least 2 bins, got {n}")));
    }
    let y = fft(bins, 1.0);
    let scale = 1.0 / n as f64;
    let real: Vec<f64> = y.iter().map(|c| c.re * scale).collect();
    let peak = real.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residue = y.iter().fold(0.0f64, |m, c| m.max((c.im * scale).abs()));
    let tolerance = RESIDUE_TOLERANCE * peak.max(f64::MIN_POSITIVE);
    if residue > tolerance && residue > 1e-12 {
        return Err(Error::ImaginaryResidue { residue, tolerance });
    }
    Ok(real)
}

pub fn dft_inverse(s: &Spectrum) -> Result<Vec<f64>> {
    inverse_complex(&s.to_complex())
}

/// Bin index folded onto the non-negative half, `min(k, L - k)`.
#[inline]
pub fn folded(k: usize, len: usize) -> usize {
    k.min(len - k)
}
