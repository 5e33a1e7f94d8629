use std::f64::consts::PI;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, StandardNormal};

use super::spec::{AugKind, AugParams};
use crate::data::TimeSeriesWindow;
use crate::error::{Error, Result};

fn normal(mean: f64, std: f64) -> Result<Normal<f64>> {
    Normal::new(mean, std).map_err(|e| Error::invalid(format!("normal({mean}, {std}): {e}")))
}

fn jitter(w: &TimeSeriesWindow, p: &AugParams, rng: &mut ChaCha8Rng) -> Result<TimeSeriesWindow> {
    let n = normal(0.0, p.noise_std)?;
    Ok(w.with_values(w.values.iter().map(|v| (*v as f64 + n.sample(rng)) as f32).collect()))
}

fn scale(w: &TimeSeriesWindow, p: &AugParams, rng: &mut ChaCha8Rng) -> Result<TimeSeriesWindow> {
    let n = normal(p.scale_mean, p.scale_std)?;
    let factors: Vec<f64> = (0..w.channels).map(|_| n.sample(rng)).collect();
    let mut values = w.values.clone();
    for row in values.chunks_exact_mut(w.channels) {
        for (v, f) in row.iter_mut().zip(&factors) {
            *v = (*v as f64 * f) as f32;
        }
    }
    Ok(w.with_values(values))
}

fn shuffle(w: &TimeSeriesWindow, rng: &mut ChaCha8Rng) -> TimeSeriesWindow {
    let mut order: Vec<usize> = (0..w.channels).collect();
    order.shuffle(rng);
    let values = w.values.chunks_exact(w.channels).flat_map(|row| order.iter().map(|&c| row[c])).collect();
    w.with_values(values)
}

fn negate(w: &TimeSeriesWindow) -> TimeSeriesWindow {
    w.with_values(w.values.iter().map(|v| -v).collect())
}

fn t_flip(w: &TimeSeriesWindow) -> TimeSeriesWindow {
    w.with_values(w.values.chunks_exact(w.channels).rev().flatten().copied().collect())
}

/// Random segment lengths summing to `len`, each at least `min_len`.
fn segment_lengths(len: usize, count: usize, min_len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let extra = len - count * min_len;
    let mut cuts: Vec<usize> = (0..count - 1).map(|_| rng.random_range(0..=extra)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(count);
    let mut prev = 0;
    for c in cuts.into_iter().chain([extra]) {
        out.push(min_len + c - prev);
        prev = c;
    }
    out
}

fn permute(w: &TimeSeriesWindow, p: &AugParams, rng: &mut ChaCha8Rng) -> TimeSeriesWindow {
    let min_len = p.min_segment_len.max(1);
    let max_count = p.max_segments.min(w.length / min_len);
    if max_count < 2 {
        return w.clone();
    }
    let count = rng.random_range(2..=max_count);
    let lengths = segment_lengths(w.length, count, min_len, rng);
    let mut starts = Vec::with_capacity(count);
    let mut s = 0;
    for l in &lengths {
        starts.push(s);
        s += l;
    }
    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(rng);
    let d = w.channels;
    let mut values = Vec::with_capacity(w.values.len());
    for &seg in &order {
        values.extend_from_slice(&w.values[starts[seg] * d..(starts[seg] + lengths[seg]) * d]);
    }
    w.with_values(values)
}

/// Linear interpolation of every channel at fractional time positions.
fn sample_at(w: &TimeSeriesWindow, positions: &[f64]) -> Vec<f32> {
    let d = w.channels;
    let last = w.length - 1;
    let mut out = Vec::with_capacity(positions.len() * d);
    for &pos in positions {
        let pos = pos.clamp(0.0, last as f64);
        let i = (pos.floor() as usize).min(last.saturating_sub(1));
        let frac = pos - i as f64;
        for c in 0..d {
            let a = w.values[i * d + c] as f64;
            let b = w.values[(i + 1).min(last) * d + c] as f64;
            out.push((a + (b - a) * frac) as f32);
        }
    }
    out
}

fn resample(w: &TimeSeriesWindow, p: &AugParams, rng: &mut ChaCha8Rng) -> TimeSeriesWindow {
    let l = w.length;
    let up = p.resample_factor.max(1) * l;
    if l < 3 {
        return w.clone();
    }
    let step = (l - 1) as f64 / (up - 1) as f64;
    let mut picks: Vec<usize> = index::sample(rng, up - 2, l - 2).into_iter().map(|i| i + 1).collect();
    picks.push(0);
    picks.push(up - 1);
    picks.sort_unstable();
    let positions: Vec<f64> = picks.iter().map(|&i| i as f64 * step).collect();
    w.with_values(sample_at(w, &positions))
}

/// Rotation matrix about a unit axis (Rodrigues).
pub fn rodrigues(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let [x, y, z] = axis;
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ]
}

fn rotation(w: &TimeSeriesWindow, rng: &mut ChaCha8Rng) -> Result<TimeSeriesWindow> {
    let d = w.channels;
    if !d.is_multiple_of(3) {
        return Err(Error::UnsupportedGeometry(format!("rotation needs 3-axis channel groups, got {d} channels")));
    }
    let mats: Vec<[[f64; 3]; 3]> = (0..d / 3)
        .map(|_| {
            let axis = loop {
                let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if n > 1e-12 {
                    break [v[0] / n, v[1] / n, v[2] / n];
                }
            };
            // (-pi, pi]
            let angle = PI - rng.random_range(0.0..2.0 * PI);
            rodrigues(axis, angle)
        })
        .collect();
    let mut values = w.values.clone();
    for row in values.chunks_exact_mut(d) {
        for (g, m) in row.chunks_exact_mut(3).zip(&mats) {
            let v = [g[0] as f64, g[1] as f64, g[2] as f64];
            for (out, r) in g.iter_mut().zip(m) {
                *out = (r[0] * v[0] + r[1] * v[1] + r[2] * v[2]) as f32;
            }
        }
    }
    Ok(w.with_values(values))
}

/// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson slopes).
pub fn pchip(xs: &[f64], ys: &[f64], at: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|p| p[1] - p[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    at.iter()
        .map(|&x| {
            let i = xs[1..n - 1].partition_point(|&k| k <= x);
            let t = ((x - xs[i]) / h[i]).clamp(0.0, 1.0);
            let (t2, t3) = (t * t, t * t * t);
            (2.0 * t3 - 3.0 * t2 + 1.0) * ys[i]
                + (t3 - 2.0 * t2 + t) * h[i] * m[i]
                + (-2.0 * t3 + 3.0 * t2) * ys[i + 1]
                + (t3 - t2) * h[i] * m[i + 1]
        })
        .collect()
}

fn t_warp(w: &TimeSeriesWindow, p: &AugParams, rng: &mut ChaCha8Rng) -> Result<TimeSeriesWindow> {
    let last = (w.length - 1) as f64;
    let intervals = p.warp_knots + 1;
    let spacing = LogNormal::new(0.0, p.warp_sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let gaps: Vec<f64> = (0..intervals).map(|_| spacing.sample(rng)).collect();
    let total: f64 = gaps.iter().sum();
    let xs: Vec<f64> = (0..=intervals).map(|i| last * i as f64 / intervals as f64).collect();
    let mut ys = vec![0.0];
    let mut acc = 0.0;
    for g in &gaps {
        acc += g;
        ys.push(last * acc / total);
    }
    let grid: Vec<f64> = (0..w.length).map(|t| t as f64).collect();
    let warped = pchip(&xs, &ys, &grid);
    Ok(w.with_values(sample_at(w, &warped)))
}

pub(crate) fn apply(kind: AugKind, w: &TimeSeriesWindow, p: &AugParams, rng: &mut ChaCha8Rng) -> Result<TimeSeriesWindow> {
    match kind {
        AugKind::Identity => Ok(w.clone()),
        AugKind::Noise => jitter(w, p, rng),
        AugKind::Scale => scale(w, p, rng),
        AugKind::Shuffle => Ok(shuffle(w, rng)),
        AugKind::Negate => Ok(negate(w)),
        AugKind::Permute => Ok(permute(w, p, rng)),
        AugKind::Resample => Ok(resample(w, p, rng)),
        AugKind::Rotation => rotation(w, rng),
        AugKind::TFlip => Ok(t_flip(w)),
        AugKind::TWarp => t_warp(w, p, rng),
        AugKind::PermJit => jitter(&permute(w, p, rng), p, rng),
        AugKind::JitScal => scale(&jitter(w, p, rng)?, p, rng),
        other => Err(Error::invalid(format!("`{other}` is not a time-domain transform"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn segments_cover_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for len in 4..60 {
            for count in 2..=5.min(len / 2) {
                let s = segment_lengths(len, count, 2, &mut rng);
                assert_eq!(s.len(), count);
                assert_eq!(s.iter().sum::<usize>(), len);
                assert!(s.iter().all(|&l| l >= 2));
            }
        }
    }

    #[test]
    fn pchip_monotone_and_interpolating() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.0, 0.1, 2.5, 3.0];
        let at: Vec<f64> = (0..=300).map(|i| i as f64 / 100.0).collect();
        let v = pchip(&xs, &ys, &at);
        assert!(v.windows(2).all(|p| p[1] >= p[0] - 1e-12));
        assert_eq!(v[0], 0.0);
        assert!((v[100] - 0.1).abs() < 1e-12 && (v[300] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rodrigues_quarter_turn() {
        let r = rodrigues([0.0, 0.0, 1.0], PI / 2.0);
        let v = [1.0, 0.0, 0.0];
        let out: Vec<f64> = r.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        assert!((out[0]).abs() < 1e-12 && (out[1] - 1.0).abs() < 1e-12);
    }
}
