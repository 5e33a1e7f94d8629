use serde::{Deserialize, Serialize};

use super::types::TimeSeriesWindow;
use crate::error::{Error, Result};

const MIN_STD: f64 = 1e-8;

/// Per-channel mean and population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Indices the statistics were computed from.
    pub source: Vec<usize>,
}

impl ChannelStats {
    pub fn compute(windows: &[TimeSeriesWindow], source: &[usize]) -> Result<Self> {
        let first = source.first().ok_or_else(|| Error::Data("normalization statistics need at least one window".into()))?;
        let d = windows
            .get(*first)
            .ok_or_else(|| Error::Data(format!("stats index {first} out of range")))?
            .channels;
        let mut sum = vec![0.0f64; d];
        let mut sq = vec![0.0f64; d];
        let mut n = 0usize;
        for &i in source {
            let w = windows.get(i).ok_or_else(|| Error::Data(format!("stats index {i} out of range")))?;
            if w.channels != d {
                return Err(Error::Data("windows differ in channel count".into()));
            }
            for row in w.values.chunks_exact(d) {
                for (c, &v) in row.iter().enumerate() {
                    sum[c] += v as f64;
                }
            }
            n += w.length;
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        for &i in source {
            for row in windows[i].values.chunks_exact(d) {
                for (c, &v) in row.iter().enumerate() {
                    let e = v as f64 - mean[c];
                    sq[c] += e * e;
                }
            }
        }
        let std = sq.iter().map(|s| (s / n as f64).sqrt()).collect();
        Ok(ChannelStats { mean, std, source: source.to_vec() })
    }

    pub fn apply(&self, w: &TimeSeriesWindow) -> TimeSeriesWindow {
        let d = w.channels;
        let mut values = w.values.clone();
        for row in values.chunks_exact_mut(d) {
            for (c, v) in row.iter_mut().enumerate() {
                if self.std[c] >= MIN_STD {
                    *v = ((*v as f64 - self.mean[c]) / self.std[c]) as f32;
                }
            }
        }
        w.with_values(values)
    }
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub windows: Vec<TimeSeriesWindow>,
    pub stats: ChannelStats,
}

/// Standardizes every window with statistics taken from `stats_source` only.
pub fn zscore_normalize(windows: &[TimeSeriesWindow], stats_source: &[usize]) -> Result<Normalized> {
    let stats = ChannelStats::compute(windows, stats_source)?;
    for (c, s) in stats.std.iter().enumerate() {
        if *s < MIN_STD {
            log::warn!("channel {c} has std {s:.3e}; left unnormalized");
        }
    }
    let windows = windows.iter().map(|w| stats.apply(w)).collect();
    Ok(Normalized { windows, stats })
}
