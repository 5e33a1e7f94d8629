use super::types::RawRecording;
use crate::error::{Error, Result};

/// Linear interpolation onto a uniform grid at `target_hz`.
///
/// The output spans the same duration; the last sample sits on the last
/// grid point at or before the source end. Labels take the nearest source
/// timestamp.
pub fn resample_linear(rec: &RawRecording, target_hz: f64) -> Result<RawRecording> {
    if !(target_hz > 0.0) {
        return Err(Error::invalid(format!("target rate must be positive, got {target_hz}")));
    }
    let n = rec.len();
    if n < 2 {
        return Err(Error::Data(format!("cannot resample {n} samples")));
    }
    if target_hz == rec.sample_rate_hz {
        return Ok(rec.clone());
    }
    let duration = (n - 1) as f64 / rec.sample_rate_hz;
    let m = (duration * target_hz + 1e-9).floor() as usize + 1;
    let ratio = rec.sample_rate_hz / target_hz;
    let positions: Vec<f64> = (0..m).map(|j| (j as f64 * ratio).min((n - 1) as f64)).collect();
    let channels = rec
        .channels
        .iter()
        .map(|src| {
            positions
                .iter()
                .map(|&p| {
                    let i = (p.floor() as usize).min(n - 2);
                    let frac = p - i as f64;
                    (src[i] as f64 * (1.0 - frac) + src[i + 1] as f64 * frac) as f32
                })
                .collect()
        })
        .collect();
    let labels = positions.iter().map(|&p| rec.labels[(p.round() as usize).min(n - 1)]).collect();
    RawRecording::new(channels, target_hz, rec.subject_id.clone(), rec.position, Some(labels))
}
