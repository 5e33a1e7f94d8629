use std::collections::BTreeMap;

use super::types::{RawRecording, TimeSeriesWindow};
use crate::error::{Error, Result};

/// Number of windows of `length` at `step` that fit in `total` samples.
pub fn window_count(total: usize, length: usize, step: usize) -> usize {
    if total < length || step == 0 {
        0
    } else {
        (total - length) / step + 1
    }
}

/// Majority label, ties to the label that occurs first.
fn majority_label(labels: &[Option<usize>]) -> Option<usize> {
    let mut counts: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (pos, l) in labels.iter().enumerate() {
        if let Some(l) = l {
            counts.entry(*l).or_insert((0, pos)).0 += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|(_, (ca, fa)), (_, (cb, fb))| ca.cmp(cb).then(fb.cmp(fa)))
        .map(|(l, _)| l)
}

/// Cuts a recording into windows starting at `0, step, 2 step, ...`.
pub fn segment_windows(rec: &RawRecording, length: usize, step: usize) -> Result<Vec<TimeSeriesWindow>> {
    if length < 2 {
        return Err(Error::invalid(format!("window length must be at least 2, got {length}")));
    }
    if step == 0 || step > length {
        return Err(Error::invalid(format!("window step {step} outside 1..={length}")));
    }
    let total = rec.len();
    if total < length {
        return Err(Error::Data(format!("recording of {total} samples is shorter than window length {length}")));
    }
    let d = rec.num_channels();
    let count = window_count(total, length, step);
    let mut out = Vec::with_capacity(count);
    for w in 0..count {
        let start = w * step;
        let mut values = Vec::with_capacity(length * d);
        for t in start..start + length {
            values.extend(rec.channels.iter().map(|c| c[t]));
        }
        let mut win = TimeSeriesWindow::new(values, length, d)?;
        win.label = majority_label(&rec.labels[start..start + length]);
        win.domain = rec.subject_id.clone();
        win.position = rec.position;
        out.push(win);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DevicePosition;
    use proptest::prelude::*;

    fn ramp(total: usize, labels: Vec<Option<usize>>) -> RawRecording {
        let ch = (0..total).map(|t| t as f32).collect();
        RawRecording::new(vec![ch], 50.0, "s1", DevicePosition::Phone, Some(labels)).unwrap()
    }

    #[test]
    fn ten_samples_length_four_step_two() {
        let rec = ramp(10, vec![None; 10]);
        let w = segment_windows(&rec, 4, 2).unwrap();
        assert_eq!(w.len(), 4);
        let starts: Vec<f32> = w.iter().map(|w| w.values[0]).collect();
        assert_eq!(starts, vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(w[0].domain, "s1");
        assert_eq!(w[0].position, DevicePosition::Phone);
    }

    #[test]
    fn majority_and_tie_break() {
        let labels = vec![Some(2), Some(1), Some(1), Some(2), Some(3), Some(3), Some(3), Some(0)];
        let rec = ramp(8, labels);
        let w = segment_windows(&rec, 4, 4).unwrap();
        // [2,1,1,2] tie between 2 and 1, 2 occurs first
        assert_eq!(w[0].label, Some(2));
        assert_eq!(w[1].label, Some(3));
    }

    #[test]
    fn too_short_and_bad_step() {
        let rec = ramp(3, vec![None; 3]);
        assert!(segment_windows(&rec, 4, 2).is_err());
        let rec = ramp(10, vec![None; 10]);
        assert!(segment_windows(&rec, 4, 5).is_err());
        assert!(segment_windows(&rec, 4, 0).is_err());
        assert!(segment_windows(&rec, 1, 1).is_err());
    }

    proptest! {
        #[test]
        fn count_formula(total in 2usize..300, length in 2usize..60, step_frac in 0.0f64..1.0) {
            prop_assume!(total >= length);
            let step = 1 + ((length - 1) as f64 * step_frac) as usize;
            let rec = ramp(total, vec![None; total]);
            let w = segment_windows(&rec, length, step).unwrap();
            prop_assert_eq!(w.len(), (total - length) / step + 1);
            prop_assert!(w.iter().all(|w| w.values.len() == length));
        }
    }
}
