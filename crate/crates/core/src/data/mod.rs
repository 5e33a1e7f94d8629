//! Recordings, sliding windows, normalization, resampling, sampling,
//! splits, file formats, and a synthetic activity generator.

mod io;
mod normalize;
mod resample;
mod sampling;
mod split;
mod synthetic;
mod types;
mod window;

pub use io::{read_recording_csv, read_recordings, read_windows_jsonl, write_recording_csv, write_windows_jsonl};
pub use normalize::{zscore_normalize, ChannelStats, Normalized};
pub use resample::resample_linear;
pub use sampling::{balanced_sample_probs, Sampler};
pub use split::{split_leave_one_domain_out, split_random, DatasetSplit};
pub use synthetic::{gen_synthetic, gen_synthetic_recordings, SyntheticConfig};
pub use types::{DevicePosition, RawRecording, TimeSeriesWindow};
pub use window::{segment_windows, window_count};

/// Subjects of the SHAR dataset dropped because they lack some classes.
pub const SHAR_EXCLUDED_DOMAINS: [u32; 10] = [4, 7, 8, 10, 12, 18, 26, 27, 28, 30];

/// Default (length, step) of the sliding window per dataset.
pub fn default_window(dataset: &str) -> Option<(usize, usize)> {
    match dataset {
        "ucihar" => Some((128, 64)),
        "hhar" => Some((100, 50)),
        "shar" => Some((151, 75)),
        _ => None,
    }
}
