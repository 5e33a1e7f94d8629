use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DevicePosition {
    Phone,
    Watch,
    #[default]
    Unspecified,
}

impl fmt::Display for DevicePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DevicePosition::Phone => "phone",
            DevicePosition::Watch => "watch",
            DevicePosition::Unspecified => "unspecified",
        })
    }
}

impl FromStr for DevicePosition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phone" => Ok(DevicePosition::Phone),
            "watch" => Ok(DevicePosition::Watch),
            "" | "unspecified" => Ok(DevicePosition::Unspecified),
            other => Err(Error::Data(format!("unknown device position `{other}`"))),
        }
    }
}

/// A continuous multichannel stream from one subject and device.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRecording {
    /// One stream per channel, all of equal length.
    pub channels: Vec<Vec<f32>>,
    pub sample_rate_hz: f64,
    pub subject_id: String,
    pub position: DevicePosition,
    /// Per-timestamp activity label, `None` where unlabeled.
    pub labels: Vec<Option<usize>>,
}

impl RawRecording {
    pub fn new(
        channels: Vec<Vec<f32>>,
        sample_rate_hz: f64,
        subject_id: impl Into<String>,
        position: DevicePosition,
        labels: Option<Vec<Option<usize>>>,
    ) -> Result<Self> {
        let len = channels.first().map(Vec::len).ok_or_else(|| Error::Data("recording without channels".into()))?;
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::Data("recording channels differ in length".into()));
        }
        if !(sample_rate_hz > 0.0) {
            return Err(Error::Data(format!("sample rate must be positive, got {sample_rate_hz}")));
        }
        let labels = labels.unwrap_or_else(|| vec![None; len]);
        if labels.len() != len {
            return Err(Error::Data(format!("{} labels for {len} timestamps", labels.len())));
        }
        Ok(RawRecording { channels, sample_rate_hz, subject_id: subject_id.into(), position, labels })
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }
}

/// One `length x channels` sample, stored time-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesWindow {
    pub values: Vec<f32>,
    pub length: usize,
    pub channels: usize,
    pub label: Option<usize>,
    pub domain: String,
    pub position: DevicePosition,
}

impl TimeSeriesWindow {
    pub fn new(values: Vec<f32>, length: usize, channels: usize) -> Result<Self> {
        if values.len() != length * channels || length == 0 || channels == 0 {
            return Err(Error::shape("TimeSeriesWindow", &[length, channels], &[values.len()]));
        }
        Ok(TimeSeriesWindow {
            values,
            length,
            channels,
            label: None,
            domain: String::new(),
            position: DevicePosition::Unspecified,
        })
    }

    pub fn with_values(&self, values: Vec<f32>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        TimeSeriesWindow { values, ..self.clone() }
    }

    #[inline]
    pub fn at(&self, t: usize, c: usize) -> f32 {
        self.values[t * self.channels + c]
    }

    /// Channel `c` as a contiguous series.
    pub fn channel(&self, c: usize) -> Vec<f32> {
        (0..self.length).map(|t| self.at(t, c)).collect()
    }

    pub fn set_channel(&mut self, c: usize, series: &[f32]) {
        for (t, &v) in series.iter().enumerate() {
            self.values[t * self.channels + c] = v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
