use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::types::{DevicePosition, RawRecording, TimeSeriesWindow};
use crate::error::{Error, Result};

/// Seed of the class prototypes, fixed so every dataset seed shares the
/// same set of activities.
const PROTOTYPE_SEED: u64 = 0x5eed_ac71;
const HARMONICS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub num_classes: usize,
    pub num_domains: usize,
    /// Windows per (class, domain, position) triple.
    pub windows_per_class: usize,
    pub length: usize,
    pub channels: usize,
    pub seed: u64,
    pub sample_rate_hz: f64,
    pub noise_std: f64,
    /// Per-domain amplitude and phase offsets; off gives identically
    /// distributed domains.
    pub domain_shift: bool,
    pub positions: Vec<DevicePosition>,
    /// Relative jitter of the class frequency per window.
    pub freq_jitter: f64,
    /// Half-width of the uniform per-window gain around 1.
    pub amp_jitter: f64,
    /// Samples per activity segment in continuous recordings.
    pub segment_length: usize,
    pub segments_per_recording: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            num_classes: 3,
            num_domains: 1,
            windows_per_class: 200,
            length: 128,
            channels: 6,
            seed: 0,
            sample_rate_hz: 50.0,
            noise_std: 1.0,
            domain_shift: true,
            positions: vec![DevicePosition::Unspecified],
            freq_jitter: 0.05,
            amp_jitter: 0.4,
            segment_length: 100,
            segments_per_recording: 60,
        }
    }
}

impl SyntheticConfig {
    pub fn new(num_classes: usize, num_domains: usize, windows_per_class: usize, length: usize, channels: usize, seed: u64) -> Self {
        SyntheticConfig { num_classes, num_domains, windows_per_class, length, channels, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_classes", self.num_classes),
            ("num_domains", self.num_domains),
            ("windows_per_class", self.windows_per_class),
            ("channels", self.channels),
        ];
        for (field, v) in counts {
            if v == 0 {
                return Err(Error::config(format!("synthetic.{field}"), "must be at least 1"));
            }
        }
        if self.length < 2 {
            return Err(Error::config("synthetic.length", "must be at least 2"));
        }
        if !(self.sample_rate_hz > 0.0) || !(self.noise_std >= 0.0) {
            return Err(Error::config("synthetic.sample_rate_hz", "rate must be positive and noise non-negative"));
        }
        if self.positions.is_empty() {
            return Err(Error::config("synthetic.positions", "need at least one position"));
        }
        if !(0.0..1.0).contains(&self.amp_jitter) || !(0.0..0.5).contains(&self.freq_jitter) {
            return Err(Error::config("synthetic.amp_jitter", "jitter out of range"));
        }
        Ok(())
    }
}

/// Fixed generative parameters of one activity class.
struct Prototype {
    base_hz: f64,
    /// `[channel][harmonic]` amplitude and phase.
    amp: Vec<[f64; HARMONICS]>,
    phase: Vec<[f64; HARMONICS]>,
}

fn prototypes(num_classes: usize, channels: usize) -> Vec<Prototype> {
    let mut rng = ChaCha8Rng::seed_from_u64(PROTOTYPE_SEED);
    (0..num_classes)
        .map(|k| {
            let base_hz = 0.8 + 0.6 * k as f64;
            let mut amp = Vec::with_capacity(channels);
            let mut phase = Vec::with_capacity(channels);
            for _ in 0..channels {
                let mut a = [0.0; HARMONICS];
                let mut p = [0.0; HARMONICS];
                for h in 0..HARMONICS {
                    a[h] = rng.random_range(0.3..1.0) / (h + 1) as f64;
                    p[h] = rng.random_range(-PI..PI);
                }
                amp.push(a);
                phase.push(p);
            }
            Prototype { base_hz, amp, phase }
        })
        .collect()
}

struct DomainOffset {
    gain: Vec<f64>,
    phase: Vec<f64>,
}

fn domain_offsets(cfg: &SyntheticConfig) -> Vec<DomainOffset> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xd0_3a14);
    (0..cfg.num_domains)
        .map(|_| {
            if cfg.domain_shift {
                DomainOffset {
                    gain: (0..cfg.channels).map(|_| rng.random_range(0.7..1.3)).collect(),
                    phase: (0..cfg.channels).map(|_| rng.random_range(-0.5..0.5)).collect(),
                }
            } else {
                DomainOffset { gain: vec![1.0; cfg.channels], phase: vec![0.0; cfg.channels] }
            }
        })
        .collect()
}

/// Fixed rotation applied to every complete 3-channel group for the watch.
const WATCH_ROTATION: [[f64; 3]; 3] = [[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]];

fn place(position: DevicePosition, frame: &mut [f64]) {
    if position != DevicePosition::Watch {
        return;
    }
    for g in frame.chunks_exact_mut(3) {
        let v = [g[0], g[1], g[2]];
        for (r, out) in WATCH_ROTATION.iter().zip(g.iter_mut()) {
            *out = r[0] * v[0] + r[1] * v[1] + r[2] * v[2];
        }
    }
}

/// Per-segment nuisance draws shared by all its samples.
struct Draw {
    freq_scale: f64,
    gain: f64,
    phase: f64,
}

impl Draw {
    fn sample<R: Rng>(cfg: &SyntheticConfig, rng: &mut R) -> Self {
        Draw {
            freq_scale: 1.0 + rng.random_range(-cfg.freq_jitter..=cfg.freq_jitter),
            gain: 1.0 + rng.random_range(-cfg.amp_jitter..=cfg.amp_jitter),
            phase: rng.random_range(0.0..2.0 * PI),
        }
    }
}

struct Synth<'a> {
    cfg: &'a SyntheticConfig,
    protos: Vec<Prototype>,
    domains: Vec<DomainOffset>,
    noise: Normal<f64>,
}

impl<'a> Synth<'a> {
    fn new(cfg: &'a SyntheticConfig) -> Result<Self> {
        cfg.validate()?;
        let noise = Normal::new(0.0, cfg.noise_std).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(Synth { cfg, protos: prototypes(cfg.num_classes, cfg.channels), domains: domain_offsets(cfg), noise })
    }

    /// Writes `n` time-major frames of class `k` into `out`.
    fn emit<R: Rng>(&self, k: usize, domain: usize, position: DevicePosition, n: usize, rng: &mut R, out: &mut Vec<f32>) {
        let d = self.cfg.channels;
        let p = &self.protos[k];
        let off = &self.domains[domain];
        let draw = Draw::sample(self.cfg, rng);
        let omega = 2.0 * PI * p.base_hz * draw.freq_scale / self.cfg.sample_rate_hz;
        let mut frame = vec![0.0f64; d];
        for t in 0..n {
            for (c, v) in frame.iter_mut().enumerate() {
                let mut s = 0.0;
                for h in 0..HARMONICS {
                    let hh = (h + 1) as f64;
                    s += p.amp[c][h] * (hh * (omega * t as f64 + draw.phase + off.phase[c]) + p.phase[c][h]).sin();
                }
                *v = s * draw.gain * off.gain[c];
            }
            place(position, &mut frame);
            out.extend(frame.iter().map(|v| (v + self.noise.sample(rng)) as f32));
        }
    }
}

/// Labeled windows ordered by domain, position, class.
pub fn gen_synthetic(cfg: &SyntheticConfig) -> Result<Vec<TimeSeriesWindow>> {
    let synth = Synth::new(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let total = cfg.num_domains * cfg.positions.len() * cfg.num_classes * cfg.windows_per_class;
    let mut out = Vec::with_capacity(total);
    for dom in 0..cfg.num_domains {
        for &pos in &cfg.positions {
            for k in 0..cfg.num_classes {
                for _ in 0..cfg.windows_per_class {
                    let mut values = Vec::with_capacity(cfg.length * cfg.channels);
                    synth.emit(k, dom, pos, cfg.length, &mut rng, &mut values);
                    let mut w = TimeSeriesWindow::new(values, cfg.length, cfg.channels)?;
                    w.label = Some(k);
                    w.domain = dom.to_string();
                    w.position = pos;
                    out.push(w);
                }
            }
        }
    }
    Ok(out)
}

/// One continuous recording per (domain, position), made of
/// `segments_per_recording` activity segments of `segment_length` samples
/// with classes cycled in shuffled rounds.
pub fn gen_synthetic_recordings(cfg: &SyntheticConfig) -> Result<Vec<RawRecording>> {
    let synth = Synth::new(cfg)?;
    if cfg.segment_length == 0 || cfg.segments_per_recording == 0 {
        return Err(Error::config("synthetic.segment_length", "segments must be non-empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x7ec0));
    let mut out = vec![];
    for dom in 0..cfg.num_domains {
        for &pos in &cfg.positions {
            let mut frames = Vec::with_capacity(cfg.segment_length * cfg.segments_per_recording * cfg.channels);
            let mut labels = Vec::with_capacity(cfg.segment_length * cfg.segments_per_recording);
            let mut order: Vec<usize> = vec![];
            for _ in 0..cfg.segments_per_recording {
                if order.is_empty() {
                    order = (0..cfg.num_classes).collect();
                    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
                }
                let k = order.pop().unwrap_or(0);
                synth.emit(k, dom, pos, cfg.segment_length, &mut rng, &mut frames);
                labels.extend(std::iter::repeat_n(Some(k), cfg.segment_length));
            }
            let channels = (0..cfg.channels).map(|c| frames.iter().skip(c).step_by(cfg.channels).copied().collect()).collect();
            out.push(RawRecording::new(channels, cfg.sample_rate_hz, dom.to_string(), pos, Some(labels))?);
        }
    }
    Ok(out)
}
