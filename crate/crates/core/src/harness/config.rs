use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::probe::ProbeConfig;
use crate::augment::{AugKind, AugParams, AugmentationSpec, PairMode};
use crate::backbones::{EncoderConfig, EncoderKind, HeadConfig};
use crate::contrastive::{ContrastiveConfig, Framework, PretrainConfig, Sampling};
use crate::data::SyntheticConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    #[default]
    Synthetic,
    Ucihar,
    Shar,
    Hhar,
}

impl Dataset {
    pub fn name(self) -> &'static str {
        match self {
            Dataset::Synthetic => "synthetic",
            Dataset::Ucihar => "ucihar",
            Dataset::Shar => "shar",
            Dataset::Hhar => "hhar",
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    #[default]
    RandomSplit,
    CrossPerson,
    WearingDiversity,
    WindowSweep,
    /// One-axis ablation grid, see [`GridConfig`].
    Grid,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::RandomSplit => "random_split",
            Protocol::CrossPerson => "cross_person",
            Protocol::WearingDiversity => "wearing_diversity",
            Protocol::WindowSweep => "window_sweep",
            Protocol::Grid => "grid",
        }
    }
}

/// Per-(dataset, framework) training defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingDefaults {
    pub lr: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub temperature: f64,
    pub ema_momentum: f64,
    pub queue_size: usize,
    pub epochs: usize,
}

/// Published setup per dataset and framework. Synthetic data uses the
/// UCIHAR rows, and HHAR falls back to them for frameworks it does not list.
pub fn training_defaults(dataset: Dataset, framework: Framework) -> TrainingDefaults {
    let row = |lr, batch_size, weight_decay, epochs| TrainingDefaults {
        lr,
        batch_size,
        weight_decay,
        temperature: 0.1,
        ema_momentum: 0.996,
        queue_size: 1024,
        epochs,
    };
    use Framework::*;
    match (dataset, framework) {
        (Dataset::Shar, Byol) => row(1e-3, 64, 1.5e-6, 60),
        (Dataset::Shar, SimSiam) => row(3e-4, 256, 1e-4, 60),
        (Dataset::Shar, SimClr) => row(2.5e-3, 256, 1e-6, 120),
        (Dataset::Shar, Nnclr) => row(2e-3, 256, 1e-6, 120),
        (Dataset::Hhar, SimClr) => row(5e-3, 256, 1e-6, 120),
        (_, Byol) => row(5e-4, 128, 1.5e-6, 60),
        (_, SimSiam) => row(5e-4, 128, 1e-4, 60),
        (_, SimClr) => row(3e-3, 256, 1e-6, 120),
        (_, Nnclr) => row(3e-3, 256, 1e-6, 120),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossPersonConfig {
    /// Held-out domains, one run each; empty means every domain.
    pub targets: Vec<String>,
    /// Restricts the source domains (data-scarce mode).
    pub sources: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowSweepConfig {
    pub lengths: Vec<usize>,
    /// Step as a fraction of the window length.
    pub step_fractions: Vec<f64>,
}

impl Default for WindowSweepConfig {
    fn default() -> Self {
        WindowSweepConfig { lengths: vec![50, 100, 200, 400], step_fractions: vec![0.5] }
    }
}

/// Axis of an ablation grid. `key` is a dotted config path such as
/// `batch_size` or `projector.depth`; the special key `aug_pairs` runs
/// every ordered pair of `augmentations`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub key: String,
    pub values: Vec<Value>,
    pub augmentations: Vec<AugKind>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { key: AUG_PAIRS.into(), values: vec![], augmentations: AugKind::TIME.to_vec() }
    }
}

pub const AUG_PAIRS: &str = "aug_pairs";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugviewConfig {
    /// Window rendered by `augview`.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: Dataset,
    /// Windows (`.jsonl`) or recordings (CSV file or directory); synthetic
    /// data is generated when absent.
    pub data: Option<String>,
    pub sample_rate_hz: f64,
    /// Sliding window for recordings; dataset default when absent.
    pub window_length: Option<usize>,
    pub window_step: Option<usize>,
    pub protocol: Protocol,
    pub framework: Framework,
    pub backbone: EncoderConfig,
    pub aug1: AugKind,
    pub aug2: AugKind,
    pub pair_mode: PairMode,
    pub aug_params: AugParams,
    pub lr: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub temperature: f64,
    pub ema_momentum: f64,
    pub queue_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Extra seeds; each emits its own metric rows.
    pub seeds: Vec<u64>,
    pub sampling: Sampling,
    pub projector: HeadConfig,
    pub predictor: HeadConfig,
    pub recon_weight: f64,
    /// Train, validation and test fractions of the random split.
    pub split: [f64; 3],
    pub normalize: bool,
    pub probe: ProbeConfig,
    /// Also probe a randomly initialized encoder.
    pub baseline: bool,
    /// Encoder checkpoint to start from; skips pretraining.
    pub checkpoint: Option<String>,
    /// Defaults to on for single runs and off for sweeps.
    pub save_checkpoints: Option<bool>,
    /// Cells run concurrently, capped by `HAR_CL_THREADS`.
    pub workers: usize,
    pub synthetic: SyntheticConfig,
    pub cross_person: CrossPersonConfig,
    pub window_sweep: WindowSweepConfig,
    pub grid: GridConfig,
    pub augview: AugviewConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::defaults(Dataset::Synthetic, Framework::SimClr)
    }
}

impl ExperimentConfig {
    pub fn defaults(dataset: Dataset, framework: Framework) -> Self {
        let t = training_defaults(dataset, framework);
        ExperimentConfig {
            dataset,
            data: None,
            sample_rate_hz: 50.0,
            window_length: None,
            window_step: None,
            protocol: Protocol::RandomSplit,
            framework,
            backbone: EncoderConfig::new(EncoderKind::Cnn, 128, 6),
            aug1: AugKind::Noise,
            aug2: AugKind::Scale,
            pair_mode: PairMode::TwoAugs,
            aug_params: AugParams::default(),
            lr: t.lr,
            batch_size: t.batch_size,
            weight_decay: t.weight_decay,
            temperature: t.temperature,
            ema_momentum: t.ema_momentum,
            queue_size: t.queue_size,
            epochs: t.epochs,
            seed: 0,
            seeds: vec![],
            sampling: Sampling::Uniform,
            projector: HeadConfig::projector(),
            predictor: HeadConfig::predictor(),
            recon_weight: 1.0,
            split: [0.6, 0.2, 0.2],
            normalize: true,
            probe: ProbeConfig::default(),
            baseline: false,
            checkpoint: None,
            save_checkpoints: None,
            workers: 1,
            synthetic: SyntheticConfig::default(),
            cross_person: CrossPersonConfig::default(),
            window_sweep: WindowSweepConfig::default(),
            grid: GridConfig::default(),
            augview: AugviewConfig::default(),
        }
    }

    /// Parses a JSON document or `key = value` lines.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_document(parse_document(text)?)
    }

    /// Builds the config from a partial document: defaults for the
    /// document's dataset and framework, overridden field by field.
    pub fn from_document(doc: Value) -> Result<Self> {
        let doc = normalize_aliases(doc)?;
        let dataset: Dataset = pick(&doc, "dataset")?.unwrap_or_default();
        let framework: Framework = pick(&doc, "framework")?.unwrap_or(Framework::SimClr);
        let mut base = serde_json::to_value(Self::defaults(dataset, framework))?;
        check_known(&base, &doc, "")?;
        merge(&mut base, doc);
        let cfg: ExperimentConfig = serde_path_to_error(base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key=value` overrides on top of this config.
    pub fn with_overrides(&self, pairs: &[(String, String)]) -> Result<Self> {
        let mut doc = serde_json::to_value(self)?;
        let mut patch = Value::Object(Map::new());
        for (k, v) in pairs {
            insert_dotted(&mut patch, k, parse_scalar(v))?;
        }
        let patch = normalize_aliases(patch)?;
        check_known(&doc, &patch, "")?;
        merge(&mut doc, patch);
        let cfg: ExperimentConfig = serde_path_to_error(doc)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("batch_size", self.batch_size), ("workers", self.workers)];
        for (field, v) in positive {
            if v == 0 {
                return Err(Error::config(field, "must be positive"));
            }
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::config("lr", format!("must be finite and non-negative, got {}", self.lr)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::config("weight_decay", "must be non-negative"));
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(Error::config("sample_rate_hz", "must be positive"));
        }
        if self.split.iter().any(|f| !(0.0..=1.0).contains(f)) || (self.split.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
            return Err(Error::config("split", format!("fractions {:?} must lie in [0, 1] and sum to 1", self.split)));
        }
        if self.split[0] == 0.0 || self.split[1] == 0.0 || self.split[2] == 0.0 {
            return Err(Error::config("split", "train, validation and test must all be non-empty"));
        }
        if let (Some(l), Some(s)) = (self.window_length, self.window_step) {
            if s == 0 || s > l {
                return Err(Error::config("window_step", format!("must be in 1..={l}")));
            }
        }
        if self.probe.epochs == 0 || self.probe.batch_size == 0 || !(self.probe.lr > 0.0) {
            return Err(Error::config("probe", "epochs, batch_size and lr must be positive"));
        }
        self.contrastive().validate()?;
        let mut enc = self.backbone.clone();
        enc.input_length = enc.input_length.max(1);
        enc.input_channels = enc.input_channels.max(1);
        enc.validate()?;
        self.synthetic.validate()?;
        if self.window_sweep.lengths.is_empty() || self.window_sweep.lengths.iter().any(|&l| l < 2) {
            return Err(Error::config("window_sweep.lengths", "need at least one length >= 2"));
        }
        if self.window_sweep.step_fractions.is_empty() || self.window_sweep.step_fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(Error::config("window_sweep.step_fractions", "fractions must lie in (0, 1]"));
        }
        if self.grid.key == AUG_PAIRS {
            if self.grid.augmentations.is_empty() {
                return Err(Error::config("grid.augmentations", "need at least one augmentation"));
            }
        } else {
            let probe = serde_json::to_value(self)?;
            if lookup_dotted(&probe, &self.grid.key).is_none() {
                return Err(Error::config("grid.key", format!("`{}` is not a config field", self.grid.key)));
            }
        }
        Ok(())
    }

    /// Seeds to run, the main seed first.
    pub fn all_seeds(&self) -> Vec<u64> {
        let mut s = vec![self.seed];
        s.extend(self.seeds.iter().copied().filter(|x| *x != self.seed));
        s
    }

    pub fn contrastive(&self) -> ContrastiveConfig {
        ContrastiveConfig {
            framework: self.framework,
            temperature: self.temperature,
            symmetrize: true,
            ema_momentum: self.ema_momentum,
            queue_size: self.queue_size,
            projector: self.projector.clone(),
            predictor: self.predictor.clone(),
            recon_weight: self.recon_weight,
        }
    }

    pub fn pretrain(&self, seed: u64) -> PretrainConfig {
        let spec = |kind| AugmentationSpec { kind, rng_seed: 0, params: self.aug_params.clone() };
        PretrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            weight_decay: self.weight_decay,
            aug1: spec(self.aug1),
            aug2: spec(self.aug2),
            pair_mode: self.pair_mode,
            sampling: self.sampling,
            seed,
        }
    }

    /// Backbone config for windows of the given geometry.
    pub fn encoder(&self, length: usize, channels: usize) -> EncoderConfig {
        EncoderConfig { input_length: length, input_channels: channels, ..self.backbone.clone() }
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn pick<V: serde::de::DeserializeOwned>(doc: &Value, key: &str) -> Result<Option<V>> {
    doc.get(key).cloned().map(serde_json::from_value).transpose().map_err(|e| Error::config(key, e.to_string()))
}

fn serde_path_to_error(doc: Value) -> Result<ExperimentConfig> {
    serde_json::from_value(doc).map_err(|e| {
        let msg = e.to_string();
        Error::config(field_hint(&msg).unwrap_or_else(|| "config".into()), msg)
    })
}

/// Best-effort field name from a serde message such as
/// "unknown variant `x`, expected ..." (no path) or "invalid type ... for key `a`".
fn field_hint(msg: &str) -> Option<String> {
    let start = msg.find("field `")? + 7;
    Some(msg[start..].split('`').next()?.to_string())
}

/// JSON when the text starts with `{`, otherwise `key = value` lines with
/// `#` comments and dotted keys for nested fields.
pub fn parse_document(text: &str) -> Result<Value> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v: Value = serde_json::from_str(trimmed).map_err(|e| Error::config("config", format!("bad JSON: {e}")))?;
        return Ok(v);
    }
    let mut doc = Value::Object(Map::new());
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config("config", format!("line {}: expected key = value", n + 1)))?;
        insert_dotted(&mut doc, k.trim(), parse_scalar(v.trim()))?;
    }
    Ok(doc)
}

/// JSON literal when it parses as one, else a bare string.
pub fn parse_scalar(v: &str) -> Value {
    serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()))
}

fn insert_dotted(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::config(key, "empty key segment"));
    }
    let mut cur = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for p in &parts[..parts.len() - 1] {
        let obj = cur.as_object_mut().ok_or_else(|| Error::config(key, "conflicts with a scalar value"))?;
        cur = obj.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = cur.as_object_mut().ok_or_else(|| Error::config(key, "conflicts with a scalar value"))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn lookup_dotted<'a>(doc: &'a Value, key: &str) -> Option<&'a Value> {
    key.split('.').try_fold(doc, |v, p| v.get(p))
}

/// `backbone = cnn` is shorthand for `backbone.kind = cnn`.
fn normalize_aliases(mut doc: Value) -> Result<Value> {
    let obj = doc.as_object_mut().ok_or_else(|| Error::config("config", "top level must be an object"))?;
    if let Some(Value::String(kind)) = obj.get("backbone").cloned() {
        obj.insert("backbone".into(), serde_json::json!({ "kind": kind }));
    }
    Ok(doc)
}

/// Rejects keys absent from the defaults. Optional fields serialize as
/// null and accept any value; so do list and free-form values.
fn check_known(base: &Value, doc: &Value, prefix: &str) -> Result<()> {
    let (Some(b), Some(d)) = (base.as_object(), doc.as_object()) else { return Ok(()) };
    for (k, v) in d {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match b.get(k) {
            None => return Err(Error::config(path, "unknown field")),
            Some(inner) if inner.is_object() => check_known(inner, v, &path)?,
            Some(_) => {}
        }
    }
    Ok(())
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Config for one grid cell: `key` set to `value` on top of `cfg`.
pub fn with_value(cfg: &ExperimentConfig, key: &str, value: &Value) -> Result<ExperimentConfig> {
    let mut doc = serde_json::to_value(cfg)?;
    let mut patch = Value::Object(Map::new());
    insert_dotted(&mut patch, key, value.clone())?;
    let patch = normalize_aliases(patch)?;
    check_known(&doc, &patch, "")?;
    merge(&mut doc, patch);
    let cell: ExperimentConfig = serde_path_to_error(doc)?;
    cell.validate()?;
    Ok(cell)
}
