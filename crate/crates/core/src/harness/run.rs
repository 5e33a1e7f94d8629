use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::config::{with_value, Dataset, ExperimentConfig, Protocol, AUG_PAIRS};
use super::probe::{parameter_checksum, probe_encoder, ProbeScores};
use super::report::{Audit, EpochLog, Grid, MetricRow, RunReport};
use crate::augment::make_views;
use crate::backbones::{Encoder, EncoderKind};
use crate::contrastive::{pretrain, ContrastiveModel, EpochReport};
use crate::data::{
    default_window, gen_synthetic, gen_synthetic_recordings, read_recordings, read_windows_jsonl, segment_windows,
    split_leave_one_domain_out, split_random, zscore_normalize, DevicePosition, RawRecording, TimeSeriesWindow,
    SHAR_EXCLUDED_DOMAINS,
};
use crate::error::{Error, Result};

/// Input of a run: ready windows, or recordings still to be segmented.
#[derive(Clone, Debug)]
pub enum DataSource {
    Windows(Vec<TimeSeriesWindow>),
    Recordings(Vec<RawRecording>),
}

/// Reads `cfg.data`, or generates synthetic data when it is absent.
pub fn load_data(cfg: &ExperimentConfig) -> Result<DataSource> {
    let source = match &cfg.data {
        None if cfg.dataset != Dataset::Synthetic => {
            return Err(Error::config("data", format!("dataset `{}` needs a data path", cfg.dataset)));
        }
        None if cfg.protocol == Protocol::WindowSweep => DataSource::Recordings(gen_synthetic_recordings(&cfg.synthetic)?),
        None => DataSource::Windows(gen_synthetic(&cfg.synthetic)?),
        Some(p) if p.ends_with(".jsonl") => DataSource::Windows(read_windows_jsonl(Path::new(p))?),
        Some(p) => DataSource::Recordings(read_recordings(Path::new(p), cfg.sample_rate_hz)?),
    };
    Ok(match (cfg.dataset, source) {
        (Dataset::Shar, DataSource::Windows(w)) => DataSource::Windows(w.into_iter().filter(|w| !shar_excluded(&w.domain)).collect()),
        (Dataset::Shar, DataSource::Recordings(r)) => {
            DataSource::Recordings(r.into_iter().filter(|r| !shar_excluded(&r.subject_id)).collect())
        }
        (_, s) => s,
    })
}

fn shar_excluded(domain: &str) -> bool {
    domain.parse::<u32>().is_ok_and(|d| SHAR_EXCLUDED_DOMAINS.contains(&d))
}

/// Sliding window used to segment recordings.
pub fn window_geometry(cfg: &ExperimentConfig) -> (usize, usize) {
    let fallback = default_window(cfg.dataset.name()).unwrap_or((cfg.synthetic.length, (cfg.synthetic.length / 2).max(1)));
    let length = cfg.window_length.unwrap_or(fallback.0);
    let step = cfg.window_step.unwrap_or(if cfg.window_length.is_some() { (length / 2).max(1) } else { fallback.1 });
    (length, step)
}

fn segment_all(recordings: &[RawRecording], length: usize, step: usize) -> Result<Vec<TimeSeriesWindow>> {
    let mut out = vec![];
    for r in recordings {
        out.extend(segment_windows(r, length, step)?);
    }
    if out.is_empty() {
        return Err(Error::Data("no windows".into()));
    }
    Ok(out)
}

impl DataSource {
    pub fn windows(&self, cfg: &ExperimentConfig) -> Result<Vec<TimeSeriesWindow>> {
        match self {
            DataSource::Windows(w) if w.is_empty() => Err(Error::Data("no windows".into())),
            DataSource::Windows(w) => Ok(w.clone()),
            DataSource::Recordings(r) => {
                let (l, s) = window_geometry(cfg);
                segment_all(r, l, s)
            }
        }
    }
}

/// Worker cap from `HAR_CL_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("HAR_CL_THREADS").ok()?.trim().parse::<usize>().ok().filter(|n| *n > 0)
}

fn effective_workers(requested: usize) -> usize {
    thread_cap().map_or(requested, |c| requested.min(c)).max(1)
}

/// One isolated pretrain-and-probe run.
struct Cell {
    name: String,
    cfg: ExperimentConfig,
    seed: u64,
    /// Index into the windows list shared by all cells of a run.
    data: usize,
    train: Vec<usize>,
    validation: Vec<usize>,
    tests: Vec<Vec<usize>>,
    probe: bool,
}

struct CellOutcome {
    epochs: Vec<EpochReport>,
    pretrained: Option<ProbeScores>,
    random: Option<ProbeScores>,
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

/// Path of the encoder checkpoint written for a cell.
pub fn checkpoint_path(dir: &Path, cell: &str, seed: u64) -> PathBuf {
    dir.join(format!("{}_seed{seed}.ckpt", slug(cell)))
}

fn run_cell(cell: &Cell, windows: &[TimeSeriesWindow], checkpoints: Option<&Path>) -> Result<CellOutcome> {
    let cfg = &cell.cfg;
    let normalized;
    let windows = if cfg.normalize {
        normalized = zscore_normalize(windows, &cell.train)?.windows;
        &normalized[..]
    } else {
        windows
    };
    let first = &windows[cell.train[0]];
    let enc_cfg = cfg.encoder(first.length, first.channels);
    let mut model = ContrastiveModel::<f32>::new(&cfg.contrastive(), &enc_cfg, cell.seed)?;
    let mut epochs = vec![];
    if let Some(path) = &cfg.checkpoint {
        model.encoder.load(Path::new(path))?;
    } else if cfg.epochs > 0 {
        log::info!("{} seed {}: pretraining {} on {} windows", cell.name, cell.seed, cfg.framework, cell.train.len());
        epochs = pretrain(&mut model, windows, &cell.train, &cfg.pretrain(cell.seed), |_, _| Ok(()))?;
    }
    if let Some(dir) = checkpoints {
        std::fs::create_dir_all(dir)?;
        model.encoder.save(&checkpoint_path(dir, &cell.name, cell.seed))?;
    }
    if !cell.probe {
        return Ok(CellOutcome { epochs, pretrained: None, random: None });
    }
    let tests: Vec<&[usize]> = cell.tests.iter().map(Vec::as_slice).collect();
    let before = parameter_checksum(&model.encoder);
    let pretrained = probe_encoder(&model.encoder, windows, &cell.train, &cell.validation, &tests, &cfg.probe, cell.seed)?;
    if parameter_checksum(&model.encoder) != before {
        return Err(Error::invalid("probing changed the encoder parameters"));
    }
    let random = if cfg.baseline {
        let enc = Encoder::<f32>::build(&enc_cfg, cell.seed)?;
        Some(probe_encoder(&enc, windows, &cell.train, &cell.validation, &tests, &cfg.probe, cell.seed)?)
    } else {
        None
    };
    Ok(CellOutcome { epochs, pretrained: Some(pretrained), random })
}

/// Runs cells in order, or on `workers` threads; each thread builds its
/// own model, so cells share nothing mutable and results keep cell order.
fn run_cells(cells: &[Cell], data: &[Vec<TimeSeriesWindow>], workers: usize, checkpoints: Option<&Path>) -> Result<Vec<CellOutcome>> {
    let workers = effective_workers(workers).min(cells.len()).max(1);
    if workers == 1 {
        return cells.iter().map(|c| run_cell(c, &data[c.data], checkpoints)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<CellOutcome>>>> = Mutex::new((0..cells.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= cells.len() {
                    break;
                }
                let r = run_cell(&cells[i], &data[cells[i].data], checkpoints);
                slots.lock().expect("result slots")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("result slots").into_iter().map(|r| r.expect("every cell ran")).collect()
}

/// Entry point of every protocol.
pub struct Runner {
    pub cfg: ExperimentConfig,
    /// Run directory; checkpoints go to its `checkpoints/` child.
    pub out: Option<PathBuf>,
}

struct Plan {
    cells: Vec<Cell>,
    data: Vec<Vec<TimeSeriesWindow>>,
    /// Split labels of each cell's test sets.
    targets: Vec<Vec<String>>,
}

impl Runner {
    pub fn new(cfg: ExperimentConfig, out: Option<PathBuf>) -> Self {
        Runner { cfg, out }
    }

    fn checkpoint_dir(&self, default_on: bool) -> Option<PathBuf> {
        let on = self.cfg.save_checkpoints.unwrap_or(default_on);
        self.out.as_ref().filter(|_| on).map(|o| o.join("checkpoints"))
    }

    /// Dispatches on `cfg.protocol`.
    pub fn run(&self, source: &DataSource) -> Result<RunReport> {
        match self.cfg.protocol {
            Protocol::RandomSplit => self.random_split(source),
            Protocol::CrossPerson => self.cross_person(source),
            Protocol::WearingDiversity => self.wearing_diversity(source),
            Protocol::WindowSweep => self.window_sweep(source),
            Protocol::Grid => self.grid(source),
        }
    }

    fn execute(&self, plan: Plan, single: bool, report: &mut RunReport) -> Result<Vec<CellOutcome>> {
        let dir = self.checkpoint_dir(single);
        let outcomes = run_cells(&plan.cells, &plan.data, self.cfg.workers, dir.as_deref())?;
        for ((cell, out), targets) in plan.cells.iter().zip(&outcomes).zip(&plan.targets) {
            for e in &out.epochs {
                report.epochs.push(EpochLog {
                    cell: cell.name.clone(),
                    seed: cell.seed,
                    epoch: e.epoch,
                    loss: e.mean_loss,
                    batches: e.batches,
                    lr: e.lr,
                    wall_ms: e.wall_ms,
                });
            }
            if let Some(last) = out.epochs.last() {
                report.metrics.push(row(&cell.name, cell.seed, "pretrained", "train", "loss", last.mean_loss));
            }
            for (encoder, scores) in [("pretrained", &out.pretrained), ("random", &out.random)] {
                let Some(s) = scores else { continue };
                report.metrics.push(row(&cell.name, cell.seed, encoder, "train", "accuracy", s.train_accuracy));
                report.metrics.push(row(&cell.name, cell.seed, encoder, "validation", "accuracy", s.validation_accuracy));
                for (t, acc) in targets.iter().zip(&s.test_accuracies) {
                    report.metrics.push(row(&cell.name, cell.seed, encoder, t, "accuracy", *acc));
                }
            }
        }
        Ok(outcomes)
    }

    fn finish(&self, mut report: RunReport, start: Instant) -> RunReport {
        report.wall_ms = start.elapsed().as_millis() as u64;
        report
    }

    fn random_split_cells(&self, cfg: &ExperimentConfig, name: &str, data: usize, n: usize, probe: bool) -> Result<Vec<Cell>> {
        cfg.all_seeds()
            .into_iter()
            .map(|seed| {
                let s = split_random(n, (cfg.split[0], cfg.split[1], cfg.split[2]), seed)?;
                Ok(Cell {
                    name: name.into(),
                    cfg: cfg.clone(),
                    seed,
                    data,
                    train: s.train,
                    validation: s.validation,
                    tests: vec![s.test],
                    probe,
                })
            })
            .collect()
    }

    /// Pretrain on the random-split train indices and probe on test.
    pub fn random_split(&self, source: &DataSource) -> Result<RunReport> {
        let start = Instant::now();
        let windows = source.windows(&self.cfg)?;
        let cells = self.random_split_cells(&self.cfg, "main", 0, windows.len(), true)?;
        let targets = vec![vec!["test".to_string()]; cells.len()];
        let mut report = RunReport::new(&self.cfg);
        self.execute(Plan { cells, data: vec![windows], targets }, true, &mut report)?;
        Ok(self.finish(report, start))
    }

    /// Pretraining only, on the same train indices `random_split` uses.
    pub fn pretrain_only(&self, source: &DataSource) -> Result<RunReport> {
        let start = Instant::now();
        let windows = source.windows(&self.cfg)?;
        let cells = self.random_split_cells(&self.cfg, "main", 0, windows.len(), false)?;
        let targets = vec![vec![]; cells.len()];
        let mut report = RunReport::new(&self.cfg);
        self.execute(Plan { cells, data: vec![windows], targets }, true, &mut report)?;
        Ok(self.finish(report, start))
    }

    /// Leave-one-domain-out: one cell per target domain and seed.
    pub fn cross_person(&self, source: &DataSource) -> Result<RunReport> {
        let start = Instant::now();
        let windows = source.windows(&self.cfg)?;
        let domains: BTreeSet<&str> = windows.iter().map(|w| w.domain.as_str()).collect();
        let targets: Vec<String> = if self.cfg.cross_person.targets.is_empty() {
            domains.iter().map(|d| d.to_string()).collect()
        } else {
            self.cfg.cross_person.targets.clone()
        };
        if domains.len() < 2 {
            return Err(Error::Data("cross-person evaluation needs at least two domains".into()));
        }
        let mut report = RunReport::new(&self.cfg);
        let mut cells = vec![];
        for target in &targets {
            for seed in self.cfg.all_seeds() {
                let s = split_leave_one_domain_out(&windows, target, self.cfg.cross_person.sources.as_deref(), seed)?;
                let name = format!("target={target}");
                let in_train = |i: &usize| windows[*i].domain == *target;
                let leaked = s.train.iter().filter(|i| in_train(i)).count() + s.validation.iter().filter(|i| in_train(i)).count();
                let off_target = s.test.iter().filter(|i| !in_train(i)).count();
                report.audits.push(Audit {
                    cell: name.clone(),
                    seed,
                    train: s.train.len(),
                    validation: s.validation.len(),
                    test: s.test.len(),
                    leaked: leaked + off_target,
                    note: format!("target domain {target}"),
                });
                cells.push(Cell {
                    name,
                    cfg: self.cfg.clone(),
                    seed,
                    data: 0,
                    train: s.train,
                    validation: s.validation,
                    tests: vec![s.test],
                    probe: true,
                });
            }
        }
        check_audits(&report)?;
        let labels = vec![vec!["target".to_string()]; cells.len()];
        let seeds: Vec<(String, u64)> = cells.iter().map(|c| (c.name.clone(), c.seed)).collect();
        self.execute(Plan { cells, data: vec![windows], targets: labels }, true, &mut report)?;
        let mut grid = Grid::new("cross_person", "source", vec!["all".into()], targets.clone());
        if let Some(src) = &self.cfg.cross_person.sources {
            grid.rows = vec![src.join("+")];
        }
        let row_name = grid.rows[0].clone();
        for t in &targets {
            let name = format!("target={t}");
            let accs: Vec<f64> = seeds
                .iter()
                .filter(|(c, _)| *c == name)
                .filter_map(|(c, s)| report.metric(c, *s, "pretrained", "target", "accuracy"))
                .collect();
            grid.set(&row_name, t, mean(&accs));
        }
        report.grids.push(grid);
        Ok(self.finish(report, start))
    }

    /// Source rows {phone, watch, phone+watch} by target columns {phone, watch}.
    pub fn wearing_diversity(&self, source: &DataSource) -> Result<RunReport> {
        let start = Instant::now();
        let windows = source.windows(&self.cfg)?;
        let positions = [DevicePosition::Phone, DevicePosition::Watch];
        for p in positions {
            if !windows.iter().any(|w| w.position == p) {
                return Err(Error::Data(format!("no windows at position `{p}`")));
            }
        }
        let sources: [(&str, &[DevicePosition]); 3] =
            [("phone", &positions[..1]), ("watch", &positions[1..]), ("phone+watch", &positions[..])];
        let mut report = RunReport::new(&self.cfg);
        let mut cells = vec![];
        let [f_train, f_val, _] = self.cfg.split;
        for seed in self.cfg.all_seeds() {
            // per-position pools so each test set is disjoint from every training set
            let mut pools = vec![];
            for (k, p) in positions.iter().enumerate() {
                let mut idx: Vec<usize> = (0..windows.len()).filter(|&i| windows[i].position == *p).collect();
                idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ (k as u64 + 1).wrapping_mul(0x9e37_79b9)));
                let n_train = ((idx.len() as f64 * f_train).round() as usize).clamp(1, idx.len().saturating_sub(2).max(1));
                let n_val = ((idx.len() as f64 * f_val).round() as usize).clamp(1, idx.len().saturating_sub(n_train + 1).max(1));
                let test = idx.split_off((n_train + n_val).min(idx.len()));
                let val = idx.split_off(n_train.min(idx.len()));
                pools.push((idx, val, test));
            }
            for (name, src) in sources {
                let picked: Vec<usize> = positions.iter().enumerate().filter(|(_, p)| src.contains(p)).map(|(k, _)| k).collect();
                let mut train: Vec<usize> = picked.iter().flat_map(|&k| pools[k].0.clone()).collect();
                let mut validation: Vec<usize> = picked.iter().flat_map(|&k| pools[k].1.clone()).collect();
                train.sort_unstable();
                validation.sort_unstable();
                let tests: Vec<Vec<usize>> = pools.iter().map(|p| p.2.clone()).collect();
                let test_set: HashSet<usize> = tests.iter().flatten().copied().collect();
                let leaked = train
                    .iter()
                    .chain(&validation)
                    .filter(|&&i| test_set.contains(&i) || !src.contains(&windows[i].position))
                    .count();
                let covered = train.len() + validation.len();
                let available: usize = pools.iter().enumerate().filter(|(k, _)| picked.contains(k)).map(|(_, p)| p.0.len() + p.1.len()).sum();
                report.audits.push(Audit {
                    cell: format!("source={name}"),
                    seed,
                    train: train.len(),
                    validation: validation.len(),
                    test: test_set.len(),
                    leaked: leaked + available.abs_diff(covered),
                    note: format!("{covered} of {available} training-pool windows used"),
                });
                cells.push(Cell {
                    name: format!("source={name}"),
                    cfg: self.cfg.clone(),
                    seed,
                    data: 0,
                    train,
                    validation,
                    tests,
                    probe: true,
                });
            }
        }
        check_audits(&report)?;
        let labels = vec![positions.iter().map(|p| format!("target={p}")).collect::<Vec<_>>(); cells.len()];
        let keys: Vec<(String, u64)> = cells.iter().map(|c| (c.name.clone(), c.seed)).collect();
        self.execute(Plan { cells, data: vec![windows], targets: labels }, true, &mut report)?;
        let rows: Vec<String> = sources.iter().map(|s| s.0.to_string()).collect();
        let cols: Vec<String> = positions.iter().map(|p| p.to_string()).collect();
        let mut grid = Grid::new("wearing", "source", rows.clone(), cols.clone());
        for r in &rows {
            for c in &cols {
                let accs: Vec<f64> = keys
                    .iter()
                    .filter(|(n, _)| *n == format!("source={r}"))
                    .filter_map(|(n, s)| report.metric(n, *s, "pretrained", &format!("target={c}"), "accuracy"))
                    .collect();
                grid.set(r, c, mean(&accs));
            }
        }
        report.grids.push(grid);
        Ok(self.finish(report, start))
    }

    /// Re-segments the recordings for every (length, step) cell.
    pub fn window_sweep(&self, source: &DataSource) -> Result<RunReport> {
        let start = Instant::now();
        let DataSource::Recordings(recordings) = source else {
            return Err(Error::Data("the window sweep needs recordings, not pre-cut windows".into()));
        };
        let sweep = &self.cfg.window_sweep;
        let mut data = vec![];
        let mut cells = vec![];
        let mut coords = vec![];
        for &frac in &sweep.step_fractions {
            for &len in &sweep.lengths {
                let step = ((len as f64 * frac).round() as usize).clamp(1, len);
                let windows = segment_all(recordings, len, step)?;
                let name = format!("L={len},step={step}");
                let mut cfg = self.cfg.clone();
                cfg.window_length = Some(len);
                cfg.window_step = Some(step);
                cells.extend(self.random_split_cells(&cfg, &name, data.len(), windows.len(), true)?);
                coords.push((name, format!("step={frac}"), format!("L={len}")));
                data.push(windows);
            }
        }
        let mut report = RunReport::new(&self.cfg);
        let targets = vec![vec!["test".to_string()]; cells.len()];
        self.execute(Plan { cells, data, targets }, false, &mut report)?;
        let rows: Vec<String> = sweep.step_fractions.iter().map(|f| format!("step={f}")).collect();
        let cols: Vec<String> = sweep.lengths.iter().map(|l| format!("L={l}")).collect();
        let mut grid = Grid::new("window_sweep", "step_fraction", rows, cols);
        for (name, r, c) in coords {
            let accs: Vec<f64> = self
                .cfg
                .all_seeds()
                .iter()
                .filter_map(|s| report.metric(&name, *s, "pretrained", "test", "accuracy"))
                .collect();
            grid.set(&r, &c, mean(&accs));
        }
        report.grids.push(grid);
        Ok(self.finish(report, start))
    }

    /// One-axis ablation, or the augmentation pair matrix for `aug_pairs`.
    pub fn grid(&self, source: &DataSource) -> Result<RunReport> {
        let start = Instant::now();
        let windows = source.windows(&self.cfg)?;
        let key = self.cfg.grid.key.clone();
        let mut cells = vec![];
        let mut coords = vec![];
        let (rows, cols) = if key == AUG_PAIRS {
            let augs = &self.cfg.grid.augmentations;
            for &a in augs {
                for &b in augs {
                    let mut cfg = self.cfg.clone();
                    cfg.aug1 = a;
                    cfg.aug2 = b;
                    let name = format!("aug1={},aug2={}", a.name(), b.name());
                    cells.extend(self.random_split_cells(&cfg, &name, 0, windows.len(), true)?);
                    coords.push((name, a.name().to_string(), b.name().to_string()));
                }
            }
            let names: Vec<String> = augs.iter().map(|a| a.name().to_string()).collect();
            (names.clone(), names)
        } else {
            let values = grid_values(&key, &self.cfg.grid.values)?;
            let mut rows = vec![];
            for v in &values {
                let cfg = with_value(&self.cfg, &key, v)?;
                let label = value_label(v);
                let name = format!("{key}={label}");
                cells.extend(self.random_split_cells(&cfg, &name, 0, windows.len(), true)?);
                coords.push((name, label.clone(), "accuracy".to_string()));
                rows.push(label);
            }
            (rows, vec!["accuracy".to_string()])
        };
        let mut report = RunReport::new(&self.cfg);
        let targets = vec![vec!["test".to_string()]; cells.len()];
        self.execute(Plan { cells, data: vec![windows], targets }, false, &mut report)?;
        let corner = if key == AUG_PAIRS { "aug1\\aug2".to_string() } else { key };
        let mut grid = Grid::new("grid", &corner, rows, cols);
        for (name, r, c) in coords {
            let accs: Vec<f64> = self
                .cfg
                .all_seeds()
                .iter()
                .filter_map(|s| report.metric(&name, *s, "pretrained", "test", "accuracy"))
                .collect();
            grid.set(&r, &c, mean(&accs));
        }
        report.grids.push(grid);
        Ok(self.finish(report, start))
    }
}

fn row(cell: &str, seed: u64, encoder: &str, split: &str, metric: &str, value: f64) -> MetricRow {
    MetricRow { cell: cell.into(), seed, encoder: encoder.into(), split: split.into(), metric: metric.into(), value }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn check_audits(report: &RunReport) -> Result<()> {
    match report.audits.iter().find(|a| a.leaked > 0) {
        Some(a) => Err(Error::Data(format!("leakage audit failed for {} seed {}: {} windows", a.cell, a.seed, a.leaked))),
        None => Ok(()),
    }
}

/// Explicit values, or the standard sweep for well-known keys.
fn grid_values(key: &str, values: &[Value]) -> Result<Vec<Value>> {
    if !values.is_empty() {
        return Ok(values.to_vec());
    }
    let v = match key {
        "batch_size" => serde_json::json!([16, 32, 64, 128, 256, 512]),
        "queue_size" => serde_json::json!([128, 256, 512, 1024, 2048]),
        "projector.depth" | "predictor.depth" => serde_json::json!([1, 2, 3, 4]),
        "backbone.kind" => serde_json::to_value(EncoderKind::ALL)?,
        _ => return Err(Error::config("grid.values", format!("no default values for `{key}`"))),
    };
    Ok(v.as_array().cloned().unwrap_or_default())
}

fn value_label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Long-format CSV of one window and its two views:
/// `t,channel,original,view_a,view_b`.
pub fn augview(cfg: &ExperimentConfig, windows: &[TimeSeriesWindow]) -> Result<String> {
    let w = windows
        .get(cfg.augview.index)
        .ok_or_else(|| Error::config("augview.index", format!("only {} windows", windows.len())))?;
    let p = cfg.pretrain(cfg.seed);
    let (a, b) = make_views(w, &p.aug1.with_seed(cfg.seed), &p.aug2.with_seed(cfg.seed ^ 0x5555_5555), cfg.pair_mode)?;
    let mut out = csv::Writer::from_writer(vec![]);
    let err = |e: csv::Error| Error::Data(format!("csv: {e}"));
    out.write_record(["t", "channel", "original", "view_a", "view_b"]).map_err(err)?;
    for t in 0..w.length {
        for c in 0..w.channels {
            out.write_record([
                t.to_string(),
                c.to_string(),
                w.at(t, c).to_string(),
                a.at(t, c).to_string(),
                b.at(t, c).to_string(),
            ])
            .map_err(err)?;
        }
    }
    String::from_utf8(out.into_inner().map_err(|e| Error::Data(e.to_string()))?).map_err(|e| Error::Data(e.to_string()))
}
