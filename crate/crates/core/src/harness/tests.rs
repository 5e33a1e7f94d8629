use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::backbones::{Encoder, EncoderConfig, EncoderKind};
use crate::data::{gen_synthetic, split_random, window_count, DevicePosition, SyntheticConfig, TimeSeriesWindow};
use crate::error::Error;

#[test]
fn accuracy_examples() {
    assert_eq!(accuracy(&[1, 2, 0], &[1, 2, 0]).unwrap(), 1.0);
    assert_eq!(accuracy(&[1, 2, 0], &[0, 0, 1]).unwrap(), 0.0);
    assert_eq!(accuracy(&[0, 1, 1, 1], &[0, 1, 1, 0]).unwrap(), 0.75);
    assert!(accuracy(&[0], &[0, 1]).is_err());
    assert!(accuracy(&[], &[]).is_err());
}

fn small_encoder(length: usize, channels: usize) -> Encoder<f32> {
    let cfg = EncoderConfig { conv_channels: vec![8, 8, 8], ..EncoderConfig::new(EncoderKind::Cnn, length, channels) };
    Encoder::build(&cfg, 0).unwrap()
}

#[test]
fn separable_features_probe_perfectly() {
    let windows: Vec<TimeSeriesWindow> = (0..600)
        .map(|i| {
            let level = if i % 2 == 0 { 3.0 } else { -3.0 };
            let mut w = TimeSeriesWindow::new(vec![level; 16 * 2], 16, 2).unwrap();
            w.label = Some(i % 2);
            w
        })
        .collect();
    let enc = small_encoder(16, 2);
    let split = split_random(windows.len(), (0.6, 0.2, 0.2), 1).unwrap();
    let before = parameter_checksum(&enc);
    let r = linear_evaluate(&enc, &windows, &split, &ProbeConfig::default(), 0).unwrap();
    assert_eq!(r.test_accuracy, 1.0);
    assert_eq!(parameter_checksum(&enc), before);
}

#[test]
fn shuffled_labels_probe_at_chance() {
    let mut cfg = SyntheticConfig::new(3, 1, 334, 32, 3, 4);
    cfg.noise_std = 0.1;
    let mut windows = gen_synthetic(&cfg).unwrap();
    windows.truncate(1000);
    let mut labels: Vec<Option<usize>> = windows.iter().map(|w| w.label).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(9));
    for (w, l) in windows.iter_mut().zip(labels) {
        w.label = l;
    }
    let split = split_random(windows.len(), (0.6, 0.2, 0.2), 2).unwrap();
    let r = linear_evaluate(&small_encoder(32, 3), &windows, &split, &ProbeConfig { epochs: 20, ..Default::default() }, 0).unwrap();
    assert!((0.23..=0.43).contains(&r.test_accuracy), "{}", r.test_accuracy);
}

#[test]
fn probe_needs_labels_and_members() {
    let mut windows = gen_synthetic(&SyntheticConfig::new(2, 1, 10, 16, 2, 0)).unwrap();
    let enc = small_encoder(16, 2);
    let mut split = split_random(windows.len(), (0.6, 0.2, 0.2), 0).unwrap();
    windows[split.test[0]].label = None;
    assert!(matches!(linear_evaluate(&enc, &windows, &split, &ProbeConfig::default(), 0), Err(Error::Data(_))));
    split.validation.clear();
    assert!(matches!(linear_evaluate(&enc, &windows, &split, &ProbeConfig::default(), 0), Err(Error::Data(_))));
}

/// Toy-scale config: short windows, narrow network, one epoch.
fn toy(protocol: Protocol) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "protocol = {}
         epochs = 1
         batch_size = 16
         backbone.conv_channels = [8, 8, 8]
         projector.hidden_dim = 16
         projector.output_dim = 8
         probe.epochs = 5
         synthetic.length = 32
         synthetic.channels = 3
         synthetic.windows_per_class = 12
         synthetic.segment_length = 25
         synthetic.segments_per_recording = 20",
        protocol.name()
    ))
    .unwrap()
}

fn run(cfg: &ExperimentConfig) -> RunReport {
    Runner::new(cfg.clone(), None).run(&load_data(cfg).unwrap()).unwrap()
}

#[test]
fn random_split_reports_and_repeats() {
    let mut cfg = toy(Protocol::RandomSplit);
    cfg.baseline = true;
    cfg.seeds = vec![5];
    let r = run(&cfg);
    assert_eq!(r.config, cfg);
    assert_eq!(r.seeds, vec![0, 5]);
    for seed in [0, 5] {
        for enc in ["pretrained", "random"] {
            let acc = r.metric("main", seed, enc, "test", "accuracy").unwrap();
            assert!((0.0..=1.0).contains(&acc));
        }
    }
    assert_eq!(r.epochs.len(), 2);
    assert_eq!(run(&cfg).metrics_csv().unwrap(), r.metrics_csv().unwrap());
}

#[test]
fn pretrain_then_evaluate_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(Protocol::RandomSplit);
    let src = load_data(&cfg).unwrap();
    let r = Runner::new(cfg.clone(), Some(dir.path().to_path_buf())).pretrain_only(&src).unwrap();
    assert!(r.metrics.iter().all(|m| m.metric == "loss"));
    let ckpt = checkpoint_path(&dir.path().join("checkpoints"), "main", 0);
    assert!(ckpt.exists());
    let mut eval = cfg.clone();
    eval.checkpoint = Some(ckpt.to_string_lossy().into());
    let e = Runner::new(eval, None).run(&src).unwrap();
    assert!(e.epochs.is_empty());
    let full = Runner::new(cfg, None).run(&src).unwrap();
    assert_eq!(
        e.metric("main", 0, "pretrained", "test", "accuracy"),
        full.metric("main", 0, "pretrained", "test", "accuracy")
    );
}

#[test]
fn cross_person_never_trains_on_target() {
    let mut cfg = toy(Protocol::CrossPerson);
    cfg.synthetic.num_domains = 3;
    cfg.cross_person.targets = vec!["1".into()];
    let r = run(&cfg);
    assert_eq!(r.leaked(), 0);
    assert_eq!(r.audits.len(), 1);
    assert_eq!(r.audits[0].test, 36);
    assert!(r.metric("target=1", 0, "pretrained", "target", "accuracy").is_some());
    assert_eq!(r.grid("cross_person").unwrap().columns, vec!["1"]);

    cfg.cross_person.targets.clear();
    cfg.cross_person.sources = Some(vec!["0".into()]);
    cfg.epochs = 0;
    let err = Runner::new(cfg.clone(), None).run(&load_data(&cfg).unwrap()).unwrap_err();
    assert!(err.to_string().contains("target"), "{err}");
}

#[test]
fn wearing_matrix_layout() {
    let mut cfg = toy(Protocol::WearingDiversity);
    cfg.synthetic.positions = vec![DevicePosition::Phone, DevicePosition::Watch];
    cfg.epochs = 0;
    let r = run(&cfg);
    let g = r.grid("wearing").unwrap();
    assert_eq!(g.rows, vec!["phone", "watch", "phone+watch"]);
    assert_eq!(g.columns, vec!["phone", "watch"]);
    assert!(g.values.iter().flatten().all(|v| v.is_some_and(|a| (0.0..=1.0).contains(&a))));
    assert_eq!(r.leaked(), 0);
    let both = r.audits.iter().find(|a| a.cell == "source=phone+watch").unwrap();
    let phone = r.audits.iter().find(|a| a.cell == "source=phone").unwrap();
    let watch = r.audits.iter().find(|a| a.cell == "source=watch").unwrap();
    assert_eq!(both.train + both.validation + both.test, 72);
    assert_eq!(both.train, phone.train + watch.train);

    cfg.synthetic.positions = vec![DevicePosition::Phone];
    assert!(matches!(Runner::new(cfg.clone(), None).run(&load_data(&cfg).unwrap()), Err(Error::Data(_))));
}

#[test]
fn window_sweep_grid() {
    let mut cfg = toy(Protocol::WindowSweep);
    cfg.window_sweep.lengths = vec![16, 32];
    cfg.window_sweep.step_fractions = vec![0.5, 1.0];
    cfg.epochs = 0;
    let src = load_data(&cfg).unwrap();
    let DataSource::Recordings(recs) = &src else { panic!("recordings expected") };
    let total = recs[0].len();
    let half = window_count(total, 32, 16);
    let full = window_count(total, 32, 32);
    assert!((half as i64 - 2 * full as i64).abs() <= 1);
    let r = Runner::new(cfg.clone(), None).run(&src).unwrap();
    let g = r.grid("window_sweep").unwrap();
    assert_eq!(g.rows, vec!["step=0.5", "step=1"]);
    assert_eq!(g.columns, vec!["L=16", "L=32"]);
    assert!(g.values.iter().flatten().all(Option::is_some));

    cfg.window_sweep.lengths = vec![100_000];
    assert!(Runner::new(cfg, None).run(&src).is_err());
}

#[test]
fn ablation_grids() {
    let mut cfg = toy(Protocol::Grid);
    cfg.epochs = 0;
    cfg.probe.epochs = 1;
    cfg.grid.key = "batch_size".into();
    let r = run(&cfg);
    assert_eq!(r.grid("grid").unwrap().rows, vec!["16", "32", "64", "128", "256", "512"]);
    assert_eq!(r.metrics.iter().filter(|m| m.split == "test").count(), 6);

    cfg.grid.key = AUG_PAIRS.into();
    cfg.grid.augmentations = vec![crate::augment::AugKind::Noise, crate::augment::AugKind::Negate];
    let r = run(&cfg);
    let g = r.grid("grid").unwrap();
    assert_eq!((g.rows.len(), g.columns.len()), (2, 2));
    assert!(r.metric("aug1=negate,aug2=noise", 0, "pretrained", "test", "accuracy").is_some());
}

#[test]
fn grid_over_eleven_time_augmentations_has_121_cells() {
    let cfg = toy(Protocol::Grid);
    assert_eq!(cfg.grid.augmentations.len(), 11);
}

#[test]
fn parallel_cells_match_sequential() {
    let mut cfg = toy(Protocol::Grid);
    cfg.grid.key = "projector.depth".into();
    cfg.grid.values = vec![serde_json::json!(1), serde_json::json!(2)];
    let seq = run(&cfg);
    cfg.workers = 2;
    let par = run(&cfg);
    assert_eq!(seq.metrics_csv().unwrap(), par.metrics_csv().unwrap());
}

#[test]
fn augview_lists_every_sample() {
    let cfg = toy(Protocol::RandomSplit);
    let w = load_data(&cfg).unwrap().windows(&cfg).unwrap();
    let text = augview(&cfg, &w).unwrap();
    assert_eq!(text.lines().count(), 1 + 32 * 3);
    assert!(text.starts_with("t,channel,original,view_a,view_b\n"));
    let mut bad = cfg.clone();
    bad.augview.index = 10_000;
    assert!(augview(&bad, &w).is_err());
}

#[test]
fn real_dataset_needs_a_path() {
    let cfg = ExperimentConfig::parse("dataset = ucihar").unwrap();
    assert!(matches!(load_data(&cfg), Err(Error::InvalidConfig { .. })));
}

