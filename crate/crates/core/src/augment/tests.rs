use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use super::*;

fn random_window(len: usize, channels: usize, seed: u64) -> TimeSeriesWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..len * channels).map(|_| rng.random_range(-2.0f32..2.0)).collect();
    TimeSeriesWindow::new(values, len, channels).unwrap()
}

fn max_abs_diff(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f32::max)
}

fn sorted(mut v: Vec<f32>) -> Vec<f32> {
    v.sort_by(f32::total_cmp);
    v
}

#[test]
fn negate_example() {
    let w = TimeSeriesWindow::new(vec![1.0, -2.0, 3.0], 3, 1).unwrap();
    let out = apply(&AugmentationSpec::new(AugKind::Negate, 0), &w).unwrap();
    assert_eq!(out.values, vec![-1.0, 2.0, -3.0]);
}

#[test]
fn flip_reverses_time() {
    let w = TimeSeriesWindow::new(vec![1.0, 10.0, 2.0, 20.0, 3.0, 30.0], 3, 2).unwrap();
    let out = apply(&AugmentationSpec::new(AugKind::TFlip, 0), &w).unwrap();
    assert_eq!(out.values, vec![3.0, 30.0, 2.0, 20.0, 1.0, 10.0]);
}

#[test]
fn every_kind_preserves_shape_and_is_deterministic() {
    let w = random_window(128, 6, 1);
    for kind in AugKind::all().chain([AugKind::Identity]) {
        let spec = AugmentationSpec::new(kind, 42);
        let a = apply(&spec, &w).unwrap();
        let b = apply(&spec, &w).unwrap();
        assert_eq!((a.length, a.channels), (128, 6), "{kind}");
        assert!(a.is_finite(), "{kind}");
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()), "{kind}");
        assert_eq!(a.label, w.label);
    }
}

#[test]
fn rotation_requires_triads() {
    let w = random_window(16, 4, 0);
    let err = apply(&AugmentationSpec::new(AugKind::Rotation, 0), &w).unwrap_err();
    assert!(matches!(err, Error::UnsupportedGeometry(_)));
}

#[test]
fn domain_mismatch_is_rejected() {
    let w = random_window(16, 3, 0);
    assert!(apply_time_aug(&AugmentationSpec::new(AugKind::Hfc, 0), &w).is_err());
    assert!(apply_freq_aug(&AugmentationSpec::new(AugKind::Noise, 0), &w).is_err());
}

#[test]
fn noise_and_scale_statistics() {
    let w = TimeSeriesWindow::new(vec![1.0; 20_000], 20_000, 1).unwrap();
    let out = apply(&AugmentationSpec::new(AugKind::Noise, 3), &w).unwrap();
    let diffs: Vec<f64> = out.values.iter().map(|v| *v as f64 - 1.0).collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diffs.len() as f64).sqrt();
    assert!(mean.abs() < 0.03 && (std - 0.8).abs() < 0.03, "mean {mean} std {std}");

    let w = TimeSeriesWindow::new(vec![1.0; 5000], 1, 5000).unwrap();
    let out = apply(&AugmentationSpec::new(AugKind::Scale, 4), &w).unwrap();
    let f: Vec<f64> = out.values.iter().map(|v| *v as f64).collect();
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    let std = (f.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / f.len() as f64).sqrt();
    assert!((mean - 2.0).abs() < 0.06 && (std - 1.1).abs() < 0.06, "mean {mean} std {std}");
}

#[test]
fn resample_keeps_endpoints() {
    let w = random_window(50, 2, 5);
    let out = apply(&AugmentationSpec::new(AugKind::Resample, 9), &w).unwrap();
    assert!(max_abs_diff(&out.values[..2], &w.values[..2]) < 1e-6);
    assert!(max_abs_diff(&out.values[98..], &w.values[98..]) < 1e-6);
    // a ramp stays monotone after resampling
    let ramp = TimeSeriesWindow::new((0..64).map(|t| t as f32).collect(), 64, 1).unwrap();
    let out = apply(&AugmentationSpec::new(AugKind::Resample, 1), &ramp).unwrap();
    assert!(out.values.windows(2).all(|p| p[1] > p[0]));
}

#[test]
fn warp_is_monotone_on_a_ramp() {
    let ramp = TimeSeriesWindow::new((0..128).map(|t| t as f32).collect(), 128, 1).unwrap();
    for seed in 0..20 {
        let out = apply(&AugmentationSpec::new(AugKind::TWarp, seed), &ramp).unwrap();
        assert!(out.values.windows(2).all(|p| p[1] >= p[0]), "seed {seed}");
        assert_eq!(out.values[0], 0.0);
        assert!((out.values[127] - 127.0).abs() < 1e-4);
        assert_ne!(out.values, ramp.values);
    }
}

#[test]
fn p_shift_keeps_amplitudes() {
    let w = random_window(100, 3, 6);
    let out = apply(&AugmentationSpec::new(AugKind::PShift, 2), &w).unwrap();
    for (a, b) in window_spectra(&w).iter().zip(window_spectra(&out).iter()) {
        let scale = a.amplitude.iter().fold(1.0f64, |m, v| m.max(*v));
        let err = a.amplitude.iter().zip(&b.amplitude).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-6 * scale, "{err}");
    }
    assert!(max_abs_diff(&w.values, &out.values) > 1e-3);
}

#[test]
fn null_perturbation_is_identity() {
    let w = random_window(128, 3, 7);
    let params = AugParams { ap_amplitude_std: 0.0, ap_phase_range: 0.0, ..Default::default() };
    for kind in [AugKind::ApF, AugKind::ApP] {
        let spec = AugmentationSpec { kind, rng_seed: 1, params: params.clone() };
        let out = apply(&spec, &w).unwrap();
        assert!(max_abs_diff(&w.values, &out.values) < 1e-6);
    }
}

#[test]
fn ap_p_touches_half_the_positive_bins() {
    let w = random_window(128, 1, 8);
    let before = window_spectra(&w);
    let out = apply(&AugmentationSpec::new(AugKind::ApP, 3), &w).unwrap();
    let after = window_spectra(&out);
    let changed: Vec<usize> = (1..64)
        .filter(|&k| (before[0].amplitude[k] - after[0].amplitude[k]).abs() > 1e-3 || (before[0].phase[k] - after[0].phase[k]).abs() > 1e-3)
        .collect();
    assert_eq!(changed.len(), 31);
    assert_eq!(changed.last().unwrap() - changed[0], 30);
}

#[test]
fn low_bin_sinusoid_split() {
    let l = 128;
    let x: Vec<f32> = (0..l).map(|t| (2.0 * PI * 3.0 * t as f64 / l as f64).sin() as f32).collect();
    let w = TimeSeriesWindow::new(x.clone(), l, 1).unwrap();
    let low = apply(&AugmentationSpec::new(AugKind::Lfc, 0), &w).unwrap();
    let high = apply(&AugmentationSpec::new(AugKind::Hfc, 0), &w).unwrap();
    assert!(max_abs_diff(&low.values, &x) < 1e-5);
    assert!(high.values.iter().all(|v| v.abs() < 1e-5));
}

#[test]
fn lfc_hfc_sum_to_input() {
    for l in [50, 100, 128, 151] {
        let w = random_window(l, 2, l as u64);
        let low = apply(&AugmentationSpec::new(AugKind::Lfc, 0), &w).unwrap();
        let high = apply(&AugmentationSpec::new(AugKind::Hfc, 0), &w).unwrap();
        let sum: Vec<f32> = low.values.iter().zip(&high.values).map(|(a, b)| a + b).collect();
        assert!(max_abs_diff(&sum, &w.values) < 1e-5, "L={l}");
    }
}

#[test]
fn views_by_mode() {
    let w = random_window(64, 3, 9);
    let id = AugmentationSpec::new(AugKind::Identity, 0);
    let (a, b) = make_views(&w, &id, &AugmentationSpec::new(AugKind::Noise, 0), PairMode::OneAug).unwrap();
    assert_eq!(a, w);
    assert_eq!(b, w);

    let neg = AugmentationSpec::new(AugKind::Negate, 5);
    let (a, b) = make_views(&w, &neg, &neg, PairMode::TwoAugs).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, w);

    let (a, b) = make_views(
        &w,
        &AugmentationSpec::new(AugKind::Noise, 1),
        &AugmentationSpec::new(AugKind::Scale, 2),
        PairMode::TwoAugs,
    )
    .unwrap();
    assert!(max_abs_diff(&a.values, &w.values) >= 1e-3);
    assert!(max_abs_diff(&b.values, &w.values) >= 1e-3);
    assert!(max_abs_diff(&a.values, &b.values) >= 1e-3);
    assert_eq!("1aug".parse::<PairMode>().unwrap(), PairMode::OneAug);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn involutions(seed in any::<u64>(), len in 2usize..80, d in 1usize..7) {
        let w = random_window(len, d, seed);
        for kind in [AugKind::Negate, AugKind::TFlip] {
            let spec = AugmentationSpec::new(kind, seed);
            let twice = apply(&spec, &apply(&spec, &w).unwrap()).unwrap();
            prop_assert_eq!(&twice.values, &w.values);
        }
    }

    #[test]
    fn rotation_is_isometric(seed in any::<u64>(), len in 2usize..64, groups in 1usize..3) {
        let w = random_window(len, 3 * groups, seed);
        let out = apply(&AugmentationSpec::new(AugKind::Rotation, seed), &w).unwrap();
        for (a, b) in w.values.chunks(3).zip(out.values.chunks(3)) {
            let na = a.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
            let nb = b.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
            prop_assert!((na - nb).abs() <= 1e-5 * na.max(1e-6));
        }
    }

    #[test]
    fn multisets_preserved(seed in any::<u64>(), len in 2usize..100, d in 1usize..7) {
        let w = random_window(len, d, seed);
        let out = apply(&AugmentationSpec::new(AugKind::Permute, seed), &w).unwrap();
        for c in 0..d {
            prop_assert_eq!(sorted(out.channel(c)), sorted(w.channel(c)));
        }
        let out = apply(&AugmentationSpec::new(AugKind::Shuffle, seed), &w).unwrap();
        for (a, b) in w.values.chunks(d).zip(out.values.chunks(d)) {
            prop_assert_eq!(sorted(a.to_vec()), sorted(b.to_vec()));
        }
    }

    #[test]
    fn frequency_views_are_real_and_shaped(seed in any::<u64>(), len in 2usize..160) {
        let w = random_window(len, 2, seed);
        for kind in AugKind::FREQUENCY {
            let out = apply(&AugmentationSpec::new(kind, seed), &w).unwrap();
            prop_assert_eq!((out.length, out.channels), (len, 2));
            prop_assert!(out.is_finite());
        }
    }
}
