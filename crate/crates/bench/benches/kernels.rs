use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use har_cl::augment::dft_forward;
use har_cl::backbones::{EncoderConfig, EncoderKind};
use har_cl::contrastive::info_nce;
use har_cl::numcore::functional as F;
use har_cl::numcore::{no_grad, ForwardCtx, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(shape: &[usize], seed: u64) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.iter().product();
    Tensor::new((0..n).map(|_| rng.random_range(-1.0f32..1.0)).collect(), shape).unwrap()
}

fn gemm(c: &mut Criterion) {
    let mut g = c.benchmark_group("gemm");
    for n in [64, 256, 512] {
        let (a, b) = (random(&[n, n], 1), random(&[n, n], 2));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| bench.iter(|| no_grad(|| a.matmul(&b)).unwrap()));
    }
    g.finish();
}

fn conv(c: &mut Criterion) {
    let x = random(&[64, 32, 128], 3);
    let w = random(&[64, 32, 8], 4);
    let b = random(&[64], 5);
    c.bench_function("conv1d 64x32x128 k8", |bench| bench.iter(|| no_grad(|| F::conv1d(&x, &w, Some(&b), 1, 4)).unwrap()));
    let p = Tensor::param(x.to_vec(), &[64, 32, 128]).unwrap();
    let wp = Tensor::param(w.to_vec(), &[64, 32, 8]).unwrap();
    c.bench_function("conv1d forward+backward", |bench| {
        bench.iter(|| {
            let y = F::conv1d(&p, &wp, None, 1, 4).unwrap();
            y.sum().backward().unwrap();
        })
    });
}

fn contrastive(c: &mut Criterion) {
    let mut g = c.benchmark_group("info_nce");
    for batch in [64, 256] {
        let (za, zb) = (random(&[batch, 128], 6), random(&[batch, 128], 7));
        g.bench_with_input(BenchmarkId::from_parameter(batch), &batch, |bench, _| {
            bench.iter(|| no_grad(|| info_nce(&za, &zb, 0.1)).unwrap())
        });
    }
    g.finish();
}

fn fft(c: &mut Criterion) {
    let mut g = c.benchmark_group("dft_forward");
    for len in [128, 151, 1024] {
        let x: Vec<f64> = (0..len).map(|i| (i as f64 * 0.37).sin()).collect();
        g.bench_with_input(BenchmarkId::from_parameter(len), &len, |bench, _| bench.iter(|| dft_forward(black_box(&x)).unwrap()));
    }
    g.finish();
}

fn encoder(c: &mut Criterion) {
    let enc = har_cl::backbones::Encoder::<f32>::build(&EncoderConfig::new(EncoderKind::Cnn, 128, 6), 0).unwrap();
    let x = random(&[64, 128, 6], 8);
    c.bench_function("cnn encode 64x128x6", |bench| {
        bench.iter(|| no_grad(|| enc.encode(&x, &mut ForwardCtx::eval())).unwrap())
    });
}

criterion_group!(benches, gemm, conv, contrastive, fft, encoder);
criterion_main!(benches);
