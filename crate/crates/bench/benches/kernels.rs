//! Benchmarks for the hot kernels: the smooth-square gauge, the deleting
//! curve, the scheme inverse (fixed point inside), and the approximant with
//! its Jacobian.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smoothext_core::config::BlockLayout;
use smoothext_core::corpus::gen_clustered_corpus;
use smoothext_core::extract::ExtractionScheme;
use smoothext_core::gauges::GaugeKit;
use smoothext_core::seqspace::{ProductPoint, ProductSplit, SparseVec};
use smoothext_core::smoothing::{compose_pipeline, componentwise_abs, PipelineConfig, ScalarField};

fn bench_square_gauge(c: &mut Criterion) {
    let layout = BlockLayout::standard(64).unwrap();
    let kit = GaugeKit::for_fiber(layout.extraction.clone(), layout.data2.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    c.bench_function("smooth_square_gauge_corner", |b| {
        b.iter_batched(
            || (rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0)),
            |(x, y)| kit.square.mu(x, y),
            BatchSize::SmallInput,
        )
    });
}

fn bench_deleting_curve(c: &mut Criterion) {
    let layout = BlockLayout::standard(64).unwrap();
    let kit = GaugeKit::for_fiber(layout.extraction.clone(), layout.data2.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    c.bench_function("deleting_curve_eval", |b| {
        b.iter_batched(
            || rng.gen_range(1e-4..2.0),
            |t| kit.curve.eval(t).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_scheme_inverse(c: &mut Criterion) {
    let layout = BlockLayout::standard(64).unwrap();
    let kit = GaugeKit::for_fiber(layout.extraction.clone(), layout.data2.clone()).unwrap();
    let split = ProductSplit::new(layout.base(), layout.fiber()).unwrap();
    let scheme = ExtractionScheme::point_deletion(kit, split);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d2 = layout.data2.clone();
    c.bench_function("scheme_inverse_fixed_point", |b| {
        b.iter_batched(
            || {
                let pairs: Vec<(usize, f64)> = (0..6)
                    .map(|_| (d2[rng.gen_range(0..d2.len())], rng.gen_range(-1.0..1.0)))
                    .collect();
                ProductPoint::new(SparseVec::zero(), SparseVec::from_pairs(&pairs).unwrap())
            },
            |q| scheme.inverse(&q).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_pipeline_eval(c: &mut Criterion) {
    let mut config = PipelineConfig::standard(64, 2).unwrap();
    config.force_extraction = true;
    let layout = config.layout.clone();
    let f = componentwise_abs(layout.data1[0], layout.data2[0]);
    let eps: ScalarField = Arc::new(|x: &SparseVec| 0.1 * (1.0 + x.norm_l2()));
    let corpus = gen_clustered_corpus(4, 120, &layout.data(), 4, 0.02, 5e-4);
    let pipeline = compose_pipeline(&f, &eps, &corpus, config).unwrap();
    let mut idx = 0usize;
    c.bench_function("pipeline_eval_g_with_jacobian", |b| {
        b.iter(|| {
            idx = (idx + 1) % corpus.len();
            pipeline.eval_g(&corpus[idx]).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_square_gauge,
    bench_deleting_curve,
    bench_scheme_inverse,
    bench_pipeline_eval
);
criterion_main!(benches);
