use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use factorlens_bench::{loadings, symmetric, synthetic};
use factorlens_core::efa::varimax_rotate;
use factorlens_core::matrix::eigen_sym;
use factorlens_core::pipeline::{analyse, evaluate, AnalysisConfig};

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigen_sym");
    for dim in [8, 16, 32] {
        let m = symmetric(dim);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &m, |b, m| {
            b.iter(|| eigen_sym(black_box(m)).unwrap())
        });
    }
    g.finish();
}

fn varimax(c: &mut Criterion) {
    let mut g = c.benchmark_group("varimax");
    for (p, k) in [(8, 3), (12, 4), (24, 6)] {
        let l = loadings(p, k);
        g.bench_with_input(BenchmarkId::new("p_k", format!("{p}x{k}")), &l, |b, l| {
            b.iter(|| varimax_rotate(black_box(l), true).unwrap())
        });
    }
    g.finish();
}

fn pipeline(c: &mut Criterion) {
    let cfg = AnalysisConfig::default();
    let (features, labels) = synthetic(100, 42);
    c.bench_function("analyse_n100", |b| {
        b.iter(|| analyse(black_box(&features), &cfg).unwrap())
    });
    let analysis = analyse(&features, &cfg).unwrap();
    let mut g = c.benchmark_group("train");
    g.sample_size(10);
    g.bench_function("cv_six_questions_n100", |b| {
        b.iter(|| {
            evaluate(
                &features,
                &analysis.scores,
                &labels,
                &[1, 2, 3, 4, 5, 6],
                &cfg,
            )
            .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, eigen, varimax, pipeline);
criterion_main!(benches);
