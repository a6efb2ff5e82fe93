use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use netrca_core::faultlab::{generate_scenario, ScenarioKind, ScenarioSpec};
use netrca_core::statrca::{analyze, granger_test, weighted_pagerank, StatConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn granger(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("granger");
    for len in [200usize, 1000] {
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, _| {
            b.iter(|| granger_test(black_box(&y), black_box(&x), 3, 0.05).unwrap())
        });
    }
    group.finish();
}

fn pagerank(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 200;
    let edges: Vec<(usize, usize, f64)> = (0..n * 8)
        .map(|_| {
            (
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0.01..1.0),
            )
        })
        .filter(|(a, b, _)| a != b)
        .collect();
    c.bench_function("pagerank/200x1600", |b| {
        b.iter(|| weighted_pagerank(n, black_box(&edges), 0.85, 1e-9, 200))
    });
}

fn analysis(c: &mut Criterion) {
    let cfg = StatConfig::default();
    let mut group = c.benchmark_group("analyze");
    for kind in [
        ScenarioKind::GatewayResourceContention,
        ScenarioKind::SwitchCongestion,
    ] {
        let out = generate_scenario(&ScenarioSpec::default_for(kind, 0)).unwrap();
        group.bench_function(kind.slug(), |b| {
            b.iter(|| analyze(black_box(&out.snapshot), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, granger, pagerank, analysis);
criterion_main!(benches);
