use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use groundgame::fixtures::{random_cross_modal_spec, random_relevance_game};
use groundgame::{
    exact_values, generate, pairwise_interaction_grid, sampled_value, LocalizerConfig, Mode,
    Pipeline, SamplingPlan, SyntheticConfig, TableGame, ValueKind,
};
use std::hint::black_box;

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_values");
    for n in [8, 12, 16] {
        let game = random_relevance_game(n, 16, 1);
        group.bench_with_input(BenchmarkId::new("banzhaf", n), &game, |b, g| {
            b.iter(|| exact_values(black_box(g), ValueKind::Banzhaf).unwrap())
        });
    }
    group.finish();
}

fn sampled(c: &mut Criterion) {
    let game = random_relevance_game(12, 16, 1);
    let table = TableGame::tabulate(&game).unwrap();
    let mut group = c.benchmark_group("sampled_value_5500");
    for kind in [ValueKind::Banzhaf, ValueKind::Shapley] {
        let plan = SamplingPlan::new(5500, 3, kind).unwrap();
        group.bench_function(BenchmarkId::new("direct", kind.as_str()), |b| {
            b.iter(|| sampled_value(black_box(&game), 0, &plan).unwrap())
        });
        group.bench_function(BenchmarkId::new("tabulated", kind.as_str()), |b| {
            b.iter(|| sampled_value(black_box(&table), 0, &plan).unwrap())
        });
    }
    group.finish();
}

fn grid(c: &mut Criterion) {
    let spec = random_cross_modal_spec(6, 3, 512, 2).unwrap();
    let plan = SamplingPlan::new(5500, 3, ValueKind::Banzhaf).unwrap();
    c.bench_function("grid_6x3_exact", |b| {
        b.iter(|| {
            pairwise_interaction_grid(black_box(&spec), Mode::Exact(ValueKind::Banzhaf)).unwrap()
        })
    });
    c.bench_function("grid_6x3_sampled", |b| {
        b.iter(|| pairwise_interaction_grid(black_box(&spec), Mode::Sampled(plan)).unwrap())
    });
}

fn pipeline(c: &mut Criterion) {
    let case = generate(&SyntheticConfig {
        pairs: 1,
        ..Default::default()
    })
    .unwrap()
    .remove(0);
    let p = Pipeline::new(
        Mode::Exact(ValueKind::Banzhaf),
        LocalizerConfig::new(0.8, 5).unwrap(),
    );
    c.bench_function("pipeline_run_exact", |b| {
        b.iter(|| p.run(black_box(&case)).unwrap())
    });
}

criterion_group!(benches, exact, sampled, grid, pipeline);
criterion_main!(benches);
