use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use minkowski_core::{
    minkowski_ratio_report, solve_beta_sequence, solve_similarity_dimension, symbolic_beta, BernoulliMeasure, Flavor,
    IntervalMap, SpongeSystem, SymbolicSystem,
};

fn grid_sponge(cells: &[(i64, i64)], q: (i64, i64)) -> SpongeSystem {
    let rows = cells
        .iter()
        .map(|&(a, b)| {
            vec![
                IntervalMap::fractions((1, q.0), (a, q.0)).unwrap(),
                IntervalMap::fractions((1, q.1), (b, q.1)).unwrap(),
            ]
        })
        .collect();
    SpongeSystem::from_rows(rows).unwrap()
}

fn solvers(c: &mut Criterion) {
    let ratios = [0.5, 0.25, 0.2, 0.1, 1.0 / 3.0];
    c.bench_function("similarity_dimension", |b| {
        b.iter(|| solve_similarity_dimension(black_box(&ratios)).unwrap())
    });
    let cells: Vec<(i64, i64)> = (0..3).flat_map(|a| (0..7).filter(move |b| (a + b) % 2 == 0).map(move |b| (a, b))).collect();
    let sponge = grid_sponge(&cells, (3, 7));
    c.bench_function("beta_sequence_grid_3x7", |b| {
        b.iter(|| solve_beta_sequence(black_box(&sponge)).unwrap().total())
    });
    let digits: Vec<(i64, u32)> = cells.iter().map(|&(a, b)| (b, a as u32)).collect();
    c.bench_function("symbolic_beta", |b| b.iter(|| symbolic_beta(7, 3, black_box(&digits)).unwrap()));
}

fn reports(c: &mut Criterion) {
    let sys = SymbolicSystem::new(3, 2, vec![(0, 0), (1, 1), (2, 0)], Flavor::Full).unwrap();
    let mu = BernoulliMeasure::uniform(3).unwrap();
    let beta = symbolic_beta(3, 2, sys.digits()).unwrap();
    let deltas: Vec<f64> = (2..=6).map(|k| 3f64.powi(-k)).collect();
    let mut group = c.benchmark_group("ratio_report");
    group.sample_size(10);
    group.bench_function("symbolic_full", |b| {
        b.iter(|| minkowski_ratio_report(&sys, &mu, beta, black_box(&[0.4, 0.12]), &deltas, 1 << 22).unwrap().m_hat)
    });
    group.finish();
}

criterion_group!(benches, solvers, reports);
criterion_main!(benches);
