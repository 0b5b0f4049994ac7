use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use minkowski_core::{
    epsilon_components, greedy_packing, sample_attractor, symbolic_point_cloud, CodedModel, EuclideanIfs, Flavor,
    IntervalMap, SpongeSystem, SymbolicSystem,
};

fn frac(ratio: (i64, i64), offset: (i64, i64)) -> IntervalMap {
    IntervalMap::fractions(ratio, offset).unwrap()
}

fn cantor() -> SpongeSystem {
    SpongeSystem::from_rows(vec![vec![frac((1, 3), (0, 1))], vec![frac((1, 3), (2, 3))]]).unwrap()
}

fn mcmullen() -> SpongeSystem {
    SpongeSystem::from_rows(vec![
        vec![frac((1, 2), (0, 1)), frac((1, 3), (0, 1))],
        vec![frac((1, 2), (1, 2)), frac((1, 3), (1, 3))],
        vec![frac((1, 2), (0, 1)), frac((1, 3), (2, 3))],
    ])
    .unwrap()
}

fn packing(c: &mut Criterion) {
    let mut group = c.benchmark_group("greedy_packing");
    let cantor_cloud = sample_attractor(&cantor(), 14, 1 << 20).unwrap();
    for k in [4, 8, 12] {
        let delta = 3f64.powi(-k);
        group.bench_with_input(BenchmarkId::new("cantor_depth14", k), &delta, |b, &d| {
            b.iter(|| greedy_packing(black_box(&cantor_cloud), d).unwrap().count)
        });
    }
    let carpet = sample_attractor(&mcmullen(), 10, 1 << 20).unwrap();
    for k in [3, 6, 9] {
        let delta = 2f64.powi(-k);
        group.bench_with_input(BenchmarkId::new("mcmullen_depth10", k), &delta, |b, &d| {
            b.iter(|| greedy_packing(black_box(&carpet), d).unwrap().count)
        });
    }
    for flavor in [Flavor::Full, Flavor::Half] {
        let sys = SymbolicSystem::new(3, 2, vec![(0, 0), (1, 1), (2, 0)], flavor).unwrap();
        let cloud = symbolic_point_cloud(&sys, 10, 1 << 20).unwrap();
        group.bench_function(format!("symbolic_{flavor:?}_depth10").to_lowercase(), |b| {
            b.iter(|| greedy_packing(black_box(&cloud), 3f64.powi(-5)).unwrap().count)
        });
    }
    group.finish();
}

fn components(c: &mut Criterion) {
    let model = EuclideanIfs::from_sponge(&cantor());
    c.bench_function("epsilon_components_cantor_depth12", |b| {
        b.iter(|| epsilon_components(&model, black_box(0.01), 12, 1 << 20).unwrap().len())
    });
    let carpet = EuclideanIfs::from_sponge(&mcmullen());
    let depth = carpet.depth_for(0.05).unwrap();
    c.bench_function("epsilon_components_mcmullen", |b| {
        b.iter(|| epsilon_components(&carpet, black_box(0.05), depth, 1 << 20).unwrap().len())
    });
}

criterion_group!(benches, packing, components);
criterion_main!(benches);
