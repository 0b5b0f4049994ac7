mod common;

use common::*;
use minkowski_core::*;

#[test]
fn cantor_packing_at_rank_four_scale() {
    let cloud = sample_attractor(&cantor(), 8, 1 << 20).unwrap();
    assert_eq!(greedy_packing(&cloud, 3f64.powi(-4)).unwrap().count, 16);
}

#[test]
fn cantor_components() {
    let model = cantor_model();
    let part = epsilon_components(&model, 0.2, 5, 1 << 20).unwrap();
    assert_eq!(part.len(), 2);
    assert_eq!(part.classes[0].words(), &[CylinderWord(vec![0])]);
    assert_eq!(part.classes[1].words(), &[CylinderWord(vec![1])]);
    assert_eq!(epsilon_components(&model, 1.0, 5, 1 << 20).unwrap().len(), 1);
    assert!(epsilon_components(&model, 0.2, 1, 1 << 20).is_err());
    // rank-j cylinders exactly when eps sits strictly between the rank-(j+1) and rank-j gaps
    for j in 1..=6 {
        let eps = 3f64.powi(-(j as i32)) * 0.7;
        let part = epsilon_components(&model, eps, 8, 1 << 20).unwrap();
        assert_eq!(part.len(), 1 << j);
        assert!(part.classes.iter().all(|c| c.len() == 1 && c.words()[0].rank() == j));
        assert_eq!(part.class_of, cantor_chain_classes(8, eps));
    }
}

#[test]
fn tiling_sponge_is_one_component() {
    let rows = (0..2)
        .flat_map(|a| (0..3).map(move |b| vec![frac((1, 2), (a, 2)), frac((1, 3), (b, 3))]))
        .collect();
    let full = EuclideanIfs::from_sponge(&SpongeSystem::from_rows(rows).unwrap());
    for eps in [0.1, 0.5] {
        assert_eq!(epsilon_components(&full, eps, 6, 1 << 20).unwrap().len(), 1);
    }
}

#[test]
fn full_square_ratios() {
    let rows = (0..2)
        .flat_map(|a| (0..3).map(move |b| vec![frac((1, 2), (a, 2)), frac((1, 3), (b, 3))]))
        .collect();
    let sponge = SpongeSystem::from_rows(rows).unwrap();
    let seq = solve_beta_sequence(&sponge).unwrap();
    assert!((seq.total() - 2.0).abs() < 1e-12);
    let mu = bernoulli_weights(&sponge, &seq).unwrap();
    let model = EuclideanIfs::from_sponge(&sponge);
    let rep = minkowski_ratio_report(&model, &mu, 2.0, &[0.2], &geometric(2.0, 3..=5), 5_000_000).unwrap();
    assert!(rep.rows.iter().all(|r| r.component_id == 0));
    assert!(rep.rows.iter().all(|r| r.ratio >= 1.0 / 9.0 && r.ratio <= 9.0), "{:?}", rep.rows);
}

#[test]
fn cantor_fit_recovers_dimension() {
    let cloud = sample_attractor(&cantor(), 12, 1 << 20).unwrap();
    let samples: Vec<(f64, usize)> = (3..=9)
        .map(|k| {
            let d = 3f64.powi(-k);
            (d, greedy_packing(&cloud, d).unwrap().count)
        })
        .collect();
    let fit = fit_box_dimension(&samples).unwrap();
    assert!((fit.slope - 2f64.ln() / 3f64.ln()).abs() < 0.02, "{}", fit.slope);
}

#[test]
fn mcmullen_partition_check_is_bounded() {
    let mc = mcmullen();
    let seq = solve_beta_sequence(&mc).unwrap();
    let mu = bernoulli_weights(&mc, &seq).unwrap();
    let model = EuclideanIfs::from_sponge(&mc);
    let rep = partition_criterion_check(&model, &mu, seq.total(), &[1, 2], &geometric(2.0, 2..=9), 5_000_000).unwrap();
    assert_eq!(rep.ranks.len(), 2);
    assert!(rep.m_hat_max.is_finite() && rep.m_hat_max >= 1.0);
}

#[test]
fn kenyon_is_flagged_and_mcmullen_weights_are_uniform() {
    let model = EuclideanIfs::from_similar(&kenyon());
    let mu = BernoulliMeasure::uniform(3).unwrap();
    let rep = minkowski_ratio_report(&model, &mu, 1.0, &[0.2, 0.05], &geometric(3.0, 3..=9), 5_000_000).unwrap();
    assert!(rep.divergent);
    let values: Vec<f64> = rep.trajectory.iter().map(|t| t.1).collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0]));

    let mc = mcmullen();
    let weights = bernoulli_weights(&mc, &solve_beta_sequence(&mc).unwrap()).unwrap();
    let family: Vec<MeasurableSet> =
        (0..27).map(|i| MeasurableSet::cylinder(CylinderWord::from_index(i, 3, 3))).collect();
    let (lo, hi) = equivalence_test(&mu, &weights, &family).unwrap();
    assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
}

// Greedy counts on general planar sets are neither monotone in delta nor
// within a factor 2 of the maximum packing.
#[test]
fn planar_greedy_counterexamples() {
    let star = vec![
        vec![0.5, 0.5],
        vec![0.8, 0.5],
        vec![0.5 - 0.15, 0.5 + 0.15 * 3f64.sqrt()],
        vec![0.5 - 0.15, 0.5 - 0.15 * 3f64.sqrt()],
    ];
    let cloud = PointCloud::from_points(&star, Metric::Euclidean).unwrap();
    assert_eq!(greedy_packing(&cloud, 0.2).unwrap().count, 1);
    assert_eq!(exhaustive_max_packing(&cloud, &[0, 1, 2, 3], 0.2), 3);

    let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.5, 0.8], vec![1.5, -0.8]];
    let cloud = PointCloud::from_points(&pts, Metric::Euclidean).unwrap();
    assert_eq!(greedy_packing(&cloud, 0.475).unwrap().count, 2);
    assert_eq!(greedy_packing(&cloud, 0.5).unwrap().count, 3);
}
