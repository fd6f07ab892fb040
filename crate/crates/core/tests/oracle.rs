use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlse_core::dataset::GridConfig;
use nlse_core::oracle::{fit, objective, FitMethod, Oracle};
use nlse_core::{Observation, ParameterRanges, PropagationConfig, Scenario, Simulator};

fn scenario() -> Scenario {
    let m = nlse_core::DatasetManifest {
        grid: GridConfig {
            nx: 448,
            ny: 448,
            downsample: 2,
            ..GridConfig::default()
        },
        propagation: PropagationConfig::new(0.2, 20),
        ..Default::default()
    };
    m.scenario()
}

fn target(normalized: [f64; 3]) -> Observation {
    let ranges = ParameterRanges::default();
    Simulator::new(scenario())
        .unwrap()
        .observe(&ranges.denormalize(&normalized))
        .unwrap()
}

#[test]
fn generator_is_the_minimum_of_the_objective() {
    let ranges = ParameterRanges::default();
    let truth = [0.5, 0.5, 0.5];
    let t = target(truth);
    let at_truth = objective(&truth, &t, &scenario(), &ranges).unwrap();
    assert!(!at_truth.failed);
    assert!(at_truth.value < 1e-15, "{}", at_truth.value);
    let corner = objective(&[1.0, 0.0, 1.0], &t, &scenario(), &ranges).unwrap();
    assert!(corner.value > at_truth.value);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..12 {
        let probe: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..=1.0));
        let v = objective(&probe, &t, &scenario(), &ranges).unwrap().value;
        assert!(v >= at_truth.value, "{probe:?}: {v}");
    }
    assert!(objective(&[1.2, 0.5, 0.5], &t, &scenario(), &ranges).is_err());
}

#[test]
fn minimum_budget_grid_fit_returns_best_coarse_node() {
    let ranges = ParameterRanges::default();
    let t = target([0.3, 0.8, 0.6]);
    let r = fit(&t, &scenario(), &ranges, FitMethod::Grid, 27).unwrap();
    assert_eq!(r.evaluations, 27);
    assert!(!r.converged);
    let min = r.trace.iter().map(|e| e.objective).fold(f64::INFINITY, f64::min);
    assert_eq!(r.objective, min);
    assert!(r.trace.iter().all(|e| e.candidate.iter().all(|c| [0.0, 0.5, 1.0].contains(c))));
    assert!(fit(&t, &scenario(), &ranges, FitMethod::Grid, 26).is_err());
}

#[test]
fn nelder_mead_recovers_off_lattice_triplet() {
    let ranges = ParameterRanges::default();
    let truth = [0.37, 0.62, 0.18];
    let r = fit(&target(truth), &scenario(), &ranges, FitMethod::NelderMead, 500).unwrap();
    assert!(r.converged);
    for k in 0..3 {
        assert!((r.best[k] - truth[k]).abs() < 0.02, "{:?} vs {truth:?}", r.best);
    }
    assert!(r.trace.windows(2).all(|w| w[1].best_objective <= w[0].best_objective));
    assert_eq!(r.best_physical, ranges.denormalize(&r.best));
}

#[test]
fn grid_refinement_recovers_mid_range_triplet() {
    let ranges = ParameterRanges::default();
    let truth = [0.5, 0.5, 0.5];
    let r = fit(&target(truth), &scenario(), &ranges, FitMethod::Grid, 500).unwrap();
    for k in 0..3 {
        assert!((r.best[k] - truth[k]).abs() < 0.02, "{:?}", r.best);
    }
}

#[test]
fn fits_are_deterministic_and_distinguish_separated_targets() {
    let ranges = ParameterRanges::default();
    let a = [0.25, 0.3, 0.7];
    let b = [0.45, 0.5, 0.85];
    let first = fit(&target(a), &scenario(), &ranges, FitMethod::Grid, 150).unwrap();
    let shared = Oracle::new(scenario(), ranges).unwrap();
    let other = shared.fit(&target(b), FitMethod::Grid, 150).unwrap();
    let again = shared.fit(&target(a), FitMethod::Grid, 150).unwrap();
    assert_eq!(first, again);
    assert_eq!(other, fit(&target(b), &scenario(), &ranges, FitMethod::Grid, 150).unwrap());
    let gap = (0..3).map(|k| (first.best[k] - other.best[k]).abs()).fold(0.0, f64::max);
    assert!(gap >= 0.05, "{:?} vs {:?}", first.best, other.best);
}
