use std::collections::BTreeMap;

use emoddm::datasets::{load_embedded, StudyId};
use emoddm::fitting::{grid_search, GridAxis, GridSpec};
use emoddm::replication::{predict_study1, Simulator};
use emoddm::scenarios::{ModelVariant, Study, Study1Theta};

fn small_grid(v1_max: f64, v1_steps: usize) -> GridSpec {
    GridSpec {
        axes: BTreeMap::from([
            ("v0".to_string(), GridAxis::new(0.01, 0.02, 2)),
            ("v1".to_string(), GridAxis::new(0.02, v1_max, v1_steps)),
            ("d0".to_string(), GridAxis::new(0.1, 0.14, 3)),
            ("d1".to_string(), GridAxis::new(0.06, 0.1, 3)),
        ]),
        n_trials: 300,
        base_seed: 5,
    }
}

#[test]
fn best_is_minimum_over_every_feasible_point() {
    let data = load_embedded(StudyId::Study1);
    let variant = ModelVariant::Model1ArousalPrior;
    let grid = small_grid(0.04, 3);
    let fit = grid_search(Study::Study1, variant, &grid, &data).unwrap();
    let sim = Simulator { n_trials: 300, base_seed: 5 };
    let mut evaluated = 0;
    for values in grid.points(Study::Study1, variant) {
        let theta = Study1Theta::from_values(variant, values);
        if theta.validate().is_err() {
            continue;
        }
        let pred = predict_study1(&theta, data.study1().unwrap(), &sim).unwrap();
        assert!(fit.best_mse <= pred.mse);
        evaluated += 1;
    }
    assert_eq!(evaluated, fit.n_grid_points_evaluated);
    assert_eq!(fit.n_grid_points, evaluated + fit.constraint_rejections);
    let Study1Theta::ArousalPrior { v0, v1, d0, d1 } = Study1Theta::from_values(variant, fit.best_theta.values()) else {
        unreachable!()
    };
    assert!(0.0 < v0 && v0 < v1 && d1 < d0);
}

#[test]
fn refining_the_grid_never_hurts() {
    let data = load_embedded(StudyId::Study1);
    let variant = ModelVariant::Model1ArousalPrior;
    let coarse = grid_search(Study::Study1, variant, &small_grid(0.04, 3), &data).unwrap();
    // Superset: v1 in {0.02, 0.03, 0.04, 0.05}.
    let fine = grid_search(Study::Study1, variant, &small_grid(0.05, 4), &data).unwrap();
    assert!(fine.best_mse <= coarse.best_mse);
}

#[test]
fn grid_search_is_deterministic() {
    let data = load_embedded(StudyId::Study1);
    let grid = small_grid(0.04, 3);
    let a = grid_search(Study::Study1, ModelVariant::Model1ArousalPrior, &grid, &data).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| grid_search(Study::Study1, ModelVariant::Model1ArousalPrior, &grid, &data).unwrap());
    assert_eq!(a, b);
}
