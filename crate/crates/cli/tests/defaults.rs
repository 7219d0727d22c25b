use emoddm::datasets::load_embedded;
use emoddm::fitting::{default_grid, grid_search};
use emoddm::scenarios::{ModelVariant, Study};
use emoddm_cli::defaults::default_theta;

#[test]
fn frozen_defaults_match_default_grid_fits() {
    for study in [Study::Study1, Study::Study2] {
        let data = load_embedded(study.into());
        for variant in ModelVariant::ALL {
            let fit = grid_search(study, variant, &default_grid(study, variant), &data).unwrap();
            assert_eq!(fit.best_theta, default_theta(study, variant), "{study:?} {variant}");
        }
    }
}
