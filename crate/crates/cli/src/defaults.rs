//! Parameters used by `replicate` when the config supplies none.
//!
//! These are the best points of the default grids at seed 0; the `defaults`
//! integration test re-runs those fits and checks they still agree.

use emoddm::fitting::FitTheta;
use emoddm::scenarios::{ModelVariant, Study, Study1Theta, Study2Theta};

pub fn default_theta(study: Study, variant: ModelVariant) -> FitTheta {
    match (study, variant) {
        (Study::Study1, ModelVariant::Model1ArousalPrior) => FitTheta::Study1(Study1Theta::ArousalPrior {
            v0: 0.025,
            v1: 0.05,
            d0: 0.18,
            d1: 0.14,
        }),
        (Study::Study1, ModelVariant::Model2ContextPrior) => FitTheta::Study1(Study1Theta::ContextPrior {
            s0: 0.238888888889,
            s1: 0.616666666667,
            d0: 0.12,
            d1: 0.1,
        }),
        (Study::Study2, ModelVariant::Model1ArousalPrior) => FitTheta::Study2(Study2Theta::new(0.45, 0.03, 0.0007)),
        (Study::Study2, ModelVariant::Model2ContextPrior) => FitTheta::Study2(Study2Theta::new(0.25, 0.03, -0.013)),
    }
}
