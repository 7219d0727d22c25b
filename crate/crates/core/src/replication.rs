//! Whole-study predictions: simulate every condition for one theta and score it.
//!
//! All conditions are drawn from the same trial seed stream (common random
//! numbers), so two cells with identical walk parameters produce identical
//! batches, and nearby thetas are compared on the same noise.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::datasets::{Study1Data, Study2Data};
use crate::ddm::{simulate_batch, BatchResult, DdmParams, Kernel};
use crate::error::Result;
use crate::scenarios::{
    study1_params, study2_params, ConditionBinding, ModelVariant, Study1Theta, Study2Group,
    Study2Theta,
};
use crate::scoring::{
    mean_fear_score, normalize_available, pct_over_threshold, study1_raw_score, ConditionScore,
    FearScale,
};

/// Supplies the batch for a parameter set.
pub trait BatchSource: Sync {
    fn batch(&self, params: &DdmParams) -> Result<Arc<BatchResult>>;
}

/// Simulates on demand.
#[derive(Debug, Clone, Copy)]
pub struct Simulator {
    pub n_trials: usize,
    pub base_seed: u64,
}

impl BatchSource for Simulator {
    fn batch(&self, params: &DdmParams) -> Result<Arc<BatchResult>> {
        simulate_batch(params, self.n_trials, self.base_seed).map(Arc::new)
    }
}

/// Exact-bit identity of a parameter set, usable as a map key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamsKey {
    bits: [u64; 5],
    kernel: Kernel,
    max_steps: u64,
}

impl From<&DdmParams> for ParamsKey {
    fn from(p: &DdmParams) -> Self {
        Self {
            bits: [
                p.initial_bias.to_bits(),
                p.drift_rate.to_bits(),
                p.step_size.to_bits(),
                p.boundary_upper.to_bits(),
                p.boundary_lower.to_bits(),
            ],
            kernel: p.kernel,
            max_steps: p.max_steps,
        }
    }
}

/// Precomputed batches keyed by parameters; falls back to simulation.
#[derive(Debug, Default)]
pub struct BatchCache {
    pub simulator: Option<Simulator>,
    batches: HashMap<ParamsKey, Arc<BatchResult>>,
}

impl BatchCache {
    /// Simulate every distinct parameter set once, in parallel.
    pub fn prefill(simulator: Simulator, params: impl IntoIterator<Item = DdmParams>) -> Result<Self> {
        use rayon::prelude::*;
        let mut unique: Vec<(ParamsKey, DdmParams)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for p in params {
            let key = ParamsKey::from(&p);
            if seen.insert(key) {
                unique.push((key, p));
            }
        }
        let batches = unique
            .into_par_iter()
            .map(|(key, p)| simulator.batch(&p).map(|b| (key, b)))
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(Self {
            simulator: Some(simulator),
            batches,
        })
    }

    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }
}

impl BatchSource for BatchCache {
    fn batch(&self, params: &DdmParams) -> Result<Arc<BatchResult>> {
        if let Some(b) = self.batches.get(&ParamsKey::from(params)) {
            return Ok(b.clone());
        }
        match &self.simulator {
            Some(sim) => sim.batch(params),
            None => {
                params.validate()?;
                Err(crate::error::Error::Unsupported("parameter set not in cache".into()))
            }
        }
    }
}

/// Walk parameters for all seven Study 1 cells, euphoria rows first.
pub fn study1_cells(theta: &Study1Theta) -> Result<Vec<(ConditionBinding, DdmParams)>> {
    ConditionBinding::all_study1()
        .into_iter()
        .map(|b| {
            let crate::scenarios::Condition::Study1(c) = b.condition else {
                unreachable!("study 1 binding")
            };
            study1_params(c, b.valence, theta).map(|p| (b, p))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study1Prediction {
    pub theta: Study1Theta,
    /// Normalized scores for conditions with at least one congruent exit.
    pub scores: Vec<ConditionScore>,
    pub observed: Vec<f64>,
    /// Labels of conditions left out for lack of congruent exits.
    pub excluded: Vec<String>,
    pub mse: f64,
}

impl Study1Prediction {
    pub fn predicted(&self) -> Vec<f64> {
        self.scores
            .iter()
            .map(|s| s.normalized_score.expect("normalized"))
            .collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.scores
            .iter()
            .map(|s| format!("{}/{}", s.valence.label(), s.condition.label()))
            .collect()
    }
}

pub fn predict_study1(
    theta: &Study1Theta,
    data: &Study1Data,
    source: &dyn BatchSource,
) -> Result<Study1Prediction> {
    let cells = study1_cells(theta)?;
    let observed_rows: Vec<_> = data.all().copied().collect();
    let mut raw = Vec::with_capacity(cells.len());
    let mut excluded = Vec::new();
    for (binding, params) in &cells {
        let crate::scenarios::Condition::Study1(c) = binding.condition else {
            unreachable!("study 1 binding")
        };
        let batch = source.batch(params)?;
        let score = study1_raw_score(c, binding.valence, &batch);
        if score.is_err() {
            excluded.push(binding.label());
        }
        raw.push(score);
    }
    let scores = normalize_available(&raw, &observed_rows)?;
    let observed: Vec<f64> = scores
        .iter()
        .map(|s| data.mean(s.valence, s.condition).expect("observed row"))
        .collect();
    let predicted: Vec<f64> = scores.iter().map(|s| s.normalized_score.expect("normalized")).collect();
    let mse = crate::fitting::mse(&predicted, &observed)?;
    Ok(Study1Prediction {
        theta: *theta,
        scores,
        observed,
        excluded,
        mse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalPoint {
    pub group: Study2Group,
    pub interval: u32,
    pub pct_over_threshold: f64,
    pub mean_fear_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study2Trajectory {
    pub variant: ModelVariant,
    pub theta: Study2Theta,
    pub threshold: f64,
    /// Shock intervals 1..=n, then noise intervals 1..=n.
    pub points: Vec<IntervalPoint>,
}

impl Study2Trajectory {
    pub fn curve(&self, group: Study2Group) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| p.group == group)
            .map(|p| p.pct_over_threshold)
            .collect()
    }

    /// Sample SD of the noise-attribution percentages after interval `after`.
    pub fn noise_sd_after(&self, after: u32) -> f64 {
        let tail: Vec<f64> = self
            .points
            .iter()
            .filter(|p| p.group == Study2Group::NoiseAttribution && p.interval > after)
            .map(|p| p.pct_over_threshold)
            .collect();
        sample_sd(&tail)
    }
}

pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Walk parameters for every (group, interval) cell, shock group first.
pub fn study2_cells(
    variant: ModelVariant,
    theta: &Study2Theta,
    n_intervals: u32,
) -> Result<Vec<(Study2Group, u32, DdmParams)>> {
    let mut cells = Vec::with_capacity(2 * n_intervals as usize);
    for group in Study2Group::ALL {
        for t in 1..=n_intervals {
            cells.push((group, t, study2_params(variant, group, t, theta, n_intervals)?));
        }
    }
    Ok(cells)
}

/// Percentage over threshold and mean fear score per group and interval.
///
/// The fear scale for each group is fixed by its interval-1 parameters, so a
/// shifted boundary in later intervals is scored on the same scale.
pub fn predict_study2(
    variant: ModelVariant,
    theta: &Study2Theta,
    n_intervals: u32,
    threshold: f64,
    source: &dyn BatchSource,
) -> Result<Study2Trajectory> {
    let cells = study2_cells(variant, theta, n_intervals)?;
    let mut scales = HashMap::new();
    for (group, t, params) in &cells {
        if *t == 1 {
            scales.insert(*group, FearScale::from_params(params));
        }
    }
    let points = cells
        .iter()
        .map(|(group, t, params)| {
            let batch = source.batch(params)?;
            let scale = scales[group];
            Ok(IntervalPoint {
                group: *group,
                interval: *t,
                pct_over_threshold: pct_over_threshold(&batch, &scale, threshold)?,
                mean_fear_score: mean_fear_score(&batch, &scale)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Study2Trajectory {
        variant,
        theta: *theta,
        threshold,
        points,
    })
}

/// Target vector matching [`Study2Trajectory::points`] order.
pub fn study2_targets(data: &Study2Data) -> Vec<f64> {
    Study2Group::ALL
        .iter()
        .flat_map(|&g| data.target_curve(g))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{study1_data, study2_data};
    use crate::scenarios::STUDY2_INTERVALS;

    #[test]
    fn study1_prediction_normalizes_per_table() {
        let theta = Study1Theta::ArousalPrior { v0: 0.005, v1: 0.04, d0: 0.18, d1: 0.14 };
        let pred = predict_study1(&theta, &study1_data(), &Simulator { n_trials: 1000, base_seed: 0 }).unwrap();
        assert_eq!(pred.scores.len(), 7);
        assert!(pred.excluded.is_empty());
        let p = pred.predicted();
        assert!((p[..4].iter().sum::<f64>() - 6.27).abs() < 1e-9);
        assert!((p[4..].iter().sum::<f64>() - 4.93).abs() < 1e-9);
        // Identical cells on common random numbers.
        assert_eq!(p[1], p[2]);
    }

    #[test]
    fn cache_and_direct_simulation_agree() {
        let theta = Study1Theta::ContextPrior { s0: 0.3, s1: 0.6, d0: 0.2, d1: 0.1 };
        let sim = Simulator { n_trials: 300, base_seed: 9 };
        let cells = study1_cells(&theta).unwrap();
        let cache = BatchCache::prefill(sim, cells.iter().map(|c| c.1)).unwrap();
        // Misinformed and ignorant share parameters.
        assert_eq!(cache.len(), 6);
        let a = predict_study1(&theta, &study1_data(), &sim).unwrap();
        let b = predict_study1(&theta, &study1_data(), &cache).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_alpha_gives_identical_groups() {
        let theta = Study2Theta::new(0.2, 0.03, 0.0);
        for variant in ModelVariant::ALL {
            let traj = predict_study2(
                variant,
                &theta,
                STUDY2_INTERVALS,
                2.0,
                &Simulator { n_trials: 50, base_seed: 1 },
            )
            .unwrap();
            assert_eq!(
                traj.curve(Study2Group::ShockAttribution),
                traj.curve(Study2Group::NoiseAttribution)
            );
        }
    }

    #[test]
    fn noise_curve_is_monotone_under_common_numbers() {
        let sim = Simulator { n_trials: 50, base_seed: 4 };
        let cases = [
            (ModelVariant::Model1ArousalPrior, Study2Theta::new(0.2, 0.03, 0.001)),
            (ModelVariant::Model2ContextPrior, Study2Theta::new(0.2, 0.03, -0.015)),
        ];
        for (variant, theta) in cases {
            let traj = predict_study2(variant, &theta, STUDY2_INTERVALS, 2.0, &sim).unwrap();
            let noise = traj.curve(Study2Group::NoiseAttribution);
            assert!(noise.windows(2).all(|w| w[1] <= w[0]), "{variant}: {noise:?}");
            assert!(noise[17] < noise[0]);
        }
    }

    #[test]
    fn targets_line_up_with_points() {
        let t = study2_targets(&study2_data());
        assert_eq!(t.len(), 36);
        assert_eq!(t[0], 80.0);
        assert_eq!(t[18 + 9], 40.0);
    }

    #[test]
    fn sample_sd_basics() {
        assert_eq!(sample_sd(&[1.0]), 0.0);
        assert!((sample_sd(&[1.0, 2.0, 3.0, 4.0]) - 1.290_994_448_735_805_6).abs() < 1e-12);
    }
}
