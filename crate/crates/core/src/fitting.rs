//! Constrained grid search minimizing mean squared error against observed scores.
//!
//! Every grid point is simulated from the same base seed, so differences in
//! MSE between points reflect the parameters rather than fresh noise. Distinct
//! walk parameter sets are simulated once and shared across points, in
//! parallel; the search result does not depend on the thread count.

use std::collections::BTreeMap;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::StudyDataset;
use crate::ddm::DdmParams;
use crate::error::{Error, Result};
use crate::replication::{
    predict_study1, predict_study2, study1_cells, study2_cells, study2_targets, BatchCache,
    Simulator,
};
use crate::scenarios::{ModelVariant, Study, Study1Theta, Study2Theta, STUDY2_STEP_SIZE};
use crate::scoring::FEAR_THRESHOLD;

/// `sum((p - o)^2) / n`.
pub fn mse(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.len() != observed.len() || predicted.is_empty() {
        return Err(Error::LengthMismatch {
            predicted: predicted.len(),
            observed: observed.len(),
        });
    }
    let sum: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (p - o) * (p - o))
        .sum();
    Ok(sum / predicted.len() as f64)
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn point(value: f64) -> Self {
        Self::new(value, value, 1)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::InvalidGrid(format!("axis {name} has a non-finite bound")));
        }
        if self.steps == 0 {
            return Err(Error::InvalidGrid(format!("axis {name} needs at least one step")));
        }
        if self.min > self.max || (self.steps > 1 && self.min == self.max) {
            return Err(Error::InvalidGrid(format!(
                "axis {name} range [{}, {}] with {} steps is degenerate",
                self.min, self.max, self.steps
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let width = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let v = if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + width * i as f64
                };
                // Snap away accumulated binary noise (0.15000000000000002 -> 0.15).
                (v * 1e12).round() / 1e12
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub axes: BTreeMap<String, GridAxis>,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_trials() -> usize {
    1000
}

/// Trials per condition used for Study 1.
pub const STUDY1_TRIALS: usize = 1000;
/// Trials per group and interval used for Study 2.
pub const STUDY2_TRIALS: usize = 50;

impl GridSpec {
    fn axis_names(study: Study, variant: ModelVariant) -> (Vec<&'static str>, Vec<&'static str>) {
        match study {
            Study::Study1 => (Study1Theta::names(variant).to_vec(), vec![]),
            Study::Study2 => (vec!["s0", "v0", "alpha_rate"], vec!["step_size"]),
        }
    }

    pub fn validate(&self, study: Study, variant: ModelVariant) -> Result<()> {
        let (required, optional) = Self::axis_names(study, variant);
        for name in &required {
            if !self.axes.contains_key(*name) {
                return Err(Error::InvalidGrid(format!("missing axis `{name}`")));
            }
        }
        for (name, axis) in &self.axes {
            if !required.contains(&name.as_str()) && !optional.contains(&name.as_str()) {
                return Err(Error::InvalidGrid(format!(
                    "unexpected axis `{name}` for {variant} (expected {})",
                    required.join(", ")
                )));
            }
            axis.validate(name)?;
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidGrid("n_trials must be positive".into()));
        }
        Ok(())
    }

    /// Axis values in theta order, with defaults filled in for optional axes.
    fn ordered_values(&self, study: Study, variant: ModelVariant) -> Vec<Vec<f64>> {
        match study {
            Study::Study1 => Study1Theta::names(variant)
                .iter()
                .map(|n| self.axes[*n].values())
                .collect(),
            Study::Study2 => Study2Theta::NAMES
                .iter()
                .map(|n| match self.axes.get(*n) {
                    Some(axis) => axis.values(),
                    None => vec![STUDY2_STEP_SIZE],
                })
                .collect(),
        }
    }

    /// Cartesian product in lexicographic order.
    pub fn points(&self, study: Study, variant: ModelVariant) -> Vec<[f64; 4]> {
        let axes = self.ordered_values(study, variant);
        let mut out = Vec::with_capacity(axes.iter().map(Vec::len).product());
        for &a in &axes[0] {
            for &b in &axes[1] {
                for &c in &axes[2] {
                    for &d in &axes[3] {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        out
    }
}

pub fn default_study1_grid(variant: ModelVariant) -> GridSpec {
    let drift = GridAxis::new(0.005, 0.05, 10);
    let bias = GridAxis::new(0.05, 0.9, 10);
    let step = GridAxis::new(0.02, 0.2, 10);
    let first = match variant {
        ModelVariant::Model1ArousalPrior => drift,
        ModelVariant::Model2ContextPrior => bias,
    };
    let [a, b, c, d] = Study1Theta::names(variant);
    GridSpec {
        axes: BTreeMap::from([
            (a.to_string(), first),
            (b.to_string(), first),
            (c.to_string(), step),
            (d.to_string(), step),
        ]),
        n_trials: STUDY1_TRIALS,
        base_seed: 0,
    }
}

/// Model 1 lowers the drift (`alpha_rate >= 0`); Model 2 raises both
/// boundaries away from the fear side (`alpha_rate <= 0`).
pub fn default_study2_grid(variant: ModelVariant) -> GridSpec {
    let alpha = match variant {
        ModelVariant::Model1ArousalPrior => GridAxis::new(0.0, 0.003, 31),
        ModelVariant::Model2ContextPrior => GridAxis::new(-0.03, 0.0, 31),
    };
    GridSpec {
        axes: BTreeMap::from([
            ("s0".to_string(), GridAxis::new(0.05, 0.5, 10)),
            ("v0".to_string(), GridAxis::new(0.02, 0.04, 11)),
            ("alpha_rate".to_string(), alpha),
        ]),
        n_trials: STUDY2_TRIALS,
        base_seed: 0,
    }
}

pub fn default_grid(study: Study, variant: ModelVariant) -> GridSpec {
    match study {
        Study::Study1 => default_study1_grid(variant),
        Study::Study2 => default_study2_grid(variant),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FitTheta {
    Study1(Study1Theta),
    Study2(Study2Theta),
}

impl FitTheta {
    pub fn values(&self) -> [f64; 4] {
        match self {
            FitTheta::Study1(t) => t.values(),
            FitTheta::Study2(t) => t.values(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub study: Study,
    pub variant: ModelVariant,
    pub best_theta: FitTheta,
    pub best_mse: f64,
    pub labels: Vec<String>,
    pub predicted: Vec<f64>,
    pub observed: Vec<f64>,
    pub n_grid_points: usize,
    pub n_grid_points_evaluated: usize,
    pub constraint_rejections: usize,
    pub failed_points: Vec<String>,
    pub n_trials: usize,
    pub base_seed: u64,
}

struct Evaluation {
    mse: f64,
    labels: Vec<String>,
    predicted: Vec<f64>,
    observed: Vec<f64>,
}

fn study1_feasible(variant: ModelVariant, values: [f64; 4]) -> Option<(FitTheta, Vec<DdmParams>)> {
    let theta = Study1Theta::from_values(variant, values);
    let cells = study1_cells(&theta).ok()?;
    Some((FitTheta::Study1(theta), cells.into_iter().map(|c| c.1).collect()))
}

fn study2_feasible(variant: ModelVariant, values: [f64; 4], n_intervals: u32) -> Option<(FitTheta, Vec<DdmParams>)> {
    let theta = Study2Theta::from_values(values);
    let cells = study2_cells(variant, &theta, n_intervals).ok()?;
    Some((FitTheta::Study2(theta), cells.into_iter().map(|c| c.2).collect()))
}

/// Exhaustive constrained grid search.
///
/// Points violating the ordering constraints (`v0 < v1`, `s0 < s1`,
/// `d1 < d0`), the Study 2 theta constraints, or the lattice constraint
/// `|drift| <= step` are counted in `constraint_rejections`. Points whose
/// scoring fails (e.g. a condition with no congruent exits) are listed in
/// `failed_points`. Ties go to the lexicographically smallest theta.
pub fn grid_search(
    study: Study,
    variant: ModelVariant,
    grid: &GridSpec,
    dataset: &StudyDataset,
) -> Result<FitResult> {
    grid.validate(study, variant)?;
    let n_intervals = match (study, dataset) {
        (Study::Study1, StudyDataset::Study1(_)) => 0,
        (Study::Study2, StudyDataset::Study2(d)) => d.n_intervals,
        _ => {
            return Err(Error::InvalidGrid(format!(
                "dataset {} does not match {study:?}",
                dataset.id()
            )))
        }
    };
    let points = grid.points(study, variant);
    let n_grid_points = points.len();
    let feasible: Vec<(FitTheta, Vec<DdmParams>)> = points
        .iter()
        .filter_map(|&v| match study {
            Study::Study1 => study1_feasible(variant, v),
            Study::Study2 => study2_feasible(variant, v, n_intervals),
        })
        .collect();
    let constraint_rejections = n_grid_points - feasible.len();
    if feasible.is_empty() {
        return Err(Error::EmptyFeasibleGrid {
            rejected: constraint_rejections,
            failed: 0,
        });
    }

    let simulator = Simulator {
        n_trials: grid.n_trials,
        base_seed: grid.base_seed,
    };
    let cache = BatchCache::prefill(simulator, feasible.iter().flat_map(|f| f.1.iter().copied()))?;
    debug!(
        "{} feasible points, {} distinct parameter sets",
        feasible.len(),
        cache.len()
    );

    let evaluations: Vec<Result<Evaluation>> = feasible
        .par_iter()
        .map(|(theta, _)| evaluate(variant, theta, dataset, &cache))
        .collect();

    let mut best: Option<(usize, Evaluation)> = None;
    let mut failed_points = Vec::new();
    for (i, eval) in evaluations.into_iter().enumerate() {
        match eval {
            Ok(e) => {
                let better = match &best {
                    None => true,
                    Some((j, b)) => {
                        e.mse < b.mse
                            || (e.mse == b.mse && lex_less(&feasible[i].0.values(), &feasible[*j].0.values()))
                    }
                };
                if better {
                    best = Some((i, e));
                }
            }
            Err(err) => failed_points.push(format!("{:?}: {err}", feasible[i].0.values())),
        }
    }
    let n_evaluated = feasible.len() - failed_points.len();
    let Some((idx, eval)) = best else {
        return Err(Error::EmptyFeasibleGrid {
            rejected: constraint_rejections,
            failed: failed_points.len(),
        });
    };
    Ok(FitResult {
        study,
        variant,
        best_theta: feasible[idx].0,
        best_mse: eval.mse,
        labels: eval.labels,
        predicted: eval.predicted,
        observed: eval.observed,
        n_grid_points,
        n_grid_points_evaluated: n_evaluated,
        constraint_rejections,
        failed_points,
        n_trials: grid.n_trials,
        base_seed: grid.base_seed,
    })
}

fn lex_less(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a.iter()
        .zip(b)
        .find(|(x, y)| x != y)
        .is_some_and(|(x, y)| x < y)
}

fn evaluate(
    variant: ModelVariant,
    theta: &FitTheta,
    dataset: &StudyDataset,
    cache: &BatchCache,
) -> Result<Evaluation> {
    match (theta, dataset) {
        (FitTheta::Study1(theta), StudyDataset::Study1(data)) => {
            let pred = predict_study1(theta, data, cache)?;
            if !pred.excluded.is_empty() {
                return Err(Error::NoCongruentTrials(pred.excluded.join(", ")));
            }
            Ok(Evaluation {
                mse: pred.mse,
                labels: pred.labels(),
                predicted: pred.predicted(),
                observed: pred.observed,
            })
        }
        (FitTheta::Study2(theta), StudyDataset::Study2(data)) => {
            let traj = predict_study2(variant, theta, data.n_intervals, FEAR_THRESHOLD, cache)?;
            let predicted: Vec<f64> = traj.points.iter().map(|p| p.pct_over_threshold).collect();
            let observed = study2_targets(data);
            Ok(Evaluation {
                mse: mse(&predicted, &observed)?,
                labels: traj
                    .points
                    .iter()
                    .map(|p| format!("{}/t{}", p.group.label(), p.interval))
                    .collect(),
                predicted,
                observed,
            })
        }
        _ => Err(Error::InvalidGrid("theta does not match dataset".into())),
    }
}
