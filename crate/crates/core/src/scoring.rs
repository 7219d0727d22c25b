//! From first-exit times to self-report scales.
//!
//! Study 1 scores are the inverse of mean congruent RT (euphoria) or the mean
//! congruent RT itself (anger), rescaled per table so the simulated values
//! add up to the observed total. Study 2 maps each trial to a 0..4 fear score
//! relative to the fastest possible crossing.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::datasets::ObservedCondition;
use crate::ddm::{BatchResult, DdmParams, Exit, TrialOutcome};
use crate::error::{Error, Result};
use crate::scenarios::{Study1Condition, Valence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionScore {
    pub condition: Study1Condition,
    pub valence: Valence,
    pub n_trials: usize,
    pub n_congruent: usize,
    pub mean_rt: f64,
    pub raw_score: f64,
    /// Set by [`normalize_study1`].
    pub normalized_score: Option<f64>,
    /// Fraction of trials that crossed the wrong boundary or timed out.
    pub error_rate: f64,
}

fn congruent_exit(valence: Valence) -> Exit {
    if valence.sign() > 0.0 {
        Exit::Upper
    } else {
        Exit::Lower
    }
}

/// Raw intensity score for one Study 1 condition.
pub fn study1_raw_score(
    condition: Study1Condition,
    valence: Valence,
    batch: &BatchResult,
) -> Result<ConditionScore> {
    if batch.outcomes.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let target = congruent_exit(valence);
    let (n_congruent, rt_sum) = batch
        .outcomes
        .iter()
        .filter(|o| o.exit == target)
        .fold((0usize, 0u64), |(n, s), o| (n + 1, s + o.rt_steps));
    if n_congruent == 0 {
        return Err(Error::NoCongruentTrials(format!(
            "{}/{}",
            valence.label(),
            condition.label()
        )));
    }
    let n_trials = batch.outcomes.len();
    let mean_rt = rt_sum as f64 / n_congruent as f64;
    let raw_score = match valence {
        Valence::Euphoria => 1.0 / mean_rt,
        Valence::Anger => mean_rt,
        Valence::Fear => {
            return Err(Error::InvalidBinding("fear has no Study 1 score".into()));
        }
    };
    Ok(ConditionScore {
        condition,
        valence,
        n_trials,
        n_congruent,
        mean_rt,
        raw_score,
        normalized_score: None,
        error_rate: (n_trials - n_congruent) as f64 / n_trials as f64,
    })
}

/// Scale raw scores so that, within each valence table, they sum to the
/// observed means of the same conditions.
///
/// Every raw score must have a matching observed row and vice versa.
pub fn normalize_study1(
    raw: &[ConditionScore],
    observed: &[ObservedCondition],
) -> Result<Vec<ConditionScore>> {
    if raw.len() != observed.len() {
        return Err(Error::Normalization(format!(
            "{} raw scores for {} observed conditions",
            raw.len(),
            observed.len()
        )));
    }
    for r in raw {
        if !observed
            .iter()
            .any(|o| o.valence == r.valence && o.condition == r.condition)
        {
            return Err(Error::Normalization(format!(
                "no observed value for {}/{}",
                r.valence.label(),
                r.condition.label()
            )));
        }
    }
    let mut out = raw.to_vec();
    for valence in [Valence::Euphoria, Valence::Anger] {
        let raw_sum: f64 = raw.iter().filter(|r| r.valence == valence).map(|r| r.raw_score).sum();
        let obs_sum: f64 = observed
            .iter()
            .filter(|o| o.valence == valence)
            .map(|o| o.mean_score)
            .sum();
        if !raw.iter().any(|r| r.valence == valence) {
            continue;
        }
        if !(raw_sum > 0.0 && raw_sum.is_finite()) {
            return Err(Error::Normalization(format!(
                "raw {} scores sum to {raw_sum}",
                valence.label()
            )));
        }
        let scale = obs_sum / raw_sum;
        for s in out.iter_mut().filter(|s| s.valence == valence) {
            s.normalized_score = Some(s.raw_score * scale);
        }
    }
    Ok(out)
}

/// Normalize whatever conditions produced a score; conditions that failed
/// are dropped from both sides with a warning.
pub fn normalize_available(
    scores: &[Result<ConditionScore>],
    observed: &[ObservedCondition],
) -> Result<Vec<ConditionScore>> {
    let mut raw = Vec::new();
    let mut kept = Vec::new();
    for (score, obs) in scores.iter().zip(observed) {
        match score {
            Ok(s) => {
                raw.push(*s);
                kept.push(*obs);
            }
            Err(e) => warn!("excluding condition from normalization: {e}"),
        }
    }
    normalize_study1(&raw, &kept)
}

/// 0 (not fearful) to 4 (extremely fearful).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FearScore(pub f64);

impl FearScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// RT-to-fear mapping anchored at the fastest possible fear crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FearScale {
    pub rt_min: u64,
}

impl FearScale {
    /// `rt_min = ceil((boundary_upper - initial_bias) / step_size)`.
    pub fn from_params(params: &DdmParams) -> Self {
        Self {
            rt_min: params.min_steps_to_upper().max(1),
        }
    }

    /// `4 * rt_min / rt` for fear-boundary exits, clamped to [0, 4]; 0 otherwise.
    pub fn score(&self, outcome: &TrialOutcome) -> FearScore {
        match outcome.exit {
            Exit::Upper if outcome.rt_steps > 0 => {
                FearScore((4.0 * self.rt_min as f64 / outcome.rt_steps as f64).clamp(0.0, 4.0))
            }
            Exit::Upper => FearScore(4.0),
            Exit::Lower | Exit::Timeout => FearScore(0.0),
        }
    }
}

pub fn fear_score(outcome: &TrialOutcome, params: &DdmParams) -> FearScore {
    FearScale::from_params(params).score(outcome)
}

/// Midpoint of the 0..4 fear scale.
pub const FEAR_THRESHOLD: f64 = 2.0;

/// Percentage of trials whose fear score is strictly above `threshold`.
pub fn pct_over_threshold(batch: &BatchResult, scale: &FearScale, threshold: f64) -> Result<f64> {
    if batch.outcomes.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let over = batch
        .outcomes
        .iter()
        .filter(|o| scale.score(o).value() > threshold)
        .count();
    Ok(100.0 * over as f64 / batch.outcomes.len() as f64)
}

pub fn mean_fear_score(batch: &BatchResult, scale: &FearScale) -> Result<f64> {
    if batch.outcomes.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let total: f64 = batch.outcomes.iter().map(|o| scale.score(o).value()).sum();
    Ok(total / batch.outcomes.len() as f64)
}
