//! Mapping from experimental conditions and model variants to walk parameters.
//!
//! Study 1 (epinephrine/confederate design) and Study 2 (shock/noise
//! attribution over 10-second intervals) each come in two variants:
//!
//! | variant | prior (start)     | likelihood (drift) |
//! |---------|-------------------|--------------------|
//! | Model 1 | arousal, unbiased | context            |
//! | Model 2 | context           | arousal            |
//!
//! The upper boundary is euphoria (Study 1) or fear (Study 2); the lower
//! boundary is anger or non-fear.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ddm::DdmParams;
use crate::error::{Error, Result};

/// Number of 10-second intervals in the 3-minute puzzle phase.
pub const STUDY2_INTERVALS: u32 = 18;

/// Step size that makes 20 steps the fastest route from 0 to the fear boundary.
pub const STUDY2_STEP_SIZE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Arousal as prior, context as likelihood.
    #[serde(rename = "model1", alias = "model1_arousal_prior")]
    Model1ArousalPrior,
    /// Context as prior, arousal as likelihood.
    #[serde(rename = "model2", alias = "model2_context_prior")]
    Model2ContextPrior,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 2] = [Self::Model1ArousalPrior, Self::Model2ContextPrior];

    pub fn label(self) -> &'static str {
        match self {
            Self::Model1ArousalPrior => "model1",
            Self::Model2ContextPrior => "model2",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "model1" | "1" | "m1" => Ok(Self::Model1ArousalPrior),
            "model2" | "2" | "m2" => Ok(Self::Model2ContextPrior),
            other => Err(Error::InvalidBinding(format!("unknown model variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    #[serde(rename = "1", alias = "study1")]
    Study1,
    #[serde(rename = "2", alias = "study2")]
    Study2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Valence {
    Euphoria,
    Anger,
    Fear,
}

impl Valence {
    /// +1 toward the upper boundary, -1 toward the lower.
    pub fn sign(self) -> f64 {
        match self {
            Valence::Euphoria | Valence::Fear => 1.0,
            Valence::Anger => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Valence::Euphoria => "euphoria",
            Valence::Anger => "anger",
            Valence::Fear => "fear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study1Condition {
    EpiInformed,
    EpiMisinformed,
    EpiIgnorant,
    Placebo,
}

impl Study1Condition {
    pub fn label(self) -> &'static str {
        match self {
            Self::EpiInformed => "epi_informed",
            Self::EpiMisinformed => "epi_misinformed",
            Self::EpiIgnorant => "epi_ignorant",
            Self::Placebo => "placebo",
        }
    }

    /// Conditions run in each arm, in table order.
    pub fn for_valence(valence: Valence) -> &'static [Study1Condition] {
        match valence {
            Valence::Euphoria => &[
                Self::EpiInformed,
                Self::EpiMisinformed,
                Self::EpiIgnorant,
                Self::Placebo,
            ],
            Valence::Anger => &[Self::EpiInformed, Self::EpiIgnorant, Self::Placebo],
            Valence::Fear => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study2Group {
    ShockAttribution,
    NoiseAttribution,
}

impl Study2Group {
    pub const ALL: [Study2Group; 2] = [Self::ShockAttribution, Self::NoiseAttribution];

    pub fn label(self) -> &'static str {
        match self {
            Self::ShockAttribution => "shock",
            Self::NoiseAttribution => "noise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "study")]
pub enum Condition {
    Study1(Study1Condition),
    Study2(Study2Group),
}

/// One experimental cell: study, condition, valence and (Study 2) interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConditionBinding {
    pub condition: Condition,
    pub valence: Valence,
    pub interval: Option<u32>,
}

impl ConditionBinding {
    pub fn study1(condition: Study1Condition, valence: Valence) -> Result<Self> {
        if !Study1Condition::for_valence(valence).contains(&condition) {
            return Err(Error::InvalidBinding(format!(
                "{} is not run in the {} arm",
                condition.label(),
                valence.label()
            )));
        }
        Ok(Self {
            condition: Condition::Study1(condition),
            valence,
            interval: None,
        })
    }

    pub fn study2(group: Study2Group, interval: u32, n_intervals: u32) -> Result<Self> {
        check_interval(interval, n_intervals)?;
        Ok(Self {
            condition: Condition::Study2(group),
            valence: Valence::Fear,
            interval: Some(interval),
        })
    }

    pub fn study(&self) -> Study {
        match self.condition {
            Condition::Study1(_) => Study::Study1,
            Condition::Study2(_) => Study::Study2,
        }
    }

    /// All seven Study 1 cells: euphoria rows then anger rows.
    pub fn all_study1() -> Vec<ConditionBinding> {
        [Valence::Euphoria, Valence::Anger]
            .iter()
            .flat_map(|&v| {
                Study1Condition::for_valence(v)
                    .iter()
                    .map(move |&c| ConditionBinding::study1(c, v).expect("table cell"))
            })
            .collect()
    }

    pub fn label(&self) -> String {
        match (self.condition, self.interval) {
            (Condition::Study1(c), _) => format!("{}/{}", self.valence.label(), c.label()),
            (Condition::Study2(g), Some(t)) => format!("{}/t{}", g.label(), t),
            (Condition::Study2(g), None) => g.label().to_string(),
        }
    }
}

/// Free parameters of Study 1, one shape per variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum Study1Theta {
    /// Drift `v0` for Epi Informed, `v1` otherwise; step `d0`, or `d1` for placebo.
    #[serde(rename = "model1")]
    ArousalPrior { v0: f64, v1: f64, d0: f64, d1: f64 },
    /// Start `±s0` for Epi Informed, `±s1` otherwise; step `d0`, or `d1` for placebo.
    #[serde(rename = "model2")]
    ContextPrior { s0: f64, s1: f64, d0: f64, d1: f64 },
}

impl Study1Theta {
    pub fn variant(&self) -> ModelVariant {
        match self {
            Self::ArousalPrior { .. } => ModelVariant::Model1ArousalPrior,
            Self::ContextPrior { .. } => ModelVariant::Model2ContextPrior,
        }
    }

    /// Parameter names in grid order.
    pub fn names(variant: ModelVariant) -> [&'static str; 4] {
        match variant {
            ModelVariant::Model1ArousalPrior => ["v0", "v1", "d0", "d1"],
            ModelVariant::Model2ContextPrior => ["s0", "s1", "d0", "d1"],
        }
    }

    pub fn from_values(variant: ModelVariant, values: [f64; 4]) -> Self {
        let [a, b, d0, d1] = values;
        match variant {
            ModelVariant::Model1ArousalPrior => Self::ArousalPrior { v0: a, v1: b, d0, d1 },
            ModelVariant::Model2ContextPrior => Self::ContextPrior { s0: a, s1: b, d0, d1 },
        }
    }

    pub fn values(&self) -> [f64; 4] {
        match *self {
            Self::ArousalPrior { v0, v1, d0, d1 } => [v0, v1, d0, d1],
            Self::ContextPrior { s0, s1, d0, d1 } => [s0, s1, d0, d1],
        }
    }

    /// Table ordering constraints: `0 < v0 < v1` or `0 <= s0 < s1 < 1`, and `d1 < d0`.
    pub fn validate(&self) -> Result<()> {
        let values = self.values();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTheta(format!("non-finite value in {self:?}")));
        }
        match *self {
            Self::ArousalPrior { v0, v1, .. } => {
                if !(0.0 < v0 && v0 < v1) {
                    return Err(Error::InvalidTheta(format!("need 0 < v0 < v1, got v0={v0}, v1={v1}")));
                }
            }
            Self::ContextPrior { s0, s1, .. } => {
                if !(0.0 <= s0 && s0 < s1 && s1 < 1.0) {
                    return Err(Error::InvalidTheta(format!(
                        "need 0 <= s0 < s1 < 1, got s0={s0}, s1={s1}"
                    )));
                }
            }
        }
        let [_, _, d0, d1] = values;
        if !(0.0 < d1 && d1 < d0) {
            return Err(Error::InvalidTheta(format!("need 0 < d1 < d0, got d0={d0}, d1={d1}")));
        }
        Ok(())
    }
}

/// Walk parameters for one Study 1 cell. Boundaries are fixed at ±1.
pub fn study1_params(
    condition: Study1Condition,
    valence: Valence,
    theta: &Study1Theta,
) -> Result<DdmParams> {
    theta.validate()?;
    ConditionBinding::study1(condition, valence)?;
    let sign = valence.sign();
    let informed = condition == Study1Condition::EpiInformed;
    let placebo = condition == Study1Condition::Placebo;
    let params = match *theta {
        Study1Theta::ArousalPrior { v0, v1, d0, d1 } => DdmParams::lattice(
            0.0,
            sign * if informed { v0 } else { v1 },
            if placebo { d1 } else { d0 },
        ),
        Study1Theta::ContextPrior { s0, s1, d0, d1 } => DdmParams::lattice(
            sign * if informed { s0 } else { s1 },
            0.0,
            if placebo { d1 } else { d0 },
        ),
    };
    params.validate()?;
    Ok(params)
}

/// Free parameters of Study 2, shared in shape by both variants.
///
/// `alpha_rate` sets the misattribution schedule `alpha_t = alpha_rate * (t - 1)`.
/// Model 1 lowers the drift to `v0 - alpha_t` and needs `alpha_rate >= 0`.
/// Model 2 moves both boundaries to `±1 - alpha_t`; a fear-reducing shift
/// moves them away from the fear side, i.e. `alpha_rate <= 0`, so either sign
/// is accepted there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Study2Theta {
    pub s0: f64,
    pub v0: f64,
    pub alpha_rate: f64,
    #[serde(default = "default_study2_step")]
    pub step_size: f64,
}

fn default_study2_step() -> f64 {
    STUDY2_STEP_SIZE
}

impl Study2Theta {
    pub const NAMES: [&'static str; 4] = ["s0", "v0", "alpha_rate", "step_size"];

    pub fn new(s0: f64, v0: f64, alpha_rate: f64) -> Self {
        Self {
            s0,
            v0,
            alpha_rate,
            step_size: STUDY2_STEP_SIZE,
        }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.s0, self.v0, self.alpha_rate, self.step_size]
    }

    pub fn from_values(values: [f64; 4]) -> Self {
        let [s0, v0, alpha_rate, step_size] = values;
        Self {
            s0,
            v0,
            alpha_rate,
            step_size,
        }
    }

    pub fn validate(&self, variant: ModelVariant, n_intervals: u32) -> Result<()> {
        if self.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTheta(format!("non-finite value in {self:?}")));
        }
        if !(0.0 < self.s0 && self.s0 < 1.0) {
            return Err(Error::InvalidTheta(format!("need 0 < s0 < 1, got {}", self.s0)));
        }
        if self.v0 <= 0.0 {
            return Err(Error::InvalidTheta(format!("need v0 > 0, got {}", self.v0)));
        }
        if self.step_size <= 0.0 {
            return Err(Error::InvalidTheta(format!("need step_size > 0, got {}", self.step_size)));
        }
        if self.v0 > self.step_size {
            return Err(Error::InvalidTheta(format!(
                "v0 ({}) exceeds step_size ({})",
                self.v0, self.step_size
            )));
        }
        let last_alpha = self.alpha_rate * f64::from(n_intervals.saturating_sub(1));
        match variant {
            ModelVariant::Model1ArousalPrior => {
                if self.alpha_rate < 0.0 {
                    return Err(Error::InvalidTheta(format!(
                        "model1 needs alpha_rate >= 0, got {}",
                        self.alpha_rate
                    )));
                }
                if (self.v0 - last_alpha).abs() > self.step_size {
                    return Err(Error::InvalidTheta(format!(
                        "drift v0 - alpha_t = {} leaves the lattice range ±{} by interval {}",
                        self.v0 - last_alpha,
                        self.step_size,
                        n_intervals
                    )));
                }
            }
            ModelVariant::Model2ContextPrior => {
                // The start must stay inside the shifted corridor (1 - a, -1 - a).
                if !(-1.0 - last_alpha < self.s0 && self.s0 < 1.0 - last_alpha) {
                    return Err(Error::InvalidTheta(format!(
                        "start s0 = {} leaves the shifted corridor ({}, {}) by interval {}",
                        self.s0,
                        -1.0 - last_alpha,
                        1.0 - last_alpha,
                        n_intervals
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_interval(t: u32, n_intervals: u32) -> Result<()> {
    if t == 0 || t > n_intervals {
        return Err(Error::IntervalOutOfRange { t, n_intervals });
    }
    Ok(())
}

/// Linear misattribution schedule over `n_intervals` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSchedule {
    pub rate: f64,
    pub n_intervals: u32,
}

impl AlphaSchedule {
    pub fn new(rate: f64) -> Self {
        Self {
            rate,
            n_intervals: STUDY2_INTERVALS,
        }
    }

    /// `alpha_t = rate * (t - 1)`, so `alpha_1 = 0`.
    pub fn at(&self, t: u32) -> Result<f64> {
        check_interval(t, self.n_intervals)?;
        Ok(self.rate * f64::from(t - 1))
    }
}

pub fn alpha_schedule(alpha_rate: f64, t: u32) -> Result<f64> {
    AlphaSchedule::new(alpha_rate).at(t)
}

/// Walk parameters for one Study 2 group at interval `t` (1-based).
pub fn study2_params(
    variant: ModelVariant,
    group: Study2Group,
    t: u32,
    theta: &Study2Theta,
    n_intervals: u32,
) -> Result<DdmParams> {
    theta.validate(variant, n_intervals)?;
    let alpha = AlphaSchedule {
        rate: theta.alpha_rate,
        n_intervals,
    }
    .at(t)?;
    let base = DdmParams::lattice(theta.s0, theta.v0, theta.step_size);
    let params = match (group, variant) {
        (Study2Group::ShockAttribution, _) => base,
        (Study2Group::NoiseAttribution, ModelVariant::Model1ArousalPrior) => DdmParams {
            drift_rate: theta.v0 - alpha,
            ..base
        },
        (Study2Group::NoiseAttribution, ModelVariant::Model2ContextPrior) => {
            base.with_boundaries(-1.0 - alpha, 1.0 - alpha)
        }
    };
    params.validate()?;
    Ok(params)
}
