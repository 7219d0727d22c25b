//! Observed data embedded as constants.
//!
//! Study 1: mean self-reported emotion scores (happiness minus anger, on
//! -4..+4) from the epinephrine/confederate experiment. Study 2: summary
//! statistics and qualitative time-course anchors from the shock/noise
//! attribution experiment, whose per-interval percentages were only
//! published as a figure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenarios::{Study, Study1Condition, Study2Group, Valence, STUDY2_INTERVALS};

pub const DATASET_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StudyId {
    Study1,
    Study2,
}

impl From<Study> for StudyId {
    fn from(s: Study) -> Self {
        match s {
            Study::Study1 => StudyId::Study1,
            Study::Study2 => StudyId::Study2,
        }
    }
}

impl FromStr for StudyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "study1" => Ok(StudyId::Study1),
            "2" | "study2" => Ok(StudyId::Study2),
            _ => Err(Error::UnknownStudy(s.to_string())),
        }
    }
}

impl fmt::Display for StudyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyId::Study1 => "study1",
            StudyId::Study2 => "study2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedCondition {
    pub valence: Valence,
    pub condition: Study1Condition,
    pub n_subjects: u32,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study1Data {
    pub euphoria: Vec<ObservedCondition>,
    pub anger: Vec<ObservedCondition>,
}

impl Study1Data {
    pub fn table(&self, valence: Valence) -> &[ObservedCondition] {
        match valence {
            Valence::Euphoria => &self.euphoria,
            Valence::Anger => &self.anger,
            Valence::Fear => &[],
        }
    }

    /// Euphoria rows then anger rows.
    pub fn all(&self) -> impl Iterator<Item = &ObservedCondition> {
        self.euphoria.iter().chain(self.anger.iter())
    }

    pub fn mean(&self, valence: Valence, condition: Study1Condition) -> Option<f64> {
        self.table(valence)
            .iter()
            .find(|r| r.condition == condition)
            .map(|r| r.mean_score)
    }

    pub fn table_sum(&self, valence: Valence) -> f64 {
        self.table(valence).iter().map(|r| r.mean_score).sum()
    }
}

/// Time spent on the shock-avoidance puzzle (seconds, out of 180).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuzzleTime {
    pub mean_seconds: f64,
    pub sd_seconds: f64,
}

/// Anchors for the percentage of subjects working on the shock puzzle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study2Data {
    pub shock_time: PuzzleTime,
    pub noise_time: PuzzleTime,
    pub n_intervals: u32,
    /// Level the shock-attribution group holds throughout.
    pub shock_level_pct: f64,
    /// Level the noise-attribution group settles at.
    pub noise_plateau_pct: f64,
    /// Interval by which the noise-attribution group reaches its plateau.
    pub plateau_interval: u32,
}

impl Study2Data {
    /// Target percentage for `group` at interval `t` (1-based).
    ///
    /// The shock group sits at its level throughout. The noise group starts
    /// at the same level, falls linearly to the plateau by
    /// `plateau_interval`, and stays there.
    pub fn target_pct(&self, group: Study2Group, t: u32) -> f64 {
        match group {
            Study2Group::ShockAttribution => self.shock_level_pct,
            Study2Group::NoiseAttribution => {
                if t >= self.plateau_interval {
                    self.noise_plateau_pct
                } else {
                    let frac = f64::from(t.saturating_sub(1)) / f64::from(self.plateau_interval - 1);
                    self.shock_level_pct + frac * (self.noise_plateau_pct - self.shock_level_pct)
                }
            }
        }
    }

    pub fn target_curve(&self, group: Study2Group) -> Vec<f64> {
        (1..=self.n_intervals).map(|t| self.target_pct(group, t)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "snake_case")]
pub enum StudyDataset {
    Study1(Study1Data),
    Study2(Study2Data),
}

impl StudyDataset {
    pub fn id(&self) -> StudyId {
        match self {
            StudyDataset::Study1(_) => StudyId::Study1,
            StudyDataset::Study2(_) => StudyId::Study2,
        }
    }

    pub fn study1(&self) -> Option<&Study1Data> {
        match self {
            StudyDataset::Study1(d) => Some(d),
            StudyDataset::Study2(_) => None,
        }
    }

    pub fn study2(&self) -> Option<&Study2Data> {
        match self {
            StudyDataset::Study2(d) => Some(d),
            StudyDataset::Study1(_) => None,
        }
    }

    /// Flat `(key, value)` rows for CSV export.
    pub fn rows(&self) -> Vec<(String, f64)> {
        match self {
            StudyDataset::Study1(d) => d
                .all()
                .flat_map(|r| {
                    let key = format!("{}/{}", r.valence.label(), r.condition.label());
                    [
                        (format!("{key}/n"), f64::from(r.n_subjects)),
                        (format!("{key}/mean"), r.mean_score),
                    ]
                })
                .collect(),
            StudyDataset::Study2(d) => {
                let mut rows = vec![
                    ("shock/time_mean_s".to_string(), d.shock_time.mean_seconds),
                    ("shock/time_sd_s".to_string(), d.shock_time.sd_seconds),
                    ("noise/time_mean_s".to_string(), d.noise_time.mean_seconds),
                    ("noise/time_sd_s".to_string(), d.noise_time.sd_seconds),
                    ("shock/level_pct".to_string(), d.shock_level_pct),
                    ("noise/plateau_pct".to_string(), d.noise_plateau_pct),
                    ("noise/plateau_interval".to_string(), f64::from(d.plateau_interval)),
                ];
                for group in Study2Group::ALL {
                    for t in 1..=d.n_intervals {
                        rows.push((format!("{}/target_pct/t{t}", group.label()), d.target_pct(group, t)));
                    }
                }
                rows
            }
        }
    }
}

fn obs(valence: Valence, condition: Study1Condition, n_subjects: u32, mean_score: f64) -> ObservedCondition {
    ObservedCondition {
        valence,
        condition,
        n_subjects,
        mean_score,
    }
}

pub fn study1_data() -> Study1Data {
    use Study1Condition::*;
    use Valence::*;
    Study1Data {
        euphoria: vec![
            obs(Euphoria, EpiInformed, 25, 0.98),
            obs(Euphoria, EpiMisinformed, 25, 1.78),
            obs(Euphoria, EpiIgnorant, 25, 1.90),
            obs(Euphoria, Placebo, 26, 1.61),
        ],
        anger: vec![
            obs(Anger, EpiInformed, 22, 1.91),
            obs(Anger, EpiIgnorant, 23, 1.39),
            obs(Anger, Placebo, 23, 1.63),
        ],
    }
}

pub fn study2_data() -> Study2Data {
    Study2Data {
        shock_time: PuzzleTime {
            mean_seconds: 140.34,
            sd_seconds: 34.84,
        },
        noise_time: PuzzleTime {
            mean_seconds: 88.22,
            sd_seconds: 57.02,
        },
        n_intervals: STUDY2_INTERVALS,
        shock_level_pct: 80.0,
        noise_plateau_pct: 40.0,
        plateau_interval: 10,
    }
}

pub fn load_embedded(id: StudyId) -> StudyDataset {
    match id {
        StudyId::Study1 => StudyDataset::Study1(study1_data()),
        StudyId::Study2 => StudyDataset::Study2(study2_data()),
    }
}

/// Parse a study id and load its data.
pub fn load_embedded_str(id: &str) -> Result<StudyDataset> {
    Ok(load_embedded(id.parse()?))
}
