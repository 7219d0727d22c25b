//! Run configuration: JSON file merged with command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use emoddm::fitting::{FitTheta, GridSpec};
use emoddm::scenarios::{ModelVariant, Study};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantChoice {
    Model1,
    Model2,
    Both,
}

impl VariantChoice {
    pub fn variants(self) -> Vec<ModelVariant> {
        match self {
            VariantChoice::Model1 => vec![ModelVariant::Model1ArousalPrior],
            VariantChoice::Model2 => vec![ModelVariant::Model2ContextPrior],
            VariantChoice::Both => ModelVariant::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum StudyArg {
    #[value(name = "1")]
    #[serde(rename = "1", alias = "study1")]
    One,
    #[value(name = "2")]
    #[serde(rename = "2", alias = "study2")]
    Two,
}

impl From<StudyArg> for Study {
    fn from(s: StudyArg) -> Self {
        match s {
            StudyArg::One => Study::Study1,
            StudyArg::Two => Study::Study2,
        }
    }
}

/// One optional value per model variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Deserialize<'de>"))]
pub struct PerVariant<T> {
    #[serde(default)]
    pub model1: Option<T>,
    #[serde(default)]
    pub model2: Option<T>,
}

impl<T> Default for PerVariant<T> {
    fn default() -> Self {
        Self {
            model1: None,
            model2: None,
        }
    }
}

impl<T> PerVariant<T> {
    pub fn get(&self, variant: ModelVariant) -> Option<&T> {
        match variant {
            ModelVariant::Model1ArousalPrior => self.model1.as_ref(),
            ModelVariant::Model2ContextPrior => self.model2.as_ref(),
        }
    }
}

/// Contents of a `--config` file. Every key is optional; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub study: Option<StudyArg>,
    #[serde(default)]
    pub variant: Option<VariantChoice>,
    #[serde(default)]
    pub theta: PerVariant<FitTheta>,
    #[serde(default)]
    pub grid: PerVariant<GridSpec>,
    #[serde(default)]
    pub n_trials: Option<usize>,
    #[serde(default)]
    pub base_seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub plot: Option<bool>,
    #[serde(default)]
    pub alpha_rate: Option<f64>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid config")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonArgs {
    /// Study to run; both when omitted.
    #[arg(long, value_enum)]
    pub study: Option<StudyArg>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantChoice>,
    /// Trials per condition (per interval and group for study 2).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: results].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Also write SVG charts.
    #[arg(long)]
    pub plot: bool,
    /// Override the study 2 misattribution rate.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_rate: Option<f64>,
    /// Fear score a trial must exceed to count as working on the shock puzzle.
    #[arg(long)]
    pub threshold: Option<f64>,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub studies: Vec<Study>,
    pub variants: Vec<ModelVariant>,
    pub theta: PerVariant<FitTheta>,
    pub grid: PerVariant<GridSpec>,
    pub n_trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub out_given: bool,
    pub format: OutputFormat,
    pub plot: bool,
    pub alpha_rate: Option<f64>,
    pub threshold: Option<f64>,
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let cfg = match &args.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(Self::merge(args, cfg))
    }

    pub fn merge(args: &CommonArgs, cfg: RunConfig) -> Self {
        let studies = match args.study.or(cfg.study) {
            Some(s) => vec![s.into()],
            None => vec![Study::Study1, Study::Study2],
        };
        let out = args.out.clone().or(cfg.out);
        Settings {
            studies,
            variants: args.variant.or(cfg.variant).unwrap_or(VariantChoice::Both).variants(),
            theta: cfg.theta,
            grid: cfg.grid,
            n_trials: args.trials.or(cfg.n_trials),
            seed: args.seed.or(cfg.base_seed),
            out_given: out.is_some(),
            out: out.unwrap_or_else(|| PathBuf::from("results")),
            format: args.format.or(cfg.format).unwrap_or_default(),
            plot: args.plot || cfg.plot.unwrap_or(false),
            alpha_rate: args.alpha_rate.or(cfg.alpha_rate),
            threshold: args.threshold.or(cfg.threshold),
        }
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_json(r#"{"n_trails": 5}"#).unwrap_err();
        assert!(format!("{err:#}").contains("n_trails"), "{err:#}");
    }

    #[test]
    fn full_config_parses() {
        let cfg = RunConfig::from_json(
            r#"{
                "study": "2",
                "variant": "model2",
                "theta": {"model2": {"s0": 0.2, "v0": 0.03, "alpha_rate": -0.01}},
                "n_trials": 20,
                "base_seed": 9,
                "format": "json",
                "plot": true,
                "threshold": 2.5
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.study, Some(StudyArg::Two));
        assert!(matches!(cfg.theta.model2, Some(FitTheta::Study2(_))));
        assert_eq!(cfg.theta.model1, None);
    }

    #[test]
    fn study1_theta_in_config() {
        let cfg = RunConfig::from_json(
            r#"{"theta": {"model1": {"variant": "model1", "v0": 0.01, "v1": 0.03, "d0": 0.1, "d1": 0.06}}}"#,
        )
        .unwrap();
        assert!(matches!(cfg.theta.model1, Some(FitTheta::Study1(_))));
    }

    #[test]
    fn flags_override_config() {
        let cfg = RunConfig {
            n_trials: Some(10),
            base_seed: Some(5),
            variant: Some(VariantChoice::Model1),
            ..Default::default()
        };
        let args = CommonArgs {
            seed: Some(7),
            ..Default::default()
        };
        let s = Settings::merge(&args, cfg);
        assert_eq!(s.seed, Some(7));
        assert_eq!(s.n_trials, Some(10));
        assert_eq!(s.variants, vec![ModelVariant::Model1ArousalPrior]);
        assert_eq!(s.studies.len(), 2);
        assert_eq!(s.out, PathBuf::from("results"));
        assert!(!s.out_given);
    }
}
