use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use serde::Serialize;

use emoddm::datasets::{load_embedded, StudyDataset, DATASET_VERSION};
use emoddm::ddm::oracle::{default_oracle_points, run_oracle_suite, OracleReport};
use emoddm::ddm::{simulate_batch, DdmParams};
use emoddm::fitting::{default_grid, grid_search, FitResult, FitTheta, STUDY1_TRIALS, STUDY2_TRIALS};
use emoddm::replication::{predict_study1, predict_study2, study2_targets, Simulator, Study1Prediction, Study2Trajectory};
use emoddm::scenarios::{ModelVariant, Study, Study1Theta, Study2Group, Study2Theta};
use emoddm::scoring::FEAR_THRESHOLD;

use crate::config::{OutputFormat, Settings};
use crate::defaults::default_theta;
use crate::svg::{self, Series};

pub const ORACLE_TRIALS: usize = 5000;

/// Interval after which the noise-group SD is reported.
pub const SD_AFTER_INTERVAL: u32 = 8;

fn study_tag(study: Study) -> &'static str {
    match study {
        Study::Study1 => "study1",
        Study::Study2 => "study2",
    }
}

fn metadata(study: Study, seed: u64, n_trials: usize) -> Vec<String> {
    vec![
        format!("emoddm {} dataset {}", env!("CARGO_PKG_VERSION"), DATASET_VERSION),
        format!("study={} seed={seed} n_trials={n_trials}", study_tag(study)),
    ]
}

fn theta_line(variant: ModelVariant, theta: &FitTheta) -> String {
    let names: [&str; 4] = match theta {
        FitTheta::Study1(_) => Study1Theta::names(variant),
        FitTheta::Study2(_) => Study2Theta::NAMES,
    };
    let parts: Vec<String> = names
        .iter()
        .zip(theta.values())
        .map(|(n, v)| format!("{n}={v}"))
        .collect();
    format!("theta {variant} {}", parts.join(" "))
}

pub fn write_csv<T: Serialize>(path: &Path, meta: &[String], rows: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for line in meta {
        buf.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[derive(Serialize)]
struct Document<'a, T> {
    metadata: &'a [String],
    rows: &'a [T],
}

fn write_table<T: Serialize>(settings: &Settings, stem: &str, meta: &[String], rows: &[T]) -> Result<PathBuf> {
    let path = match settings.format {
        OutputFormat::Csv => settings.out.join(format!("{stem}.csv")),
        OutputFormat::Json => settings.out.join(format!("{stem}.json")),
    };
    match settings.format {
        OutputFormat::Csv => write_csv(&path, meta, rows)?,
        OutputFormat::Json => write_json(&path, &Document { metadata: meta, rows })?,
    }
    Ok(path)
}

fn theta_for(settings: &Settings, study: Study, variant: ModelVariant) -> Result<FitTheta> {
    let theta = settings
        .theta
        .get(variant)
        .copied()
        .unwrap_or_else(|| default_theta(study, variant));
    match (study, theta) {
        (Study::Study1, FitTheta::Study1(t)) if t.variant() != variant => {
            bail!("theta for {variant} is tagged {}", t.variant())
        }
        (Study::Study1, FitTheta::Study1(_)) | (Study::Study2, FitTheta::Study2(_)) => Ok(theta),
        _ => bail!("theta for {variant} does not fit {}", study_tag(study)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Study1Row {
    pub variant: ModelVariant,
    pub valence: &'static str,
    pub condition: &'static str,
    pub n_trials: usize,
    pub mean_rt: f64,
    pub error_rate: f64,
    pub raw_score: f64,
    pub normalized_score: Option<f64>,
    pub observed_mean: f64,
    pub squared_error: Option<f64>,
}

fn study1_rows(variant: ModelVariant, pred: &Study1Prediction) -> Vec<Study1Row> {
    pred.scores
        .iter()
        .zip(&pred.observed)
        .map(|(s, &obs)| Study1Row {
            variant,
            valence: s.valence.label(),
            condition: s.condition.label(),
            n_trials: s.n_trials,
            mean_rt: s.mean_rt,
            error_rate: s.error_rate,
            raw_score: s.raw_score,
            normalized_score: s.normalized_score,
            observed_mean: obs,
            squared_error: s.normalized_score.map(|p| (p - obs) * (p - obs)),
        })
        .collect()
}

pub fn replicate_study1(settings: &Settings) -> Result<Vec<(ModelVariant, Study1Prediction)>> {
    let dataset = load_embedded(Study::Study1.into());
    let data = dataset.study1().expect("study 1 data");
    let n_trials = settings.n_trials.unwrap_or(STUDY1_TRIALS);
    let seed = settings.seed_or_default();
    let sim = Simulator {
        n_trials,
        base_seed: seed,
    };
    let mut meta = metadata(Study::Study1, seed, n_trials);
    let mut rows = Vec::new();
    let mut preds = Vec::new();
    for &variant in &settings.variants {
        let FitTheta::Study1(theta) = theta_for(settings, Study::Study1, variant)? else {
            unreachable!()
        };
        let pred = predict_study1(&theta, data, &sim).with_context(|| format!("study1 {variant}"))?;
        for label in &pred.excluded {
            warn!("study1 {variant}: {label} has no congruent exits; left out of normalization and MSE");
            eprintln!("warning: study1 {variant}: condition {label} produced no congruent exits");
        }
        meta.push(theta_line(variant, &FitTheta::Study1(theta)));
        meta.push(format!("mse {variant}={}", pred.mse));
        println!("study1 {variant} mse={:.6}", pred.mse);
        rows.extend(study1_rows(variant, &pred));
        preds.push((variant, pred));
    }
    prepare_out(&settings.out)?;
    let path = write_table(settings, "study1", &meta, &rows)?;
    info!("wrote {}", path.display());
    if settings.plot {
        let categories: Vec<String> = data
            .all()
            .map(|r| format!("{} {}", r.valence.label(), r.condition.label().replace('_', " ")))
            .collect();
        let mut series = vec![Series {
            name: "observed".into(),
            values: data.all().map(|r| r.mean_score).collect(),
            dashed: false,
        }];
        for (variant, pred) in &preds {
            let values = data
                .all()
                .map(|r| {
                    pred.scores
                        .iter()
                        .find(|s| s.valence == r.valence && s.condition == r.condition)
                        .and_then(|s| s.normalized_score)
                        .unwrap_or(f64::NAN)
                })
                .collect();
            series.push(Series {
                name: variant.to_string(),
                values,
                dashed: false,
            });
        }
        let chart = svg::bar_chart("Emotion scores: observed vs simulated", "score", &categories, &series);
        write_text(&settings.out.join("study1.svg"), &chart)?;
    }
    Ok(preds)
}

#[derive(Debug, Clone, Serialize)]
pub struct Study2Row {
    pub variant: ModelVariant,
    pub group: &'static str,
    pub interval: u32,
    pub pct_over_threshold: f64,
    pub mean_fear_score: f64,
}

pub fn replicate_study2(settings: &Settings) -> Result<Vec<Study2Trajectory>> {
    let dataset = load_embedded(Study::Study2.into());
    let data = dataset.study2().expect("study 2 data");
    let n_trials = settings.n_trials.unwrap_or(STUDY2_TRIALS);
    let seed = settings.seed_or_default();
    let threshold = settings.threshold.unwrap_or(FEAR_THRESHOLD);
    let sim = Simulator {
        n_trials,
        base_seed: seed,
    };
    let mut meta = metadata(Study::Study2, seed, n_trials);
    meta.push(format!("threshold={threshold}"));
    let targets = study2_targets(data);
    let mut rows = Vec::new();
    let mut trajectories = Vec::new();
    for &variant in &settings.variants {
        let FitTheta::Study2(mut theta) = theta_for(settings, Study::Study2, variant)? else {
            unreachable!()
        };
        if let Some(rate) = settings.alpha_rate {
            theta.alpha_rate = rate;
        }
        let traj = predict_study2(variant, &theta, data.n_intervals, threshold, &sim)
            .with_context(|| format!("study2 {variant}"))?;
        let predicted: Vec<f64> = traj.points.iter().map(|p| p.pct_over_threshold).collect();
        let mse = emoddm::fitting::mse(&predicted, &targets)?;
        let sd = traj.noise_sd_after(SD_AFTER_INTERVAL);
        meta.push(theta_line(variant, &FitTheta::Study2(theta)));
        meta.push(format!("mse {variant}={mse} noise_sd_after_{SD_AFTER_INTERVAL}={sd}"));
        println!("study2 {variant} mse={mse:.4} noise_sd_after_{SD_AFTER_INTERVAL}={sd:.4}");
        rows.extend(traj.points.iter().map(|p| Study2Row {
            variant,
            group: p.group.label(),
            interval: p.interval,
            pct_over_threshold: p.pct_over_threshold,
            mean_fear_score: p.mean_fear_score,
        }));
        trajectories.push(traj);
    }
    prepare_out(&settings.out)?;
    let path = write_table(settings, "study2", &meta, &rows)?;
    info!("wrote {}", path.display());
    if settings.plot {
        for traj in &trajectories {
            let mut series = Vec::new();
            for group in Study2Group::ALL {
                series.push(Series {
                    name: format!("{} simulated", group.label()),
                    values: traj.curve(group),
                    dashed: false,
                });
            }
            for group in Study2Group::ALL {
                series.push(Series {
                    name: format!("{} target", group.label()),
                    values: data.target_curve(group),
                    dashed: true,
                });
            }
            let chart = svg::line_chart(
                &format!("Subjects working on the shock puzzle ({})", traj.variant),
                "interval (10 s)",
                "% fear score over threshold",
                100.0,
                &series,
            );
            write_text(&settings.out.join(format!("study2_{}.svg", traj.variant)), &chart)?;
        }
    }
    Ok(trajectories)
}

pub fn replicate(settings: &Settings) -> Result<()> {
    for &study in &settings.studies {
        match study {
            Study::Study1 => {
                replicate_study1(settings)?;
            }
            Study::Study2 => {
                replicate_study2(settings)?;
            }
        }
    }
    Ok(())
}

pub fn fit(settings: &Settings) -> Result<Vec<FitResult>> {
    prepare_out(&settings.out)?;
    let mut results = Vec::new();
    for &study in &settings.studies {
        let dataset: StudyDataset = load_embedded(study.into());
        let mut study_results: Vec<FitResult> = Vec::new();
        for &variant in &settings.variants {
            let mut grid = settings
                .grid
                .get(variant)
                .cloned()
                .unwrap_or_else(|| default_grid(study, variant));
            if let Some(n) = settings.n_trials {
                grid.n_trials = n;
            }
            if let Some(seed) = settings.seed {
                grid.base_seed = seed;
            }
            let result = grid_search(study, variant, &grid, &dataset)
                .with_context(|| format!("fitting {} {variant}", study_tag(study)))?;
            println!(
                "{} {variant} best_mse={:.6} {} evaluated={} rejected={} failed={}",
                study_tag(study),
                result.best_mse,
                theta_line(variant, &result.best_theta),
                result.n_grid_points_evaluated,
                result.constraint_rejections,
                result.failed_points.len()
            );
            let path = settings.out.join(format!("fit_{}_{variant}.json", study_tag(study)));
            write_json(&path, &result)?;
            info!("wrote {}", path.display());
            study_results.push(result);
        }
        if let [a, b] = study_results.as_slice() {
            let (m1, m2) = if a.variant == ModelVariant::Model1ArousalPrior { (a, b) } else { (b, a) };
            println!(
                "{} model1_mse < model2_mse: {}",
                study_tag(study),
                m1.best_mse < m2.best_mse
            );
        }
        results.extend(study_results);
    }
    Ok(results)
}

/// Runs the oracle suite; `kernel_bias` shifts the simulated drift by that
/// many step sizes while the closed forms keep the true drift.
pub fn oracle_check(settings: &Settings, kernel_bias: f64) -> Result<OracleReport> {
    let n_trials = settings.n_trials.unwrap_or(ORACLE_TRIALS);
    let seed = settings.seed_or_default();
    let simulate = |p: &DdmParams, n: usize, s: u64| {
        let mut biased = *p;
        biased.drift_rate = (p.drift_rate + kernel_bias * p.step_size).clamp(-p.step_size, p.step_size);
        simulate_batch(&biased, n, s)
    };
    let report = run_oracle_suite(&default_oracle_points(), n_trials, seed, simulate)?;
    for r in &report.points {
        if !r.pass {
            println!(
                "FAIL bias={} drift={} step={} analytic={:.4} empirical={:.4} z={:.2} steps_rel_err={}",
                r.point.initial_bias,
                r.point.drift_rate,
                r.point.step_size,
                r.analytic_upper,
                r.empirical_upper,
                r.z_score,
                r.mean_steps_rel_error.map_or("-".to_string(), |e| format!("{e:.4}"))
            );
        }
    }
    println!(
        "oracle points={} trials={n_trials} seed={seed} max_z={:.3} (limit {}) max_steps_rel_err={:.4} (limit {}) {}",
        report.points.len(),
        report.max_z_score,
        report.z_threshold,
        report.max_mean_steps_rel_error,
        report.rel_error_threshold,
        if report.passed() { "PASS" } else { "FAIL" }
    );
    if settings.out_given {
        prepare_out(&settings.out)?;
        write_json(&settings.out.join("oracle.json"), &report)?;
    }
    Ok(report)
}

#[derive(Serialize)]
struct DataRow {
    key: String,
    value: f64,
}

pub fn export_data(settings: &Settings) -> Result<()> {
    prepare_out(&settings.out)?;
    for &study in &settings.studies {
        let dataset = load_embedded(study.into());
        let stem = format!("{}_data", study_tag(study));
        match settings.format {
            OutputFormat::Csv => {
                let rows: Vec<DataRow> = dataset.rows().into_iter().map(|(key, value)| DataRow { key, value }).collect();
                let meta = vec![format!("emoddm {} dataset {}", env!("CARGO_PKG_VERSION"), DATASET_VERSION)];
                write_csv(&settings.out.join(format!("{stem}.csv")), &meta, &rows)?;
            }
            OutputFormat::Json => write_json(&settings.out.join(format!("{stem}.json")), &dataset)?,
        }
        println!("wrote {}", settings.out.join(&stem).display());
    }
    Ok(())
}
