//! Closed-form gambler's-ruin results for the lattice kernel, and a
//! Monte-Carlo-versus-analytic check built on them.

use serde::{Deserialize, Serialize};

use super::{simulate_batch, BatchResult, DdmParams, Exit, Kernel};
use crate::error::{Error, Result};

const ALIGN_TOL: f64 = 1e-6;

fn aligned_steps(distance: f64, step: f64, what: &str) -> Result<u64> {
    let ratio = distance / step;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > ALIGN_TOL || rounded < 1.0 {
        return Err(Error::NotLatticeAligned(format!(
            "{what} distance {distance} is not a whole multiple of step {step}"
        )));
    }
    Ok(rounded as u64)
}

fn lattice_geometry(params: &DdmParams) -> Result<(u64, u64)> {
    params.validate()?;
    if params.kernel != Kernel::BernoulliLattice {
        return Err(Error::Unsupported("closed forms require the lattice kernel".into()));
    }
    let from_lower = aligned_steps(
        params.initial_bias - params.boundary_lower,
        params.step_size,
        "lower",
    )?;
    let from_upper = aligned_steps(
        params.boundary_upper - params.initial_bias,
        params.step_size,
        "upper",
    )?;
    Ok((from_lower, from_lower + from_upper))
}

/// Probability that a lattice walk is absorbed at the upper boundary.
///
/// With `k` steps between the start and the lower boundary, `K` steps between
/// the boundaries and `r = q / p`, this is `(1 - r^k) / (1 - r^K)`, or `k / K`
/// for the fair walk.
pub fn lattice_upper_hit_probability(params: &DdmParams) -> Result<f64> {
    let (k, total) = lattice_geometry(params)?;
    let p = params.up_probability();
    let q = 1.0 - p;
    if p >= 1.0 {
        return Ok(1.0);
    }
    if p <= 0.0 {
        return Ok(0.0);
    }
    if (p - q).abs() < 1e-12 {
        return Ok(k as f64 / total as f64);
    }
    let r = q / p;
    // For r > 1 rewrite in terms of 1/r to keep the powers bounded.
    if r > 1.0 {
        let s = p / q;
        let (k, total) = (k as i32, total as i32);
        Ok(s.powi(total - k) * (1.0 - s.powi(k)) / (1.0 - s.powi(total)))
    } else {
        Ok((1.0 - r.powi(k as i32)) / (1.0 - r.powi(total as i32)))
    }
}

/// Expected number of steps to absorption for the driftless lattice walk.
pub fn lattice_expected_exit_steps(params: &DdmParams) -> Result<f64> {
    lattice_geometry(params)?;
    if params.drift_rate != 0.0 {
        return Err(Error::Unsupported(
            "expected exit steps in closed form only for zero drift".into(),
        ));
    }
    Ok(gamblers_ruin_duration(
        params.boundary_upper - params.initial_bias,
        params.initial_bias - params.boundary_lower,
        params.step_size,
    ))
}

/// `(b - z)(z - a) / d^2`, the fair gambler's-ruin duration.
pub fn gamblers_ruin_duration(to_upper: f64, to_lower: f64, step: f64) -> f64 {
    to_upper * to_lower / (step * step)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OraclePoint {
    pub initial_bias: f64,
    pub drift_rate: f64,
    pub step_size: f64,
}

impl OraclePoint {
    pub fn params(&self) -> DdmParams {
        DdmParams::lattice(self.initial_bias, self.drift_rate, self.step_size)
    }
}

/// 30 lattice-aligned points: drift in {-0.04, -0.02, 0, 0.02, 0.04},
/// step in {0.05, 0.1}, bias in {-0.5, 0, 0.5}, boundaries at ±1.
pub fn default_oracle_points() -> Vec<OraclePoint> {
    let mut points = Vec::new();
    for &step_size in &[0.05, 0.1] {
        for &initial_bias in &[-0.5, 0.0, 0.5] {
            for &drift_rate in &[-0.04, -0.02, 0.0, 0.02, 0.04] {
                points.push(OraclePoint {
                    initial_bias,
                    drift_rate,
                    step_size,
                });
            }
        }
    }
    points
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePointReport {
    pub point: OraclePoint,
    pub n_trials: usize,
    pub analytic_upper: f64,
    pub empirical_upper: f64,
    /// |empirical - analytic| in binomial standard errors.
    pub z_score: f64,
    pub analytic_mean_steps: Option<f64>,
    pub empirical_mean_steps: f64,
    pub mean_steps_rel_error: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub points: Vec<OraclePointReport>,
    pub max_z_score: f64,
    pub max_mean_steps_rel_error: f64,
    pub z_threshold: f64,
    pub rel_error_threshold: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.pass)
    }
}

pub const ORACLE_Z_THRESHOLD: f64 = 3.0;
pub const ORACLE_REL_ERROR_THRESHOLD: f64 = 0.05;

/// Compare simulated batches against the closed forms at every point.
///
/// `simulate` produces the batch for a point; passing something other than
/// [`simulate_batch`] lets callers run negative controls.
pub fn run_oracle_suite<F>(
    points: &[OraclePoint],
    n_trials: usize,
    base_seed: u64,
    simulate: F,
) -> Result<OracleReport>
where
    F: Fn(&DdmParams, usize, u64) -> Result<BatchResult>,
{
    let mut reports = Vec::with_capacity(points.len());
    for point in points {
        let params = point.params();
        let analytic_upper = lattice_upper_hit_probability(&params)?;
        let batch = simulate(&params, n_trials, base_seed)?;
        let n = batch.outcomes.len() as f64;
        let empirical_upper = batch.count(Exit::Upper) as f64 / n;
        let se = (analytic_upper * (1.0 - analytic_upper) / n).sqrt();
        let dev = (empirical_upper - analytic_upper).abs();
        let z_score = if se > 0.0 {
            dev / se
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let empirical_mean_steps =
            batch.outcomes.iter().map(|o| o.rt_steps as f64).sum::<f64>() / n;
        let analytic_mean_steps = lattice_expected_exit_steps(&params).ok();
        let mean_steps_rel_error =
            analytic_mean_steps.map(|a| (empirical_mean_steps - a).abs() / a);
        let pass = z_score <= ORACLE_Z_THRESHOLD
            && mean_steps_rel_error.is_none_or(|e| e <= ORACLE_REL_ERROR_THRESHOLD);
        reports.push(OraclePointReport {
            point: *point,
            n_trials: batch.outcomes.len(),
            analytic_upper,
            empirical_upper,
            z_score,
            analytic_mean_steps,
            empirical_mean_steps,
            mean_steps_rel_error,
            pass,
        });
    }
    let max_z_score = reports.iter().map(|r| r.z_score).fold(0.0, f64::max);
    let max_mean_steps_rel_error = reports
        .iter()
        .filter_map(|r| r.mean_steps_rel_error)
        .fold(0.0, f64::max);
    Ok(OracleReport {
        points: reports,
        max_z_score,
        max_mean_steps_rel_error,
        z_threshold: ORACLE_Z_THRESHOLD,
        rel_error_threshold: ORACLE_REL_ERROR_THRESHOLD,
    })
}

/// The default suite against the real simulator.
pub fn run_default_oracle_suite(n_trials: usize, base_seed: u64) -> Result<OracleReport> {
    run_oracle_suite(&default_oracle_points(), n_trials, base_seed, simulate_batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Absorption probabilities by direct solution of the tridiagonal
    /// first-step equations h(j) = p h(j+1) + q h(j-1), h(0) = 0, h(K) = 1.
    fn brute_force_hit(k: usize, total: usize, p: f64) -> f64 {
        let q = 1.0 - p;
        // Thomas algorithm on interior nodes 1..K-1.
        let n = total - 1;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 0..n {
            let rhs = if i == n - 1 { p } else { 0.0 };
            let (a, b, cc) = (-q, 1.0, -p);
            let denom = if i == 0 { b } else { b - a * c[i - 1] };
            c[i] = cc / denom;
            d[i] = (rhs - if i == 0 { 0.0 } else { a * d[i - 1] }) / denom;
        }
        let mut h = vec![0.0; n];
        h[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            h[i] = d[i] - c[i] * h[i + 1];
        }
        h[k - 1]
    }

    #[test]
    fn fair_symmetric_is_one_half() {
        let p = DdmParams::lattice(0.0, 0.0, 0.1);
        assert_relative_eq!(lattice_upper_hit_probability(&p).unwrap(), 0.5);
    }

    #[test]
    fn fair_offset_start() {
        let p = DdmParams::lattice(0.5, 0.0, 0.05);
        assert_relative_eq!(lattice_upper_hit_probability(&p).unwrap(), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn drifted_case_matches_frozen_value() {
        // p = 0.6, k = 10, K = 20; frozen from an exact rational evaluation
        // and an independent linear solve.
        let p = DdmParams::lattice(0.0, 0.02, 0.1);
        let v = lattice_upper_hit_probability(&p).unwrap();
        assert_relative_eq!(v, 0.982_954_072_545_070_2, epsilon = 1e-12);
        assert_relative_eq!(v, brute_force_hit(10, 20, 0.6), epsilon = 1e-12);
    }

    #[test]
    fn closed_form_agrees_with_linear_solve() {
        for point in default_oracle_points() {
            let params = point.params();
            let (k, total) = lattice_geometry(&params).unwrap();
            let expected = brute_force_hit(k as usize, total as usize, params.up_probability());
            assert_relative_eq!(
                lattice_upper_hit_probability(&params).unwrap(),
                expected,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn expected_exit_steps_examples() {
        let p = DdmParams::lattice(0.0, 0.0, 0.1);
        assert_relative_eq!(lattice_expected_exit_steps(&p).unwrap(), 100.0, epsilon = 1e-9);
        let p = DdmParams::lattice(0.5, 0.0, 0.05);
        assert_relative_eq!(lattice_expected_exit_steps(&p).unwrap(), 300.0, epsilon = 1e-9);
        assert_eq!(gamblers_ruin_duration(0.0, 2.0, 0.1), 0.0);
    }

    #[test]
    fn nonzero_drift_duration_unsupported() {
        let p = DdmParams::lattice(0.0, 0.02, 0.1);
        assert!(matches!(lattice_expected_exit_steps(&p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn misaligned_geometry_rejected() {
        let p = DdmParams::lattice(0.0, 0.0, 0.06);
        assert!(matches!(
            lattice_upper_hit_probability(&p),
            Err(Error::NotLatticeAligned(_))
        ));
        let p = DdmParams::lattice(0.0, 0.0, 0.1).with_kernel(Kernel::Gaussian);
        assert!(matches!(lattice_upper_hit_probability(&p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn degenerate_drift_equal_to_step() {
        let p = DdmParams::lattice(0.0, 0.1, 0.1);
        assert_eq!(lattice_upper_hit_probability(&p).unwrap(), 1.0);
        let p = DdmParams::lattice(0.0, -0.1, 0.1);
        assert_eq!(lattice_upper_hit_probability(&p).unwrap(), 0.0);
    }

    #[test]
    fn strong_negative_drift_is_stable() {
        // r = q/p large; naive evaluation would overflow for long lattices.
        let p = DdmParams::lattice(0.0, -0.009, 0.01);
        let v = lattice_upper_hit_probability(&p).unwrap();
        assert!(v.is_finite() && (0.0..1e-100).contains(&v));
    }

    #[test]
    fn biased_simulator_fails_the_suite() {
        let points = [OraclePoint { initial_bias: 0.0, drift_rate: 0.0, step_size: 0.1 }];
        let biased = |p: &DdmParams, n: usize, s: u64| {
            let mut shifted = *p;
            shifted.drift_rate += 0.02;
            simulate_batch(&shifted, n, s)
        };
        let report = run_oracle_suite(&points, 5000, 0, biased).unwrap();
        assert!(!report.passed());
        assert!(report.max_z_score > 3.0);
    }

    #[test]
    fn zero_drift_symmetric_point_passes() {
        let points = [OraclePoint { initial_bias: 0.0, drift_rate: 0.0, step_size: 0.1 }];
        let report = run_oracle_suite(&points, 5000, 0, simulate_batch).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.points[0].z_score <= 3.0);
    }
}
