//! Bounded drift-diffusion trials simulated to first boundary crossing.
//!
//! A trial starts at `initial_bias` and adds one increment per step until the
//! position reaches `boundary_upper` or `boundary_lower` (inclusive), or until
//! `max_steps` increments have been taken. Time is measured in unitless steps.
//!
//! Two increment kernels are available:
//!
//! * [`Kernel::BernoulliLattice`] (default): `+step_size` with probability
//!   `p = (1 + drift_rate / step_size) / 2`, otherwise `-step_size`. The
//!   expected increment is `drift_rate`, and a start at distance `D` from a
//!   boundary needs at least `ceil(D / step_size)` steps to reach it.
//! * [`Kernel::Gaussian`]: `drift_rate + step_size * xi` with `xi ~ N(0, 1)`.
//!
//! Under both kernels `E[Z_n] = Z_0 + n * drift_rate` until absorption.

pub mod oracle;
pub mod seed;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use seed::trial_seed;

/// Default hard cap on the number of increments per trial.
pub const DEFAULT_MAX_STEPS: u64 = 100_000;

/// Relative slack used when converting a distance into a whole number of
/// lattice steps, so that `1.0 / 0.05` counts as 20 steps rather than 21.
const LATTICE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    BernoulliLattice,
    Gaussian,
}

/// Parameterization of one bounded random walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdmParams {
    pub initial_bias: f64,
    pub drift_rate: f64,
    pub step_size: f64,
    pub boundary_upper: f64,
    pub boundary_lower: f64,
    pub kernel: Kernel,
    pub max_steps: u64,
}

impl Default for DdmParams {
    fn default() -> Self {
        Self {
            initial_bias: 0.0,
            drift_rate: 0.0,
            step_size: 0.1,
            boundary_upper: 1.0,
            boundary_lower: -1.0,
            kernel: Kernel::BernoulliLattice,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl DdmParams {
    /// Lattice walk between the default boundaries `±1`.
    pub fn lattice(initial_bias: f64, drift_rate: f64, step_size: f64) -> Self {
        Self {
            initial_bias,
            drift_rate,
            step_size,
            ..Self::default()
        }
    }

    pub fn with_boundaries(mut self, lower: f64, upper: f64) -> Self {
        self.boundary_lower = lower;
        self.boundary_upper = upper;
        self
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("initial_bias", self.initial_bias),
            ("drift_rate", self.drift_rate),
            ("step_size", self.step_size),
            ("boundary_upper", self.boundary_upper),
            ("boundary_lower", self.boundary_lower),
        ];
        if let Some((name, value)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} is not finite ({value})")));
        }
        if self.boundary_lower >= self.boundary_upper {
            return Err(Error::InvalidParams(format!(
                "boundary_lower ({}) must be below boundary_upper ({})",
                self.boundary_lower, self.boundary_upper
            )));
        }
        if !(self.boundary_lower < self.initial_bias && self.initial_bias < self.boundary_upper) {
            return Err(Error::InvalidParams(format!(
                "initial_bias {} outside ({}, {})",
                self.initial_bias, self.boundary_lower, self.boundary_upper
            )));
        }
        if self.step_size <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "step_size must be positive, got {}",
                self.step_size
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParams("max_steps must be at least 1".into()));
        }
        if self.kernel == Kernel::BernoulliLattice && self.drift_rate.abs() > self.step_size {
            return Err(Error::InvalidParams(format!(
                "|drift_rate| ({}) exceeds step_size ({}) under the lattice kernel",
                self.drift_rate.abs(),
                self.step_size
            )));
        }
        Ok(())
    }

    /// Probability of an upward step under the lattice kernel.
    pub fn up_probability(&self) -> f64 {
        0.5 * (1.0 + self.drift_rate / self.step_size)
    }

    /// Fewest lattice steps needed to reach the upper boundary from the start.
    pub fn min_steps_to_upper(&self) -> u64 {
        steps_to_cover(self.boundary_upper - self.initial_bias, self.step_size)
    }

    pub fn min_steps_to_lower(&self) -> u64 {
        steps_to_cover(self.initial_bias - self.boundary_lower, self.step_size)
    }
}

/// Number of whole steps of length `step` needed to travel at least `distance`.
pub fn steps_to_cover(distance: f64, step: f64) -> u64 {
    if distance <= 0.0 {
        return 0;
    }
    let ratio = distance / step;
    ((ratio - LATTICE_EPS * ratio.max(1.0)).ceil() as u64).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exit {
    Upper,
    Lower,
    Timeout,
}

/// Exit side and first-exit step count of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub exit: Exit,
    pub rt_steps: u64,
}

/// Ordered outcomes of `n_trials` trials sharing one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub outcomes: Vec<TrialOutcome>,
    pub n_trials: usize,
    pub base_seed: u64,
}

impl BatchResult {
    pub fn count(&self, exit: Exit) -> usize {
        self.outcomes.iter().filter(|o| o.exit == exit).count()
    }
}

/// How the per-trial random stream is mapped onto increments.
///
/// `Antithetic` reflects every draw (`u -> 1 - u` for the lattice kernel,
/// `xi -> -xi` for the Gaussian kernel). A trial run with `Antithetic` under
/// negated drift and bias is the mirror image of the same trial run with
/// `Standard`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMapping {
    #[default]
    Standard,
    Antithetic,
}

/// A full trajectory, including the starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPath {
    pub positions: Vec<f64>,
    pub outcome: TrialOutcome,
}

pub fn simulate_trial(params: &DdmParams, trial_seed: u64) -> Result<TrialOutcome> {
    simulate_trial_with(params, trial_seed, NoiseMapping::Standard)
}

pub fn simulate_trial_with(
    params: &DdmParams,
    trial_seed: u64,
    mapping: NoiseMapping,
) -> Result<TrialOutcome> {
    params.validate()?;
    Ok(run_trial(params, trial_seed, mapping, |_| {}))
}

/// Same walk as [`simulate_trial`], but records every visited position.
pub fn simulate_path(params: &DdmParams, trial_seed: u64) -> Result<TrialPath> {
    params.validate()?;
    let mut positions = Vec::new();
    let outcome = run_trial(params, trial_seed, NoiseMapping::Standard, |z| positions.push(z));
    Ok(TrialPath { positions, outcome })
}

pub fn simulate_batch(params: &DdmParams, n_trials: usize, base_seed: u64) -> Result<BatchResult> {
    simulate_batch_with(params, n_trials, base_seed, NoiseMapping::Standard)
}

pub fn simulate_batch_with(
    params: &DdmParams,
    n_trials: usize,
    base_seed: u64,
    mapping: NoiseMapping,
) -> Result<BatchResult> {
    params.validate()?;
    if n_trials == 0 {
        return Err(Error::EmptyBatch);
    }
    let outcomes = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| run_trial(params, trial_seed(base_seed, i), mapping, |_| {}))
        .collect();
    Ok(BatchResult {
        outcomes,
        n_trials,
        base_seed,
    })
}

// Assumes validated params. `observe` sees Z_0 and every subsequent position.
fn run_trial(
    params: &DdmParams,
    seed: u64,
    mapping: NoiseMapping,
    mut observe: impl FnMut(f64),
) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    observe(params.initial_bias);
    match params.kernel {
        Kernel::BernoulliLattice => {
            // Walk on integer offsets from the start so crossings are exact.
            let up = params.min_steps_to_upper() as i64;
            let down = -(params.min_steps_to_lower() as i64);
            let p = params.up_probability();
            let mut k: i64 = 0;
            for n in 1..=params.max_steps {
                let u: f64 = rng.random();
                let step_up = match mapping {
                    NoiseMapping::Standard => u < p,
                    NoiseMapping::Antithetic => 1.0 - u < p,
                };
                k += if step_up { 1 } else { -1 };
                observe(params.initial_bias + k as f64 * params.step_size);
                if k >= up {
                    return TrialOutcome { exit: Exit::Upper, rt_steps: n };
                }
                if k <= down {
                    return TrialOutcome { exit: Exit::Lower, rt_steps: n };
                }
            }
        }
        Kernel::Gaussian => {
            let mut z = params.initial_bias;
            for n in 1..=params.max_steps {
                let xi: f64 = rng.sample(StandardNormal);
                let xi = match mapping {
                    NoiseMapping::Standard => xi,
                    NoiseMapping::Antithetic => -xi,
                };
                z += params.drift_rate + params.step_size * xi;
                observe(z);
                if z >= params.boundary_upper {
                    return TrialOutcome { exit: Exit::Upper, rt_steps: n };
                }
                if z <= params.boundary_lower {
                    return TrialOutcome { exit: Exit::Lower, rt_steps: n };
                }
            }
        }
    }
    TrialOutcome {
        exit: Exit::Timeout,
        rt_steps: params.max_steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bias_outside_boundaries() {
        let p = DdmParams::lattice(1.0, 0.0, 0.1);
        assert!(matches!(simulate_trial(&p, 1), Err(Error::InvalidParams(_))));
        let p = DdmParams::lattice(-1.5, 0.0, 0.1);
        assert!(matches!(simulate_trial(&p, 1), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn rejects_bad_step_and_drift() {
        assert!(DdmParams::lattice(0.0, 0.0, 0.0).validate().is_err());
        assert!(DdmParams::lattice(0.0, 0.0, -0.1).validate().is_err());
        assert!(DdmParams::lattice(0.0, 0.2, 0.1).validate().is_err());
        // The Gaussian kernel has no |drift| <= step constraint.
        assert!(DdmParams::lattice(0.0, 0.2, 0.1)
            .with_kernel(Kernel::Gaussian)
            .validate()
            .is_ok());
        assert!(DdmParams::lattice(0.0, 0.0, 0.1).with_max_steps(0).validate().is_err());
        assert!(DdmParams::lattice(0.0, f64::NAN, 0.1).validate().is_err());
        assert!(DdmParams::lattice(0.0, 0.0, 0.1)
            .with_boundaries(1.0, 1.0)
            .validate()
            .is_err());
    }

    #[test]
    fn empty_batch_is_an_error() {
        let p = DdmParams::lattice(0.0, 0.0, 0.1);
        assert_eq!(simulate_batch(&p, 0, 0), Err(Error::EmptyBatch));
    }

    #[test]
    fn steps_to_cover_tolerates_rounding() {
        assert_eq!(steps_to_cover(1.0, 0.05), 20);
        assert_eq!(steps_to_cover(1.0, 0.1), 10);
        assert_eq!(steps_to_cover(0.9, 0.05), 18);
        assert_eq!(steps_to_cover(1.0, 0.06), 17);
        assert_eq!(steps_to_cover(1e-12, 0.1), 1);
    }

    #[test]
    fn boundary_adjacent_start_exits_quickly() {
        let p = DdmParams::lattice(1.0 - 1e-6, 0.0, 0.1);
        let batch = simulate_batch(&p, 200, 3).unwrap();
        for o in &batch.outcomes {
            if o.exit == Exit::Upper {
                assert_eq!(o.rt_steps % 2, 1);
            }
        }
        // Half of all trials step up first and exit immediately.
        let first_step = batch.outcomes.iter().filter(|o| o.rt_steps == 1).count();
        assert!(first_step > 60 && first_step < 140, "{first_step}");
        assert_eq!(p.min_steps_to_upper(), 1);
    }

    #[test]
    fn twenty_step_minimum_at_step_005() {
        let p = DdmParams::lattice(0.0, 0.0, 0.05);
        let batch = simulate_batch(&p, 500, 11).unwrap();
        assert!(batch.outcomes.iter().all(|o| o.rt_steps >= 20));
        // Parity: from 0, both boundaries are an even number of steps away.
        assert!(batch.outcomes.iter().all(|o| o.rt_steps % 2 == 0));
    }

    #[test]
    fn timeout_is_reported_at_cap() {
        let p = DdmParams::lattice(0.0, 0.0, 0.01).with_max_steps(5);
        let o = simulate_trial(&p, 9).unwrap();
        assert_eq!(o, TrialOutcome { exit: Exit::Timeout, rt_steps: 5 });
    }

    #[test]
    fn path_ends_beyond_the_exit_boundary() {
        for kernel in [Kernel::BernoulliLattice, Kernel::Gaussian] {
            let p = DdmParams::lattice(0.3, 0.01, 0.07).with_kernel(kernel);
            for seed in 0..50 {
                let path = simulate_path(&p, seed).unwrap();
                let last = *path.positions.last().unwrap();
                assert_eq!(path.positions.len() as u64, path.outcome.rt_steps + 1);
                match path.outcome.exit {
                    Exit::Upper => assert!(last >= p.boundary_upper - 1e-9),
                    Exit::Lower => assert!(last <= p.boundary_lower + 1e-9),
                    Exit::Timeout => {}
                }
                assert_eq!(simulate_trial(&p, seed).unwrap(), path.outcome);
            }
        }
    }

    #[test]
    fn batch_is_reproducible() {
        let p = DdmParams::lattice(0.1, 0.02, 0.05);
        let a = simulate_batch(&p, 1000, 77).unwrap();
        let b = simulate_batch(&p, 1000, 77).unwrap();
        assert_eq!(a, b);
        let c = simulate_batch(&p, 1000, 78).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn batch_matches_serial_trials() {
        let p = DdmParams::lattice(-0.2, -0.01, 0.05).with_kernel(Kernel::Gaussian);
        let batch = simulate_batch(&p, 64, 5).unwrap();
        for (i, o) in batch.outcomes.iter().enumerate() {
            assert_eq!(*o, simulate_trial(&p, trial_seed(5, i as u64)).unwrap());
        }
    }

    #[test]
    fn antithetic_mirror_flips_exits() {
        let up = DdmParams::lattice(0.0, 0.02, 0.1);
        let down = DdmParams::lattice(0.0, -0.02, 0.1);
        let a = simulate_batch_with(&up, 1000, 8, NoiseMapping::Standard).unwrap();
        let b = simulate_batch_with(&down, 1000, 8, NoiseMapping::Antithetic).unwrap();
        for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
            assert_eq!(x.rt_steps, y.rt_steps);
            let mirrored = match x.exit {
                Exit::Upper => Exit::Lower,
                Exit::Lower => Exit::Upper,
                Exit::Timeout => Exit::Timeout,
            };
            assert_eq!(y.exit, mirrored);
        }
        assert_eq!(a.count(Exit::Upper), b.count(Exit::Lower));
        assert_eq!(a.count(Exit::Lower), b.count(Exit::Upper));
    }
}
