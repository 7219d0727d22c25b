use emoddm::ddm::oracle::lattice_upper_hit_probability;
use emoddm::ddm::{simulate_batch, simulate_path, simulate_trial, trial_seed, DdmParams, Exit, Kernel};
use proptest::prelude::*;

fn aligned_params() -> impl Strategy<Value = DdmParams> {
    (prop_oneof![Just(0.05), Just(0.1)], -8i32..=8, -4i32..=4).prop_map(|(step, k, v)| {
        let bias = (f64::from(k) * step * 1e9).round() / 1e9;
        DdmParams::lattice(bias, f64::from(v) * 0.01, step)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hit_probability_increases_with_drift(p in aligned_params(), dv in 0.001f64..0.02) {
        let mut q = p;
        q.drift_rate = (p.drift_rate + dv).min(p.step_size);
        prop_assume!(q.drift_rate > p.drift_rate);
        let a = lattice_upper_hit_probability(&p).unwrap();
        let b = lattice_upper_hit_probability(&q).unwrap();
        // Far from the boundaries the closed form rounds to 1 in f64.
        if a < 1.0 - 1e-9 {
            prop_assert!(b > a, "{a} !< {b}");
        } else {
            prop_assert!(b >= a);
        }
    }

    #[test]
    fn hit_probability_mirror(p in aligned_params()) {
        let mirrored = DdmParams::lattice(-p.initial_bias, -p.drift_rate, p.step_size);
        let a = lattice_upper_hit_probability(&p).unwrap();
        let b = lattice_upper_hit_probability(&mirrored).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn upper_exits_respect_lattice_minimum(
        bias in -0.9f64..0.9,
        v in -0.05f64..0.05,
        step in 0.05f64..0.2,
        seed in any::<u64>(),
    ) {
        let p = DdmParams::lattice(bias, v.clamp(-step, step), step);
        let min_up = p.min_steps_to_upper();
        let min_down = p.min_steps_to_lower();
        for o in simulate_batch(&p, 40, seed).unwrap().outcomes {
            match o.exit {
                Exit::Upper => prop_assert!(o.rt_steps >= min_up),
                Exit::Lower => prop_assert!(o.rt_steps >= min_down),
                Exit::Timeout => prop_assert!(false, "unexpected timeout"),
            }
        }
    }

    #[test]
    fn trials_never_exceed_max_steps(max_steps in 1u64..60, seed in any::<u64>(), gaussian in any::<bool>()) {
        let kernel = if gaussian { Kernel::Gaussian } else { Kernel::BernoulliLattice };
        let p = DdmParams::lattice(0.0, 0.0, 0.05).with_kernel(kernel).with_max_steps(max_steps);
        let o = simulate_trial(&p, seed).unwrap();
        prop_assert!(o.rt_steps <= max_steps);
        if o.exit == Exit::Timeout {
            prop_assert_eq!(o.rt_steps, max_steps);
        }
    }

    #[test]
    fn path_endpoint_matches_exit(p in aligned_params(), seed in any::<u64>()) {
        let path = simulate_path(&p, seed).unwrap();
        let last = *path.positions.last().unwrap();
        prop_assert_eq!(path.positions.len() as u64, path.outcome.rt_steps + 1);
        match path.outcome.exit {
            Exit::Upper => prop_assert!(last >= p.boundary_upper - 1e-9),
            Exit::Lower => prop_assert!(last <= p.boundary_lower + 1e-9),
            Exit::Timeout => {}
        }
    }

    #[test]
    fn batch_is_sequence_of_trials(p in aligned_params(), seed in any::<u64>()) {
        let batch = simulate_batch(&p, 25, seed).unwrap();
        prop_assert_eq!(batch.outcomes.len(), 25);
        for (i, o) in batch.outcomes.iter().enumerate() {
            prop_assert_eq!(*o, simulate_trial(&p, trial_seed(seed, i as u64)).unwrap());
        }
    }
}

#[test]
fn batches_identical_across_thread_counts() {
    let p = DdmParams::lattice(0.2, 0.01, 0.05);
    let reference = simulate_batch(&p, 3000, 11).unwrap();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let batch = pool.install(|| simulate_batch(&p, 3000, 11).unwrap());
        assert_eq!(batch, reference, "{threads} threads");
    }
}
