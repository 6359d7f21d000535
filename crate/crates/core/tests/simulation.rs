use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skillopt::harness::{shape_library, task_library};
use skillopt::primitives::{ParamSpace, PolicyExecutor, PrimitiveParams};
use skillopt::sim::{rollout, PerturbationBounds, RolloutConfig};

#[test]
fn random_policies_respect_simulator_invariants() {
    let tasks = task_library(&shape_library().unwrap()).unwrap();
    let space = ParamSpace::initial();
    let cfg = RolloutConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut successes = 0;
    for t in &tasks {
        for trial in 0..25 {
            let v: Vec<f64> = (0..space.dim())
                .map(|i| rng.gen_range(space.lower[i]..=space.upper[i]))
                .collect();
            let inst = t.with_perturbation(&PerturbationBounds::default(), trial);
            let run = |v: &[f64]| {
                let mut ex = PolicyExecutor::new(PrimitiveParams::from_slice(v).unwrap());
                let r = rollout(&mut ex, &inst, &cfg).unwrap();
                (r, ex.history().to_vec())
            };
            let (r, phases) = run(&v);
            assert_eq!(r.diagnostics.tunneling_violations, 0, "{} {v:?}", t.name);
            assert_eq!(r.diagnostics.wrench_violations, 0, "{} {v:?}", t.name);
            assert!(r.elapsed <= cfg.max_duration + 1e-9);
            // phases only move forward
            assert!(phases.windows(2).all(|w| w[0] < w[1]), "{phases:?}");
            let last = r.trajectory.states.last().unwrap();
            if r.success {
                successes += 1;
                assert!(inst.is_success(&last.pose));
            }
            // identical inputs give an identical rollout
            let (again, _) = run(&v);
            assert_eq!(
                serde_json::to_string(&r).unwrap(),
                serde_json::to_string(&again).unwrap()
            );
        }
    }
    assert!(successes > 0);
}

#[test]
fn perturbations_stay_within_bounds() {
    let t = &task_library(&shape_library().unwrap()).unwrap()[0];
    let b = PerturbationBounds::default();
    for seed in 0..500 {
        let e = t.with_perturbation(&b, seed).hole_pose_estimated;
        let h = t.hole_pose_true;
        assert!((e.x - h.x).abs() <= b.translation && (e.y - h.y).abs() <= b.translation);
        assert!((e.yaw - h.yaw).abs() <= b.yaw);
        assert_eq!(e.z, h.z);
    }
}
