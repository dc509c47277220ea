//! Library results against independent brute-force computations.

mod common;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use timepref::aggregation::{aggregate_trajectory_value, Objective, ObjectiveSet, WeightState};
use timepref::fixtures::{peril, PLAY, WORK};
use timepref::planning::{
    best_stationary, enumerate_stationary, plan_prefix_tail, stationary_distribution, PlanConfig,
};
use timepref::policy::PolicySpec;
use timepref::trajectory::{TrajectoryParts, TrajectorySpec};
use timepref::valuation::evaluate_stationary;

#[test]
fn linear_solve_matches_long_rollout() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let mut mdp = common::random_stochastic(&mut rng, 3, 2, 0.0, 1.0);
        mdp = mdp.with_reward_and_discount(mdp.rewards().to_vec(), vec![0.95; 6]).unwrap();
        let map = common::random_actions(&mut rng, 2, 3);
        let exact = evaluate_stationary(&mdp, &PolicySpec::Deterministic(map.clone())).unwrap();
        for start in 0..3 {
            // Expected discounted reward accumulated over 10,000 steps.
            let mut dist = vec![0.0; 3];
            dist[start] = 1.0;
            let (mut total, mut scale) = (0.0, 1.0);
            for _ in 0..10_000 {
                let mut next = vec![0.0; 3];
                for s in 0..3 {
                    total += scale * dist[s] * mdp.reward(s, map[s]);
                    for (n, p) in next.iter_mut().zip(mdp.transition(s, map[s])) {
                        *n += dist[s] * p;
                    }
                }
                dist = next;
                scale *= 0.95;
            }
            assert!((total - exact[start]).abs() < 1e-6, "{total} vs {}", exact[start]);
        }
    }
}

#[test]
fn aggregate_value_matches_stepwise_accumulation() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..50 {
        let (ns, na) = (rng.gen_range(1..=3), rng.gen_range(1..=2));
        let objs = common::random_objectives(&mut rng, 2, ns, na, 0.1, 0.95);
        let ws = WeightState::with_constant(vec![rng.gen_range(-2.0..2.0), rng.gen_range(0.1..2.0)], 0.25).unwrap();
        let (lp, lc) = (rng.gen_range(0..10), rng.gen_range(1..6));
        let prefix = common::random_actions(&mut rng, na, lp);
        let cycle = common::random_actions(&mut rng, na, lc);
        let traj = TrajectorySpec::from_actions(objs.dynamics(), rng.gen_range(0..ns), &prefix, &cycle).unwrap();
        let mut gamma = [1.0; 2];
        let mut total = ws.constant;
        for (s, a) in traj.unroll(500) {
            for (i, o) in objs.iter().enumerate() {
                total += ws.weights[i] * gamma[i] * o.mdp.reward(s, a);
                gamma[i] *= o.mdp.discount(s, a);
            }
        }
        let closed = aggregate_trajectory_value(&objs, &ws, &traj).unwrap();
        assert!((total - closed).abs() < 1e-8, "{total} vs {closed}");
    }
}

#[test]
fn stationary_distribution_matches_power_iteration() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..20 {
        let mdp = common::random_stochastic(&mut rng, 4, 2, 0.5, 0.9);
        let objs = ObjectiveSet::new(vec![Objective::new("o", mdp.clone())]).unwrap();
        let map = common::random_actions(&mut rng, 2, 4);
        let d = stationary_distribution(&objs, &PolicySpec::Deterministic(map.clone())).unwrap();
        let mut x = vec![0.25; 4];
        for _ in 0..10_000 {
            let mut next = vec![0.0; 4];
            for s in 0..4 {
                for (n, p) in next.iter_mut().zip(mdp.transition(s, map[s])) {
                    *n += x[s] * p;
                }
            }
            x = next;
        }
        for (a, b) in d.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10, "{d:?} vs {x:?}");
        }
    }
}

#[test]
fn best_plan_on_peril_is_not_stationary() {
    let objs = peril();
    let ws = WeightState::new(vec![1.0, 1.0]).unwrap();
    let plan = plan_prefix_tail(&objs, &ws, 0, &PlanConfig::default(), true).unwrap();
    let (_, stationary) = best_stationary(&objs, &ws, 0).unwrap();
    assert!((plan.value - 3.2).abs() < 1e-9);
    assert!(plan.value > stationary + 0.1);
    let planned = TrajectoryParts::actions_of(&plan.trajectory);
    assert_eq!((planned.prefix.clone(), planned.cycle.clone()), (vec![PLAY], vec![WORK]));
    for policy in enumerate_stationary(&objs, 16).unwrap() {
        let PolicySpec::Deterministic(map) = policy else { unreachable!() };
        let realized = TrajectorySpec::from_stationary(objs.dynamics(), 0, &map).unwrap();
        assert_ne!(TrajectoryParts::actions_of(&realized), planned);
    }
}
