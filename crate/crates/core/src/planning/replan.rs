use super::{PlanConfig, Planner};
use crate::aggregation::{propagate_weights, ObjectiveSet, WeightState};
use crate::error::{Error, Result};
use crate::model::State;
use crate::trajectory::TrajectorySpec;

/// Replans from scratch every step and executes the first planned action.
///
/// With `propagate = false` every plan starts from `ws`; with
/// `propagate = true` the weights advance by `w_i ← w_i γ_i(s, a)` after each
/// executed step. The realized run is returned in eventually periodic form.
pub fn myopic_replan_simulate(
    objs: &ObjectiveSet,
    ws: &WeightState,
    start: State,
    steps: usize,
    cfg: &PlanConfig,
    propagate: bool,
) -> Result<TrajectorySpec> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let planner = Planner::new(objs, cfg)?;
    let dynamics = objs.dynamics();
    let mut current = ws.clone();
    let mut s = start;
    let mut pairs = Vec::with_capacity(steps);
    for _ in 0..steps {
        let a = planner.plan(&current, s)?.first_action();
        pairs.push((s, a));
        if propagate {
            current = propagate_weights(&current, s, a, objs)?;
            current.step += 1;
        }
        s = dynamics.successor(s, a).ok_or(Error::StochasticDynamics)?;
    }
    TrajectorySpec::from_realized(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{aggregate_trajectory_value, Objective};
    use crate::fixtures::{peril, PLAY, WORK};

    #[test]
    fn naive_agent_plays_forever() {
        let objs = peril();
        let ws = WeightState::new(vec![1.0, 1.0]).unwrap();
        let t = myopic_replan_simulate(&objs, &ws, 0, 20, &PlanConfig::with_horizon(2), false).unwrap();
        assert_eq!(t, TrajectorySpec { prefix: vec![], cycle: vec![(0, PLAY)] });
        assert!((aggregate_trajectory_value(&objs, &ws, &t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn propagating_agent_plays_once() {
        let objs = peril();
        let ws = WeightState::new(vec![1.0, 1.0]).unwrap();
        let t = myopic_replan_simulate(&objs, &ws, 0, 20, &PlanConfig::with_horizon(2), true).unwrap();
        assert_eq!(t, TrajectorySpec { prefix: vec![(0, PLAY)], cycle: vec![(0, WORK)] });
    }

    #[test]
    fn single_objective_ignores_propagation() {
        let work = ObjectiveSet::new(vec![Objective::new("work", peril().get(1).mdp.clone())]).unwrap();
        let ws = WeightState::new(vec![1.0]).unwrap();
        let cfg = PlanConfig::with_horizon(3);
        let a = myopic_replan_simulate(&work, &ws, 0, 12, &cfg, false).unwrap();
        let b = myopic_replan_simulate(&work, &ws, 0, 12, &cfg, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_steps_rejected() {
        let ws = WeightState::new(vec![1.0, 1.0]).unwrap();
        assert!(myopic_replan_simulate(&peril(), &ws, 0, 0, &PlanConfig::default(), true).is_err());
    }
}
