//! The procrastination instance used throughout the tests and bundled scenarios.
//!
//! One state, two actions. `play` pays 0.5 and discounts by 0.5; `work` pays
//! 0.3 and discounts by 0.9.

use crate::aggregation::{Objective, ObjectiveSet};
use crate::augmentation::{lift_window_counter, CounterLift, WindowCounterObjective};
use crate::model::{Action, GeneralizedMdp};

pub const WORK: Action = 0;
pub const PLAY: Action = 1;

/// Objectives `[play, work]`.
pub fn peril() -> ObjectiveSet {
    let objective = |name: &str, reward: [f64; 2], gamma: f64| {
        let mdp =
            GeneralizedMdp::deterministic(1, 2, &[0, 0], reward.to_vec(), vec![gamma; 2]).expect("static instance");
        Objective::new(name, mdp)
    };
    ObjectiveSet::new(vec![objective("play", [0.0, 0.5], 0.5), objective("work", [0.3, 0.0], 0.9)])
        .expect("static instance")
}

/// The play-every-`window` rule: pays 0.5 for play, discounted by 0.9.
pub fn playn_rule(window: usize) -> WindowCounterObjective {
    WindowCounterObjective { name: "playn".into(), trigger: PLAY, reward: 0.5, window, discount: 0.9 }
}

/// Objectives `[play, work, playn]` over the counter-lifted state space.
pub fn peril_playn() -> (ObjectiveSet, CounterLift) {
    let lifted = lift_window_counter(&playn_rule(10), &peril()).expect("static instance");
    let lift = lifted.lift;
    (lifted.into_set().expect("static instance"), lift)
}
