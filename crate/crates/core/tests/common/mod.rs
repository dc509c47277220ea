//! Random instance builders shared by the integration targets.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use timepref::aggregation::{Objective, ObjectiveSet};
use timepref::model::{Action, GeneralizedMdp, State};

pub fn random_distribution(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub fn random_successors(rng: &mut StdRng, ns: usize, na: usize) -> Vec<State> {
    (0..ns * na).map(|_| rng.gen_range(0..ns)).collect()
}

pub fn random_table(rng: &mut StdRng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Deterministic dynamics with state-action discounts in `[lo, hi)`.
pub fn random_deterministic(rng: &mut StdRng, ns: usize, na: usize, lo: f64, hi: f64) -> GeneralizedMdp {
    let succ = random_successors(rng, ns, na);
    let reward = random_table(rng, ns * na, -1.0, 1.0);
    let discount = random_table(rng, ns * na, lo, hi);
    GeneralizedMdp::deterministic(ns, na, &succ, reward, discount).unwrap()
}

/// Dense stochastic dynamics.
pub fn random_stochastic(rng: &mut StdRng, ns: usize, na: usize, lo: f64, hi: f64) -> GeneralizedMdp {
    let transition = (0..ns * na).map(|_| random_distribution(rng, ns)).collect();
    let reward = random_table(rng, ns * na, -1.0, 1.0);
    let discount = random_table(rng, ns * na, lo, hi);
    GeneralizedMdp::new(ns, na, transition, reward, discount).unwrap()
}

/// `k` objectives over one shared deterministic kernel.
pub fn random_objectives(rng: &mut StdRng, k: usize, ns: usize, na: usize, lo: f64, hi: f64) -> ObjectiveSet {
    let base = random_deterministic(rng, ns, na, lo, hi);
    let objectives = (0..k)
        .map(|i| {
            let mdp = base
                .with_reward_and_discount(random_table(rng, ns * na, -1.0, 1.0), random_table(rng, ns * na, lo, hi))
                .unwrap();
            Objective::new(format!("o{i}"), mdp)
        })
        .collect();
    ObjectiveSet::new(objectives).unwrap()
}

pub fn random_actions(rng: &mut StdRng, na: usize, len: usize) -> Vec<Action> {
    (0..len).map(|_| rng.gen_range(0..na)).collect()
}
