mod common;

use approx::assert_relative_eq;
use phimdp::cost::{cost, CostParams};
use phimdp::env::{kuhn::KuhnPoker, EnvKind, Environment};
use phimdp::history::{Alphabets, History};
use phimdp::mdp::{avi, AviParams, MdpModel, Outcome};
use phimdp::tree::{count_aocts, Aoct};
use rand::Rng;

#[test]
fn tree_counts_match_exhaustive_enumeration() {
    for na in 1..=2 {
        for no in 1..=2 {
            for d in 0..=4 {
                let k = common::enumerate_aocts(d, na, no);
                assert_eq!(count_aocts(d, na, no).to_string(), k.to_string(), "d={d} A={na} O={no}");
            }
        }
    }
    assert_eq!(common::enumerate_aocts(4, 2, 2), 677);
}

#[test]
fn grid_optimum_is_the_inverse_mean_distance() {
    // Mean Manhattan distance to the goal over the 15 restart cells is 48/15.
    let g = common::grid_mdp().optimal_gain();
    assert_relative_eq!(g, 15.0 / 48.0, max_relative = 1e-9);
}

#[test]
fn maze_optimum_is_positive() {
    let g = common::maze_mdp().optimal_gain();
    assert!(g > 1.0 && g < 10.0, "{g}");
}

#[test]
fn tiger_listen_twice_value_matches_simulation() {
    let value = common::tiger_listen_twice_value(0.85);
    assert_relative_eq!(value, 1.0625 / 3.255, max_relative = 1e-12);
    let mut env = EnvKind::Tiger.build(42);
    env.reset();
    let (mut total, mut actions) = (0.0, 0usize);
    let reward = |env: &dyn Environment, r| env.spec().alphabets.reward_value(r);
    for _ in 0..100_000 {
        let mut votes = 0i32;
        for _ in 0..2 {
            let (o, r) = env.step(0);
            total += reward(env.as_ref(), r);
            votes += if o == 0 { 1 } else { -1 };
        }
        actions += 2;
        if votes == 0 {
            let (o, r) = env.step(0);
            total += reward(env.as_ref(), r);
            votes = if o == 0 { 1 } else { -1 };
            actions += 1;
        }
        let door = if votes > 0 { 2 } else { 1 };
        let (_, r) = env.step(door);
        total += reward(env.as_ref(), r);
        actions += 1;
    }
    assert!((total / actions as f64 - value).abs() < 0.03);
}

#[test]
fn kuhn_best_response_is_one_eighteenth_per_hand() {
    assert_relative_eq!(common::kuhn_best_response_per_hand(1.0 / 3.0), 1.0 / 18.0, max_relative = 1e-12);
    // Every Nash parameter gives the same value to the second player.
    assert_relative_eq!(common::kuhn_best_response_per_hand(0.1), 1.0 / 18.0, max_relative = 1e-12);
}

#[test]
fn kuhn_best_response_policy_earns_its_value() {
    // Call with K, fold J, call Q; bet J and K after a check, check Q.
    let mut env = KuhnPoker::new(8);
    let mut obs = env.reset();
    let mut total = 0.0;
    let hands = 200_000;
    for _ in 0..hands {
        let (card, bet) = (obs / 2, obs % 2 == 1);
        let action = match (card, bet) {
            (0, true) => 0,
            (_, true) => 1,
            (1, false) => 0,
            _ => 1,
        };
        let (_, r) = env.step(action);
        total += env.spec().alphabets.reward_value(r);
        obs = env.step(0).0;
    }
    assert!((total / hands as f64 - 1.0 / 18.0).abs() < 0.01);
}

#[test]
fn avi_matches_policy_iteration_on_the_grid() {
    let true_mdp = common::grid_mdp();
    for gamma in [0.9, 0.99] {
        let exact = true_mdp.optimal_q(gamma);
        let mut model = MdpModel::new(15, 4, 1.0);
        for (s, row) in true_mdp.outcomes.iter().enumerate() {
            for (a, outs) in row.iter().enumerate() {
                let mut merged: Vec<Outcome> = Vec::new();
                for &(p, next_state, reward) in outs {
                    merged.push(Outcome { next_state, probability: p, reward });
                }
                model.set_row(s, a, merged);
            }
        }
        let params = AviParams { gamma, tolerance: 1e-12, max_sweeps: 1_000_000, learning_rate: 0.01 };
        let solved = avi(&model, params);
        assert!(solved.converged);
        for s in 0..15 {
            for a in 0..4 {
                assert!((solved.q.get(s, a) - exact[s][a]).abs() < 1e-5, "gamma {gamma} s {s} a {a}");
            }
        }
    }
}

#[test]
fn iid_rewards_keep_the_root_optimal() {
    let alph = Alphabets::new(2, 2, vec![0.0, 1.0]).unwrap();
    let mut rng = common::seeded(3);
    let mut h = History::new(alph, 0).unwrap();
    for _ in 0..3000 {
        h.append_step(rng.random_range(0..2), rng.random_range(0..2), rng.random_range(0..2)).unwrap();
    }
    let p = CostParams::default();
    let root = Aoct::root_only(2, 2);
    let c0 = cost(&root, &h, p);
    let (split, _) = root.markov_split(root.root()).unwrap();
    assert!(c0 < cost(&split, &h, p));
}

#[test]
fn maze_layout_matches_the_true_model() {
    let mdp = common::maze_mdp();
    assert_eq!(mdp.num_states(), 11);
    // Every cell can reach the cheese, so the chain has a single recurrent class.
    let g = mdp.optimal_gain();
    let mut env = EnvKind::CheeseMaze.build(9);
    env.reset();
    let mut rng = common::seeded(4);
    let n = 200_000;
    let total: f64 = (0..n)
        .map(|_| {
            let (_, r) = env.step(rng.random_range(0..4));
            env.spec().alphabets.reward_value(r)
        })
        .sum();
    // The random policy is far from optimal.
    assert!(total / (n as f64) < g);
}
