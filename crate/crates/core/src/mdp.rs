//! Optimistic model estimation and action-value solvers for the MDP induced
//! by a context tree.

use std::io::Write;

use log::warn;

use crate::cost::SufficientStats;
use crate::error::Result;

/// One successor of a visited state-action pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub next_state: usize,
    pub probability: f64,
    pub reward: f64,
}

/// Estimated transition and reward model. A state-action pair without data
/// moves uniformly over all states and pays `r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel {
    pub num_states: usize,
    pub num_actions: usize,
    pub r_max: f64,
    /// Indexed by `state * num_actions + action`; `None` when unvisited.
    pub rows: Vec<Option<Vec<Outcome>>>,
}

impl MdpModel {
    pub fn new(num_states: usize, num_actions: usize, r_max: f64) -> Self {
        Self {
            num_states,
            num_actions,
            r_max,
            rows: vec![None; num_states * num_actions],
        }
    }

    pub fn set_row(&mut self, state: usize, action: usize, outcomes: Vec<Outcome>) {
        self.rows[state * self.num_actions + action] = Some(outcomes);
    }

    pub fn row(&self, state: usize, action: usize) -> Option<&[Outcome]> {
        self.rows[state * self.num_actions + action].as_deref()
    }

    pub fn transition(&self, state: usize, action: usize, next_state: usize) -> f64 {
        match self.row(state, action) {
            None => 1.0 / self.num_states as f64,
            Some(outs) => outs
                .iter()
                .filter(|o| o.next_state == next_state)
                .map(|o| o.probability)
                .sum(),
        }
    }

    pub fn reward(&self, state: usize, action: usize, next_state: usize) -> f64 {
        self.row(state, action)
            .and_then(|outs| outs.iter().find(|o| o.next_state == next_state))
            .map_or(self.r_max, |o| o.reward)
    }
}

/// Frequency estimates with optimistic rewards: each `(s, a, s')` reward is
/// `(r_max + r_1 + ... + r_m) / (m + 1)`.
pub fn estimate_model(stats: &SufficientStats, reward_values: &[f64], r_max: f64) -> MdpModel {
    let mut model = MdpModel::new(stats.num_states, stats.num_actions, r_max);
    for group in stats.state_action_groups() {
        let total: u64 = group.iter().map(|r| r.total()).sum();
        let outcomes = group
            .iter()
            .map(|row| {
                let m = row.total();
                let sum: f64 = row
                    .reward_counts
                    .iter()
                    .zip(reward_values)
                    .map(|(&c, &v)| c as f64 * v)
                    .sum();
                Outcome {
                    next_state: row.next_state,
                    probability: m as f64 / total as f64,
                    reward: (r_max + sum) / (m as f64 + 1.0),
                }
            })
            .collect();
        model.set_row(group[0].state, group[0].action, outcomes);
    }
    model
}

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
    pub gamma: f64,
    pub learning_rate: f64,
}

impl QTable {
    pub fn filled(num_states: usize, num_actions: usize, value: f64, gamma: f64, learning_rate: f64) -> Self {
        Self {
            num_states,
            num_actions,
            values: vec![value; num_states * num_actions],
            gamma,
            learning_rate,
        }
    }

    /// Every entry at the optimistic bound `r_max / (1 − γ)`.
    pub fn optimistic(num_states: usize, num_actions: usize, r_max: f64, gamma: f64, learning_rate: f64) -> Self {
        Self::filled(num_states, num_actions, r_max / (1.0 - gamma), gamma, learning_rate)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.num_actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.num_actions + action] = value;
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.num_actions..(state + 1) * self.num_actions]
    }

    pub fn max_value(&self, state: usize) -> f64 {
        self.row(state).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action; ties go to the lowest index.
    pub fn greedy_action(&self, state: usize) -> usize {
        let row = self.row(state);
        let mut best = 0;
        for (a, &q) in row.iter().enumerate().skip(1) {
            if q > row[best] {
                best = a;
            }
        }
        best
    }

    /// `Q(s,a) += η (r + γ max_a' Q(s',a') − Q(s,a))`.
    pub fn q_learning_step(&mut self, state: usize, action: usize, reward: f64, next_state: usize) {
        let target = reward + self.gamma * self.max_value(next_state);
        let q = self.get(state, action);
        self.set(state, action, q + self.learning_rate * (target - q));
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "state,action,q")?;
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                writeln!(out, "{s},{a},{}", self.get(s, a))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AviResult {
    pub q: QTable,
    pub sweeps: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AviParams {
    pub gamma: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub learning_rate: f64,
}

impl Default for AviParams {
    fn default() -> Self {
        Self {
            gamma: 0.999_999,
            tolerance: 1e-6,
            max_sweeps: 10_000,
            learning_rate: 0.01,
        }
    }
}

const RELAXATION: f64 = 0.5;

/// Synchronous action-value iteration starting from the optimistic bound.
///
/// Each sweep moves every entry halfway to its Bellman backup
/// `Σ_s' T(s,a,s') [R(s,a,s') + γ max_a' Q(s',a')]`. The fixed point is the
/// same as for full backups, and the half step removes the oscillation of
/// periodic chains.
///
/// Stops when the largest change of a sweep falls below the tolerance, or
/// when the spread of the changes does. In the second case every entry is
/// moving by the same amount per sweep, and the remaining geometric tail is
/// added in one step (the midpoint of the MacQueen bounds). Discounts close
/// to one need this: plain iteration takes millions of sweeps to settle the
/// common offset.
pub fn avi(model: &MdpModel, params: AviParams) -> AviResult {
    let AviParams {
        gamma,
        tolerance,
        max_sweeps,
        learning_rate,
    } = params;
    let (ns, na) = (model.num_states, model.num_actions);
    let mut q = QTable::optimistic(ns, na, model.r_max, gamma, learning_rate);
    let mut next = q.values.clone();
    let mut v = vec![0.0; ns];
    for sweep in 1..=max_sweeps {
        for (s, vs) in v.iter_mut().enumerate() {
            *vs = q.max_value(s);
        }
        let mean_v = v.iter().sum::<f64>() / ns as f64;
        for s in 0..ns {
            for a in 0..na {
                let backup: f64 = match model.row(s, a) {
                    None => model.r_max + gamma * mean_v,
                    Some(outs) => outs
                        .iter()
                        .map(|o| o.probability * (o.reward + gamma * v[o.next_state]))
                        .sum(),
                };
                let old = q.values[s * na + a];
                next[s * na + a] = old + RELAXATION * (backup - old);
            }
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (n, old) in next.iter().zip(&q.values) {
            let d = n - old;
            lo = lo.min(d);
            hi = hi.max(d);
        }
        std::mem::swap(&mut q.values, &mut next);
        if lo.abs().max(hi.abs()) < tolerance {
            return AviResult {
                q,
                sweeps: sweep,
                converged: true,
            };
        }
        if hi - lo < tolerance && gamma < 1.0 {
            // A uniform shift c of Q moves by `effective · c` per sweep.
            let effective = 1.0 - RELAXATION * (1.0 - gamma);
            let tail = effective / (1.0 - effective) * 0.5 * (lo + hi);
            for x in &mut q.values {
                *x += tail;
            }
            return AviResult {
                q,
                sweeps: sweep,
                converged: true,
            };
        }
    }
    warn!("action-value iteration stopped after {max_sweeps} sweeps without converging");
    AviResult {
        q,
        sweeps: max_sweeps,
        converged: false,
    }
}
