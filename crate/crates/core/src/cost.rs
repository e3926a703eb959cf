//! Sufficient statistics and the two-part code length cost of a tree.
//!
//! All code lengths are in bits. A row with zero total count contributes
//! nothing.

use std::io::Write;

use crate::error::Result;
use crate::history::History;
use crate::tree::Aoct;

/// Counts for one `(s, a, s')` triple, split by reward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionRow {
    pub state: usize,
    pub action: usize,
    pub next_state: usize,
    pub reward_counts: Vec<u64>,
}

impl TransitionRow {
    pub fn total(&self) -> u64 {
        self.reward_counts.iter().sum()
    }
}

/// Transition and reward counts of a history under a tree. Rows are sorted by
/// `(state, action, next_state)` and only non-empty rows are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub num_states: usize,
    pub num_actions: usize,
    pub num_rewards: usize,
    pub rows: Vec<TransitionRow>,
    /// Time steps mapped to each state, boundary excluded.
    pub occupancy: Vec<u64>,
}

impl SufficientStats {
    pub fn empty(num_states: usize, num_actions: usize, num_rewards: usize) -> Self {
        Self {
            num_states,
            num_actions,
            num_rewards,
            rows: Vec::new(),
            occupancy: vec![0; num_states],
        }
    }

    /// Builds statistics directly from `(s, a, s', r)` tuples.
    pub fn from_transitions(
        num_states: usize,
        num_actions: usize,
        num_rewards: usize,
        transitions: &[(usize, usize, usize, usize)],
    ) -> Self {
        let mut keys = transitions.to_vec();
        keys.sort_unstable();
        let mut stats = Self::empty(num_states, num_actions, num_rewards);
        for (s, a, s2, r) in keys {
            assert!(s < num_states && s2 < num_states && a < num_actions && r < num_rewards);
            match stats.rows.last_mut() {
                Some(row) if (row.state, row.action, row.next_state) == (s, a, s2) => {
                    row.reward_counts[r] += 1;
                }
                _ => {
                    let mut reward_counts = vec![0; num_rewards];
                    reward_counts[r] = 1;
                    stats.rows.push(TransitionRow {
                        state: s,
                        action: a,
                        next_state: s2,
                        reward_counts,
                    });
                }
            }
        }
        stats
    }

    /// Number of counted transitions.
    pub fn total(&self) -> u64 {
        self.rows.iter().map(TransitionRow::total).sum()
    }

    pub fn trans_count(&self, state: usize, action: usize, next_state: usize) -> u64 {
        self.row(state, action, next_state).map_or(0, TransitionRow::total)
    }

    pub fn reward_count(&self, state: usize, action: usize, next_state: usize, reward: usize) -> u64 {
        self.row(state, action, next_state)
            .map_or(0, |row| row.reward_counts[reward])
    }

    fn row(&self, state: usize, action: usize, next_state: usize) -> Option<&TransitionRow> {
        self.rows
            .binary_search_by_key(&(state, action, next_state), |r| (r.state, r.action, r.next_state))
            .ok()
            .map(|i| &self.rows[i])
    }

    /// Rows grouped by `(state, action)`, in order.
    pub fn state_action_groups(&self) -> impl Iterator<Item = &[TransitionRow]> {
        self.rows
            .chunk_by(|x, y| (x.state, x.action) == (y.state, y.action))
    }
}

/// Counts the transitions of `history` under `tree`. Transitions that start
/// or end in the boundary state are dropped.
pub fn collect_stats(tree: &Aoct, history: &History) -> SufficientStats {
    let states: Vec<Option<usize>> = (0..=history.len())
        .map(|t| tree.map_history(history, t))
        .collect();
    let mut keys = Vec::with_capacity(history.len());
    for (t, pair) in states.windows(2).enumerate() {
        if let (Some(s), Some(s2)) = (pair[0], pair[1]) {
            keys.push((s, history.action(t), s2, history.reward_index(t + 1)));
        }
    }
    let mut stats = SufficientStats::from_transitions(
        tree.num_states(),
        history.alphabets().num_actions(),
        history.alphabets().num_rewards(),
        &keys,
    );
    for s in states.into_iter().flatten() {
        stats.occupancy[s] += 1;
    }
    stats
}

/// `n * H(counts / n)` in bits, with `n = sum(counts)`.
fn scaled_entropy<I: IntoIterator<Item = u64> + Clone>(counts: I) -> f64 {
    let n: u64 = counts.clone().into_iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let sum: f64 = counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let c = c as f64;
            c * c.log2()
        })
        .sum();
    (n * n.log2() - sum).max(0.0)
}

/// The four additive parts of the two-part code.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CodeLengths {
    pub state_data: f64,
    pub state_param: f64,
    pub reward_data: f64,
    pub reward_param: f64,
}

impl CodeLengths {
    pub fn state_total(&self) -> f64 {
        self.state_data + self.state_param
    }

    pub fn reward_total(&self) -> f64 {
        self.reward_data + self.reward_param
    }

    /// `α (data_s + β param_s) + (1 − α) (data_r + β param_r)`.
    pub fn weighted(&self, params: CostParams) -> f64 {
        let CostParams { alpha, beta } = params;
        alpha * (self.state_data + beta * self.state_param)
            + (1.0 - alpha) * (self.reward_data + beta * self.reward_param)
    }
}

pub fn code_lengths(stats: &SufficientStats) -> CodeLengths {
    let state_k = (stats.num_states as f64 - 1.0) / 2.0;
    let reward_k = (stats.num_rewards as f64 - 1.0) / 2.0;
    let mut out = CodeLengths::default();
    for group in stats.state_action_groups() {
        let n: u64 = group.iter().map(TransitionRow::total).sum();
        out.state_data += scaled_entropy(group.iter().map(TransitionRow::total));
        out.state_param += state_k * (n as f64).log2();
    }
    for row in &stats.rows {
        out.reward_data += scaled_entropy(row.reward_counts.iter().copied());
        out.reward_param += reward_k * (row.total() as f64).log2();
    }
    out
}

/// Code length of the state sequence given the actions.
pub fn state_code_length(stats: &SufficientStats) -> f64 {
    code_lengths(stats).state_total()
}

/// Code length of the reward sequence given states and actions.
pub fn reward_code_length(stats: &SufficientStats) -> f64 {
    code_lengths(stats).reward_total()
}

/// Weights of the cost: `alpha` trades state against reward coding, `beta`
/// scales the parameter part of both codes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.1,
        }
    }
}

pub fn cost_of_stats(stats: &SufficientStats, params: CostParams) -> f64 {
    code_lengths(stats).weighted(params)
}

pub fn cost(tree: &Aoct, history: &History, params: CostParams) -> f64 {
    cost_of_stats(&collect_stats(tree, history), params)
}

/// Writes the per-row contributions as
/// `kind,state,action,next_state,count,data_bits,param_bits`; `next_state`
/// is empty for state-code rows.
pub fn write_cost_rows<W: Write>(stats: &SufficientStats, mut out: W) -> Result<()> {
    writeln!(out, "kind,state,action,next_state,count,data_bits,param_bits")?;
    let state_k = (stats.num_states as f64 - 1.0) / 2.0;
    let reward_k = (stats.num_rewards as f64 - 1.0) / 2.0;
    for group in stats.state_action_groups() {
        let n: u64 = group.iter().map(TransitionRow::total).sum();
        writeln!(
            out,
            "state,{},{},,{},{},{}",
            group[0].state,
            group[0].action,
            n,
            scaled_entropy(group.iter().map(TransitionRow::total)),
            state_k * (n as f64).log2()
        )?;
    }
    for row in &stats.rows {
        writeln!(
            out,
            "reward,{},{},{},{},{},{}",
            row.state,
            row.action,
            row.next_state,
            row.total(),
            scaled_entropy(row.reward_counts.iter().copied()),
            reward_k * (row.total() as f64).log2()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::Alphabets;
    use approx::assert_relative_eq;

    fn row_stats(counts: &[(usize, u64)], num_states: usize) -> SufficientStats {
        let mut t = Vec::new();
        for &(s2, c) in counts {
            for _ in 0..c {
                t.push((0, 0, s2, 0));
            }
        }
        SufficientStats::from_transitions(num_states, 1, 1, &t)
    }

    #[test]
    fn state_code_length_examples() {
        assert_relative_eq!(state_code_length(&row_stats(&[(0, 4)], 2)), 1.0);
        assert_relative_eq!(state_code_length(&row_stats(&[(0, 2), (1, 2)], 2)), 5.0);
        assert_eq!(state_code_length(&SufficientStats::empty(3, 2, 2)), 0.0);
    }

    #[test]
    fn reward_code_length_examples() {
        let same: Vec<_> = (0..8).map(|_| (0, 0, 0, 1)).collect();
        let stats = SufficientStats::from_transitions(1, 1, 2, &same);
        assert_relative_eq!(reward_code_length(&stats), 1.5);
        let split = SufficientStats::from_transitions(1, 1, 2, &[(0, 0, 0, 0), (0, 0, 0, 1)]);
        assert_relative_eq!(reward_code_length(&split), 2.5);
        assert_eq!(reward_code_length(&SufficientStats::empty(1, 1, 2)), 0.0);
    }

    fn toy_history() -> History {
        let a = Alphabets::new(2, 2, vec![0.0, 1.0]).unwrap();
        let mut h = History::new(a, 0).unwrap();
        for t in 0..10 {
            let o = (t + 1) % 2;
            h.append_step(t % 2, o, o).unwrap();
        }
        h
    }

    #[test]
    fn root_tree_counts_every_step() {
        let h = toy_history();
        let stats = collect_stats(&Aoct::root_only(2, 2), &h);
        assert_eq!(stats.total(), 10);
        assert_eq!(stats.occupancy, vec![11]);
    }

    #[test]
    fn two_state_hand_tally() {
        // Observations alternate 0,1,0,1,...; actions alternate 0,1,0,1.
        let h = toy_history();
        let tree = Aoct::from_split_paths(2, 2, &[&[]]).unwrap();
        let stats = collect_stats(&tree, &h);
        // From state "o=0" the agent always plays 0 and lands in "o=1" with
        // reward 1; from "o=1" it plays 1 and lands in "o=0" with reward 0.
        assert_eq!(stats.trans_count(0, 0, 1), 5);
        assert_eq!(stats.reward_count(0, 0, 1, 1), 5);
        assert_eq!(stats.trans_count(1, 1, 0), 5);
        assert_eq!(stats.reward_count(1, 1, 0, 0), 5);
        assert_eq!(stats.total(), 10);
        assert_eq!(stats.rows.len(), 2);
        // Deterministic rows: only parameter terms remain.
        let cl = code_lengths(&stats);
        assert_eq!(cl.state_data, 0.0);
        assert_eq!(cl.reward_data, 0.0);
        assert_relative_eq!(cl.state_param, 0.5 * 5f64.log2() * 2.0);
    }

    #[test]
    fn all_boundary_history_has_empty_stats() {
        let a = Alphabets::new(2, 2, vec![0.0, 1.0]).unwrap();
        let h = History::new(a, 0).unwrap();
        let tree = Aoct::from_split_paths(2, 2, &[&[], &[0], &[1]]).unwrap();
        let stats = collect_stats(&tree, &h);
        assert_eq!(stats.total(), 0);
        assert_eq!(cost_of_stats(&stats, CostParams::default()), 0.0);
    }

    #[test]
    fn weighting_boundaries() {
        let h = toy_history();
        let tree = Aoct::root_only(2, 2);
        let stats = collect_stats(&tree, &h);
        let cl = code_lengths(&stats);
        let half = cost_of_stats(&stats, CostParams { alpha: 0.5, beta: 1.0 });
        assert_relative_eq!(half, 0.5 * (state_code_length(&stats) + reward_code_length(&stats)));
        let zero = cost_of_stats(&stats, CostParams { alpha: 0.0, beta: 0.3 });
        assert_relative_eq!(zero, cl.reward_data + 0.3 * cl.reward_param);
    }

    #[test]
    fn cost_row_dump_has_one_line_per_row() {
        let h = toy_history();
        let tree = Aoct::from_split_paths(2, 2, &[&[]]).unwrap();
        let stats = collect_stats(&tree, &h);
        let mut out = Vec::new();
        write_cost_rows(&stats, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 + 2);
    }
}
