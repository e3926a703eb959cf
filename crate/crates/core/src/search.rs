//! Parallel tempering over Markov context trees.
//!
//! Each replica runs Metropolis-Hastings with split/merge proposals at a
//! fixed temperature. After every sweep, cost-reducing splits are copied into
//! the other replicas, and with probability `1 - swap_parameter` one adjacent
//! pair of replicas tries to exchange trees.
//!
//! The target density is `π_T(x) ∝ 2^(-cost(x) / T)`, matching the base of
//! the cost, so the default ladder `T_i = β · i · log2(n)` keeps its scale.

use std::io::Write;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::{code_lengths, collect_stats, CostParams};
use crate::error::{Error, Result};
use crate::history::History;
use crate::tree::{Aoct, NodeId, DEFAULT_MAX_DEPTH};

/// How replica sweeps and other batch work are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs
    /// sequentially. Results are identical either way.
    #[default]
    Parallel,
}

impl Execution {
    pub(crate) fn map<T, U, F>(self, items: &mut [T], f: F) -> Vec<U>
    where
        T: Send,
        U: Send,
        F: Fn(&mut T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter_mut().map(f).collect()
            }
            _ => items.iter_mut().map(f).collect(),
        }
    }

    pub(crate) fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtConfig {
    pub num_replicas: usize,
    pub iterations: usize,
    /// Probability of skipping the swap step after a sweep.
    pub swap_parameter: f64,
    /// Explicit ladder; when `None` the ladder is `β · i · log2(n)`.
    pub temperatures: Option<Vec<f64>>,
    pub cost: CostParams,
    pub seed: u64,
    pub max_depth: usize,
    pub sharing: bool,
    pub execution: Execution,
}

impl Default for PtConfig {
    fn default() -> Self {
        Self {
            num_replicas: 10,
            iterations: 100,
            swap_parameter: 0.7,
            temperatures: None,
            cost: CostParams::default(),
            seed: 0,
            max_depth: DEFAULT_MAX_DEPTH,
            sharing: true,
            execution: Execution::default(),
        }
    }
}

impl PtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_replicas == 0 {
            return Err(Error::Config("need at least one replica".into()));
        }
        if !(0.0..=1.0).contains(&self.swap_parameter) {
            return Err(Error::Config("swap parameter must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.cost.alpha) || !(self.cost.beta > 0.0) {
            return Err(Error::Config("need 0 <= alpha <= 1 and beta > 0".into()));
        }
        if let Some(t) = &self.temperatures {
            if t.len() != self.num_replicas {
                return Err(Error::Config("one temperature per replica".into()));
            }
            if t[0] <= 0.0 || t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config("temperatures must be positive and increasing".into()));
            }
        }
        Ok(())
    }

    pub fn ladder(&self, history_len: usize) -> Vec<f64> {
        self.temperatures
            .clone()
            .unwrap_or_else(|| temperature_ladder(self.cost.beta, self.num_replicas, history_len))
    }
}

/// `T_i = β · i · log2(n)` for `i = 1..=count`.
pub fn temperature_ladder(beta: f64, count: usize, history_len: usize) -> Vec<f64> {
    let log_n = (history_len.max(2) as f64).log2();
    (1..=count).map(|i| beta * i as f64 * log_n).collect()
}

/// Swap acceptance rate implied by each adjacent pair of the ladder for a
/// typical cost difference `delta_cost`: `2^(-(1/T_i - 1/T_{i+1}) |ΔH|)`.
pub fn implied_swap_acceptance(temperatures: &[f64], delta_cost: f64) -> Vec<f64> {
    temperatures
        .windows(2)
        .map(|w| (-(1.0 / w[0] - 1.0 / w[1]) * delta_cost.abs()).exp2())
        .collect()
}

/// Metropolis-Hastings acceptance with a correction factor.
pub fn acceptance_probability(cost_old: f64, cost_new: f64, temperature: f64, correction: f64) -> f64 {
    if correction <= 0.0 {
        return 0.0;
    }
    let ratio = ((cost_old - cost_new) / temperature).exp2() * correction;
    if ratio.is_nan() {
        0.0
    } else {
        ratio.min(1.0)
    }
}

/// Acceptance of exchanging the configurations held at temperatures
/// `t_a < t_b`.
pub fn swap_probability(t_a: f64, t_b: f64, cost_a: f64, cost_b: f64) -> f64 {
    ((1.0 / t_a - 1.0 / t_b) * (cost_a - cost_b)).exp2().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Split,
    Merge,
}

impl MoveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::Split => "split",
            MoveKind::Merge => "merge",
        }
    }
}

/// A candidate tree, already evaluated against the history.
#[derive(Debug, Clone)]
pub struct Proposal {
    pub tree: Aoct,
    pub cost: f64,
    pub kind: MoveKind,
    /// Root-to-node path of the chosen node.
    pub path: Vec<usize>,
    /// Nodes of the candidate that the move split (empty for merges).
    pub split_nodes: Vec<NodeId>,
    /// `q(y | ỹ) / q(ỹ | y)`: `|Ñ_M| / |N_S|` for a split and `|Ñ_S| / |N_M|`
    /// for a merge, where tilde sets belong to the candidate.
    pub correction: f64,
}

/// Raised when a tree has neither split nor merge permits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exhausted;

/// Evaluates a tree against the history: refreshes its splittable labels
/// and returns its cost.
pub fn evaluate(tree: &mut Aoct, history: &History, params: CostParams) -> f64 {
    let stats = collect_stats(tree, history);
    tree.refresh_splittable(&stats.occupancy);
    code_lengths(&stats).weighted(params)
}

/// Draws a candidate from the split/merge proposal. The tree's splittable
/// labels must be current for `history`.
pub fn propose<R: Rng + ?Sized>(
    tree: &Aoct,
    history: &History,
    params: CostParams,
    rng: &mut R,
) -> std::result::Result<Proposal, Exhausted> {
    let split_set = tree.split_permits();
    let merge_set = tree.merge_permits();
    let kind = match (split_set.is_empty(), merge_set.is_empty()) {
        (true, true) => return Err(Exhausted),
        (false, true) => MoveKind::Split,
        (true, false) => MoveKind::Merge,
        (false, false) => {
            if rng.random_bool(0.5) {
                MoveKind::Split
            } else {
                MoveKind::Merge
            }
        }
    };
    let (mut candidate, node, split_nodes) = match kind {
        MoveKind::Split => {
            let node = split_set[rng.random_range(0..split_set.len())];
            let (t, split) = tree.markov_split(node).expect("node holds a split permit");
            (t, node, split)
        }
        MoveKind::Merge => {
            let node = merge_set[rng.random_range(0..merge_set.len())];
            let t = tree.markov_merge(node).expect("node holds a merge permit");
            (t, node, Vec::new())
        }
    };
    let cost = evaluate(&mut candidate, history, params);
    let correction = match kind {
        MoveKind::Split => candidate.merge_permits().len() as f64 / split_set.len() as f64,
        MoveKind::Merge => candidate.split_permits().len() as f64 / merge_set.len() as f64,
    };
    Ok(Proposal {
        tree: candidate,
        cost,
        kind,
        path: tree.path(node),
        split_nodes,
        correction,
    })
}

/// One tempered chain.
#[derive(Debug, Clone)]
pub struct Replica {
    pub tree: Aoct,
    pub cost: f64,
    pub temperature: f64,
    rng: ChaCha8Rng,
}

/// What happened in one Metropolis-Hastings step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub kind: Option<MoveKind>,
    pub accepted: bool,
    /// Path of a split that was accepted and strictly lowered the cost.
    pub improving_split: Option<Vec<usize>>,
}

impl StepOutcome {
    fn exhausted() -> Self {
        Self {
            kind: None,
            accepted: false,
            improving_split: None,
        }
    }

    pub fn is_exhausted(&self) -> bool {
        self.kind.is_none()
    }
}

impl Replica {
    pub fn new(mut tree: Aoct, history: &History, params: CostParams, temperature: f64, rng: ChaCha8Rng) -> Self {
        let cost = evaluate(&mut tree, history, params);
        Self {
            tree,
            cost,
            temperature,
            rng,
        }
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Proposes, accepts or rejects. After an accepted split that strictly
    /// lowered the cost, the split nodes become unmergeable.
    pub fn mh_step(&mut self, history: &History, params: CostParams) -> StepOutcome {
        let proposal = match propose(&self.tree, history, params, &mut self.rng) {
            Ok(p) => p,
            Err(Exhausted) => return StepOutcome::exhausted(),
        };
        let p = acceptance_probability(self.cost, proposal.cost, self.temperature, proposal.correction);
        let u: f64 = self.rng.random();
        let mut outcome = StepOutcome {
            kind: Some(proposal.kind),
            accepted: u < p,
            improving_split: None,
        };
        if outcome.accepted {
            let improved = proposal.cost < self.cost;
            self.tree = proposal.tree;
            self.cost = proposal.cost;
            if proposal.kind == MoveKind::Split && improved {
                for n in &proposal.split_nodes {
                    self.tree.set_mergeable(*n, false);
                }
                outcome.improving_split = Some(proposal.path);
            }
        }
        outcome
    }
}

/// Copies the split at `path` into `tree`, splitting whatever lies on the
/// way. Returns `None` when the path is already present or blocked by a
/// missing permit. Nodes split here become unmergeable.
pub fn share_path(tree: &Aoct, path: &[usize], history: &History) -> Option<Aoct> {
    let mut t = tree.clone();
    let mut split_paths: Vec<Vec<usize>> = Vec::new();
    loop {
        let (node, last) = match t.node_at(path) {
            Ok(n) if !t.is_leaf(n) => break,
            Ok(n) => (n, true),
            Err(leaf) => (leaf, false),
        };
        if !t.has_split_permit(node) {
            return None;
        }
        let (next, split) = t.markov_split(node).ok()?;
        split_paths.extend(split.iter().map(|&n| next.path(n)));
        t = next;
        t.relabel(history);
        if last {
            break;
        }
    }
    if split_paths.is_empty() {
        return None;
    }
    for p in &split_paths {
        if let Ok(n) = t.node_at(p) {
            t.set_mergeable(n, false);
        }
    }
    Some(t)
}

/// Replicates an improving split from replica `source` into all others.
/// Returns the indices of replicas that changed.
pub fn share_split(
    replicas: &mut [Replica],
    source: usize,
    path: &[usize],
    history: &History,
    params: CostParams,
) -> Vec<usize> {
    let mut changed = Vec::new();
    for (j, replica) in replicas.iter_mut().enumerate() {
        if j == source {
            continue;
        }
        if let Some(mut t) = share_path(&replica.tree, path, history) {
            replica.cost = evaluate(&mut t, history, params);
            replica.tree = t;
            changed.push(j);
        }
    }
    changed
}

/// Result of one swap attempt: the lower index of the chosen pair and
/// whether the exchange happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapOutcome {
    pub pair: usize,
    pub accepted: bool,
}

/// Picks a uniform adjacent pair and exchanges their trees with the
/// tempering acceptance rule. Temperatures stay in place.
pub fn swap_step<R: Rng + ?Sized>(replicas: &mut [Replica], rng: &mut R) -> Option<SwapOutcome> {
    if replicas.len() < 2 {
        return None;
    }
    let a = rng.random_range(0..replicas.len() - 1);
    let (lo, hi) = replicas.split_at_mut(a + 1);
    let (x, y) = (&mut lo[a], &mut hi[0]);
    let p = swap_probability(x.temperature, y.temperature, x.cost, y.cost);
    let v: f64 = rng.random();
    let accepted = v < p;
    if accepted {
        std::mem::swap(&mut x.tree, &mut y.tree);
        std::mem::swap(&mut x.cost, &mut y.cost);
    }
    Some(SwapOutcome { pair: a, accepted })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub replica: usize,
    pub temperature: f64,
    pub cost: f64,
    pub accepted: bool,
    pub kind: Option<MoveKind>,
    pub num_states: usize,
}

pub fn write_trace<W: Write>(rows: &[TraceRow], mut out: W) -> Result<()> {
    writeln!(out, "iter,replica,temp,cost,accepted,move_type,num_states")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iteration,
            r.replica,
            r.temperature,
            r.cost,
            u8::from(r.accepted),
            r.kind.map_or("none", MoveKind::as_str),
            r.num_states
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best_tree: Aoct,
    pub best_cost: f64,
    /// Best cost after each completed iteration.
    pub best_cost_history: Vec<f64>,
    pub iterations_run: usize,
    pub exhausted: bool,
    pub swaps_attempted: usize,
    pub swaps_accepted: usize,
    pub trace: Vec<TraceRow>,
    pub replicas: Vec<Replica>,
}

pub(crate) fn replica_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs parallel tempering from root-only trees and returns the cheapest
/// tree seen.
pub fn parallel_tempering(history: &History, config: &PtConfig) -> Result<SearchResult> {
    config.validate()?;
    let alphabets = history.alphabets();
    let temperatures = config.ladder(history.len());
    let mut root = Aoct::root_only(alphabets.num_actions(), alphabets.num_observations());
    root.set_max_depth(config.max_depth);
    let mut replicas: Vec<Replica> = temperatures
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            Replica::new(root.clone(), history, config.cost, t, replica_rng(config.seed, k as u64 + 1))
        })
        .collect();
    let mut master = replica_rng(config.seed, 0);

    let mut best_tree = replicas[0].tree.clone();
    let mut best_cost = replicas[0].cost;
    let track = |replicas: &[Replica], best_tree: &mut Aoct, best_cost: &mut f64| {
        for r in replicas {
            if r.cost < *best_cost {
                *best_cost = r.cost;
                *best_tree = r.tree.clone();
            }
        }
    };

    let mut result_trace = Vec::new();
    let mut best_cost_history = Vec::with_capacity(config.iterations);
    let mut exhausted = false;
    let mut iterations_run = 0;
    let (mut swaps_attempted, mut swaps_accepted) = (0, 0);
    let params = config.cost;

    for iteration in 1..=config.iterations {
        let outcomes = config
            .execution
            .map(&mut replicas, |r| r.mh_step(history, params));
        iterations_run = iteration;
        for (k, (r, o)) in replicas.iter().zip(&outcomes).enumerate() {
            result_trace.push(TraceRow {
                iteration,
                replica: k,
                temperature: r.temperature,
                cost: r.cost,
                accepted: o.accepted,
                kind: o.kind,
                num_states: r.tree.num_states(),
            });
        }
        if outcomes.iter().all(StepOutcome::is_exhausted) {
            exhausted = true;
            best_cost_history.push(best_cost);
            debug!("search exhausted after {iteration} iterations");
            break;
        }
        track(&replicas, &mut best_tree, &mut best_cost);

        if config.sharing {
            for (k, o) in outcomes.iter().enumerate() {
                if let Some(path) = &o.improving_split {
                    share_split(&mut replicas, k, path, history, params);
                }
            }
            track(&replicas, &mut best_tree, &mut best_cost);
        }

        let u: f64 = master.random();
        if u >= config.swap_parameter {
            if let Some(s) = swap_step(&mut replicas, &mut master) {
                swaps_attempted += 1;
                swaps_accepted += usize::from(s.accepted);
            }
        }
        best_cost_history.push(best_cost);
    }

    Ok(SearchResult {
        best_tree,
        best_cost,
        best_cost_history,
        iterations_run,
        exhausted,
        swaps_attempted,
        swaps_accepted,
        trace: result_trace,
        replicas,
    })
}
