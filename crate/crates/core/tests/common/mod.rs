//! Oracles written independently of the library code paths they check.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use phimdp::env::maze;
use phimdp::history::{Alphabets, History};
use phimdp::tree::{Aoct, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- cost

/// Cost from its defining formula: counts gathered in hash maps straight
/// from the history, entropies as `-Σ c log2(c / n)`.
pub fn direct_cost(tree: &Aoct, history: &History, alpha: f64, beta: f64) -> f64 {
    let n_states = tree.num_states() as f64;
    let n_rewards = history.alphabets().num_rewards() as f64;
    let mut sa: HashMap<(usize, usize), HashMap<usize, u64>> = HashMap::new();
    let mut sas: HashMap<(usize, usize, usize), HashMap<usize, u64>> = HashMap::new();
    for t in 0..history.len() {
        let (Some(s), Some(s2)) = (tree.map_history(history, t), tree.map_history(history, t + 1)) else {
            continue;
        };
        let a = history.action(t);
        *sa.entry((s, a)).or_default().entry(s2).or_default() += 1;
        *sas.entry((s, a, s2)).or_default().entry(history.reward_index(t + 1)).or_default() += 1;
    }
    let code = |rows: Vec<&HashMap<usize, u64>>, k: f64| -> (f64, f64) {
        let mut data = 0.0;
        let mut param = 0.0;
        for row in rows {
            let n: u64 = row.values().sum();
            let n = n as f64;
            for &c in row.values() {
                let p = c as f64 / n;
                data -= c as f64 * p.log2();
            }
            param += (k - 1.0) / 2.0 * n.log2();
        }
        (data, param)
    };
    let (ds, ps) = code(sa.values().collect(), n_states);
    let (dr, pr) = code(sas.values().collect(), n_rewards);
    alpha * (ds + beta * ps) + (1.0 - alpha) * (dr + beta * pr)
}

pub fn random_history(alphabets: &Alphabets, n: usize, rng: &mut impl Rng) -> History {
    let mut h = History::new(alphabets.clone(), rng.random_range(0..alphabets.num_observations())).unwrap();
    for _ in 0..n {
        h.append_step(
            rng.random_range(0..alphabets.num_actions()),
            rng.random_range(0..alphabets.num_observations()),
            rng.random_range(0..alphabets.num_rewards()),
        )
        .unwrap();
    }
    h
}

/// A random Markov tree grown by Markov splits of uniformly chosen leaves.
pub fn random_markov_tree(num_actions: usize, num_observations: usize, max_states: usize, rng: &mut impl Rng) -> Aoct {
    let mut tree = Aoct::with_max_depth(num_actions, num_observations, 6);
    for _ in 0..rng.random_range(0..8) {
        let leaves: Vec<NodeId> = tree.leaves().filter(|&l| tree.node_depth(l) < 6).collect();
        if leaves.is_empty() {
            break;
        }
        let leaf = leaves[rng.random_range(0..leaves.len())];
        let (next, _) = tree.markov_split(leaf).unwrap();
        if next.num_states() > max_states {
            break;
        }
        tree = next;
    }
    tree
}

// ---------------------------------------------------------------- trees

/// Counts trees of depth at most `depth` by trying every subset of the
/// candidate internal nodes and keeping the parent-closed ones.
pub fn enumerate_aocts(depth: usize, num_actions: usize, num_observations: usize) -> u64 {
    // Candidate internal nodes: every node of the complete tree above `depth`.
    let mut parents: Vec<Option<usize>> = Vec::new();
    let mut frontier = vec![(None, 0usize)];
    while let Some((parent, d)) = frontier.pop() {
        if d >= depth {
            continue;
        }
        let id = parents.len();
        parents.push(parent);
        let arity = if d % 2 == 0 { num_observations } else { num_actions };
        for _ in 0..arity {
            frontier.push((Some(id), d + 1));
        }
    }
    assert!(parents.len() < 32, "enumeration too large");
    let n = parents.len();
    (0u64..(1 << n))
        .filter(|mask| {
            (0..n).all(|i| mask & (1 << i) == 0 || parents[i].is_none_or(|p| mask & (1 << p) != 0))
        })
        .count() as u64
}

/// Internal-node paths of a tree, parents first.
pub fn internal_paths(tree: &Aoct) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    let mut stack = vec![tree.root()];
    while let Some(n) = stack.pop() {
        if !tree.is_leaf(n) {
            out.insert(tree.path(n));
            stack.extend(tree.children(n));
        }
    }
    out
}

pub fn build(tree: &Aoct, paths: &BTreeSet<Vec<usize>>) -> Aoct {
    let mut sorted: Vec<&Vec<usize>> = paths.iter().collect();
    sorted.sort_by_key(|p| p.len());
    let refs: Vec<&[usize]> = sorted.iter().map(|p| p.as_slice()).collect();
    Aoct::from_split_paths(tree.num_actions(), tree.num_observations(), &refs).unwrap()
}

/// Path of the internal node that a Markov violation runs into.
fn violation_targets(t: &Aoct) -> Vec<Vec<usize>> {
    t.markov_violations()
        .into_iter()
        .map(|v| {
            let leaf = v.state;
            let mut p = vec![v.observation, v.action];
            p.extend(t.path(leaf));
            // The run ends at the first internal node with no symbols left.
            while t.node_at(&p).is_err() {
                p.pop();
            }
            p
        })
        .collect()
}

/// Split permit by generic fixed point: split, then keep splitting every
/// leaf whose successor is ambiguous until the tree is Markov.
pub fn split_permit_oracle(tree: &Aoct, node: NodeId) -> bool {
    if !tree.is_leaf(node) || !tree.is_splittable(node) || tree.node_depth(node) >= tree.max_depth() {
        return false;
    }
    let mut paths = internal_paths(tree);
    paths.insert(tree.path(node));
    loop {
        let t = build(tree, &paths);
        let bad: BTreeSet<Vec<usize>> = t
            .markov_violations()
            .into_iter()
            .map(|v| t.path(v.state))
            .collect();
        if bad.is_empty() {
            return true;
        }
        for p in bad {
            match tree.node_at(&p) {
                Ok(n) if tree.is_leaf(n) && tree.is_splittable(n) && p.len() < tree.max_depth() => {
                    paths.insert(p);
                }
                _ => return false,
            }
        }
    }
}

/// Merge permit by generic fixed point: collapse the node, then collapse
/// every internal node some state can no longer resolve.
pub fn merge_permit_oracle(tree: &Aoct, node: NodeId) -> bool {
    if tree.is_leaf(node) || !tree.is_mergeable(node) || tree.children(node).any(|c| !tree.is_leaf(c)) {
        return false;
    }
    let all = internal_paths(tree);
    let mut paths = all.clone();
    let mut removed = BTreeSet::new();
    let collapse = |paths: &mut BTreeSet<Vec<usize>>, removed: &mut BTreeSet<Vec<usize>>, p: &[usize]| {
        let gone: Vec<Vec<usize>> = paths.iter().filter(|q| q.starts_with(p)).cloned().collect();
        for q in gone {
            paths.remove(&q);
            removed.insert(q);
        }
    };
    collapse(&mut paths, &mut removed, &tree.path(node));
    loop {
        let t = build(tree, &paths);
        let targets = violation_targets(&t);
        if targets.is_empty() {
            break;
        }
        for p in targets {
            collapse(&mut paths, &mut removed, &p);
        }
    }
    removed.iter().all(|p| tree.is_mergeable(tree.node_at(p).unwrap()))
}

pub fn oracle_permit_counts(tree: &Aoct) -> (usize, usize) {
    let nodes: Vec<NodeId> = (0..tree.num_nodes()).map(NodeId).collect();
    let splits = nodes.iter().filter(|&&n| split_permit_oracle(tree, n)).count();
    let merges = nodes.iter().filter(|&&n| merge_permit_oracle(tree, n)).count();
    (splits, merges)
}

// ---------------------------------------------------------------- solvers

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// A finite MDP with explicit `(probability, next, reward)` outcomes.
pub struct TrueMdp {
    pub outcomes: Vec<Vec<Vec<(f64, usize, f64)>>>,
}

impl TrueMdp {
    pub fn num_states(&self) -> usize {
        self.outcomes.len()
    }

    pub fn num_actions(&self) -> usize {
        self.outcomes[0].len()
    }

    /// Optimal average reward by relative value iteration on the lazy
    /// chain `P' = (P + I) / 2`, which has the same gain and no periodicity.
    pub fn optimal_gain(&self) -> f64 {
        let n = self.num_states();
        let mut h = vec![0.0; n];
        let mut gain = 0.0;
        for _ in 0..200_000 {
            let next: Vec<f64> = (0..n)
                .map(|s| {
                    self.outcomes[s]
                        .iter()
                        .map(|outs| {
                            outs.iter().map(|&(p, s2, r)| p * (r + 0.5 * h[s2])).sum::<f64>() + 0.5 * h[s]
                        })
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            let g = next[0];
            let diff = next.iter().zip(&h).map(|(a, b)| (a - g - b).abs()).fold(0.0, f64::max);
            h = next.iter().map(|v| v - g).collect();
            gain = g;
            if diff < 1e-13 {
                break;
            }
        }
        gain
    }

    /// Discounted optimal Q by policy iteration with exact linear solves.
    pub fn optimal_q(&self, gamma: f64) -> Vec<Vec<f64>> {
        let (n, na) = (self.num_states(), self.num_actions());
        let mut policy = vec![0usize; n];
        loop {
            let mut a = vec![vec![0.0; n]; n];
            let mut b = vec![0.0; n];
            for s in 0..n {
                a[s][s] += 1.0;
                for &(p, s2, r) in &self.outcomes[s][policy[s]] {
                    a[s][s2] -= gamma * p;
                    b[s] += p * r;
                }
            }
            let v = solve_linear(a, b);
            let q: Vec<Vec<f64>> = (0..n)
                .map(|s| {
                    (0..na)
                        .map(|act| self.outcomes[s][act].iter().map(|&(p, s2, r)| p * (r + gamma * v[s2])).sum())
                        .collect()
                })
                .collect();
            let mut stable = true;
            for s in 0..n {
                let best = (0..na).max_by(|&x, &y| q[s][x].total_cmp(&q[s][y])).unwrap();
                if q[s][best] > q[s][policy[s]] + 1e-12 {
                    policy[s] = best;
                    stable = false;
                }
            }
            if stable {
                return q;
            }
        }
    }
}

/// The fully observed 4×4 grid: 15 non-goal cells, entering the goal pays 1
/// and restarts uniformly on one of them.
pub fn grid_mdp() -> TrueMdp {
    let goal = 15;
    let outcomes = (0..15)
        .map(|cell: usize| {
            (0..4)
                .map(|a| {
                    let (x, y) = (cell % 4, cell / 4);
                    let (nx, ny) = match a {
                        0 => (x.saturating_sub(1), y),
                        1 => ((x + 1).min(3), y),
                        2 => (x, y.saturating_sub(1)),
                        _ => (x, (y + 1).min(3)),
                    };
                    let next = ny * 4 + nx;
                    if next == goal {
                        (0..15).map(|c| (1.0 / 15.0, c, 1.0)).collect()
                    } else {
                        vec![(1.0, next, 0.0)]
                    }
                })
                .collect()
        })
        .collect();
    TrueMdp { outcomes }
}

/// The fully observed cheese maze over its 11 open cells.
pub fn maze_mdp() -> TrueMdp {
    let cells = maze::open_cells();
    let index = |c: (usize, usize)| cells.iter().position(|&x| x == c).unwrap();
    let k = cells.len() as f64;
    let outcomes = cells
        .iter()
        .map(|&c| {
            (0..4)
                .map(|a| {
                    let (x, y) = c;
                    let target = match a {
                        0 => x.checked_sub(1).map(|nx| (nx, y)),
                        1 => Some((x + 1, y)),
                        2 => y.checked_sub(1).map(|ny| (x, ny)),
                        _ => Some((x, y + 1)),
                    };
                    match target.filter(|&(tx, ty)| cells.contains(&(tx, ty))) {
                        None => vec![(1.0, index(c), -10.0)],
                        Some(t) if t == maze::CHEESE => (0..cells.len()).map(|i| (1.0 / k, i, 10.0)).collect(),
                        Some(t) => vec![(1.0, index(t), -1.0)],
                    }
                })
                .collect()
        })
        .collect();
    TrueMdp { outcomes }
}

// ---------------------------------------------------------------- tiger

/// Listen twice; open the door opposite to the agreeing reports, or after a
/// split vote listen once more and follow the majority. Returns reward per
/// action.
pub fn tiger_listen_twice_value(accuracy: f64) -> f64 {
    let p = accuracy;
    let q = 1.0 - p;
    let agree = p * p + q * q;
    let open_after_agree = (p * p * 10.0 + q * q * -100.0) / agree;
    let open_after_third = p * 10.0 + q * -100.0;
    let reward = -2.0 + agree * open_after_agree + (1.0 - agree) * (-1.0 + open_after_third);
    let actions = 3.0 + (1.0 - agree);
    reward / actions
}

// ---------------------------------------------------------------- kuhn

/// Best-response value in chips per hand against the Nash opponent, by
/// enumerating the six deals and both information sets per card.
pub fn kuhn_best_response_per_hand(nash_alpha: f64) -> f64 {
    let bet = |c: usize| [nash_alpha, 0.0, (3.0 * nash_alpha).min(1.0)][c];
    let call = |c: usize| [0.0, nash_alpha + 1.0 / 3.0, 1.0][c];
    let show = |me: usize, them: usize, stake: f64| if me > them { stake } else { -stake };
    let mut total = 0.0;
    for me in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&c| c != me).collect();
        // Facing a bet: call or fold.
        let (mut call_v, mut fold_v) = (0.0, 0.0);
        // Facing a check: bet or check.
        let (mut bet_v, mut check_v) = (0.0, 0.0);
        for &them in &others {
            let w = 1.0 / 6.0;
            let pb = bet(them);
            call_v += w * pb * show(me, them, 2.0);
            fold_v += w * pb * -1.0;
            let pc = 1.0 - pb;
            bet_v += w * pc * (call(them) * show(me, them, 2.0) + (1.0 - call(them)) * 1.0);
            check_v += w * pc * show(me, them, 1.0);
        }
        total += call_v.max(fold_v) + bet_v.max(check_v);
    }
    total
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
