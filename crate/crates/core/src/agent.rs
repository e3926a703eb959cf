//! The end-to-end agent: random exploration, tree search, optimistic model
//! estimation, value iteration, then greedy Q-learning, with frozen policy
//! evaluations at fixed amounts of experience.

use std::io::Write;

use log::{info, warn};
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use crate::cost::{collect_stats, cost, CostParams};
use crate::env::{EnvKind, Environment};
use crate::error::{Error, Result};
use crate::history::History;
use crate::mdp::{avi, estimate_model, AviParams, QTable};
use crate::search::{parallel_tempering, replica_rng, Execution, PtConfig, TraceRow};
use crate::tree::Aoct;

pub const DEFAULT_CHECKPOINTS: [usize; 6] = [5_000, 10_000, 20_000, 30_000, 40_000, 50_000];

// Random stream offsets, kept far apart from the replica streams.
const STREAM_ENV: u64 = 1 << 40;
const STREAM_AGENT: u64 = 1 << 41;
const STREAM_SEARCH: u64 = 1 << 42;
const STREAM_EVAL_ENV: u64 = 1 << 43;
const STREAM_EVAL_POLICY: u64 = 1 << 44;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub initial_samples: usize,
    pub learning_loops: usize,
    pub additional_samples: usize,
    /// Search settings; `pt.iterations` is the number of stochastic
    /// iterations and `pt.cost` holds α and β. Its seed is overridden per
    /// loop from `seed`.
    pub pt: PtConfig,
    pub gamma: f64,
    pub eta: f64,
    pub avi_tolerance: f64,
    pub avi_max_sweeps: usize,
    pub seed: u64,
    /// Amounts of experience at which the policy is evaluated. The run
    /// continues with Q-learning until the largest one.
    pub checkpoints: Vec<usize>,
    pub eval_runs: usize,
    pub eval_actions: usize,
    /// Schedule for the evaluation runs.
    pub execution: Execution,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            initial_samples: 5_000,
            learning_loops: 1,
            additional_samples: 5_000,
            pt: PtConfig::default(),
            gamma: 0.999_999,
            eta: 0.01,
            avi_tolerance: 1e-6,
            avi_max_sweeps: 10_000,
            seed: 0,
            checkpoints: DEFAULT_CHECKPOINTS.to_vec(),
            eval_runs: 10,
            eval_actions: 5_000,
            execution: Execution::default(),
        }
    }
}

impl AgentConfig {
    pub fn cost_params(&self) -> CostParams {
        self.pt.cost
    }

    pub fn avi_params(&self) -> AviParams {
        AviParams {
            gamma: self.gamma,
            tolerance: self.avi_tolerance,
            max_sweeps: self.avi_max_sweeps,
            learning_rate: self.eta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pt.validate()?;
        if self.initial_samples == 0 {
            return Err(Error::Config("initial sample number must be positive".into()));
        }
        if self.learning_loops > 0 && self.additional_samples == 0 {
            return Err(Error::Config("additional sample number must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config("gamma must lie in [0, 1)".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Config("eta must lie in (0, 1)".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("checkpoints must be strictly increasing".into()));
        }
        if !self.checkpoints.is_empty() && (self.eval_runs == 0 || self.eval_actions == 0) {
            return Err(Error::Config("empty evaluation".into()));
        }
        Ok(())
    }

    /// Experience collected by the loops alone.
    pub fn search_horizon(&self) -> usize {
        self.initial_samples + self.learning_loops * self.additional_samples
    }

    /// Total experience of a run.
    pub fn horizon(&self) -> usize {
        if self.learning_loops == 0 {
            return self.initial_samples;
        }
        let last = self.checkpoints.last().copied().unwrap_or(0);
        self.search_horizon().max(last)
    }
}

/// A frozen greedy policy. Histories the tree cannot resolve yet get a
/// uniformly random action.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub tree: Aoct,
    pub q: QTable,
}

impl Policy {
    pub fn act<R: Rng + ?Sized>(&self, history: &History, rng: &mut R) -> usize {
        match self.tree.map_history(history, history.len()) {
            Some(s) => self.q.greedy_action(s),
            None => rng.random_range(0..self.q.num_actions()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub per_run: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointResult {
    pub checkpoint: usize,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopSummary {
    pub history_len: usize,
    pub best_cost: f64,
    pub num_states: usize,
    pub iterations_run: usize,
    pub exhausted: bool,
    pub swaps_attempted: usize,
    pub swaps_accepted: usize,
    pub avi_sweeps: usize,
    pub avi_converged: bool,
}

#[derive(Debug, Clone)]
pub struct AgentRun {
    pub policy: Policy,
    pub history: History,
    pub curve: Vec<CheckpointResult>,
    pub loops: Vec<LoopSummary>,
    /// Search trace of every loop, in order.
    pub trace: Vec<TraceRow>,
    /// `(t, state)` for every Q-learning step, as seen by the update.
    pub state_stream: Vec<(usize, Option<usize>)>,
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    replica_rng(seed, stream).next_u64()
}

/// Runs the agent on `env`. `make_eval_env` builds the fresh environments
/// used by the checkpoint evaluations from a seed.
pub fn run_gs_phi_a<F>(env: &mut dyn Environment, make_eval_env: F, config: &AgentConfig) -> Result<AgentRun>
where
    F: Fn(u64) -> Box<dyn Environment> + Sync,
{
    config.validate()?;
    let spec = env.spec().clone();
    let alphabets = spec.alphabets.clone();
    let (na, no) = (alphabets.num_actions(), alphabets.num_observations());
    let mut rng = replica_rng(config.seed, STREAM_AGENT);
    let mut history = History::new(alphabets.clone(), env.reset())?;

    let mut pending: &[usize] = &config.checkpoints;
    let mut curve = Vec::new();
    let mut evaluate_due = |policy: Option<&Policy>, len: usize, pending: &mut &[usize]| -> Result<()> {
        while let Some((&c, rest)) = pending.split_first() {
            if c > len {
                break;
            }
            *pending = rest;
            let evaluation = match policy {
                Some(p) => evaluate_policy(&make_eval_env, p, config.eval_actions, config.eval_runs, config.seed, config.execution)?,
                None => evaluate_random(&make_eval_env, na, config.eval_actions, config.eval_runs, config.seed, config.execution)?,
            };
            info!("checkpoint {c}: mean reward per action {:.4}", evaluation.mean);
            curve.push(CheckpointResult {
                checkpoint: c,
                evaluation,
            });
        }
        Ok(())
    };

    // The random policy is stationary, so checkpoints inside the random
    // phase can be evaluated up front.
    evaluate_due(None, config.initial_samples.saturating_sub(1), &mut pending)?;
    for _ in 0..config.initial_samples {
        let a = rng.random_range(0..na);
        let (o, r) = env.step(a);
        history.append_step(a, o, r)?;
    }

    let mut loops = Vec::new();
    let mut trace = Vec::new();
    let mut state_stream = Vec::new();

    if config.learning_loops == 0 {
        warn!("no learning loops configured; returning the root-only tree after the random phase");
        let tree = Aoct::root_only(na, no);
        let q = QTable::optimistic(1, na, spec.r_max, config.gamma, config.eta);
        let policy = Policy { tree, q };
        evaluate_due(Some(&policy), history.len(), &mut pending)?;
        if !pending.is_empty() {
            warn!("checkpoints {pending:?} lie beyond the run and are skipped");
        }
        return Ok(AgentRun {
            policy,
            history,
            curve,
            loops,
            trace,
            state_stream,
        });
    }

    let mut current: Option<Policy> = None;
    let horizon = config.horizon();
    for l in 0..config.learning_loops {
        let mut pt = config.pt.clone();
        pt.seed = derive_seed(config.seed, STREAM_SEARCH + l as u64);
        let search = parallel_tempering(&history, &pt)?;
        let tree = search.best_tree;
        let stats = collect_stats(&tree, &history);
        let model = estimate_model(&stats, alphabets.reward_values(), spec.r_max);
        let solved = avi(&model, config.avi_params());
        info!(
            "loop {}: {} states, cost {:.1} bits, {} search iterations, {} value-iteration sweeps",
            l + 1,
            tree.num_states(),
            search.best_cost,
            search.iterations_run,
            solved.sweeps
        );
        debug_assert!((cost(&tree, &history, config.cost_params()) - search.best_cost).abs() < 1e-6 * search.best_cost.abs().max(1.0));
        loops.push(LoopSummary {
            history_len: history.len(),
            best_cost: search.best_cost,
            num_states: tree.num_states(),
            iterations_run: search.iterations_run,
            exhausted: search.exhausted,
            swaps_attempted: search.swaps_attempted,
            swaps_accepted: search.swaps_accepted,
            avi_sweeps: solved.sweeps,
            avi_converged: solved.converged,
        });
        trace.extend(search.trace);
        let policy = current.insert(Policy { tree, q: solved.q });
        evaluate_due(Some(policy), history.len(), &mut pending)?;

        let until = if l + 1 == config.learning_loops {
            horizon
        } else {
            history.len() + config.additional_samples
        };
        while history.len() < until {
            q_learning_step(env, &mut history, policy, &mut rng, &mut state_stream)?;
            evaluate_due(Some(policy), history.len(), &mut pending)?;
        }
    }

    Ok(AgentRun {
        policy: current.expect("at least one learning loop"),
        history,
        curve,
        loops,
        trace,
        state_stream,
    })
}

/// One greedy interaction step followed by a Q-learning update of the
/// visited entry.
fn q_learning_step(
    env: &mut dyn Environment,
    history: &mut History,
    policy: &mut Policy,
    rng: &mut ChaCha8Rng,
    state_stream: &mut Vec<(usize, Option<usize>)>,
) -> Result<()> {
    let t = history.len();
    let state = policy.tree.map_history(history, t);
    state_stream.push((t, state));
    let action = match state {
        Some(s) => policy.q.greedy_action(s),
        None => rng.random_range(0..policy.q.num_actions()),
    };
    let (o, r) = env.step(action);
    history.append_step(action, o, r)?;
    if let (Some(s), Some(next)) = (state, policy.tree.map_history(history, t + 1)) {
        let reward = history.reward_value(t + 1);
        policy.q.q_learning_step(s, action, reward, next);
    }
    Ok(())
}

fn check_evaluation(num_actions: usize, num_runs: usize) -> Result<()> {
    if num_actions == 0 || num_runs == 0 {
        return Err(Error::Config("empty evaluation".into()));
    }
    Ok(())
}

fn summarize(per_run: Vec<f64>) -> Evaluation {
    let mean = per_run.iter().sum::<f64>() / per_run.len() as f64;
    Evaluation { per_run, mean }
}

/// Mean reward per action of a frozen policy over `num_runs` fresh
/// environments of `num_actions` steps each. The policy is never updated.
pub fn evaluate_policy<F>(
    make_env: &F,
    policy: &Policy,
    num_actions: usize,
    num_runs: usize,
    seed: u64,
    execution: Execution,
) -> Result<Evaluation>
where
    F: Fn(u64) -> Box<dyn Environment> + Sync,
{
    check_evaluation(num_actions, num_runs)?;
    let per_run = execution.map_range(num_runs, |k| {
        let mut env = make_env(derive_seed(seed, STREAM_EVAL_ENV + k as u64));
        let mut rng = replica_rng(seed, STREAM_EVAL_POLICY + k as u64);
        let mut history = History::new(env.spec().alphabets.clone(), env.reset()).expect("reset observation in range");
        let mut total = 0.0;
        for _ in 0..num_actions {
            let a = policy.act(&history, &mut rng);
            let (o, r) = env.step(a);
            history.append_step(a, o, r).expect("environment symbols in range");
            total += history.reward_value(history.len());
        }
        total / num_actions as f64
    });
    Ok(summarize(per_run))
}

/// Like [`evaluate_policy`] for the uniformly random policy.
pub fn evaluate_random<F>(
    make_env: &F,
    num_env_actions: usize,
    num_actions: usize,
    num_runs: usize,
    seed: u64,
    execution: Execution,
) -> Result<Evaluation>
where
    F: Fn(u64) -> Box<dyn Environment> + Sync,
{
    check_evaluation(num_actions, num_runs)?;
    let per_run = execution.map_range(num_runs, |k| {
        let mut env = make_env(derive_seed(seed, STREAM_EVAL_ENV + k as u64));
        let mut rng = replica_rng(seed, STREAM_EVAL_POLICY + k as u64);
        env.reset();
        let total: f64 = (0..num_actions)
            .map(|_| {
                let (_, r) = env.step(rng.random_range(0..num_env_actions));
                env.spec().alphabets.reward_value(r)
            })
            .sum();
        total / num_actions as f64
    });
    Ok(summarize(per_run))
}

/// Seed of the environment the agent itself interacts with.
pub fn environment_seed(seed: u64) -> u64 {
    derive_seed(seed, STREAM_ENV)
}

/// Runs the agent on a built-in environment, with every random stream
/// derived from `config.seed`.
pub fn run_environment(kind: EnvKind, config: &AgentConfig) -> Result<AgentRun> {
    let mut env = kind.build(environment_seed(config.seed));
    run_gs_phi_a(env.as_mut(), |s| kind.build(s), config)
}

pub fn write_curve<W: Write>(curve: &[CheckpointResult], mut out: W) -> Result<()> {
    let runs = curve.first().map_or(0, |c| c.evaluation.per_run.len());
    write!(out, "checkpoint,mean")?;
    for k in 1..=runs {
        write!(out, ",run_{k}")?;
    }
    writeln!(out)?;
    for c in curve {
        write!(out, "{},{}", c.checkpoint, c.evaluation.mean)?;
        for v in &c.evaluation.per_run {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes the effective configuration and a run summary as `key: value`
/// lines.
pub fn write_manifest<W: Write>(env_name: &str, config: &AgentConfig, run: &AgentRun, mut out: W) -> Result<()> {
    let pt = &config.pt;
    let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let temperatures = pt.ladder(run.loops.first().map_or(config.initial_samples, |l| l.history_len));
    let fields: Vec<(&str, String)> = vec![
        ("env", env_name.to_string()),
        ("seed", config.seed.to_string()),
        ("initial_samples", config.initial_samples.to_string()),
        ("learning_loops", config.learning_loops.to_string()),
        ("additional_samples", config.additional_samples.to_string()),
        ("pt_iterations", pt.iterations.to_string()),
        ("replicas", pt.num_replicas.to_string()),
        ("alpha0", pt.swap_parameter.to_string()),
        ("alpha", pt.cost.alpha.to_string()),
        ("beta", pt.cost.beta.to_string()),
        (
            "temperatures",
            temperatures.iter().map(|t| format!("{t:.6}")).collect::<Vec<_>>().join(","),
        ),
        ("max_depth", pt.max_depth.to_string()),
        ("sharing", pt.sharing.to_string()),
        ("gamma", config.gamma.to_string()),
        ("eta", config.eta.to_string()),
        ("avi_tolerance", config.avi_tolerance.to_string()),
        ("avi_max_sweeps", config.avi_max_sweeps.to_string()),
        ("checkpoints", list(&config.checkpoints)),
        ("eval_runs", config.eval_runs.to_string()),
        ("eval_actions", config.eval_actions.to_string()),
        ("history_length", run.history.len().to_string()),
        ("num_states", run.policy.tree.num_states().to_string()),
        ("tree_depth", run.policy.tree.depth().to_string()),
    ];
    for (k, v) in fields {
        writeln!(out, "{k}: {v}")?;
    }
    for (i, l) in run.loops.iter().enumerate() {
        let i = i + 1;
        writeln!(out, "loop_{i}_history_length: {}", l.history_len)?;
        writeln!(out, "loop_{i}_best_cost: {}", l.best_cost)?;
        writeln!(out, "loop_{i}_num_states: {}", l.num_states)?;
        writeln!(out, "loop_{i}_search_iterations: {}", l.iterations_run)?;
        writeln!(out, "loop_{i}_search_exhausted: {}", l.exhausted)?;
        writeln!(out, "loop_{i}_swaps: {}/{}", l.swaps_accepted, l.swaps_attempted)?;
        writeln!(out, "loop_{i}_avi_sweeps: {}", l.avi_sweeps)?;
        writeln!(out, "loop_{i}_avi_converged: {}", l.avi_converged)?;
    }
    for c in &run.curve {
        writeln!(out, "mean_at_{}: {}", c.checkpoint, c.evaluation.mean)?;
    }
    Ok(())
}
