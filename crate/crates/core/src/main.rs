use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::error;

use phimdp::agent::{run_environment, write_curve, write_manifest, DEFAULT_CHECKPOINTS};
use phimdp::search::write_trace;
use phimdp::tree::{count_aocts, Aoct};
use phimdp::{AgentConfig, CostParams, EnvKind, Error, PtConfig};

#[derive(Parser)]
#[command(name = "phimdp", version, about = "Context-tree feature reinforcement learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvArg {
    #[value(name = "grid4x4")]
    Grid4x4,
    Tiger,
    CheeseMaze,
    KuhnPoker,
}

impl From<EnvArg> for EnvKind {
    fn from(e: EnvArg) -> Self {
        match e {
            EnvArg::Grid4x4 => EnvKind::Grid4x4,
            EnvArg::Tiger => EnvKind::Tiger,
            EnvArg::CheeseMaze => EnvKind::CheeseMaze,
            EnvArg::KuhnPoker => EnvKind::KuhnPoker,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the agent and write curve.csv, tree.txt and manifest.txt.
    Run(RunArgs),
    /// Print the number of context trees of at most the given depth.
    CountTrees {
        depth: usize,
        #[arg(long = "actions", default_value_t = 2)]
        num_actions: usize,
        #[arg(long = "observations", default_value_t = 2)]
        num_observations: usize,
    },
    /// Summarize a serialized tree.
    InspectTree { path: PathBuf },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    env: EnvArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Weight of the state code against the reward code.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Weight of the parameter code.
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 10)]
    replicas: usize,
    #[arg(long, default_value_t = 100)]
    pt_iters: usize,
    /// Probability of skipping the swap step.
    #[arg(long, default_value_t = 0.7)]
    alpha0: f64,
    #[arg(long, default_value_t = 0.999_999)]
    gamma: f64,
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
    #[arg(long, default_value_t = 5_000)]
    initial_samples: usize,
    #[arg(long, default_value_t = 1)]
    loops: usize,
    #[arg(long, default_value_t = 5_000)]
    additional_samples: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CHECKPOINTS)]
    checkpoints: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    eval_runs: usize,
    #[arg(long, default_value_t = 5_000)]
    eval_actions: usize,
    #[arg(long, default_value_t = phimdp::tree::DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    /// Also write the search trace and the final Q-table.
    #[arg(long)]
    trace: bool,
}

impl RunArgs {
    fn config(&self) -> AgentConfig {
        AgentConfig {
            initial_samples: self.initial_samples,
            learning_loops: self.loops,
            additional_samples: self.additional_samples,
            pt: PtConfig {
                num_replicas: self.replicas,
                iterations: self.pt_iters,
                swap_parameter: self.alpha0,
                cost: CostParams {
                    alpha: self.alpha,
                    beta: self.beta,
                },
                max_depth: self.max_depth,
                ..PtConfig::default()
            },
            gamma: self.gamma,
            eta: self.eta,
            seed: self.seed,
            checkpoints: self.checkpoints.clone(),
            eval_runs: self.eval_runs,
            eval_actions: self.eval_actions,
            ..AgentConfig::default()
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_run(args: &RunArgs) -> Result<(), Error> {
    let kind = EnvKind::from(args.env);
    let config = args.config();
    config.validate()?;
    fs::create_dir_all(&args.out)?;
    let run = run_environment(kind, &config)?;
    write_curve(&run.curve, create(&args.out, "curve.csv")?)?;
    run.policy.tree.write_text(create(&args.out, "tree.txt")?)?;
    write_manifest(kind.name(), &config, &run, create(&args.out, "manifest.txt")?)?;
    if args.trace {
        write_trace(&run.trace, create(&args.out, "trace.csv")?)?;
        run.policy.q.write_csv(create(&args.out, "qtable.csv")?)?;
    }
    for c in &run.curve {
        println!("{:>6}  {:.4}", c.checkpoint, c.evaluation.mean);
    }
    println!(
        "{} states, results in {}",
        run.policy.tree.num_states(),
        args.out.display()
    );
    Ok(())
}

fn cmd_inspect(path: &Path) -> Result<(), Error> {
    let text = fs::read_to_string(path)?;
    let tree = Aoct::parse_text(&text)?;
    let n = tree.num_states();
    println!(
        "{n} state{}, depth {}, Markov: {}",
        if n == 1 { "" } else { "s" },
        tree.depth(),
        if tree.is_markov() { "yes" } else { "no" }
    );
    for s in tree.states() {
        println!("{s}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::CountTrees {
            depth,
            num_actions,
            num_observations,
        } => {
            println!("{}", count_aocts(*depth, *num_actions, *num_observations));
            Ok(())
        }
        Command::InspectTree { path } => cmd_inspect(path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
