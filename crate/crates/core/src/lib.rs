//! Feature reinforcement learning with Markov action-observation context
//! trees.
//!
//! An agent explores an environment at random, searches by parallel
//! tempering for the context tree whose induced MDP has the shortest
//! two-part code, solves that MDP with action-value iteration, and keeps
//! improving with greedy Q-learning.

pub mod agent;
pub mod cost;
pub mod env;
pub mod error;
pub mod history;
pub mod mdp;
pub mod search;
pub mod tree;

pub use agent::{run_gs_phi_a, AgentConfig, AgentRun, Policy};
pub use cost::{cost, CostParams};
pub use env::{EnvKind, EnvSpec, Environment};
pub use error::{Error, Result};
pub use history::{Alphabets, History};
pub use mdp::{avi, AviParams, MdpModel, QTable};
pub use search::{parallel_tempering, Execution, PtConfig};
pub use tree::{count_aocts, Aoct};
