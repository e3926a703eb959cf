//! Benchmark environments behind one interface: `reset` yields the initial
//! observation and `step` maps an action to an observation and a reward.
//!
//! Observations and rewards are symbol indices into the environment's
//! declared alphabets.

pub mod grid;
pub mod kuhn;
pub mod maze;
pub mod tiger;

use std::fmt;
use std::str::FromStr;

pub use grid::GridWorld;
pub use kuhn::{KuhnCard, KuhnPoker};
pub use maze::CheeseMaze;
pub use tiger::Tiger;

use crate::history::Alphabets;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: &'static str,
    pub alphabets: Alphabets,
    pub r_max: f64,
}

impl EnvSpec {
    pub(crate) fn new(name: &'static str, alphabets: Alphabets) -> Self {
        let r_max = alphabets.max_reward();
        Self {
            name,
            alphabets,
            r_max,
        }
    }
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts afresh and returns the first observation.
    fn reset(&mut self) -> usize;

    /// Applies an action; returns `(observation, reward index)`.
    fn step(&mut self, action: usize) -> (usize, usize);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvKind {
    Grid4x4,
    Tiger,
    CheeseMaze,
    KuhnPoker,
}

impl EnvKind {
    pub const ALL: [EnvKind; 4] = [
        EnvKind::Grid4x4,
        EnvKind::Tiger,
        EnvKind::CheeseMaze,
        EnvKind::KuhnPoker,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Grid4x4 => "grid4x4",
            EnvKind::Tiger => "tiger",
            EnvKind::CheeseMaze => "cheese-maze",
            EnvKind::KuhnPoker => "kuhn-poker",
        }
    }

    pub fn build(self, seed: u64) -> Box<dyn Environment> {
        match self {
            EnvKind::Grid4x4 => Box::new(GridWorld::new(seed)),
            EnvKind::Tiger => Box::new(Tiger::new(seed)),
            EnvKind::CheeseMaze => Box::new(CheeseMaze::new(seed)),
            EnvKind::KuhnPoker => Box::new(KuhnPoker::new(seed)),
        }
    }

    pub fn spec(self) -> EnvSpec {
        self.build(0).spec().clone()
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EnvKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = EnvKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown environment {s:?}; expected one of {}", names.join(", "))
            })
    }
}
