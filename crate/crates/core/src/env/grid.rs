use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvSpec, Environment};
use crate::history::Alphabets;

pub const SIDE: usize = 4;
pub const GOAL: usize = SIDE * SIDE - 1;

/// 4×4 grid with uninformative observations. Entering the bottom-right cell
/// pays 1 and teleports the agent to a uniformly random other cell. Moves
/// into the border leave the agent in place.
///
/// Actions: 0 left, 1 right, 2 up, 3 down. Cells are numbered `y * 4 + x`
/// with `y` growing downwards.
#[derive(Debug, Clone)]
pub struct GridWorld {
    spec: EnvSpec,
    cell: usize,
    rng: ChaCha8Rng,
}

impl GridWorld {
    pub fn new(seed: u64) -> Self {
        let alphabets = Alphabets::new(4, 1, vec![0.0, 1.0]).expect("valid alphabets");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cell = rng.random_range(0..GOAL);
        Self {
            spec: EnvSpec::new("grid4x4", alphabets),
            cell,
            rng,
        }
    }

    pub fn cell(&self) -> usize {
        self.cell
    }

    /// Cell reached by a move, ignoring the goal teleport.
    pub fn moved(cell: usize, action: usize) -> usize {
        let (x, y) = (cell % SIDE, cell / SIDE);
        let (x, y) = match action {
            0 => (x.saturating_sub(1), y),
            1 => ((x + 1).min(SIDE - 1), y),
            2 => (x, y.saturating_sub(1)),
            3 => (x, (y + 1).min(SIDE - 1)),
            _ => panic!("grid action {action} out of range"),
        };
        y * SIDE + x
    }

    fn teleport(&mut self) {
        // Uniform over the 15 cells other than the goal.
        self.cell = self.rng.random_range(0..GOAL);
    }
}

impl Environment for GridWorld {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> usize {
        self.teleport();
        0
    }

    fn step(&mut self, action: usize) -> (usize, usize) {
        let next = Self::moved(self.cell, action);
        if next == GOAL {
            self.teleport();
            (0, 1)
        } else {
            self.cell = next;
            (0, 0)
        }
    }
}
