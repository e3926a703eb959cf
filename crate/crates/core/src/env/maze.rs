use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvSpec, Environment};
use crate::history::Alphabets;

pub const WIDTH: usize = 5;
pub const HEIGHT: usize = 3;
pub const CHEESE: (usize, usize) = (2, 2);

const WALL_UP: u8 = 8;
const WALL_LEFT: u8 = 4;
const WALL_DOWN: u8 = 2;
const WALL_RIGHT: u8 = 1;

/// Wall codes that occur in the maze, in symbol order.
pub const WALL_CODES: [u8; 6] = [5, 7, 8, 9, 10, 12];

const REWARD_WALL: usize = 0; // -10
const REWARD_MOVE: usize = 1; // -1
const REWARD_CHEESE: usize = 2; // +10

/// Comb-shaped maze: the whole top row plus columns 0, 2 and 4 hanging two
/// cells down. The agent sees only the walls around it. Finding the cheese
/// at the bottom of the middle column pays 10 and restarts the agent on a
/// uniformly random open cell.
///
/// Actions: 0 left, 1 right, 2 up, 3 down. Coordinates are `(x, y)` with
/// `y = 0` the top row.
#[derive(Debug, Clone)]
pub struct CheeseMaze {
    spec: EnvSpec,
    cell: (usize, usize),
    rng: ChaCha8Rng,
}

pub fn is_open(x: usize, y: usize) -> bool {
    x < WIDTH && y < HEIGHT && (y == 0 || x % 2 == 0)
}

pub fn open_cells() -> Vec<(usize, usize)> {
    (0..HEIGHT)
        .flat_map(|y| (0..WIDTH).map(move |x| (x, y)))
        .filter(|&(x, y)| is_open(x, y))
        .collect()
}

/// Neighbour in the direction of `action`, if it is open.
pub fn neighbour((x, y): (usize, usize), action: usize) -> Option<(usize, usize)> {
    let (nx, ny) = match action {
        0 => (x.checked_sub(1)?, y),
        1 => (x + 1, y),
        2 => (x, y.checked_sub(1)?),
        3 => (x, y + 1),
        _ => panic!("maze action {action} out of range"),
    };
    is_open(nx, ny).then_some((nx, ny))
}

/// 4-bit wall code with bits (up, left, down, right).
pub fn wall_code(cell: (usize, usize)) -> u8 {
    [(2, WALL_UP), (0, WALL_LEFT), (3, WALL_DOWN), (1, WALL_RIGHT)]
        .into_iter()
        .filter(|&(a, _)| neighbour(cell, a).is_none())
        .map(|(_, bit)| bit)
        .sum()
}

pub fn observation_of(cell: (usize, usize)) -> usize {
    let code = wall_code(cell);
    WALL_CODES
        .iter()
        .position(|&c| c == code)
        .expect("every open cell has a listed wall code")
}

impl CheeseMaze {
    pub fn new(seed: u64) -> Self {
        let alphabets = Alphabets::new(4, WALL_CODES.len(), vec![-10.0, -1.0, 10.0])
            .expect("valid alphabets");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cell = Self::random_cell(&mut rng);
        Self {
            spec: EnvSpec::new("cheese-maze", alphabets),
            cell,
            rng,
        }
    }

    fn random_cell(rng: &mut ChaCha8Rng) -> (usize, usize) {
        let cells = open_cells();
        cells[rng.random_range(0..cells.len())]
    }

    pub fn cell(&self) -> (usize, usize) {
        self.cell
    }
}

impl Environment for CheeseMaze {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> usize {
        self.cell = Self::random_cell(&mut self.rng);
        observation_of(self.cell)
    }

    fn step(&mut self, action: usize) -> (usize, usize) {
        match neighbour(self.cell, action) {
            None => (observation_of(self.cell), REWARD_WALL),
            Some(CHEESE) => (self.reset(), REWARD_CHEESE),
            Some(next) => {
                self.cell = next;
                (observation_of(next), REWARD_MOVE)
            }
        }
    }
}
