use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvSpec, Environment};
use crate::history::Alphabets;

pub const LISTEN: usize = 0;
pub const OPEN_LEFT: usize = 1;
pub const OPEN_RIGHT: usize = 2;

pub const HEAR_LEFT: usize = 0;
pub const HEAR_RIGHT: usize = 1;
pub const START: usize = 2;

pub const HEARING_ACCURACY: f64 = 0.85;

const REWARD_TIGER: usize = 0; // -100
const REWARD_LISTEN: usize = 1; // -1
const REWARD_GOLD: usize = 2; // +10

/// Two doors, one hiding a tiger. Listening costs 1 and reports the tiger's
/// side correctly with probability 0.85. Opening pays 10 for gold and -100
/// for the tiger, then a new episode starts with the `START` observation.
#[derive(Debug, Clone)]
pub struct Tiger {
    spec: EnvSpec,
    tiger_left: bool,
    rng: ChaCha8Rng,
}

impl Tiger {
    pub fn new(seed: u64) -> Self {
        let alphabets = Alphabets::new(3, 3, vec![-100.0, -1.0, 10.0]).expect("valid alphabets");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tiger_left = rng.random_bool(0.5);
        Self {
            spec: EnvSpec::new("tiger", alphabets),
            tiger_left,
            rng,
        }
    }

    pub fn tiger_left(&self) -> bool {
        self.tiger_left
    }
}

impl Environment for Tiger {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> usize {
        self.tiger_left = self.rng.random_bool(0.5);
        START
    }

    fn step(&mut self, action: usize) -> (usize, usize) {
        match action {
            LISTEN => {
                let correct = self.rng.random_bool(HEARING_ACCURACY);
                let hear_left = self.tiger_left == correct;
                (if hear_left { HEAR_LEFT } else { HEAR_RIGHT }, REWARD_LISTEN)
            }
            OPEN_LEFT | OPEN_RIGHT => {
                let met_tiger = (action == OPEN_LEFT) == self.tiger_left;
                let obs = self.reset();
                (obs, if met_tiger { REWARD_TIGER } else { REWARD_GOLD })
            }
            _ => panic!("tiger action {action} out of range"),
        }
    }
}
