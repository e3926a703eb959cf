use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvSpec, Environment};
use crate::history::Alphabets;

pub const PASS: usize = 0;
pub const BET: usize = 1;

/// Observation emitted when a hand has been settled.
pub const TERMINAL: usize = 6;

pub const DEFAULT_NASH_ALPHA: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum KuhnCard {
    Jack = 0,
    Queen = 1,
    King = 2,
}

const DECK: [KuhnCard; 3] = [KuhnCard::Jack, KuhnCard::Queen, KuhnCard::King];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// Waiting for the agent's reply to P1's opening move.
    Decision {
        agent: KuhnCard,
        opponent: KuhnCard,
        opponent_bet: bool,
    },
    /// The hand is over; the next action is ignored and a new hand is dealt.
    Settled,
}

/// Kuhn poker with the agent in second position against a fixed Nash
/// opponent. Each hand takes two steps: the agent's decision, which settles
/// the hand and pays its net chips, and a dealing step whose action is
/// ignored. Observations are `2 * card + opponent_bet` while deciding.
#[derive(Debug, Clone)]
pub struct KuhnPoker {
    spec: EnvSpec,
    nash_alpha: f64,
    phase: Phase,
    rng: ChaCha8Rng,
}

impl KuhnPoker {
    pub fn new(seed: u64) -> Self {
        Self::with_nash_alpha(seed, DEFAULT_NASH_ALPHA)
    }

    /// `nash_alpha` is the opponent's bluffing frequency with the Jack, in
    /// `[0, 1/3]`.
    pub fn with_nash_alpha(seed: u64, nash_alpha: f64) -> Self {
        assert!((0.0..=1.0 / 3.0 + 1e-12).contains(&nash_alpha));
        let alphabets = Alphabets::new(2, 7, vec![-2.0, -1.0, 0.0, 1.0, 2.0]).expect("valid alphabets");
        let mut env = Self {
            spec: EnvSpec::new("kuhn-poker", alphabets),
            nash_alpha,
            phase: Phase::Settled,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        env.deal();
        env
    }

    pub fn nash_alpha(&self) -> f64 {
        self.nash_alpha
    }

    /// Probability that P1 opens with a bet holding `card`.
    pub fn opening_bet_probability(nash_alpha: f64, card: KuhnCard) -> f64 {
        match card {
            KuhnCard::Jack => nash_alpha,
            KuhnCard::Queen => 0.0,
            KuhnCard::King => (3.0 * nash_alpha).min(1.0),
        }
    }

    /// Probability that P1 calls after checking and facing a bet.
    pub fn call_probability(nash_alpha: f64, card: KuhnCard) -> f64 {
        match card {
            KuhnCard::Jack => 0.0,
            KuhnCard::Queen => nash_alpha + 1.0 / 3.0,
            KuhnCard::King => 1.0,
        }
    }

    fn deal(&mut self) -> usize {
        let mut deck = DECK;
        deck.shuffle(&mut self.rng);
        let (agent, opponent) = (deck[0], deck[1]);
        let p = Self::opening_bet_probability(self.nash_alpha, opponent);
        let opponent_bet = self.rng.random_bool(p);
        self.phase = Phase::Decision {
            agent,
            opponent,
            opponent_bet,
        };
        agent as usize * 2 + usize::from(opponent_bet)
    }

    /// Net chips for the agent from a decision.
    fn settle(&mut self, agent: KuhnCard, opponent: KuhnCard, opponent_bet: bool, action: usize) -> i32 {
        let showdown = |stake: i32| if agent > opponent { stake } else { -stake };
        match (opponent_bet, action) {
            (true, BET) => showdown(2),
            (true, _) => -1,
            (false, BET) => {
                let p = Self::call_probability(self.nash_alpha, opponent);
                if self.rng.random_bool(p) {
                    showdown(2)
                } else {
                    1
                }
            }
            (false, _) => showdown(1),
        }
    }
}

impl Environment for KuhnPoker {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> usize {
        self.deal()
    }

    fn step(&mut self, action: usize) -> (usize, usize) {
        assert!(action < 2, "kuhn action {action} out of range");
        match self.phase {
            Phase::Decision {
                agent,
                opponent,
                opponent_bet,
            } => {
                let chips = self.settle(agent, opponent, opponent_bet, action);
                self.phase = Phase::Settled;
                (TERMINAL, (chips + 2) as usize)
            }
            Phase::Settled => (self.deal(), 2),
        }
    }
}
