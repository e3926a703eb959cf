//! Alphabets and the append-only interaction history.
//!
//! Time is indexed from zero. Time `t` carries the observation `o_t` and
//! reward `r_t` the agent has just received, and `a_t` is the action the
//! agent takes next. `steps[t]` holds `(a_t, o_{t+1}, r_{t+1})`; the pair
//! `(o_0, r_0)` produced by the environment reset is stored separately, so a
//! history with `n` steps covers times `0..=n`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// The finite action, observation and reward alphabets of an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabets {
    num_actions: usize,
    num_observations: usize,
    reward_values: Vec<f64>,
}

impl Alphabets {
    pub fn new(num_actions: usize, num_observations: usize, reward_values: Vec<f64>) -> Result<Self> {
        if num_actions == 0 {
            return Err(Error::Alphabet("action alphabet is empty".into()));
        }
        if num_observations == 0 {
            return Err(Error::Alphabet("observation alphabet is empty".into()));
        }
        if reward_values.is_empty() {
            return Err(Error::Alphabet("reward alphabet is empty".into()));
        }
        if reward_values.iter().any(|r| !r.is_finite()) {
            return Err(Error::Alphabet("reward values must be finite".into()));
        }
        if reward_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Alphabet(
                "reward values must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            num_actions,
            num_observations,
            reward_values,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_observations(&self) -> usize {
        self.num_observations
    }

    pub fn num_rewards(&self) -> usize {
        self.reward_values.len()
    }

    pub fn reward_values(&self) -> &[f64] {
        &self.reward_values
    }

    pub fn reward_value(&self, index: usize) -> f64 {
        self.reward_values[index]
    }

    pub fn reward_index(&self, value: f64) -> Option<usize> {
        self.reward_values.iter().position(|&r| r == value)
    }

    pub fn max_reward(&self) -> f64 {
        *self.reward_values.last().expect("non-empty reward alphabet")
    }

    pub fn min_reward(&self) -> f64 {
        self.reward_values[0]
    }

    /// Reward attached to the reset observation: zero when the alphabet has
    /// it, otherwise the lowest reward.
    pub fn neutral_reward_index(&self) -> usize {
        self.reward_index(0.0).unwrap_or(0)
    }

    fn check_action(&self, action: usize) -> Result<()> {
        if action >= self.num_actions {
            return Err(Error::SymbolOutOfRange {
                kind: "action",
                index: action,
                size: self.num_actions,
            });
        }
        Ok(())
    }

    fn check_observation(&self, observation: usize) -> Result<()> {
        if observation >= self.num_observations {
            return Err(Error::SymbolOutOfRange {
                kind: "observation",
                index: observation,
                size: self.num_observations,
            });
        }
        Ok(())
    }

    fn check_reward(&self, reward: usize) -> Result<()> {
        if reward >= self.reward_values.len() {
            return Err(Error::SymbolOutOfRange {
                kind: "reward",
                index: reward,
                size: self.reward_values.len(),
            });
        }
        Ok(())
    }
}

/// One interaction cycle: the action taken and the feedback it produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub action: usize,
    pub observation: usize,
    pub reward: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct History {
    alphabets: Alphabets,
    initial_observation: usize,
    initial_reward: usize,
    steps: Vec<Step>,
}

impl History {
    /// Starts a history at a reset observation with the neutral reward.
    pub fn new(alphabets: Alphabets, initial_observation: usize) -> Result<Self> {
        let initial_reward = alphabets.neutral_reward_index();
        Self::with_initial_reward(alphabets, initial_observation, initial_reward)
    }

    pub fn with_initial_reward(
        alphabets: Alphabets,
        initial_observation: usize,
        initial_reward: usize,
    ) -> Result<Self> {
        alphabets.check_observation(initial_observation)?;
        alphabets.check_reward(initial_reward)?;
        Ok(Self {
            alphabets,
            initial_observation,
            initial_reward,
            steps: Vec::new(),
        })
    }

    pub fn alphabets(&self) -> &Alphabets {
        &self.alphabets
    }

    /// Number of complete (action, observation, reward) steps.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn append_step(&mut self, action: usize, observation: usize, reward: usize) -> Result<()> {
        self.alphabets.check_action(action)?;
        self.alphabets.check_observation(observation)?;
        self.alphabets.check_reward(reward)?;
        self.steps.push(Step {
            action,
            observation,
            reward,
        });
        Ok(())
    }

    /// Like [`History::append_step`] but takes the reward by value.
    pub fn append_reward_value(&mut self, action: usize, observation: usize, reward: f64) -> Result<()> {
        let index = self
            .alphabets
            .reward_index(reward)
            .ok_or(Error::UnknownReward(reward))?;
        self.append_step(action, observation, index)
    }

    pub fn observation(&self, t: usize) -> usize {
        if t == 0 {
            self.initial_observation
        } else {
            self.steps[t - 1].observation
        }
    }

    pub fn action(&self, t: usize) -> usize {
        self.steps[t].action
    }

    pub fn reward_index(&self, t: usize) -> usize {
        if t == 0 {
            self.initial_reward
        } else {
            self.steps[t - 1].reward
        }
    }

    pub fn reward_value(&self, t: usize) -> f64 {
        self.alphabets.reward_value(self.reward_index(t))
    }

    /// The symbols preceding and including time `t`, most recent first:
    /// `o_t, a_{t-1}, o_{t-1}, a_{t-2}, ..., o_0`.
    pub fn context(&self, t: usize) -> Context<'_> {
        debug_assert!(t <= self.len());
        Context {
            history: self,
            time: t,
            next_is_observation: true,
            done: false,
        }
    }

    /// Writes the history as `t,a,o,r_index,r_value` rows. Row 0 carries the
    /// reset observation and has an empty action field.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,a,o,r_index,r_value")?;
        writeln!(
            out,
            "0,,{},{},{}",
            self.initial_observation,
            self.initial_reward,
            self.alphabets.reward_value(self.initial_reward)
        )?;
        for (i, step) in self.steps.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                i + 1,
                step.action,
                step.observation,
                step.reward,
                self.alphabets.reward_value(step.reward)
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R, alphabets: Alphabets) -> Result<Self> {
        let mut history: Option<History> = None;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = i + 1;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(parse_err(format!("expected 5 fields, found {}", fields.len())));
            }
            let num = |s: &str| -> Result<usize> {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad integer {s:?}: {e}")))
            };
            let t = num(fields[0])?;
            let observation = num(fields[2])?;
            let reward = num(fields[3])?;
            match history.as_mut() {
                None => {
                    if t != 0 {
                        return Err(parse_err("first row must be t=0".into()));
                    }
                    history = Some(
                        History::with_initial_reward(alphabets.clone(), observation, reward)
                            .map_err(|e| parse_err(e.to_string()))?,
                    );
                }
                Some(h) => {
                    if t != h.len() + 1 {
                        return Err(parse_err(format!("expected t={}, found {t}", h.len() + 1)));
                    }
                    let action = num(fields[1])?;
                    h.append_step(action, observation, reward)
                        .map_err(|e| parse_err(e.to_string()))?;
                }
            }
        }
        history.ok_or(Error::Parse {
            line: 0,
            message: "empty history log".into(),
        })
    }
}

/// Iterator over the context of a time index, see [`History::context`].
#[derive(Debug, Clone)]
pub struct Context<'a> {
    history: &'a History,
    time: usize,
    next_is_observation: bool,
    done: bool,
}

impl Iterator for Context<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        if self.next_is_observation {
            self.next_is_observation = false;
            let o = self.history.observation(self.time);
            if self.time == 0 {
                self.done = true;
            }
            Some(o)
        } else {
            self.next_is_observation = true;
            self.time -= 1;
            Some(self.history.action(self.time))
        }
    }
}
