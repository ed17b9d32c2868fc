//! Value-based (DQN, double DQN) and policy-gradient (PPO) learners.

mod dqn;
pub mod env;
mod ppo;
pub mod train;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::LrSchedule;
use crate::sim::{PhaseId, N_PHASES};
use crate::state::{StateTensor, GRID_CELLS};

pub use dqn::DqnAgent;
pub use ppo::{PpoAgent, PpoStats};

/// Green intervals selectable in variable mode, seconds.
pub const VARIABLE_INTERVALS: [u32; 4] = [10, 15, 20, 25];
pub const FIXED_INTERVAL: u32 = 10;
/// Normalizer for the waiting-time channel, seconds.
pub const WAITING_SCALE: f32 = 300.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RlError {
    #[error("sequence lengths differ: {0}")]
    LengthMismatch(String),
    #[error("action {action} outside 0..{n}")]
    BadAction { action: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMode {
    Fixed,
    Variable,
}

impl IntervalMode {
    pub fn label(self) -> &'static str {
        match self {
            IntervalMode::Fixed => "fixed",
            IntervalMode::Variable => "variable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dqn,
    Ddqn,
    Ppo,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Dqn => "dqn",
            Method::Ddqn => "ddqn",
            Method::Ppo => "ppo",
        }
    }
}

/// Action ids: in fixed mode the phase index; in variable mode
/// `phase · 4 + interval slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub mode: IntervalMode,
}

impl ActionSpace {
    pub fn new(mode: IntervalMode) -> Self {
        ActionSpace { mode }
    }

    pub fn n_actions(&self) -> usize {
        match self.mode {
            IntervalMode::Fixed => N_PHASES,
            IntervalMode::Variable => N_PHASES * VARIABLE_INTERVALS.len(),
        }
    }

    pub fn decode(&self, action: usize) -> Result<(PhaseId, u32), RlError> {
        let n = self.n_actions();
        if action >= n {
            return Err(RlError::BadAction { action, n });
        }
        Ok(match self.mode {
            IntervalMode::Fixed => (PhaseId(action as u8), FIXED_INTERVAL),
            IntervalMode::Variable => {
                let k = VARIABLE_INTERVALS.len();
                (PhaseId((action / k) as u8), VARIABLE_INTERVALS[action % k])
            }
        })
    }

    pub fn encode(&self, phase: PhaseId, interval: u32) -> Option<usize> {
        match self.mode {
            IntervalMode::Fixed => (interval == FIXED_INTERVAL).then_some(phase.index()),
            IntervalMode::Variable => VARIABLE_INTERVALS
                .iter()
                .position(|&i| i == interval)
                .map(|slot| phase.index() * VARIABLE_INTERVALS.len() + slot),
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn greedy_action(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn epsilon_greedy<R: Rng>(values: &[f32], epsilon: f64, rng: &mut R) -> usize {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..values.len())
    } else {
        greedy_action(values)
    }
}

/// Samples an index from a probability vector.
pub fn sample_categorical<R: Rng>(probs: &[f32], rng: &mut R) -> usize {
    let u: f32 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver above the cumulative sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Linear decay from `start` to `end` over the first `fraction` of episodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub fraction: f64,
}

impl EpsilonSchedule {
    pub fn at(&self, episode: usize, episodes: usize) -> f64 {
        let span = self.fraction * episodes as f64;
        if span <= 0.0 {
            return self.end;
        }
        let t = (episode as f64 / span).min(1.0);
        self.start + (self.end - self.start) * t
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule { start: 1.0, end: 0.05, fraction: 0.6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub lr: LrSchedule,
    /// Critic learning rate for PPO; `None` uses `lr`.
    pub critic_lr: Option<LrSchedule>,
    pub epsilon: EpsilonSchedule,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub sync_period: u64,
    pub rollout_size: usize,
    pub clip: f64,
    pub passes: usize,
    /// PPO: parts each pass is split into; 1 means full-batch steps.
    pub minibatches: usize,
    pub entropy_coef: f64,
    pub normalize_advantages: bool,
    /// Multiplies rewards before they enter any loss.
    pub reward_scale: f64,
    /// Store the executed rather than the chosen action under disturbance.
    pub store_executed_action: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            gamma: 0.95,
            gae_lambda: 0.95,
            lr: LrSchedule { initial: 1e-3, ..LrSchedule::default() },
            critic_lr: None,
            epsilon: EpsilonSchedule::default(),
            replay_capacity: 20_000,
            batch_size: 32,
            sync_period: 50,
            rollout_size: 100,
            clip: 0.15,
            passes: 4,
            minibatches: 4,
            entropy_coef: 0.0,
            normalize_advantages: true,
            reward_scale: 0.002,
            store_executed_action: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Experience {
    pub state: Arc<StateTensor>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Arc<StateTensor>,
    pub done: bool,
}

/// Fixed-capacity ring of experiences with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Experience>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { capacity, items: Vec::new(), next: 0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, e: Experience) {
        if self.items.len() < self.capacity {
            self.items.push(e);
        } else {
            self.items[self.next] = e;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        assert!(!self.items.is_empty(), "sampling an empty buffer");
        (0..n).map(|_| rng.random_range(0..self.items.len())).collect()
    }

    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<&Experience> {
        self.sample_indices(n, rng).into_iter().map(|i| &self.items[i]).collect()
    }

    pub fn get(&self, i: usize) -> &Experience {
        &self.items[i]
    }
}

/// Network inputs for a batch: normalized grids `[batch, 3, 24, 60]` and
/// phase flags `[batch, 12]`.
pub fn features(states: &[&StateTensor], max_speed: f64) -> (Vec<f32>, Vec<f32>) {
    let mut images = Vec::with_capacity(states.len() * 3 * GRID_CELLS);
    let mut side = Vec::with_capacity(states.len() * 12);
    let vs = 1.0 / max_speed as f32;
    let ws = 1.0 / WAITING_SCALE;
    for s in states {
        images.extend_from_slice(&s.position);
        images.extend(s.velocity.iter().map(|v| v * vs));
        // saturate: waits past the normalizer are all "very long"
        images.extend(s.waiting.iter().map(|w| (w * ws).min(1.0)));
        side.extend_from_slice(&s.phase);
    }
    (images, side)
}

/// `r + γ·max Q_target(s')`, or `r` at episode end.
pub fn dqn_target(reward: f64, done: bool, gamma: f64, q_next_target: &[f32]) -> f64 {
    if done {
        return reward;
    }
    let best = q_next_target[greedy_action(q_next_target)] as f64;
    reward + gamma * best
}

/// Action picked by the evaluation network, valued by the target network.
pub fn ddqn_target(reward: f64, done: bool, gamma: f64, q_next_eval: &[f32], q_next_target: &[f32]) -> f64 {
    if done {
        return reward;
    }
    let a = greedy_action(q_next_eval);
    reward + gamma * q_next_target[a] as f64
}

/// Generalized advantage estimates and returns. `values[t]` is V(s_t);
/// `bootstrap` is V of the state after the last step (ignored if that step
/// ended an episode).
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), RlError> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(RlError::LengthMismatch(format!(
            "{n} rewards, {} values, {} dones",
            values.len(),
            dones.len()
        )));
    }
    let mut adv = vec![0.0; n];
    let mut next_value = bootstrap;
    let mut running = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        running = delta + gamma * lambda * live * running;
        adv[t] = running;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

/// `min(r·A, clip(r, 1−ε, 1+ε)·A)`.
pub fn ppo_clip_objective(ratio: f64, advantage: f64, clip: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
    (ratio * advantage).min(clipped * advantage)
}

/// Derivative of [`ppo_clip_objective`] with respect to the ratio.
pub fn ppo_clip_grad(ratio: f64, advantage: f64, clip: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
    if clipped == ratio || ratio * advantage < clipped * advantage {
        advantage
    } else {
        0.0
    }
}
