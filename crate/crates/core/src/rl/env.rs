//! Decision-level wrapper around the simulator: one step runs the world from
//! one controller decision point to the next.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ActionSpace;
use crate::scenario::{disturb_action, ScenarioConfig};
use crate::sim::{SimError, SimWorld};
use crate::state::{compute_reward, encode_state, RewardBreakdown, StateTensor};

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: StateTensor,
    pub reward: RewardBreakdown,
    /// Episode finished or hit the watchdog.
    pub done: bool,
    pub timed_out: bool,
    /// Action actually applied after any disturbance.
    pub executed: usize,
    pub elapsed_s: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    /// Clock at the end of the episode (the watchdog limit if aborted).
    pub passing_time_s: u32,
    pub waiting_time_s: f64,
    pub switches: u32,
    pub reward: f64,
    pub decisions: usize,
    pub timed_out: bool,
}

pub struct Env {
    world: SimWorld,
    space: ActionSpace,
    disturbance: f64,
    watchdog_s: u32,
    rng: ChaCha8Rng,
    reward_sum: f64,
    decisions: usize,
}

impl Env {
    pub fn new(scenario: &ScenarioConfig, seed: u64) -> Result<Env, SimError> {
        let world = SimWorld::build(&scenario.world_config(), seed)?;
        Ok(Env {
            world,
            space: ActionSpace::new(scenario.interval_mode),
            disturbance: scenario.action_disturbance,
            watchdog_s: scenario.watchdog_s,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15),
            reward_sum: 0.0,
            decisions: 0,
        })
    }

    pub fn world(&self) -> &SimWorld {
        &self.world
    }

    pub fn space(&self) -> ActionSpace {
        self.space
    }

    pub fn observe(&self) -> StateTensor {
        encode_state(&self.world)
    }

    pub fn timed_out(&self) -> bool {
        !self.world.episode_done() && self.world.clock() >= self.watchdog_s
    }

    pub fn is_done(&self) -> bool {
        self.world.episode_done() || self.world.clock() >= self.watchdog_s
    }

    /// Applies `action` at the current decision point and simulates until
    /// the next one.
    pub fn step(&mut self, action: usize) -> StepOutcome {
        self.step_observed(action, &mut |_| {})
    }

    /// Like [`Env::step`], calling `observer` after every simulated second.
    pub fn step_observed(&mut self, action: usize, observer: &mut dyn FnMut(&SimWorld)) -> StepOutcome {
        let (prev_phase, executed) = {
            let prev = self.world.controller().current_phase();
            (prev, disturb_action(self.space, action, self.disturbance, &mut self.rng))
        };
        let (phase, interval) = self.space.decode(executed).expect("action outside the action space");
        self.world
            .apply_phase_command(phase, interval)
            .expect("env steps only at decision points");
        let start = self.world.clock();
        loop {
            self.world.step();
            observer(&self.world);
            if self.world.controller().at_decision_point() || self.is_done() {
                break;
            }
        }
        let reward = compute_reward(prev_phase, phase, &self.world);
        self.reward_sum += reward.total;
        self.decisions += 1;
        StepOutcome {
            next_state: self.observe(),
            reward,
            done: self.is_done(),
            timed_out: self.timed_out(),
            executed,
            elapsed_s: self.world.clock() - start,
        }
    }

    pub fn summary(&self) -> EpisodeSummary {
        EpisodeSummary {
            passing_time_s: self.world.clock(),
            waiting_time_s: self.world.total_waiting_time(),
            switches: self.world.switch_count(),
            reward: self.reward_sum,
            decisions: self.decisions,
            timed_out: self.timed_out(),
        }
    }
}
