//! Episode loop for all three learners, with logs and checkpoints.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::env::Env;
use super::{DqnAgent, Experience, Hyperparams, Method, PpoAgent};
use crate::nn::{save_params, CheckpointError, Network};
use crate::scenario::{NetworkController, ScenarioConfig, ScenarioError};

pub const LOG_FILE: &str = "episodes.log";
pub const LOG_HEADER: &str =
    "episode,method,reward,passing_time_s,waiting_time_s,switches,epsilon_or_lr,wallclock_s,status";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";
pub const FINAL_CRITIC: &str = "final_critic.ckpt";

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("log i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    pub method: Method,
    pub scenario: ScenarioConfig,
    pub episodes: usize,
    pub seed: u64,
    pub hyper: Hyperparams,
    /// Checkpoint period in episodes; 0 writes only the final checkpoint.
    pub checkpoint_every: usize,
    pub log_wallclock: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub method: Method,
    pub reward: f64,
    pub passing_time_s: u32,
    pub waiting_time_s: f64,
    pub switches: u32,
    /// Exploration rate for Q-learners, learning rate for PPO.
    pub epsilon_or_lr: f64,
    pub wallclock_s: Option<f64>,
    pub timed_out: bool,
}

impl EpisodeRecord {
    pub fn line(&self) -> String {
        let wall = self.wallclock_s.map_or_else(|| "-".to_string(), |w| format!("{w:.3}"));
        format!(
            "{},{},{:.6},{},{:.3},{},{:e},{},{}",
            self.episode,
            self.method.label(),
            self.reward,
            self.passing_time_s,
            self.waiting_time_s,
            self.switches,
            self.epsilon_or_lr,
            wall,
            if self.timed_out { "watchdog" } else { "ok" }
        )
    }
}

#[derive(Debug, Clone)]
pub enum Learner {
    Dqn(DqnAgent),
    Ppo(PpoAgent),
}

impl Learner {
    /// The network that picks actions: the evaluation Q-network or the actor.
    pub fn policy_network(&self) -> &Network<f32> {
        match self {
            Learner::Dqn(a) => &a.eval,
            Learner::Ppo(a) => &a.actor,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub records: Vec<EpisodeRecord>,
    pub learner: Learner,
    pub checkpoints: Vec<PathBuf>,
}

impl TrainRun {
    pub fn controller(&self, label: impl Into<String>) -> NetworkController {
        NetworkController::new(label, self.learner.policy_network().clone())
    }
}

/// Trains without writing anything to disk.
pub fn run_training(spec: &TrainSpec) -> Result<TrainRun, TrainError> {
    run_training_in(spec, None, &mut |_| {})
}

/// Trains, writing the episode log and checkpoints under `out_dir` if given,
/// and calling `on_episode` after every episode.
pub fn run_training_in(
    spec: &TrainSpec,
    out_dir: Option<&Path>,
    on_episode: &mut dyn FnMut(&EpisodeRecord),
) -> Result<TrainRun, TrainError> {
    spec.scenario.validate()?;
    let space = spec.scenario.action_space();
    let n_actions = space.n_actions();
    let max_speed = spec.scenario.vehicle.max_speed;
    let hyper = &spec.hyper;
    let mut master = ChaCha8Rng::seed_from_u64(spec.seed);
    let agent_seed: u64 = master.random();
    let mut learner = match spec.method {
        Method::Dqn => Learner::Dqn(DqnAgent::new(n_actions, hyper, false, max_speed, agent_seed)),
        Method::Ddqn => Learner::Dqn(DqnAgent::new(n_actions, hyper, true, max_speed, agent_seed)),
        Method::Ppo => Learner::Ppo(PpoAgent::new(n_actions, hyper, max_speed, agent_seed)),
    };

    let mut log = match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir.join("checkpoints"))?;
            let mut f = BufWriter::new(File::create(dir.join(LOG_FILE))?);
            writeln!(f, "{LOG_HEADER}")?;
            f.flush()?;
            Some(f)
        }
        None => None,
    };
    let mut checkpoints = Vec::new();
    let mut records = Vec::with_capacity(spec.episodes);
    let started = Instant::now();

    for episode in 0..spec.episodes {
        let episode_seed: u64 = master.random();
        let lr = hyper.lr.at_episode(episode);
        let critic_lr = hyper.critic_lr.map_or(lr, |s| s.at_episode(episode));
        let epsilon = hyper.epsilon.at(episode, spec.episodes);
        let mut env = Env::new(&spec.scenario, episode_seed).map_err(ScenarioError::from)?;
        let mut state = Arc::new(env.observe());
        while !env.is_done() {
            let action = match &mut learner {
                Learner::Dqn(a) => a.act(&state, epsilon),
                Learner::Ppo(a) => a.act(&state),
            };
            let out = env.step(action);
            let next = Arc::new(out.next_state);
            let exp = Experience {
                state: state.clone(),
                action: if hyper.store_executed_action { out.executed } else { action },
                reward: out.reward.total,
                next_state: next.clone(),
                done: out.done,
            };
            match &mut learner {
                Learner::Dqn(a) => {
                    a.remember(exp);
                    a.train_step(lr);
                }
                Learner::Ppo(a) => {
                    a.store(exp);
                    if a.ready() {
                        a.update(lr, critic_lr);
                    }
                }
            }
            state = next;
        }
        let s = env.summary();
        let record = EpisodeRecord {
            episode,
            method: spec.method,
            reward: s.reward,
            passing_time_s: s.passing_time_s,
            waiting_time_s: s.waiting_time_s,
            switches: s.switches,
            epsilon_or_lr: if spec.method == Method::Ppo { lr } else { epsilon },
            wallclock_s: spec.log_wallclock.then(|| started.elapsed().as_secs_f64()),
            timed_out: s.timed_out,
        };
        if let Some(f) = log.as_mut() {
            writeln!(f, "{}", record.line())?;
            f.flush()?;
        }
        on_episode(&record);
        records.push(record);

        if let Some(dir) = out_dir {
            if spec.checkpoint_every > 0 && (episode + 1) % spec.checkpoint_every == 0 {
                let path = dir.join("checkpoints").join(format!("ep{:05}.ckpt", episode + 1));
                save_params(learner.policy_network(), &path)?;
                checkpoints.push(path);
            }
        }
    }

    if let Some(dir) = out_dir {
        let path = dir.join(FINAL_CHECKPOINT);
        save_params(learner.policy_network(), &path)?;
        checkpoints.push(path);
        if let Learner::Ppo(a) = &learner {
            save_params(&a.critic, &dir.join(FINAL_CRITIC))?;
        }
    }
    Ok(TrainRun { records, learner, checkpoints })
}
