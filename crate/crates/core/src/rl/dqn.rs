use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ddqn_target, dqn_target, epsilon_greedy, features, Experience, Hyperparams, ReplayBuffer};
use crate::nn::{Adam, HeadKind, Network, NetworkSpec};
use crate::state::StateTensor;

/// Q-learner with an evaluation network and a periodically synced target
/// copy; `double_q` switches the bootstrap to the double estimator.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub eval: Network<f32>,
    pub target: Network<f32>,
    adam: Adam<f32>,
    pub double_q: bool,
    pub gamma: f64,
    pub sync_period: u64,
    pub batch_size: usize,
    pub reward_scale: f64,
    pub max_speed: f64,
    pub replay: ReplayBuffer,
    /// Gradient steps taken.
    pub steps: u64,
    pub syncs: u64,
    rng: ChaCha8Rng,
}

impl DqnAgent {
    pub fn new(n_actions: usize, hyper: &Hyperparams, double_q: bool, max_speed: f64, seed: u64) -> Self {
        let eval = Network::init(NetworkSpec::standard(HeadKind::Q, n_actions), seed);
        Self::from_network(eval, hyper, double_q, max_speed, seed)
    }

    pub fn from_network(eval: Network<f32>, hyper: &Hyperparams, double_q: bool, max_speed: f64, seed: u64) -> Self {
        DqnAgent {
            target: eval.clone(),
            adam: Adam::new(&eval.params),
            eval,
            double_q,
            gamma: hyper.gamma,
            sync_period: hyper.sync_period.max(1),
            batch_size: hyper.batch_size,
            reward_scale: hyper.reward_scale,
            max_speed,
            replay: ReplayBuffer::new(hyper.replay_capacity),
            steps: 0,
            syncs: 0,
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(1)),
        }
    }

    pub fn q_values(&self, state: &StateTensor) -> Vec<f32> {
        let (img, side) = features(&[state], self.max_speed);
        self.eval.forward(&img, &side, 1).output
    }

    pub fn act(&mut self, state: &StateTensor, epsilon: f64) -> usize {
        let q = self.q_values(state);
        epsilon_greedy(&q, epsilon, &mut self.rng)
    }

    pub fn remember(&mut self, e: Experience) {
        self.replay.push(e);
    }

    /// Bootstrapped targets for a batch, rewards already scaled.
    pub fn targets(&self, batch: &[&Experience]) -> Vec<f64> {
        let next: Vec<&StateTensor> = batch.iter().map(|e| &*e.next_state).collect();
        let (img, side) = features(&next, self.max_speed);
        let n = self.eval.spec.n_outputs;
        let qt = self.target.forward(&img, &side, batch.len()).output;
        let qe = if self.double_q {
            Some(self.eval.forward(&img, &side, batch.len()).output)
        } else {
            None
        };
        batch
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let r = e.reward * self.reward_scale;
                let t = &qt[i * n..(i + 1) * n];
                match &qe {
                    Some(qe) => ddqn_target(r, e.done, self.gamma, &qe[i * n..(i + 1) * n], t),
                    None => dqn_target(r, e.done, self.gamma, t),
                }
            })
            .collect()
    }

    /// One gradient step on a uniformly sampled batch; returns the mean
    /// squared TD error, or `None` while the buffer holds less than a batch.
    pub fn train_step(&mut self, lr: f64) -> Option<f64> {
        if self.replay.len() < self.batch_size {
            return None;
        }
        let idx = self.replay.sample_indices(self.batch_size, &mut self.rng);
        let batch: Vec<&Experience> = idx.iter().map(|&i| self.replay.get(i)).collect();
        let y = self.targets(&batch);
        let states: Vec<&StateTensor> = batch.iter().map(|e| &*e.state).collect();
        let (img, side) = features(&states, self.max_speed);
        let b = batch.len();
        let n = self.eval.spec.n_outputs;
        let cache = self.eval.forward(&img, &side, b);
        let mut d_out = vec![0.0f32; b * n];
        let mut loss = 0.0;
        for (i, e) in batch.iter().enumerate() {
            let err = cache.output[i * n + e.action] as f64 - y[i];
            loss += err * err / b as f64;
            d_out[i * n + e.action] = (2.0 * err / b as f64) as f32;
        }
        let mut grads = self.eval.zero_grads();
        self.eval.backward(&cache, &d_out, &mut grads);
        self.adam.step(&mut self.eval.params, &grads, lr);
        self.steps += 1;
        if self.steps % self.sync_period == 0 {
            self.sync_target();
        }
        Some(loss)
    }

    pub fn sync_target(&mut self) {
        self.target.copy_from(&self.eval);
        self.syncs += 1;
    }
}
