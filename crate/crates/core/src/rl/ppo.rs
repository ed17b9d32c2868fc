use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{features, gae, greedy_action, ppo_clip_grad, ppo_clip_objective, sample_categorical, Experience, Hyperparams};
use crate::nn::{Adam, HeadKind, Network, NetworkSpec};
use crate::sim::N_SIGNALS;
use crate::state::StateTensor;

/// Diagnostics of one update round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpoStats {
    pub samples: usize,
    /// Largest |ratio − 1| seen in the first gradient pass.
    pub first_pass_ratio_dev: f64,
    /// Mean clipped objective before and after the round, on the same batch.
    pub objective_before: f64,
    pub objective_after: f64,
    pub value_loss_before: f64,
    pub value_loss_after: f64,
}

/// Actor-critic learner with the clipped surrogate objective. Experiences
/// are used for one update round and then dropped.
#[derive(Debug, Clone)]
pub struct PpoAgent {
    pub actor: Network<f32>,
    pub actor_old: Network<f32>,
    pub critic: Network<f32>,
    adam_actor: Adam<f32>,
    adam_critic: Adam<f32>,
    pub gamma: f64,
    pub lambda: f64,
    pub clip: f64,
    pub rollout_size: usize,
    pub passes: usize,
    pub minibatches: usize,
    pub entropy_coef: f64,
    pub normalize_advantages: bool,
    pub reward_scale: f64,
    pub max_speed: f64,
    pub buffer: Vec<Experience>,
    pub updates: u64,
    rng: ChaCha8Rng,
}

impl PpoAgent {
    pub fn new(n_actions: usize, hyper: &Hyperparams, max_speed: f64, seed: u64) -> Self {
        let actor = Network::init(NetworkSpec::standard(HeadKind::Policy, n_actions), seed);
        let critic = Network::init(NetworkSpec::standard(HeadKind::Value, 1), seed.wrapping_add(17));
        Self::with_networks(actor, critic, hyper, max_speed, seed)
    }

    pub fn with_networks(actor: Network<f32>, critic: Network<f32>, hyper: &Hyperparams, max_speed: f64, seed: u64) -> Self {
        PpoAgent {
            actor_old: actor.clone(),
            adam_actor: Adam::new(&actor.params),
            adam_critic: Adam::new(&critic.params),
            actor,
            critic,
            gamma: hyper.gamma,
            lambda: hyper.gae_lambda,
            clip: hyper.clip,
            rollout_size: hyper.rollout_size.max(1),
            passes: hyper.passes.max(1),
            minibatches: hyper.minibatches.max(1),
            entropy_coef: hyper.entropy_coef,
            normalize_advantages: hyper.normalize_advantages,
            reward_scale: hyper.reward_scale,
            max_speed,
            buffer: Vec::new(),
            updates: 0,
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(1)),
        }
    }

    pub fn probs(&self, state: &StateTensor) -> Vec<f32> {
        let (img, side) = features(&[state], self.max_speed);
        self.actor.forward(&img, &side, 1).output
    }

    /// Samples from the current policy.
    pub fn act(&mut self, state: &StateTensor) -> usize {
        let p = self.probs(state);
        sample_categorical(&p, &mut self.rng)
    }

    /// Most probable action.
    pub fn act_greedy(&self, state: &StateTensor) -> usize {
        greedy_action(&self.probs(state))
    }

    pub fn store(&mut self, e: Experience) {
        self.buffer.push(e);
    }

    pub fn ready(&self) -> bool {
        self.buffer.len() >= self.rollout_size
    }

    fn clipped_mean(&self, probs: &[f32], old: &[f64], adv: &[f64]) -> f64 {
        let n = self.actor.spec.n_outputs;
        let m = adv.len();
        (0..m)
            .map(|i| {
                let a = self.buffer[i].action;
                let ratio = probs[i * n + a] as f64 / old[i];
                ppo_clip_objective(ratio, adv[i], self.clip)
            })
            .sum::<f64>()
            / m as f64
    }

    fn value_loss(values: &[f32], returns: &[f64]) -> f64 {
        values
            .iter()
            .zip(returns)
            .map(|(&v, r)| (v as f64 - r).powi(2))
            .sum::<f64>()
            / returns.len() as f64
    }

    /// Runs `passes` gradient passes over the buffered rollout, each split
    /// into `minibatches` shuffled parts (1 = full batch), then clears it. Returns `None` on an empty buffer.
    pub fn update(&mut self, lr_actor: f64, lr_critic: f64) -> Option<PpoStats> {
        let m = self.buffer.len();
        if m == 0 {
            return None;
        }
        let states: Vec<&StateTensor> = self.buffer.iter().map(|e| &*e.state).collect();
        let (img, side) = features(&states, self.max_speed);

        let values: Vec<f64> = self.critic.forward(&img, &side, m).output.iter().map(|&v| v as f64).collect();
        let last = &self.buffer[m - 1];
        let bootstrap = if last.done {
            0.0
        } else {
            let (ni, ns) = features(&[&*last.next_state], self.max_speed);
            self.critic.forward(&ni, &ns, 1).output[0] as f64
        };
        let rewards: Vec<f64> = self.buffer.iter().map(|e| e.reward * self.reward_scale).collect();
        let dones: Vec<bool> = self.buffer.iter().map(|e| e.done).collect();
        let (mut adv, returns) =
            gae(&rewards, &values, &dones, bootstrap, self.gamma, self.lambda).expect("aligned rollout");
        if self.normalize_advantages && m > 1 {
            let mean = adv.iter().sum::<f64>() / m as f64;
            let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / m as f64;
            let sd = var.sqrt() + 1e-8;
            adv.iter_mut().for_each(|a| *a = (*a - mean) / sd);
        }

        self.actor_old.copy_from(&self.actor);
        let n = self.actor.spec.n_outputs;
        let old_probs = self.actor_old.forward(&img, &side, m).output;
        let old: Vec<f64> = (0..m).map(|i| old_probs[i * n + self.buffer[i].action] as f64).collect();

        let mut stats = PpoStats {
            samples: m,
            first_pass_ratio_dev: 0.0,
            objective_before: self.clipped_mean(&old_probs, &old, &adv),
            objective_after: 0.0,
            value_loss_before: 0.0,
            value_loss_after: 0.0,
        };

        stats.value_loss_before =
            values.iter().zip(&returns).map(|(v, r)| (v - r).powi(2)).sum::<f64>() / m as f64;

        let parts = self.minibatches.clamp(1, m);
        let part_len = m.div_ceil(parts);
        let mut order: Vec<usize> = (0..m).collect();
        let mut first_step = true;
        for _ in 0..self.passes {
            if parts > 1 {
                order.shuffle(&mut self.rng);
            }
            for part in order.chunks(part_len) {
                let k = part.len();
                let (pimg, pside) = gather(&img, &side, part);
                let cache = self.actor.forward(&pimg, &pside, k);
                let mut d_out = vec![0.0f32; k * n];
                for (r, &i) in part.iter().enumerate() {
                    let a = self.buffer[i].action;
                    let ratio = cache.output[r * n + a] as f64 / old[i];
                    if first_step {
                        stats.first_pass_ratio_dev = stats.first_pass_ratio_dev.max((ratio - 1.0).abs());
                    }
                    // ascend the objective: loss = −mean(clipped)
                    let g = ppo_clip_grad(ratio, adv[i], self.clip);
                    d_out[r * n + a] = (-g / (k as f64 * old[i])) as f32;
                    if self.entropy_coef > 0.0 {
                        for j in 0..n {
                            let p = (cache.output[r * n + j] as f64).max(1e-12);
                            d_out[r * n + j] += (self.entropy_coef * (p.ln() + 1.0) / k as f64) as f32;
                        }
                    }
                }
                first_step = false;
                let mut grads = self.actor.zero_grads();
                self.actor.backward(&cache, &d_out, &mut grads);
                self.adam_actor.step(&mut self.actor.params, &grads, lr_actor);

                let vcache = self.critic.forward(&pimg, &pside, k);
                let dv: Vec<f32> = vcache
                    .output
                    .iter()
                    .zip(part)
                    .map(|(&v, &i)| (2.0 * (v as f64 - returns[i]) / k as f64) as f32)
                    .collect();
                let mut vgrads = self.critic.zero_grads();
                self.critic.backward(&vcache, &dv, &mut vgrads);
                self.adam_critic.step(&mut self.critic.params, &vgrads, lr_critic);
            }
        }
        let after = self.actor.forward(&img, &side, m).output;
        stats.objective_after = self.clipped_mean(&after, &old, &adv);
        stats.value_loss_after = Self::value_loss(&self.critic.forward(&img, &side, m).output, &returns);
        self.buffer.clear();
        self.updates += 1;
        Some(stats)
    }
}

/// Rows `idx` of a batch laid out as `features` produces it.
fn gather(img: &[f32], side: &[f32], idx: &[usize]) -> (Vec<f32>, Vec<f32>) {
    let m = side.len() / N_SIGNALS;
    let (iw, sw) = (img.len() / m, N_SIGNALS);
    let mut pi = Vec::with_capacity(idx.len() * iw);
    let mut ps = Vec::with_capacity(idx.len() * sw);
    for &i in idx {
        pi.extend_from_slice(&img[i * iw..(i + 1) * iw]);
        ps.extend_from_slice(&side[i * sw..(i + 1) * sw]);
    }
    (pi, ps)
}
