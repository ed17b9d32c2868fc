use serde::{Deserialize, Serialize};

use super::Scalar;

/// Step-decayed learning rate: `initial · decay^(episode / every)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub initial: f64,
    pub decay: f64,
    pub every_episodes: usize,
}

impl LrSchedule {
    pub fn constant(lr: f64) -> Self {
        LrSchedule { initial: lr, decay: 1.0, every_episodes: 100 }
    }

    pub fn at_episode(&self, episode: usize) -> f64 {
        let k = episode / self.every_episodes.max(1);
        self.initial * self.decay.powi(k as i32)
    }
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule { initial: 1e-4, decay: 0.5, every_episodes: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub steps: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(params: &[Vec<T>]) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            steps: 0,
            m: params.iter().map(|p| vec![T::zero(); p.len()]).collect(),
            v: params.iter().map(|p| vec![T::zero(); p.len()]).collect(),
        }
    }

    /// One bias-corrected update; `grads` are loss gradients (descent).
    pub fn step(&mut self, params: &mut [Vec<T>], grads: &[Vec<T>], lr: f64) {
        assert_eq!(params.len(), self.m.len(), "parameter count");
        self.steps += 1;
        let t = self.steps as i32;
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let (one_b1, one_b2) = (T::of(1.0 - self.beta1), T::of(1.0 - self.beta2));
        let c1 = T::of(1.0 / (1.0 - self.beta1.powi(t)));
        let c2 = T::of(1.0 / (1.0 - self.beta2.powi(t)));
        let lr = T::of(lr);
        let eps = T::of(self.eps);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            assert_eq!(p.len(), g.len(), "gradient shape");
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + one_b1 * gi;
                v[i] = b2 * v[i] + one_b2 * gi * gi;
                let mh = m[i] * c1;
                let vh = v[i] * c2;
                p[i] = p[i] - lr * mh / (vh.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_closed_form() {
        let mut p = vec![vec![0.0f64]];
        let mut adam = Adam::new(&p);
        adam.step(&mut p, &[vec![1.0]], 0.1);
        assert!((p[0][0] - (-0.1 / (1.0 + 1e-8))).abs() < 1e-15);
    }

    #[test]
    fn zero_gradients_leave_params() {
        let mut p = vec![vec![1.5f32, -2.0], vec![0.25]];
        let before = p.clone();
        let mut adam = Adam::new(&p);
        for _ in 0..3 {
            adam.step(&mut p, &[vec![0.0, 0.0], vec![0.0]], 0.01);
        }
        assert_eq!(p, before);
    }

    #[test]
    fn schedule_decays_per_block() {
        let s = LrSchedule { initial: 1e-3, decay: 0.5, every_episodes: 100 };
        assert_eq!(s.at_episode(0), 1e-3);
        assert_eq!(s.at_episode(99), 1e-3);
        assert_eq!(s.at_episode(100), 5e-4);
        assert_eq!(s.at_episode(250), 2.5e-4);
    }
}
