//! Intersection simulator, observation and reward encoding, a small
//! differentiable network and the DQN, DDQN and PPO signal controllers.

pub mod sim;
pub mod state;
pub mod nn;
pub mod rl;
pub mod scenario;
