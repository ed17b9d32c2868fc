use serde::{Deserialize, Serialize};

use super::geometry::{PhaseId, N_SIGNALS};
use super::SimError;

/// Length of the all-red interval inserted on every phase change, seconds.
pub const TRANSITION_S: u32 = 5;
/// Green added when the current phase is chosen again, seconds.
pub const EXTENSION_S: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignalMode {
    Green,
    Transition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalController {
    current_phase: PhaseId,
    transition_left: u32,
    green_left: u32,
    switch_count: u32,
}

impl SignalController {
    pub fn new(initial: PhaseId) -> Self {
        SignalController {
            current_phase: initial,
            transition_left: 0,
            green_left: 0,
            switch_count: 0,
        }
    }

    /// Phase that is green, or will be green once the transition ends.
    pub fn current_phase(&self) -> PhaseId {
        self.current_phase
    }

    pub fn mode(&self) -> SignalMode {
        if self.transition_left > 0 {
            SignalMode::Transition
        } else {
            SignalMode::Green
        }
    }

    /// Seconds until the next decision point.
    pub fn time_remaining(&self) -> u32 {
        self.transition_left + self.green_left
    }

    pub fn at_decision_point(&self) -> bool {
        self.time_remaining() == 0
    }

    pub fn switch_count(&self) -> u32 {
        self.switch_count
    }

    /// Live movement signals; all red during a transition.
    pub fn greens(&self) -> [bool; N_SIGNALS] {
        match self.mode() {
            SignalMode::Green => self.current_phase.green_set(),
            SignalMode::Transition => [false; N_SIGNALS],
        }
    }

    /// Commands the next phase. A different phase costs a transition and
    /// then holds for `green_interval`; the same phase is extended by
    /// [`EXTENSION_S`].
    pub fn apply(&mut self, target: PhaseId, green_interval: u32) -> Result<(), SimError> {
        if !self.at_decision_point() {
            return Err(SimError::ControllerBusy {
                remaining: self.time_remaining(),
            });
        }
        if target != self.current_phase {
            self.current_phase = target;
            self.transition_left = TRANSITION_S;
            self.green_left = green_interval;
            self.switch_count += 1;
        } else {
            self.green_left = EXTENSION_S;
        }
        Ok(())
    }

    /// Advances one second.
    pub fn tick(&mut self) {
        if self.transition_left > 0 {
            self.transition_left -= 1;
        } else if self.green_left > 0 {
            self.green_left -= 1;
        }
    }
}
