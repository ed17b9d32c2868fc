//! Observation grids and the shaped reward.
//!
//! Each lane is one row of 60 cells, each one vehicle length plus one
//! minimum gap long. A vehicle occupies the cell containing its center;
//! vehicles whose center is still inside the junction box (crossing, or just
//! leaving the junction) are not on any row.

use serde::{Deserialize, Serialize};

use crate::sim::{LaneId, Link, PhaseId, SimWorld, VehicleStatus, N_INCOMING_LANES, N_LANES, N_SIGNALS};

pub const GRID_ROWS: usize = N_LANES;
pub const GRID_COLS: usize = 60;
pub const GRID_CELLS: usize = GRID_ROWS * GRID_COLS;

/// Penalty for choosing a phase different from the current one.
pub const SWITCH_PENALTY: f64 = -5.0;
pub const WAIT_WEIGHT: f64 = 0.5;
pub const BALANCE_WEIGHT: f64 = 0.8;
pub const BALANCE_COEFF: f64 = 0.02;

/// Position (0/1), velocity (m/s) and waiting-time (s) grids, row-major
/// `[lane][cell]`, plus the 12 live movement signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTensor {
    pub position: Vec<f32>,
    pub velocity: Vec<f32>,
    pub waiting: Vec<f32>,
    pub phase: [f32; N_SIGNALS],
}

impl StateTensor {
    pub fn zeros() -> Self {
        StateTensor {
            position: vec![0.0; GRID_CELLS],
            velocity: vec![0.0; GRID_CELLS],
            waiting: vec![0.0; GRID_CELLS],
            phase: [0.0; N_SIGNALS],
        }
    }

    pub fn cell(row: usize, col: usize) -> usize {
        row * GRID_COLS + col
    }

    pub fn occupied(&self) -> usize {
        self.position.iter().filter(|&&p| p > 0.0).count()
    }

    /// Plain-text dump: one block per channel, one line per lane row.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (name, grid) in [("position", &self.position), ("velocity", &self.velocity), ("waiting", &self.waiting)] {
            out.push_str(&format!("# {name}\n"));
            for row in 0..GRID_ROWS {
                let cells: Vec<String> = grid[row * GRID_COLS..(row + 1) * GRID_COLS]
                    .iter()
                    .map(|v| format!("{v}"))
                    .collect();
                out.push_str(&format!("{} {}\n", LaneId(row as u8), cells.join(" ")));
            }
        }
        let phase: Vec<String> = self.phase.iter().map(|v| format!("{v}")).collect();
        out.push_str(&format!("# phase\n{}\n", phase.join(" ")));
        out
    }
}

/// Grid column of a vehicle whose front bumper is at `front`, if its center
/// lies on the lane.
pub fn cell_of(front: f64, vehicle_length: f64, cell_length: f64) -> Option<usize> {
    let center = front - vehicle_length / 2.0;
    if center < 0.0 {
        return None;
    }
    let col = (center / cell_length).floor() as usize;
    Some(col.min(GRID_COLS - 1))
}

pub fn encode_state(world: &SimWorld) -> StateTensor {
    let mut s = StateTensor::zeros();
    let spec = world.spec();
    for v in world.vehicles() {
        let Link::Lane(lane) = v.link else { continue };
        let Some(col) = cell_of(v.pos, spec.length, spec.cell_length()) else { continue };
        let k = StateTensor::cell(lane.row(), col);
        assert!(
            s.position[k] == 0.0,
            "two vehicles in cell ({lane}, {col}) at t={}",
            world.clock()
        );
        s.position[k] = 1.0;
        s.velocity[k] = v.speed as f32;
        s.waiting[k] = v.waiting_time as f32;
    }
    for (slot, green) in world.controller().greens().into_iter().enumerate() {
        s.phase[slot] = if green { 1.0 } else { 0.0 };
    }
    s
}

/// Number of vehicles that [`encode_state`] places on the grid.
pub fn grid_resident_count(world: &SimWorld) -> usize {
    let spec = world.spec();
    world
        .vehicles()
        .iter()
        .filter(|v| matches!(v.link, Link::Lane(_)) && cell_of(v.pos, spec.length, spec.cell_length()).is_some())
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Switch penalty, −5 or 0.
    pub action: f64,
    /// Stopped vehicles on the network.
    pub stopped: f64,
    /// Mean waiting time of the stopped vehicles, seconds.
    pub mean_wait: f64,
    /// Lane balance term, never positive.
    pub balance: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn new(action: f64, stopped: f64, mean_wait: f64, balance: f64) -> Self {
        RewardBreakdown {
            action,
            stopped,
            mean_wait,
            balance,
            total: action - stopped - WAIT_WEIGHT * mean_wait + BALANCE_WEIGHT * balance,
        }
    }
}

/// Sum over lanes of `0.02·(n_avg − n_i)·n_i`, where `n_avg` is the mean
/// count over all given lanes.
pub fn balance_term(counts: &[usize]) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    let avg = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&n| BALANCE_COEFF * (avg - n as f64) * n as f64)
        .sum()
}

/// Stopped-vehicle counts on each of the 12 incoming lanes, crashed vehicles
/// included.
pub fn incoming_stopped_counts(world: &SimWorld) -> [usize; N_INCOMING_LANES] {
    let mut counts = [0; N_INCOMING_LANES];
    for v in world.vehicles() {
        if let Link::Lane(lane) = v.link {
            if let Some(slot) = lane.incoming_slot() {
                if v.is_stopped() {
                    counts[slot] += 1;
                }
            }
        }
    }
    counts
}

/// Reward for moving from `prev_phase` to `action_phase` and arriving at
/// `world_next`.
pub fn compute_reward(prev_phase: PhaseId, action_phase: PhaseId, world_next: &SimWorld) -> RewardBreakdown {
    let action = if action_phase != prev_phase { SWITCH_PENALTY } else { 0.0 };
    let (stopped, wait_sum) = world_next
        .vehicles()
        .iter()
        .filter(|v| v.is_stopped())
        .fold((0usize, 0.0), |(n, w), v| (n + 1, w + v.waiting_time));
    let mean_wait = if stopped == 0 { 0.0 } else { wait_sum / stopped as f64 };
    let balance = balance_term(&incoming_stopped_counts(world_next));
    debug_assert!(world_next
        .vehicles()
        .iter()
        .all(|v| v.status != VehicleStatus::Exited));
    RewardBreakdown::new(action, stopped as f64, mean_wait, balance)
}
