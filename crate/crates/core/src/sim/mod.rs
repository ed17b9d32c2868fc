//! Discrete-time microscopic simulator of a single four-way intersection.

pub mod follow;
pub mod geometry;
pub mod signal;
pub mod spawn;
mod world;

use thiserror::Error;

pub use geometry::{
    Approach, ConflictTable, ConnectorId, Direction, Lane, LaneId, LaneIndex, Movement, PhaseId, Route,
    N_INCOMING_LANES, N_LANES, N_PHASES, N_SIGNALS,
};
pub use signal::{SignalController, SignalMode, EXTENSION_S, TRANSITION_S};
pub use spawn::{spawn_schedule, Arrival, FlowSchedule, FlowSegment, FlowTable};
pub use world::{
    CollisionBlock, CollisionClass, CollisionSetting, Ledger, Link, SimWorld, TrajectoryRecord, Vehicle,
    VehicleSpec, VehicleStatus, WorldConfig, COLLISION_DURATION_S, DT, LANE_LENGTH, STOP_SPEED,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("vehicle spec field `{field}` must be positive and finite, got {value}")]
    InvalidSpec { field: &'static str, value: f64 },
    #[error("flow rate for {route} must be non-negative, got {rate}")]
    InvalidRate { route: String, rate: f64 },
    #[error("invalid flow schedule: {0}")]
    InvalidSchedule(String),
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("vehicles requested but every flow rate is zero")]
    NoFlow,
    #[error("signal controller is mid-interval ({remaining} s remaining)")]
    ControllerBusy { remaining: u32 },
}
