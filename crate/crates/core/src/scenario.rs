//! Traffic scenarios, the fixed-cycle baseline and policy evaluation.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{HeadKind, Network};
use crate::rl::env::{EpisodeSummary, Env};
use crate::rl::{features, greedy_action, ActionSpace, IntervalMode, FIXED_INTERVAL};
use crate::sim::{
    CollisionClass, CollisionSetting, FlowSchedule, FlowSegment, FlowTable, PhaseId, SimError, SimWorld,
    VehicleSpec, WorldConfig, N_PHASES,
};
use crate::state::StateTensor;

pub const PRESETS: [&str; 5] = ["balanced", "collision-in", "collision-out", "malfunction", "unbalanced"];
pub const COLLISION_PROBABILITY: f64 = 0.02;
pub const MALFUNCTION_PROBABILITY: f64 = 0.1;
pub const SWEEP_PROBABILITIES: [f64; 7] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("unknown scenario preset `{0}` (expected one of balanced, collision-in, collision-out, malfunction, unbalanced)")]
    UnknownPreset(String),
    #[error("{field} must lie in [0, 1], got {value}")]
    Probability { field: &'static str, value: f64 },
    #[error("watchdog must be positive")]
    Watchdog,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Experiment size: vehicles per episode, training episodes and watchdog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Desk,
    Paper,
}

impl Scale {
    pub fn total_vehicles(self) -> usize {
        match self {
            Scale::Desk => 200,
            Scale::Paper => 808,
        }
    }

    pub fn episodes(self) -> usize {
        match self {
            Scale::Desk => 150,
            Scale::Paper => 600,
        }
    }

    pub fn watchdog_s(self) -> u32 {
        match self {
            Scale::Desk => 5_000,
            Scale::Paper => 10_000,
        }
    }
}

/// How "reduced by three-fourths" is read for the unbalanced schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Rates multiplied by 0.25.
    ByThreeQuarters,
    /// Rates multiplied by 0.75.
    ToThreeQuarters,
}

impl Reduction {
    pub fn factor(self) -> f64 {
        match self {
            Reduction::ByThreeQuarters => 0.25,
            Reduction::ToThreeQuarters => 0.75,
        }
    }
}

/// 500 s of balanced flow, 500 s with the east approach reduced, then the
/// east approach at full rate and the others reduced from 1000 s on.
pub fn unbalanced_schedule(reduction: Reduction) -> FlowSchedule {
    let f = reduction.factor();
    FlowSchedule {
        segments: vec![
            FlowSegment { start_s: 0.0, duration_s: 500.0, multipliers: [1.0; 4] },
            FlowSegment { start_s: 500.0, duration_s: 500.0, multipliers: [1.0, 1.0, f, 1.0] },
            FlowSegment { start_s: 1000.0, duration_s: 500.0, multipliers: [f, f, 1.0, f] },
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub vehicle: VehicleSpec,
    pub flow: FlowTable,
    pub schedule: FlowSchedule,
    pub total_vehicles: usize,
    pub collision: CollisionSetting,
    /// Chance that a decision is replaced by a random other phase.
    pub action_disturbance: f64,
    pub interval_mode: IntervalMode,
    pub watchdog_s: u32,
}

impl ScenarioConfig {
    pub fn preset(name: &str, scale: Scale, mode: IntervalMode) -> Result<Self, ScenarioError> {
        let mut s = ScenarioConfig {
            name: name.to_string(),
            vehicle: VehicleSpec::standard(),
            flow: FlowTable::standard(),
            schedule: FlowSchedule::constant(),
            total_vehicles: scale.total_vehicles(),
            collision: CollisionSetting::off(),
            action_disturbance: 0.0,
            interval_mode: mode,
            watchdog_s: scale.watchdog_s(),
        };
        match name {
            "balanced" => {}
            "collision-in" => s.collision = CollisionSetting::on(CollisionClass::Incoming, COLLISION_PROBABILITY),
            "collision-out" => s.collision = CollisionSetting::on(CollisionClass::Outgoing, COLLISION_PROBABILITY),
            "malfunction" => s.action_disturbance = MALFUNCTION_PROBABILITY,
            "unbalanced" => s.schedule = unbalanced_schedule(Reduction::ByThreeQuarters),
            other => return Err(ScenarioError::UnknownPreset(other.to_string())),
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (field, value) in [
            ("action_disturbance", self.action_disturbance),
            ("collision.probability", self.collision.probability),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ScenarioError::Probability { field, value });
            }
        }
        if self.watchdog_s == 0 {
            return Err(ScenarioError::Watchdog);
        }
        self.vehicle.validate()?;
        self.flow.validate()?;
        self.schedule.validate()?;
        Ok(())
    }

    pub fn world_config(&self) -> WorldConfig {
        WorldConfig {
            spec: self.vehicle,
            flow: self.flow,
            schedule: self.schedule.clone(),
            total_vehicles: self.total_vehicles,
            collision: self.collision,
        }
    }

    pub fn action_space(&self) -> ActionSpace {
        ActionSpace::new(self.interval_mode)
    }
}

/// With probability `p`, replaces the chosen phase by a uniformly random
/// different one, keeping the chosen green interval.
pub fn disturb_action<R: Rng>(space: ActionSpace, chosen: usize, p: f64, rng: &mut R) -> usize {
    if !(p > 0.0 && rng.random::<f64>() < p) {
        return chosen;
    }
    let (phase, interval) = space.decode(chosen).expect("chosen action outside the action space");
    let mut other = rng.random_range(0..N_PHASES - 1) as u8;
    if other >= phase.0 {
        other += 1;
    }
    space.encode(PhaseId(other), interval).expect("interval preserved")
}

/// Anything that picks an action at a decision point.
pub trait Controller {
    fn name(&self) -> String;
    fn decide(&mut self, state: &StateTensor, world: &SimWorld) -> usize;
}

/// Loops through all eight phases in order with 10 s greens.
#[derive(Debug, Clone, Copy)]
pub struct PredefinedController {
    pub space: ActionSpace,
}

impl PredefinedController {
    pub fn new(mode: IntervalMode) -> Self {
        PredefinedController { space: ActionSpace::new(mode) }
    }
}

impl Controller for PredefinedController {
    fn name(&self) -> String {
        "predefined".into()
    }

    fn decide(&mut self, _state: &StateTensor, world: &SimWorld) -> usize {
        let next = world.controller().current_phase().next();
        self.space.encode(next, FIXED_INTERVAL).expect("fixed interval is in every action space")
    }
}

/// Greedy controller over a trained network: highest Q-value, or the most
/// probable action of a policy head.
#[derive(Debug, Clone)]
pub struct NetworkController {
    pub label: String,
    pub net: Network<f32>,
}

impl NetworkController {
    pub fn new(label: impl Into<String>, net: Network<f32>) -> Self {
        assert!(net.spec.head != HeadKind::Value, "a value network cannot pick actions");
        NetworkController { label: label.into(), net }
    }
}

impl Controller for NetworkController {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn decide(&mut self, state: &StateTensor, world: &SimWorld) -> usize {
        let (img, side) = features(&[state], world.spec().max_speed);
        greedy_action(&self.net.forward(&img, &side, 1).output)
    }
}

/// Plays one episode. `observer` sees the world after every simulated
/// second.
pub fn run_episode(
    controller: &mut dyn Controller,
    scenario: &ScenarioConfig,
    seed: u64,
    mut observer: Option<&mut dyn FnMut(&SimWorld)>,
) -> Result<EpisodeSummary, ScenarioError> {
    scenario.validate()?;
    let mut env = Env::new(scenario, seed)?;
    if let Some(obs) = observer.as_mut() {
        obs(env.world());
    }
    while !env.is_done() {
        let state = env.observe();
        let action = controller.decide(&state, env.world());
        match observer.as_mut() {
            Some(obs) => env.step_observed(action, &mut **obs),
            None => env.step(action),
        };
    }
    Ok(env.summary())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub seed: u64,
    pub passing_time_s: f64,
    pub waiting_time_s: f64,
    pub switches: f64,
    pub reward: f64,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub policy: String,
    pub scenario: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_passing_time_s: f64,
    pub mean_waiting_time_s: f64,
    pub mean_switches: f64,
    pub mean_reward: f64,
    /// Standard error of the mean passing time.
    pub passing_time_se: f64,
    pub rows: Vec<RunRow>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

impl MetricsReport {
    pub fn from_rows(policy: String, scenario: String, rows: Vec<RunRow>) -> Self {
        let n = rows.len();
        let mp = mean(rows.iter().map(|r| r.passing_time_s));
        let se = if n > 1 {
            let var = rows.iter().map(|r| (r.passing_time_s - mp).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        MetricsReport {
            policy,
            scenario,
            runs: n,
            failures: rows.iter().filter(|r| r.timed_out).count(),
            mean_passing_time_s: mp,
            mean_waiting_time_s: mean(rows.iter().map(|r| r.waiting_time_s)),
            mean_switches: mean(rows.iter().map(|r| r.switches)),
            mean_reward: mean(rows.iter().map(|r| r.reward)),
            passing_time_se: se,
            rows,
        }
    }

    pub const SUMMARY_HEADER: &'static str =
        "policy,scenario,runs,failures,passing_time_s,passing_time_se,waiting_time_s,switches,reward";

    pub fn summary_line(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3}",
            self.policy,
            self.scenario,
            self.runs,
            self.failures,
            self.mean_passing_time_s,
            self.passing_time_se,
            self.mean_waiting_time_s,
            self.mean_switches,
            self.mean_reward
        )
    }

    /// Per-run rows as CSV.
    pub fn rows_table(&self) -> String {
        let mut out = String::from("seed,passing_time_s,waiting_time_s,switches,reward,status\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.3},{},{:.3},{}",
                r.seed,
                r.passing_time_s,
                r.waiting_time_s,
                r.switches,
                r.reward,
                if r.timed_out { "watchdog" } else { "ok" }
            );
        }
        out
    }
}

/// Runs one episode per seed and averages the results.
pub fn evaluate_policy(
    controller: &mut dyn Controller,
    scenario: &ScenarioConfig,
    seeds: &[u64],
) -> Result<MetricsReport, ScenarioError> {
    let mut rows = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let s = run_episode(controller, scenario, seed, None)?;
        rows.push(RunRow {
            seed,
            passing_time_s: s.passing_time_s as f64,
            waiting_time_s: s.waiting_time_s,
            switches: s.switches as f64,
            reward: s.reward,
            timed_out: s.timed_out,
        });
    }
    Ok(MetricsReport::from_rows(controller.name(), scenario.name.clone(), rows))
}

/// Seeds `base, base + 1, ...`.
pub fn seed_range(base: u64, runs: usize) -> Vec<u64> {
    (0..runs as u64).map(|i| base.wrapping_add(i)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub probability: f64,
    pub report: MetricsReport,
}

/// Evaluates the controller under each action-disturbance probability.
pub fn malfunction_sweep(
    controller: &mut dyn Controller,
    base: &ScenarioConfig,
    probabilities: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepPoint>, ScenarioError> {
    probabilities
        .iter()
        .map(|&p| {
            let mut s = base.clone();
            s.action_disturbance = p;
            s.name = format!("{}@{p}", base.name);
            evaluate_policy(controller, &s, seeds).map(|report| SweepPoint { probability: p, report })
        })
        .collect()
}

pub const SWEEP_HEADER: &str = "probability,runs,failures,passing_time_s,passing_time_se,waiting_time_s,switches,reward";

pub fn sweep_table(points: &[SweepPoint]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for p in points {
        let r = &p.report;
        let _ = writeln!(
            out,
            "{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3}",
            p.probability,
            r.runs,
            r.failures,
            r.mean_passing_time_s,
            r.passing_time_se,
            r.mean_waiting_time_s,
            r.mean_switches,
            r.mean_reward
        );
    }
    out
}
