//! Shared simulator fuzzing helpers.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use greenwave::rl::{ActionSpace, IntervalMode};
use greenwave::scenario::{Scale, ScenarioConfig};
use greenwave::sim::{SimWorld, VehicleStatus, DT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-6;

/// Everything observed over one fuzz run.
#[derive(Debug, Default)]
pub struct FuzzReport {
    pub steps: usize,
    pub max_vehicles: usize,
    pub crashes: usize,
    pub violations: Vec<String>,
    /// Debug rendering of the final vehicle set, for determinism checks.
    pub fingerprint: String,
}

/// Ledger balance, non-overlap on every lane and connector, speed bounds and
/// the braking limit between consecutive steps.
pub fn check_step(world: &SimWorld, prev_speed: &HashMap<u32, f64>) -> Vec<String> {
    let mut out = Vec::new();
    let t = world.clock();
    let ledger = world.ledger();
    if !ledger.balanced() {
        out.push(format!("t={t}: ledger out of balance {ledger:?}"));
    }
    let spec = world.spec();
    let mut per_link: HashMap<String, Vec<(f64, u32)>> = HashMap::new();
    for v in world.vehicles() {
        if v.status == VehicleStatus::Exited || v.status == VehicleStatus::QueuedForEntry {
            out.push(format!("t={t}: vehicle {} listed with status {:?}", v.id, v.status));
        }
        if !(v.speed >= -EPS && v.speed <= spec.max_speed + EPS) {
            out.push(format!("t={t}: vehicle {} speed {}", v.id, v.speed));
        }
        if let Some(&before) = prev_speed.get(&v.id) {
            if v.status != VehicleStatus::Crashed && before - v.speed > spec.max_decel * DT + EPS {
                out.push(format!("t={t}: vehicle {} braked {before} -> {}", v.id, v.speed));
            }
        }
        per_link.entry(v.link.to_string()).or_default().push((v.pos, v.id));
    }
    for (link, mut list) in per_link {
        list.sort_by(|a, b| b.0.total_cmp(&a.0));
        for w in list.windows(2) {
            let (lead, follow) = (w[0], w[1]);
            if lead.0 - spec.length < follow.0 - EPS {
                out.push(format!("t={t}: vehicles {} and {} overlap on {link}", lead.1, follow.1));
            }
        }
    }
    out
}

pub fn preset(name: &str, scale: Scale) -> ScenarioConfig {
    ScenarioConfig::preset(name, scale, IntervalMode::Variable).unwrap()
}

/// Runs up to `steps` seconds under uniformly random decisions.
pub fn fuzz_run(scenario: &ScenarioConfig, seed: u64, steps: usize) -> FuzzReport {
    let mut world = SimWorld::build(&scenario.world_config(), seed).unwrap();
    let space = ActionSpace::new(scenario.interval_mode);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(7));
    let mut report = FuzzReport::default();
    let mut prev: HashMap<u32, f64> = HashMap::new();
    let mut blocks = HashSet::new();
    while report.steps < steps && !world.episode_done() {
        if world.controller().at_decision_point() {
            let (phase, interval) = space.decode(rng.random_range(0..space.n_actions())).unwrap();
            world.apply_phase_command(phase, interval).unwrap();
        }
        world.step();
        report.steps += 1;
        report.violations.extend(check_step(&world, &prev));
        report.max_vehicles = report.max_vehicles.max(world.vehicles().len());
        for b in world.blocks() {
            blocks.insert((b.lane.to_string(), b.start_time, b.pos.to_bits()));
        }
        report.crashes = blocks.len();
        prev = world.vehicles().iter().map(|v| (v.id, v.speed)).collect();
    }
    report.fingerprint = format!("{} {:?} {:?}", world.clock(), world.ledger(), world.trajectory_records());
    report
}
