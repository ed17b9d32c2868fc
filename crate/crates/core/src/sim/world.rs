use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::follow::safe_speed;
use super::geometry::{
    ConflictTable, ConnectorId, Lane, LaneId, PhaseId, Route, N_CONNECTORS, N_INCOMING_LANES, N_LANES,
};
use super::signal::SignalController;
use super::spawn::{eventually_positive, spawn_schedule, Arrival, FlowSchedule, FlowTable};
use super::SimError;

/// Seconds per simulation step.
pub const DT: f64 = 1.0;
/// Speed below which a vehicle counts as stopped, m/s.
pub const STOP_SPEED: f64 = 0.1;
pub const LANE_LENGTH: f64 = 300.0;
pub const COLLISION_DURATION_S: u32 = 300;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub length: f64,
    pub min_gap: f64,
    pub max_accel: f64,
    pub max_decel: f64,
    pub max_speed: f64,
}

impl VehicleSpec {
    /// 3 m long, 2 m minimum gap, 1 m/s² acceleration, 4.5 m/s² deceleration,
    /// 13.89 m/s (50 km/h) top speed.
    pub fn standard() -> Self {
        VehicleSpec {
            length: 3.0,
            min_gap: 2.0,
            max_accel: 1.0,
            max_decel: 4.5,
            max_speed: 13.89,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fields = [
            ("length", self.length),
            ("min_gap", self.min_gap),
            ("max_accel", self.max_accel),
            ("max_decel", self.max_decel),
            ("max_speed", self.max_speed),
        ];
        for (field, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SimError::InvalidSpec { field, value });
            }
        }
        Ok(())
    }

    /// Cell length of the observation grid: one vehicle plus its gap.
    pub fn cell_length(&self) -> f64 {
        self.length + self.min_gap
    }
}

impl Default for VehicleSpec {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleStatus {
    QueuedForEntry,
    OnIncoming,
    Crossing,
    OnOutgoing,
    Exited,
    Crashed,
}

impl VehicleStatus {
    pub fn label(self) -> &'static str {
        match self {
            VehicleStatus::QueuedForEntry => "queued_for_entry",
            VehicleStatus::OnIncoming => "on_incoming",
            VehicleStatus::Crossing => "crossing",
            VehicleStatus::OnOutgoing => "on_outgoing",
            VehicleStatus::Exited => "exited",
            VehicleStatus::Crashed => "crashed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "queued_for_entry" => VehicleStatus::QueuedForEntry,
            "on_incoming" => VehicleStatus::OnIncoming,
            "crossing" => VehicleStatus::Crossing,
            "on_outgoing" => VehicleStatus::OnOutgoing,
            "exited" => VehicleStatus::Exited,
            "crashed" => VehicleStatus::Crashed,
            _ => return None,
        })
    }
}

/// Where a vehicle physically is: a lane or a junction path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Link {
    Lane(LaneId),
    Connector(ConnectorId),
}

impl Link {
    fn slot(self) -> usize {
        match self {
            Link::Lane(l) => l.row(),
            Link::Connector(c) => N_LANES + c.0 as usize,
        }
    }

    pub fn lane(self) -> Option<LaneId> {
        match self {
            Link::Lane(l) => Some(l),
            Link::Connector(_) => None,
        }
    }
}

impl std::fmt::Display for Link {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Link::Lane(l) => l.fmt(f),
            Link::Connector(c) => c.fmt(f),
        }
    }
}

/// `pos` is the front bumper, in meters from the start of the current link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: u32,
    pub route: Route,
    pub link: Link,
    pub pos: f64,
    pub speed: f64,
    pub waiting_time: f64,
    pub status: VehicleStatus,
    /// Lane head allowed past the stop line during the last step.
    #[serde(skip)]
    cleared: bool,
}

impl Vehicle {
    pub fn is_stopped(&self) -> bool {
        self.speed < STOP_SPEED
    }
}

/// Adds `dt` to a stopped vehicle's waiting time, or resets it to zero once
/// the vehicle moves.
pub(crate) fn accumulate_waiting(v: &mut Vehicle, dt: f64) {
    if v.is_stopped() {
        v.waiting_time += dt;
    } else {
        v.waiting_time = 0.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionClass {
    Off,
    Incoming,
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionSetting {
    pub class: CollisionClass,
    /// Chance that a vehicle starting to cross causes a crash.
    pub probability: f64,
    pub duration_s: u32,
}

impl CollisionSetting {
    pub fn off() -> Self {
        CollisionSetting {
            class: CollisionClass::Off,
            probability: 0.0,
            duration_s: COLLISION_DURATION_S,
        }
    }

    pub fn on(class: CollisionClass, probability: f64) -> Self {
        CollisionSetting {
            class,
            probability,
            duration_s: COLLISION_DURATION_S,
        }
    }
}

impl Default for CollisionSetting {
    fn default() -> Self {
        Self::off()
    }
}

/// A stationary obstacle occupying `[pos - length, pos]` on one lane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionBlock {
    pub lane: LaneId,
    pub pos: f64,
    pub start_time: u32,
    pub duration: u32,
    pub involved: Vec<u32>,
}

impl CollisionBlock {
    pub fn end_time(&self) -> u32 {
        self.start_time + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub spec: VehicleSpec,
    pub flow: FlowTable,
    pub schedule: FlowSchedule,
    pub total_vehicles: usize,
    pub collision: CollisionSetting,
}

impl WorldConfig {
    pub fn new(spec: VehicleSpec, flow: FlowTable, total_vehicles: usize) -> Self {
        WorldConfig {
            spec,
            flow,
            schedule: FlowSchedule::constant(),
            total_vehicles,
            collision: CollisionSetting::off(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct PendingEntry {
    id: u32,
    route: Route,
}

/// Vehicle accounting; every scheduled vehicle is in exactly one bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ledger {
    pub scheduled: usize,
    pub not_arrived: usize,
    pub queued: usize,
    pub on_network: usize,
    pub crashed_on_network: usize,
    pub exited: usize,
    pub crash_removed: usize,
}

impl Ledger {
    pub fn balanced(&self) -> bool {
        self.scheduled == self.not_arrived + self.queued + self.on_network + self.exited + self.crash_removed
    }
}

/// One line of the per-step trajectory dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: u32,
    pub vehicle_id: u32,
    pub link: String,
    pub pos: f64,
    pub speed: f64,
    pub waiting_time: f64,
    pub status: VehicleStatus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ObstacleKind {
    Vehicle { crashed: bool },
    Block,
    StopLine,
}

#[derive(Debug, Clone, Copy)]
struct Obstacle {
    gap: f64,
    speed: f64,
    kind: ObstacleKind,
}

/// Vehicles per link, front-most first.
struct LinkIndex {
    order: Vec<Vec<usize>>,
    rank: Vec<usize>,
}

impl LinkIndex {
    fn build(vehicles: &[Vehicle]) -> Self {
        let mut order = vec![Vec::new(); N_LANES + N_CONNECTORS];
        for (i, v) in vehicles.iter().enumerate().filter(|(_, v)| v.status != VehicleStatus::Exited) {
            order[v.link.slot()].push(i);
        }
        let mut rank = vec![0; vehicles.len()];
        for list in &mut order {
            list.sort_by(|&a, &b| {
                vehicles[b]
                    .pos
                    .total_cmp(&vehicles[a].pos)
                    .then(vehicles[a].id.cmp(&vehicles[b].id))
            });
            for (r, &i) in list.iter().enumerate() {
                rank[i] = r;
            }
        }
        LinkIndex { order, rank }
    }

    fn ahead(&self, i: usize, link: Link) -> Option<usize> {
        let r = self.rank[i];
        (r > 0).then(|| self.order[link.slot()][r - 1])
    }

    fn tail(&self, link: Link) -> Option<usize> {
        self.order[link.slot()].last().copied()
    }
}

/// Deterministic discrete-time simulation of one intersection episode.
#[derive(Debug, Clone)]
pub struct SimWorld {
    clock: u32,
    spec: VehicleSpec,
    lanes: Vec<Lane>,
    vehicles: Vec<Vehicle>,
    controller: SignalController,
    schedule: Vec<Arrival>,
    next_arrival: usize,
    entry_queues: Vec<VecDeque<PendingEntry>>,
    blocks: Vec<CollisionBlock>,
    rng: ChaCha8Rng,
    total_spawn_target: usize,
    collision: CollisionSetting,
    conflicts: ConflictTable,
    entered: usize,
    exited: usize,
    crash_removed: usize,
    total_waiting_time: f64,
}

impl SimWorld {
    pub fn build(config: &WorldConfig, seed: u64) -> Result<SimWorld, SimError> {
        config.spec.validate()?;
        config.flow.validate()?;
        config.schedule.validate()?;
        let p = config.collision.probability;
        if !(0.0..=1.0).contains(&p) {
            return Err(SimError::InvalidProbability(p));
        }
        if config.total_vehicles > 0 && !eventually_positive(&config.flow, &config.schedule) {
            return Err(SimError::NoFlow);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schedule = spawn_schedule(&config.flow, &config.schedule, config.total_vehicles, &mut rng);
        debug_assert_eq!(schedule.len(), config.total_vehicles);
        Ok(SimWorld {
            clock: 0,
            spec: config.spec,
            lanes: LaneId::all().map(|id| Lane { id, length: LANE_LENGTH }).collect(),
            vehicles: Vec::new(),
            controller: SignalController::new(PhaseId(0)),
            total_spawn_target: schedule.len(),
            schedule,
            next_arrival: 0,
            entry_queues: vec![VecDeque::new(); N_INCOMING_LANES],
            blocks: Vec::new(),
            rng,
            collision: config.collision,
            conflicts: ConflictTable::new(),
            entered: 0,
            exited: 0,
            crash_removed: 0,
            total_waiting_time: 0.0,
        })
    }

    pub fn clock(&self) -> u32 {
        self.clock
    }

    pub fn spec(&self) -> &VehicleSpec {
        &self.spec
    }

    pub fn lanes(&self) -> &[Lane] {
        &self.lanes
    }

    pub fn lane_length(&self) -> f64 {
        LANE_LENGTH
    }

    /// Vehicles currently on the network, including crashed ones.
    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn controller(&self) -> &SignalController {
        &self.controller
    }

    pub fn blocks(&self) -> &[CollisionBlock] {
        &self.blocks
    }

    pub fn schedule(&self) -> &[Arrival] {
        &self.schedule
    }

    pub fn total_spawn_target(&self) -> usize {
        self.total_spawn_target
    }

    /// Vehicle-seconds spent stopped on the network by non-crashed vehicles.
    pub fn total_waiting_time(&self) -> f64 {
        self.total_waiting_time
    }

    pub fn switch_count(&self) -> u32 {
        self.controller.switch_count()
    }

    pub fn queued(&self) -> usize {
        self.entry_queues.iter().map(VecDeque::len).sum()
    }

    pub fn ledger(&self) -> Ledger {
        Ledger {
            scheduled: self.schedule.len(),
            not_arrived: self.schedule.len() - self.next_arrival,
            queued: self.queued(),
            on_network: self.vehicles.len(),
            crashed_on_network: self.vehicles.iter().filter(|v| v.status == VehicleStatus::Crashed).count(),
            exited: self.exited,
            crash_removed: self.crash_removed,
        }
    }

    /// Every scheduled vehicle has entered and every non-crashed one has left.
    pub fn episode_done(&self) -> bool {
        self.next_arrival == self.schedule.len()
            && self.queued() == 0
            && self.vehicles.iter().all(|v| v.status == VehicleStatus::Crashed)
    }

    pub fn apply_phase_command(&mut self, target: PhaseId, green_interval: u32) -> Result<(), SimError> {
        self.controller.apply(target, green_interval)
    }

    /// Path of a route as `(link, start offset)` for the incoming lane, the
    /// junction path and the outgoing lane.
    fn path(&self, route: Route) -> [(Link, f64); 3] {
        let c = route.connector();
        [
            (Link::Lane(route.incoming_lane()), 0.0),
            (Link::Connector(c), LANE_LENGTH),
            (Link::Lane(route.outgoing_lane()), LANE_LENGTH + c.length()),
        ]
    }

    fn segment_of(v: &Vehicle) -> usize {
        match v.status {
            VehicleStatus::OnIncoming => 0,
            VehicleStatus::Crossing => 1,
            VehicleStatus::OnOutgoing => 2,
            VehicleStatus::Crashed => match v.link {
                Link::Lane(l) if l.is_incoming() => 0,
                Link::Connector(_) => 1,
                Link::Lane(_) => 2,
            },
            VehicleStatus::QueuedForEntry | VehicleStatus::Exited => unreachable!("not on network"),
        }
    }

    /// Nearest block on `lane` whose rear lies beyond `from` (exclusive).
    fn block_ahead(&self, lane: LaneId, from: Option<f64>) -> Option<f64> {
        self.blocks
            .iter()
            .filter(|b| b.lane == lane)
            .map(|b| b.pos - self.spec.length)
            .filter(|&rear| from.is_none_or(|f| rear > f - EPS))
            .min_by(f64::total_cmp)
    }

    fn vehicle_obstacle(&self, j: usize, rear_path: f64, my_path: f64) -> Obstacle {
        let u = &self.vehicles[j];
        Obstacle {
            gap: rear_path - my_path - self.spec.min_gap,
            speed: u.speed,
            kind: ObstacleKind::Vehicle {
                crashed: u.status == VehicleStatus::Crashed,
            },
        }
    }

    /// Nearest obstacle on the vehicle's own link.
    fn obstacle_on_own_link(&self, i: usize, idx: &LinkIndex) -> Option<Obstacle> {
        let v = &self.vehicles[i];
        let seg = Self::segment_of(v);
        let (_, offset) = self.path(v.route)[seg];
        let my = offset + v.pos;
        let leader = idx
            .ahead(i, v.link)
            .map(|j| self.vehicle_obstacle(j, offset + self.vehicles[j].pos - self.spec.length, my));
        let block = v.link.lane().and_then(|l| self.block_ahead(l, Some(v.pos))).map(|rear| Obstacle {
            gap: offset + rear - my - self.spec.min_gap,
            speed: 0.0,
            kind: ObstacleKind::Block,
        });
        match (leader, block) {
            (Some(a), Some(b)) => Some(if a.gap <= b.gap { a } else { b }),
            (a, b) => a.or(b),
        }
    }

    /// First obstacle along the vehicle's path. An uncleared lane head treats
    /// the stop line as a wall.
    fn obstacle_ahead(&self, i: usize, idx: &LinkIndex, cleared: bool) -> Option<Obstacle> {
        let Some(own) = self.obstacle_on_own_link(i, idx) else {
            return self.obstacle_past_link(i, idx, cleared);
        };
        // A lane leader bound for another connector hides what waits on this
        // vehicle's own path past the line.
        let v = &self.vehicles[i];
        let diverging = v.status == VehicleStatus::OnIncoming
            && matches!(own.kind, ObstacleKind::Vehicle { .. })
            && idx.ahead(i, v.link).is_some_and(|j| self.vehicles[j].route.connector() != v.route.connector());
        if diverging {
            if let Some(hidden) = self.obstacle_past_link(i, idx, true) {
                if self.safe(&hidden) < self.safe(&own) {
                    return Some(hidden);
                }
            }
        }
        Some(own)
    }

    /// First obstacle beyond the vehicle's current link.
    fn obstacle_past_link(&self, i: usize, idx: &LinkIndex, cleared: bool) -> Option<Obstacle> {
        let v = &self.vehicles[i];
        let seg = Self::segment_of(v);
        let path = self.path(v.route);
        let my = path[seg].1 + v.pos;
        for (k, &(link, offset)) in path.iter().enumerate().skip(seg + 1) {
            if k == 1 && !cleared {
                return Some(Obstacle {
                    gap: LANE_LENGTH - v.pos,
                    speed: 0.0,
                    kind: ObstacleKind::StopLine,
                });
            }
            let tail = idx
                .tail(link)
                .map(|j| self.vehicle_obstacle(j, offset + self.vehicles[j].pos - self.spec.length, my));
            let block = link.lane().and_then(|l| self.block_ahead(l, None)).map(|rear| Obstacle {
                gap: offset + rear - my - self.spec.min_gap,
                speed: 0.0,
                kind: ObstacleKind::Block,
            });
            let nearest = match (tail, block) {
                (Some(a), Some(b)) => Some(if a.gap <= b.gap { a } else { b }),
                (a, b) => a.or(b),
            };
            if nearest.is_some() {
                return nearest;
            }
        }
        None
    }

    fn safe(&self, o: &Obstacle) -> f64 {
        safe_speed(o.gap, o.speed, self.spec.max_decel, DT)
    }

    fn is_lane_head(&self, i: usize, idx: &LinkIndex) -> bool {
        self.vehicles[i].status == VehicleStatus::OnIncoming && self.obstacle_on_own_link(i, idx).is_none()
    }

    /// Advances the world by one second.
    pub fn step(&mut self) {
        let idx = LinkIndex::build(&self.vehicles);
        let greens = self.controller.greens();
        let mut occupied = [false; N_CONNECTORS];
        for v in &self.vehicles {
            if let Link::Connector(c) = v.link {
                occupied[c.0 as usize] = true;
            }
        }

        // Speeds from the current state; lane heads claim junction paths in
        // link order, so simultaneous conflicting entries resolve first come,
        // first served.
        let n = self.vehicles.len();
        let mut new_speed = vec![0.0; n];
        let mut cleared = vec![false; n];
        let order: Vec<usize> = idx.order.iter().flatten().copied().collect();
        for &i in &order {
            let v = &self.vehicles[i];
            if v.status == VehicleStatus::Crashed {
                continue;
            }
            let reach = (v.speed + self.spec.max_accel * DT).min(self.spec.max_speed);
            let floor = v.speed - self.spec.max_decel * DT;
            let head = self.is_lane_head(i, &idx);
            let mut go = false;
            if head {
                let c = v.route.connector();
                let free = !ConnectorId::all().any(|o| occupied[o.0 as usize] && self.conflicts.conflicts(c, o));
                go = greens[v.route.signal()] && free;
                if !go {
                    let stop = Obstacle {
                        gap: LANE_LENGTH - v.pos,
                        speed: 0.0,
                        kind: ObstacleKind::StopLine,
                    };
                    // cannot stop in time: proceed through the line
                    go = self.safe(&stop) < floor - EPS;
                }
            }
            let mut limit = self.obstacle_ahead(i, &idx, go).map_or(f64::INFINITY, |o| self.safe(&o));
            if head && go && limit < floor - EPS {
                // a fresh obstacle just past the line: hold at the line if that is still possible
                let hold = self.obstacle_ahead(i, &idx, false).map_or(f64::INFINITY, |o| self.safe(&o));
                if hold >= floor - EPS {
                    go = false;
                    limit = hold;
                }
            }
            let s = reach.min(limit).max(0.0);
            if head && go && v.pos + s * DT > LANE_LENGTH {
                occupied[v.route.connector().0 as usize] = true;
            }
            new_speed[i] = s;
            cleared[i] = go;
        }

        // Move and hand vehicles over between links.
        let mut crossings = Vec::new();
        let mut exited = Vec::new();
        for i in 0..n {
            let v = &mut self.vehicles[i];
            v.cleared = cleared[i];
            if v.status == VehicleStatus::Crashed {
                continue;
            }
            v.speed = new_speed[i];
            v.pos += v.speed * DT;
            loop {
                let len = match v.link {
                    Link::Lane(_) => LANE_LENGTH,
                    Link::Connector(c) => c.length(),
                };
                match v.status {
                    VehicleStatus::OnIncoming if v.pos > len && v.cleared => {
                        v.pos -= len;
                        v.link = Link::Connector(v.route.connector());
                        v.status = VehicleStatus::Crossing;
                        crossings.push(i);
                    }
                    VehicleStatus::OnIncoming => {
                        v.pos = v.pos.min(len);
                        break;
                    }
                    VehicleStatus::Crossing if v.pos > len => {
                        v.pos -= len;
                        v.link = Link::Lane(v.route.outgoing_lane());
                        v.status = VehicleStatus::OnOutgoing;
                    }
                    VehicleStatus::OnOutgoing if v.pos > len => {
                        v.status = VehicleStatus::Exited;
                        exited.push(i);
                        break;
                    }
                    _ => break,
                }
            }
        }

        for &i in &crossings {
            if self.collision.class == CollisionClass::Off {
                break;
            }
            if self.vehicles[i].status == VehicleStatus::Crashed {
                continue;
            }
            let p = self.collision.probability;
            let _ = self.inject_collision(p);
        }

        self.exited += exited.len();
        self.vehicles.retain(|v| v.status != VehicleStatus::Exited);

        for v in &mut self.vehicles {
            accumulate_waiting(v, DT);
            if v.is_stopped() && v.status != VehicleStatus::Crashed {
                self.total_waiting_time += DT;
            }
        }

        let now = self.clock + 1;
        self.admit_arrivals(now as f64);
        self.controller.tick();
        self.clock = now;
        self.expire_blocks();
    }

    /// Rolls a crash with probability `probability`; on success a block is
    /// placed at a random position of a random lane of the configured road
    /// class. Vehicles overlapping the block, or unable to stop behind it or
    /// behind another crashed vehicle, crash too.
    pub fn inject_collision(&mut self, probability: f64) -> Option<CollisionBlock> {
        let class = self.collision.class;
        if class == CollisionClass::Off || !(self.rng.random::<f64>() < probability) {
            return None;
        }
        let lanes: Vec<LaneId> = match class {
            CollisionClass::Incoming => LaneId::incoming().collect(),
            CollisionClass::Outgoing => LaneId::outgoing().collect(),
            CollisionClass::Off => unreachable!(),
        };
        let lane = lanes[self.rng.random_range(0..lanes.len())];
        let pos = self.rng.random_range(self.spec.length..=LANE_LENGTH);
        Some(self.place_block(lane, pos))
    }

    /// Places a block with its front at `pos` on `lane`.
    pub fn place_block(&mut self, lane: LaneId, pos: f64) -> CollisionBlock {
        let rear = pos - self.spec.length;
        let mut involved = Vec::new();
        for v in &mut self.vehicles {
            if v.link == Link::Lane(lane)
                && !matches!(v.status, VehicleStatus::Crashed | VehicleStatus::Exited)
                && v.pos > rear
                && v.pos - self.spec.length < pos
            {
                v.status = VehicleStatus::Crashed;
                v.speed = 0.0;
                involved.push(v.id);
            }
        }
        self.blocks.push(CollisionBlock {
            lane,
            pos,
            start_time: self.clock,
            duration: self.collision.duration_s,
            involved: Vec::new(),
        });

        // chain reaction behind stationary obstacles
        loop {
            let idx = LinkIndex::build(&self.vehicles);
            let mut hit = Vec::new();
            for i in 0..self.vehicles.len() {
                let v = &self.vehicles[i];
                if matches!(v.status, VehicleStatus::Crashed | VehicleStatus::Exited) {
                    continue;
                }
                let Some(o) = self.obstacle_ahead(i, &idx, v.cleared) else { continue };
                let stationary = matches!(o.kind, ObstacleKind::Block | ObstacleKind::Vehicle { crashed: true });
                if stationary && self.safe(&o) < v.speed - self.spec.max_decel * DT - EPS {
                    hit.push(i);
                }
            }
            if hit.is_empty() {
                break;
            }
            for i in hit {
                let v = &mut self.vehicles[i];
                v.status = VehicleStatus::Crashed;
                v.speed = 0.0;
                involved.push(v.id);
            }
        }
        let block = self.blocks.last_mut().expect("just pushed");
        block.involved = involved;
        block.clone()
    }

    fn expire_blocks(&mut self) {
        let now = self.clock;
        let (done, keep): (Vec<_>, Vec<_>) = self.blocks.drain(..).partition(|b| b.end_time() <= now);
        self.blocks = keep;
        for b in done {
            let before = self.vehicles.len();
            self.vehicles
                .retain(|v| !(v.status == VehicleStatus::Crashed && b.involved.contains(&v.id)));
            self.crash_removed += before - self.vehicles.len();
        }
    }

    fn admit_arrivals(&mut self, now: f64) {
        while self.next_arrival < self.schedule.len() && self.schedule[self.next_arrival].time <= now {
            let a = self.schedule[self.next_arrival];
            let slot = a.route.incoming_lane().incoming_slot().expect("incoming lane");
            self.entry_queues[slot].push_back(PendingEntry {
                id: self.next_arrival as u32,
                route: a.route,
            });
            self.next_arrival += 1;
        }
        for lane in LaneId::incoming() {
            let slot = lane.incoming_slot().expect("incoming lane");
            let Some(front) = self.entry_queues[slot].front() else { continue };
            let Some(speed) = self.entry_speed(lane) else { continue };
            let entry = front.clone();
            self.entry_queues[slot].pop_front();
            self.entered += 1;
            self.vehicles.push(Vehicle {
                id: entry.id,
                route: entry.route,
                link: Link::Lane(lane),
                pos: self.spec.length,
                speed,
                waiting_time: 0.0,
                status: VehicleStatus::OnIncoming,
                cleared: false,
            });
        }
    }

    /// Insertion speed for a vehicle whose rear sits at the lane start, or
    /// `None` if there is no room.
    fn entry_speed(&self, lane: LaneId) -> Option<f64> {
        let front = self.spec.length;
        let tail = self
            .vehicles
            .iter()
            .filter(|v| v.link == Link::Lane(lane))
            .min_by(|a, b| a.pos.total_cmp(&b.pos))
            .map(|v| (v.pos - self.spec.length, v.speed));
        let block = self.block_ahead(lane, None).map(|rear| (rear, 0.0));
        let obstacle = match (tail, block) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        let o = match obstacle {
            Some((rear, speed)) => {
                let gap = rear - front - self.spec.min_gap;
                if gap < 0.0 {
                    return None;
                }
                Obstacle { gap, speed, kind: ObstacleKind::Vehicle { crashed: false } }
            }
            None => Obstacle {
                gap: LANE_LENGTH - front,
                speed: 0.0,
                kind: ObstacleKind::StopLine,
            },
        };
        Some(self.safe(&o).min(self.spec.max_speed))
    }

    /// Current vehicle states as dump records.
    pub fn trajectory_records(&self) -> Vec<TrajectoryRecord> {
        self.vehicles
            .iter()
            .map(|v| TrajectoryRecord {
                t: self.clock,
                vehicle_id: v.id,
                link: v.link.to_string(),
                pos: v.pos,
                speed: v.speed,
                waiting_time: v.waiting_time,
                status: v.status,
            })
            .collect()
    }

    /// Places a vehicle directly on a lane. Intended for constructing test
    /// and probe worlds; skips the arrival schedule.
    pub fn insert_vehicle(&mut self, route: Route, link: Link, pos: f64, speed: f64) -> u32 {
        let id = (self.schedule.len() + self.vehicles.len() + self.exited + self.crash_removed) as u32 + 1_000_000;
        let status = match link {
            Link::Lane(l) if l.is_incoming() => VehicleStatus::OnIncoming,
            Link::Connector(_) => VehicleStatus::Crossing,
            Link::Lane(_) => VehicleStatus::OnOutgoing,
        };
        self.vehicles.push(Vehicle {
            id,
            route,
            link,
            pos,
            speed,
            waiting_time: 0.0,
            status,
            cleared: false,
        });
        id
    }

    pub fn vehicle_mut(&mut self, id: u32) -> Option<&mut Vehicle> {
        self.vehicles.iter_mut().find(|v| v.id == id)
    }

    pub fn vehicle(&self, id: u32) -> Option<&Vehicle> {
        self.vehicles.iter().find(|v| v.id == id)
    }
}
