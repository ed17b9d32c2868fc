//! Static layout of the four-way intersection.
//!
//! Every road has three incoming and three outgoing lanes of equal length.
//! Lanes are indexed row-major as `approach × direction × index`, which is
//! also the row order of the observation grids:
//! `N_in_outer, N_in_middle, N_in_inner, N_out_outer, …, W_out_inner`.
//!
//! Traffic drives on the right. A vehicle from the north approach travels
//! southbound, so its right turn exits on the west road and its left turn on
//! the east road.

use serde::{Deserialize, Serialize};
use std::fmt;

pub const N_APPROACHES: usize = 4;
pub const LANES_PER_ROAD: usize = 3;
pub const N_LANES: usize = 24;
pub const N_INCOMING_LANES: usize = 12;
pub const N_SIGNALS: usize = 12;
pub const N_PHASES: usize = 8;
pub const N_CONNECTORS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Approach {
    North,
    South,
    East,
    West,
}

impl Approach {
    pub const ALL: [Approach; 4] = [Approach::North, Approach::South, Approach::East, Approach::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Approach {
        Self::ALL[i]
    }

    pub fn opposite(self) -> Approach {
        match self {
            Approach::North => Approach::South,
            Approach::South => Approach::North,
            Approach::East => Approach::West,
            Approach::West => Approach::East,
        }
    }

    /// Road reached by turning right from this approach.
    fn right_of(self) -> Approach {
        match self {
            Approach::North => Approach::West,
            Approach::South => Approach::East,
            Approach::East => Approach::North,
            Approach::West => Approach::South,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Approach::North => "N",
            Approach::South => "S",
            Approach::East => "E",
            Approach::West => "W",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Movement {
    Right,
    Through,
    Left,
    UTurn,
}

impl Movement {
    pub const ALL: [Movement; 4] = [Movement::Right, Movement::Through, Movement::Left, Movement::UTurn];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Lane index used by this movement, both on the incoming road and on
    /// the destination outgoing road.
    pub fn lane_index(self) -> LaneIndex {
        match self {
            Movement::Right => LaneIndex::Outer,
            Movement::Through => LaneIndex::Middle,
            Movement::Left | Movement::UTurn => LaneIndex::Inner,
        }
    }

    /// Signal group within an approach: 0 right, 1 through, 2 left and U-turn.
    pub fn signal_group(self) -> usize {
        self.lane_index() as usize
    }

    /// Length of the junction path, in meters.
    pub fn connector_length(self) -> f64 {
        match self {
            Movement::Right => 10.0,
            Movement::Through => 24.0,
            Movement::Left => 28.0,
            Movement::UTurn => 14.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Movement::Right => "right",
            Movement::Through => "through",
            Movement::Left => "left",
            Movement::UTurn => "uturn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    Incoming,
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LaneIndex {
    Outer,
    Middle,
    Inner,
}

impl LaneIndex {
    pub const ALL: [LaneIndex; 3] = [LaneIndex::Outer, LaneIndex::Middle, LaneIndex::Inner];

    pub fn label(self) -> &'static str {
        match self {
            LaneIndex::Outer => "outer",
            LaneIndex::Middle => "middle",
            LaneIndex::Inner => "inner",
        }
    }
}

/// Origin approach plus movement; the destination follows from both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Route {
    pub origin: Approach,
    pub movement: Movement,
}

impl Route {
    pub fn new(origin: Approach, movement: Movement) -> Self {
        Route { origin, movement }
    }

    /// All 16 routes, ordered by approach then movement.
    pub fn all() -> impl Iterator<Item = Route> {
        Approach::ALL
            .into_iter()
            .flat_map(|a| Movement::ALL.into_iter().map(move |m| Route::new(a, m)))
    }

    pub fn index(self) -> usize {
        self.origin.index() * 4 + self.movement.index()
    }

    /// Outgoing road the route exits on.
    pub fn destination(self) -> Approach {
        match self.movement {
            Movement::Right => self.origin.right_of(),
            Movement::Through => self.origin.opposite(),
            Movement::Left => self.origin.right_of().opposite(),
            Movement::UTurn => self.origin,
        }
    }

    pub fn incoming_lane(self) -> LaneId {
        LaneId::new(self.origin, Direction::Incoming, self.movement.lane_index())
    }

    pub fn outgoing_lane(self) -> LaneId {
        LaneId::new(self.destination(), Direction::Outgoing, self.movement.lane_index())
    }

    pub fn connector(self) -> ConnectorId {
        ConnectorId(self.index() as u8)
    }

    pub fn signal(self) -> usize {
        self.origin.index() * 3 + self.movement.signal_group()
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.origin.label(), self.movement.label())
    }
}

/// Row index of a lane, `0..24`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LaneId(pub u8);

impl LaneId {
    pub fn new(approach: Approach, direction: Direction, index: LaneIndex) -> Self {
        let dir = match direction {
            Direction::Incoming => 0,
            Direction::Outgoing => 1,
        };
        LaneId((approach.index() * 6 + dir * 3 + index as usize) as u8)
    }

    pub fn row(self) -> usize {
        self.0 as usize
    }

    pub fn approach(self) -> Approach {
        Approach::from_index(self.row() / 6)
    }

    pub fn direction(self) -> Direction {
        if (self.row() / 3) % 2 == 0 {
            Direction::Incoming
        } else {
            Direction::Outgoing
        }
    }

    pub fn index(self) -> LaneIndex {
        LaneIndex::ALL[self.row() % 3]
    }

    pub fn is_incoming(self) -> bool {
        self.direction() == Direction::Incoming
    }

    /// Position of an incoming lane among the 12 incoming lanes.
    pub fn incoming_slot(self) -> Option<usize> {
        self.is_incoming().then(|| self.approach().index() * 3 + self.index() as usize)
    }

    pub fn all() -> impl Iterator<Item = LaneId> {
        (0..N_LANES as u8).map(LaneId)
    }

    pub fn incoming() -> impl Iterator<Item = LaneId> {
        Self::all().filter(|l| l.is_incoming())
    }

    pub fn outgoing() -> impl Iterator<Item = LaneId> {
        Self::all().filter(|l| !l.is_incoming())
    }

    /// Movements admitted on an incoming lane.
    pub fn admitted_movements(self) -> &'static [Movement] {
        match self.index() {
            LaneIndex::Outer => &[Movement::Right],
            LaneIndex::Middle => &[Movement::Through],
            LaneIndex::Inner => &[Movement::Left, Movement::UTurn],
        }
    }
}

impl fmt::Display for LaneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = if self.is_incoming() { "in" } else { "out" };
        write!(f, "{}_{}_{}", self.approach().label(), dir, self.index().label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub id: LaneId,
    pub length: f64,
}

impl Lane {
    pub fn approach(&self) -> Approach {
        self.id.approach()
    }

    pub fn direction(&self) -> Direction {
        self.id.direction()
    }

    pub fn index(&self) -> LaneIndex {
        self.id.index()
    }
}

/// Junction path of one route, indexed like [`Route::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConnectorId(pub u8);

impl ConnectorId {
    pub fn route(self) -> Route {
        let i = self.0 as usize;
        Route::new(Approach::from_index(i / 4), Movement::ALL[i % 4])
    }

    pub fn length(self) -> f64 {
        self.route().movement.connector_length()
    }

    pub fn all() -> impl Iterator<Item = ConnectorId> {
        (0..N_CONNECTORS as u8).map(ConnectorId)
    }
}

impl fmt::Display for ConnectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X_{}", self.route())
    }
}

/// One of the eight signal phases, `0..8`.
///
/// | id | green movements                    |
/// |----|------------------------------------|
/// | 0  | N and S through + right            |
/// | 1  | N and S left + U-turn              |
/// | 2  | E and W through + right            |
/// | 3  | E and W left + U-turn              |
/// | 4  | N, all movements                   |
/// | 5  | S, all movements                   |
/// | 6  | E, all movements                   |
/// | 7  | W, all movements                   |
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhaseId(pub u8);

impl PhaseId {
    pub fn new(id: usize) -> Self {
        assert!(id < N_PHASES, "phase id {id} out of range");
        PhaseId(id as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = PhaseId> {
        (0..N_PHASES as u8).map(PhaseId)
    }

    pub fn next(self) -> PhaseId {
        PhaseId((self.0 + 1) % N_PHASES as u8)
    }

    /// Green flags per movement signal (`approach * 3 + group`).
    pub fn green_set(self) -> [bool; N_SIGNALS] {
        use Approach::*;
        let mut greens = [false; N_SIGNALS];
        let mut set = |a: Approach, groups: &[usize]| {
            for &g in groups {
                greens[a.index() * 3 + g] = true;
            }
        };
        match self.0 {
            0 => {
                set(North, &[0, 1]);
                set(South, &[0, 1]);
            }
            1 => {
                set(North, &[2]);
                set(South, &[2]);
            }
            2 => {
                set(East, &[0, 1]);
                set(West, &[0, 1]);
            }
            3 => {
                set(East, &[2]);
                set(West, &[2]);
            }
            4 => set(North, &[0, 1, 2]),
            5 => set(South, &[0, 1, 2]),
            6 => set(East, &[0, 1, 2]),
            7 => set(West, &[0, 1, 2]),
            _ => unreachable!(),
        }
        greens
    }

    pub fn is_green(self, route: Route) -> bool {
        self.green_set()[route.signal()]
    }
}

impl fmt::Display for PhaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0 + 1)
    }
}

/// Pairwise connector compatibility. Two junction paths may be occupied at
/// the same time only if some phase greens both; every other pair conflicts,
/// which covers crossing paths as well as merges into one outgoing lane.
#[derive(Debug, Clone)]
pub struct ConflictTable {
    compatible: [[bool; N_CONNECTORS]; N_CONNECTORS],
}

impl ConflictTable {
    pub fn new() -> Self {
        let mut compatible = [[false; N_CONNECTORS]; N_CONNECTORS];
        for phase in PhaseId::all() {
            let greens: Vec<ConnectorId> =
                ConnectorId::all().filter(|c| phase.is_green(c.route())).collect();
            for &a in &greens {
                for &b in &greens {
                    compatible[a.0 as usize][b.0 as usize] = true;
                }
            }
        }
        for c in 0..N_CONNECTORS {
            compatible[c][c] = true;
        }
        ConflictTable { compatible }
    }

    pub fn conflicts(&self, a: ConnectorId, b: ConnectorId) -> bool {
        !self.compatible[a.0 as usize][b.0 as usize]
    }
}

impl Default for ConflictTable {
    fn default() -> Self {
        Self::new()
    }
}
