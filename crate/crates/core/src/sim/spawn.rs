//! Vehicle arrival schedules.
//!
//! Each of the 16 routes is an independent Poisson stream whose rate is the
//! route's base rate times the multiplier of its approach in the active flow
//! segment. The streams are merged by arrival time and truncated once the
//! requested number of vehicles is reached.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::geometry::{Approach, Route, N_APPROACHES};
use super::SimError;

/// Base arrival rates in vehicles per hour, indexed `[approach][movement]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowTable {
    pub rates: [[f64; 4]; N_APPROACHES],
}

impl FlowTable {
    /// Same per-movement rates on every incoming road.
    pub fn uniform(right: f64, through: f64, left: f64, u_turn: f64) -> Self {
        FlowTable {
            rates: [[right, through, left, u_turn]; N_APPROACHES],
        }
    }

    /// 480 right, 600 through, 240 left, 120 U-turn vehicles per hour on
    /// every approach.
    pub fn standard() -> Self {
        Self::uniform(480.0, 600.0, 240.0, 120.0)
    }

    pub fn zero() -> Self {
        Self::uniform(0.0, 0.0, 0.0, 0.0)
    }

    pub fn rate(&self, route: Route) -> f64 {
        self.rates[route.origin.index()][route.movement.index()]
    }

    pub fn total_per_hour(&self) -> f64 {
        self.rates.iter().flatten().sum()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for r in Route::all() {
            let rate = self.rate(r);
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(SimError::InvalidRate { route: r.to_string(), rate });
            }
        }
        Ok(())
    }
}

impl Default for FlowTable {
    fn default() -> Self {
        Self::standard()
    }
}

/// Approach multipliers active over `[start_s, start_s + duration_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSegment {
    pub start_s: f64,
    pub duration_s: f64,
    /// Indexed by approach: N, S, E, W.
    pub multipliers: [f64; N_APPROACHES],
}

/// Piecewise-constant rate multipliers. The last segment's multipliers
/// persist past its nominal end; an empty schedule means all ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowSchedule {
    pub segments: Vec<FlowSegment>,
}

impl FlowSchedule {
    pub fn constant() -> Self {
        FlowSchedule { segments: Vec::new() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let mut expected_start = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            if (s.start_s - expected_start).abs() > 1e-9 || !(s.duration_s > 0.0) {
                return Err(SimError::InvalidSchedule(format!(
                    "segment {i} must start at {expected_start} with positive duration"
                )));
            }
            if s.multipliers.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
                return Err(SimError::InvalidSchedule(format!("segment {i} has a negative multiplier")));
            }
            expected_start += s.duration_s;
        }
        Ok(())
    }

    pub fn multipliers_at(&self, t: f64) -> [f64; N_APPROACHES] {
        match self.segments.iter().find(|s| t < s.start_s + s.duration_s) {
            Some(s) => s.multipliers,
            None => self.segments.last().map_or([1.0; N_APPROACHES], |s| s.multipliers),
        }
    }

    /// `(start, end, multiplier)` pieces for one approach; the last piece is
    /// open-ended.
    fn pieces(&self, approach: Approach) -> Vec<(f64, f64, f64)> {
        if self.segments.is_empty() {
            return vec![(0.0, f64::INFINITY, 1.0)];
        }
        let n = self.segments.len();
        self.segments
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let end = if i + 1 == n { f64::INFINITY } else { s.start_s + s.duration_s };
                (s.start_s, end, s.multipliers[approach.index()])
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub time: f64,
    pub route: Route,
}

/// One route's arrival process, sampled by inverting the cumulative rate.
struct Stream {
    route: Route,
    pieces: Vec<(f64, f64, f64)>, // (start, end, veh/s)
    rng: ChaCha8Rng,
    t: f64,
}

impl Stream {
    fn next_arrival(&mut self) -> Option<f64> {
        let mut mass: f64 = Exp1.sample(&mut self.rng);
        for &(start, end, rate) in &self.pieces {
            if end <= self.t {
                continue;
            }
            let from = self.t.max(start);
            if rate <= 0.0 {
                if end.is_infinite() {
                    return None;
                }
                self.t = end;
                continue;
            }
            let available = (end - from) * rate;
            if mass < available {
                self.t = from + mass / rate;
                return Some(self.t);
            }
            mass -= available;
            self.t = end;
        }
        None
    }
}

#[derive(PartialEq)]
struct Pending(f64, usize);

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on time, then stream index
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Draws up to `total` arrivals, sorted by time. Fewer are returned only if
/// every stream dries up (zero rates).
pub fn spawn_schedule<R: Rng>(
    flow: &FlowTable,
    schedule: &FlowSchedule,
    total: usize,
    rng: &mut R,
) -> Vec<Arrival> {
    let mut streams: Vec<Stream> = Route::all()
        .map(|route| {
            let base = flow.rate(route) / 3600.0;
            let pieces = schedule
                .pieces(route.origin)
                .into_iter()
                .map(|(s, e, m)| (s, e, base * m))
                .collect();
            Stream {
                route,
                pieces,
                rng: ChaCha8Rng::seed_from_u64(rng.random()),
                t: 0.0,
            }
        })
        .collect();

    let mut heap = BinaryHeap::new();
    if total > 0 {
        for (i, s) in streams.iter_mut().enumerate() {
            if let Some(t) = s.next_arrival() {
                heap.push(Pending(t, i));
            }
        }
    }
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        let Some(Pending(t, i)) = heap.pop() else { break };
        out.push(Arrival { time: t, route: streams[i].route });
        if let Some(next) = streams[i].next_arrival() {
            heap.push(Pending(next, i));
        }
    }
    out
}

/// True if the rate that persists after the last segment is positive, so a
/// finite target is always reached.
pub fn eventually_positive(flow: &FlowTable, schedule: &FlowSchedule) -> bool {
    Route::all().any(|r| {
        let tail = schedule.pieces(r.origin).last().map_or(1.0, |p| p.2);
        flow.rate(r) * tail > 0.0
    })
}
