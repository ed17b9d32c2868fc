//! Trajectory dump format and the replay summary built from it.
//!
//! One record per line, `t` first:
//!
//! ```text
//! t,veh,vehicle_id,lane,pos,speed,waiting_time,status
//! t,sig,phase,mode,switches
//! t,block,lane,pos,start_s,end_s
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use greenwave::sim::{SignalMode, SimWorld, VehicleStatus, STOP_SPEED};
use thiserror::Error;

pub const DUMP_HEADER: &str = "# t,kind,fields...";

#[derive(Debug, Error, PartialEq)]
#[error("corrupt trajectory dump, line {line}: {reason}")]
pub struct TraceError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceRecord {
    Vehicle { t: u32, id: u32, lane: String, pos: f64, speed: f64, waiting: f64, status: VehicleStatus },
    Signal { t: u32, phase: u8, green: bool, switches: u32 },
    Block { t: u32, lane: String, pos: f64, start: u32, end: u32 },
}

impl TraceRecord {
    pub fn t(&self) -> u32 {
        match self {
            TraceRecord::Vehicle { t, .. } | TraceRecord::Signal { t, .. } | TraceRecord::Block { t, .. } => *t,
        }
    }
}

/// All records for the world's current second.
pub fn frame(world: &SimWorld) -> String {
    let mut out = String::new();
    let t = world.clock();
    let c = world.controller();
    let mode = if c.mode() == SignalMode::Green { "green" } else { "transition" };
    writeln!(out, "{t},sig,{},{mode},{}", c.current_phase().index(), c.switch_count()).unwrap();
    for b in world.blocks() {
        writeln!(out, "{t},block,{},{:.3},{},{}", b.lane, b.pos, b.start_time, b.end_time()).unwrap();
    }
    for r in world.trajectory_records() {
        writeln!(
            out,
            "{t},veh,{},{},{:.3},{:.3},{:.1},{}",
            r.vehicle_id,
            r.link,
            r.pos,
            r.speed,
            r.waiting_time,
            r.status.label()
        )
        .unwrap();
    }
    out
}

fn field<T: std::str::FromStr>(parts: &[&str], i: usize, name: &str, line: usize) -> Result<T, TraceError> {
    parts
        .get(i)
        .ok_or_else(|| TraceError { line, reason: format!("missing {name}") })?
        .parse()
        .map_err(|_| TraceError { line, reason: format!("bad {name} `{}`", parts[i]) })
}

pub fn parse_line(text: &str, line: usize) -> Result<TraceRecord, TraceError> {
    let parts: Vec<&str> = text.trim().split(',').collect();
    let t: u32 = field(&parts, 0, "time", line)?;
    let expect = |n: usize| {
        if parts.len() == n {
            Ok(())
        } else {
            Err(TraceError { line, reason: format!("expected {n} fields, found {}", parts.len()) })
        }
    };
    match parts.get(1).copied() {
        Some("veh") => {
            expect(8)?;
            let status = VehicleStatus::parse(parts[7])
                .ok_or_else(|| TraceError { line, reason: format!("bad status `{}`", parts[7]) })?;
            Ok(TraceRecord::Vehicle {
                t,
                id: field(&parts, 2, "vehicle id", line)?,
                lane: parts[3].to_string(),
                pos: field(&parts, 4, "position", line)?,
                speed: field(&parts, 5, "speed", line)?,
                waiting: field(&parts, 6, "waiting time", line)?,
                status,
            })
        }
        Some("sig") => {
            expect(5)?;
            let phase: u8 = field(&parts, 2, "phase", line)?;
            if phase >= 8 {
                return Err(TraceError { line, reason: format!("phase {phase} out of range") });
            }
            let green = match parts[3] {
                "green" => true,
                "transition" => false,
                other => return Err(TraceError { line, reason: format!("bad signal mode `{other}`") }),
            };
            Ok(TraceRecord::Signal { t, phase, green, switches: field(&parts, 4, "switch count", line)? })
        }
        Some("block") => {
            expect(6)?;
            Ok(TraceRecord::Block {
                t,
                lane: parts[2].to_string(),
                pos: field(&parts, 3, "position", line)?,
                start: field(&parts, 4, "start", line)?,
                end: field(&parts, 5, "end", line)?,
            })
        }
        Some(kind) => Err(TraceError { line, reason: format!("unknown record kind `{kind}`") }),
        None => Err(TraceError { line, reason: "missing record kind".into() }),
    }
}

pub fn parse_dump(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| parse_line(l, i + 1))
        .collect()
}

/// A run of seconds with the same signal state.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpan {
    pub start: u32,
    pub end: u32,
    pub phase: u8,
    pub green: bool,
    pub mean_queue: f64,
    pub max_queue: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrashSpan {
    pub lane: String,
    pub pos: f64,
    pub start: u32,
    pub end: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplaySummary {
    pub seconds: usize,
    pub vehicles: usize,
    pub timeline: Vec<PhaseSpan>,
    pub crashes: Vec<CrashSpan>,
    pub max_queue: usize,
    pub mean_queue: f64,
    pub switches: u32,
}

impl ReplaySummary {
    pub fn build(records: &[TraceRecord]) -> Self {
        // per second: signal state and stopped incoming vehicles
        let mut frames: BTreeMap<u32, (Option<(u8, bool, u32)>, usize)> = BTreeMap::new();
        let mut ids = std::collections::BTreeSet::new();
        let mut crashes: Vec<CrashSpan> = Vec::new();
        for r in records {
            let f = frames.entry(r.t()).or_insert((None, 0));
            match r {
                TraceRecord::Signal { phase, green, switches, .. } => f.0 = Some((*phase, *green, *switches)),
                TraceRecord::Vehicle { id, speed, status, .. } => {
                    ids.insert(*id);
                    if *status == VehicleStatus::OnIncoming && *speed < STOP_SPEED {
                        f.1 += 1;
                    }
                }
                TraceRecord::Block { lane, pos, start, end, .. } => {
                    if !crashes.iter().any(|c| c.lane == *lane && c.start == *start && (c.pos - pos).abs() < 1e-9) {
                        crashes.push(CrashSpan { lane: lane.clone(), pos: *pos, start: *start, end: *end });
                    }
                }
            }
        }
        let mut s = ReplaySummary { seconds: frames.len(), vehicles: ids.len(), crashes, ..Default::default() };
        if frames.is_empty() {
            return s;
        }
        let mut queue_sum = 0usize;
        for (&t, &(sig, queue)) in &frames {
            queue_sum += queue;
            s.max_queue = s.max_queue.max(queue);
            let Some((phase, green, switches)) = sig else { continue };
            s.switches = switches;
            match s.timeline.last_mut() {
                Some(span) if span.phase == phase && span.green == green && span.end == t => {
                    span.end = t + 1;
                    span.mean_queue += queue as f64;
                    span.max_queue = span.max_queue.max(queue);
                }
                _ => s.timeline.push(PhaseSpan { start: t, end: t + 1, phase, green, mean_queue: queue as f64, max_queue: queue }),
            }
        }
        for span in &mut s.timeline {
            span.mean_queue /= (span.end - span.start) as f64;
        }
        s.mean_queue = queue_sum as f64 / frames.len() as f64;
        s
    }

    /// Mean gap between consecutive green starts of the same phase, counting
    /// only greens entered through a transition.
    pub fn mean_cycle_s(&self) -> Option<f64> {
        let mut last: BTreeMap<u8, u32> = BTreeMap::new();
        let (mut sum, mut n) = (0u64, 0u64);
        let entered = self.timeline.windows(2).filter(|w| !w[0].green && w[1].green).map(|w| &w[1]);
        for span in entered {
            if let Some(prev) = last.insert(span.phase, span.start) {
                sum += (span.start - prev) as u64;
                n += 1;
            }
        }
        (n > 0).then(|| sum as f64 / n as f64)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if self.seconds == 0 {
            out.push_str("empty trajectory: no records\n");
            return out;
        }
        writeln!(out, "seconds {}  vehicles {}  switches {}", self.seconds, self.vehicles, self.switches).unwrap();
        writeln!(out, "queue (stopped incoming vehicles): mean {:.2}  max {}", self.mean_queue, self.max_queue).unwrap();
        if let Some(c) = self.mean_cycle_s() {
            writeln!(out, "phase recurrence: every {c:.1} s on average").unwrap();
        }
        out.push_str("\ntimeline\n");
        for span in &self.timeline {
            writeln!(
                out,
                "{:>6}-{:<6} {:<10} queue mean {:>6.2} max {:>3}",
                span.start,
                span.end,
                if span.green { format!("P{} green", span.phase + 1) } else { format!("-> P{}", span.phase + 1) },
                span.mean_queue,
                span.max_queue
            )
            .unwrap();
        }
        if !self.crashes.is_empty() {
            out.push_str("\ncrashes\n");
            for c in &self.crashes {
                writeln!(out, "{:>6}-{:<6} {} at {:.1} m ({} s)", c.start, c.end, c.lane, c.pos, c.end - c.start).unwrap();
            }
        }
        out
    }
}
