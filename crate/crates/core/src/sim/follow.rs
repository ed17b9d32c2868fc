//! Discrete-time Krauss-style safe speed.
//!
//! A follower may drive at speed `v` this step only if, after moving at `v`
//! and then braking at `max_decel` every following step, it still stops
//! behind a leader that brakes equally hard starting now. All distances are
//! exact sums over whole steps, so the bound holds without slack.

/// Total distance covered when driving at `v` for one step and then braking
/// by `decel·dt` per step until standstill.
pub fn stopping_distance(v: f64, decel: f64, dt: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let step = decel * dt;
    let n = (v / step).floor();
    dt * ((n + 1.0) * v - step * n * (n + 1.0) / 2.0)
}

/// Largest speed whose [`stopping_distance`] fits into `budget`.
pub fn max_speed_within(budget: f64, decel: f64, dt: f64) -> f64 {
    if budget <= 0.0 {
        return 0.0;
    }
    let step = decel * dt;
    let b = budget / dt;
    let mut n = 0.0_f64;
    loop {
        // On [n·step, (n+1)·step) the distance is linear in v.
        let v = (b + step * n * (n + 1.0) / 2.0) / (n + 1.0);
        if v < (n + 1.0) * step {
            return v.max(n * step);
        }
        n += 1.0;
    }
}

/// Safe speed behind an obstacle `gap` meters ahead (already net of the
/// minimum gap) that currently moves at `leader_speed`.
pub fn safe_speed(gap: f64, leader_speed: f64, decel: f64, dt: f64) -> f64 {
    let leader_next = (leader_speed - decel * dt).max(0.0);
    let budget = gap + stopping_distance(leader_next, decel, dt);
    max_speed_within(budget, decel, dt)
}
