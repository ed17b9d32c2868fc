//! End-to-end acceptance run. Prints one `[PASS]`/`[FAIL]` line per
//! criterion and exits nonzero if any fails.
//!
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 1 2 3`.

mod common;
#[path = "oracles/reward_cases.rs"]
mod reward_cases;

use std::time::Instant;

use greenwave::nn::gradcheck;
use greenwave::rl::train::{run_training, TrainRun, TrainSpec};
use greenwave::rl::{ddqn_target, dqn_target, gae, ppo_clip_objective, Hyperparams, IntervalMode, Method};
use greenwave::scenario::{
    evaluate_policy, malfunction_sweep, run_episode, seed_range, MetricsReport, PredefinedController, Scale,
    ScenarioConfig, PRESETS, SWEEP_PROBABILITIES,
};
use greenwave::sim::{FlowTable, LaneId, Link, PhaseId, Route, SignalMode, SimWorld, VehicleSpec, WorldConfig};
use greenwave::state::{balance_term, compute_reward};
use reward_cases::{BALANCE_CASES, REWARD_CASES};

const EXACT: f64 = 1e-9;
const GRAD_TOL: f64 = 1e-4;
const GRAD_INSTANCES: u64 = 60;
const FUZZ_STEPS: usize = 1000;
const BASELINE_SEEDS: u64 = 10;
const CYCLE_S: u32 = 120;
const SWITCHES_PER_CYCLE: u32 = 8;
const TRAIN_SEEDS: [u64; 3] = [1, 2, 3];
const EVAL_SEED_BASE: u64 = 10_000;
const EVAL_RUNS: usize = 20;
const SWEEP_SEED_BASE: u64 = 20_000;
const SWEEP_RUNS: usize = 20;
const PASSING_GAIN: f64 = 0.15;
const WAITING_GAIN: f64 = 0.25;
const SWITCH_CUT: f64 = 0.30;
const PASSING_SLACK: f64 = 0.03;
const REWARD_TAIL: usize = 10;

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXACT
}

fn lane_world(vehicles: &[(u8, f64, f64, f64)]) -> SimWorld {
    let mut w = SimWorld::build(&WorldConfig::new(VehicleSpec::standard(), FlowTable::zero(), 0), 1).unwrap();
    for &(row, pos, speed, wait) in vehicles {
        let lane = LaneId(row);
        let route = Route::all()
            .find(|r| if lane.is_incoming() { r.incoming_lane() == lane } else { r.outgoing_lane() == lane })
            .unwrap();
        let id = w.insert_vehicle(route, Link::Lane(lane), pos, speed);
        w.vehicle_mut(id).unwrap().waiting_time = wait;
    }
    w
}

fn reward_oracle() -> Verdict {
    let mut bad = Vec::new();
    let (mut zero, mut negative) = (0, 0);
    for (i, case) in REWARD_CASES.iter().enumerate() {
        let w = lane_world(case.vehicles);
        let r = compute_reward(PhaseId(case.prev), PhaseId(case.action), &w);
        let got = [r.action, r.stopped, r.mean_wait, r.balance, r.total];
        if !got.iter().zip(&case.want).all(|(&g, &e)| close(g, e)) {
            bad.push(format!("world {i}: got {got:?}, want {:?}", case.want));
        }
        if case.want[3] == 0.0 {
            zero += 1;
        } else if case.want[3] < 0.0 {
            negative += 1;
        }
    }
    for (counts, want) in BALANCE_CASES {
        let got = balance_term(counts);
        if !close(got, *want) {
            bad.push(format!("balance {counts:?}: got {got}, want {want}"));
        }
    }
    let enough = REWARD_CASES.len() >= 20 && zero > 0 && negative > 0;
    Verdict {
        id: 1,
        name: "reward oracle",
        pass: bad.is_empty() && enough,
        detail: format!(
            "{} worlds ({zero} with zero balance, {negative} negative) + {} balance tables; {}",
            REWARD_CASES.len(),
            BALANCE_CASES.len(),
            if bad.is_empty() { "all within 1e-9".to_string() } else { bad.join("; ") }
        ),
    }
}

fn gradient_suite() -> Verdict {
    let (worst, coords, kinks) = gradcheck::suite(0..GRAD_INSTANCES);
    Verdict {
        id: 2,
        name: "gradient suite",
        pass: worst < GRAD_TOL,
        detail: format!("{GRAD_INSTANCES} instances, {coords} coordinates ({kinks} at ReLU kinks skipped), max rel err {worst:.2e}"),
    }
}

fn update_oracles() -> Verdict {
    let mut bad = Vec::new();
    let mut check = |what: &str, got: f64, want: f64| {
        if !close(got, want) {
            bad.push(format!("{what}: got {got}, want {want}"));
        }
    };
    let (q_eval, q_target) = ([1.0f32, 9.0], [7.0f32, 3.0]);
    check("dqn divergence", dqn_target(0.0, false, 1.0, &q_target), 7.0);
    check("ddqn divergence", ddqn_target(0.0, false, 1.0, &q_eval, &q_target), 3.0);
    check("dqn discounted", dqn_target(1.5, false, 0.9, &q_target), 7.8);
    check("ddqn discounted", ddqn_target(1.5, false, 0.9, &q_eval, &q_target), 4.2);
    check("dqn terminal", dqn_target(-2.0, true, 0.9, &q_target), -2.0);
    check("ddqn terminal", ddqn_target(-2.0, true, 0.9, &q_eval, &q_target), -2.0);
    check("equal networks", ddqn_target(0.5, false, 0.95, &q_target, &q_target), dqn_target(0.5, false, 0.95, &q_target));

    // (ratio, advantage, clip, objective)
    let clip_table = [
        (1.0, -3.0, 0.15, -3.0),
        (1.3, 2.0, 0.15, 2.3),
        (0.5, -1.0, 0.15, -0.85),
        (0.5, 1.0, 0.15, 0.5),
        (1.3, -2.0, 0.15, -2.6),
        (1.1, 2.0, 0.15, 2.2),
        (0.9, -2.0, 0.2, -1.8),
        (1.5, 1.0, 0.2, 1.2),
        (0.7, -1.0, 0.2, -0.8),
        (2.0, 0.0, 0.15, 0.0),
    ];
    for (r, a, eps, want) in clip_table {
        check(&format!("clip r={r} A={a} eps={eps}"), ppo_clip_objective(r, a, eps), want);
    }

    let (adv, ret) = gae(&[1.0, 1.0], &[0.5, 0.5], &[false, false], 0.0, 0.9, 0.95).unwrap();
    check("gae A0", adv[0], 1.3775);
    check("gae A1", adv[1], 0.5);
    check("gae return0", ret[0], 1.8775);
    let (adv, _) = gae(&[1.0, 2.0, 3.0], &[0.1, 0.2, 0.3], &[false; 3], 0.4, 0.9, 0.0).unwrap();
    for (i, want) in [1.08, 2.07, 3.06].into_iter().enumerate() {
        check(&format!("one-step residual {i}"), adv[i], want);
    }
    let (adv, _) = gae(&[1.0, 2.0, 3.0], &[0.0; 3], &[false; 3], 0.0, 1.0, 1.0).unwrap();
    for (i, want) in [6.0, 5.0, 3.0].into_iter().enumerate() {
        check(&format!("reward-to-go {i}"), adv[i], want);
    }
    let (adv, _) = gae(&[1.0, 1.0], &[0.0, 0.0], &[true, false], 10.0, 1.0, 1.0).unwrap();
    check("episode boundary", adv[0], 1.0);

    let n = 7 + clip_table.len() + 3 + 3 + 3 + 1;
    Verdict {
        id: 3,
        name: "update-rule oracles",
        pass: bad.is_empty(),
        detail: if bad.is_empty() { format!("{n} cases within 1e-9") } else { bad.join("; ") },
    }
}

fn simulator_fuzz() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for (i, name) in PRESETS.iter().enumerate() {
        let scenario = common::preset(name, Scale::Paper);
        // an episode can drain before the step budget; continue with the next seed
        let (mut steps, mut episodes, mut crashes, mut replay) = (0, 0, 0, true);
        let mut violations = Vec::new();
        while steps < FUZZ_STEPS {
            let seed = 100 * (i as u64 + 1) + episodes;
            let a = common::fuzz_run(&scenario, seed, FUZZ_STEPS - steps);
            let b = common::fuzz_run(&scenario, seed, FUZZ_STEPS - steps);
            replay &= a.fingerprint == b.fingerprint;
            steps += a.steps;
            crashes += a.crashes;
            violations.extend(a.violations);
            episodes += 1;
        }
        pass &= violations.is_empty() && replay;
        lines.push(format!(
            "{name}: {steps} steps over {episodes} episode(s), {} violations, {crashes} crashes, {}",
            violations.len(),
            if replay { "replays" } else { "REPLAY DIFFERS" }
        ));
        if let Some(v) = violations.first() {
            lines.push(format!("first violation: {v}"));
        }
    }
    Verdict { id: 4, name: "simulator fuzz", pass, detail: lines.join("; ") }
}

fn baseline_cycle() -> Verdict {
    let scenario = ScenarioConfig::preset("balanced", Scale::Paper, IntervalMode::Fixed).unwrap();
    let mut pass = true;
    let (mut periods, mut switches, mut timeouts) = (Vec::new(), Vec::new(), 0);
    for seed in 0..BASELINE_SEEDS {
        let mut ctl = PredefinedController::new(IntervalMode::Fixed);
        // green onsets reached through a transition: (time, phase, switch count)
        let mut onsets: Vec<(u32, u8, u32)> = Vec::new();
        let mut was_green = true;
        let mut observe = |w: &SimWorld| {
            let c = w.controller();
            let green = c.mode() == SignalMode::Green;
            if green && !was_green {
                onsets.push((w.clock(), c.current_phase().index() as u8, c.switch_count()));
            }
            was_green = green;
        };
        let summary = run_episode(&mut ctl, &scenario, seed, Some(&mut observe)).unwrap();
        timeouts += summary.timed_out as usize;
        for (i, &(t, phase, n)) in onsets.iter().enumerate() {
            if let Some(&(t0, _, n0)) = onsets[..i].iter().rev().find(|o| o.1 == phase) {
                periods.push(t - t0);
                switches.push(n - n0);
            }
        }
    }
    pass &= timeouts == 0 && !periods.is_empty();
    pass &= periods.iter().all(|&p| p == CYCLE_S) && switches.iter().all(|&s| s == SWITCHES_PER_CYCLE);
    let span = |xs: &[u32]| (xs.iter().min().copied().unwrap_or(0), xs.iter().max().copied().unwrap_or(0));
    let (pmin, pmax) = span(&periods);
    let (smin, smax) = span(&switches);
    Verdict {
        id: 5,
        name: "baseline cycle",
        pass,
        detail: format!(
            "{BASELINE_SEEDS} seeds, {timeouts} watchdog hits, {} cycles, period {pmin}..{pmax} s, switches per cycle {smin}..{smax}",
            periods.len()
        ),
    }
}

/// Trained policies and their evaluations, shared by the learning criteria.
struct Trained {
    method: Method,
    mode: IntervalMode,
    runs: Vec<TrainRun>,
}

impl Trained {
    fn train(method: Method, mode: IntervalMode) -> Trained {
        let scenario = ScenarioConfig::preset("balanced", Scale::Desk, mode).unwrap();
        let runs = TRAIN_SEEDS
            .iter()
            .map(|&seed| {
                let start = Instant::now();
                let spec = TrainSpec {
                    method,
                    scenario: scenario.clone(),
                    episodes: Scale::Desk.episodes(),
                    seed,
                    hyper: Hyperparams::default(),
                    checkpoint_every: 0,
                    log_wallclock: false,
                };
                let run = run_training(&spec).unwrap();
                println!(
                    "       trained {} {} seed {seed}: {} episodes in {:.0} s",
                    method.label(),
                    mode.label(),
                    run.records.len(),
                    start.elapsed().as_secs_f64()
                );
                run
            })
            .collect();
        Trained { method, mode, runs }
    }

    fn evaluate(&self) -> Vec<MetricsReport> {
        let scenario = ScenarioConfig::preset("balanced", Scale::Desk, self.mode).unwrap();
        self.runs
            .iter()
            .map(|r| {
                let mut ctl = r.controller(self.method.label());
                evaluate_policy(&mut ctl, &scenario, &seed_range(EVAL_SEED_BASE, EVAL_RUNS)).unwrap()
            })
            .collect()
    }

    /// Mean reward over the last training episodes, per seed.
    fn converged_rewards(&self) -> Vec<f64> {
        self.runs
            .iter()
            .map(|r| {
                let tail = &r.records[r.records.len().saturating_sub(REWARD_TAIL)..];
                tail.iter().map(|e| e.reward).sum::<f64>() / tail.len() as f64
            })
            .collect()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean.
fn sem(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

fn seed_mean(reports: &[MetricsReport], f: impl Fn(&MetricsReport) -> f64) -> f64 {
    mean(&reports.iter().map(f).collect::<Vec<_>>())
}

fn baseline_report(mode: IntervalMode) -> MetricsReport {
    let scenario = ScenarioConfig::preset("balanced", Scale::Desk, mode).unwrap();
    let mut ctl = PredefinedController::new(mode);
    evaluate_policy(&mut ctl, &scenario, &seed_range(EVAL_SEED_BASE, EVAL_RUNS)).unwrap()
}

fn learning_trend(ppo: &[MetricsReport], base: &MetricsReport) -> Verdict {
    let pass_t = seed_mean(ppo, |r| r.mean_passing_time_s);
    let wait_t = seed_mean(ppo, |r| r.mean_waiting_time_s);
    let pass_gain = 1.0 - pass_t / base.mean_passing_time_s;
    let wait_gain = 1.0 - wait_t / base.mean_waiting_time_s;
    let failures: usize = ppo.iter().map(|r| r.failures).sum();
    Verdict {
        id: 6,
        name: "learning trend",
        pass: pass_gain >= PASSING_GAIN && wait_gain >= WAITING_GAIN,
        detail: format!(
            "PPO passing {pass_t:.1} s vs baseline {:.1} s ({:+.1}%, need >= 15%), waiting {wait_t:.0} s vs {:.0} s ({:+.1}%, need >= 25%), {failures} watchdog hits",
            base.mean_passing_time_s,
            100.0 * pass_gain,
            base.mean_waiting_time_s,
            100.0 * wait_gain
        ),
    }
}

fn variable_trend(fixed: &[MetricsReport], variable: &[MetricsReport]) -> Verdict {
    let sw_f = seed_mean(fixed, |r| r.mean_switches);
    let sw_v = seed_mean(variable, |r| r.mean_switches);
    let pass_f = seed_mean(fixed, |r| r.mean_passing_time_s);
    let pass_v = seed_mean(variable, |r| r.mean_passing_time_s);
    let cut = 1.0 - sw_v / sw_f;
    Verdict {
        id: 7,
        name: "variable-interval trend",
        pass: cut >= SWITCH_CUT && pass_v <= pass_f * (1.0 + PASSING_SLACK),
        detail: format!(
            "switches {sw_v:.1} vs fixed {sw_f:.1} ({:.1}% fewer, need >= 30%), passing {pass_v:.1} s vs {pass_f:.1} s (limit {:.1} s)",
            100.0 * cut,
            pass_f * (1.0 + PASSING_SLACK)
        ),
    }
}

fn robustness_trend(ppo: &Trained) -> Verdict {
    let scenario = ScenarioConfig::preset("balanced", Scale::Desk, IntervalMode::Fixed).unwrap();
    let seeds = seed_range(SWEEP_SEED_BASE, SWEEP_RUNS);
    let mut base_ctl = PredefinedController::new(IntervalMode::Fixed);
    let base = malfunction_sweep(&mut base_ctl, &scenario, &SWEEP_PROBABILITIES, &seeds).unwrap();
    let trained: Vec<_> = ppo
        .runs
        .iter()
        .map(|r| malfunction_sweep(&mut r.controller("ppo"), &scenario, &SWEEP_PROBABILITIES, &seeds).unwrap())
        .collect();
    let mut pass = true;
    let mut points = Vec::new();
    for (i, b) in base.iter().enumerate() {
        let t = mean(&trained.iter().map(|c| c[i].report.mean_passing_time_s).collect::<Vec<_>>());
        let beats = t < b.report.mean_passing_time_s;
        pass &= beats;
        points.push(format!("p={:.2} {t:.0}/{:.0}{}", b.probability, b.report.mean_passing_time_s, if beats { "" } else { "!" }));
    }
    let mut monotone = true;
    for w in base.windows(2) {
        let (a, b) = (&w[0].report, &w[1].report);
        let se = (a.passing_time_se.powi(2) + b.passing_time_se.powi(2)).sqrt();
        monotone &= b.mean_passing_time_s >= a.mean_passing_time_s - 2.0 * se;
    }
    pass &= monotone;
    Verdict {
        id: 8,
        name: "robustness trend",
        pass,
        detail: format!(
            "PPO/baseline passing s: {}; baseline {} within 2 SE",
            points.join(", "),
            if monotone { "non-decreasing" } else { "DECREASES" }
        ),
    }
}

fn ordering(ppo: &Trained, dqn: &Trained, ddqn: &Trained) -> Verdict {
    let p = ppo.converged_rewards();
    let mut notes = Vec::new();
    let mut pass = true;
    let mut soft = false;
    for other in [dqn, ddqn] {
        let o = other.converged_rewards();
        let gap = mean(&p) - mean(&o);
        let noise = 2.0 * (sem(&p).powi(2) + sem(&o).powi(2)).sqrt();
        if gap < 0.0 {
            if -gap <= noise {
                soft = true;
            } else {
                pass = false;
            }
        }
        notes.push(format!("{} {:.0} (gap {gap:+.0}, noise {noise:.0})", other.method.label(), mean(&o)));
    }
    Verdict {
        id: 9,
        name: "ordering",
        pass,
        detail: format!(
            "PPO {:.0} vs {}{}",
            mean(&p),
            notes.join(", "),
            if pass && soft { " (soft: within noise)" } else { "" }
        ),
    }
}

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |id: u32| wanted.is_empty() || wanted.contains(&id);
    let mut verdicts = Vec::new();
    let mut emit = |v: Verdict| {
        println!("[{}] {}. {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.id, v.name, v.detail);
        verdicts.push(v.pass);
    };
    let fast: [(u32, fn() -> Verdict); 5] =
        [(1, reward_oracle), (2, gradient_suite), (3, update_oracles), (4, simulator_fuzz), (5, baseline_cycle)];
    for (id, f) in fast {
        if want(id) {
            emit(f());
        }
    }

    if [6, 7, 8, 9].into_iter().any(want) {
        let ppo = Trained::train(Method::Ppo, IntervalMode::Fixed);
        let ppo_eval = ppo.evaluate();
        if want(6) {
            emit(learning_trend(&ppo_eval, &baseline_report(IntervalMode::Fixed)));
        }
        if want(7) {
            let var = Trained::train(Method::Ppo, IntervalMode::Variable);
            emit(variable_trend(&ppo_eval, &var.evaluate()));
        }
        if want(8) {
            emit(robustness_trend(&ppo));
        }
        if want(9) {
            let dqn = Trained::train(Method::Dqn, IntervalMode::Fixed);
            let ddqn = Trained::train(Method::Ddqn, IntervalMode::Fixed);
            emit(ordering(&ppo, &dqn, &ddqn));
        }
    }

    let failed = verdicts.iter().filter(|&&p| !p).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
