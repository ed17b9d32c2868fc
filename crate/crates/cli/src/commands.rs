use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use greenwave::nn::{load_params, read_header, CheckpointError, HeadKind, NetworkSpec};
use greenwave::rl::train::{run_training_in, TrainError, FINAL_CRITIC, LOG_FILE};
use greenwave::rl::IntervalMode;
use greenwave::scenario::{
    malfunction_sweep, run_episode, seed_range, sweep_table, Controller, MetricsReport, NetworkController,
    PredefinedController, RunRow, Scale, ScenarioConfig, ScenarioError, SWEEP_PROBABILITIES,
};
use greenwave::sim::SimWorld;
use thiserror::Error;

use crate::config::{build_scenario, ConfigError, RunConfig, ScenarioSection};
use crate::manifest::RunManifest;
use crate::trace::{frame, parse_dump, ReplaySummary, TraceError, DUMP_HEADER};
use crate::{EvalArgs, PolicyArgs, ReplayArgs, ScenarioArgs, SweepArgs, TrainArgs, OUT_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("checkpoint {path}: {source}")]
    Checkpoint { path: PathBuf, source: CheckpointError },
    #[error("checkpoint {path} has {found} actions but {mode} intervals need {expected}")]
    ActionSpace { path: PathBuf, found: usize, expected: usize, mode: &'static str },
    #[error("checkpoint {path} holds a value network, which cannot pick actions")]
    ValueHead { path: PathBuf },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Checkpoint { .. } | CliError::ActionSpace { .. } | CliError::ValueHead { .. } => 3,
            CliError::Train(_) | CliError::Scenario(_) => 4,
            CliError::Io { .. } => 5,
            CliError::Trace(_) => 6,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

/// `--out`, else `$GREENWAVE_OUT/<name>`, else `runs/<name>`.
fn output_dir(flag: Option<&PathBuf>, name: &str) -> PathBuf {
    match flag {
        Some(p) => p.clone(),
        None => std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from).join(name),
    }
}

fn apply_scenario_args(args: &ScenarioArgs, section: &mut ScenarioSection, scale: &mut Scale, mode: &mut IntervalMode) {
    if let Some(p) = &args.scenario {
        section.preset = p.clone();
    }
    if let Some(s) = args.scale {
        *scale = s.into();
    }
    if let Some(m) = args.intervals {
        *mode = m.into();
    }
    if args.vehicles.is_some() {
        section.total_vehicles = args.vehicles;
    }
    if args.disturbance.is_some() {
        section.action_disturbance = args.disturbance;
    }
    if args.watchdog.is_some() {
        section.watchdog_s = args.watchdog;
    }
}

fn scenario_from_args(args: &ScenarioArgs) -> Result<ScenarioConfig, CliError> {
    let mut section = ScenarioSection::default();
    let (mut scale, mut mode) = (Scale::Desk, IntervalMode::Fixed);
    apply_scenario_args(args, &mut section, &mut scale, &mut mode);
    Ok(build_scenario(&section, scale, mode)?)
}

fn scenario_toml(s: &ScenarioConfig) -> String {
    toml::to_string_pretty(s).expect("scenario serializes")
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(m) = args.method {
        cfg.method = m.into();
    }
    apply_scenario_args(&args.scenario, &mut cfg.scenario, &mut cfg.scale, &mut cfg.intervals);
    if args.episodes.is_some() {
        cfg.episodes = args.episodes;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(lr) = args.lr {
        cfg.hyper.lr.initial = lr;
    }
    if let Some(p) = args.passes {
        cfg.hyper.passes = p;
    }
    if let Some(k) = args.checkpoint_every {
        cfg.checkpoint_every = k;
    }
    if args.wallclock {
        cfg.log_wallclock = true;
    }
    if args.out.is_some() {
        cfg.out_dir = args.out.clone();
    }
    if args.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let spec = cfg.train_spec()?;
    let name = format!(
        "train-{}-{}-{}-s{}",
        cfg.method.label(),
        cfg.intervals.label(),
        cfg.scenario.preset,
        cfg.seed
    );
    let dir = output_dir(cfg.out_dir.as_ref(), &name);
    cfg.out_dir = Some(dir.clone());

    let mut manifest = RunManifest::start("train", cfg.to_toml(), scenario_toml(&spec.scenario));
    manifest.write(&dir).map_err(io_err(&dir))?;
    write_file(&dir.join("config.toml"), &cfg.to_toml())?;
    if spec.episodes == 0 {
        manifest.finish(Ok(()));
        manifest.write(&dir).map_err(io_err(&dir))?;
        println!("no episodes requested; wrote {}", dir.display());
        return Ok(());
    }
    manifest.logs.push(PathBuf::from(LOG_FILE));
    manifest.write(&dir).map_err(io_err(&dir))?;

    let result = run_training_in(&spec, Some(&dir), &mut |r| println!("{}", r.line()));
    match result {
        Ok(run) => {
            manifest.checkpoints = run.checkpoints.iter().map(|p| p.strip_prefix(&dir).unwrap_or(p).to_path_buf()).collect();
            if dir.join(FINAL_CRITIC).exists() {
                manifest.checkpoints.push(PathBuf::from(FINAL_CRITIC));
            }
            manifest.finish(Ok(()));
            manifest.write(&dir).map_err(io_err(&dir))?;
            println!("wrote {}", dir.display());
            Ok(())
        }
        Err(e) => {
            manifest.finish(Err(e.to_string()));
            let _ = manifest.write(&dir);
            Err(e.into())
        }
    }
}

fn load_controller(path: &Path, mode: IntervalMode) -> Result<NetworkController, CliError> {
    let ck = |source| CliError::Checkpoint { path: path.to_path_buf(), source };
    let header = read_header(path).map_err(ck)?;
    if header.head == HeadKind::Value {
        return Err(CliError::ValueHead { path: path.to_path_buf() });
    }
    let expected = greenwave::rl::ActionSpace::new(mode).n_actions();
    if header.n_outputs != expected {
        return Err(CliError::ActionSpace { path: path.to_path_buf(), found: header.n_outputs, expected, mode: mode.label() });
    }
    let net = load_params(path, &NetworkSpec::standard(header.head, expected)).map_err(ck)?;
    let label = path.file_stem().map_or_else(|| "checkpoint".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(NetworkController::new(label, net))
}

fn controllers(policy: &PolicyArgs, mode: IntervalMode) -> Result<Vec<Box<dyn Controller>>, CliError> {
    let mut out: Vec<Box<dyn Controller>> = Vec::new();
    if policy.baseline.is_some() {
        out.push(Box::new(PredefinedController::new(mode)));
    }
    for path in &policy.checkpoint {
        out.push(Box::new(load_controller(path, mode)?));
    }
    Ok(out)
}

/// Unique file-safe labels for a list of policies.
fn labels(ctls: &[Box<dyn Controller>]) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for c in ctls {
        let base: String = c.name().chars().map(|ch| if ch.is_ascii_alphanumeric() || ch == '-' || ch == '_' { ch } else { '_' }).collect();
        let mut label = base.clone();
        let mut k = 2;
        while seen.contains(&label) {
            label = format!("{base}-{k}");
            k += 1;
        }
        seen.push(label);
    }
    seen
}

fn eval_config_text(kind: &str, policies: &[String], runs: usize, seed_base: u64, extra: &str) -> String {
    let list = policies.iter().map(|p| format!("\"{p}\"")).collect::<Vec<_>>().join(", ");
    format!("command = \"{kind}\"\npolicies = [{list}]\nruns = {runs}\nseed_base = {seed_base}\n{extra}")
}

pub fn eval(args: EvalArgs) -> Result<(), CliError> {
    let scenario = scenario_from_args(&args.scenario)?;
    let mut ctls = controllers(&args.policy, scenario.interval_mode)?;
    if ctls.len() != 1 {
        return Err(CliError::Usage("eval needs exactly one of --baseline predefined or --checkpoint".into()));
    }
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let label = labels(&ctls).remove(0);
    let ctl = &mut ctls[0];
    let dir = output_dir(args.out.as_ref(), &format!("eval-{label}-{}", scenario.name));
    let mut manifest = RunManifest::start(
        "eval",
        eval_config_text("eval", &[label.clone()], args.runs, args.seed_base, ""),
        scenario_toml(&scenario),
    );
    manifest.write(&dir).map_err(io_err(&dir))?;

    let mut rows = Vec::with_capacity(args.runs);
    for seed in seed_range(args.seed_base, args.runs) {
        let summary = if args.trajectory {
            let tdir = dir.join("trajectories");
            fs::create_dir_all(&tdir).map_err(io_err(&tdir))?;
            let name = PathBuf::from("trajectories").join(format!("run_{seed}.log"));
            let path = dir.join(&name);
            let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
            writeln!(w, "{DUMP_HEADER}").map_err(io_err(&path))?;
            let mut failed = None;
            let mut obs = |world: &SimWorld| {
                if failed.is_none() {
                    if let Err(e) = w.write_all(frame(world).as_bytes()) {
                        failed = Some(e);
                    }
                }
            };
            let s = run_episode(ctl.as_mut(), &scenario, seed, Some(&mut obs))?;
            if let Some(e) = failed {
                return Err(CliError::Io { path, source: e });
            }
            w.flush().map_err(io_err(&path))?;
            manifest.logs.push(name);
            s
        } else {
            run_episode(ctl.as_mut(), &scenario, seed, None)?
        };
        rows.push(RunRow {
            seed,
            passing_time_s: summary.passing_time_s as f64,
            waiting_time_s: summary.waiting_time_s,
            switches: summary.switches as f64,
            reward: summary.reward,
            timed_out: summary.timed_out,
        });
    }
    let report = MetricsReport::from_rows(label, scenario.name.clone(), rows);
    let summary = format!("{}\n{}\n", MetricsReport::SUMMARY_HEADER, report.summary_line());
    write_file(&dir.join("report.csv"), &summary)?;
    write_file(&dir.join("rows.csv"), &report.rows_table())?;
    manifest.logs.extend(["report.csv", "rows.csv"].map(PathBuf::from));
    manifest.finish(Ok(()));
    manifest.write(&dir).map_err(io_err(&dir))?;
    print!("{summary}");
    Ok(())
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let scenario = scenario_from_args(&args.scenario)?;
    let mut ctls = controllers(&args.policy, scenario.interval_mode)?;
    if ctls.is_empty() {
        return Err(CliError::Usage("sweep needs --baseline predefined and/or --checkpoint".into()));
    }
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let probabilities = if args.probabilities.is_empty() { SWEEP_PROBABILITIES.to_vec() } else { args.probabilities.clone() };
    if let Some(&p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::Usage(format!("probability {p} outside [0, 1]")));
    }
    let names = labels(&ctls);
    let dir = output_dir(args.out.as_ref(), &format!("sweep-{}", scenario.name));
    let extra = format!(
        "probabilities = [{}]\n",
        probabilities.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
    );
    let mut manifest = RunManifest::start(
        "sweep",
        eval_config_text("sweep", &names, args.runs, args.seed_base, &extra),
        scenario_toml(&scenario),
    );
    manifest.write(&dir).map_err(io_err(&dir))?;
    let seeds = seed_range(args.seed_base, args.runs);
    for (ctl, name) in ctls.iter_mut().zip(&names) {
        let points = malfunction_sweep(ctl.as_mut(), &scenario, &probabilities, &seeds)?;
        let file = PathBuf::from(format!("curve_{name}.csv"));
        let table = sweep_table(&points);
        write_file(&dir.join(&file), &table)?;
        manifest.logs.push(file);
        println!("# {name}");
        print!("{table}");
    }
    manifest.finish(Ok(()));
    manifest.write(&dir).map_err(io_err(&dir))?;
    Ok(())
}

pub fn replay(args: ReplayArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.dump).map_err(io_err(&args.dump))?;
    let records = parse_dump(&text)?;
    print!("{}", ReplaySummary::build(&records).render());
    Ok(())
}
