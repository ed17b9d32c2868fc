//! Run configuration: TOML file, then command-line overrides on top.

use std::path::{Path, PathBuf};

use greenwave::rl::train::TrainSpec;
use greenwave::rl::{Hyperparams, IntervalMode, Method};
use greenwave::scenario::{unbalanced_schedule, Reduction, Scale, ScenarioConfig, ScenarioError};
use greenwave::sim::{FlowTable, VehicleSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_CHECKPOINT_EVERY: usize = 25;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("invalid config field `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Scenario preset plus optional field overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub preset: String,
    pub total_vehicles: Option<usize>,
    pub collision_probability: Option<f64>,
    pub action_disturbance: Option<f64>,
    pub watchdog_s: Option<u32>,
    /// Only meaningful for the `unbalanced` preset.
    pub reduction: Option<Reduction>,
    pub vehicle: Option<VehicleSpec>,
    pub flow: Option<FlowTable>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            preset: "balanced".into(),
            total_vehicles: None,
            collision_probability: None,
            action_disturbance: None,
            watchdog_s: None,
            reduction: None,
            vehicle: None,
            flow: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub intervals: IntervalMode,
    pub scale: Scale,
    /// Defaults to the scale's episode budget.
    pub episodes: Option<usize>,
    pub seed: u64,
    pub checkpoint_every: usize,
    pub log_wallclock: bool,
    pub out_dir: Option<PathBuf>,
    pub scenario: ScenarioSection,
    pub hyper: Hyperparams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::Ppo,
            intervals: IntervalMode::Fixed,
            scale: Scale::Desk,
            episodes: None,
            seed: 1,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            log_wallclock: false,
            out_dir: None,
            scenario: ScenarioSection::default(),
            hyper: Hyperparams::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    pub fn episodes(&self) -> usize {
        self.episodes.unwrap_or_else(|| self.scale.episodes())
    }

    pub fn scenario_config(&self) -> Result<ScenarioConfig, ConfigError> {
        build_scenario(&self.scenario, self.scale, self.intervals)
    }

    /// Checks field ranges and resolves the full training spec.
    pub fn train_spec(&self) -> Result<TrainSpec, ConfigError> {
        let h = &self.hyper;
        let unit = |field: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::Field { field, reason: format!("must lie in [0, 1], got {v}") })
            }
        };
        unit("hyper.gamma", h.gamma)?;
        unit("hyper.gae_lambda", h.gae_lambda)?;
        unit("hyper.clip", h.clip)?;
        unit("hyper.epsilon.start", h.epsilon.start)?;
        unit("hyper.epsilon.end", h.epsilon.end)?;
        if !(h.lr.initial > 0.0 && h.lr.initial.is_finite()) {
            return Err(ConfigError::Field { field: "hyper.lr.initial", reason: format!("must be positive, got {}", h.lr.initial) });
        }
        for (field, v) in [
            ("hyper.batch_size", h.batch_size),
            ("hyper.rollout_size", h.rollout_size),
            ("hyper.passes", h.passes),
            ("hyper.minibatches", h.minibatches),
            ("hyper.replay_capacity", h.replay_capacity),
            ("hyper.sync_period", h.sync_period as usize),
        ] {
            if v == 0 {
                return Err(ConfigError::Field { field, reason: "must be at least 1".into() });
            }
        }
        if h.batch_size > h.replay_capacity {
            return Err(ConfigError::Field { field: "hyper.batch_size", reason: "larger than the replay capacity".into() });
        }
        Ok(TrainSpec {
            method: self.method,
            scenario: self.scenario_config()?,
            episodes: self.episodes(),
            seed: self.seed,
            hyper: self.hyper.clone(),
            checkpoint_every: self.checkpoint_every,
            log_wallclock: self.log_wallclock,
        })
    }
}

pub fn build_scenario(section: &ScenarioSection, scale: Scale, mode: IntervalMode) -> Result<ScenarioConfig, ConfigError> {
    let mut s = ScenarioConfig::preset(&section.preset, scale, mode)?;
    if let Some(n) = section.total_vehicles {
        s.total_vehicles = n;
    }
    if let Some(p) = section.collision_probability {
        s.collision.probability = p;
    }
    if let Some(p) = section.action_disturbance {
        s.action_disturbance = p;
    }
    if let Some(w) = section.watchdog_s {
        s.watchdog_s = w;
    }
    if let Some(r) = section.reduction {
        if section.preset != "unbalanced" {
            return Err(ConfigError::Field {
                field: "scenario.reduction",
                reason: format!("only applies to the unbalanced preset, not `{}`", section.preset),
            });
        }
        s.schedule = unbalanced_schedule(r);
    }
    if let Some(v) = section.vehicle {
        s.vehicle = v;
    }
    if let Some(f) = section.flow {
        s.flow = f;
    }
    s.validate()?;
    Ok(s)
}
