//! Flat JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use simlab_core::diagnostics::MixingBins;
use simlab_core::particle::SampleGrid;
use simlab_core::{InitialData, Model, Placement, SimParams};

use crate::error::{CliError, Result};

/// Samples per run when `sample_every` is left out.
pub const DEFAULT_SAMPLES: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Particle1,
    Particle2,
    Ode,
    Kinetic,
    Mixing,
    ChaosSweep,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Particle1 => "particle1",
            Engine::Particle2 => "particle2",
            Engine::Ode => "ode",
            Engine::Kinetic => "kinetic",
            Engine::Mixing => "mixing",
            Engine::ChaosSweep => "chaos-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementName {
    #[default]
    Homogeneous,
    Concentrated,
}

impl From<PlacementName> for Placement {
    fn from(p: PlacementName) -> Self {
        match p {
            PlacementName::Homogeneous => Placement::Homogeneous,
            PlacementName::Concentrated => Placement::ConcentratedDisk,
        }
    }
}

fn default_side() -> f64 {
    500.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub engine: Engine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_side")]
    pub side: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub mu: f64,
    pub r0_radius: f64,
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to `1 - i0 - r0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(default)]
    pub i0: f64,
    #[serde(default)]
    pub r0: f64,
    #[serde(default)]
    pub placement: PlacementName,
    pub t_end: f64,
    /// Defaults to `t_end / 200`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<f64>,
    /// RK4 step for the `ode` engine; defaults to `dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nv: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bv: Option<usize>,
    /// Particle model (1 or 2) for `chaos-sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_list: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn config_error(path: &str, reason: impl Into<String>) -> CliError {
    CliError::Config { path: path.to_string(), reason: reason.into() }
}

/// Maps a core parameter name onto the config key that feeds it.
fn config_key(field: &str) -> &str {
    match field {
        "N" => "n",
        "D" => "side",
        "s0+i0+r0" => "s0",
        other => other,
    }
}

fn lift(err: simlab_core::Error) -> CliError {
    match err {
        simlab_core::Error::InvalidParam { field, reason } => config_error(config_key(field), reason),
        other => CliError::Core(other),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(CliError::Parse)?;
        Ok(cfg)
    }

    /// Reads a config file, or the `config` object of a run manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(CliError::Parse)?;
        let inner = match value.get("config") {
            Some(cfg) if value.get("tool").is_some() => cfg.clone(),
            _ => value,
        };
        serde_json::from_value(inner).map_err(CliError::Parse)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn sample_every(&self) -> f64 {
        self.sample_every.unwrap_or(self.t_end / DEFAULT_SAMPLES)
    }

    pub fn ode_step(&self) -> f64 {
        self.ode_step.unwrap_or(self.dt)
    }

    pub fn model(&self) -> Result<Model> {
        let id = match self.engine {
            Engine::Particle1 => 1,
            Engine::Particle2 => 2,
            _ => self.model.ok_or_else(|| config_error("model", "required for this engine"))?,
        };
        Model::from_id(id).map_err(|_| config_error("model", format!("must be 1 or 2, got {id}")))
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        let s0 = self.s0.unwrap_or(1.0 - self.i0 - self.r0);
        InitialData::new(s0, self.i0, self.r0, self.placement.into()).map_err(lift)
    }

    /// Particle constants for a given agent count; `n` is ignored by
    /// engines that have no agents.
    pub fn sim_params_for(&self, n: usize, seed: u64) -> SimParams {
        SimParams {
            n,
            side: self.side,
            lambda: self.lambda,
            gamma: self.gamma,
            mu: self.mu,
            r0_radius: self.r0_radius,
            dt: self.dt,
            seed,
        }
    }

    pub fn sim_params(&self) -> Result<SimParams> {
        let n = match self.engine {
            Engine::Ode | Engine::Kinetic | Engine::ChaosSweep => self.n.unwrap_or(1),
            _ => self.n.ok_or_else(|| config_error("n", "required for this engine"))?,
        };
        Ok(self.sim_params_for(n, self.seed))
    }

    pub fn bins(&self) -> Result<MixingBins> {
        let bx = self.bx.ok_or_else(|| config_error("bx", "required for the mixing engine"))?;
        let bv = self.bv.ok_or_else(|| config_error("bv", "required for the mixing engine"))?;
        if bx < 2 {
            return Err(config_error("bx", "need at least 2 boxes"));
        }
        if bv < 2 {
            return Err(config_error("bv", "need at least 2 boxes"));
        }
        Ok(MixingBins { bx, bv })
    }

    pub fn grid_shape(&self) -> Result<(usize, usize)> {
        let nx = self.nx.ok_or_else(|| config_error("nx", "required for the kinetic engine"))?;
        let nv = self.nv.ok_or_else(|| config_error("nv", "required for the kinetic engine"))?;
        if nx < 4 {
            return Err(config_error("nx", "need at least 4 cells"));
        }
        if nv < 4 {
            return Err(config_error("nv", "need at least 4 headings"));
        }
        Ok((nx, nv))
    }

    /// Agent counts and seeds a sweep expands into.
    pub fn sweep_axes(&self) -> (Vec<usize>, Vec<u64>) {
        let ns = self.n_list.clone().unwrap_or_else(|| self.n.into_iter().collect());
        let seeds = self.seed_list.clone().unwrap_or_else(|| vec![self.seed]);
        (ns, seeds)
    }

    /// Checks every field the selected engine reads.
    pub fn validate(&self) -> Result<()> {
        let params = self.sim_params()?;
        params.validate().map_err(lift)?;
        self.initial_data()?;
        let sampler_dt = if self.engine == Engine::Ode { self.ode_step() } else { self.dt };
        SampleGrid::new(self.t_end, self.sample_every(), sampler_dt).map_err(lift)?;
        if self.engine == Engine::Ode && !(self.ode_step() > 0.0) {
            return Err(config_error("ode_step", "must be > 0"));
        }
        match self.engine {
            Engine::Particle1 | Engine::Particle2 | Engine::Ode => {}
            Engine::Kinetic => {
                self.grid_shape()?;
            }
            Engine::Mixing => {
                self.bins()?;
            }
            Engine::ChaosSweep => {
                self.model()?;
                let (ns, seeds) = self.sweep_axes();
                if ns.is_empty() {
                    return Err(config_error("n_list", "required and non-empty for chaos-sweep"));
                }
                if seeds.is_empty() {
                    return Err(config_error("seed_list", "must be non-empty"));
                }
                for (k, &n) in ns.iter().enumerate() {
                    if n < 2 {
                        return Err(config_error(&format!("n_list[{k}]"), "need at least 2 agents"));
                    }
                }
            }
        }
        Ok(())
    }
}
