//! Experiment configuration files.
//!
//! A configuration is a TOML document with sections `[neuron]`,
//! `[memristor]`, `[stdp]`, `[pipeline]`, `[network]`, `[stimuli]` and
//! `[run]`. Every section and every key is optional and defaults to the
//! module-level default; unknown keys are rejected with an error naming
//! the key and its location.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, Network};
use crate::memristor::MemristorParams;
use crate::neuron::NeuronParams;
use crate::plasticity::{StdpIdealParams, StdpPipelineConfig};
use crate::trace::NeuronId;

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub neuron: NeuronParams,
    pub memristor: MemristorParams,
    pub stdp: StdpIdealParams,
    pub pipeline: StdpPipelineConfig,
    pub network: NetworkSection,
    pub stimuli: StimuliSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    /// Number of neurons; all share the `[neuron]` parameters.
    pub neurons: usize,
    pub synapses: Vec<SynapseSpec>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            neurons: 1,
            synapses: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SynapseSpec {
    pub pre: usize,
    pub post: usize,
    #[serde(default = "default_x0")]
    pub x0: f64,
    #[serde(default = "default_plastic")]
    pub plastic: bool,
}

fn default_x0() -> f64 {
    0.5
}

fn default_plastic() -> bool {
    true
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct StimuliSection {
    pub events: Vec<StimulusSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StimulusSpec {
    pub target: usize,
    pub time: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// End of the simulated interval (ms).
    pub t_end: f64,
    /// Step bound for device integration outside write pulses (ms).
    pub dt_max: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            dt_max: 1e-3,
        }
    }
}

impl ExperimentConfig {
    /// Parse a configuration document. Parse failures carry the location
    /// and key reported by the TOML parser.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.neuron.validate().map_err(|e| ConfigError::Invalid {
            message: e.to_string(),
        })?;
        self.memristor
            .validate()
            .map_err(|e| ConfigError::Invalid {
                message: e.to_string(),
            })?;
        self.stdp.validate().map_err(|e| ConfigError::Invalid {
            message: e.to_string(),
        })?;
        self.pipeline.validate().map_err(|e| ConfigError::Invalid {
            message: e.to_string(),
        })?;
        if !self.run.t_end.is_finite() || self.run.t_end < 0.0 {
            return Err(ConfigError::Invalid {
                message: format!(
                    "run.t_end = {} must be finite and nonnegative",
                    self.run.t_end
                ),
            });
        }
        if !self.run.dt_max.is_finite() || self.run.dt_max <= 0.0 {
            return Err(ConfigError::Invalid {
                message: format!(
                    "run.dt_max = {} must be positive and finite",
                    self.run.dt_max
                ),
            });
        }
        Ok(())
    }

    /// Instantiate the configured network.
    pub fn build_network(&self) -> Result<Network, EngineError> {
        let mut net = Network::new();
        let mut ids = Vec::with_capacity(self.network.neurons);
        for _ in 0..self.network.neurons {
            ids.push(net.add_neuron(self.neuron)?);
        }
        for syn in &self.network.synapses {
            net.add_synapse(
                NeuronId(syn.pre),
                NeuronId(syn.post),
                syn.x0,
                self.memristor,
                self.pipeline,
                syn.plastic,
            )?;
        }
        for stim in &self.stimuli.events {
            net.add_stimulus(NeuronId(stim.target), stim.time, stim.amplitude)?;
        }
        Ok(net)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("config parse error: {message}")]
    Parse { message: String },
    #[error("invalid configuration: {message}")]
    Invalid { message: String },
}
