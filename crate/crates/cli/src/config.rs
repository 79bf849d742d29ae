//! Experiment configuration: one JSON file describes one run.

use bosonic_cert::certifier::{ComplexityParams, CertifyOptions};
use bosonic_cert::fock::FockVector;
use bosonic_cert::states::{
    build_cat_basis_with, build_cluster_state_with, build_gaussian_input_with, build_gkp_state_with, build_iqp_output_with,
    CatParams, GaussianKind, GkpParams, GraphSpec, IqpCircuitSpec, ResourceParams, TruncationGuard,
};
use bosonic_cert::witness::WitnessSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Certify,
    WitnessReport,
    Complexity,
    SampleDump,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatLogical {
    #[default]
    Zero,
    One,
}

/// Pure state to prepare before the optional loss channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateFamily {
    Vacuum {
        #[serde(default = "one")]
        n_modes: usize,
    },
    Cat {
        params: CatParams,
        #[serde(default)]
        logical: CatLogical,
    },
    Gkp {
        params: GkpParams,
    },
    Gaussian {
        input: GaussianKind,
    },
    Cluster {
        graph: GraphSpec,
        resource: ResourceParams,
    },
    Iqp {
        circuit: IqpCircuitSpec,
        resource: ResourceParams,
    },
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub family: StateFamily,
    /// Pure-loss transmissivity applied to every mode.
    #[serde(default)]
    pub loss: Option<f64>,
}

impl StateConfig {
    pub fn build(&self, cutoff: usize, guard: TruncationGuard) -> Result<FockVector, CliError> {
        let v = match &self.family {
            StateFamily::Vacuum { n_modes } => FockVector::vacuum(cutoff, *n_modes)?,
            StateFamily::Cat { params, logical } => {
                let basis = build_cat_basis_with(params, cutoff, guard)?;
                match logical {
                    CatLogical::Zero => basis.zero,
                    CatLogical::One => basis.one,
                }
            }
            StateFamily::Gkp { params } => build_gkp_state_with(params, cutoff, guard)?,
            StateFamily::Gaussian { input } => build_gaussian_input_with(*input, cutoff, guard)?,
            StateFamily::Cluster { graph, resource } => build_cluster_state_with(graph, resource, cutoff, guard)?,
            StateFamily::Iqp { circuit, resource } => build_iqp_output_with(circuit, resource, cutoff, guard)?,
        };
        Ok(v)
    }
}

/// Which measurement a sample dump records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SampleMeasurement {
    Homodyne { angles: Vec<f64> },
    Heterodyne,
    Parity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub measurement: SampleMeasurement,
    pub shots: usize,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
}

fn default_bin_width() -> f64 {
    0.05
}

/// Artifact file names, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub report: String,
    pub witness: String,
    pub complexity: String,
    pub samples: String,
    pub histogram: String,
    pub metadata: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            report: "report.json".into(),
            witness: "witness.json".into(),
            complexity: "complexity.json".into(),
            samples: "samples.csv".into(),
            histogram: "histogram.csv".into(),
            metadata: "metadata.json".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default)]
    pub state: Option<StateConfig>,
    #[serde(default)]
    pub witness: Option<WitnessSpec>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub certify: CertifyOptions,
    #[serde(default)]
    pub complexity: Option<ComplexityParams>,
    #[serde(default)]
    pub sample: Option<SampleConfig>,
    #[serde(default)]
    pub outputs: Outputs,
}

pub fn require<'a, T>(v: &'a Option<T>, field: &str, task: Task) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::Validation {
        field: field.into(),
        message: format!("required by task {task:?}"),
    })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation {
            field: "config".into(),
            message: e.to_string(),
        })
    }

    /// Field presence and range checks that do not need any construction.
    pub fn validate(&self) -> Result<(), CliError> {
        let task = self.task;
        if let Some(state) = &self.state {
            if let Some(eta) = state.loss {
                if !(0.0..=1.0).contains(&eta) {
                    return Err(CliError::field("state.loss", format!("{eta} outside [0, 1]")));
                }
            }
        }
        if let Some(w) = &self.witness {
            w.validate()?;
        }
        match task {
            Task::Certify => {
                require(&self.state, "state", task)?;
                require(&self.witness, "witness", task)?;
                require(&self.cutoff, "cutoff", task)?;
                let eps = *require(&self.epsilon, "epsilon", task)?;
                let delta = *require(&self.delta, "delta", task)?;
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(CliError::field("epsilon", format!("{eps} outside (0, 1)")));
                }
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(CliError::field("delta", format!("{delta} outside (0, 1)")));
                }
            }
            Task::WitnessReport => {
                require(&self.witness, "witness", task)?;
            }
            Task::Complexity => {
                let p = require(&self.complexity, "complexity", task)?;
                if p.sigma.sigma.is_empty() && (self.state.is_none() || self.witness.is_none() || self.cutoff.is_none()) {
                    return Err(CliError::field(
                        "complexity.sigma",
                        "give moment bounds, or a state, witness and cutoff to derive them",
                    ));
                }
            }
            Task::SampleDump => {
                require(&self.state, "state", task)?;
                require(&self.cutoff, "cutoff", task)?;
                let s = require(&self.sample, "sample", task)?;
                if s.shots == 0 {
                    return Err(CliError::field("sample.shots", "must be positive"));
                }
                if !(s.bin_width > 0.0 && s.bin_width.is_finite()) {
                    return Err(CliError::field("sample.bin_width", format!("{} must be positive", s.bin_width)));
                }
            }
        }
        Ok(())
    }
}
