//! Target states: cat codes, realistic GKP states, Gaussian inputs, CV cluster and
//! IQP outputs, and a pure-loss channel for negative controls.

mod graph;
mod loss;
mod params;
mod single;

pub use graph::{
    build_cluster_state, build_cluster_state_with, build_input_product, build_iqp_output,
    build_iqp_output_with, iqp_phase, t_phase, t_phase_derivative, MAX_GRAPH_CUTOFF, MAX_GRAPH_MODES, MAX_SINGLE_CUTOFF,
};
pub use loss::apply_loss;
pub use params::{CatFamily, CatParams, GkpLogical, GkpParams, GraphSpec, IqpCircuitSpec, ModeKind, ResourceParams};
pub use single::{
    build_cat_basis, build_cat_basis_with, build_gaussian_input, build_gaussian_input_with, build_gkp_state,
    build_gkp_state_with, coherent_amplitudes, squeezed_vacuum_amplitudes, CatBasis, GaussianKind, SqueezeAxis,
};

use crate::fock::DEFAULT_TAIL_LIMIT;

/// How strictly constructors police weight near the Fock cutoff.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationGuard {
    pub limit: f64,
    pub allow_override: bool,
}

impl Default for TruncationGuard {
    fn default() -> Self {
        Self {
            limit: DEFAULT_TAIL_LIMIT,
            allow_override: false,
        }
    }
}

impl TruncationGuard {
    /// Reports but never refuses.
    pub fn permissive() -> Self {
        Self {
            allow_override: true,
            ..Self::default()
        }
    }
}
