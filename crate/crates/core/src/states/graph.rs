//! Cluster and IQP states: position-diagonal gates applied to product inputs.
//!
//! All gates here are `exp(iΦ(x̂₀,…,x̂ₙ₋₁))`. They are applied in a padded space
//! through the eigenbasis of the truncated position operator (Gauss–Hermite
//! nodes), then the state is cut back to the requested cutoff.

use std::f64::consts::PI;

use super::params::{GraphSpec, IqpCircuitSpec, ModeKind, ResourceParams};
use super::single::{gkp_amplitudes, squeezed_amplitudes, SqueezeAxis};
use super::TruncationGuard;
use crate::fock::{apply_mode_matrix, linalg, FockVector, C64};
use crate::{Error, Result};

/// Desk-scale limits: at most `MAX_GRAPH_MODES` modes and at most
/// `MAX_GRAPH_CUTOFF^MAX_GRAPH_MODES` amplitudes, with a per-mode ceiling.
pub const MAX_GRAPH_MODES: usize = 4;
pub const MAX_GRAPH_CUTOFF: usize = 30;
pub const MAX_SINGLE_CUTOFF: usize = 200;
const PADDED_AMPLITUDES: usize = 1 << 21;

/// Cubic phase of the T gate, `φ(x) = (π/4)[2(x/√π)³ + (x/√π)² − 2x/√π]`.
pub fn t_phase(x: f64) -> f64 {
    let u = x / PI.sqrt();
    PI / 4.0 * (2.0 * u * u * u + u * u - 2.0 * u)
}

/// `φ'(x) = 3x²/(2√π) + x/2 − √π/2`.
pub fn t_phase_derivative(x: f64) -> f64 {
    3.0 * x * x / (2.0 * PI.sqrt()) + x / 2.0 - PI.sqrt() / 2.0
}

fn padded_dim(cutoff: usize, n_modes: usize) -> usize {
    let cap = (PADDED_AMPLITUDES as f64).powf(1.0 / n_modes as f64).floor() as usize;
    (cutoff + 30).min(cap).max(cutoff)
}

fn check_scale(n_modes: usize, cutoff: usize) -> Result<()> {
    let budget = (MAX_GRAPH_CUTOFF as f64).powi(MAX_GRAPH_MODES as i32);
    if n_modes > MAX_GRAPH_MODES || cutoff > MAX_SINGLE_CUTOFF || (cutoff as f64).powi(n_modes as i32) > budget {
        return Err(Error::ResourceLimit(format!(
            "{n_modes} modes at cutoff {cutoff} exceeds the desk-scale budget of {MAX_GRAPH_MODES} modes at cutoff {MAX_GRAPH_CUTOFF}"
        )));
    }
    Ok(())
}

fn input_product(kinds: &[ModeKind], params: &ResourceParams, dim: usize) -> Result<Vec<C64>> {
    let mut amps = vec![C64::new(1.0, 0.0)];
    for kind in kinds {
        let single = match kind {
            ModeKind::SqueezedVacuum => squeezed_amplitudes(params.squeezing_r, SqueezeAxis::Momentum, dim),
            ModeKind::GkpPlus => gkp_amplitudes(&params.gkp_plus(), dim).0,
        };
        let mut next = Vec::with_capacity(amps.len() * dim);
        for a in &amps {
            for s in &single {
                next.push(a * s);
            }
        }
        amps = next;
    }
    Ok(amps)
}

/// Multiplies by `exp(iΦ(x))` with `Φ` evaluated on the position nodes of each mode.
pub(crate) fn apply_position_phase(
    amps: &[C64],
    dim: usize,
    n_modes: usize,
    phase: impl Fn(&[f64]) -> f64,
) -> Result<Vec<C64>> {
    let eig = linalg::hermitian_eigen(&linalg::quadrature(dim, 0.0))?;
    let to_nodes = eig.vectors.adjoint();
    let mut v = amps.to_vec();
    for mode in 0..n_modes {
        v = apply_mode_matrix(&v, dim, n_modes, mode, &to_nodes);
    }
    let mut xs = vec![0.0; n_modes];
    let mut levels = vec![0usize; n_modes];
    for (i, a) in v.iter_mut().enumerate() {
        crate::fock::unflatten(i, dim, n_modes, &mut levels);
        for k in 0..n_modes {
            xs[k] = eig.values[levels[k]];
        }
        *a *= C64::from_polar(1.0, phase(&xs));
    }
    for mode in 0..n_modes {
        v = apply_mode_matrix(&v, dim, n_modes, mode, &eig.vectors);
    }
    let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let before: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm - before).abs() > 1e-8 * before.max(1.0) {
        return Err(Error::NumericsFailure(format!(
            "position-diagonal gate changed the norm from {before} to {norm}"
        )));
    }
    Ok(v)
}

fn finish(amps: Vec<C64>, dim: usize, n_modes: usize, cutoff: usize, guard: TruncationGuard, what: &str) -> Result<FockVector> {
    let full = FockVector::new(amps, dim, n_modes)?;
    let (cut, lost) = full.recut(cutoff)?;
    let tail = lost.max(cut.tail_weight());
    if tail > guard.limit && !guard.allow_override {
        return Err(Error::TruncationUnsafe {
            what: what.to_string(),
            tail,
            limit: guard.limit,
        });
    }
    Ok(cut)
}

/// `(∏ CZ)(⊗ inputs)` over the graph edges.
pub fn build_cluster_state(spec: &GraphSpec, params: &ResourceParams, cutoff: usize) -> Result<FockVector> {
    build_cluster_state_with(spec, params, cutoff, TruncationGuard::default())
}

pub fn build_cluster_state_with(
    spec: &GraphSpec,
    params: &ResourceParams,
    cutoff: usize,
    guard: TruncationGuard,
) -> Result<FockVector> {
    spec.validate()?;
    params.validate()?;
    let iqp = IqpCircuitSpec {
        graph: spec.clone(),
        n_z: vec![0; spec.n_modes()],
        n_t: vec![0; spec.n_modes()],
    };
    build_iqp_inner(&iqp, params, cutoff, guard, "cluster state")
}

/// Product-state inputs only, no gates.
pub fn build_input_product(kinds: &[ModeKind], params: &ResourceParams, cutoff: usize, guard: TruncationGuard) -> Result<FockVector> {
    params.validate()?;
    check_scale(kinds.len(), cutoff)?;
    let dim = padded_dim(cutoff, kinds.len());
    let amps = input_product(kinds, params, dim)?;
    finish(amps, dim, kinds.len(), cutoff, guard, "input product state")
}

/// `(∏ gates)(⊗ inputs)` for an IQP circuit; all gates commute.
pub fn build_iqp_output(spec: &IqpCircuitSpec, params: &ResourceParams, cutoff: usize) -> Result<FockVector> {
    build_iqp_output_with(spec, params, cutoff, TruncationGuard::default())
}

pub fn build_iqp_output_with(
    spec: &IqpCircuitSpec,
    params: &ResourceParams,
    cutoff: usize,
    guard: TruncationGuard,
) -> Result<FockVector> {
    spec.validate()?;
    params.validate()?;
    build_iqp_inner(spec, params, cutoff, guard, "IQP output state")
}

/// Total gate phase `Σᵢ [n_T φ(xᵢ) + n_Z √π xᵢ] + Σ_edges xᵢxⱼ`.
pub fn iqp_phase(spec: &IqpCircuitSpec, xs: &[f64]) -> f64 {
    let mut phi = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        phi += spec.n_t[i] as f64 * t_phase(x) + spec.n_z[i] as f64 * PI.sqrt() * x;
    }
    for &(i, j) in &spec.graph.edges {
        phi += xs[i] * xs[j];
    }
    phi
}

fn build_iqp_inner(
    spec: &IqpCircuitSpec,
    params: &ResourceParams,
    cutoff: usize,
    guard: TruncationGuard,
    what: &str,
) -> Result<FockVector> {
    let n = spec.graph.n_modes();
    check_scale(n, cutoff)?;
    let dim = padded_dim(cutoff, n);
    let inputs = input_product(&spec.graph.mode_kinds, params, dim)?;
    let out = apply_position_phase(&inputs, dim, n, |xs| iqp_phase(spec, xs))?;
    finish(out, dim, n, cutoff, guard, what)
}
