use nalgebra::DMatrix;

use crate::error::invalid;
use crate::fock::{apply_mode_matrix, DensityMatrix, StateRef, C64, DENSE_DIM_LIMIT};
use crate::{Error, Result};

/// Kraus operators `Kₖ = Σₙ √C(n,k) (1−η)^{k/2} η^{(n−k)/2} |n−k⟩⟨n|`.
fn kraus(eta: f64, cutoff: usize) -> Vec<DMatrix<C64>> {
    (0..cutoff)
        .map(|k| {
            let mut m = DMatrix::zeros(cutoff, cutoff);
            for n in k..cutoff {
                let c = crate::witness::poly::binomial(n as u32, k as u32).sqrt()
                    * (1.0 - eta).powf(k as f64 / 2.0)
                    * eta.powf((n - k) as f64 / 2.0);
                m[(n - k, n)] = C64::new(c, 0.0);
            }
            m
        })
        .collect()
}

/// Independent pure loss of transmissivity `eta` on every mode.
pub fn apply_loss<'a>(state: impl Into<StateRef<'a>>, eta: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", format!("{eta} outside [0, 1]")));
    }
    let state = state.into();
    let (cutoff, n_modes, dim) = (state.cutoff(), state.n_modes(), state.dim());
    if dim > DENSE_DIM_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "loss output of dimension {dim} exceeds the dense limit {DENSE_DIM_LIMIT}"
        )));
    }
    let ops = kraus(eta, cutoff);
    // branch every ensemble member through every Kraus operator, mode by mode
    let mut branches: Vec<Vec<C64>> = state
        .ensemble()?
        .into_iter()
        .map(|(p, v)| v.amplitudes().iter().map(|a| a * p.sqrt()).collect())
        .collect();
    for mode in 0..n_modes {
        let mut next = Vec::with_capacity(branches.len() * cutoff);
        for b in &branches {
            for k in &ops {
                let out = apply_mode_matrix(b, cutoff, n_modes, mode, k);
                if out.iter().any(|a| a.norm_sqr() > 1e-30) {
                    next.push(out);
                }
            }
        }
        branches = next;
    }
    let cols = DMatrix::from_fn(dim, branches.len(), |r, c| branches[c][r]);
    let rho = &cols * cols.adjoint();
    let trace: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
    if (trace - 1.0).abs() > 1e-8 {
        return Err(Error::NumericsFailure(format!("loss channel changed the trace to {trace}")));
    }
    DensityMatrix::new(rho, cutoff, n_modes)
}
