//! Truncated Fock-space numerics.
//!
//! Multimode states are stored as flat amplitude arrays over the product basis
//! `|n₀ n₁ … n_{k-1}⟩`, mode 0 being the slowest index: the flat index is
//! `Σₖ nₖ·cutoff^(n_modes-1-k)`. Every operator matrix uses the same ordering.
//!
//! Quadratures follow the ℏ = 1 convention `x̂ = (â+â†)/√2`, `p̂ = (â−â†)/(√2 i)`,
//! so the vacuum has `⟨x̂²⟩ = 1/2`.

pub mod hermite;
pub(crate) mod linalg;
mod operators;
pub(crate) mod pdf;
mod state;

pub use operators::{
    build_elementary_operator, eigendecompose, expectation, span_projector, tensor_embed,
    trace_distance, ElementaryKind, Eigensystem, ModeFactor, OperatorMatrix,
};
pub use pdf::{quadrature_pdf, GridSpec, QuadratureGrid};
pub use state::{DensityMatrix, FockVector, State, StateRef};

pub use num_complex::Complex64 as C64;

/// Largest tail weight a state may carry before operations refuse it.
pub const DEFAULT_TAIL_LIMIT: f64 = 1e-6;

/// Fraction of the cutoff above which population counts as truncation tail.
pub const TAIL_FRACTION: f64 = 0.75;

/// Largest Hilbert-space dimension for which dense matrices are materialized.
pub const DENSE_DIM_LIMIT: usize = 4096;

pub(crate) fn checked_dim(cutoff: usize, n_modes: usize) -> crate::Result<usize> {
    if cutoff < 2 {
        return Err(crate::Error::InvalidDimension(format!("cutoff {cutoff} < 2")));
    }
    if n_modes == 0 {
        return Err(crate::Error::InvalidDimension("zero modes".into()));
    }
    let mut dim = 1usize;
    for _ in 0..n_modes {
        dim = dim
            .checked_mul(cutoff)
            .filter(|d| *d <= 1 << 26)
            .ok_or_else(|| {
                crate::Error::ResourceLimit(format!("{n_modes} modes at cutoff {cutoff}"))
            })?;
    }
    Ok(dim)
}

/// First Fock level counted as tail for a given cutoff.
pub fn tail_level(cutoff: usize) -> usize {
    ((cutoff as f64) * TAIL_FRACTION).ceil() as usize
}

/// Splits a flat index into per-mode levels.
pub(crate) fn unflatten(mut index: usize, cutoff: usize, n_modes: usize, levels: &mut [usize]) {
    for k in (0..n_modes).rev() {
        levels[k] = index % cutoff;
        index /= cutoff;
    }
}

/// Applies a single-mode matrix to one mode of a flat multimode vector.
pub(crate) fn apply_mode_matrix(
    input: &[C64],
    cutoff: usize,
    n_modes: usize,
    mode: usize,
    m: &nalgebra::DMatrix<C64>,
) -> Vec<C64> {
    debug_assert_eq!(m.nrows(), cutoff);
    let stride = cutoff.pow((n_modes - 1 - mode) as u32);
    let outer = input.len() / (cutoff * stride);
    let mut out = vec![C64::new(0.0, 0.0); input.len()];
    let mut col = vec![C64::new(0.0, 0.0); cutoff];
    for o in 0..outer {
        let base = o * cutoff * stride;
        for s in 0..stride {
            for n in 0..cutoff {
                col[n] = input[base + n * stride + s];
            }
            for r in 0..cutoff {
                let mut acc = C64::new(0.0, 0.0);
                for (c, v) in col.iter().enumerate() {
                    let e = m[(r, c)];
                    if e.re != 0.0 || e.im != 0.0 {
                        acc += e * v;
                    }
                }
                out[base + r * stride + s] = acc;
            }
        }
    }
    out
}
