//! Exact evaluation of canonical polynomials in a truncated Fock basis.
//!
//! Each normal-ordered monomial maps a basis state to at most one basis state,
//! so it is applied through a per-mode lookup table. Terms leaving the
//! truncated space are dropped, which is the exact compression onto it.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::poly::{Mono, NormalForm, OperatorPolynomial};
use crate::fock::{checked_dim, OperatorMatrix, StateRef, C64, DENSE_DIM_LIMIT};
use crate::{Error, Result};

/// `table[n] = Some((n', f))` with `M|n⟩ = f|n'⟩`.
type ModeTable = Vec<Option<(usize, f64)>>;

fn mode_table(m: Mono, cutoff: usize, eta: Option<f64>) -> Result<ModeTable> {
    let j = m.cre as usize;
    let k = m.ann as usize;
    if let Some(eta) = eta {
        if m.parity {
            if j != 0 || k != 0 {
                return Err(Error::UnsupportedShape(
                    "loss-evolved parity times ladder operators".into(),
                ));
            }
            // Heisenberg image of the parity under loss is (1 − 2η)^n̂
            let base = 1.0 - 2.0 * eta;
            return Ok((0..cutoff).map(|n| Some((n, base.powi(n as i32)))).collect());
        }
    }
    let scale = eta.map_or(1.0, |e| e.powf((j + k) as f64 / 2.0));
    Ok((0..cutoff)
        .map(|n| {
            if n < k {
                return None;
            }
            let mid = n - k;
            let out = mid + j;
            if out >= cutoff {
                return None;
            }
            let mut f = scale;
            for q in mid + 1..=n {
                f *= (q as f64).sqrt();
            }
            for q in mid + 1..=out {
                f *= (q as f64).sqrt();
            }
            if m.parity && out % 2 == 1 {
                f = -f;
            }
            Some((out, f))
        })
        .collect())
}

struct Evaluator {
    cutoff: usize,
    n_modes: usize,
    strides: Vec<usize>,
    levels: Vec<u16>,
}

impl Evaluator {
    fn new(cutoff: usize, n_modes: usize) -> Result<Self> {
        let dim = checked_dim(cutoff, n_modes)?;
        let strides: Vec<usize> = (0..n_modes).map(|k| cutoff.pow((n_modes - 1 - k) as u32)).collect();
        let mut levels = vec![0u16; dim * n_modes];
        for i in 0..dim {
            for k in 0..n_modes {
                levels[i * n_modes + k] = ((i / strides[k]) % cutoff) as u16;
            }
        }
        Ok(Self {
            cutoff,
            n_modes,
            strides,
            levels,
        })
    }

    fn dim(&self) -> usize {
        self.levels.len() / self.n_modes
    }

    fn tables(&self, key: &[Mono], eta: Option<f64>) -> Result<Vec<ModeTable>> {
        key.iter().map(|m| mode_table(*m, self.cutoff, eta)).collect()
    }

    /// Calls `visit(i, target, factor)` for every basis index the monomial keeps.
    fn for_each(&self, tables: &[ModeTable], mut visit: impl FnMut(usize, usize, f64)) {
        'outer: for i in 0..self.dim() {
            let lv = &self.levels[i * self.n_modes..(i + 1) * self.n_modes];
            let mut target = 0usize;
            let mut f = 1.0;
            for k in 0..self.n_modes {
                match tables[k][lv[k] as usize] {
                    Some((n, v)) => {
                        target += n * self.strides[k];
                        f *= v;
                    }
                    None => continue 'outer,
                }
            }
            visit(i, target, f);
        }
    }
}

fn check_state(nf: &NormalForm, state: &StateRef<'_>) -> Result<()> {
    if nf.n_modes() != state.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: nf.n_modes(),
            found: state.n_modes(),
        });
    }
    Ok(())
}

fn expectation_impl(nf: &NormalForm, state: StateRef<'_>, eta: Option<f64>) -> Result<C64> {
    check_state(nf, &state)?;
    let ev = Evaluator::new(state.cutoff(), state.n_modes())?;
    let keys: Vec<(&Vec<Mono>, &C64)> = nf.terms().iter().collect();
    let parts: Vec<Result<C64>> = keys
        .par_iter()
        .map(|(key, c)| {
            let tables = ev.tables(key, eta)?;
            let mut acc = C64::new(0.0, 0.0);
            match state {
                StateRef::Pure(v) => {
                    let amps = v.amplitudes();
                    ev.for_each(&tables, |i, t, f| acc += amps[t].conj() * amps[i] * f);
                }
                StateRef::Mixed(rho) => {
                    let m = rho.matrix();
                    ev.for_each(&tables, |i, t, f| acc += m[(i, t)] * f);
                }
            }
            Ok(acc * **c)
        })
        .collect();
    let mut total = C64::new(0.0, 0.0);
    for p in parts {
        total += p?;
    }
    Ok(total)
}

/// `⟨W⟩` in the truncated space, without materializing any matrix.
pub fn poly_expectation<'a>(nf: &NormalForm, state: impl Into<StateRef<'a>>) -> Result<C64> {
    expectation_impl(nf, state.into(), None)
}

/// `⟨W⟩` after independent pure loss of transmissivity `eta` on every mode,
/// evaluated with the Heisenberg image `â†ʲâᵏ ↦ η^{(j+k)/2} â†ʲâᵏ`.
pub fn poly_expectation_after_loss<'a>(
    nf: &NormalForm,
    state: impl Into<StateRef<'a>>,
    eta: f64,
) -> Result<C64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(crate::error::invalid("eta", format!("{eta} outside [0, 1]")));
    }
    expectation_impl(nf, state.into(), Some(eta))
}

/// Real expectation of a Hermitian polynomial; errors on a non-negligible imaginary part.
pub fn real_expectation<'a>(nf: &NormalForm, state: impl Into<StateRef<'a>>) -> Result<f64> {
    let v = poly_expectation(nf, state)?;
    real_part(v)
}

pub(crate) fn real_part(v: C64) -> Result<f64> {
    if v.im.abs() > 1e-9 * v.re.abs().max(1.0) {
        return Err(Error::NumericsFailure(format!(
            "expectation of a Hermitian polynomial has imaginary part {:.3e}",
            v.im
        )));
    }
    Ok(v.re)
}

/// Exact truncated matrix of a polynomial.
pub fn lower_to_matrix(poly: &OperatorPolynomial, cutoff: usize) -> Result<OperatorMatrix> {
    lower_normal_form(&poly.normal_form(), cutoff)
}

pub fn lower_normal_form(nf: &NormalForm, cutoff: usize) -> Result<OperatorMatrix> {
    let dim = checked_dim(cutoff, nf.n_modes())?;
    if dim > DENSE_DIM_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "dense matrix of dimension {dim} exceeds {DENSE_DIM_LIMIT}"
        )));
    }
    let ev = Evaluator::new(cutoff, nf.n_modes())?;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for (key, c) in nf.terms() {
        let tables = ev.tables(key, None)?;
        ev.for_each(&tables, |i, t, f| m[(t, i)] += c * f);
    }
    let hermitian = nf.is_hermitian(1e-12);
    OperatorMatrix::new(m, cutoff, nf.n_modes(), hermitian)
}

/// `M|ψ⟩` for a polynomial acting on a flat amplitude vector.
#[cfg(test)]
pub(crate) fn apply_normal_form(nf: &NormalForm, amps: &[C64], cutoff: usize) -> Result<Vec<C64>> {
    let ev = Evaluator::new(cutoff, nf.n_modes())?;
    if amps.len() != ev.dim() {
        return Err(Error::DimensionMismatch {
            expected: ev.dim(),
            found: amps.len(),
        });
    }
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    for (key, c) in nf.terms() {
        let tables = ev.tables(key, None)?;
        ev.for_each(&tables, |i, t, f| out[t] += c * f * amps[i]);
    }
    Ok(out)
}
