//! Single-mode constructors: cats, Gaussian inputs and realistic GKP states.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::params::{CatFamily, CatParams, GkpParams};
use super::TruncationGuard;
use crate::error::invalid;
use crate::fock::{hermite, linalg, FockVector, C64};
use crate::{Error, Result};

/// `e^{−|α|²/2} αⁿ/√n!` for `n < dim`.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(dim);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        out.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// `S(r)|0⟩` with `S(r) = exp(½(r*â² − r â†²))`, first `dim` levels.
pub fn squeezed_vacuum_amplitudes(r: C64, dim: usize) -> Vec<C64> {
    let s = r.norm();
    let t = -C64::from_polar(s.tanh(), r.arg());
    let mut out = vec![C64::new(0.0, 0.0); dim];
    let mut c = C64::new(1.0 / s.cosh().sqrt(), 0.0);
    let mut n = 0usize;
    while 2 * n < dim {
        out[2 * n] = c;
        // √((2n+2)!)/(2^{n+1}(n+1)!) over √((2n)!)/(2ⁿn!) = √((2n+1)(2n+2))/(2(n+1))
        let ratio = (((2 * n + 1) * (2 * n + 2)) as f64).sqrt() / (2.0 * (n + 1) as f64);
        c = c * t * ratio;
        n += 1;
    }
    out
}

/// Padded working dimension for exponentiating a generator before truncation.
fn padded(cutoff: usize) -> usize {
    (2 * cutoff).max(cutoff + 60)
}

/// Applies `S(r)` to a vector of the padded dimension.
fn apply_squeeze(v: &[C64], r: C64) -> Result<Vec<C64>> {
    if r.norm() == 0.0 {
        return Ok(v.to_vec());
    }
    let dim = v.len();
    let a = linalg::annihilation(dim);
    let a2 = &a * &a;
    let g = (&a2 * r.conj() - a2.adjoint() * r) * C64::new(0.5, 0.0);
    let u = linalg::expm_anti_hermitian(&g)?;
    let out = u * DVector::from_column_slice(v);
    Ok(out.iter().cloned().collect())
}

/// Keeps the first `cutoff` amplitudes and returns them with the dropped weight.
fn truncate(v: &[C64], cutoff: usize) -> (Vec<C64>, f64) {
    let lost = v[cutoff..].iter().map(|a| a.norm_sqr()).sum();
    (v[..cutoff].to_vec(), lost)
}

fn finish(amps: Vec<C64>, cutoff: usize, guard: TruncationGuard, what: &str) -> Result<FockVector> {
    let v = FockVector::new(amps, cutoff, 1)?;
    v.check_truncation(guard.limit, guard.allow_override)
        .map_err(|e| relabel(e, what))?;
    Ok(v)
}

fn relabel(e: Error, what: &str) -> Error {
    match e {
        Error::TruncationUnsafe { tail, limit, .. } => Error::TruncationUnsafe {
            what: what.to_string(),
            tail,
            limit,
        },
        other => other,
    }
}

/// Code basis of a cat family.
#[derive(Clone, Debug)]
pub struct CatBasis {
    pub zero: FockVector,
    pub one: FockVector,
    /// `⟨0̄|1̄⟩`; zero up to rounding except for the four-component family.
    pub overlap: C64,
}

pub fn build_cat_basis(params: &CatParams, cutoff: usize) -> Result<CatBasis> {
    build_cat_basis_with(params, cutoff, TruncationGuard::default())
}

pub fn build_cat_basis_with(params: &CatParams, cutoff: usize, guard: TruncationGuard) -> Result<CatBasis> {
    params.validate()?;
    let alpha = params.alpha;
    let combine = |a: &[C64], b: &[C64], sign: f64| -> Vec<C64> {
        a.iter().zip(b).map(|(x, y)| x + y * sign).collect()
    };
    let (zero, one) = match params.family {
        CatFamily::TwoComponent => {
            let p = coherent_amplitudes(alpha, cutoff);
            let m = coherent_amplitudes(-alpha, cutoff);
            (combine(&p, &m, 1.0), odd_cat_amplitudes(alpha, cutoff))
        }
        CatFamily::FourComponent => {
            let i_alpha = alpha * C64::new(0.0, 1.0);
            let zero = combine(&coherent_amplitudes(alpha, cutoff), &coherent_amplitudes(-alpha, cutoff), 1.0);
            let one = combine(&coherent_amplitudes(i_alpha, cutoff), &coherent_amplitudes(-i_alpha, cutoff), 1.0);
            (zero, one)
        }
        CatFamily::SqueezedTwoComponent => {
            let beta = params.squeezed_amplitude();
            let dim = padded(cutoff);
            let p = coherent_amplitudes(beta, dim);
            let m = coherent_amplitudes(-beta, dim);
            let zero = apply_squeeze(&combine(&p, &m, 1.0), params.r)?;
            let one = apply_squeeze(&odd_cat_amplitudes(beta, dim), params.r)?;
            (truncate(&zero, cutoff).0, truncate(&one, cutoff).0)
        }
    };
    let zero = finish(zero, cutoff, guard, "cat |0̄⟩")?;
    let one = finish(one, cutoff, guard, "cat |1̄⟩")?;
    let overlap = zero.inner(&one)?;
    Ok(CatBasis { zero, one, overlap })
}

/// `|α⟩ − |−α⟩` keeping only odd levels exactly, so that `α → 0` stays finite after renormalization.
fn odd_cat_amplitudes(alpha: C64, dim: usize) -> Vec<C64> {
    let mut v = coherent_amplitudes(alpha, dim);
    for (n, a) in v.iter_mut().enumerate() {
        *a = if n % 2 == 1 { *a * 2.0 } else { C64::new(0.0, 0.0) };
    }
    if alpha.norm() == 0.0 && dim > 1 {
        // limit of the normalized odd cat
        v[1] = C64::new(1.0, 0.0);
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezeAxis {
    /// `⟨x̂²⟩ = e^{−2r}/2`.
    Position,
    /// `⟨p̂²⟩ = e^{−2r}/2`.
    Momentum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum GaussianKind {
    Coherent { alpha: C64 },
    SqueezedVacuum { r: f64, axis: SqueezeAxis },
}

pub fn build_gaussian_input(kind: GaussianKind, cutoff: usize) -> Result<FockVector> {
    build_gaussian_input_with(kind, cutoff, TruncationGuard::default())
}

pub fn build_gaussian_input_with(kind: GaussianKind, cutoff: usize, guard: TruncationGuard) -> Result<FockVector> {
    match kind {
        GaussianKind::Coherent { alpha } => {
            if !(alpha.re.is_finite() && alpha.im.is_finite()) {
                return Err(invalid("alpha", "must be finite"));
            }
            finish(coherent_amplitudes(alpha, cutoff), cutoff, guard, "coherent state")
        }
        GaussianKind::SqueezedVacuum { r, axis } => {
            if !(r.is_finite() && r >= 0.0) {
                return Err(invalid("r", format!("{r} must be finite and non-negative")));
            }
            finish(squeezed_amplitudes(r, axis, cutoff), cutoff, guard, "squeezed vacuum")
        }
    }
}

pub(crate) fn squeezed_amplitudes(r: f64, axis: SqueezeAxis, dim: usize) -> Vec<C64> {
    let signed = match axis {
        SqueezeAxis::Position => r,
        SqueezeAxis::Momentum => -r,
    };
    squeezed_vacuum_amplitudes(C64::new(signed, 0.0), dim)
}

pub fn build_gkp_state(params: &GkpParams, cutoff: usize) -> Result<FockVector> {
    build_gkp_state_with(params, cutoff, TruncationGuard::default())
}

pub fn build_gkp_state_with(params: &GkpParams, cutoff: usize, guard: TruncationGuard) -> Result<FockVector> {
    params.validate()?;
    let (amps, _) = gkp_amplitudes(params, cutoff);
    finish(amps, cutoff, guard, "realistic GKP state")
}

/// Hermite projection of `Σₖ wₖ ψ_σ(x − xₖ)` onto the first `dim` levels, with the
/// continuum state unit-normalized. Returns the amplitudes and the weight above `dim`.
pub(crate) fn gkp_amplitudes(params: &GkpParams, dim: usize) -> (Vec<C64>, f64) {
    let sigma = params.sigma;
    let peaks = params.peaks();
    let reach = peaks.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let half = reach + 14.0 * sigma + 1.0;
    // grid fine enough for both the peak width and the oscillation of φ_{dim−1}
    let h = (sigma / 25.0).min(0.4 / (2.0 * dim as f64 + 1.0).sqrt()).min(0.01);
    let count = (2.0 * half / h).ceil() as usize + 1;
    let norm = 1.0 / (sigma * std::f64::consts::PI.sqrt()).sqrt();
    let mut coeffs = vec![0.0; dim];
    let mut phi = vec![0.0; dim];
    let mut total = 0.0;
    for g in 0..count {
        let x = -half + g as f64 * h;
        let psi: f64 = peaks
            .iter()
            .map(|&(xk, w)| w * norm * (-(x - xk) * (x - xk) / (2.0 * sigma * sigma)).exp())
            .sum();
        if psi == 0.0 {
            continue;
        }
        total += psi * psi * h;
        hermite::hermite_functions_into(x, &mut phi);
        for n in 0..dim {
            coeffs[n] += phi[n] * psi * h;
        }
    }
    let scale = 1.0 / total.sqrt();
    let amps: Vec<C64> = coeffs.iter().map(|c| C64::new(c * scale, 0.0)).collect();
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    (amps, (1.0 - kept).max(0.0))
}

/// Same state built as `Σₖ wₖ D(xₖ/√2) S(r)|0⟩` by exponentiation in a padded space.
#[cfg(test)]
pub(crate) fn gkp_by_exponentiation(params: &GkpParams, cutoff: usize) -> Result<Vec<C64>> {
    let dim = (3 * cutoff).max(cutoff + 150);
    let vac = squeezed_amplitudes(params.r(), SqueezeAxis::Position, dim);
    let a = linalg::annihilation(dim);
    let mut acc = DVector::<C64>::zeros(dim);
    let base = DVector::from_vec(vac);
    for (xk, w) in params.peaks() {
        let beta = C64::new(xk / std::f64::consts::SQRT_2, 0.0);
        let g: nalgebra::DMatrix<C64> = a.adjoint() * beta - &a * beta.conj();
        let d = linalg::expm_anti_hermitian(&g)?;
        acc += (d * &base) * C64::new(w, 0.0);
    }
    Ok(acc.iter().take(cutoff).cloned().collect())
}
