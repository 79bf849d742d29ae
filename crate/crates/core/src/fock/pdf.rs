use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hermite, StateRef, C64};
use crate::{Error, Result};

/// Uniform grid over `[-half_width, half_width]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub spacing: f64,
}

impl GridSpec {
    pub const MAX_SPACING: f64 = 0.01;

    /// `±(√(2·cutoff) + 5)` at spacing 0.01.
    pub fn for_cutoff(cutoff: usize) -> Self {
        Self {
            half_width: (2.0 * cutoff as f64).sqrt() + 5.0,
            spacing: Self::MAX_SPACING,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = (2.0 * self.half_width / self.spacing).round() as usize;
        (0..=n).map(|i| -self.half_width + self.spacing * i as f64).collect()
    }

    fn validate(&self, cutoff: usize) -> Result<()> {
        let need = Self::for_cutoff(cutoff).half_width;
        if self.spacing > Self::MAX_SPACING + 1e-15 || self.spacing <= 0.0 {
            return Err(Error::NormalizationFailure(format!(
                "grid spacing {} is coarser than {}",
                self.spacing,
                Self::MAX_SPACING
            )));
        }
        if self.half_width + 1e-12 < need {
            return Err(Error::NormalizationFailure(format!(
                "grid half-width {} narrower than required {need:.3}",
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Probability density of one rotated quadrature on a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub points: Vec<f64>,
    pub density: Vec<f64>,
    pub theta: f64,
}

impl QuadratureGrid {
    pub fn spacing(&self) -> f64 {
        self.points[1] - self.points[0]
    }

    pub fn trapezoid(&self, f: impl Fn(f64) -> f64) -> f64 {
        let h = self.spacing();
        let n = self.points.len();
        let mut s = 0.0;
        for i in 0..n {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            s += w * f(self.points[i]) * self.density[i];
        }
        s * h
    }

    pub fn normalization(&self) -> f64 {
        self.trapezoid(|_| 1.0)
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.trapezoid(|x| x.powi(k))
    }

    /// Grid points of strict local maxima whose density exceeds `rel` times the global maximum.
    pub fn peaks(&self, rel: f64) -> Vec<f64> {
        let max = self.density.iter().cloned().fold(0.0, f64::max);
        (1..self.density.len() - 1)
            .filter(|&i| {
                let d = self.density[i];
                d > rel * max && d > self.density[i - 1] && d >= self.density[i + 1]
            })
            .map(|i| self.points[i])
            .collect()
    }
}

/// `Φ[g·cutoff + n] = ⟨x_θ = x_g|n⟩ = φₙ(x_g)·e^{−inθ}`.
pub(crate) fn rotated_table(points: &[f64], cutoff: usize, theta: f64) -> Vec<C64> {
    let real = hermite::hermite_table(points, cutoff);
    let phases: Vec<C64> = (0..cutoff).map(|n| C64::from_polar(1.0, -(n as f64) * theta)).collect();
    real.iter()
        .enumerate()
        .map(|(i, &v)| phases[i % cutoff] * v)
        .collect()
}

/// Marginal density of `x̂_θ` on each mode (one angle per mode).
pub fn quadrature_pdf<'a>(
    state: impl Into<StateRef<'a>>,
    angles: &[f64],
    grid: Option<GridSpec>,
) -> Result<Vec<QuadratureGrid>> {
    let state = state.into();
    let cutoff = state.cutoff();
    let n_modes = state.n_modes();
    if angles.len() != n_modes {
        return Err(Error::DimensionMismatch {
            expected: n_modes,
            found: angles.len(),
        });
    }
    let spec = grid.unwrap_or_else(|| GridSpec::for_cutoff(cutoff));
    spec.validate(cutoff)?;
    let points = spec.points();
    let mut out = Vec::with_capacity(n_modes);
    for (mode, &theta) in angles.iter().enumerate() {
        let table = rotated_table(&points, cutoff, theta);
        let density = match state {
            StateRef::Pure(v) => pure_marginal(v.amplitudes(), cutoff, n_modes, mode, &table, points.len()),
            StateRef::Mixed(rho) => {
                let red = rho.reduced(mode);
                (0..points.len())
                    .into_par_iter()
                    .map(|g| {
                        let row = &table[g * cutoff..(g + 1) * cutoff];
                        let mut acc = C64::new(0.0, 0.0);
                        for m in 0..cutoff {
                            for n in 0..cutoff {
                                acc += row[m] * red[(m, n)] * row[n].conj();
                            }
                        }
                        acc.re.max(0.0)
                    })
                    .collect()
            }
        };
        let grid = QuadratureGrid {
            points: points.clone(),
            density,
            theta,
        };
        let norm = grid.normalization();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::NormalizationFailure(format!(
                "quadrature density on mode {mode} integrates to {norm}"
            )));
        }
        out.push(grid);
    }
    Ok(out)
}

pub(crate) fn pure_marginal(
    amps: &[C64],
    cutoff: usize,
    n_modes: usize,
    mode: usize,
    table: &[C64],
    n_points: usize,
) -> Vec<f64> {
    let stride = cutoff.pow((n_modes - 1 - mode) as u32);
    let outer = amps.len() / (cutoff * stride);
    (0..n_points)
        .into_par_iter()
        .map(|g| {
            let row = &table[g * cutoff..(g + 1) * cutoff];
            let mut total = 0.0;
            for o in 0..outer {
                let base = o * cutoff * stride;
                for s in 0..stride {
                    let mut acc = C64::new(0.0, 0.0);
                    for n in 0..cutoff {
                        acc += row[n] * amps[base + n * stride + s];
                    }
                    total += acc.norm_sqr();
                }
            }
            total
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{DensityMatrix, FockVector};
    use std::f64::consts::PI;

    #[test]
    fn vacuum_is_gaussian_with_half_variance() {
        let vac = FockVector::vacuum(10, 1).unwrap();
        let g = &quadrature_pdf(&vac, &[0.0], None).unwrap()[0];
        assert!((g.moment(2) - 0.5).abs() < 1e-10);
        for (x, d) in g.points.iter().zip(&g.density).step_by(97) {
            let expect = (-x * x).exp() / PI.sqrt();
            assert!((d - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn first_excited_density_is_rotation_invariant() {
        let one = FockVector::basis(&[1], 8).unwrap();
        for theta in [0.0, 0.9, 2.5] {
            let g = &quadrature_pdf(&one, &[theta], None).unwrap()[0];
            for (x, d) in g.points.iter().zip(&g.density).step_by(131) {
                let expect = 2.0 * x * x * (-x * x).exp() / PI.sqrt();
                assert!((d - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coarse_or_narrow_grid_rejected() {
        let vac = FockVector::vacuum(10, 1).unwrap();
        let coarse = GridSpec { half_width: 20.0, spacing: 0.05 };
        let narrow = GridSpec { half_width: 3.0, spacing: 0.01 };
        for spec in [coarse, narrow] {
            assert!(matches!(
                quadrature_pdf(&vac, &[0.0], Some(spec)),
                Err(Error::NormalizationFailure(_))
            ));
        }
    }

    #[test]
    fn mixed_and_pure_agree() {
        let amps: Vec<C64> = (0..12).map(|n| C64::new(1.0 / (1.0 + n as f64), 0.1 * n as f64)).collect();
        let v = FockVector::new(amps, 12, 1).unwrap();
        let rho = DensityMatrix::from_pure(&v).unwrap();
        let a = &quadrature_pdf(&v, &[0.4], None).unwrap()[0];
        let b = &quadrature_pdf(&rho, &[0.4], None).unwrap()[0];
        for (x, y) in a.density.iter().zip(&b.density) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
