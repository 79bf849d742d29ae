use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{checked_dim, linalg, FockVector, StateRef, C64, DENSE_DIM_LIMIT};
use crate::{Error, Result};

/// Dense operator on a truncated (multimode) Fock space.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    matrix: DMatrix<C64>,
    cutoff: usize,
    n_modes: usize,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wraps a matrix. With `hermitian` set, `‖M − M†‖_F ≤ 1e-10·‖M‖_F` is enforced.
    pub fn new(matrix: DMatrix<C64>, cutoff: usize, n_modes: usize, hermitian: bool) -> Result<Self> {
        let dim = checked_dim(cutoff, n_modes)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        if hermitian {
            let asym = (&matrix - matrix.adjoint()).norm();
            if asym > 1e-10 * matrix.norm() {
                return Err(Error::NotHermitian(format!(
                    "‖M−M†‖ = {asym:e} against ‖M‖ = {:e}",
                    matrix.norm()
                )));
            }
        }
        Ok(Self {
            matrix,
            cutoff,
            n_modes,
            hermitian,
        })
    }

    pub fn identity(cutoff: usize, n_modes: usize) -> Result<Self> {
        let dim = checked_dim(cutoff, n_modes)?;
        Self::new(DMatrix::identity(dim, dim), cutoff, n_modes, true)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Upper-left `levels^n_modes` block restricted to states with every mode below `levels`.
    pub fn block(&self, levels: usize) -> DMatrix<C64> {
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&i| {
                let mut idx = i;
                (0..self.n_modes).all(|_| {
                    let n = idx % self.cutoff;
                    idx /= self.cutoff;
                    n < levels
                })
            })
            .collect();
        DMatrix::from_fn(keep.len(), keep.len(), |r, c| self.matrix[(keep[r], keep[c])])
    }

    /// Applies the operator to a state vector (no renormalization).
    pub fn apply(&self, v: &FockVector) -> Result<Vec<C64>> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        let out = &self.matrix * DVector::from_column_slice(v.amplitudes());
        Ok(out.iter().cloned().collect())
    }
}

/// Single-mode operators with a standard truncated matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ElementaryKind {
    Annihilation,
    Creation,
    /// `cos θ·x̂ + sin θ·p̂`.
    Quadrature { theta: f64 },
    Number,
    Parity,
    /// `D(α) = exp(αâ† − α*â)`.
    Displacement { alpha: C64 },
    /// `S(r) = exp(½(r*â² − r â†²))`.
    Squeeze { r: C64 },
}

pub fn build_elementary_operator(kind: ElementaryKind, cutoff: usize) -> Result<OperatorMatrix> {
    checked_dim(cutoff, 1)?;
    let a = linalg::annihilation(cutoff);
    let (matrix, hermitian) = match kind {
        ElementaryKind::Annihilation => (a, false),
        ElementaryKind::Creation => (a.adjoint(), false),
        ElementaryKind::Quadrature { theta } => (linalg::quadrature(cutoff, theta), true),
        ElementaryKind::Number => (
            DMatrix::from_fn(cutoff, cutoff, |r, c| {
                if r == c {
                    C64::new(r as f64, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
            true,
        ),
        ElementaryKind::Parity => (
            DMatrix::from_fn(cutoff, cutoff, |r, c| {
                if r == c {
                    C64::new(if r % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
            true,
        ),
        ElementaryKind::Displacement { alpha } => {
            let guard = cutoff as f64 / 4.0;
            if alpha.norm() > guard {
                return Err(Error::TruncationUnsafe {
                    what: format!("displacement |α| = {} above cutoff/4 = {guard}", alpha.norm()),
                    tail: f64::NAN,
                    limit: guard,
                });
            }
            let g = a.adjoint() * alpha - &a * alpha.conj();
            (linalg::expm_anti_hermitian(&g)?, false)
        }
        ElementaryKind::Squeeze { r } => {
            let guard = squeeze_guard(cutoff);
            if r.norm() > guard {
                return Err(Error::TruncationUnsafe {
                    what: format!("squeezing |r| = {} above ½ln(cutoff/2) = {guard:.3}", r.norm()),
                    tail: f64::NAN,
                    limit: guard,
                });
            }
            let a2 = &a * &a;
            let g = (&a2 * r.conj() - a2.adjoint() * r) * C64::new(0.5, 0.0);
            (linalg::expm_anti_hermitian(&g)?, false)
        }
    };
    OperatorMatrix::new(matrix, cutoff, 1, hermitian)
}

pub(crate) fn squeeze_guard(cutoff: usize) -> f64 {
    0.5 * (cutoff as f64 / 2.0).max(1.0).ln()
}

/// One slot of a tensor product.
#[derive(Clone, Copy, Debug)]
pub enum ModeFactor<'a> {
    Identity,
    Op(&'a OperatorMatrix),
}

/// Kronecker product in mode order (mode 0 slowest).
pub fn tensor_embed(factors: &[ModeFactor<'_>]) -> Result<OperatorMatrix> {
    let mut cutoff = None;
    for f in factors {
        if let ModeFactor::Op(op) = f {
            if op.n_modes() != 1 {
                return Err(Error::InvalidComposition("tensor factors must be single-mode".into()));
            }
            match cutoff {
                None => cutoff = Some(op.cutoff()),
                Some(c) if c != op.cutoff() => {
                    return Err(Error::InvalidComposition(format!(
                        "cutoffs {c} and {} differ",
                        op.cutoff()
                    )))
                }
                _ => {}
            }
        }
    }
    let cutoff = cutoff
        .ok_or_else(|| Error::InvalidComposition("all factors are identities; cutoff unknown".into()))?;
    let dim = checked_dim(cutoff, factors.len())?;
    if dim > DENSE_DIM_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "dense operator of dimension {dim} exceeds {DENSE_DIM_LIMIT}"
        )));
    }
    let ident = DMatrix::<C64>::identity(cutoff, cutoff);
    let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    let mut hermitian = true;
    for f in factors {
        let m = match f {
            ModeFactor::Identity => &ident,
            ModeFactor::Op(op) => {
                hermitian &= op.is_hermitian();
                op.matrix()
            }
        };
        out = out.kronecker(m);
    }
    OperatorMatrix::new(out, cutoff, factors.len(), hermitian)
}

/// `tr(ρ·Op)`; vector states are promoted. Hermitian operators must give a real result.
pub fn expectation<'a>(state: impl Into<StateRef<'a>>, op: &OperatorMatrix) -> Result<C64> {
    let state = state.into();
    if state.dim() != op.dim() || state.cutoff() != op.cutoff() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: state.dim(),
        });
    }
    let value = match state {
        StateRef::Pure(v) => {
            let psi = DVector::from_column_slice(v.amplitudes());
            (psi.adjoint() * (op.matrix() * &psi))[(0, 0)]
        }
        StateRef::Mixed(rho) => (rho.matrix() * op.matrix()).trace(),
    };
    if op.is_hermitian() && value.im.abs() > 1e-9 * value.re.abs().max(1.0) {
        return Err(Error::NumericsFailure(format!(
            "Hermitian expectation has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value)
}

/// Spectrum of a Hermitian operator, ascending.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigensystem {
    /// Projector onto the span of the eigenvectors whose eigenvalues fall in `[lo, hi]`.
    pub fn projector_in(&self, lo: f64, hi: f64) -> DMatrix<C64> {
        let n = self.vectors.nrows();
        let mut p = DMatrix::zeros(n, n);
        for (k, &v) in self.values.iter().enumerate() {
            if v >= lo && v <= hi {
                let col = self.vectors.column(k);
                p += &col * col.adjoint();
            }
        }
        p
    }

    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.values.iter().filter(|&&v| v >= lo && v <= hi).count()
    }
}

pub fn eigendecompose(op: &OperatorMatrix) -> Result<Eigensystem> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian("eigendecompose requires a Hermitian operator".into()));
    }
    let eig = linalg::hermitian_eigen(op.matrix())?;
    let scale = op.matrix().norm().max(1.0);
    for (k, &lam) in eig.values.iter().enumerate() {
        let v = eig.vectors.column(k);
        let resid = (op.matrix() * v - v * C64::new(lam, 0.0)).norm();
        if resid > 1e-8 * scale {
            return Err(Error::NumericsFailure(format!(
                "eigenpair {k} residual {resid:e} exceeds tolerance"
            )));
        }
    }
    Ok(Eigensystem {
        values: eig.values,
        vectors: eig.vectors,
    })
}

/// Orthogonal projector onto the span of the given states (Gram–Schmidt).
pub fn span_projector(states: &[FockVector]) -> Result<DMatrix<C64>> {
    let dim = states.first().map(|s| s.dim()).unwrap_or(0);
    let mut basis: Vec<DVector<C64>> = Vec::new();
    for s in states {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        let mut v = DVector::from_column_slice(s.amplitudes());
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        if norm > 1e-10 {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    let mut p = DMatrix::zeros(dim, dim);
    for b in &basis {
        p += b * b.adjoint();
    }
    Ok(p)
}

/// Trace distance `½‖A − B‖₁` between Hermitian matrices.
pub fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<f64> {
    let eig = linalg::hermitian_eigen(&(a - b))?;
    Ok(0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>())
}
