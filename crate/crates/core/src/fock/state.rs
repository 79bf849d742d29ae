use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{checked_dim, linalg, tail_level, unflatten, C64, DENSE_DIM_LIMIT};
use crate::{Error, Result};

/// Pure multimode state in a truncated number basis. Always unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<C64>,
    cutoff: usize,
    n_modes: usize,
}

impl FockVector {
    /// Builds a state from raw amplitudes, renormalizing them.
    pub fn new(amplitudes: Vec<C64>, cutoff: usize, n_modes: usize) -> Result<Self> {
        let dim = checked_dim(cutoff, n_modes)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-150 {
            return Err(Error::NormalizationFailure(format!(
                "state norm {norm:e} cannot be normalized"
            )));
        }
        let scale = 1.0 / norm;
        let amplitudes = amplitudes.into_iter().map(|a| a * scale).collect();
        Ok(Self {
            amplitudes,
            cutoff,
            n_modes,
        })
    }

    /// Number state `|n₀ n₁ …⟩`.
    pub fn basis(levels: &[usize], cutoff: usize) -> Result<Self> {
        let dim = checked_dim(cutoff, levels.len())?;
        let mut index = 0;
        for &n in levels {
            if n >= cutoff {
                return Err(Error::InvalidDimension(format!(
                    "level {n} outside cutoff {cutoff}"
                )));
            }
            index = index * cutoff + n;
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self::new(amplitudes, cutoff, levels.len())
    }

    pub fn vacuum(cutoff: usize, n_modes: usize) -> Result<Self> {
        Self::basis(&vec![0; n_modes], cutoff)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        if self.dim() != other.dim() || self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Product state `self ⊗ other`, `self` occupying the leading modes.
    pub fn tensor(&self, other: &FockVector) -> Result<FockVector> {
        if self.cutoff != other.cutoff {
            return Err(Error::InvalidComposition(format!(
                "cutoffs {} and {} differ",
                self.cutoff, other.cutoff
            )));
        }
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        FockVector::new(amplitudes, self.cutoff, self.n_modes + other.n_modes)
    }

    /// Probability carried by basis states with any mode at or above 3/4 of the cutoff.
    pub fn tail_weight(&self) -> f64 {
        let top = tail_level(self.cutoff);
        let mut levels = vec![0; self.n_modes];
        self.amplitudes
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                unflatten(i, self.cutoff, self.n_modes, &mut levels);
                levels.iter().any(|&n| n >= top).then_some(a.norm_sqr())
            })
            .sum()
    }

    /// Errors with `TruncationUnsafe` when the tail weight exceeds `limit`, unless overridden.
    pub fn check_truncation(&self, limit: f64, allow_override: bool) -> Result<()> {
        let tail = self.tail_weight();
        if tail > limit && !allow_override {
            return Err(Error::TruncationUnsafe {
                what: format!("{}-mode state at cutoff {}", self.n_modes, self.cutoff),
                tail,
                limit,
            });
        }
        Ok(())
    }

    /// Photon-number distribution of one mode.
    pub fn populations(&self, mode: usize) -> Vec<f64> {
        let mut pops = vec![0.0; self.cutoff];
        let mut levels = vec![0; self.n_modes];
        for (i, a) in self.amplitudes.iter().enumerate() {
            unflatten(i, self.cutoff, self.n_modes, &mut levels);
            pops[levels[mode]] += a.norm_sqr();
        }
        pops
    }

    /// Copies the state into a space with a different per-mode cutoff, dropping (and
    /// reporting) the weight that no longer fits. The result is renormalized.
    pub fn recut(&self, cutoff: usize) -> Result<(FockVector, f64)> {
        let dim = checked_dim(cutoff, self.n_modes)?;
        let mut out = vec![C64::new(0.0, 0.0); dim];
        let mut levels = vec![0; self.n_modes];
        let mut lost = 0.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            unflatten(i, self.cutoff, self.n_modes, &mut levels);
            if levels.iter().all(|&n| n < cutoff) {
                let j = levels.iter().fold(0, |acc, &n| acc * cutoff + n);
                out[j] = *a;
            } else {
                lost += a.norm_sqr();
            }
        }
        Ok((FockVector::new(out, cutoff, self.n_modes)?, lost))
    }

    pub(crate) fn from_normalized(amplitudes: Vec<C64>, cutoff: usize, n_modes: usize) -> Self {
        Self {
            amplitudes,
            cutoff,
            n_modes,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FockVectorDoc {
    n_modes: usize,
    cutoff: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for FockVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FockVectorDoc {
            n_modes: self.n_modes,
            cutoff: self.cutoff,
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FockVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = FockVectorDoc::deserialize(deserializer)?;
        let amplitudes: Vec<C64> = doc.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        // keep already-normalized documents bit-exact
        if (norm_sqr - 1.0).abs() <= 1e-12 {
            let dim = checked_dim(doc.cutoff, doc.n_modes).map_err(serde::de::Error::custom)?;
            if dim != amplitudes.len() {
                return Err(serde::de::Error::custom("amplitude count does not match cutoff^n_modes"));
            }
            Ok(FockVector::from_normalized(amplitudes, doc.cutoff, doc.n_modes))
        } else {
            FockVector::new(amplitudes, doc.cutoff, doc.n_modes).map_err(serde::de::Error::custom)
        }
    }
}

/// Mixed multimode state.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
    cutoff: usize,
    n_modes: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<C64>, cutoff: usize, n_modes: usize) -> Result<Self> {
        let dim = checked_dim(cutoff, n_modes)?;
        if dim > DENSE_DIM_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "density matrix of dimension {dim} exceeds dense limit {DENSE_DIM_LIMIT}"
            )));
        }
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        let asym = (&matrix - matrix.adjoint()).norm();
        if asym > 1e-12 * matrix.norm().max(1.0) {
            return Err(Error::NotHermitian(format!("‖ρ−ρ†‖ = {asym:e}")));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::NormalizationFailure(format!("trace {trace}")));
        }
        let eig = linalg::hermitian_eigen(&matrix)?;
        if let Some(min) = eig.values.iter().cloned().reduce(f64::min) {
            if min < -1e-10 {
                return Err(Error::NumericsFailure(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(Self {
            matrix,
            cutoff,
            n_modes,
        })
    }

    pub fn from_pure(state: &FockVector) -> Result<Self> {
        if state.dim() > DENSE_DIM_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "density matrix of dimension {} exceeds dense limit {DENSE_DIM_LIMIT}",
                state.dim()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Ok(Self {
            matrix: &v * v.adjoint(),
            cutoff: state.cutoff(),
            n_modes: state.n_modes(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tail_weight(&self) -> f64 {
        let top = tail_level(self.cutoff);
        let mut levels = vec![0; self.n_modes];
        (0..self.dim())
            .filter_map(|i| {
                unflatten(i, self.cutoff, self.n_modes, &mut levels);
                levels.iter().any(|&n| n >= top).then(|| self.matrix[(i, i)].re)
            })
            .sum()
    }

    pub fn check_truncation(&self, limit: f64, allow_override: bool) -> Result<()> {
        let tail = self.tail_weight();
        if tail > limit && !allow_override {
            return Err(Error::TruncationUnsafe {
                what: format!("{}-mode mixed state at cutoff {}", self.n_modes, self.cutoff),
                tail,
                limit,
            });
        }
        Ok(())
    }

    /// Eigen-ensemble `ρ = Σ pₖ|ψₖ⟩⟨ψₖ|`, dropping weights below 1e-14.
    pub fn ensemble(&self) -> Result<Vec<(f64, FockVector)>> {
        let eig = linalg::hermitian_eigen(&self.matrix)?;
        let mut out = Vec::new();
        for (k, &p) in eig.values.iter().enumerate() {
            if p > 1e-14 {
                let v: Vec<C64> = eig.vectors.column(k).iter().cloned().collect();
                out.push((p, FockVector::new(v, self.cutoff, self.n_modes)?));
            }
        }
        let total: f64 = out.iter().map(|(p, _)| p).sum();
        for (p, _) in out.iter_mut() {
            *p /= total;
        }
        Ok(out)
    }

    /// Reduced density matrix of one mode.
    pub fn reduced(&self, mode: usize) -> DMatrix<C64> {
        let c = self.cutoff;
        let stride = c.pow((self.n_modes - 1 - mode) as u32);
        let outer = self.dim() / (c * stride);
        let mut red = DMatrix::zeros(c, c);
        for o in 0..outer {
            for s in 0..stride {
                for m in 0..c {
                    let i = o * c * stride + m * stride + s;
                    for n in 0..c {
                        let j = o * c * stride + n * stride + s;
                        red[(m, n)] += self.matrix[(i, j)];
                    }
                }
            }
        }
        red
    }
}

/// Borrowed view of either state kind.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a FockVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a FockVector> for StateRef<'a> {
    fn from(v: &'a FockVector) -> Self {
        StateRef::Pure(v)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(v: &'a DensityMatrix) -> Self {
        StateRef::Mixed(v)
    }
}

impl<'a> From<&'a State> for StateRef<'a> {
    fn from(v: &'a State) -> Self {
        v.as_ref()
    }
}

impl StateRef<'_> {
    pub fn cutoff(&self) -> usize {
        match self {
            StateRef::Pure(v) => v.cutoff(),
            StateRef::Mixed(r) => r.cutoff(),
        }
    }

    pub fn n_modes(&self) -> usize {
        match self {
            StateRef::Pure(v) => v.n_modes(),
            StateRef::Mixed(r) => r.n_modes(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            StateRef::Pure(v) => v.dim(),
            StateRef::Mixed(r) => r.dim(),
        }
    }

    pub fn tail_weight(&self) -> f64 {
        match self {
            StateRef::Pure(v) => v.tail_weight(),
            StateRef::Mixed(r) => r.tail_weight(),
        }
    }

    pub fn check_truncation(&self, limit: f64, allow_override: bool) -> Result<()> {
        match self {
            StateRef::Pure(v) => v.check_truncation(limit, allow_override),
            StateRef::Mixed(r) => r.check_truncation(limit, allow_override),
        }
    }

    /// Pure-state ensemble; a pure state is its own single-member ensemble.
    pub fn ensemble(&self) -> Result<Vec<(f64, FockVector)>> {
        match self {
            StateRef::Pure(v) => Ok(vec![(1.0, (*v).clone())]),
            StateRef::Mixed(r) => r.ensemble(),
        }
    }
}

/// Owned state of either kind.
#[derive(Clone, Debug)]
pub enum State {
    Pure(FockVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn as_ref(&self) -> StateRef<'_> {
        match self {
            State::Pure(v) => StateRef::Pure(v),
            State::Mixed(r) => StateRef::Mixed(r),
        }
    }
}

impl From<FockVector> for State {
    fn from(v: FockVector) -> Self {
        State::Pure(v)
    }
}

impl From<DensityMatrix> for State {
    fn from(v: DensityMatrix) -> Self {
        State::Mixed(v)
    }
}
