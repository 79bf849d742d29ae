use nalgebra::DMatrix;

use super::C64;
use crate::{Error, Result};

pub(crate) struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are eigenvectors, ordered like `values`.
    pub vectors: DMatrix<C64>,
}

/// Householder tridiagonalization followed by implicit QR, sorted ascending.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> Result<HermitianEigen> {
    let n = m.nrows();
    // symmetrize away rounding noise; callers have already checked Hermiticity
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::linalg::SymmetricEigen::try_new(sym, 1e-15, 0)
        .ok_or_else(|| Error::NumericsFailure("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen { values, vectors })
}

/// `exp(G)` for anti-Hermitian `G`, via the spectrum of the Hermitian `−iG`.
pub(crate) fn expm_anti_hermitian(g: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let h = g * C64::new(0.0, -1.0);
    let eig = hermitian_eigen(&h)?;
    let n = g.nrows();
    let mut scaled = eig.vectors.clone();
    for (k, &lam) in eig.values.iter().enumerate() {
        let phase = C64::from_polar(1.0, lam);
        for r in 0..n {
            scaled[(r, k)] *= phase;
        }
    }
    Ok(scaled * eig.vectors.adjoint())
}

pub(crate) fn annihilation(dim: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub(crate) fn quadrature(dim: usize, theta: f64) -> DMatrix<C64> {
    let a = annihilation(dim);
    let e = C64::from_polar(1.0, -theta);
    (&a * e + a.adjoint() * e.conj()) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal_sorted() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(3.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(2.0, 0.0),
        ]));
        let e = hermitian_eigen(&m).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = DMatrix::<C64>::zeros(4, 4);
        let e = expm_anti_hermitian(&z).unwrap();
        assert!((e - DMatrix::identity(4, 4)).norm() < 1e-14);
    }
}
