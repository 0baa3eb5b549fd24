//! Thin wrapper around the dense Hermitian eigensolver.

use nalgebra::{Complex, DMatrix};
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// Eigendecomposition of a Hermitian matrix: real eigenvalues plus the
/// matching orthonormal eigenvectors as columns.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<C64>,
}

fn to_nalgebra(mat: &Array2<C64>) -> DMatrix<Complex<f64>> {
    let d = mat.nrows();
    DMatrix::from_fn(d, d, |i, j| {
        let z = mat[[i, j]];
        Complex::new(z.re, z.im)
    })
}

/// Full eigendecomposition. The input is assumed Hermitian; feed it through
/// [`crate::fock::DensityMatrix::hermitized`] first when in doubt.
pub fn hermitian_eigen(mat: &Array2<C64>) -> HermitianEigen {
    let d = mat.nrows();
    let se = to_nalgebra(mat).symmetric_eigen();
    let mut vectors = Array2::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            let z = se.eigenvectors[(i, j)];
            vectors[[i, j]] = C64::new(z.re, z.im);
        }
    }
    HermitianEigen {
        values: se.eigenvalues.iter().copied().collect(),
        vectors,
    }
}

/// Eigenvalues only.
pub fn hermitian_eigenvalues(mat: &Array2<C64>) -> Vec<f64> {
    to_nalgebra(mat)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_reconstructs_hermitian_matrix() {
        let d = 6;
        let mut mat = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                let re = 1.0 / (1.0 + (i + j) as f64);
                let im = 0.1 * (i as f64 - j as f64);
                mat[[i, j]] = C64::new(re, im);
            }
        }
        let eig = hermitian_eigen(&mat);
        let mut recon = Array2::<C64>::zeros((d, d));
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    recon[[i, j]] +=
                        eig.values[k] * eig.vectors[[i, k]] * eig.vectors[[j, k]].conj();
                }
            }
        }
        let err: f64 = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| (recon[[i, j]] - mat[[i, j]]).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "reconstruction defect {err:e}");
        let vals = hermitian_eigenvalues(&mat);
        let mut a = eig.values.clone();
        let mut b = vals;
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
