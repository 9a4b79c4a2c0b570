//! Validated quantum state and basis types.
//!
//! `UnitaryMatrix` and `DensityMatrix` are thin wrappers over
//! [`ComplexMatrix`] whose constructors enforce the defining properties.
//! Downstream code takes these types in signatures so invalid states are
//! rejected at the boundary instead of corrupting a long simulation.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qlin::eigen::eigh;
use crate::qlin::matrix::{check_dim, ComplexMatrix};
use crate::scalar::Scalar;

/// A square matrix verified to be unitary at construction.
#[derive(Clone, Debug)]
pub struct UnitaryMatrix<T> {
    mat: ComplexMatrix<T>,
}

impl<T: Scalar> UnitaryMatrix<T> {
    /// Wraps a matrix after checking `U U^H = I` to the strict tolerance
    /// (scaled by dimension to allow for products of several factors).
    pub fn new(mat: ComplexMatrix<T>) -> Result<Self> {
        let residual = mat.unitarity_residual();
        if residual > T::strict_tol() * T::real(mat.dim() as f64) {
            return Err(Error::NotUnitary {
                residual: residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(UnitaryMatrix { mat })
    }

    /// Identity basis (computational basis as columns).
    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix {
            mat: ComplexMatrix::identity(dim),
        }
    }

    /// Wraps without the unitarity check. Only for hot paths where the
    /// matrix is orthonormal by construction (e.g. fresh eigenvector sets
    /// from the Jacobi solver).
    pub(crate) fn new_unchecked(mat: ComplexMatrix<T>) -> Self {
        debug_assert!(
            mat.unitarity_residual() <= T::strict_tol() * T::real(mat.dim() as f64),
            "new_unchecked given a non-unitary matrix"
        );
        UnitaryMatrix { mat }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.mat
    }

    /// Basis vector `j` (column `j`).
    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        self.mat.column(j)
    }

    /// Conjugate transpose, which is again unitary.
    pub fn adjoint(&self) -> Self {
        UnitaryMatrix {
            mat: self.mat.adjoint(),
        }
    }

    /// Composition `self * other`, re-checked once to keep drift bounded.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        UnitaryMatrix::new(&self.mat * &other.mat)
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
///
/// The eigendecomposition is computed once at construction and cached;
/// eigenvalues are descending and the eigenbasis carries the crate-wide
/// deterministic phase convention.
#[derive(Clone, Debug)]
pub struct DensityMatrix<T> {
    mat: ComplexMatrix<T>,
    eigenvalues: Vec<T>,
    basis: UnitaryMatrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates and wraps a candidate density matrix.
    ///
    /// Requirements: supported dimension, Hermitian within the strict
    /// tolerance, trace within the loose tolerance of one, and smallest
    /// eigenvalue no lower than minus the loose tolerance.
    pub fn new(mat: ComplexMatrix<T>) -> Result<Self> {
        check_dim(mat.dim())?;
        let scale = T::one().max(mat.max_abs());
        let asym = mat.max_asymmetry();
        if asym > T::strict_tol() * scale {
            return Err(Error::NotHermitian {
                max_asymmetry: asym.to_f64().unwrap_or(f64::NAN),
            });
        }
        let trace_err = (mat.trace().re - T::one()).abs().max(mat.trace().im.abs());
        if trace_err > T::loose_tol() {
            return Err(Error::BadDensity {
                reason: format!(
                    "trace deviates from one by {:.3e}",
                    trace_err.to_f64().unwrap_or(f64::NAN)
                ),
            });
        }
        let eig = eigh(&mat.hermitized())?;
        let min = *eig
            .eigenvalues
            .last()
            .expect("non-empty eigenvalue list");
        if min < -T::loose_tol() {
            return Err(Error::BadDensity {
                reason: format!(
                    "negative eigenvalue {:.3e}",
                    min.to_f64().unwrap_or(f64::NAN)
                ),
            });
        }
        let basis = UnitaryMatrix::new(eig.vectors)?;
        Ok(DensityMatrix {
            mat,
            eigenvalues: eig.eigenvalues,
            basis,
        })
    }

    /// Builds directly from a clean eigendecomposition (descending
    /// nonnegative eigenvalues summing to one, orthonormal basis). Used on
    /// hot paths where the caller has just produced exactly this data.
    pub(crate) fn from_eigh(eigenvalues: Vec<T>, basis: UnitaryMatrix<T>) -> Self {
        let n = eigenvalues.len();
        let d = ComplexMatrix::from_real_diagonal(&eigenvalues);
        let mat = &(basis.matrix() * &d) * &basis.adjoint().into_matrix();
        debug_assert!(eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(
            (eigenvalues.iter().copied().sum::<T>() - T::one()).abs() < T::loose_tol()
        );
        debug_assert_eq!(n, basis.dim());
        DensityMatrix {
            mat,
            eigenvalues,
            basis,
        }
    }

    /// Pure state `|index><index|` in the computational basis.
    pub fn pure_basis_state(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::bad_arg("index", format!("{index} >= dim {dim}")));
        }
        let mut mat = ComplexMatrix::zeros(dim);
        mat.set(index, index, Complex::new(T::one(), T::zero()));
        DensityMatrix::new(mat)
    }

    /// Maximally mixed state `I/dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let w = T::one() / T::real(dim as f64);
        let mat = ComplexMatrix::from_real_diagonal(&vec![w; dim]);
        DensityMatrix::new(mat)
    }

    /// Diagonal state from classical probabilities (any order; entries are
    /// validated to be a distribution).
    pub fn from_probabilities(probs: &[T]) -> Result<Self> {
        check_dim(probs.len())?;
        let sum: T = probs.iter().copied().sum();
        if (sum - T::one()).abs() > T::loose_tol() || probs.iter().any(|&p| p < T::zero()) {
            return Err(Error::BadDensity {
                reason: "probabilities must be nonnegative and sum to one".into(),
            });
        }
        DensityMatrix::new(ComplexMatrix::from_real_diagonal(probs))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.mat
    }

    /// Eigenvalues in descending order.
    #[inline]
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Eigenbasis matching [`Self::eigenvalues`], one eigenvector per
    /// column.
    #[inline]
    pub fn eigenbasis(&self) -> &UnitaryMatrix<T> {
        &self.basis
    }

    /// Largest eigenvalue.
    pub fn top_eigenvalue(&self) -> T {
        self.eigenvalues[0]
    }

    /// `Tr[rho^2]`, from the cached spectrum.
    pub fn purity(&self) -> T {
        self.eigenvalues.iter().map(|&l| l * l).sum()
    }

    /// Expectation value of a Hermitian operator.
    pub fn expectation(&self, op: &ComplexMatrix<T>) -> T {
        self.mat.real_trace_product(op)
    }

    /// Probability of the computational basis state `index`,
    /// `<index|rho|index>`.
    pub fn basis_population(&self, index: usize) -> T {
        self.mat.get(index, index).re
    }

    /// Bloch vector `(x, y, z)`; only defined for qubits.
    pub fn bloch_vector(&self) -> Result<(T, T, T)> {
        if self.dim() != 2 {
            return Err(Error::BadDimension {
                dim: self.dim(),
                reason: "Bloch vector requires dimension 2",
            });
        }
        let two = T::real(2.0);
        let x = two * self.mat.get(0, 1).re;
        let y = -(two * self.mat.get(0, 1).im);
        let z = self.mat.get(0, 0).re - self.mat.get(1, 1).re;
        Ok((x, y, z))
    }

    /// Applies a unitary: `rho -> U rho U^H`. Spectrum is preserved, so the
    /// cached eigenvalues are reused and only the basis is rotated.
    pub fn apply_unitary(&self, u: &UnitaryMatrix<T>) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::bad_arg("u", "dimension mismatch"));
        }
        let basis = UnitaryMatrix::new(u.matrix() * self.basis.matrix())?;
        Ok(DensityMatrix::from_eigh(self.eigenvalues.clone(), basis))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_state_has_unit_purity() {
        let rho = DensityMatrix::<f64>::pure_basis_state(3, 1).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        assert_eq!(rho.eigenvalues()[0], 1.0);
        assert!((rho.basis_population(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_spectrum_is_flat() {
        let rho = DensityMatrix::<f64>::maximally_mixed(4).unwrap();
        for &l in rho.eigenvalues() {
            assert!((l - 0.25).abs() < 1e-14);
        }
        assert!((rho.purity() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_trace_and_negativity() {
        let mat = ComplexMatrix::<f64>::from_real_diagonal(&[0.7, 0.7]);
        assert!(matches!(
            DensityMatrix::new(mat),
            Err(Error::BadDensity { .. })
        ));
        let mat = ComplexMatrix::<f64>::from_real_diagonal(&[1.2, -0.2]);
        assert!(matches!(
            DensityMatrix::new(mat),
            Err(Error::BadDensity { .. })
        ));
    }

    #[test]
    fn rejects_unsupported_dimension() {
        let mat = ComplexMatrix::<f64>::from_real_diagonal(&[1.0]);
        assert!(DensityMatrix::new(mat).is_err());
    }

    #[test]
    fn bloch_vector_of_plus_x_state() {
        let half = Complex::new(0.5, 0.0);
        let mat = ComplexMatrix::from_fn(2, |_, _| half);
        let rho = DensityMatrix::<f64>::new(mat).unwrap();
        let (x, y, z) = rho.bloch_vector().unwrap();
        assert!((x - 1.0).abs() < 1e-14);
        assert!(y.abs() < 1e-14);
        assert!(z.abs() < 1e-14);
    }

    #[test]
    fn unitary_application_preserves_spectrum() {
        let rho = DensityMatrix::<f64>::from_probabilities(&[0.6, 0.3, 0.1]).unwrap();
        // Cyclic permutation matrix.
        let mut p = ComplexMatrix::<f64>::zeros(3);
        p.set(0, 2, Complex::new(1.0, 0.0));
        p.set(1, 0, Complex::new(1.0, 0.0));
        p.set(2, 1, Complex::new(1.0, 0.0));
        let u = UnitaryMatrix::new(p).unwrap();
        let rotated = rho.apply_unitary(&u).unwrap();
        assert_eq!(rotated.eigenvalues(), rho.eigenvalues());
        assert!((rotated.basis_population(1) - 0.6).abs() < 1e-13);
    }

    #[test]
    fn unitary_wrapper_rejects_non_unitary() {
        let mat = ComplexMatrix::<f64>::from_real_diagonal(&[1.0, 2.0]);
        assert!(matches!(
            UnitaryMatrix::new(mat),
            Err(Error::NotUnitary { .. })
        ));
    }
}
