//! Random unitaries and random density matrices.
//!
//! Haar unitaries come from QR of a complex Ginibre matrix (modified
//! Gram-Schmidt with positive diagonal, which already selects the Haar
//! representative). Density matrices are sampled from the Hilbert-Schmidt
//! measure, plus a near-pure family used to probe entropy laws at small
//! impurity.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qlin::matrix::{check_dim, dot, ComplexMatrix};
use crate::qlin::state::{DensityMatrix, UnitaryMatrix};
use crate::scalar::Scalar;

fn ginibre<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(dim, |_, _| {
        Complex::new(T::standard_normal(rng), T::standard_normal(rng))
    })
}

/// Haar-distributed random unitary.
pub fn haar_unitary<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix<T> {
    // Modified Gram-Schmidt on Ginibre columns. The R diagonal is real
    // positive by construction, so Q is Haar distributed.
    let g = ginibre::<T, _>(dim, rng);
    let mut cols: Vec<Vec<Complex<T>>> = (0..dim).map(|j| g.column(j)).collect();
    for j in 0..dim {
        for i in 0..j {
            let overlap = dot(&cols[i], &cols[j]);
            let (head, tail) = cols.split_at_mut(j);
            for (a, b) in tail[0].iter_mut().zip(head[i].iter()) {
                *a -= overlap * *b;
            }
        }
        let norm = dot(&cols[j], &cols[j]).re.sqrt();
        let inv = Complex::new(T::one() / norm, T::zero());
        for a in cols[j].iter_mut() {
            *a *= inv;
        }
    }
    let mut q = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        q.set_column(j, col);
    }
    UnitaryMatrix::new(q).expect("Gram-Schmidt output is unitary")
}

/// Density matrix drawn from the Hilbert-Schmidt measure,
/// `G G^H / tr(G G^H)` with `G` complex Ginibre.
pub fn hs_density<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    check_dim(dim)?;
    let g = ginibre::<T, _>(dim, rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(T::one() / tr))
}

/// Near-pure density matrix with impurity `delta = 1 - lambda_max`.
///
/// The top eigenvalue is exactly `1 - delta`; the remaining weight `delta`
/// is spread over the other levels by a uniform simplex draw (sorted
/// descending), and the whole spectrum is conjugated by a Haar unitary.
/// `delta = 0` gives a Haar-random pure state. Requires `delta < 0.5` so
/// the top eigenvalue stays dominant.
pub fn near_pure_density<T: Scalar, R: Rng + ?Sized>(
    dim: usize,
    delta: T,
    rng: &mut R,
) -> Result<DensityMatrix<T>> {
    check_dim(dim)?;
    if delta < T::zero() || delta >= T::real(0.5) {
        return Err(Error::bad_arg(
            "delta",
            "impurity must lie in [0, 0.5) so the top eigenvalue dominates",
        ));
    }
    let mut spectrum = Vec::with_capacity(dim);
    spectrum.push(T::one() - delta);
    if delta == T::zero() {
        spectrum.resize(dim, T::zero());
    } else {
        // Uniform simplex point via normalized exponentials.
        let mut tail: Vec<T> = (0..dim - 1)
            .map(|_| -(T::one() - T::unit_uniform(rng)).ln())
            .collect();
        let total: T = tail.iter().copied().sum();
        for w in tail.iter_mut() {
            *w = *w / total * delta;
        }
        tail.sort_by(|a, b| b.partial_cmp(a).expect("finite weights"));
        spectrum.extend(tail);
    }
    let basis = haar_unitary::<T, _>(dim, rng);
    let d = ComplexMatrix::from_real_diagonal(&spectrum);
    let mat = d.rotated_by(basis.matrix());
    DensityMatrix::new(mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_unitary_is_unitary_at_all_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 2..=8 {
            let u = haar_unitary::<f64, _>(dim, &mut rng);
            assert!(u.matrix().unitarity_residual() < 1e-13, "dim {dim}");
        }
    }

    #[test]
    fn haar_first_column_is_uniform_on_sphere() {
        // |<0|U|0>|^2 for Haar U has mean 1/dim.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dim = 4;
        let n = 4000;
        let mut acc = 0.0f64;
        for _ in 0..n {
            let u = haar_unitary::<f64, _>(dim, &mut rng);
            acc += u.matrix().get(0, 0).norm_sqr();
        }
        let mean = acc / n as f64;
        assert!((mean - 0.25).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn hs_density_mean_purity_matches_known_value() {
        // Hilbert-Schmidt measure: E[tr rho^2] = 2 dim / (dim^2 + 1).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 2..=4 {
            let n = 3000;
            let mut acc = 0.0f64;
            for _ in 0..n {
                acc += hs_density::<f64, _>(dim, &mut rng).unwrap().purity();
            }
            let mean = acc / n as f64;
            let expected = 2.0 * dim as f64 / ((dim * dim) as f64 + 1.0);
            assert!(
                (mean - expected).abs() < 0.01,
                "dim {dim}: mean {mean} vs {expected}"
            );
        }
    }

    #[test]
    fn near_pure_spectrum_is_as_requested() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let delta = 0.01;
        let rho = near_pure_density::<f64, _>(4, delta, &mut rng).unwrap();
        assert!((rho.top_eigenvalue() - 0.99).abs() < 1e-12);
        let tail: f64 = rho.eigenvalues()[1..].iter().sum();
        assert!((tail - delta).abs() < 1e-12);
    }

    #[test]
    fn near_pure_zero_delta_is_a_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rho = near_pure_density::<f64, _>(3, 0.0, &mut rng).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn near_pure_rejects_large_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        assert!(near_pure_density::<f64, _>(3, 0.5, &mut rng).is_err());
        assert!(near_pure_density::<f64, _>(3, -0.1, &mut rng).is_err());
    }
}
