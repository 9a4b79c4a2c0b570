//! Measurement observables and the bases they are measured in.
//!
//! An [`Observable`] is a Hermitian operator stored as spectrum plus
//! eigenbasis. The module builds three families used throughout the crate:
//! angular-momentum-style diagonal observables, mutually unbiased basis
//! (MUB) families at dimensions 2 to 4, and observables adapted to a given
//! density matrix: fully unbiased with respect to its eigenbasis, or
//! continuously interpolated between commuting and unbiased.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qlin::eigen::{expi, principal_log_unitary};
use crate::qlin::matrix::{check_dim, ComplexMatrix};
use crate::qlin::state::{DensityMatrix, UnitaryMatrix};
use crate::scalar::Scalar;

/// Hermitian observable stored as eigenvalues plus eigenbasis.
///
/// Eigenvalues are always in descending order and the operator is
/// traceless; both are normalized at construction. The dense matrix form
/// is precomputed because integrators touch it every step.
#[derive(Clone, Debug)]
pub struct Observable<T> {
    eigenvalues: Vec<T>,
    basis: UnitaryMatrix<T>,
    matrix: ComplexMatrix<T>,
}

impl<T: Scalar> Observable<T> {
    /// Builds an observable from eigenvalue/eigenvector pairs (column `j`
    /// of `basis` belongs to `eigenvalues[j]`). Pairs are sorted into
    /// descending eigenvalue order; the spectrum must be traceless.
    pub fn new(eigenvalues: Vec<T>, basis: UnitaryMatrix<T>) -> Result<Self> {
        let dim = check_dim(basis.dim())?;
        if eigenvalues.len() != dim {
            return Err(Error::bad_arg(
                "eigenvalues",
                format!("expected {dim} values, got {}", eigenvalues.len()),
            ));
        }
        if eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(Error::bad_arg("eigenvalues", "non-finite entry"));
        }
        let scale = eigenvalues
            .iter()
            .fold(T::zero(), |a, &b| a.max(b.abs()))
            .max(T::one());
        let trace: T = eigenvalues.iter().copied().sum();
        if trace.abs() > T::strict_tol() * scale * T::real(dim as f64) {
            return Err(Error::bad_arg(
                "eigenvalues",
                format!(
                    "spectrum must be traceless, got trace {:.3e}",
                    trace.to_f64().unwrap_or(f64::NAN)
                ),
            ));
        }

        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| {
            eigenvalues[j]
                .partial_cmp(&eigenvalues[i])
                .expect("finite eigenvalues")
        });
        let sorted: Vec<T> = order.iter().map(|&i| eigenvalues[i]).collect();
        let basis = if order.windows(2).all(|w| w[0] < w[1]) {
            basis
        } else {
            let mut m = ComplexMatrix::zeros(dim);
            for (dst, &src) in order.iter().enumerate() {
                m.set_column(dst, &basis.column(src));
            }
            UnitaryMatrix::new(m)?
        };

        let d = ComplexMatrix::from_real_diagonal(&sorted);
        let matrix = d.rotated_by(basis.matrix());
        Ok(Observable {
            eigenvalues: sorted,
            basis,
            matrix,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Spectrum in descending order.
    #[inline]
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Eigenbasis, one eigenvector per column, matching
    /// [`Self::eigenvalues`].
    #[inline]
    pub fn basis(&self) -> &UnitaryMatrix<T> {
        &self.basis
    }

    /// Dense Hermitian matrix form.
    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    /// Expectation value in the given state.
    pub fn expectation(&self, rho: &DensityMatrix<T>) -> T {
        rho.expectation(&self.matrix)
    }

    /// Basis-independent strength normalization
    /// `J = tr(X^2) / (N (N - 1))`: the factor by which this observable
    /// rescales an effective measurement rate relative to a qubit
    /// measured along an eigenvalue +-1 axis (where `J = 1`).
    pub fn strength_factor(&self) -> T {
        let n = T::real(self.dim() as f64);
        let tr2: T = self.eigenvalues.iter().map(|&l| l * l).sum();
        tr2 / (n * (n - T::one()))
    }
}

/// Angular-momentum-style observable: spectrum
/// `scale * {j, j-1, ..., -j}` with `j = (dim-1)/2`, diagonal in the
/// computational basis. `scale` must be nonzero; a negative scale flips
/// the spectrum (the eigenvalue/eigenvector pairing is re-sorted so the
/// descending-order invariant still holds).
pub fn jz_observable<T: Scalar>(dim: usize, scale: T) -> Result<Observable<T>> {
    check_dim(dim)?;
    if scale == T::zero() || !scale.is_finite() {
        return Err(Error::bad_arg("scale", "must be nonzero and finite"));
    }
    let half = T::real(0.5);
    let top = T::real((dim - 1) as f64) * half;
    let eigenvalues: Vec<T> = (0..dim)
        .map(|i| scale * (top - T::real(i as f64)))
        .collect();
    Observable::new(eigenvalues, UnitaryMatrix::identity(dim))
}

/// A family of mutually unbiased bases, computational basis first.
#[derive(Clone, Debug)]
pub struct MubFamily<T> {
    dim: usize,
    bases: Vec<UnitaryMatrix<T>>,
}

impl<T: Scalar> MubFamily<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of bases in the family (`dim + 1`).
    #[inline]
    pub fn count(&self) -> usize {
        self.bases.len()
    }

    /// All bases; index 0 is the computational basis.
    #[inline]
    pub fn bases(&self) -> &[UnitaryMatrix<T>] {
        &self.bases
    }

    /// Bases other than the computational one, i.e. those unbiased with
    /// respect to a diagonal density matrix.
    pub fn non_computational(&self) -> &[UnitaryMatrix<T>] {
        &self.bases[1..]
    }
}

/// Entries of the four non-computational dimension-4 MUBs, scaled by 1/2.
/// One table per basis; tables are column-major (each inner row of four
/// pairs is one basis vector) with entries as (re, im) in units of 1/2.
const MUB4_COLUMNS: [[[(f64, f64); 4]; 4]; 4] = [
    [
        [(1.0, 0.0), (1.0, 0.0), (1.0, 0.0), (1.0, 0.0)],
        [(1.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (-1.0, 0.0)],
        [(1.0, 0.0), (-1.0, 0.0), (-1.0, 0.0), (1.0, 0.0)],
        [(1.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (-1.0, 0.0)],
    ],
    [
        [(1.0, 0.0), (-1.0, 0.0), (0.0, -1.0), (0.0, -1.0)],
        [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, 1.0)],
        [(1.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.0, -1.0)],
        [(1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)],
    ],
    [
        [(1.0, 0.0), (0.0, -1.0), (0.0, -1.0), (-1.0, 0.0)],
        [(1.0, 0.0), (0.0, -1.0), (0.0, 1.0), (1.0, 0.0)],
        [(1.0, 0.0), (0.0, 1.0), (0.0, 1.0), (-1.0, 0.0)],
        [(1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 0.0)],
    ],
    [
        [(1.0, 0.0), (0.0, -1.0), (-1.0, 0.0), (0.0, -1.0)],
        [(1.0, 0.0), (0.0, -1.0), (1.0, 0.0), (0.0, 1.0)],
        [(1.0, 0.0), (0.0, 1.0), (1.0, 0.0), (0.0, -1.0)],
        [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, 1.0)],
    ],
];

/// Complete MUB family at dimension 2, 3, or 4 (`dim + 1` bases, the
/// computational basis first).
///
/// Dimension 2 uses the three Pauli eigenbases; dimension 3 the standard
/// cubic-root-of-unity construction; dimension 4 a fixed tabulated family.
/// Other dimensions are rejected: complete families are only constructed
/// here for prime-power dimensions up to 4.
pub fn mub_family<T: Scalar>(dim: usize) -> Result<MubFamily<T>> {
    check_dim(dim)?;
    let mut bases = vec![UnitaryMatrix::<T>::identity(dim)];
    match dim {
        2 => {
            let s = T::FRAC_1_SQRT_2();
            let re = |x: f64| Complex::new(T::real(x) * s, T::zero());
            let im = |x: f64| Complex::new(T::zero(), T::real(x) * s);
            let mut x_basis = ComplexMatrix::zeros(2);
            x_basis.set(0, 0, re(1.0));
            x_basis.set(1, 0, re(1.0));
            x_basis.set(0, 1, re(1.0));
            x_basis.set(1, 1, re(-1.0));
            let mut y_basis = ComplexMatrix::zeros(2);
            y_basis.set(0, 0, re(1.0));
            y_basis.set(1, 0, im(1.0));
            y_basis.set(0, 1, re(1.0));
            y_basis.set(1, 1, im(-1.0));
            bases.push(UnitaryMatrix::new(x_basis)?);
            bases.push(UnitaryMatrix::new(y_basis)?);
        }
        3 => {
            // Basis t, vector m, component k: omega^{t k^2 + m k} / sqrt(3).
            let norm = T::one() / T::real(3.0).sqrt();
            let third = T::real(2.0) * T::PI() / T::real(3.0);
            for t in 0..3usize {
                let b = ComplexMatrix::from_fn(3, |k, m| {
                    let e = (t * k * k + m * k) % 3;
                    Complex::from_polar(norm, third * T::real(e as f64))
                });
                bases.push(UnitaryMatrix::new(b)?);
            }
        }
        4 => {
            let half = T::real(0.5);
            for table in &MUB4_COLUMNS {
                let b = ComplexMatrix::from_fn(4, |k, m| {
                    let (re, im) = table[m][k];
                    Complex::new(T::real(re) * half, T::real(im) * half)
                });
                bases.push(UnitaryMatrix::new(b)?);
            }
        }
        _ => {
            return Err(Error::BadDimension {
                dim,
                reason: "complete MUB families are provided for dimensions 2, 3, and 4",
            });
        }
    }
    Ok(MubFamily { dim, bases })
}

/// Checks that every entry of `basis` has squared magnitude `1/dim`, i.e.
/// that the basis is unbiased with respect to the computational basis.
fn check_unbiased_entries<T: Scalar>(basis: &UnitaryMatrix<T>, name: &'static str) -> Result<()> {
    let dim = basis.dim();
    let target = T::one() / T::real(dim as f64);
    for i in 0..dim {
        for j in 0..dim {
            let m = basis.matrix().get(i, j).norm_sqr();
            if (m - target).abs() > T::loose_tol() {
                return Err(Error::bad_arg(
                    name,
                    format!(
                        "not unbiased: |entry({i},{j})|^2 = {:.6e}, expected {:.6e}",
                        m.to_f64().unwrap_or(f64::NAN),
                        target.to_f64().unwrap_or(f64::NAN)
                    ),
                ));
            }
        }
    }
    Ok(())
}

fn check_permutation(perm: &[usize], dim: usize) -> Result<()> {
    if perm.len() != dim {
        return Err(Error::bad_arg(
            "permutation",
            format!("length {} does not match dimension {dim}", perm.len()),
        ));
    }
    let mut seen = vec![false; dim];
    for &p in perm {
        if p >= dim || seen[p] {
            return Err(Error::bad_arg(
                "permutation",
                "entries must be a bijection on 0..dim",
            ));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Observable with the spectrum of `x` measured in a basis unbiased with
/// respect to the eigenbasis of `rho`.
///
/// `mub_basis` must be unbiased relative to the computational basis (so
/// the computational member of a MUB family is rejected here);
/// `permutation` assigns spectrum slot `m` to unbiased vector
/// `permutation[m]`. The returned eigenvectors are
/// `V_rho * mub_basis[:, permutation[m]]`, which makes the observable
/// unbiased with respect to `rho` by construction.
pub fn unbiased_observable<T: Scalar>(
    rho: &DensityMatrix<T>,
    x: &Observable<T>,
    mub_basis: &UnitaryMatrix<T>,
    permutation: &[usize],
) -> Result<Observable<T>> {
    let dim = rho.dim();
    if x.dim() != dim || mub_basis.dim() != dim {
        return Err(Error::bad_arg("mub_basis", "dimension mismatch"));
    }
    check_unbiased_entries(mub_basis, "mub_basis")?;
    check_permutation(permutation, dim)?;

    let rotated = rho.eigenbasis().matrix() * mub_basis.matrix();
    let mut cols = ComplexMatrix::zeros(dim);
    for (m, &src) in permutation.iter().enumerate() {
        cols.set_column(m, &rotated.column(src));
    }
    Observable::new(x.eigenvalues().to_vec(), UnitaryMatrix::new(cols)?)
}

/// Result of [`interpolated_observable`]: the observable plus a flag that
/// is set when the interpolation path crossed the logarithm branch point
/// (some eigenphase of the target basis sits at pi, where the principal
/// branch is a convention rather than a continuous choice).
#[derive(Clone, Debug)]
pub struct Interpolated<T> {
    pub observable: Observable<T>,
    pub branch_ambiguous: bool,
}

/// Observable with the spectrum of `x`, measured in a basis that
/// interpolates between the eigenbasis of `rho` (at `eps = 0`) and the
/// fully unbiased basis `V_rho * target_basis` (at `eps = 1`).
///
/// The path is `V_rho * exp(i eps A)` with `A` the principal logarithm of
/// `target_basis`, so it is geodesic in the unitary group and matches the
/// endpoints exactly.
pub fn interpolated_observable<T: Scalar>(
    rho: &DensityMatrix<T>,
    x: &Observable<T>,
    target_basis: &UnitaryMatrix<T>,
    eps: T,
) -> Result<Interpolated<T>> {
    let dim = rho.dim();
    if x.dim() != dim || target_basis.dim() != dim {
        return Err(Error::bad_arg("target_basis", "dimension mismatch"));
    }
    if !(T::zero()..=T::one()).contains(&eps) {
        return Err(Error::bad_arg("eps", "interpolation parameter must lie in [0, 1]"));
    }
    check_unbiased_entries(target_basis, "target_basis")?;

    let log = principal_log_unitary(target_basis.matrix())?;
    let step = expi(&log.generator, eps)?;
    let basis = UnitaryMatrix::new(rho.eigenbasis().matrix() * &step)?;
    let observable = Observable::new(x.eigenvalues().to_vec(), basis)?;
    Ok(Interpolated {
        observable,
        branch_ambiguous: log.branch_ambiguous,
    })
}

/// Squared couplings from one eigenvector of `rho_basis` to all others
/// through the observable `x_u`.
#[derive(Clone, Debug)]
pub struct CouplingRow<T> {
    /// `|<target| X |j>|^2` for `j != target`, ascending in `j`.
    pub couplings: Vec<T>,
    /// Mean of the couplings (the `J` entering the rule-of-thumb
    /// performance estimate).
    pub mean: T,
}

/// Computes the squared matrix elements `|X_u^{tj}|^2` of `x_u` between
/// basis vector `target_index` of `rho_basis` and every other basis
/// vector, together with their mean.
pub fn coupling_row<T: Scalar>(
    x_u: &Observable<T>,
    rho_basis: &UnitaryMatrix<T>,
    target_index: usize,
) -> Result<CouplingRow<T>> {
    let dim = x_u.dim();
    if rho_basis.dim() != dim {
        return Err(Error::bad_arg("rho_basis", "dimension mismatch"));
    }
    if target_index >= dim {
        return Err(Error::bad_arg(
            "target_index",
            format!("{target_index} >= dim {dim}"),
        ));
    }
    let m = x_u.matrix().in_basis(rho_basis.matrix());
    let couplings: Vec<T> = (0..dim)
        .filter(|&j| j != target_index)
        .map(|j| m.get(target_index, j).norm_sqr())
        .collect();
    let mean = couplings.iter().copied().sum::<T>() / T::real((dim - 1) as f64);
    Ok(CouplingRow { couplings, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::random::near_pure_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jz_spectrum_is_symmetric_ladder() {
        let x = jz_observable::<f64>(4, 1.0).unwrap();
        assert_eq!(x.eigenvalues(), &[1.5, 0.5, -0.5, -1.5]);
        let x2 = jz_observable::<f64>(3, 2.0).unwrap();
        assert_eq!(x2.eigenvalues(), &[2.0, 0.0, -2.0]);
    }

    #[test]
    fn jz_negative_scale_keeps_descending_order() {
        let x = jz_observable::<f64>(2, -1.0).unwrap();
        assert_eq!(x.eigenvalues(), &[0.5, -0.5]);
        // The +0.5 eigenvalue now belongs to |1>.
        assert!((x.matrix().get(1, 1).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn jz_rejects_zero_scale() {
        assert!(jz_observable::<f64>(2, 0.0).is_err());
    }

    #[test]
    fn strength_factor_reference_values() {
        // tr(X^2) / (N(N-1)) for the symmetric ladder at scale 1.
        assert!((jz_observable::<f64>(2, 1.0).unwrap().strength_factor() - 0.25).abs() < 1e-15);
        assert!(
            (jz_observable::<f64>(3, 1.0).unwrap().strength_factor() - 1.0 / 3.0).abs() < 1e-15
        );
        assert!(
            (jz_observable::<f64>(4, 1.0).unwrap().strength_factor() - 5.0 / 12.0).abs() < 1e-15
        );
        // An eigenvalue +-1 qubit axis normalizes to 1.
        assert!((jz_observable::<f64>(2, 2.0).unwrap().strength_factor() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn observable_requires_traceless_spectrum() {
        let basis = UnitaryMatrix::<f64>::identity(2);
        assert!(Observable::new(vec![1.0, -0.5], basis).is_err());
    }

    #[test]
    fn mub_families_are_pairwise_unbiased() {
        for dim in 2..=4usize {
            let fam = mub_family::<f64>(dim).unwrap();
            assert_eq!(fam.count(), dim + 1);
            let target = 1.0 / dim as f64;
            for a in 0..fam.count() {
                for b in (a + 1)..fam.count() {
                    let overlap = fam.bases()[a].adjoint().matrix() * fam.bases()[b].matrix();
                    for i in 0..dim {
                        for j in 0..dim {
                            let m = overlap.get(i, j).norm_sqr();
                            assert!(
                                (m - target).abs() < 1e-12,
                                "dim {dim} bases ({a},{b}) entry ({i},{j}): {m}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mub_family_rejects_unsupported_dimension() {
        assert!(mub_family::<f64>(5).is_err());
        assert!(mub_family::<f64>(6).is_err());
    }

    #[test]
    fn unbiased_observable_is_unbiased_for_the_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for dim in 2..=4usize {
            let rho = near_pure_density::<f64, _>(dim, 0.05, &mut rng).unwrap();
            let x = jz_observable::<f64>(dim, 1.0).unwrap();
            let fam = mub_family::<f64>(dim).unwrap();
            let perm: Vec<usize> = (0..dim).collect();
            for basis in fam.non_computational() {
                let xu = unbiased_observable(&rho, &x, basis, &perm).unwrap();
                let overlap = rho.eigenbasis().adjoint().matrix() * xu.basis().matrix();
                for i in 0..dim {
                    for j in 0..dim {
                        let m = overlap.get(i, j).norm_sqr();
                        assert!((m - 1.0 / dim as f64).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn unbiased_observable_rejects_computational_basis() {
        let rho = DensityMatrix::<f64>::from_probabilities(&[0.9, 0.1]).unwrap();
        let x = jz_observable::<f64>(2, 1.0).unwrap();
        let fam = mub_family::<f64>(2).unwrap();
        let perm = [0usize, 1];
        assert!(unbiased_observable(&rho, &x, &fam.bases()[0], &perm).is_err());
    }

    #[test]
    fn unbiased_observable_rejects_bad_permutation() {
        let rho = DensityMatrix::<f64>::from_probabilities(&[0.9, 0.1]).unwrap();
        let x = jz_observable::<f64>(2, 1.0).unwrap();
        let fam = mub_family::<f64>(2).unwrap();
        assert!(unbiased_observable(&rho, &x, &fam.bases()[1], &[0, 0]).is_err());
        assert!(unbiased_observable(&rho, &x, &fam.bases()[1], &[0]).is_err());
    }

    #[test]
    fn permutation_reassigns_spectrum_slots() {
        let rho = DensityMatrix::<f64>::from_probabilities(&[0.7, 0.2, 0.1]).unwrap();
        let x = jz_observable::<f64>(3, 1.0).unwrap();
        let fam = mub_family::<f64>(3).unwrap();
        let a = unbiased_observable(&rho, &x, &fam.bases()[1], &[0, 1, 2]).unwrap();
        let b = unbiased_observable(&rho, &x, &fam.bases()[1], &[1, 2, 0]).unwrap();
        // Same spectrum, different operator.
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        assert!(a.matrix().max_abs_diff(b.matrix()) > 0.1);
    }

    #[test]
    fn interpolation_hits_both_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let rho = near_pure_density::<f64, _>(3, 0.1, &mut rng).unwrap();
        let x = jz_observable::<f64>(3, 1.0).unwrap();
        let fam = mub_family::<f64>(3).unwrap();
        let target = &fam.bases()[1];

        let at0 = interpolated_observable(&rho, &x, target, 0.0).unwrap();
        let commuting = at0
            .observable
            .matrix()
            .commutator(rho.matrix())
            .max_abs();
        assert!(commuting < 1e-12, "eps=0 must commute, got {commuting}");

        let at1 = interpolated_observable(&rho, &x, target, 1.0).unwrap();
        let direct = unbiased_observable(&rho, &x, target, &[0, 1, 2]).unwrap();
        assert!(at1.observable.matrix().max_abs_diff(direct.matrix()) < 1e-9);
    }

    #[test]
    fn interpolation_rejects_out_of_range_eps() {
        let rho = DensityMatrix::<f64>::from_probabilities(&[0.8, 0.2]).unwrap();
        let x = jz_observable::<f64>(2, 1.0).unwrap();
        let fam = mub_family::<f64>(2).unwrap();
        assert!(interpolated_observable(&rho, &x, &fam.bases()[1], -0.1).is_err());
        assert!(interpolated_observable(&rho, &x, &fam.bases()[1], 1.1).is_err());
    }

    #[test]
    fn coupling_row_for_qubit_mubs_is_one_quarter() {
        let rho = DensityMatrix::<f64>::from_probabilities(&[0.99, 0.01]).unwrap();
        let x = jz_observable::<f64>(2, 1.0).unwrap();
        let fam = mub_family::<f64>(2).unwrap();
        for basis in fam.non_computational() {
            let xu = unbiased_observable(&rho, &x, basis, &[0, 1]).unwrap();
            let row = coupling_row(&xu, rho.eigenbasis(), 0).unwrap();
            assert_eq!(row.couplings.len(), 1);
            assert!((row.couplings[0] - 0.25).abs() < 1e-12);
            assert!((row.mean - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_row_mean_is_basis_independent_checksum() {
        // tr(X^2)/(dim (dim-1)) is fixed by the spectrum whenever the
        // diagonal of X vanishes in rho's basis, which holds for unbiased
        // observables with a traceless spectrum.
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let dim = 4;
        let rho = near_pure_density::<f64, _>(dim, 0.02, &mut rng).unwrap();
        let x = jz_observable::<f64>(dim, 1.0).unwrap();
        let fam = mub_family::<f64>(dim).unwrap();
        let tr_x2: f64 = x.eigenvalues().iter().map(|l| l * l).sum();
        let expected = tr_x2 / (dim * (dim - 1)) as f64;
        for basis in fam.non_computational() {
            let xu = unbiased_observable(&rho, &x, basis, &[0, 1, 2, 3]).unwrap();
            let row = coupling_row(&xu, rho.eigenbasis(), 0).unwrap();
            assert!((row.mean - expected).abs() < 1e-12, "mean {}", row.mean);
        }
    }
}
