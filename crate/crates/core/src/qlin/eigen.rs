//! Hermitian eigendecomposition and functions of matrices built on it.
//!
//! A cyclic Jacobi sweep is all that is needed at dimension <= 8: it is
//! branch-light, numerically stable, and has no external dependency. The
//! same machinery powers the unitary matrix exponential and the principal
//! logarithm used for basis interpolation.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qlin::matrix::{dot, matvec, ComplexMatrix};
use crate::scalar::Scalar;

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order; `vectors` holds the matching
/// orthonormal eigenvectors as columns. Each column's phase is fixed so its
/// largest-magnitude component is real and positive (ties broken toward the
/// lowest index), which makes decompositions reproducible across runs.
#[derive(Clone, Debug)]
pub struct Eigh<T> {
    pub eigenvalues: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Fails with [`Error::NotHermitian`] if the input is visibly asymmetric
/// and with [`Error::NoConvergence`] if the off-diagonal mass refuses to
/// vanish (not observed in practice at these dimensions).
pub fn eigh<T: Scalar>(a: &ComplexMatrix<T>) -> Result<Eigh<T>> {
    let n = a.dim();
    let scale = T::one().max(a.max_abs());
    let asym = a.max_asymmetry();
    if asym > T::strict_tol() * scale {
        return Err(Error::NotHermitian {
            max_asymmetry: asym.to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut m = a.hermitized();
    let mut v = ComplexMatrix::<T>::identity(n);
    let stop = T::epsilon() * scale * T::real(n as f64);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_max(&m) <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate_pair(&mut m, &mut v, p, q, stop);
            }
        }
    }
    if !converged && off_diagonal_max(&m) > stop {
        return Err(Error::NoConvergence {
            sweeps: MAX_SWEEPS,
            residual: off_diagonal_max(&m).to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).expect("finite eigenvalues"));

    let eigenvalues: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_column_phase(&mut col);
        vectors.set_column(dst, &col);
    }

    Ok(Eigh {
        eigenvalues,
        vectors,
    })
}

fn off_diagonal_max<T: Scalar>(m: &ComplexMatrix<T>) -> T {
    let n = m.dim();
    let mut worst = T::zero();
    for p in 0..n {
        for q in (p + 1)..n {
            worst = worst.max(m.get(p, q).norm());
        }
    }
    worst
}

/// One complex Jacobi rotation zeroing entry (p, q).
///
/// The pivot's phase is absorbed first so the remaining 2x2 problem is real
/// symmetric; the composite unitary applied to columns (p, q) is
/// `[[c, s], [-s e^{-i phi}, c e^{-i phi}]]` with `phi = arg(a_pq)`.
fn rotate_pair<T: Scalar>(
    m: &mut ComplexMatrix<T>,
    v: &mut ComplexMatrix<T>,
    p: usize,
    q: usize,
    threshold: T,
) {
    let apq = m.get(p, q);
    let beta = apq.norm();
    if beta <= threshold {
        return;
    }
    let phase = apq / Complex::new(beta, T::zero());
    let alpha = m.get(p, p).re;
    let gamma = m.get(q, q).re;

    let tau = (gamma - alpha) / (beta + beta);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    let cc = Complex::new(c, T::zero());
    let sc = Complex::new(s, T::zero());
    // Column-(p,q) block of the rotation.
    let upp = cc;
    let upq = sc;
    let uqp = -sc * phase.conj();
    let uqq = cc * phase.conj();

    let n = m.dim();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let mrp = m.get(r, p);
        let mrq = m.get(r, q);
        let new_rp = mrp * upp + mrq * uqp;
        let new_rq = mrp * upq + mrq * uqq;
        m.set(r, p, new_rp);
        m.set(p, r, new_rp.conj());
        m.set(r, q, new_rq);
        m.set(q, r, new_rq.conj());
    }
    let tb = t * beta;
    m.set(p, p, Complex::new(alpha - tb, T::zero()));
    m.set(q, q, Complex::new(gamma + tb, T::zero()));
    m.set(p, q, Complex::new(T::zero(), T::zero()));
    m.set(q, p, Complex::new(T::zero(), T::zero()));

    for r in 0..n {
        let vrp = v.get(r, p);
        let vrq = v.get(r, q);
        v.set(r, p, vrp * upp + vrq * uqp);
        v.set(r, q, vrp * upq + vrq * uqq);
    }
}

/// Rotates a column's global phase so its largest component is real
/// positive. Ties go to the lowest index.
fn fix_column_phase<T: Scalar>(col: &mut [Complex<T>]) {
    let mut best = 0;
    let mut best_mag = T::zero();
    for (i, z) in col.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag <= T::zero() {
        return;
    }
    let phase = col[best].conj() / Complex::new(best_mag, T::zero());
    for z in col.iter_mut() {
        *z *= phase;
    }
}

/// `exp(i s A)` for Hermitian `A`, via eigendecomposition.
pub fn expi<T: Scalar>(a: &ComplexMatrix<T>, s: T) -> Result<ComplexMatrix<T>> {
    let eig = eigh(a)?;
    let n = a.dim();
    let mut scaled = ComplexMatrix::zeros(n);
    for j in 0..n {
        let theta = s * eig.eigenvalues[j];
        let phase = Complex::new(theta.cos(), theta.sin());
        let col = eig.vectors.column(j);
        let scaled_col: Vec<Complex<T>> = col.iter().map(|z| *z * phase).collect();
        scaled.set_column(j, &scaled_col);
    }
    Ok(&scaled * &eig.vectors.adjoint())
}

/// Principal logarithm `-i log U` of a unitary, returned as a Hermitian
/// generator `A` with `U = exp(i A)` and all phases in `(-pi, pi]`.
#[derive(Clone, Debug)]
pub struct PrincipalLog<T> {
    pub generator: ComplexMatrix<T>,
    /// Set when some eigenvalue of `U` sits at (or numerically on top of)
    /// the branch point -1. The phase is then pinned to +pi, but any result
    /// built from fractional powers of `U` depends on that choice.
    pub branch_ambiguous: bool,
}

/// Computes the principal logarithm of a unitary matrix.
///
/// Eigenvectors of `U` are recovered from the Hermitian part
/// `H = (U + U^H)/2`; clusters of `H` (eigenvalue collisions from
/// conjugate phase pairs) are split using the skew part restricted to the
/// cluster. Phases come from Rayleigh quotients of `U` itself.
pub fn principal_log_unitary<T: Scalar>(u: &ComplexMatrix<T>) -> Result<PrincipalLog<T>> {
    let n = u.dim();
    let residual = u.unitarity_residual();
    if residual > T::strict_tol() * T::real(n as f64) {
        return Err(Error::NotUnitary {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }

    let h = u.hermitized();
    let eig = eigh(&h)?;
    let cluster_tol = T::epsilon().sqrt();

    let mut columns: Vec<Vec<Complex<T>>> = (0..n).map(|j| eig.vectors.column(j)).collect();

    // Split eigenvalue clusters of H with the skew part. Within a cluster
    // cos(theta) is constant, so sin(theta) separates conjugate phases.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eig.eigenvalues[start] - eig.eigenvalues[end]).abs() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            refine_cluster(u, &mut columns, start, end)?;
        }
        start = end;
    }

    let mut branch_ambiguous = false;
    let mut generator = ComplexMatrix::zeros(n);
    let branch_tol = T::strict_tol();
    for col in &columns {
        let ucol = matvec(u, col);
        let lambda = dot(col, &ucol);
        let near_branch = (lambda + Complex::new(T::one(), T::zero())).norm() <= branch_tol;
        let theta = if near_branch {
            branch_ambiguous = true;
            T::PI()
        } else {
            lambda.im.atan2(lambda.re)
        };
        // generator += theta * |col><col|
        let tc = Complex::new(theta, T::zero());
        for i in 0..n {
            for j in 0..n {
                let v = generator.get(i, j) + tc * col[i] * col[j].conj();
                generator.set(i, j, v);
            }
        }
    }

    Ok(PrincipalLog {
        generator: generator.hermitized(),
        branch_ambiguous,
    })
}

/// Rediagonalizes the skew part of `u` inside one eigenvector cluster of
/// its Hermitian part, replacing `columns[start..end]` with vectors that
/// are eigenvectors of `u` itself.
fn refine_cluster<T: Scalar>(
    u: &ComplexMatrix<T>,
    columns: &mut [Vec<Complex<T>>],
    start: usize,
    end: usize,
) -> Result<()> {
    let m = end - start;
    let k = u.skew_part();
    let mut ksub = ComplexMatrix::zeros(m);
    let kcols: Vec<Vec<Complex<T>>> = (start..end).map(|j| matvec(&k, &columns[j])).collect();
    for a in 0..m {
        for b in 0..m {
            ksub.set(a, b, dot(&columns[start + a], &kcols[b]));
        }
    }
    let sub = eigh(&ksub.hermitized())?;
    let n = columns[0].len();
    let mut fresh: Vec<Vec<Complex<T>>> = Vec::with_capacity(m);
    for a in 0..m {
        let mut col = vec![Complex::new(T::zero(), T::zero()); n];
        for b in 0..m {
            let w = sub.vectors.get(b, a);
            for i in 0..n {
                col[i] += w * columns[start + b][i];
            }
        }
        fix_column_phase(&mut col);
        fresh.push(col);
    }
    for (a, col) in fresh.into_iter().enumerate() {
        columns[start + a] = col;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::random::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn reconstruct(eig: &Eigh<f64>) -> ComplexMatrix<f64> {
        let d = ComplexMatrix::from_real_diagonal(&eig.eigenvalues);
        &(&eig.vectors * &d) * &eig.vectors.adjoint()
    }

    #[test]
    fn diagonal_matrix_is_already_solved() {
        let a = ComplexMatrix::from_real_diagonal(&[3.0, -1.0, 2.0]);
        let eig = eigh(&a).unwrap();
        assert_eq!(eig.eigenvalues, vec![3.0, 2.0, -1.0]);
        assert!(reconstruct(&eig).max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn pauli_x_eigensystem() {
        let mut a = ComplexMatrix::<f64>::zeros(2);
        a.set(0, 1, c(1.0, 0.0));
        a.set(1, 0, c(1.0, 0.0));
        let eig = eigh(&a).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Phase convention: largest component real positive.
        let v0 = eig.vectors.column(0);
        assert!((v0[0].re - s).abs() < 1e-14 && v0[0].im.abs() < 1e-15);
        assert!((v0[1].re - s).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for dim in 2..=8 {
            for _ in 0..20 {
                let g = ComplexMatrix::from_fn(dim, |_, _| {
                    c(
                        f64::standard_normal(&mut rng),
                        f64::standard_normal(&mut rng),
                    )
                });
                let a = g.hermitized();
                let eig = eigh(&a).unwrap();
                assert!(
                    reconstruct(&eig).max_abs_diff(&a) < 1e-12,
                    "dim {dim} reconstruction"
                );
                assert!(eig.vectors.unitarity_residual() < 1e-12);
                for w in eig.eigenvalues.windows(2) {
                    assert!(w[0] >= w[1], "descending order");
                }
            }
        }
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let mut a = ComplexMatrix::<f64>::identity(2);
        a.set(0, 1, c(0.5, 0.0));
        assert!(matches!(eigh(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn expi_of_pauli_y_is_a_rotation() {
        // exp(i s sigma_y) = [[cos s, sin s], [-sin s, cos s]]
        let mut sy = ComplexMatrix::<f64>::zeros(2);
        sy.set(0, 1, c(0.0, -1.0));
        sy.set(1, 0, c(0.0, 1.0));
        let s = 0.37;
        let u = expi(&sy, s).unwrap();
        assert!((u.get(0, 0).re - s.cos()).abs() < 1e-14);
        assert!((u.get(0, 1).re - s.sin()).abs() < 1e-14);
        assert!((u.get(1, 0).re + s.sin()).abs() < 1e-14);
        assert!(u.get(0, 0).im.abs() < 1e-14);
    }

    #[test]
    fn expi_zero_angle_is_identity() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, -2.0, 0.5]);
        let u = expi(&a, 0.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn principal_log_round_trips_on_haar_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 2..=5 {
            for _ in 0..25 {
                let u = haar_unitary::<f64, _>(dim, &mut rng);
                let log = principal_log_unitary(u.matrix()).unwrap();
                assert!(log.generator.max_asymmetry() < 1e-12);
                let back = expi(&log.generator, 1.0).unwrap();
                assert!(
                    back.max_abs_diff(u.matrix()) < 1e-9,
                    "round trip dim {dim}"
                );
            }
        }
    }

    #[test]
    fn principal_log_flags_branch_point() {
        // The Hadamard-like reflection has eigenvalues {1, -1}.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut had = ComplexMatrix::<f64>::zeros(2);
        had.set(0, 0, c(s, 0.0));
        had.set(0, 1, c(s, 0.0));
        had.set(1, 0, c(s, 0.0));
        had.set(1, 1, c(-s, 0.0));
        let log = principal_log_unitary(&had).unwrap();
        assert!(log.branch_ambiguous);
        let back = expi(&log.generator, 1.0).unwrap();
        assert!(back.max_abs_diff(&had) < 1e-9);
    }

    #[test]
    fn principal_log_handles_degenerate_conjugate_pair() {
        // diag(e^{i a}, e^{-i a}) has a doubly degenerate Hermitian part;
        // the skew split must recover both phases.
        let a = 0.9f64;
        let mut u = ComplexMatrix::<f64>::zeros(2);
        u.set(0, 0, Complex::from_polar(1.0, a));
        u.set(1, 1, Complex::from_polar(1.0, -a));
        let log = principal_log_unitary(&u).unwrap();
        let mut phases: Vec<f64> = (0..2).map(|i| log.generator.get(i, i).re).collect();
        phases.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((phases[0] + a).abs() < 1e-12);
        assert!((phases[1] - a).abs() < 1e-12);
        assert!(!log.branch_ambiguous);
    }
}
