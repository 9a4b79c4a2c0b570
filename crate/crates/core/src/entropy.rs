//! Entropy accounting and first-order entropy increment laws.
//!
//! Near a pure state the linear entropy `L = 1 - tr(rho^2)` behaves very
//! differently depending on how the measured observable relates to the
//! state: measurements commuting with `rho` change `L` only through a
//! zero-mean stochastic term, while measurements unbiased with respect to
//! `rho`'s eigenbasis remove entropy deterministically at first order.
//! This module evaluates both predictions and the exact mean rate they
//! approximate.

use crate::error::{Error, Result};
use crate::observables::Observable;
use crate::qlin::eigen::expi;
use crate::qlin::matrix::ComplexMatrix;
use crate::qlin::state::{DensityMatrix, UnitaryMatrix};
use crate::scalar::Scalar;

/// The three entropy-like quantities used throughout the crate.
#[derive(Clone, Copy, Debug)]
pub struct EntropyReport<T> {
    /// Von Neumann entropy `-sum(lambda ln lambda)` (natural log).
    pub vonneumann: T,
    /// Linear entropy `1 - tr(rho^2)`.
    pub linear: T,
    /// Impurity `1 - lambda_max`. Near purity, `vonneumann` and `linear`
    /// both equal `2 delta` to first order (up to `delta ln delta`
    /// corrections for the von Neumann entropy).
    pub delta: T,
}

/// Computes the entropy report from the cached spectrum of `rho`.
pub fn entropies<T: Scalar>(rho: &DensityMatrix<T>) -> EntropyReport<T> {
    let mut vn = T::zero();
    let mut purity = T::zero();
    for &l in rho.eigenvalues() {
        let l = l.max(T::zero());
        purity += l * l;
        if l > T::zero() {
            vn -= l * l.ln();
        }
    }
    EntropyReport {
        vonneumann: vn,
        linear: T::one() - purity,
        delta: T::one() - rho.top_eigenvalue(),
    }
}

fn check_strength<T: Scalar>(k: T) -> Result<()> {
    if k < T::zero() || !k.is_finite() {
        return Err(Error::bad_arg("k", "measurement strength must be finite and >= 0"));
    }
    Ok(())
}

fn impurity_or_reject<T: Scalar>(rho: &DensityMatrix<T>) -> Result<T> {
    let delta = T::one() - rho.top_eigenvalue();
    if delta <= T::zero() {
        return Err(Error::BadDensity {
            reason: "state is pure (delta = 0); first-order entropy laws are singular there".into(),
        });
    }
    Ok(delta)
}

/// First-order linear entropy increment for a measurement commuting with
/// the state: `dS = sqrt(8k) S [sum_{j>=1} X_j lambda_j / delta - X_0] dW`.
///
/// `X_j` are the diagonal entries of the observable in `rho`'s eigenbasis
/// (descending eigenvalue order, `j = 0` the dominant one). The increment
/// is purely stochastic: averaged over `dW` it vanishes, so commuting
/// measurements purify only by luck, not in the mean.
pub fn predicted_ds_commuting<T: Scalar>(
    rho: &DensityMatrix<T>,
    x: &Observable<T>,
    k: T,
    dw: T,
) -> Result<T> {
    check_strength(k)?;
    if x.dim() != rho.dim() {
        return Err(Error::bad_arg("x", "dimension mismatch"));
    }
    let scale = T::one() + x.matrix().max_abs();
    let non_commuting = x.matrix().commutator(rho.matrix()).max_abs();
    if non_commuting > T::loose_tol() * scale {
        return Err(Error::bad_arg(
            "x",
            format!(
                "observable does not commute with rho (|[X, rho]| = {:.3e})",
                non_commuting.to_f64().unwrap_or(f64::NAN)
            ),
        ));
    }
    let delta = impurity_or_reject(rho)?;

    let in_rho = x.matrix().in_basis(rho.eigenbasis().matrix());
    let lambdas = rho.eigenvalues();
    let mut bracket = -in_rho.get(0, 0).re;
    for j in 1..rho.dim() {
        bracket += in_rho.get(j, j).re * lambdas[j] / delta;
    }
    let s = entropies(rho).linear;
    Ok((T::real(8.0) * k).sqrt() * s * bracket * dw)
}

/// First-order linear entropy increment for a measurement unbiased with
/// respect to the state:
/// `dS = -8 k S [sum_{j>=1} |X_u^{0j}|^2 lambda_j / delta] dt`.
///
/// Deterministic and strictly negative whenever the state is impure: an
/// unbiased measurement extracts entropy at first order in `delta`.
pub fn predicted_ds_unbiased<T: Scalar>(
    rho: &DensityMatrix<T>,
    x_u: &Observable<T>,
    k: T,
    dt: T,
) -> Result<T> {
    check_strength(k)?;
    if x_u.dim() != rho.dim() {
        return Err(Error::bad_arg("x_u", "dimension mismatch"));
    }
    let delta = impurity_or_reject(rho)?;

    // The observable's eigenbasis must be unbiased with respect to rho's.
    let dim = rho.dim();
    let overlap = rho.eigenbasis().adjoint().matrix() * x_u.basis().matrix();
    let target = T::one() / T::real(dim as f64);
    for i in 0..dim {
        for j in 0..dim {
            let m = overlap.get(i, j).norm_sqr();
            if (m - target).abs() > T::real(1e-6) {
                return Err(Error::bad_arg(
                    "x_u",
                    format!(
                        "eigenbasis is not unbiased for rho: |overlap({i},{j})|^2 = {:.6e}",
                        m.to_f64().unwrap_or(f64::NAN)
                    ),
                ));
            }
        }
    }

    let in_rho = x_u.matrix().in_basis(rho.eigenbasis().matrix());
    let lambdas = rho.eigenvalues();
    let mut coupling_sum = T::zero();
    for j in 1..dim {
        coupling_sum += in_rho.get(0, j).norm_sqr() * lambdas[j] / delta;
    }
    let s = entropies(rho).linear;
    Ok(-(T::real(8.0) * k) * s * coupling_sum * dt)
}

/// Exact ensemble-mean rate of change of the linear entropy under
/// continuous measurement of `x` at strength `k` (no Hamiltonian, no
/// extraneous noise). Equal to the trace form
/// `2k tr(rho [X,[X,rho]]) - 2k tr((X rho + rho X - 2<X> rho)^2)`,
/// which in `rho`'s eigenbasis reads
/// `d<L>/dt = -8k [ sum_{m != j} |X_mj|^2 lambda_m lambda_j
///                  + sum_m lambda_m^2 (X_mm - <X>)^2 ]`.
/// The diagonal part vanishes for unbiased zero-trace observables but
/// carries the whole (second-order) rate in the commuting case.
/// Always <= 0.
pub fn exact_mean_entropy_rate<T: Scalar>(rho: &DensityMatrix<T>, x: &Observable<T>, k: T) -> T {
    let in_rho = x.matrix().in_basis(rho.eigenbasis().matrix());
    let lambdas = rho.eigenvalues();
    -(T::real(8.0) * k) * rate_bracket(&in_rho, lambdas)
}

/// The bracketed sum of the exact rate, from the observable's matrix
/// elements in the state's eigenbasis.
fn rate_bracket<T: Scalar>(in_rho: &ComplexMatrix<T>, lambdas: &[T]) -> T {
    let dim = lambdas.len();
    let mut mean_x = T::zero();
    for m in 0..dim {
        mean_x += lambdas[m] * in_rho.get(m, m).re;
    }
    let mut acc = T::zero();
    for m in 0..dim {
        for j in 0..dim {
            if m == j {
                let centered = in_rho.get(m, m).re - mean_x;
                acc += lambdas[m] * lambdas[m] * centered * centered;
            } else {
                acc += in_rho.get(m, j).norm_sqr() * lambdas[m] * lambdas[j];
            }
        }
    }
    acc
}

/// Result of sweeping the interpolation parameter of the measured basis.
#[derive(Clone, Debug)]
pub struct RateSweep<T> {
    /// `(eps, rate)` pairs, in grid order. Rates are exact mean linear
    /// entropy rates per unit measurement strength (`k = 1`); the argmin
    /// does not depend on `k`, which only scales the whole curve.
    pub points: Vec<(T, T)>,
    /// Index of the most negative rate; ties resolve toward the larger
    /// `eps` (the more unbiased basis).
    pub best_index: usize,
    /// Propagated from the principal logarithm of the target basis.
    pub branch_ambiguous: bool,
}

impl<T: Copy> RateSweep<T> {
    /// The optimal `(eps, rate)` pair.
    pub fn best(&self) -> (T, T) {
        self.points[self.best_index]
    }
}

/// Sweeps the commuting-to-unbiased interpolation of the measured basis
/// and reports the exact mean entropy rate at each grid point.
///
/// `grid` must be a nondecreasing list of interpolation parameters in
/// `[0, 1]`. The measured observable at parameter `eps` carries the
/// spectrum of `x` in the basis `V_rho exp(i eps A)`, `A` the principal
/// logarithm of `target_basis`; its matrix elements in `rho`'s eigenbasis
/// are just `exp(i eps A) diag(x) exp(-i eps A)`, which is what the rate
/// formula consumes.
pub fn entropy_rate_sweep<T: Scalar>(
    rho: &DensityMatrix<T>,
    x: &Observable<T>,
    target_basis: &UnitaryMatrix<T>,
    grid: &[T],
) -> Result<RateSweep<T>> {
    let dim = rho.dim();
    if x.dim() != dim || target_basis.dim() != dim {
        return Err(Error::bad_arg("target_basis", "dimension mismatch"));
    }
    if grid.is_empty() {
        return Err(Error::bad_arg("grid", "must not be empty"));
    }
    for pair in grid.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::bad_arg("grid", "must be nondecreasing"));
        }
    }
    if grid[0] < T::zero() || *grid.last().expect("non-empty") > T::one() {
        return Err(Error::bad_arg("grid", "entries must lie in [0, 1]"));
    }

    let log = crate::qlin::eigen::principal_log_unitary(target_basis.matrix())?;
    let lambdas = rho.eigenvalues();
    let diag = ComplexMatrix::from_real_diagonal(x.eigenvalues());

    let mut points: Vec<(T, T)> = Vec::with_capacity(grid.len());
    let mut best_index = 0;
    for (idx, &eps) in grid.iter().enumerate() {
        let u = expi(&log.generator, eps)?;
        let in_rho = diag.rotated_by(&u);
        let rate = -T::real(8.0) * rate_bracket(&in_rho, lambdas);
        if idx > 0 && rate <= points[best_index].1 {
            best_index = idx;
        }
        points.push((eps, rate));
    }

    Ok(RateSweep {
        points,
        best_index,
        branch_ambiguous: log.branch_ambiguous,
    })
}
