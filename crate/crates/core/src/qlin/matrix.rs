//! Dense square complex matrices at small fixed dimension.
//!
//! Hilbert space dimensions in this crate are tiny (2 to 8), so the matrix
//! type is a plain row-major `Vec` with straightforward O(n^3) products.
//! No BLAS, no expression templates; clarity and exact reproducibility win
//! at this size.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::scalar::Scalar;

/// Smallest supported Hilbert space dimension.
pub const MIN_DIM: usize = 2;
/// Largest supported Hilbert space dimension.
pub const MAX_DIM: usize = 8;

/// Returns `Ok(dim)` if `dim` lies in the supported range.
pub fn check_dim(dim: usize) -> crate::error::Result<usize> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(dim)
    } else {
        Err(crate::error::Error::BadDimension {
            dim,
            reason: "supported dimensions are 2 through 8",
        })
    }
}

/// Square complex matrix, row-major storage.
#[derive(Clone)]
pub struct ComplexMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    /// Zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex::new(T::one(), T::zero()));
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, Complex::new(d, T::zero()));
        }
        m
    }

    /// Builds entry-by-entry: `f(row, col)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.dim + j] = v;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex<T> {
        let mut t = Complex::new(T::zero(), T::zero());
        for i in 0..self.dim {
            t += self.get(i, i);
        }
        t
    }

    /// `self += c * other`, entry-wise. The workhorse of the SME stepper;
    /// avoids allocating a temporary per term.
    pub fn axpy(&mut self, c: Complex<T>, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += c * *b;
        }
    }

    /// Multiplies every entry by a real scalar.
    pub fn scale_real(&self, s: T) -> Self {
        let c = Complex::new(s, T::zero());
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| *z * c).collect(),
        }
    }

    /// Multiplies every entry by a complex scalar.
    pub fn scale(&self, c: Complex<T>) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| *z * c).collect(),
        }
    }

    /// Largest entry magnitude (max norm).
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest deviation from hermiticity, `max_ij |a_ij - conj(a_ji)|`.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Projects onto the Hermitian part, `(A + A^H)/2`.
    pub fn hermitized(&self) -> Self {
        let half = Complex::new(T::real(0.5), T::zero());
        Self::from_fn(self.dim, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * half
        })
    }

    /// Anti-Hermitian part mapped to Hermitian: `(A - A^H)/(2i)`.
    pub fn skew_part(&self) -> Self {
        let half_over_i = Complex::new(T::zero(), -T::real(0.5));
        Self::from_fn(self.dim, |i, j| {
            (self.get(i, j) - self.get(j, i).conj()) * half_over_i
        })
    }

    /// Max-norm residual of unitarity, `max |U U^H - I|`.
    pub fn unitarity_residual(&self) -> T {
        let product = self * &self.adjoint();
        product.max_abs_diff(&Self::identity(self.dim))
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// `u^H * self * u`: expresses this operator in the basis whose vectors
    /// are the columns of `u`.
    pub fn in_basis(&self, u: &Self) -> Self {
        &(&u.adjoint() * self) * u
    }

    /// `u * self * u^H`: applies the unitary `u` to this operator
    /// (Schroedinger picture update of a state).
    pub fn rotated_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    /// Replaces column `j`.
    pub fn set_column(&mut self, j: usize, col: &[Complex<T>]) {
        debug_assert_eq!(col.len(), self.dim);
        for (i, v) in col.iter().enumerate() {
            self.set(i, j, *v);
        }
    }

    /// Real part of `tr(self * other)`. For Hermitian `self` and `other`
    /// this is the Hilbert-Schmidt inner product; for a density matrix and
    /// an observable it is the expectation value.
    pub fn real_trace_product(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = T::zero();
        for i in 0..self.dim {
            for l in 0..self.dim {
                let p = self.get(i, l) * other.get(l, i);
                acc += p.re;
            }
        }
        acc
    }

    /// True when every entry is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T: Scalar> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        debug_assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

impl<T: Scalar> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        debug_assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

impl<T: Scalar> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        debug_assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * rhs.get(l, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

// Bound on Debug alone (not Scalar) so containing structs can keep
// using derive(Debug).
impl<T: fmt::Debug> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix dim={}", self.dim)?;
        for i in 0..self.dim {
            write!(f, "  [")?;
            for j in 0..self.dim {
                let z = &self.data[i * self.dim + j];
                write!(f, " {:?}{:+?}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

/// Complex dot product `sum_i conj(a_i) b_i`.
pub(crate) fn dot<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex::new(T::zero(), T::zero());
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * *y;
    }
    acc
}

/// Matrix-vector product.
pub(crate) fn matvec<T: Scalar>(m: &ComplexMatrix<T>, v: &[Complex<T>]) -> Vec<Complex<T>> {
    debug_assert_eq!(m.dim(), v.len());
    let n = m.dim();
    let mut out = vec![Complex::new(T::zero(), T::zero()); n];
    for i in 0..n {
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..n {
            acc += m.get(i, j) * v[j];
        }
        out[i] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn dim_range_is_enforced() {
        assert!(check_dim(1).is_err());
        assert!(check_dim(9).is_err());
        for d in 2..=8 {
            assert!(check_dim(d).is_ok());
        }
    }

    #[test]
    fn identity_is_multiplicative_unit() {
        let a = ComplexMatrix::from_fn(3, |i, j| c((i + 2 * j) as f64, (i * j) as f64 - 1.0));
        let id = ComplexMatrix::<f64>::identity(3);
        assert!((&a * &id).max_abs_diff(&a) == 0.0);
        assert!((&id * &a).max_abs_diff(&a) == 0.0);
    }

    #[test]
    fn adjoint_squares_to_identity_map() {
        let a = ComplexMatrix::from_fn(4, |i, j| c(i as f64 - j as f64, (i + j) as f64));
        assert!(a.adjoint().adjoint().max_abs_diff(&a) == 0.0);
    }

    #[test]
    fn hermitized_plus_skew_reconstructs() {
        let a = ComplexMatrix::from_fn(3, |i, j| c(0.3 * i as f64 - j as f64, 0.7 * (i * 2 + j) as f64));
        let h = a.hermitized();
        let k = a.skew_part();
        // a = h + i k
        let rebuilt =
            ComplexMatrix::from_fn(3, |i, j| h.get(i, j) + Complex::<f64>::i() * k.get(i, j));
        assert!(rebuilt.max_abs_diff(&a) < 1e-15);
        assert!(h.max_asymmetry() < 1e-15);
        assert!(k.max_asymmetry() < 1e-15);
    }

    #[test]
    fn trace_of_product_is_cyclic() {
        let a = ComplexMatrix::from_fn(3, |i, j| c(i as f64 + 0.5, j as f64 - 0.25));
        let b = ComplexMatrix::from_fn(3, |i, j| c(j as f64 - i as f64, 1.0));
        let ab = (&a * &b).trace();
        let ba = (&b * &a).trace();
        assert!((ab - ba).norm() < 1e-12);
    }

    #[test]
    fn commutator_with_self_vanishes() {
        let a = ComplexMatrix::from_fn(4, |i, j| c((i * j) as f64, i as f64 - j as f64));
        assert!(a.commutator(&a).max_abs() < 1e-12);
    }

    #[test]
    fn real_trace_product_matches_direct_trace() {
        let a = ComplexMatrix::from_fn(3, |i, j| c(0.2 * (i + j) as f64, 0.1 * i as f64));
        let b = ComplexMatrix::from_fn(3, |i, j| c(1.0 - j as f64, 0.3 * (i * j) as f64));
        let direct = (&a * &b).trace().re;
        assert!((a.real_trace_product(&b) - direct).abs() < 1e-13);
    }

    #[test]
    fn axpy_accumulates() {
        let mut a = ComplexMatrix::<f64>::identity(2);
        let b = ComplexMatrix::from_fn(2, |i, j| c((i + j) as f64, 0.0));
        a.axpy(c(2.0, 0.0), &b);
        assert_eq!(a.get(0, 0), c(1.0, 0.0));
        assert_eq!(a.get(0, 1), c(2.0, 0.0));
        assert_eq!(a.get(1, 1), c(5.0, 0.0));
    }

    #[test]
    fn basis_change_round_trips() {
        // in_basis followed by rotated_by with the same unitary is identity.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = ComplexMatrix::from_fn(2, |i, j| {
            if i == 1 && j == 1 {
                c(-s, 0.0)
            } else {
                c(s, 0.0)
            }
        });
        let a = ComplexMatrix::from_fn(2, |i, j| c((i + 1) as f64, (j as f64) - 0.5));
        let round = a.in_basis(&u).rotated_by(&u);
        assert!(round.max_abs_diff(&a) < 1e-14);
    }
}
