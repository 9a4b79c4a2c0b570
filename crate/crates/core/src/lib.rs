//! Continuous-measurement quantum feedback control toolkit.
//!
//! This crate simulates and analyzes the control of small quantum systems
//! (dimension 2 through 8) under continuous measurement with isotropic
//! dephasing noise. It provides:
//!
//! - [`qlin`]: dense complex linear algebra, Hermitian eigensolver,
//!   validated unitary/density types, random ensembles;
//! - [`observables`]: angular-momentum-style observables, mutually
//!   unbiased basis families, measurement bases adapted to a state;
//! - [`entropy`]: entropy accounting and the first-order entropy increment
//!   laws for commuting and unbiased measurements;
//! - [`sme`]: Euler-Maruyama integration of the stochastic master
//!   equation with a seeded, reproducible trajectory ensemble;
//! - [`control`]: threshold-triggered and eigenvector-tracking feedback
//!   policies with ideal or finite-strength actuation;
//! - [`steady`]: analytic steady-state densities of the qubit diffusion,
//!   their quadrature, and closed-form performance estimates.
//!
//! All numerics are generic over the floating-point width via
//! [`scalar::Scalar`]; the aliases below fix the common concrete types.

pub mod control;
pub mod entropy;
pub mod error;
pub mod observables;
pub mod qlin;
pub mod scalar;
pub mod sme;
pub mod steady;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Dense complex matrix, double precision.
pub type ComplexMatrix64 = qlin::ComplexMatrix<f64>;
/// Dense complex matrix, single precision.
pub type ComplexMatrix32 = qlin::ComplexMatrix<f32>;
/// Density matrix, double precision.
pub type DensityMatrix64 = qlin::DensityMatrix<f64>;
/// Density matrix, single precision.
pub type DensityMatrix32 = qlin::DensityMatrix<f32>;
/// Unitary matrix, double precision.
pub type UnitaryMatrix64 = qlin::UnitaryMatrix<f64>;
/// Unitary matrix, single precision.
pub type UnitaryMatrix32 = qlin::UnitaryMatrix<f32>;
/// Measurement observable, double precision.
pub type Observable64 = observables::Observable<f64>;
/// Measurement observable, single precision.
pub type Observable32 = observables::Observable<f32>;
/// Integrator parameters, double precision.
pub type SmeParams64 = sme::SmeParams<f64>;
/// Integrator parameters, single precision.
pub type SmeParams32 = sme::SmeParams<f32>;
