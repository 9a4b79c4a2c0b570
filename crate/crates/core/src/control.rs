//! Qubit feedback policies driven by the continuous measurement record.
//!
//! Two policies, each with an ideal (instantaneous) and a finite-strength
//! actuation variant:
//!
//! - commuting: measure `sigma_z` and, whenever the Bloch coordinate
//!   drops to the threshold `-eps`, flip the state back through a pi
//!   rotation about `y`. With finite strength `mu` the rotation takes
//!   wall time `pi / (sqrt(2) mu)`, during which measurement is switched
//!   off by default (concurrent measurement freezes the rotation);
//! - unbiased: measure along the Bloch-equator axis perpendicular to the
//!   current state (so the measurement is unbiased with respect to
//!   `rho`'s eigenbasis) and continuously steer the dominant eigenvector
//!   onto the target `|0>`, either exactly (ideal) or through a
//!   rate-limited rotation.
//!
//! Both target the computational state `|0>`; success is its population
//! `P = <0|rho|0>`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::observables::Observable;
use crate::qlin::eigen::eigh;
use crate::qlin::matrix::ComplexMatrix;
use crate::qlin::state::{DensityMatrix, UnitaryMatrix};
use crate::scalar::Scalar;
use crate::sme::{sme_step, step_with_dt, SmeParams, TrajectoryState};

/// Fraction of each closed-loop run discarded before averaging `P`.
pub const BURN_IN_FRACTION: f64 = 0.25;

/// Actuation strength of the feedback Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControlStrength<T> {
    /// Feedback unitaries are applied instantaneously.
    Ideal,
    /// Hamiltonian amplitude `mu`: `H = (mu/sqrt(2)) n.sigma`, giving a
    /// Bloch rotation rate `sqrt(2) mu`.
    Finite(T),
}

/// Which measurement/feedback pairing to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyMode {
    Commuting,
    Unbiased,
}

/// Closed-loop policy configuration.
#[derive(Clone, Copy, Debug)]
pub struct FeedbackConfig<T> {
    pub mode: PolicyMode,
    pub strength: ControlStrength<T>,
    /// Trigger threshold `eps` in `[0, 1)`; the commuting policy fires
    /// when the Bloch coordinate satisfies `z <= -eps`. Ignored by the
    /// unbiased policy, which acts continuously.
    pub threshold: T,
    /// Keep measuring while a finite-strength rotation is in progress.
    /// Off by default: strong concurrent measurement pins the state and
    /// stalls the rotation.
    pub measure_during_rotation: bool,
}

impl<T: Scalar> FeedbackConfig<T> {
    pub fn new(mode: PolicyMode, strength: ControlStrength<T>, threshold: T) -> Result<Self> {
        if let ControlStrength::Finite(mu) = strength {
            if !(mu.is_finite() && mu > T::zero()) {
                return Err(Error::bad_arg("strength", "finite mu must be > 0"));
            }
        }
        if !(threshold >= T::zero() && threshold < T::one()) {
            return Err(Error::bad_arg("threshold", "eps must lie in [0, 1)"));
        }
        Ok(FeedbackConfig {
            mode,
            strength,
            threshold,
            measure_during_rotation: false,
        })
    }

    pub fn with_measure_during_rotation(mut self, yes: bool) -> Self {
        self.measure_during_rotation = yes;
        self
    }
}

/// What the commuting policy did in one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyAction {
    /// Measured; threshold not crossed.
    Idle,
    /// Threshold crossed this step; correction applied (ideal) or started
    /// (finite strength).
    StartedRotation,
    /// A finite-strength rotation is in progress.
    Rotating,
}

fn require_qubit<T: Scalar>(state: &TrajectoryState<T>) -> Result<()> {
    if state.rho.dim() != 2 {
        return Err(Error::BadDimension {
            dim: state.rho.dim(),
            reason: "feedback policies are defined for qubits",
        });
    }
    Ok(())
}

/// `exp(-i phi sigma_y / 2)`: Bloch rotation by `phi` about `+y`.
fn rotation_about_y<T: Scalar>(phi: T) -> UnitaryMatrix<T> {
    let half = phi * T::real(0.5);
    let (s, c) = (half.sin(), half.cos());
    let mut u = ComplexMatrix::zeros(2);
    u.set(0, 0, Complex::new(c, T::zero()));
    u.set(0, 1, Complex::new(-s, T::zero()));
    u.set(1, 0, Complex::new(s, T::zero()));
    u.set(1, 1, Complex::new(c, T::zero()));
    UnitaryMatrix::new(u).expect("rotation matrices are unitary")
}

/// `exp(-i phi (n.sigma) / 2)` for a unit Bloch axis `n`.
fn rotation_about_axis<T: Scalar>(axis: (T, T, T), phi: T) -> UnitaryMatrix<T> {
    let (nx, ny, nz) = axis;
    let half = phi * T::real(0.5);
    let (s, c) = (half.sin(), half.cos());
    let mut u = ComplexMatrix::zeros(2);
    u.set(0, 0, Complex::new(c, -s * nz));
    u.set(0, 1, Complex::new(-s * ny, -s * nx));
    u.set(1, 0, Complex::new(s * ny, -s * nx));
    u.set(1, 1, Complex::new(c, s * nz));
    UnitaryMatrix::new(u).expect("rotation matrices are unitary")
}

/// Exact isotropic dephasing over `dt`: the spectrum contracts toward
/// `1/2` by `exp(-gamma dt)` while the eigenbasis is untouched.
fn depolarize_exact<T: Scalar>(
    rho: &DensityMatrix<T>,
    params: &SmeParams<T>,
    dt: T,
) -> DensityMatrix<T> {
    let f = (-(params.gamma(2)) * dt).exp();
    let half = T::real(0.5);
    let spectrum: Vec<T> = rho
        .eigenvalues()
        .iter()
        .map(|&l| f * l + (T::one() - f) * half)
        .collect();
    DensityMatrix::from_eigh(spectrum, rho.eigenbasis().clone())
}

/// Threshold-triggered commuting policy: measures `sigma_z` (spectrum
/// +-1) and corrects with a pi rotation about `y` once `z <= -threshold`.
#[derive(Clone, Debug)]
pub struct CommutingController<T> {
    cfg: FeedbackConfig<T>,
    x: Observable<T>,
    rotation_left: Option<T>,
    /// Number of threshold crossings that triggered a correction.
    pub triggers: u64,
}

impl<T: Scalar> CommutingController<T> {
    pub fn new(cfg: FeedbackConfig<T>) -> Result<Self> {
        if cfg.mode != PolicyMode::Commuting {
            return Err(Error::bad_arg("cfg", "mode must be Commuting"));
        }
        let x = Observable::new(
            vec![T::one(), -T::one()],
            UnitaryMatrix::identity(2),
        )?;
        Ok(CommutingController {
            cfg,
            x,
            rotation_left: None,
            triggers: 0,
        })
    }

    /// True while a finite-strength correction is still rotating.
    pub fn rotating(&self) -> bool {
        self.rotation_left.is_some()
    }

    /// Advances the closed loop by (at most) one measurement step.
    ///
    /// While a finite-strength rotation is in flight the step length may
    /// be shorter than `params.dt` so the rotation ends exactly on time;
    /// `state.t` always reflects the true elapsed time.
    pub fn step(
        &mut self,
        state: TrajectoryState<T>,
        params: &SmeParams<T>,
    ) -> Result<(PolicyAction, TrajectoryState<T>)> {
        require_qubit(&state)?;

        if let Some(left) = self.rotation_left {
            let dt = params.dt.min(left);
            let mut state = if self.cfg.measure_during_rotation {
                step_with_dt(state, &self.x, None, params, dt)?
            } else {
                // Measurement off: evolve noise exactly, no record.
                let mut s = state;
                s.rho = depolarize_exact(&s.rho, params, dt);
                s.t += dt;
                s
            };
            let mu = match self.cfg.strength {
                ControlStrength::Finite(mu) => mu,
                ControlStrength::Ideal => unreachable!("ideal corrections never enqueue"),
            };
            let phi = T::real(2.0).sqrt() * mu * dt;
            state.rho = state.rho.apply_unitary(&rotation_about_y(phi))?;
            let left = left - dt;
            self.rotation_left = if left > params.dt * T::real(1e-9) {
                Some(left)
            } else {
                None
            };
            return Ok((PolicyAction::Rotating, state));
        }

        let state = sme_step(state, &self.x, None, params)?;
        let (_, _, z) = state.rho.bloch_vector()?;
        if z <= -self.cfg.threshold {
            self.triggers += 1;
            match self.cfg.strength {
                ControlStrength::Ideal => {
                    let mut state = state;
                    state.rho = state.rho.apply_unitary(&rotation_about_y(T::PI()))?;
                    Ok((PolicyAction::StartedRotation, state))
                }
                ControlStrength::Finite(mu) => {
                    self.rotation_left = Some(T::PI() / (T::real(2.0).sqrt() * mu));
                    Ok((PolicyAction::StartedRotation, state))
                }
            }
        } else {
            Ok((PolicyAction::Idle, state))
        }
    }
}

/// One step's outputs from the unbiased policy: the observable that was
/// measured and the feedback Hamiltonian that was applied (`None` when
/// the state was already aligned or the actuation is ideal).
#[derive(Clone, Debug)]
pub struct UnbiasedStep<T> {
    pub observable: Observable<T>,
    pub hamiltonian: Option<ComplexMatrix<T>>,
}

/// Eigenvector-tracking unbiased policy: measures along the equatorial
/// axis perpendicular to the Bloch vector and steers the dominant
/// eigenvector onto `|0>`.
#[derive(Clone, Debug)]
pub struct UnbiasedController<T> {
    cfg: FeedbackConfig<T>,
    /// Steps in which a feedback correction was applied.
    pub corrections: u64,
}

impl<T: Scalar> UnbiasedController<T> {
    pub fn new(cfg: FeedbackConfig<T>) -> Result<Self> {
        if cfg.mode != PolicyMode::Unbiased {
            return Err(Error::bad_arg("cfg", "mode must be Unbiased"));
        }
        Ok(UnbiasedController {
            cfg,
            corrections: 0,
        })
    }

    /// Chooses the measurement axis for the current state: the unit
    /// vector along `z_hat x r`, which lies in the equator and is
    /// orthogonal to the Bloch vector; measuring it is unbiased for
    /// `rho`. Falls back to `x_hat` when the state is on the `z` axis
    /// (every equatorial axis is then equivalent).
    fn measurement_axis(&self, bloch: (T, T, T)) -> (T, T, T) {
        let (x, y, _) = bloch;
        let norm = (x * x + y * y).sqrt();
        if norm <= T::real(1e-12) {
            (T::one(), T::zero(), T::zero())
        } else {
            (-y / norm, x / norm, T::zero())
        }
    }

    /// Advances the closed loop by one step: measure along the adapted
    /// axis, then apply the feedback correction.
    pub fn step(
        &mut self,
        state: TrajectoryState<T>,
        params: &SmeParams<T>,
    ) -> Result<(UnbiasedStep<T>, TrajectoryState<T>)> {
        require_qubit(&state)?;

        let bloch = state.rho.bloch_vector()?;
        let (nx, ny, _) = self.measurement_axis(bloch);
        let mut xm = ComplexMatrix::zeros(2);
        xm.set(0, 1, Complex::new(nx, -ny));
        xm.set(1, 0, Complex::new(nx, ny));
        let eig = eigh(&xm)?;
        let observable = Observable::new(
            eig.eigenvalues.clone(),
            UnitaryMatrix::new_unchecked(eig.vectors),
        )?;

        let mut state = sme_step(state, &observable, None, params)?;

        let hamiltonian = match self.cfg.strength {
            ControlStrength::Ideal => {
                // Eigenvectorize: keep the spectrum, move the dominant
                // eigenvector onto |0> (diagonal in the computational
                // basis, descending).
                self.corrections += 1;
                state.rho = DensityMatrix::from_eigh(
                    state.rho.eigenvalues().to_vec(),
                    UnitaryMatrix::identity(2),
                );
                None
            }
            ControlStrength::Finite(mu) => {
                let (x, y, z) = state.rho.bloch_vector()?;
                let perp = (x * x + y * y).sqrt();
                let theta = perp.atan2(z);
                if theta <= T::zero() {
                    None
                } else {
                    let cap = T::real(2.0).sqrt() * mu * params.dt;
                    let phi = theta.min(cap);
                    let axis = if perp > T::real(1e-12) {
                        (y / perp, -x / perp, T::zero())
                    } else {
                        // Antipodal state: any equatorial axis works.
                        (T::zero(), T::one(), T::zero())
                    };
                    state.rho = state.rho.apply_unitary(&rotation_about_axis(axis, phi))?;
                    self.corrections += 1;
                    let strength = phi / (T::real(2.0) * params.dt);
                    let mut h = ComplexMatrix::zeros(2);
                    h.set(0, 1, Complex::new(strength * axis.0, -strength * axis.1));
                    h.set(1, 0, Complex::new(strength * axis.0, strength * axis.1));
                    Some(h)
                }
            }
        };

        Ok((UnbiasedStep {
            observable,
            hamiltonian,
        }, state))
    }
}

/// Aggregate result of a closed-loop ensemble.
#[derive(Clone, Debug)]
pub struct ClosedLoopResult<T> {
    /// Time- and ensemble-averaged population of the target state after
    /// burn-in.
    pub mean_p: T,
    /// Standard error of the per-trajectory means.
    pub stderr: T,
    pub diagnostics: ClosedLoopDiagnostics<T>,
}

/// Per-ensemble bookkeeping.
#[derive(Clone, Debug)]
pub struct ClosedLoopDiagnostics<T> {
    pub n_traj: usize,
    /// Time discarded at the start of each trajectory.
    pub burn_in: T,
    /// Per-trajectory time-averaged `P` (post burn-in), trajectory order.
    pub per_traj: Vec<T>,
    /// Commuting: threshold triggers. Unbiased: steps with a correction.
    pub total_corrections: u64,
    /// Positivity clamps summed over the ensemble.
    pub positivity_clamps: u64,
}

/// Runs `n_traj` independent closed-loop trajectories of the configured
/// policy to `t_final` and returns the steady-state success statistics.
///
/// Trajectory `i` uses RNG stream `i` of `params.seed`, so results are
/// reproducible and independent of thread scheduling. The first
/// [`BURN_IN_FRACTION`] of each run is discarded; `P` is then averaged
/// over time (weighted by actual step lengths) and across trajectories.
pub fn run_closed_loop<T: Scalar>(
    cfg: &FeedbackConfig<T>,
    params: &SmeParams<T>,
    t_final: T,
    n_traj: usize,
) -> Result<ClosedLoopResult<T>> {
    if n_traj < 2 {
        return Err(Error::bad_arg("n_traj", "need at least 2 trajectories"));
    }
    if !(t_final.is_finite() && t_final > params.dt * T::real(8.0)) {
        return Err(Error::bad_arg("t_final", "must cover at least a few steps"));
    }
    let burn_in = t_final * T::real(BURN_IN_FRACTION);

    struct TrajOutcome<T> {
        mean_p: T,
        corrections: u64,
        clamps: u64,
    }

    let outcomes: Result<Vec<TrajOutcome<T>>> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let rho = DensityMatrix::<T>::pure_basis_state(2, 0)?;
            let mut state = TrajectoryState::new(rho, params.seed, i as u64, 1024);
            let mut commuting;
            let mut unbiased;
            let mut acc_p = T::zero();
            let mut acc_t = T::zero();
            let mut corrections = 0u64;
            match cfg.mode {
                PolicyMode::Commuting => {
                    commuting = Some(CommutingController::new(*cfg)?);
                    unbiased = None;
                }
                PolicyMode::Unbiased => {
                    commuting = None;
                    unbiased = Some(UnbiasedController::new(*cfg)?);
                }
            }
            let half = params.dt * T::real(0.5);
            while state.t < t_final - half {
                let t_prev = state.t;
                state = match (&mut commuting, &mut unbiased) {
                    (Some(c), None) => {
                        let (_, s) = c.step(state, params)?;
                        corrections = c.triggers;
                        s
                    }
                    (None, Some(u)) => {
                        let (_, s) = u.step(state, params)?;
                        corrections = u.corrections;
                        s
                    }
                    _ => unreachable!("exactly one controller is configured"),
                };
                if state.t > burn_in {
                    let weight = state.t - t_prev.max(burn_in);
                    acc_p += state.rho.basis_population(0) * weight;
                    acc_t += weight;
                }
            }
            Ok(TrajOutcome {
                mean_p: acc_p / acc_t,
                corrections,
                clamps: state.audit.positivity_clamps,
            })
        })
        .collect();
    let outcomes = outcomes?;

    let per_traj: Vec<T> = outcomes.iter().map(|o| o.mean_p).collect();
    let n = T::real(n_traj as f64);
    let mean_p: T = per_traj.iter().copied().sum::<T>() / n;
    let var: T = per_traj
        .iter()
        .map(|&p| (p - mean_p) * (p - mean_p))
        .sum::<T>()
        / (n - T::one());
    let stderr = (var / n).sqrt();

    Ok(ClosedLoopResult {
        mean_p,
        stderr,
        diagnostics: ClosedLoopDiagnostics {
            n_traj,
            burn_in,
            per_traj,
            total_corrections: outcomes.iter().map(|o| o.corrections).sum(),
            positivity_clamps: outcomes.iter().map(|o| o.clamps).sum(),
        },
    })
}
