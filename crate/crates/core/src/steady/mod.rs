//! Closed-form steady-state analysis of the measured qubit.
//!
//! The Bloch coordinate of a qubit measured along `sigma_z` at strength
//! `k` under isotropic dephasing `beta` obeys
//!
//! `dz = -4 beta z dt + sqrt(8k) (1 - z^2) dW`.
//!
//! Without feedback the stationary density is
//!
//! `p(z) ~ exp(beta / (2k (z^2 - 1))) / (z^2 - 1)^2` on `(-1, 1)`,
//!
//! even in `z`, so the steady success probability `P = (1 + <z>)/2` is
//! stuck at `1/2`. The threshold flip policy (reflect `z -> -z` the
//! moment `z` reaches `-eps`) produces the piecewise stationary density
//!
//! `p(z) ~ (1 + W(z)/W(eps)) g(z)` on `[-eps, eps]`, `2 g(z)` on
//! `(eps, 1]`, zero below `-eps`, with `W(z)` the odd antiderivative of
//! `exp(beta / (2k (1 - z^2)))`. This module tabulates both densities,
//! integrates their success probabilities, scans the threshold, checks
//! tabulated densities against the stationary Fokker-Planck operator,
//! and evaluates the large-ratio performance rule. Quadrature
//! tolerances are tuned for `f64`.

mod quad;

pub use quad::{integrate, QuadResult};

use crate::error::{Error, Result};
use crate::qlin::matrix::check_dim;
use crate::scalar::Scalar;

/// Largest allowed `beta / (2k)`. Beyond this the normalization
/// integral underflows and the density degenerates toward a point mass.
const MAX_HALF_RATIO: f64 = 350.0;

/// Log-density below this is flushed to zero (f64 underflow headroom).
const UNDERFLOW_LOG: f64 = -690.0;

/// `c cosh^2(u)` beyond this kills the substituted integrand.
const TAIL_EXPONENT: f64 = 745.0;

/// Relative accuracy requested from every quadrature.
const QUAD_REL_TOL: f64 = 1e-12;

/// Relative error bound a quadrature must actually achieve.
const QUAD_REL_BUDGET: f64 = 1e-8;

fn validate_rates<T: Scalar>(k: T, beta: T) -> Result<T> {
    if !(k.is_finite() && k > T::zero()) {
        return Err(Error::bad_arg("k", "must be finite and > 0"));
    }
    if !(beta.is_finite() && beta > T::zero()) {
        return Err(Error::bad_arg(
            "beta",
            "must be finite and > 0 (no stationary density otherwise)",
        ));
    }
    let c = beta / (T::real(2.0) * k);
    if c > T::real(MAX_HALF_RATIO) {
        return Err(Error::bad_arg(
            "k",
            format!(
                "beta/(2k) = {:.3e} too large; density is numerically degenerate",
                c.to_f64().unwrap_or(f64::NAN)
            ),
        ));
    }
    Ok(c)
}

/// `ln g` for the unnormalized no-feedback density
/// `g = exp(-c/(1-z^2)) / (1-z^2)^2`, `c = beta/(2k)`.
fn log_g<T: Scalar>(z: T, c: T) -> T {
    let s = T::one() - z * z;
    -c / s - T::real(2.0) * s.ln()
}

fn g_unnorm<T: Scalar>(z: T, c: T) -> T {
    if z.abs() >= T::one() {
        return T::zero();
    }
    let lg = log_g(z, c);
    if lg < T::real(UNDERFLOW_LOG) {
        T::zero()
    } else {
        lg.exp()
    }
}

/// Two-pass adaptive quadrature: a coarse pass sets the scale, the fine
/// pass targets `QUAD_REL_TOL` relative to it and must come back with an
/// error bound inside `QUAD_REL_BUDGET`.
fn integrate_scaled<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let coarse = quad::integrate(|x| f(x), a, b, T::one())?;
    let floor = T::real(1e-30);
    let tol = (coarse.value.abs() + floor) * T::real(QUAD_REL_TOL);
    let fine = quad::integrate(|x| f(x), a, b, tol)?;
    let budget = (fine.value.abs() + floor) * T::real(QUAD_REL_BUDGET);
    if fine.error > budget {
        return Err(Error::QuadratureAccuracy {
            error: fine.error.to_f64().unwrap_or(f64::NAN),
            budget: budget.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(fine.value)
}

/// `int_z0^1 g dz` (or the first moment `int z g dz` when `moment`),
/// via `z = tanh u`, which flattens the boundary decay:
/// `g dz = exp(-c cosh^2 u) cosh^2 u du`.
fn tail_integral<T: Scalar>(c: T, z0: T, moment: bool) -> Result<T> {
    let u0 = z0.atanh();
    let ratio = T::real(TAIL_EXPONENT) / c;
    let u_max = ratio.sqrt().acosh();
    if !(u_max > u0) {
        return Ok(T::zero());
    }
    integrate_scaled(
        |u| {
            let ch = u.cosh();
            let ch2 = ch * ch;
            let ex = -c * ch2;
            if ex < T::real(UNDERFLOW_LOG) {
                T::zero()
            } else {
                let base = ex.exp() * ch2;
                if moment {
                    base * u.tanh()
                } else {
                    base
                }
            }
        },
        u0,
        u_max,
    )
}

/// Deterministic evaluator for `W(z) = int_0^z exp(c/(1-x^2)) dx`,
/// `z >= 0` (the full `W` is odd).
///
/// Uses a composite 15-point Kronrod rule whose panel count is fixed at
/// construction by doubling until `W(eps)` converges. A fixed rule makes
/// `W` a smooth, reproducible function of `z`. A nested adaptive
/// quadrature here would leave tolerance-level jitter on `W`, and outer
/// adaptive integrals over `W`-bearing integrands then chase noise they
/// can never integrate below, blowing up the panel count.
#[derive(Clone, Copy, Debug)]
struct WEvaluator<T> {
    c: T,
    panels: usize,
}

impl<T: Scalar> WEvaluator<T> {
    /// Fixes the panel count on `[0, eps]` (`eps > 0`).
    fn build(c: T, eps: T) -> Result<Self> {
        let mut panels = 2usize;
        let mut prev = Self { c, panels }.eval(eps)?;
        loop {
            panels *= 2;
            let next = Self { c, panels }.eval(eps)?;
            if (next - prev).abs() <= next.abs() * T::real(5e-14) {
                return Ok(WEvaluator { c, panels });
            }
            if panels >= 1 << 14 {
                return Err(Error::QuadratureAccuracy {
                    error: (next - prev).abs().to_f64().unwrap_or(f64::NAN),
                    budget: (next.abs().to_f64().unwrap_or(f64::NAN)) * 5e-14,
                });
            }
            prev = next;
        }
    }

    fn eval(&self, z: T) -> Result<T> {
        if z <= T::zero() {
            return Ok(T::zero());
        }
        let f = |x: T| (self.c / (T::one() - x * x)).exp();
        let width = z / T::real(self.panels as f64);
        let mut total = T::zero();
        for j in 0..self.panels {
            let a = width * T::real(j as f64);
            let b = if j + 1 == self.panels {
                z
            } else {
                width * T::real((j + 1) as f64)
            };
            total += quad::gk15(&f, a, b)?.0;
        }
        Ok(total)
    }
}

/// The four quadratures the feedback density is assembled from, reduced
/// by parity: only the even part of the density survives plain moments
/// over the symmetric deadband, and only the odd `W` term survives the
/// weighted one.
struct FbPieces<T> {
    /// `int_0^eps g`.
    a: T,
    /// `int_eps^1 g`.
    b: T,
    /// `int_eps^1 z g`.
    c_mom: T,
    /// `int_0^eps z W(z) g(z) dz`.
    d: T,
    /// `W(eps)`.
    weps: T,
    /// Normalization `int p_unnorm = 2a + 2b`.
    norm: T,
    /// Evaluator behind `weps`/`d`; absent when `eps == 0`.
    weval: Option<WEvaluator<T>>,
}

fn fb_pieces<T: Scalar>(c: T, eps: T) -> Result<FbPieces<T>> {
    if !(eps >= T::zero() && eps < T::one()) {
        return Err(Error::bad_arg("eps", "threshold must lie in [0, 1)"));
    }
    if c / (T::one() - eps * eps) > T::real(700.0) {
        return Err(Error::bad_arg(
            "eps",
            "W(eps) overflows at this beta/k; shrink eps or raise k",
        ));
    }
    let a = if eps > T::zero() {
        integrate_scaled(|x| g_unnorm(x, c), T::zero(), eps)?
    } else {
        T::zero()
    };
    let b = tail_integral(c, eps, false)?;
    let c_mom = tail_integral(c, eps, true)?;
    let (weps, d, weval) = if eps > T::zero() {
        let weval = WEvaluator::build(c, eps)?;
        let weps = weval.eval(eps)?;
        let d = integrate_scaled(
            |x| {
                let w = weval.eval(x).unwrap_or_else(|_| T::nan());
                x * w * g_unnorm(x, c)
            },
            T::zero(),
            eps,
        )?;
        (weps, d, Some(weval))
    } else {
        (T::zero(), T::zero(), None)
    };
    let norm = T::real(2.0) * (a + b);
    if !(norm.is_finite() && norm > T::zero()) {
        return Err(Error::bad_arg(
            "k",
            "density normalization underflowed; beta/k too extreme",
        ));
    }
    Ok(FbPieces {
        a,
        b,
        c_mom,
        d,
        weps,
        norm,
        weval,
    })
}

/// Which closed form (if any) a [`SteadyDensity`] tabulates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensityForm<T> {
    /// Measurement + dephasing only.
    NoFeedback { k: T, beta: T },
    /// Threshold flip policy at threshold `eps`.
    Feedback { k: T, beta: T, eps: T },
    /// Tabulated or histogrammed data with no attached closed form.
    Empirical,
}

/// A stationary density of the Bloch coordinate, tabulated on a grid
/// and (for the analytic forms) exactly evaluable anywhere.
#[derive(Clone, Debug)]
pub struct SteadyDensity<T> {
    form: DensityForm<T>,
    grid: Vec<T>,
    values: Vec<T>,
    support: (T, T),
    norm: T,
    weps: T,
    weval: Option<WEvaluator<T>>,
    norm_residual: T,
}

fn linspace<T: Scalar>(a: T, b: T, n: usize) -> Vec<T> {
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| a + (b - a) * T::real(i as f64 / last))
        .collect()
}

fn check_points(points: usize) -> Result<()> {
    if !(9..=1 << 22).contains(&points) {
        return Err(Error::bad_arg("points", "need between 9 and 2^22 grid nodes"));
    }
    Ok(())
}

impl<T: Scalar> SteadyDensity<T> {
    /// Stationary density of the measured qubit without feedback,
    /// tabulated on `points` uniform nodes spanning `[-1, 1]`.
    pub fn no_feedback(k: T, beta: T, points: usize) -> Result<Self> {
        let c = validate_rates(k, beta)?;
        check_points(points)?;
        let norm = T::real(2.0) * tail_integral(c, T::zero(), false)?;
        if !(norm.is_finite() && norm > T::zero()) {
            return Err(Error::bad_arg(
                "k",
                "density normalization underflowed; beta/k too extreme",
            ));
        }
        let grid = linspace(-T::one(), T::one(), points);
        let values = grid.iter().map(|&z| g_unnorm(z, c) / norm).collect();
        let mut out = SteadyDensity {
            form: DensityForm::NoFeedback { k, beta },
            grid,
            values,
            support: (-T::one(), T::one()),
            norm,
            weps: T::zero(),
            weval: None,
            norm_residual: T::zero(),
        };
        out.norm_residual = out.recheck_norm()?;
        Ok(out)
    }

    /// Stationary density under the threshold flip policy, tabulated on
    /// `points` uniform nodes spanning the support `[-eps, 1]`.
    pub fn feedback(k: T, beta: T, eps: T, points: usize) -> Result<Self> {
        let c = validate_rates(k, beta)?;
        check_points(points)?;
        let pieces = fb_pieces(c, eps)?;
        let grid = linspace(-eps, T::one(), points);
        let values = grid
            .iter()
            .map(|&z| {
                fb_pdf_unnorm(z, c, eps, pieces.weval.as_ref(), pieces.weps)
                    .map(|v| v / pieces.norm)
            })
            .collect::<Result<Vec<T>>>()?;
        let mut out = SteadyDensity {
            form: DensityForm::Feedback { k, beta, eps },
            grid,
            values,
            support: (-eps, T::one()),
            norm: pieces.norm,
            weps: pieces.weps,
            weval: pieces.weval,
            norm_residual: T::zero(),
        };
        out.norm_residual = out.recheck_norm()?;
        Ok(out)
    }

    /// Histogram density from raw Bloch-coordinate samples on `[-1, 1]`.
    pub fn from_samples(samples: &[T], bins: usize) -> Result<Self> {
        if !(4..=1 << 20).contains(&bins) {
            return Err(Error::bad_arg("bins", "need between 4 and 2^20 bins"));
        }
        if samples.len() < bins {
            return Err(Error::bad_arg("samples", "fewer samples than bins"));
        }
        let width = T::real(2.0 / bins as f64);
        let mut counts = vec![0usize; bins];
        for &z in samples {
            if !(z.is_finite() && z.abs() <= T::one()) {
                return Err(Error::bad_arg("samples", "values must lie in [-1, 1]"));
            }
            let idx = ((z + T::one()) / width)
                .to_f64()
                .unwrap_or(0.0)
                .floor() as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        let n = T::real(samples.len() as f64);
        let grid: Vec<T> = (0..bins)
            .map(|i| -T::one() + width * T::real(i as f64 + 0.5))
            .collect();
        let values: Vec<T> = counts
            .iter()
            .map(|&cnt| T::real(cnt as f64) / (n * width))
            .collect();
        let total: T = values.iter().map(|&v| v * width).sum();
        Ok(SteadyDensity {
            form: DensityForm::Empirical,
            grid,
            values,
            support: (-T::one(), T::one()),
            norm: T::one(),
            weps: T::zero(),
            weval: None,
            norm_residual: (total - T::one()).abs(),
        })
    }

    /// Wraps an externally tabulated density (values at strictly
    /// increasing grid nodes); used for diagnostics such as
    /// [`fp_residual`] on candidate densities.
    pub fn from_table(grid: Vec<T>, values: Vec<T>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 5 {
            return Err(Error::bad_arg("grid", "need >= 5 matching nodes/values"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::bad_arg("grid", "nodes must increase strictly"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::bad_arg("values", "must be finite and >= 0"));
        }
        let mut trapz = T::zero();
        for i in 0..grid.len() - 1 {
            trapz += (values[i] + values[i + 1]) * (grid[i + 1] - grid[i]) * T::real(0.5);
        }
        let support = (grid[0], *grid.last().expect("non-empty"));
        Ok(SteadyDensity {
            form: DensityForm::Empirical,
            grid,
            values,
            support,
            norm: T::one(),
            weps: T::zero(),
            weval: None,
            norm_residual: (trapz - T::one()).abs(),
        })
    }

    pub fn form(&self) -> DensityForm<T> {
        self.form
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Support interval (open at ends where the density vanishes).
    pub fn support(&self) -> (T, T) {
        self.support
    }

    /// How far off 1 an independent re-integration of the density lands.
    pub fn norm_residual(&self) -> T {
        self.norm_residual
    }

    /// Density at `z`; zero outside the support. Analytic forms evaluate
    /// the closed form, empirical ones interpolate linearly.
    pub fn pdf(&self, z: T) -> Result<T> {
        match self.form {
            DensityForm::NoFeedback { k, beta } => {
                let c = beta / (T::real(2.0) * k);
                Ok(g_unnorm(z, c) / self.norm)
            }
            DensityForm::Feedback { k, beta, eps } => {
                let c = beta / (T::real(2.0) * k);
                Ok(fb_pdf_unnorm(z, c, eps, self.weval.as_ref(), self.weps)? / self.norm)
            }
            DensityForm::Empirical => {
                let (lo, hi) = self.support;
                if z < lo || z > hi {
                    return Ok(T::zero());
                }
                let i = self.grid.partition_point(|&g| g <= z);
                if i == 0 {
                    return Ok(self.values[0]);
                }
                if i == self.grid.len() {
                    return Ok(*self.values.last().expect("non-empty"));
                }
                let (z0, z1) = (self.grid[i - 1], self.grid[i]);
                let (v0, v1) = (self.values[i - 1], self.values[i]);
                let w = (z - z0) / (z1 - z0);
                Ok(v0 + (v1 - v0) * w)
            }
        }
    }

    /// Probability mass on `[lo, hi]`.
    pub fn bin_mass(&self, lo: T, hi: T) -> Result<T> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::bad_arg("lo", "need finite lo <= hi"));
        }
        let a = lo.max(self.support.0);
        let b = hi.min(self.support.1);
        if !(b > a) {
            return Ok(T::zero());
        }
        match self.form {
            DensityForm::Empirical => Ok(self.interp_mass(a, b)),
            DensityForm::NoFeedback { .. } => {
                integrate_scaled(|z| self.pdf(z).unwrap_or_else(|_| T::nan()), a, b)
            }
            DensityForm::Feedback { eps, .. } => {
                // Split at the deadband edges so each panel is smooth.
                let mut cuts = vec![a];
                for edge in [-eps, eps] {
                    if edge > a && edge < b {
                        cuts.push(edge);
                    }
                }
                cuts.push(b);
                let mut total = T::zero();
                for pair in cuts.windows(2) {
                    total += integrate_scaled(
                        |z| self.pdf(z).unwrap_or_else(|_| T::nan()),
                        pair[0],
                        pair[1],
                    )?;
                }
                Ok(total)
            }
        }
    }

    /// Exact integral of the piecewise-linear interpolant on `[a, b]`,
    /// including the flat extensions between the grid ends and the
    /// support edges (histogram grids hold bin centers, so each end bin
    /// sticks out half a width past its center).
    fn interp_mass(&self, a: T, b: T) -> T {
        let half = T::real(0.5);
        let mut total = T::zero();
        let g_lo = self.grid[0];
        let g_hi = *self.grid.last().expect("non-empty");
        if a < g_lo {
            total += self.values[0] * (b.min(g_lo) - a);
        }
        if b > g_hi {
            total += *self.values.last().expect("non-empty") * (b - a.max(g_hi));
        }
        for i in 0..self.grid.len() - 1 {
            let (z0, z1) = (self.grid[i], self.grid[i + 1]);
            if z1 <= a || z0 >= b {
                continue;
            }
            let (v0, v1) = (self.values[i], self.values[i + 1]);
            let s = z0.max(a);
            let e = z1.min(b);
            let vs = v0 + (v1 - v0) * (s - z0) / (z1 - z0);
            let ve = v0 + (v1 - v0) * (e - z0) / (z1 - z0);
            total += (vs + ve) * (e - s) * half;
        }
        total
    }

    /// Steady success probability `P = int (1+z)/2 p(z) dz`.
    pub fn mean_success(&self) -> Result<T> {
        match self.form {
            // Even density: <z> = 0 exactly.
            DensityForm::NoFeedback { .. } => Ok(T::real(0.5)),
            DensityForm::Feedback { k, beta, eps } => mean_success_feedback(k, beta, eps),
            DensityForm::Empirical => {
                let half = T::real(0.5);
                // Exact segment integral of (1+z)/2 times a constant
                // density, for the flat extensions past the grid ends.
                let flat = |z0: T, z1: T, v: T| {
                    v * half * ((z1 - z0) + (z1 * z1 - z0 * z0) * half)
                };
                let (lo, hi) = self.support;
                let g_lo = self.grid[0];
                let g_hi = *self.grid.last().expect("non-empty");
                let mut total = T::zero();
                if lo < g_lo {
                    total += flat(lo, g_lo, self.values[0]);
                }
                if hi > g_hi {
                    total += flat(g_hi, hi, *self.values.last().expect("non-empty"));
                }
                for i in 0..self.grid.len() - 1 {
                    let f0 = (T::one() + self.grid[i]) * half * self.values[i];
                    let f1 = (T::one() + self.grid[i + 1]) * half * self.values[i + 1];
                    total += (f0 + f1) * (self.grid[i + 1] - self.grid[i]) * half;
                }
                Ok(total)
            }
        }
    }

    /// Re-integrates the normalized density over seven unequal panels
    /// (different splits than the normalization used) and returns
    /// `|mass - 1|`.
    fn recheck_norm(&self) -> Result<T> {
        let (lo, hi) = self.support;
        let span = hi - lo;
        let fractions = [0.0, 0.13, 0.29, 0.5, 0.71, 0.87, 1.0];
        let mut total = T::zero();
        for pair in fractions.windows(2) {
            total += self.bin_mass(lo + span * T::real(pair[0]), lo + span * T::real(pair[1]))?;
        }
        Ok((total - T::one()).abs())
    }
}

/// Unnormalized feedback density at `z` (see module docs); requires the
/// precomputed `W` evaluator and `W(eps)` whenever the deadband is open.
fn fb_pdf_unnorm<T: Scalar>(
    z: T,
    c: T,
    eps: T,
    weval: Option<&WEvaluator<T>>,
    weps: T,
) -> Result<T> {
    if z > T::one() {
        return Ok(T::zero());
    }
    if eps == T::zero() {
        // Deadband collapsed: reflected density on (0, 1]. At the jump
        // itself we report the right limit, matching the tabulation.
        return Ok(if z < T::zero() {
            T::zero()
        } else {
            T::real(2.0) * g_unnorm(z, c)
        });
    }
    if z < -eps {
        Ok(T::zero())
    } else if z > eps {
        Ok(T::real(2.0) * g_unnorm(z, c))
    } else {
        let ev = weval.ok_or_else(|| {
            Error::bad_arg("weval", "deadband evaluation needs the W tables")
        })?;
        let w = ev.eval(z.abs())?;
        let signed = if z < T::zero() { -w } else { w };
        Ok((T::one() + signed / weps) * g_unnorm(z, c))
    }
}

/// Steady success probability of the threshold flip policy, straight
/// from quadratures of the closed-form density (no tabulation).
pub fn mean_success_feedback<T: Scalar>(k: T, beta: T, eps: T) -> Result<T> {
    let c = validate_rates(k, beta)?;
    let p = fb_pieces(c, eps)?;
    let deadband_odd = if eps > T::zero() {
        p.d / p.weps
    } else {
        T::zero()
    };
    Ok((p.a + deadband_odd + p.b + p.c_mom) / p.norm)
}

/// Result of scanning the flip threshold.
#[derive(Clone, Debug)]
pub struct EpsilonScan<T> {
    /// Threshold with the largest steady success (first grid point on
    /// ties).
    pub eps_star: T,
    /// `(eps, mean_success)` along the scanned grid.
    pub curve: Vec<(T, T)>,
}

/// Evaluates the steady success of the flip policy over a threshold
/// grid and picks the best. The grid must be strictly increasing inside
/// `[0, 1)` and start at 0 so the no-deadband policy is always in the
/// comparison.
pub fn optimize_epsilon<T: Scalar>(k: T, beta: T, eps_grid: &[T]) -> Result<EpsilonScan<T>> {
    if eps_grid.is_empty() {
        return Err(Error::bad_arg("eps_grid", "must not be empty"));
    }
    if eps_grid[0] != T::zero() {
        return Err(Error::bad_arg("eps_grid", "must start at 0"));
    }
    if eps_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::bad_arg("eps_grid", "must increase strictly"));
    }
    if *eps_grid.last().expect("non-empty") >= T::one() {
        return Err(Error::bad_arg("eps_grid", "thresholds must stay below 1"));
    }
    let mut curve = Vec::with_capacity(eps_grid.len());
    let mut best = 0usize;
    for (i, &eps) in eps_grid.iter().enumerate() {
        let p = mean_success_feedback(k, beta, eps)?;
        if p > curve.get(best).map_or(-T::one(), |&(_, v): &(T, T)| v) {
            best = i;
        }
        curve.push((eps, p));
    }
    Ok(EpsilonScan {
        eps_star: curve[best].0,
        curve,
    })
}

/// Large-ratio performance estimates for the eigenvector-tracking
/// policy at measurement strength `k`, noise `beta`, and observable
/// strength factor `j` (see `Observable::strength_factor`).
#[derive(Clone, Copy, Debug)]
pub struct AnalyticPerformance<T> {
    /// First-order estimate `P ~ 1 - beta / (4 k j)`.
    pub rule_of_thumb: T,
    /// Whether the estimate lands in `(0, 1]` (it degrades into
    /// nonsense once `beta/(4kj)` is not small).
    pub rule_valid: bool,
    /// Exact qubit value `P = (1 + sqrt(kj / (kj + beta))) / 2`,
    /// available at `dim == 2` only.
    pub qubit_closed_form: Option<T>,
}

/// Evaluates the performance rule and, for qubits, the exact closed
/// form it approximates.
pub fn analytic_performance<T: Scalar>(
    k: T,
    beta: T,
    j: T,
    dim: usize,
) -> Result<AnalyticPerformance<T>> {
    check_dim(dim)?;
    if !(k.is_finite() && k > T::zero()) {
        return Err(Error::bad_arg("k", "must be finite and > 0"));
    }
    if !(beta.is_finite() && beta >= T::zero()) {
        return Err(Error::bad_arg("beta", "must be finite and >= 0"));
    }
    if !(j.is_finite() && j > T::zero()) {
        return Err(Error::bad_arg("j", "strength factor must be > 0"));
    }
    let kj = k * j;
    let rule = T::one() - beta / (T::real(4.0) * kj);
    let closed = (dim == 2).then(|| {
        T::real(0.5) * (T::one() + (kj / (kj + beta)).sqrt())
    });
    Ok(AnalyticPerformance {
        rule_of_thumb: rule,
        rule_valid: rule > T::zero(),
        qubit_closed_form: closed,
    })
}

/// Residual of the stationary Fokker-Planck operator
/// `4 beta d/dz (z p) + 4k d^2/dz^2 ((1-z^2)^2 p)` applied to a
/// tabulated density with central differences: the max over interior
/// nodes, skipping two nodes at each edge and a `2.5h` window around
/// the deadband kinks of feedback densities. A genuine stationary
/// density drives this to zero as `O(h^2)`.
pub fn fp_residual<T: Scalar>(density: &SteadyDensity<T>, k: T, beta: T) -> Result<T> {
    if !(k.is_finite() && k > T::zero() && beta.is_finite() && beta >= T::zero()) {
        return Err(Error::bad_arg("k", "need finite k > 0 and beta >= 0"));
    }
    let grid = &density.grid;
    let vals = &density.values;
    let n = grid.len();
    if n < 69 {
        return Err(Error::bad_arg("density", "need at least 69 grid nodes"));
    }
    let h = (grid[n - 1] - grid[0]) / T::real((n - 1) as f64);
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > h * T::real(1e-6) {
            return Err(Error::bad_arg("density", "grid must be uniform"));
        }
    }
    let kinks: Vec<T> = match density.form {
        DensityForm::Feedback { eps, .. } => vec![-eps, eps],
        _ => Vec::new(),
    };
    let f1: Vec<T> = grid.iter().zip(vals).map(|(&z, &p)| z * p).collect();
    let f2: Vec<T> = grid
        .iter()
        .zip(vals)
        .map(|(&z, &p)| {
            let s = T::one() - z * z;
            s * s * p
        })
        .collect();
    let guard = h * T::real(2.5);
    let mut worst = T::zero();
    let mut used = 0usize;
    for i in 2..n - 2 {
        let z = grid[i];
        if kinks.iter().any(|&kz| (z - kz).abs() <= guard) {
            continue;
        }
        let drift = (f1[i + 1] - f1[i - 1]) / (T::real(2.0) * h);
        let diff = (f2[i + 1] - T::real(2.0) * f2[i] + f2[i - 1]) / (h * h);
        let r = T::real(4.0) * beta * drift + T::real(4.0) * k * diff;
        worst = worst.max(r.abs());
        used += 1;
    }
    if used < 64 {
        return Err(Error::bad_arg(
            "density",
            "fewer than 64 usable interior nodes after exclusions",
        ));
    }
    Ok(worst)
}
