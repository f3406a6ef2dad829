//! Integral-equation defects and the contraction estimate that pins two
//! solutions with the same initial data together.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::factorial_sum;
use crate::error::{Error, Result};
use crate::exp_poly::{ExpPoly, ExpPolyOptions, Term};
use crate::lattice::{box_indices, check_dim, CoeffField, FrequencyVector, LatticeIndex};
use crate::picard::{Modes, SolutionTrajectory};
use crate::rk4::rk4_snapshots;

const MODULE: &str = "uniqueness";

/// Largest `k` tried when minimizing the contraction bound.
pub const MAX_K: u32 = 12;

/// Tolerance on `|h(0,n) - c(0,n)|`.
pub const INITIAL_TOL: f64 = 1e-12;

/// Polynomial degree and sample count for [`rk4_trajectory`]. Higher degrees
/// fit noise, and the large coefficients that result poison the closed-form
/// integrals.
pub const FIT_DEGREE: usize = 6;
pub const FIT_SAMPLES: usize = 41;

/// Coefficient trajectory `t ↦ c(t, n)` given by exponential polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTrajectory {
    pub omega: FrequencyVector,
    pub radius: u32,
    pub modes: Modes,
    pub t_max: f64,
}

impl From<&SolutionTrajectory> for ModeTrajectory {
    fn from(traj: &SolutionTrajectory) -> Self {
        ModeTrajectory {
            omega: traj.omega.clone(),
            radius: traj.radius,
            modes: traj.coeffs.clone(),
            t_max: traj.t_max,
        }
    }
}

impl ModeTrajectory {
    pub fn value(&self, n: &LatticeIndex, t: f64) -> Complex64 {
        self.modes.get(n).map(|p| p.eval(t)).unwrap_or_default()
    }

    /// `max_n |c(t,n)| e^{ρ|n|}` over the sample times.
    pub fn weighted_bound(&self, rho: f64, ts: &[f64]) -> f64 {
        let mut b: f64 = 0.0;
        for (n, p) in &self.modes {
            let w = (rho * n.l1() as f64).exp();
            for &t in ts {
                b = b.max(p.eval(t).norm() * w);
            }
        }
        b
    }

    /// `max_t Σ_n |c(t,n)|` over the sample times.
    pub fn box_mass(&self, ts: &[f64]) -> f64 {
        ts.iter()
            .map(|&t| self.modes.values().map(|p| p.eval(t).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn options(&self) -> ExpPolyOptions {
        ExpPolyOptions {
            horizon: self.t_max.max(1e-12),
            max_terms: usize::MAX,
            ..ExpPolyOptions::default()
        }
    }
}

fn check_samples(ts: &[f64], t_max: f64) -> Result<()> {
    if let Some(&t) = ts.iter().find(|&&t| !(t >= 0.0 && t <= t_max)) {
        return Err(Error::TimeOutOfRange { module: MODULE, t, t_max });
    }
    Ok(())
}

/// `max |h(t,n) - h(0,n)e^{it(nω)^3} + Σ_m ∫_0^t h(τ,n-m)h(τ,m)(imω)e^{i(t-τ)(nω)^3}dτ|`
/// over the samples and `|n| <= radius`, with the sum over `m` restricted to
/// `|m|, |n-m| <= radius` and modes outside the trajectory's own box read as zero.
pub fn integral_equation_defect(traj: &ModeTrajectory, radius: u32, ts: &[f64]) -> Result<f64> {
    check_samples(ts, traj.t_max)?;
    let omega = &traj.omega;
    let opts = traj.options();
    let indices = box_indices(omega.nu(), radius);
    let defects: Vec<f64> = indices
        .par_iter()
        .map(|n| {
            let mut raw: Vec<Term> = Vec::new();
            for (m, pm) in traj.modes.iter() {
                if m.l1() > radius as u64 {
                    continue;
                }
                let rest = n - m;
                if rest.l1() > radius as u64 {
                    continue;
                }
                let Some(pr) = traj.modes.get(&rest) else {
                    continue;
                };
                let factor = Complex64::new(0.0, omega.phase_unchecked(m));
                if factor.im == 0.0 {
                    continue;
                }
                let start = raw.len();
                pm.push_product_terms(pr, &mut raw);
                for term in &mut raw[start..] {
                    let c = term.coeff() * factor;
                    term.re = c.re;
                    term.im = c.im;
                }
            }
            let theta = omega.phase_unchecked(n).powi(3);
            let integral = ExpPoly::from_terms(raw, opts.merge_tol).outer_integral(theta, &opts)?;
            let c0 = traj.value(n, 0.0);
            let mut worst: f64 = 0.0;
            for &t in ts {
                let rhs = c0 * Complex64::cis(theta * t) - integral.eval(t);
                worst = worst.max((traj.value(n, t) - rhs).norm());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// Defect on the trajectory's own box.
pub fn verify_integral_equations(traj: &ModeTrajectory, ts: &[f64]) -> Result<f64> {
    integral_equation_defect(traj, traj.radius, ts)
}

/// Two trajectories with a common bound `|c|, |h| <= B e^{-ρ|n|}`.
#[derive(Clone, Debug)]
pub struct TrajectoryPair {
    pub c: ModeTrajectory,
    pub h: ModeTrajectory,
    pub b: f64,
    pub rho: f64,
}

impl TrajectoryPair {
    /// Measures `B` on `ts` for the given `ρ`.
    pub fn new(c: ModeTrajectory, h: ModeTrajectory, rho: f64, ts: &[f64]) -> Result<Self> {
        check_dim(c.omega.nu(), h.omega.nu())?;
        if c.omega != h.omega {
            return Err(Error::invalid(MODULE, "trajectories use different frequency vectors"));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid(MODULE, "ρ must be positive"));
        }
        let t_max = c.t_max.min(h.t_max);
        check_samples(ts, t_max)?;
        let b = c.weighted_bound(rho, ts).max(h.weighted_bound(rho, ts));
        Ok(TrajectoryPair { c, h, b, rho })
    }

    pub fn radius(&self) -> u32 {
        self.c.radius.max(self.h.radius)
    }

    pub fn t_max(&self) -> f64 {
        self.c.t_max.min(self.h.t_max)
    }

    pub fn contraction_bound(&self, k: u32, t: f64, c0: f64) -> Result<f64> {
        contraction_bound(self.b, self.rho, self.c.omega.nu(), self.c.omega.norm(), k, t, c0)
    }
}

/// `B^{k+1}(2^{ν+1} C0 ρ^{-ν} |ω| t)^k / k! · Σ_{|α|=k, α∈Z_+^{k+1}} Π α_j!`,
/// the ceiling on `|h(t,n) - c(t,n)| e^{ρ|n|/2}`. The sum dominates the one
/// over `𝔹^(k)`.
pub fn contraction_bound(b: f64, rho: f64, nu: usize, omega_norm: f64, k: u32, t: f64, c0: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid(MODULE, "k must be >= 1"));
    }
    if b < 0.0 || !(rho > 0.0) || t < 0.0 || !(c0 > 0.0) || omega_norm < 0.0 {
        return Err(Error::invalid(MODULE, "contraction bound needs B, t, |ω| >= 0 and ρ, C0 > 0"));
    }
    let sum = factorial_sum(k as usize + 1, k)?;
    let fact = crate::combinatorics::factorial(k);
    // Σ Π α! / k! as f64 without overflowing either factor.
    let ratio = sum.to_f64().unwrap_or(f64::INFINITY) / fact.to_f64().unwrap_or(f64::INFINITY);
    let base = 2f64.powi(nu as i32 + 1) * c0 * rho.powi(-(nu as i32)) * omega_norm * t;
    Ok(b.powi(k as i32 + 1) * base.powi(k as i32) * ratio)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub max_diff: f64,
    pub best_k: u32,
    pub bound_at_best_k: f64,
    pub defects: [f64; 2],
    pub allowance: f64,
    pub b: f64,
    pub rho: f64,
    pub c0: f64,
    pub pass: bool,
}

/// Checks `|h - c|(t,n) <= bound_k(t) e^{-ρ|n|/2} + allowance` at every sample,
/// where `bound_k` is the contraction bound at the best `k <= 12` and the
/// allowance is `(δ_c + δ_h) e^{L t_max}` with `δ` the integral-equation
/// defects on the common box and `L = R |ω| (M_c + M_h) / 2` from the box masses.
pub fn assert_unique(pair: &TrajectoryPair, ts: &[f64], c0: f64) -> Result<UniquenessReport> {
    let radius = pair.radius();
    let t_max = pair.t_max();
    check_samples(ts, t_max)?;
    let indices = box_indices(pair.c.omega.nu(), radius);

    let initial = indices
        .iter()
        .map(|n| (pair.c.value(n, 0.0) - pair.h.value(n, 0.0)).norm())
        .fold(0.0, f64::max);
    if initial > INITIAL_TOL {
        return Err(Error::InconsistentInitialData { max_diff: initial });
    }

    let mut grid: Vec<f64> = ts.to_vec();
    grid.extend((0..=16).map(|j| t_max * j as f64 / 16.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let dc = integral_equation_defect(&pair.c, radius, &grid)?;
    let dh = integral_equation_defect(&pair.h, radius, &grid)?;
    let mass = pair.c.box_mass(&grid) + pair.h.box_mass(&grid);
    let lipschitz = radius as f64 * pair.c.omega.norm() * mass / 2.0;
    let allowance = (dc + dh) * (lipschitz * t_max).exp();

    let t_top = ts.iter().copied().fold(0.0, f64::max);
    let mut best_k = 1;
    let mut best = f64::INFINITY;
    for k in 1..=MAX_K {
        let v = pair.contraction_bound(k, t_top, c0)?;
        if v < best {
            best = v;
            best_k = k;
        }
    }

    let mut max_diff: f64 = 0.0;
    let mut pass = true;
    for &t in ts {
        let bound_t = pair.contraction_bound(best_k, t, c0)?;
        for n in &indices {
            let d = (pair.c.value(n, t) - pair.h.value(n, t)).norm();
            max_diff = max_diff.max(d);
            let ceiling = bound_t * (-pair.rho * n.l1() as f64 / 2.0).exp() + allowance;
            if !(d <= ceiling) {
                pass = false;
            }
        }
    }
    Ok(UniquenessReport {
        max_diff,
        best_k,
        bound_at_best_k: best,
        defects: [dc, dh],
        allowance,
        b: pair.b,
        rho: pair.rho,
        c0,
        pass,
    })
}

/// Runs RK4 and fits each mode as `e^{i(nω)^3 t} · (c(0,n) + Σ_{j=1}^{degree} a_j t^j)`
/// by least squares on `samples` Chebyshev times in `[0, t_max]`.
pub fn rk4_trajectory(
    c_init: &CoeffField,
    omega: &FrequencyVector,
    t_max: f64,
    dt: f64,
    degree: usize,
    samples: usize,
) -> Result<ModeTrajectory> {
    if degree == 0 || samples <= degree {
        return Err(Error::invalid(MODULE, "need 1 <= degree < samples"));
    }
    if !(t_max > 0.0) {
        return Err(Error::invalid(MODULE, "t_max must be positive"));
    }
    let ts = crate::picard::chebyshev_times(t_max, samples);
    let mut sorted = ts.clone();
    sorted.sort_by(f64::total_cmp);
    let states = rk4_snapshots(c_init, omega, &sorted, dt, true)?;

    let s: Vec<f64> = sorted.iter().map(|t| t / t_max).collect();
    let design = DMatrix::from_fn(s.len(), degree, |i, j| s[i].powi(j as i32 + 1));
    let svd = design.svd(true, true);

    let mut modes = Modes::new();
    for n in box_indices(omega.nu(), c_init.radius()) {
        let theta = omega.phase_unchecked(&n).powi(3);
        let c0 = c_init.get(&n);
        let g: Vec<Complex64> = states
            .iter()
            .zip(&sorted)
            .map(|(st, &t)| st.c.get(&n) * Complex64::cis(-theta * t) - c0)
            .collect();
        if c0 == Complex64::new(0.0, 0.0) && g.iter().all(|v| v.norm() == 0.0) {
            continue;
        }
        let mut terms = vec![Term::new(c0, 0, theta)];
        let re = svd
            .solve(&DVector::from_iterator(g.len(), g.iter().map(|v| v.re)), 1e-14)
            .map_err(|e| Error::invalid(MODULE, e.to_string()))?;
        let im = svd
            .solve(&DVector::from_iterator(g.len(), g.iter().map(|v| v.im)), 1e-14)
            .map_err(|e| Error::invalid(MODULE, e.to_string()))?;
        for j in 0..degree {
            let scale = t_max.powi(-(j as i32 + 1));
            terms.push(Term::new(Complex64::new(re[j], im[j]) * scale, j as u32 + 1, theta));
        }
        modes.insert(n, ExpPoly::from_terms(terms, ExpPolyOptions::default().merge_tol));
    }
    Ok(ModeTrajectory {
        omega: omega.clone(),
        radius: c_init.radius(),
        modes,
        t_max,
    })
}
