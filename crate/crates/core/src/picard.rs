//! Picard iteration for the Fourier coefficients of KdV:
//!
//! `c_k(t,n) = c(n) e^{it(nω)^3} - (i nω/2) ∫_0^t e^{i(t-τ)(nω)^3} Σ_{m1+m2=n} c_{k-1}(τ,m1) c_{k-1}(τ,m2) dτ`
//!
//! with every iterate held exactly as an [`ExpPoly`] per mode on the box `|n| <= R`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{certified_c0, estimate_c1, CauchySample};
use crate::error::{Error, Result};
use crate::exp_poly::{ExpPoly, ExpPolyOptions, Term};
use crate::lattice::{
    box_indices, convolve_with_floor, hermitian_symmetrize, CoeffField, Envelope, FrequencyVector,
    LatticeIndex,
};

const MODULE: &str = "picard";

/// One Picard iterate: an exponential polynomial per lattice index.
pub type Modes = BTreeMap<LatticeIndex, ExpPoly>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub box_radius: u32,
    pub max_iterations: u32,
    pub target_tol: f64,
    pub t_request: f64,
    pub prune_floor: f64,
    pub merge_tol: f64,
    pub resonance_tol: f64,
    pub taylor_threshold: f64,
    pub max_terms: usize,
    /// `C0` for the horizon; the certified value for `ν` when absent.
    pub c0: Option<f64>,
    /// Number of equispaced times on `[0, t_request]` used for sup norms.
    pub sup_samples: usize,
}

impl SolverConfig {
    pub fn new(box_radius: u32, t_request: f64) -> Self {
        let e = ExpPolyOptions::default();
        SolverConfig {
            box_radius,
            max_iterations: 12,
            target_tol: 1e-10,
            t_request,
            prune_floor: 1e-30,
            merge_tol: e.merge_tol,
            resonance_tol: e.resonance_tol,
            taylor_threshold: e.taylor_threshold,
            max_terms: e.max_terms,
            c0: None,
            sup_samples: 33,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::invalid(MODULE, "max_iterations must be >= 1"));
        }
        if !(self.t_request.is_finite() && self.t_request >= 0.0) {
            return Err(Error::invalid(MODULE, "t_request must be finite and >= 0"));
        }
        if !(self.target_tol > 0.0 && self.prune_floor >= 0.0) {
            return Err(Error::invalid(MODULE, "target_tol must be > 0 and prune_floor >= 0"));
        }
        if self.sup_samples < 2 {
            return Err(Error::invalid(MODULE, "sup_samples must be >= 2"));
        }
        if let Some(c0) = self.c0 {
            if !(c0.is_finite() && c0 > 0.0) {
                return Err(Error::invalid(MODULE, "c0 must be positive"));
            }
        }
        self.exp_options().validate()
    }

    pub fn exp_options(&self) -> ExpPolyOptions {
        ExpPolyOptions {
            merge_tol: self.merge_tol,
            resonance_tol: self.resonance_tol,
            horizon: self.t_request.max(1e-12),
            taylor_threshold: self.taylor_threshold,
            max_terms: self.max_terms,
        }
    }

    fn sample_times(&self) -> Vec<f64> {
        let n = self.sup_samples;
        (0..n).map(|j| self.t_request * j as f64 / (n - 1) as f64).collect()
    }
}

/// `t0 = κ^ν / (8 B0 2^ν C0^ν |ω|)`.
pub fn horizon(b0: f64, kappa: f64, omega: &FrequencyVector, c0: f64) -> Result<f64> {
    if !(b0 > 0.0 && kappa > 0.0 && c0 > 0.0) || !(b0.is_finite() && kappa.is_finite() && c0.is_finite()) {
        return Err(Error::invalid(MODULE, "horizon needs B0, κ, C0 > 0"));
    }
    let nu = omega.nu() as i32;
    Ok(kappa.powi(nu) / (8.0 * b0 * 2f64.powi(nu) * c0.powi(nu) * omega.norm()))
}

/// `c_0(t,n) = c(n) e^{it(nω)^3}`.
pub fn linear_iterate(c_init: &CoeffField, omega: &FrequencyVector) -> Modes {
    c_init
        .iter()
        .map(|(n, c)| {
            let theta = omega.phase_unchecked(n).powi(3);
            (n.clone(), ExpPoly::monomial(*c, 0, theta))
        })
        .collect()
}

/// One application of the recursion on the box `|n| <= radius`. Modes are
/// processed in parallel; each mode's convolution runs in lexicographic
/// order of `m1`, so the result does not depend on the thread count.
pub fn picard_step(
    prev: &Modes,
    c_init: &CoeffField,
    omega: &FrequencyVector,
    radius: u32,
    opts: &ExpPolyOptions,
    prune_floor: f64,
) -> Result<Modes> {
    crate::lattice::check_dim(omega.nu(), c_init.nu())?;
    let indices = box_indices(omega.nu(), radius);
    let results: Vec<Result<Option<(LatticeIndex, ExpPoly)>>> = indices
        .par_iter()
        .map(|n| {
            let p = step_mode(n, prev, c_init, omega, opts)?.pruned(prune_floor, opts.horizon);
            Ok((!p.is_zero()).then(|| (n.clone(), p)))
        })
        .collect();
    let mut out = Modes::new();
    for r in results {
        if let Some((n, p)) = r? {
            out.insert(n, p);
        }
    }
    Ok(out)
}

fn step_mode(
    n: &LatticeIndex,
    prev: &Modes,
    c_init: &CoeffField,
    omega: &FrequencyVector,
    opts: &ExpPolyOptions,
) -> Result<ExpPoly> {
    let k = omega.phase_unchecked(n);
    let theta = k.powi(3);
    let mut terms = Vec::new();
    let c = c_init.get(n);
    if c != Complex64::new(0.0, 0.0) {
        terms.push(Term::new(c, 0, theta));
    }
    if k != 0.0 {
        let mut raw = Vec::new();
        for (m1, p1) in prev {
            if let Some(p2) = prev.get(&(n - m1)) {
                p1.push_product_terms(p2, &mut raw);
            }
        }
        if !raw.is_empty() {
            let conv = ExpPoly::from_terms(raw, opts.merge_tol);
            let integral = conv.outer_integral(theta, opts)?;
            terms.extend_from_slice(integral.scale(Complex64::new(0.0, -k / 2.0)).terms());
        }
    }
    let out = ExpPoly::from_terms(terms, opts.merge_tol);
    if out.len() > opts.max_terms {
        return Err(Error::TermBudgetExceeded {
            terms: out.len(),
            limit: opts.max_terms,
        });
    }
    Ok(out)
}

/// Iterates `c_0, …, c_k` without any stopping rule.
pub fn iterates(
    c_init: &CoeffField,
    omega: &FrequencyVector,
    cfg: &SolverConfig,
    k: u32,
) -> Result<Vec<Modes>> {
    cfg.validate()?;
    let c = c_init.restricted(cfg.box_radius);
    let opts = cfg.exp_options();
    let mut out = vec![linear_iterate(&c, omega)];
    for _ in 0..k {
        let next = picard_step(out.last().unwrap(), &c, omega, cfg.box_radius, &opts, cfg.prune_floor)?;
        out.push(next);
    }
    Ok(out)
}

/// Sampled `sup_t |a(t,n) - b(t,n)|` per mode.
fn sup_diffs(a: &Modes, b: &Modes, times: &[f64]) -> BTreeMap<LatticeIndex, f64> {
    let zero = ExpPoly::zero();
    let keys: std::collections::BTreeSet<&LatticeIndex> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|n| {
            let pa = a.get(n).unwrap_or(&zero);
            let pb = b.get(n).unwrap_or(&zero);
            let d = times
                .iter()
                .map(|&t| (pa.eval(t) - pb.eval(t)).norm())
                .fold(0.0, f64::max);
            (n.clone(), d)
        })
        .collect()
}

/// `max_n sup_t |a - b| e^{κ|n|/4}` over the sampled times.
pub fn weighted_difference(a: &Modes, b: &Modes, kappa: f64, times: &[f64]) -> f64 {
    sup_diffs(a, b, times)
        .iter()
        .map(|(n, d)| d * (kappa * n.l1() as f64 / 4.0).exp())
        .fold(0.0, f64::max)
}

fn sup_mass(modes: &Modes, times: &[f64]) -> f64 {
    modes
        .values()
        .map(|p| times.iter().map(|&t| p.eval(t).norm()).fold(0.0, f64::max))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: u32,
    /// `d_k = max_n sup_t |c_k - c_{k-1}| e^{κ|n|/4}`.
    pub weighted_diff: f64,
    /// `d_k / d_{k-1}` (absent for `k = 1` or `d_{k-1} = 0`).
    pub ratio: Option<f64>,
    pub total_terms: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveLog {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    /// Fitted `C1` (at least `C0`).
    pub c1: f64,
    /// Theoretical contraction ratio `B0 4^{ν+1} C1 κ^{-ν} |ω| t`.
    pub q: f64,
    /// `Σ_n sup_t |c_K - c_{K-1}|`.
    pub last_diff_l1: f64,
    /// `max(Σ_n sup_t |c_K|, Σ_n sup_t |c_{K-1}|)`.
    pub mass: f64,
}

impl SolveLog {
    pub fn cauchy_samples(&self, b0: f64, kappa: f64, omega: &FrequencyVector, t: f64) -> Vec<CauchySample> {
        self.records
            .iter()
            .map(|r| CauchySample {
                k: r.k,
                weighted_diff: r.weighted_diff,
                b0,
                kappa,
                nu: omega.nu(),
                omega_norm: omega.norm(),
                t,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionTrajectory {
    pub omega: FrequencyVector,
    pub radius: u32,
    pub coeffs: Modes,
    pub iterations: u32,
    pub t_max: f64,
    pub horizon: f64,
    pub envelope: Envelope,
    pub c0: f64,
    pub hermitian: bool,
    pub log: SolveLog,
    pub config: SolverConfig,
}

/// Runs the iteration until the weighted difference drops to `target_tol`
/// or `max_iterations` is reached.
pub fn solve(c_init: &CoeffField, omega: &FrequencyVector, cfg: &SolverConfig) -> Result<SolutionTrajectory> {
    cfg.validate()?;
    crate::lattice::check_dim(omega.nu(), c_init.nu())?;
    let envelope = c_init
        .envelope()
        .ok_or_else(|| Error::invalid(MODULE, "initial data must carry an envelope (B0, κ)"))?;
    let c0 = match cfg.c0 {
        Some(c0) => c0,
        None => certified_c0(omega.nu())?.c0,
    };
    let t0 = horizon(envelope.b, envelope.kappa, omega, c0)?;
    if cfg.t_request > t0 {
        return Err(Error::HorizonExceeded {
            requested: cfg.t_request,
            horizon: t0,
        });
    }
    let c = c_init.restricted(cfg.box_radius);
    let scale = c.max_abs().max(f64::MIN_POSITIVE);
    let hermitian = c.is_hermitian(1e-14 * scale);
    let opts = cfg.exp_options();
    let times = cfg.sample_times();

    let mut prev = linear_iterate(&c, omega);
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut converged = false;
    let mut rising = 0;
    let mut last_diff_l1 = 0.0;
    let mut mass = sup_mass(&prev, &times);
    for k in 1..=cfg.max_iterations {
        let next = picard_step(&prev, &c, omega, cfg.box_radius, &opts, cfg.prune_floor)?;
        let diffs = sup_diffs(&next, &prev, &times);
        let d = diffs
            .iter()
            .map(|(n, d)| d * (envelope.kappa * n.l1() as f64 / 4.0).exp())
            .fold(0.0, f64::max);
        last_diff_l1 = diffs.values().sum();
        mass = sup_mass(&next, &times).max(sup_mass(&prev, &times));
        let ratio = records
            .last()
            .filter(|r| r.weighted_diff > 0.0)
            .map(|r| d / r.weighted_diff);
        records.push(IterationRecord {
            k,
            weighted_diff: d,
            ratio,
            total_terms: next.values().map(ExpPoly::len).sum(),
        });
        prev = next;
        if d <= cfg.target_tol {
            converged = true;
            break;
        }
        if ratio.is_some_and(|r| r >= 1.0) {
            rising += 1;
            if rising >= 3 {
                return Err(Error::NoContraction {
                    ratios: records.iter().rev().take(3).rev().filter_map(|r| r.ratio).collect(),
                });
            }
        } else {
            rising = 0;
        }
    }

    let mut log = SolveLog {
        records,
        converged,
        c1: c0,
        q: 0.0,
        last_diff_l1,
        mass,
    };
    let samples = log.cauchy_samples(envelope.b, envelope.kappa, omega, cfg.t_request.max(f64::MIN_POSITIVE));
    log.c1 = estimate_c1(&samples, c0);
    log.q = theoretical_ratio(envelope.b, envelope.kappa, omega, log.c1, cfg.t_request);
    Ok(SolutionTrajectory {
        omega: omega.clone(),
        radius: cfg.box_radius,
        iterations: log.records.len() as u32,
        coeffs: prev,
        t_max: cfg.t_request,
        horizon: t0,
        envelope,
        c0,
        hermitian,
        log,
        config: cfg.clone(),
    })
}

/// `q = B0 4^{ν+1} C1 κ^{-ν} |ω| t`.
pub fn theoretical_ratio(b0: f64, kappa: f64, omega: &FrequencyVector, c1: f64, t: f64) -> f64 {
    let nu = omega.nu() as i32;
    b0 * 4f64.powi(nu + 1) * c1 * kappa.powi(-nu) * omega.norm() * t
}

/// Number of `(k, t, n)` with `|c_k(t,n)| > 2 B0 e^{-κ|n|/2}`.
pub fn envelope_violations(iterates: &[Modes], envelope: &Envelope, times: &[f64]) -> usize {
    let mut count = 0;
    for modes in iterates {
        for (n, p) in modes {
            let bound = 2.0 * envelope.b * (-envelope.kappa * n.l1() as f64 / 2.0).exp();
            count += times.iter().filter(|&&t| p.eval(t).norm() > bound).count();
        }
    }
    count
}

/// `m` Chebyshev points of the second kind mapped to `[0, t_max]`, endpoints included.
pub fn chebyshev_times(t_max: f64, m: usize) -> Vec<f64> {
    if m < 2 {
        return vec![t_max];
    }
    (0..m)
        .map(|j| {
            let x = (std::f64::consts::PI * j as f64 / (m - 1) as f64).cos();
            0.5 * t_max * (1.0 - x)
        })
        .collect()
}

impl SolutionTrajectory {
    pub fn nu(&self) -> usize {
        self.omega.nu()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.t_max) {
            return Err(Error::TimeOutOfRange {
                module: MODULE,
                t,
                t_max: self.t_max,
            });
        }
        Ok(())
    }

    /// Instantaneous coefficients `c(t, ·)`.
    pub fn coefficients_at(&self, t: f64) -> Result<CoeffField> {
        self.check_time(t)?;
        CoeffField::from_entries(
            self.nu(),
            self.radius,
            self.coeffs.iter().map(|(n, p)| (n.clone(), p.eval(t))),
        )
    }

    /// Instantaneous `∂_t c(t, ·)`.
    pub fn time_derivative_at(&self, t: f64) -> Result<CoeffField> {
        self.check_time(t)?;
        CoeffField::from_entries(
            self.nu(),
            self.radius,
            self.coeffs.iter().map(|(n, p)| (n.clone(), p.derivative_t().eval(t))),
        )
    }

    /// `u(t,x) = Σ_n c(t,n) e^{i(nω)x}`.
    pub fn evaluate_u(&self, t: f64, x: f64) -> Result<Complex64> {
        Ok(self.coefficients_at(t)?.synthesize(&self.omega, x))
    }

    /// `u(t,x)` for Hermitian data, after checking the imaginary part is
    /// below `1e-10` of `Σ_n |c(t,n)|`.
    pub fn evaluate_real(&self, t: f64, x: f64) -> Result<f64> {
        let c = self.coefficients_at(t)?;
        if !self.hermitian {
            return Err(Error::NonHermitian {
                module: MODULE,
                defect: c.hermitian_defect(),
            });
        }
        let u = c.synthesize(&self.omega, x);
        let scale: f64 = c.iter().map(|(_, v)| v.norm()).sum();
        if u.im.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotRealValued {
                module: MODULE,
                real: u.re,
                imag: u.im,
            });
        }
        Ok(u.re)
    }

    /// `Σ_n |c(t,n)|^2` over the box.
    pub fn l2_mass(&self, t: f64) -> Result<f64> {
        Ok(self.coefficients_at(t)?.iter().map(|(_, v)| v.norm_sqr()).sum())
    }

    /// CSV `t,x,u` on the product grid (real part when data is Hermitian).
    pub fn sampled_csv(&self, ts: &[f64], xs: &[f64]) -> Result<String> {
        let mut s = String::from("t,x,u\n");
        for &t in ts {
            for &x in xs {
                let u = if self.hermitian {
                    self.evaluate_real(t, x)?
                } else {
                    self.evaluate_u(t, x)?.re
                };
                let _ = writeln!(s, "{t},{x},{u}");
            }
        }
        Ok(s)
    }

    pub fn to_document(&self) -> TrajectoryDocument {
        TrajectoryDocument {
            config: self.config.clone(),
            nu: self.nu(),
            omega: self.omega.components().to_vec(),
            k: self.iterations,
            t_max: self.t_max,
            horizon: self.horizon,
            b0: self.envelope.b,
            kappa: self.envelope.kappa,
            c0: self.c0,
            log: self.log.clone(),
            modes: self
                .coeffs
                .iter()
                .map(|(n, p)| ModeDocument {
                    n: n.components().to_vec(),
                    terms: p.terms().to_vec(),
                })
                .collect(),
        }
    }
}

/// JSON trajectory export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDocument {
    pub config: SolverConfig,
    pub nu: usize,
    pub omega: Vec<f64>,
    #[serde(rename = "K")]
    pub k: u32,
    pub t_max: f64,
    pub horizon: f64,
    pub b0: f64,
    pub kappa: f64,
    pub c0: f64,
    pub log: SolveLog,
    pub modes: Vec<ModeDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeDocument {
    pub n: Vec<i64>,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `max |∂_t u + ∂_x^3 u + u ∂_x u|` over the samples.
    pub max_residual: f64,
    pub samples: usize,
    /// `max|nω| · mass · Σ_n sup|c_K - c_{K-1}|`: the part due to stopping at `K`.
    pub iteration_bound: f64,
    /// `4 B0^2 |ω| R (2R+1)^{2ν} e^{-κR/2}`: crude size of the truncation tail.
    pub tail_bound: f64,
}

/// PDE residual of the truncated solution with exact derivatives: `∂_t` from
/// the exponential polynomials, `∂_x` as multiplication by `i(nω)`, and the
/// nonlinearity `½∂_x(u²)` from the full (untruncated) self-convolution.
pub fn pde_residual(traj: &SolutionTrajectory, t_samples: &[f64], x_samples: &[f64]) -> Result<ResidualReport> {
    let omega = &traj.omega;
    let mut max_residual: f64 = 0.0;
    for &t in t_samples {
        let c = traj.coefficients_at(t)?;
        let dc = traj.time_derivative_at(t)?;
        let sq = convolve_with_floor(&c, &c, 2 * traj.radius, 0.0)?;
        let mut modes: BTreeMap<LatticeIndex, Complex64> = BTreeMap::new();
        for (n, v) in dc.iter() {
            *modes.entry(n.clone()).or_default() += v;
        }
        for (n, v) in c.iter() {
            let k = omega.phase_unchecked(n);
            *modes.entry(n.clone()).or_default() += Complex64::new(0.0, -k * k * k) * v;
        }
        for (n, v) in sq.iter() {
            let k = omega.phase_unchecked(n);
            *modes.entry(n.clone()).or_default() += Complex64::new(0.0, k / 2.0) * v;
        }
        for &x in x_samples {
            let r: Complex64 = modes
                .iter()
                .map(|(n, v)| v * Complex64::cis(omega.phase_unchecked(n) * x))
                .sum();
            max_residual = max_residual.max(r.norm());
        }
    }
    let r = traj.radius as f64;
    let max_phase = box_indices(traj.nu(), traj.radius)
        .iter()
        .map(|n| omega.phase_unchecked(n).abs())
        .fold(0.0, f64::max);
    let nu = traj.nu() as i32;
    Ok(ResidualReport {
        max_residual,
        samples: t_samples.len() * x_samples.len(),
        iteration_bound: max_phase * traj.log.mass * traj.log.last_diff_l1,
        tail_bound: 4.0
            * traj.envelope.b.powi(2)
            * omega.norm()
            * r
            * (2.0 * r + 1.0).powi(2 * nu)
            * (-traj.envelope.kappa * r / 2.0).exp(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Envelope constant measured on the segment's initial data (same κ).
    pub b_measured: f64,
    pub horizon: f64,
    pub iterations: u32,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainResult {
    pub segments: Vec<SegmentReport>,
    pub trajectories: Vec<SolutionTrajectory>,
    /// Set when the measured envelope left the budget; the chain stops there.
    pub budget_violation: Option<String>,
}

/// Experimental continuation: solve on `[0, t_request]`, restart from the
/// state at `t_request` with a re-measured envelope, repeat. Stops when the
/// measured `B` exceeds `budget_multiple` times the initial `B0`.
pub fn solve_chain(
    c_init: &CoeffField,
    omega: &FrequencyVector,
    cfg: &SolverConfig,
    segments: usize,
    budget_multiple: f64,
) -> Result<ChainResult> {
    if segments == 0 || !(budget_multiple > 0.0) {
        return Err(Error::invalid(MODULE, "chain needs segments >= 1 and a positive budget"));
    }
    let env0 = c_init
        .envelope()
        .ok_or_else(|| Error::invalid(MODULE, "initial data must carry an envelope (B0, κ)"))?;
    let budget = budget_multiple * env0.b;
    let mut data = c_init.clone();
    let mut out = ChainResult {
        segments: Vec::new(),
        trajectories: Vec::new(),
        budget_violation: None,
    };
    for index in 0..segments {
        let b = data.envelope().expect("set below").b;
        if b > budget {
            out.budget_violation = Some(format!(
                "segment {index}: measured envelope B = {b:e} exceeds budget {budget:e}"
            ));
            break;
        }
        let traj = solve(&data, omega, cfg)?;
        let t_start = index as f64 * cfg.t_request;
        out.segments.push(SegmentReport {
            index,
            t_start,
            t_end: t_start + cfg.t_request,
            b_measured: b,
            horizon: traj.horizon,
            iterations: traj.iterations,
            converged: traj.log.converged,
        });
        let mut next = traj.coefficients_at(traj.t_max)?;
        if traj.hermitian {
            next = hermitian_symmetrize(&next);
        }
        let b_next = next.measured_envelope(env0.kappa).max(f64::MIN_POSITIVE);
        data = next.with_envelope(Envelope::new(b_next, env0.kappa)?)?;
        out.trajectories.push(traj);
    }
    Ok(out)
}
