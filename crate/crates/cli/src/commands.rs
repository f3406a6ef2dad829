use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use qkdv_core::combinatorics::{build_b, certified_c0, factorial_sum, verify_phi_properties};
use qkdv_core::lattice::box_indices;
use qkdv_core::picard::{
    envelope_violations, iterates, pde_residual, solve, solve_chain, SegmentReport, SolutionTrajectory,
    TrajectoryDocument,
};
use qkdv_core::spectral::{band_edges, isospectrality_check, Potential};
use qkdv_core::tree::{tree_sum_ck, OracleReport};
use qkdv_core::uniqueness::{assert_unique, rk4_trajectory, ModeTrajectory, TrajectoryPair, FIT_DEGREE, FIT_SAMPLES};
use qkdv_core::{CoeffField, Error, FrequencyVector, LatticeIndex};

use crate::config::{RunConfig, SpectrumParams, Suite};

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;
pub const EXIT_CHAIN_BUDGET: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::HorizonExceeded { .. }
            | Error::NoContraction { .. }
            | Error::TermBudgetExceeded { .. }
            | Error::BudgetExceeded { .. } => EXIT_SOLVER,
            Error::UnresolvedRootCluster { .. } | Error::InconsistentInitialData { .. } => EXIT_VERIFY,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn write_file(dir: &Path, name: &str, contents: &str) -> Outcome {
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(dir.join(name), contents))
        .map_err(|e| Failure::new(EXIT_INVALID, format!("[cli] cannot write {}: {e}", dir.join(name).display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn equispaced(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m).map(|j| a + (b - a) * j as f64 / (m - 1) as f64).collect()
}

/// `m` points of `[0, 2π/ω_1)`.
fn x_grid(omega: &FrequencyVector, m: usize) -> Vec<f64> {
    let period = std::f64::consts::TAU / omega.components()[0].abs();
    (0..m).map(|j| period * j as f64 / m as f64).collect()
}

fn mass(c: &CoeffField) -> f64 {
    c.iter().map(|(_, v)| v.norm_sqr()).sum()
}

fn solve_summary(traj: &SolutionTrajectory, ts: &[f64], xs: &[f64]) -> Result<Value, Failure> {
    let residual = pde_residual(traj, ts, xs)?;
    let zero = LatticeIndex::zero(traj.nu());
    let c_start = traj.coefficients_at(0.0)?;
    let m0 = mass(&c_start);
    let z0 = c_start.get(&zero);
    let mut mass_drift: f64 = 0.0;
    let mut zero_drift: f64 = 0.0;
    for &t in ts {
        let c = traj.coefficients_at(t)?;
        let m = mass(&c);
        mass_drift = mass_drift.max(if m0 > 0.0 { (m - m0).abs() / m0 } else { m.abs() });
        zero_drift = zero_drift.max((c.get(&zero) - z0).norm());
    }
    let violations = envelope_violations(std::slice::from_ref(&traj.coeffs), &traj.envelope, ts);
    Ok(json!({
        "converged": traj.log.converged,
        "iterations": traj.iterations,
        "t_max": traj.t_max,
        "horizon": traj.horizon,
        "c0": traj.c0,
        "c1": traj.log.c1,
        "q": traj.log.q,
        "records": traj.log.records,
        "envelope": {
            "b0": traj.envelope.b,
            "kappa": traj.envelope.kappa,
            "violations": violations,
            "samples": ts.len(),
        },
        "residual": residual,
        "mass": { "initial": m0, "max_relative_drift": mass_drift },
        "mode_zero": { "initial": [z0.re, z0.im], "max_deviation": zero_drift },
    }))
}

pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Outcome {
    let omega = cfg.omega()?;
    let data = cfg.initial_data()?;
    let traj = solve(&data, &omega, &cfg.solver_config())?;
    let ts = equispaced(0.0, traj.t_max, cfg.output.t_samples);
    let xs = x_grid(&omega, cfg.output.x_samples);
    let mut report = solve_summary(&traj, &ts, &xs)?;
    report["command"] = json!("solve");
    report["seed"] = json!(cfg.seed);
    write_file(out, "trajectory.json", &to_json(&traj.to_document()))?;
    write_file(out, "solution.csv", &traj.sampled_csv(&ts, &xs)?)?;
    write_file(out, "report.json", &to_json(&report))?;
    if !traj.log.converged {
        return Err(Failure::new(
            EXIT_SOLVER,
            format!(
                "[picard] not converged: weighted difference above {:e} after {} iterations",
                traj.config.target_tol, traj.iterations
            ),
        ));
    }
    Ok(())
}

struct SuiteResult {
    measured: Value,
    failures: Vec<String>,
}

fn suite_tree_oracle(cfg: &RunConfig, data: &CoeffField, omega: &FrequencyVector) -> Result<SuiteResult, Failure> {
    let v = &cfg.verify;
    let r = cfg.solver.radius;
    let mut scfg = cfg.solver_config();
    scfg.t_request = v.oracle_t;
    let its = iterates(data, omega, &scfg, v.k_max)?;
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 1..=v.k_max {
        for n in box_indices(omega.nu(), r) {
            let tree = tree_sum_ck(k, &n, v.oracle_t, data, omega, r)?;
            let pic = its[k as usize].get(&n).map(|p| p.eval(v.oracle_t)).unwrap_or_default();
            let rep = OracleReport::new(k, &n, pic, tree);
            let rel = rep.relative_diff();
            worst = worst.max(rel);
            if !(rel <= v.oracle_tol) {
                failures.push(format!(
                    "[tree] tree sum differs from Picard iterate k = {k} at n = {n}: relative {rel:e} > {:e}",
                    v.oracle_tol
                ));
            }
            reports.push(rep);
        }
    }
    Ok(SuiteResult {
        measured: json!({ "t": v.oracle_t, "tolerance": v.oracle_tol, "max_relative_diff": worst, "values": reports }),
        failures,
    })
}

fn suite_combinatorics(cfg: &RunConfig) -> Result<SuiteResult, Failure> {
    let n_max = cfg.verify.n_max;
    let mut failures = Vec::new();
    let mut phi = Vec::new();
    for n in 1..=n_max as usize {
        for l in 1..=n_max {
            let rep = verify_phi_properties(n, l)?;
            if !rep.passed() {
                failures.push(format!("[combinatorics] Φ properties fail on 𝔄_{n}({l})"));
            }
            phi.push(rep);
        }
    }
    let mut sums = Vec::new();
    for n in 1..=n_max {
        let s = factorial_sum(n as usize, n)?;
        let bound = num_bigint::BigUint::from(2 * n).pow(n);
        let ok = s < bound;
        if !ok {
            failures.push(format!("[combinatorics] factorial_sum({n},{n}) = {s} is not below (2N)^N = {bound}"));
        }
        sums.push(json!({ "n": n, "factorial_sum": s.to_string(), "bound": bound.to_string(), "ok": ok }));
    }
    let mut b_sets = Vec::new();
    for k in 1..=n_max {
        let b = build_b(k)?;
        let ok = !b.is_empty() && b.iter().all(|a| a.len() == k as usize + 1 && a.weight() == k);
        if !ok {
            failures.push(format!("[combinatorics] 𝔹^({k}) has an element of weight other than {k}"));
        }
        b_sets.push(json!({ "k": k, "size": b.len(), "weights_ok": ok }));
    }
    let c0 = certified_c0(cfg.problem.nu)?;
    Ok(SuiteResult {
        measured: json!({ "phi": phi, "factorial_sums": sums, "b_sets": b_sets, "c0": c0.c0 }),
        failures,
    })
}

fn suite_uniqueness(cfg: &RunConfig, data: &CoeffField, omega: &FrequencyVector) -> Result<SuiteResult, Failure> {
    let v = &cfg.verify;
    let scfg = cfg.solver_config();
    let t = scfg.t_request;
    let rho = cfg.problem.kappa / 2.0;
    let ts = equispaced(0.0, t, v.samples);
    let base = solve(data, omega, &scfg)?;
    let mut wide_cfg = scfg.clone();
    wide_cfg.box_radius += 2;
    let wide = solve(data, omega, &wide_cfg)?;
    let fit = rk4_trajectory(data, omega, t, v.rk4_dt, FIT_DEGREE, FIT_SAMPLES)?;
    let cases = [
        ("identical", ModeTrajectory::from(&base)),
        ("radius+2", ModeTrajectory::from(&wide)),
        ("rk4", fit),
    ];
    let mut failures = Vec::new();
    let mut reports = serde_json::Map::new();
    for (name, other) in cases {
        let pair = TrajectoryPair::new(ModeTrajectory::from(&base), other, rho, &ts)?;
        let rep = assert_unique(&pair, &ts, base.c0)?;
        if !rep.pass {
            failures.push(format!(
                "[uniqueness] {name}: max difference {:e} exceeds contraction bound {:e} plus allowance {:e}",
                rep.max_diff, rep.bound_at_best_k, rep.allowance
            ));
        }
        reports.insert(name.to_string(), serde_json::to_value(&rep).expect("report serializes"));
    }
    Ok(SuiteResult {
        measured: json!({ "t": t, "rho": rho, "cases": reports }),
        failures,
    })
}

fn suite_spectrum(cfg: &RunConfig, data: &CoeffField, omega: &FrequencyVector, out: &Path) -> Result<SuiteResult, Failure> {
    let sp = &cfg.verify.spectrum;
    let traj = solve(data, omega, &cfg.solver_config())?;
    let t = traj.t_max;
    let rep = isospectrality_check(&traj, &[0.0, t / 2.0, t], sp.scale, sp.e_max, sp.max_edges, sp.basis_radius)?;
    write_file(out, "spectrum.csv", &rep.edges_csv())?;
    let mut failures = Vec::new();
    if !(rep.max_drift <= cfg.verify.drift_tol) {
        failures.push(format!(
            "[spectral] spectral drift {:e} exceeds {:e}",
            rep.max_drift, cfg.verify.drift_tol
        ));
    }
    Ok(SuiteResult {
        measured: json!({ "scale": sp.scale, "tolerance": cfg.verify.drift_tol, "report": rep }),
        failures,
    })
}

pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> Outcome {
    let suite = cfg
        .verify
        .suite
        .ok_or_else(|| Failure::new(EXIT_INVALID, "[config] verify.suite is required for the verify command"))?;
    let omega = cfg.omega()?;
    let data = cfg.initial_data()?;
    let result = match suite {
        Suite::TreeOracle => suite_tree_oracle(cfg, &data, &omega),
        Suite::Combinatorics => suite_combinatorics(cfg),
        Suite::Uniqueness => suite_uniqueness(cfg, &data, &omega),
        Suite::Spectrum => suite_spectrum(cfg, &data, &omega, out),
    };
    let result = match result {
        Ok(r) => r,
        Err(f) if f.code == EXIT_VERIFY => SuiteResult {
            measured: Value::Null,
            failures: vec![f.message],
        },
        Err(f) => return Err(f),
    };
    let pass = result.failures.is_empty();
    let report = json!({
        "command": "verify",
        "suite": suite.name(),
        "seed": cfg.seed,
        "pass": pass,
        "failures": result.failures,
        "measured": result.measured,
    });
    write_file(out, "report.json", &to_json(&report))?;
    if pass {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY, result.failures.join("\n")))
    }
}

#[derive(Serialize)]
struct ChainDocument<'a> {
    segments: &'a [SegmentReport],
    trajectories: Vec<TrajectoryDocument>,
}

/// Lowest edges of `-d² + s·u` at each segment start and at the end of the
/// last segment, with their largest deviation from the first.
fn boundary_spectra(trajs: &[SolutionTrajectory], sp: &SpectrumParams) -> Result<Value, Failure> {
    let mut states = Vec::new();
    for traj in trajs {
        states.push((traj, 0.0));
    }
    if let Some(last) = trajs.last() {
        states.push((last, last.t_max));
    }
    let mut edges = Vec::new();
    for (traj, t) in states {
        let c = traj.coefficients_at(t)?;
        let pot = Potential::from_field_scaled(&c, &traj.omega, sp.scale)?;
        let mut e = band_edges(&pot, sp.e_max)?.band_edges;
        e.truncate(sp.max_edges);
        edges.push(e);
    }
    let mut drift: f64 = 0.0;
    if let Some(base) = edges.first() {
        for e in &edges {
            if e.len() != base.len() {
                drift = f64::INFINITY;
                continue;
            }
            for (a, b) in e.iter().zip(base) {
                drift = drift.max((a - b).abs());
            }
        }
    }
    Ok(json!({ "scale": sp.scale, "edges": edges, "max_drift": drift }))
}

pub fn cmd_chain(cfg: &RunConfig, out: &Path) -> Outcome {
    let omega = cfg.omega()?;
    let data = cfg.initial_data()?;
    let ch = &cfg.chain;
    let result = solve_chain(&data, &omega, &cfg.solver_config(), ch.segments, ch.budget_multiple)?;
    let xs = x_grid(&omega, cfg.output.x_samples);
    let mut csv = String::from("t,x,u\n");
    for (seg, traj) in result.segments.iter().zip(&result.trajectories) {
        for t in equispaced(0.0, traj.t_max, cfg.output.t_samples) {
            let c = traj.coefficients_at(t)?;
            for &x in &xs {
                let _ = writeln!(csv, "{},{x},{}", seg.t_start + t, c.synthesize(&omega, x).re);
            }
        }
    }
    let spectra = if omega.nu() == 1 && !result.trajectories.is_empty() {
        boundary_spectra(&result.trajectories, &ch.spectrum)?
    } else {
        Value::Null
    };
    let report = json!({
        "command": "chain",
        "seed": cfg.seed,
        "segments_requested": ch.segments,
        "segments_completed": result.segments.len(),
        "budget": ch.budget_multiple * cfg.problem.b0,
        "budget_violation": result.budget_violation,
        "segments": result.segments,
        "boundary_spectra": spectra,
    });
    let doc = ChainDocument {
        segments: &result.segments,
        trajectories: result.trajectories.iter().map(SolutionTrajectory::to_document).collect(),
    };
    write_file(out, "chain.json", &to_json(&doc))?;
    write_file(out, "solution.csv", &csv)?;
    write_file(out, "report.json", &to_json(&report))?;
    match result.budget_violation {
        Some(msg) => Err(Failure::new(EXIT_CHAIN_BUDGET, format!("[picard] chain stopped: {msg}"))),
        None => Ok(()),
    }
}
