//! Spectra of `H = -d²/dx² + V(x)`: band edges from the Hill discriminant
//! for periodic `V`, Galerkin fiber eigenvalues for quasi-periodic `V`.

use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{box_indices, CoeffField, FrequencyVector};
use crate::picard::SolutionTrajectory;

const MODULE: &str = "spectral";

/// Successive halvings of the step must change `Δ(E)` by less than this.
pub const HALVING_TOL: f64 = 1e-8;
/// `| |Δ(E*)| - 2 |` below this at an extremum counts as a closed gap.
pub const CLOSED_GAP_TOL: f64 = 1e-9;
/// Bisection width for edges.
pub const ROOT_TOL: f64 = 1e-11;
/// Fiber samples for quasi-periodic spectra.
pub const FIBER_SAMPLES: usize = 32;

const MAX_LEVEL: u32 = 22;

/// Real periodic potential `V(x) = Re Σ c_k e^{i k x}` with period `2π/ω`.
#[derive(Debug)]
pub struct Potential {
    omega: f64,
    modes: Vec<(f64, Complex64)>,
    v_min: f64,
    v_max: f64,
    levels: Vec<OnceLock<Vec<f64>>>,
}

impl Clone for Potential {
    fn clone(&self) -> Self {
        Potential::new(self.omega, self.modes.clone()).expect("validated on construction")
    }
}

impl Potential {
    fn new(omega: f64, modes: Vec<(f64, Complex64)>) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid(MODULE, "base frequency must be positive"));
        }
        let mut p = Potential {
            omega,
            modes,
            v_min: 0.0,
            v_max: 0.0,
            levels: (0..=MAX_LEVEL).map(|_| OnceLock::new()).collect(),
        };
        let probe: Vec<f64> = (0..4096).map(|i| p.value(p.period() * i as f64 / 4096.0)).collect();
        let slack: f64 = p.modes.iter().map(|(k, c)| c.norm() * (k * p.period() / 4096.0).abs()).sum();
        p.v_min = probe.iter().copied().fold(f64::INFINITY, f64::min) - slack;
        p.v_max = probe.iter().copied().fold(f64::NEG_INFINITY, f64::max) + slack;
        Ok(p)
    }

    pub fn constant(a: f64, omega: f64) -> Result<Self> {
        Potential::new(omega, vec![(0.0, Complex64::new(a, 0.0))])
    }

    /// `V(x) = Σ_j a_j cos(j ω x)` for `j = 1, 2, …`, plus `a0`.
    pub fn cosine_series(a0: f64, amplitudes: &[f64], omega: f64) -> Result<Self> {
        let mut modes = vec![(0.0, Complex64::new(a0, 0.0))];
        for (j, a) in amplitudes.iter().enumerate() {
            modes.push(((j + 1) as f64 * omega, Complex64::new(*a, 0.0)));
        }
        Potential::new(omega, modes)
    }

    /// `V(x) = Σ_n c(n) e^{i n ω x}` for a Hermitian field with `ν = 1`.
    pub fn from_field(c: &CoeffField, omega: &FrequencyVector) -> Result<Self> {
        Potential::from_field_scaled(c, omega, 1.0)
    }

    /// `V(x) = s · Σ_n c(n) e^{i n ω x}`.
    pub fn from_field_scaled(c: &CoeffField, omega: &FrequencyVector, s: f64) -> Result<Self> {
        if c.nu() != 1 || omega.nu() != 1 {
            return Err(Error::invalid(MODULE, "Hill discriminant needs nu = 1"));
        }
        let scale = c.max_abs().max(f64::MIN_POSITIVE);
        if c.hermitian_defect() > 1e-10 * scale {
            return Err(Error::NonHermitian {
                module: MODULE,
                defect: c.hermitian_defect(),
            });
        }
        let w = omega.components()[0].abs();
        let modes = c
            .iter()
            .map(|(n, v)| (n.components()[0] as f64 * omega.components()[0], v * s))
            .collect();
        Potential::new(w, modes)
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    pub fn value(&self, x: f64) -> f64 {
        self.modes.iter().map(|(k, c)| (c * Complex64::cis(k * x)).re).sum()
    }

    /// `V` at `x = i·L/(2N)`, `i = 0..=2N`, for `N = 2^level`.
    fn samples(&self, level: u32) -> &[f64] {
        self.levels[level as usize].get_or_init(|| {
            let n2 = 2usize << level;
            let l = self.period();
            (0..=n2).map(|i| self.value(l * i as f64 / n2 as f64)).collect()
        })
    }
}

/// Monodromy trace and its `E`-derivative with `2^level` RK4 steps.
fn monodromy(pot: &Potential, e: f64, level: u32) -> (f64, f64) {
    let v = pot.samples(level);
    let steps = 1usize << level;
    let h = pot.period() / steps as f64;
    // Two solutions, each (ψ, ψ', ∂_Eψ, ∂_Eψ').
    let mut y = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
    let f = |vx: f64, y: &[f64; 8]| -> [f64; 8] {
        let q = vx - e;
        [
            y[1],
            q * y[0],
            y[3],
            q * y[2] - y[0],
            y[5],
            q * y[4],
            y[7],
            q * y[6] - y[4],
        ]
    };
    let add = |a: &[f64; 8], b: &[f64; 8], s: f64| -> [f64; 8] { std::array::from_fn(|i| a[i] + s * b[i]) };
    for i in 0..steps {
        let (v0, vm, v1) = (v[2 * i], v[2 * i + 1], v[2 * i + 2]);
        let k1 = f(v0, &y);
        let k2 = f(vm, &add(&y, &k1, h / 2.0));
        let k3 = f(vm, &add(&y, &k2, h / 2.0));
        let k4 = f(v1, &add(&y, &k3, h));
        for j in 0..8 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    (y[0] + y[5], y[2] + y[7])
}

fn start_level(pot: &Potential, e: f64) -> u32 {
    let rate = (pot.v_max - e).abs().max((pot.v_min - e).abs()).max(1.0).sqrt();
    let needed = (pot.period() * rate / 0.1).ceil().max(64.0);
    (needed.log2().ceil() as u32).min(MAX_LEVEL - 1)
}

/// `(Δ(E), Δ'(E))`, halving the step until `Δ` moves by less than
/// [`HALVING_TOL`], then Richardson-extrapolated.
pub fn discriminant_with_derivative(pot: &Potential, e: f64) -> (f64, f64) {
    let mut level = start_level(pot, e);
    let mut coarse = monodromy(pot, e, level);
    loop {
        let fine = monodromy(pot, e, level + 1);
        let done = (fine.0 - coarse.0).abs() < HALVING_TOL * fine.0.abs().max(1.0) || level + 1 >= MAX_LEVEL;
        if done {
            return (
                fine.0 + (fine.0 - coarse.0) / 15.0,
                fine.1 + (fine.1 - coarse.1) / 15.0,
            );
        }
        coarse = fine;
        level += 1;
    }
}

/// `Δ(E)`, the monodromy trace of `-ψ'' + (V - E)ψ = 0` over one period.
pub fn hill_discriminant(pot: &Potential, e: f64) -> f64 {
    discriminant_with_derivative(pot, e).0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    Periodic,
    Quasiperiodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSample {
    pub theta: f64,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub grid_points: usize,
    pub halving_tol: f64,
    pub basis_radius: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub mode: SpectrumMode,
    pub band_edges: Vec<f64>,
    pub fiber_cloud: Vec<FiberSample>,
    pub e_max: f64,
    pub resolution: Resolution,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// All band edges in `(-∞, e_max]`: the bottom `E0` followed by one
/// `(E⁻, E⁺)` pair per gap; closed gaps contribute a double edge.
pub fn band_edges(pot: &Potential, e_max: f64) -> Result<SpectrumReport> {
    let e_lo = pot.v_min - 1.0;
    if !(e_max > e_lo) {
        return Err(Error::invalid(MODULE, format!("E_max = {e_max} lies below the spectrum")));
    }
    // Uniform in k = sqrt(E - e_lo), 16 points per half oscillation of Δ.
    let l = pot.period();
    let dk = std::f64::consts::PI / l / 16.0;
    let k_max = (e_max - e_lo).sqrt();
    let count = (k_max / dk).ceil() as usize + 1;
    let grid: Vec<f64> = (0..count)
        .map(|i| e_lo + (k_max * i as f64 / (count - 1) as f64).powi(2))
        .collect();
    let values: Vec<(f64, f64)> = grid.par_iter().map(|&e| discriminant_with_derivative(pot, e)).collect();

    if values[0].0 <= 2.0 {
        return Err(Error::invalid(MODULE, "Δ(E) <= 2 below min V; potential bounds are wrong"));
    }
    let delta = |e: f64| hill_discriminant(pot, e);
    let mut edges = Vec::new();

    let Some(first) = values.iter().position(|v| v.0 < 2.0) else {
        return Ok(periodic_report(edges, e_max, count));
    };
    edges.push(bisect(|e| delta(e) - 2.0, grid[first - 1], grid[first], ROOT_TOL));

    // Extrema of Δ beyond the bottom of the spectrum.
    let mut extrema = Vec::new();
    for i in first..count - 1 {
        if (values[i].1 > 0.0) != (values[i + 1].1 > 0.0) {
            let de = |e: f64| discriminant_with_derivative(pot, e).1;
            extrema.push(bisect(de, grid[i], grid[i + 1], ROOT_TOL));
        }
    }
    let mut left = edges[0];
    for (j, &ext) in extrema.iter().enumerate() {
        let d = delta(ext);
        let level = 2.0 * d.signum();
        let excess = d.abs() - 2.0;
        let right_bound = extrema.get(j + 1).copied().unwrap_or(e_max);
        if excess.abs() <= CLOSED_GAP_TOL {
            edges.push(ext);
            edges.push(ext);
        } else if excess > 0.0 {
            let lo = bisect(|e| delta(e) - level, left, ext, ROOT_TOL);
            if j + 1 == extrema.len() && delta(e_max) * d.signum() >= 2.0 {
                // Gap runs past e_max: keep only its lower edge.
                edges.push(lo);
                break;
            }
            let hi = bisect(|e| delta(e) - level, ext, right_bound, ROOT_TOL);
            if hi - lo <= 2.0 * ROOT_TOL {
                return Err(Error::UnresolvedRootCluster {
                    energy: ext,
                    reason: format!("gap edges {lo} and {hi} are closer than the root tolerance"),
                });
            }
            edges.push(lo);
            edges.push(hi);
        }
        left = ext;
    }
    edges.retain(|&e| e <= e_max);
    Ok(periodic_report(edges, e_max, count))
}

fn periodic_report(band_edges: Vec<f64>, e_max: f64, grid_points: usize) -> SpectrumReport {
    SpectrumReport {
        mode: SpectrumMode::Periodic,
        band_edges,
        fiber_cloud: Vec::new(),
        e_max,
        resolution: Resolution {
            grid_points,
            halving_tol: HALVING_TOL,
            basis_radius: None,
        },
    }
}

/// Eigenvalues, ascending, of `M[n,m] = (θ + nω)² δ_nm + c(n - m)` on `|n| <= basis_radius`.
pub fn quasiperiodic_fiber_spectrum(
    c: &CoeffField,
    omega: &FrequencyVector,
    theta: f64,
    basis_radius: u32,
) -> Result<Vec<f64>> {
    crate::lattice::check_dim(omega.nu(), c.nu())?;
    if basis_radius < c.radius() {
        return Err(Error::invalid(MODULE, "basis radius must be at least the field radius"));
    }
    let scale = c.max_abs().max(f64::MIN_POSITIVE);
    if c.hermitian_defect() > 1e-12 * scale {
        return Err(Error::InvalidArgument {
            module: MODULE,
            reason: format!("field is not Hermitian (defect {:e})", c.hermitian_defect()),
        });
    }
    let basis = box_indices(omega.nu(), basis_radius);
    let dim = basis.len();
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        let mut v = c.get(&(&basis[i] - &basis[j]));
        if i == j {
            v += (theta + omega.phase_unchecked(&basis[i])).powi(2);
        }
        v
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Fiber parameters: [`FIBER_SAMPLES`] points in `[0, g)` with `g` the
/// smallest positive `|n·ω|` on the basis box.
pub fn fiber_thetas(omega: &FrequencyVector, basis_radius: u32) -> Vec<f64> {
    let gap = box_indices(omega.nu(), basis_radius)
        .iter()
        .map(|n| omega.phase_unchecked(n).abs())
        .filter(|&p| p > 0.0)
        .fold(f64::INFINITY, f64::min);
    let gap = if gap.is_finite() { gap } else { 1.0 };
    (0..FIBER_SAMPLES).map(|j| gap * j as f64 / FIBER_SAMPLES as f64).collect()
}

pub fn fiber_cloud(c: &CoeffField, omega: &FrequencyVector, basis_radius: u32, e_max: f64) -> Result<SpectrumReport> {
    let cloud = fiber_thetas(omega, basis_radius)
        .into_par_iter()
        .map(|theta| {
            let ev = quasiperiodic_fiber_spectrum(c, omega, theta, basis_radius)?;
            Ok(FiberSample {
                theta,
                eigenvalues: ev.into_iter().filter(|&e| e <= e_max).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumReport {
        mode: SpectrumMode::Quasiperiodic,
        band_edges: Vec::new(),
        fiber_cloud: cloud,
        e_max,
        resolution: Resolution {
            grid_points: FIBER_SAMPLES,
            halving_tol: HALVING_TOL,
            basis_radius: Some(basis_radius),
        },
    })
}

/// `sup_{a ∈ A} inf_{b ∈ B} |a - b|`.
pub fn one_sided_hausdorff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsospectralityReport {
    pub times: Vec<f64>,
    pub spectra: Vec<SpectrumReport>,
    /// Drift of each snapshot against the `t = times[0]` baseline.
    pub drifts: Vec<f64>,
    pub max_drift: f64,
    pub edges_compared: usize,
}

impl IsospectralityReport {
    /// Band-edge CSV `t,edge_index,E`.
    pub fn edges_csv(&self) -> String {
        let mut s = String::from("t,edge_index,E\n");
        for (t, spec) in self.times.iter().zip(&self.spectra) {
            for (i, e) in spec.band_edges.iter().enumerate() {
                let _ = writeln!(s, "{t},{i},{e}");
            }
        }
        s
    }
}

/// Potential scale `s` for which `-d²/dx² + s·u(t,·)` is isospectral under
/// `u_t + u_xxx + u u_x = 0`.
pub const LAX_SCALE: f64 = -1.0 / 6.0;

/// Band edges (ν = 1) or fiber clouds (ν >= 2) of `-d²/dx² + s·u(t, ·)` at
/// each time, compared with the first. `max_edges` limits the ν = 1
/// comparison to the lowest edges.
pub fn isospectrality_check(
    traj: &SolutionTrajectory,
    times: &[f64],
    scale: f64,
    e_max: f64,
    max_edges: usize,
    basis_radius: u32,
) -> Result<IsospectralityReport> {
    if times.is_empty() {
        return Err(Error::invalid(MODULE, "no snapshot times"));
    }
    let nu = traj.nu();
    let mut spectra = Vec::with_capacity(times.len());
    for &t in times {
        let c = traj.coefficients_at(t)?;
        let spec = if nu == 1 {
            band_edges(&Potential::from_field_scaled(&c, &traj.omega, scale)?, e_max)?
        } else {
            let scaled = CoeffField::from_entries(c.nu(), c.radius(), c.iter().map(|(n, v)| (n.clone(), v * scale)))?;
            fiber_cloud(&scaled, &traj.omega, basis_radius.max(traj.radius), e_max)?
        };
        spectra.push(spec);
    }
    let mut drifts = Vec::with_capacity(times.len());
    let mut edges_compared = 0;
    if nu == 1 {
        let base = &spectra[0].band_edges;
        let n = base.len().min(max_edges);
        for spec in &spectra {
            let edges = &spec.band_edges;
            if edges.len() < n {
                return Err(Error::invalid(
                    MODULE,
                    format!("edge count changed from {} to {}", base.len(), edges.len()),
                ));
            }
            let mut d: f64 = 0.0;
            for i in 0..n {
                let nearest = (0..base.len())
                    .min_by(|&a, &b| (base[a] - edges[i]).abs().total_cmp(&(base[b] - edges[i]).abs()))
                    .expect("nonempty baseline");
                if base[nearest] != base[i] {
                    return Err(Error::invalid(
                        MODULE,
                        format!("edge {i} at {} pairs with baseline edge {nearest}", edges[i]),
                    ));
                }
                d = d.max((edges[i] - base[i]).abs());
            }
            drifts.push(d);
        }
        edges_compared = n;
    } else {
        let flat = |s: &SpectrumReport| -> Vec<f64> {
            s.fiber_cloud.iter().flat_map(|f| f.eigenvalues.iter().copied()).collect()
        };
        let base = flat(&spectra[0]);
        for spec in &spectra {
            drifts.push(one_sided_hausdorff(&flat(spec), &base));
        }
    }
    let max_drift = drifts.iter().copied().fold(0.0, f64::max);
    Ok(IsospectralityReport {
        times: times.to_vec(),
        spectra,
        drifts,
        max_drift,
        edges_compared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeIndex;
    use std::f64::consts::PI;

    fn w(x: f64) -> FrequencyVector {
        FrequencyVector::new(vec![x]).unwrap()
    }

    #[test]
    fn free_and_shifted_closed_forms() {
        let free = Potential::constant(0.0, 1.0).unwrap();
        let shifted = Potential::constant(0.3, 1.0).unwrap();
        let l = 2.0 * PI;
        for &e in &[0.05, 0.4, 1.3, 2.9, 5.0] {
            assert!((hill_discriminant(&free, e) - 2.0 * (e.sqrt() * l).cos()).abs() <= 1e-9);
            let s = e + 0.3;
            assert!((hill_discriminant(&shifted, s) - 2.0 * (e.sqrt() * l).cos()).abs() <= 1e-9);
        }
        assert!((hill_discriminant(&free, -0.5) - 2.0 * (0.5f64.sqrt() * l).cosh()).abs() <= 1e-9);
    }

    #[test]
    fn free_edges_are_doubly_degenerate() {
        let free = Potential::constant(0.0, 1.0).unwrap();
        let rep = band_edges(&free, 4.2).unwrap();
        let expected = [0.0, 0.25, 0.25, 1.0, 1.0, 2.25, 2.25, 4.0, 4.0];
        assert_eq!(rep.band_edges.len(), expected.len(), "{:?}", rep.band_edges);
        for (a, b) in rep.band_edges.iter().zip(expected) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn mathieu_first_gap() {
        let q = 0.05;
        // 2q cos(2x) has base frequency 2 and period π.
        let pot = Potential::new(2.0, vec![(2.0, Complex64::new(2.0 * q, 0.0))]).unwrap();
        let rep = band_edges(&pot, 1.5).unwrap();
        let e = &rep.band_edges;
        assert!(e.len() >= 3);
        let width = e[2] - e[1];
        assert!((width - 2.0 * q).abs() <= 0.1 * 2.0 * q, "gap {width}");
        assert!(e.windows(2).all(|p| p[0] <= p[1]));
        for &x in &e[1..3] {
            assert!((hill_discriminant(&pot, x).abs() - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn discriminant_matches_galerkin_edges() {
        let omega = w(1.0);
        let c = CoeffField::from_entries(
            1,
            1,
            [
                (LatticeIndex::new(vec![-1]), Complex64::new(0.1, 0.0)),
                (LatticeIndex::new(vec![1]), Complex64::new(0.1, 0.0)),
            ],
        )
        .unwrap();
        let pot = Potential::from_field(&c, &omega).unwrap();
        let rep = band_edges(&pot, 3.0).unwrap();
        let mut oracle: Vec<f64> = [0.0, 0.5]
            .iter()
            .flat_map(|&th| quasiperiodic_fiber_spectrum(&c, &omega, th, 24).unwrap())
            .filter(|&e| e <= 3.0)
            .collect();
        oracle.sort_by(f64::total_cmp);
        assert_eq!(rep.band_edges.len(), oracle.len(), "{:?} vs {oracle:?}", rep.band_edges);
        for (a, b) in rep.band_edges.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn fiber_spectrum_closed_forms() {
        let omega = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).unwrap();
        let zero = CoeffField::zero(2, 2);
        let theta = 0.1;
        let ev = quasiperiodic_fiber_spectrum(&zero, &omega, theta, 3).unwrap();
        let mut expected: Vec<f64> = box_indices(2, 3)
            .iter()
            .map(|n| (theta + omega.phase(n).unwrap()).powi(2))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let shift = CoeffField::from_entries(2, 2, [(LatticeIndex::zero(2), Complex64::new(0.25, 0.0))]).unwrap();
        let ev2 = quasiperiodic_fiber_spectrum(&shift, &omega, theta, 3).unwrap();
        for (a, b) in ev2.iter().zip(&expected) {
            assert!((a - b - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn fiber_spectrum_basis_convergence() {
        let omega = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).unwrap();
        let c = crate::generators::random_hermitian(2, 2, 0.01, 2.0, 3).unwrap();
        let a = quasiperiodic_fiber_spectrum(&c, &omega, 0.2, 8).unwrap();
        let b = quasiperiodic_fiber_spectrum(&c, &omega, 0.2, 12).unwrap();
        // Larger boxes add new near-resonant states; the old ones must persist.
        let d = one_sided_hausdorff(&a[..5], &b);
        assert!(d <= 1e-6, "{d}");
    }

    #[test]
    fn non_hermitian_field_rejected() {
        let omega = w(1.0);
        let c = CoeffField::from_entries(1, 1, [(LatticeIndex::new(vec![1]), Complex64::new(0.1, 0.0))]).unwrap();
        assert!(quasiperiodic_fiber_spectrum(&c, &omega, 0.0, 2).is_err());
        assert!(Potential::from_field(&c, &omega).is_err());
    }

    #[test]
    fn hausdorff() {
        assert_eq!(one_sided_hausdorff(&[1.0, 2.0], &[1.0, 2.5, 9.0]), 0.5);
        assert_eq!(one_sided_hausdorff(&[], &[1.0]), 0.0);
    }
}
