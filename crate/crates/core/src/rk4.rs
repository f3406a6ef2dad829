//! Classical fixed-step RK4 on the truncated coefficient ODE
//!
//! `dc(n)/dt = i(nω)^3 c(n) - (i nω/2) Σ_{m1+m2=n} c(m1) c(m2)`,
//!
//! kept free of any exponential-polynomial machinery so it can serve as an
//! independent check on the Picard solver.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{box_indices, check_dim, CoeffField, FrequencyVector, LatticeIndex};

const MODULE: &str = "rk4";

/// `dt · max|(nω)^3|` must not exceed this.
pub const STABILITY_LIMIT: f64 = 2.5;

#[derive(Clone, Debug, PartialEq)]
pub struct OdeState {
    pub t: f64,
    pub c: CoeffField,
}

impl OdeState {
    /// Snapshot CSV: `n1,…,nν,re,im` per stored index.
    pub fn to_csv(&self) -> String {
        let nu = self.c.nu();
        let mut s = String::new();
        for j in 1..=nu {
            let _ = write!(s, "n{j},");
        }
        s.push_str("re,im\n");
        for (n, v) in self.c.iter() {
            for k in n.components() {
                let _ = write!(s, "{k},");
            }
            let _ = writeln!(s, "{},{}", v.re, v.im);
        }
        s
    }
}

struct System {
    indices: Vec<LatticeIndex>,
    linear: Vec<Complex64>,
    factor: Vec<Complex64>,
    pairs: Vec<Vec<(usize, usize)>>,
    zero: Option<usize>,
    nonlinear: bool,
}

impl System {
    fn new(nu: usize, radius: u32, omega: &FrequencyVector, nonlinear: bool) -> Self {
        let indices = box_indices(nu, radius);
        let pos: std::collections::BTreeMap<&LatticeIndex, usize> =
            indices.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut linear = Vec::with_capacity(indices.len());
        let mut factor = Vec::with_capacity(indices.len());
        let mut pairs = Vec::with_capacity(indices.len());
        for n in &indices {
            let k = omega.phase_unchecked(n);
            linear.push(Complex64::new(0.0, k * k * k));
            factor.push(Complex64::new(0.0, -k / 2.0));
            let mut list = Vec::new();
            if nonlinear && k != 0.0 {
                for (i, m1) in indices.iter().enumerate() {
                    if let Some(&j) = pos.get(&(n - m1)) {
                        list.push((i, j));
                    }
                }
            }
            pairs.push(list);
        }
        let zero = indices.iter().position(LatticeIndex::is_zero);
        System {
            indices,
            linear,
            factor,
            pairs,
            zero,
            nonlinear,
        }
    }

    fn rhs_mode(&self, i: usize, c: &[Complex64]) -> Complex64 {
        let mut out = self.linear[i] * c[i];
        if self.nonlinear && !self.pairs[i].is_empty() {
            let s: Complex64 = self.pairs[i].iter().map(|&(a, b)| c[a] * c[b]).sum();
            out += self.factor[i] * s;
        }
        out
    }

    fn rhs(&self, c: &[Complex64]) -> Vec<Complex64> {
        if self.indices.len() >= 128 {
            (0..c.len()).into_par_iter().map(|i| self.rhs_mode(i, c)).collect()
        } else {
            (0..c.len()).map(|i| self.rhs_mode(i, c)).collect()
        }
    }

    fn step(&self, c: &[Complex64], h: f64) -> Vec<Complex64> {
        let axpy = |x: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> {
            x.iter().zip(k).map(|(a, b)| a + b * s).collect()
        };
        let k1 = self.rhs(c);
        let k2 = self.rhs(&axpy(c, &k1, h / 2.0));
        let k3 = self.rhs(&axpy(c, &k2, h / 2.0));
        let k4 = self.rhs(&axpy(c, &k3, h));
        (0..c.len())
            .map(|i| c[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
            .collect()
    }

    fn max_rate(&self) -> f64 {
        self.linear.iter().map(|l| l.im.abs()).fold(0.0, f64::max)
    }
}

fn check_inputs(c0: &CoeffField, omega: &FrequencyVector, t_end: f64, dt: f64) -> Result<()> {
    check_dim(omega.nu(), c0.nu())?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(MODULE, "dt must be positive"));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::invalid(MODULE, "t_end must be finite and >= 0"));
    }
    Ok(())
}

/// Integrates to `t_end` with `ceil(t_end/dt)` equal steps.
pub fn rk4_integrate(
    c0: &CoeffField,
    omega: &FrequencyVector,
    t_end: f64,
    dt: f64,
    nonlinear: bool,
) -> Result<OdeState> {
    let mut states = rk4_snapshots(c0, omega, &[t_end], dt, nonlinear)?;
    Ok(states.pop().expect("one snapshot requested"))
}

/// States at each of the nondecreasing `times`; each interval between
/// consecutive times is covered by equal steps no longer than `dt`.
pub fn rk4_snapshots(
    c0: &CoeffField,
    omega: &FrequencyVector,
    times: &[f64],
    dt: f64,
    nonlinear: bool,
) -> Result<Vec<OdeState>> {
    for &t in times {
        check_inputs(c0, omega, t, dt)?;
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid(MODULE, "snapshot times must be nondecreasing"));
    }
    let sys = System::new(c0.nu(), c0.radius(), omega, nonlinear);
    let rate = sys.max_rate();
    if dt * rate > STABILITY_LIMIT {
        return Err(Error::invalid(
            MODULE,
            format!(
                "dt·max|(nω)^3| = {:.3} exceeds the explicit stability limit {STABILITY_LIMIT}",
                dt * rate
            ),
        ));
    }
    let mut c: Vec<Complex64> = sys.indices.iter().map(|n| c0.get(n)).collect();
    let c_zero = sys.zero.map(|i| c[i]);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        let steps = (span / dt).ceil() as usize;
        if steps > 0 {
            let h = span / steps as f64;
            for _ in 0..steps {
                c = sys.step(&c, h);
                if let (Some(i), Some(z)) = (sys.zero, c_zero) {
                    if c[i] != z {
                        return Err(Error::invalid(MODULE, "mode zero drifted during a step"));
                    }
                }
            }
        }
        t = target;
        let field = CoeffField::from_entries(
            c0.nu(),
            c0.radius(),
            sys.indices.iter().cloned().zip(c.iter().copied()),
        )?;
        out.push(OdeState { t, c: field });
    }
    Ok(out)
}
