//! Multi-index combinatorics: compositions `𝔄_N(ℓ)`, the reduction map Φ,
//! factorial sums, the sets `𝔹^(k)`, and empirical values of the constants
//! `C0` and `C1`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MODULE: &str = "combinatorics";

/// Largest `N` and `ℓ` accepted by the enumerating routines.
pub const ENUMERATION_LIMIT: u32 = 8;
/// Largest `k` accepted by [`build_b`].
pub const B_LIMIT: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(alpha: Vec<u32>) -> Self {
        MultiIndex(alpha)
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|α| = Σ α_j`.
    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α! = ∏ α_j!`.
    pub fn factorial(&self) -> BigUint {
        self.0.iter().fold(BigUint::one(), |acc, &a| acc * factorial(a))
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

fn budget(reason: String) -> Error {
    Error::BudgetExceeded {
        module: MODULE,
        reason,
    }
}

/// All `α ∈ Z_+^N` with `Σ α_j = ℓ`, in descending lexicographic order.
pub fn enumerate_a(n: usize, l: u32) -> Result<Vec<MultiIndex>> {
    if n == 0 {
        return Err(Error::invalid(MODULE, "N must be >= 1"));
    }
    if n > ENUMERATION_LIMIT as usize || l > ENUMERATION_LIMIT {
        return Err(budget(format!(
            "enumeration limited to N, l <= {ENUMERATION_LIMIT} (got N = {n}, l = {l})"
        )));
    }
    fn rec(prefix: &mut Vec<u32>, left: usize, rest: u32, out: &mut Vec<MultiIndex>) {
        if left == 1 {
            prefix.push(rest);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in (0..=rest).rev() {
            prefix.push(a);
            rec(prefix, left - 1, rest - a, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), n, l, &mut out);
    Ok(out)
}

/// `Φ(α)`: decrements the first minimal positive entry. Returns `Φ(α)` and
/// the 1-based position `j1(α)` of that entry.
pub fn phi_map(alpha: &MultiIndex) -> Result<(MultiIndex, usize)> {
    let min = alpha
        .0
        .iter()
        .copied()
        .filter(|&a| a > 0)
        .min()
        .ok_or_else(|| Error::invalid(MODULE, "Φ needs an entry > 0"))?;
    let j1 = alpha.0.iter().position(|&a| a == min).expect("min is attained");
    let mut beta = alpha.0.clone();
    beta[j1] -= 1;
    Ok((MultiIndex(beta), j1 + 1))
}

/// Outcome of checking every Φ property on one `𝔄_N(ℓ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiReport {
    pub n: usize,
    pub l: u32,
    pub size: usize,
    /// Φ maps `𝔄_N(ℓ)` into `𝔄_N(ℓ-1)`.
    pub maps_into: bool,
    /// The decremented entry is strictly below every other positive entry of Φ(α).
    pub strict_minimum: bool,
    /// Equal images agree off `{j1(α), j1(α')}`.
    pub agree_off_j1: bool,
    /// Equal images with equal `j1` come from equal arguments.
    pub injective_given_j1: bool,
    pub max_fiber: usize,
    /// Φ is injective on `{α : α_{j1(α)} > 1}`.
    pub injective_above_one: bool,
}

impl PhiReport {
    pub fn passed(&self) -> bool {
        self.maps_into
            && self.strict_minimum
            && self.agree_off_j1
            && self.injective_given_j1
            && self.max_fiber <= self.n
            && self.injective_above_one
    }
}

/// Exhaustive check of the Φ properties on `𝔄_N(ℓ)`, `ℓ >= 1`.
pub fn verify_phi_properties(n: usize, l: u32) -> Result<PhiReport> {
    if l == 0 {
        return Err(Error::invalid(MODULE, "Φ is defined on 𝔄_N(ℓ) for ℓ >= 1"));
    }
    let domain = enumerate_a(n, l)?;
    let target: BTreeSet<MultiIndex> = enumerate_a(n, l - 1)?.into_iter().collect();
    let images: Vec<(MultiIndex, usize)> = domain.iter().map(phi_map).collect::<Result<_>>()?;

    let maps_into = images.iter().all(|(b, _)| target.contains(b));
    let strict_minimum = images.iter().all(|(b, j1)| {
        let j = j1 - 1;
        b.0.iter()
            .enumerate()
            .filter(|&(i, &v)| i != j && v > 0)
            .all(|(_, &v)| b.0[j] < v)
    });

    let mut agree_off_j1 = true;
    let mut injective_given_j1 = true;
    let mut injective_above_one = true;
    for (x, (bx, jx)) in domain.iter().zip(&images) {
        for (y, (by, jy)) in domain.iter().zip(&images) {
            if bx != by || x == y {
                continue;
            }
            let off = (0..n).all(|i| i + 1 == *jx || i + 1 == *jy || x.0[i] == y.0[i]);
            agree_off_j1 &= off;
            if jx == jy {
                injective_given_j1 = false;
            }
            if x.0[jx - 1] > 1 && y.0[jy - 1] > 1 {
                injective_above_one = false;
            }
        }
    }
    let mut fibers = std::collections::BTreeMap::<&MultiIndex, usize>::new();
    for (b, _) in &images {
        *fibers.entry(b).or_default() += 1;
    }
    Ok(PhiReport {
        n,
        l,
        size: domain.len(),
        maps_into,
        strict_minimum,
        agree_off_j1,
        injective_given_j1,
        max_fiber: fibers.values().copied().max().unwrap_or(0),
        injective_above_one,
    })
}

/// `Σ_{α ∈ 𝔄_N(ℓ)} ∏ α_i!`, exact. Computed as the `x^ℓ` coefficient of
/// `(Σ_a a! x^a)^N`, so it is not subject to the enumeration limit.
pub fn factorial_sum(n: usize, l: u32) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::invalid(MODULE, "N must be >= 1"));
    }
    if n > 64 || l > 64 {
        return Err(budget(format!("factorial sums limited to N, l <= 64 (got {n}, {l})")));
    }
    let l = l as usize;
    let base: Vec<BigUint> = (0..=l as u32).map(factorial).collect();
    let mut acc = vec![BigUint::zero(); l + 1];
    acc[0] = BigUint::one();
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); l + 1];
        for (i, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in base.iter().enumerate().take(l + 1 - i) {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    Ok(acc.swap_remove(l))
}

/// `𝔹^(k) ⊂ Z_+^{k+1}`: `𝔹^(1) = {(1,0),(0,1)}`, `𝔹^(k) = 𝔹^(k-1)×{0} + 𝕀^(k)`,
/// as a set, in descending lexicographic order.
pub fn build_b(k: u32) -> Result<Vec<MultiIndex>> {
    if k == 0 {
        return Err(Error::invalid(MODULE, "𝔹^(k) is defined for k >= 1"));
    }
    if k > B_LIMIT {
        return Err(budget(format!("build_b limited to k <= {B_LIMIT} (got {k})")));
    }
    let mut current: BTreeSet<Vec<u32>> = [vec![1, 0], vec![0, 1]].into_iter().collect();
    for level in 2..=k as usize {
        let mut next = BTreeSet::new();
        for alpha in &current {
            for unit in 0..=level {
                let mut v = alpha.clone();
                v.push(0);
                v[unit] += 1;
                next.insert(v);
            }
        }
        current = next;
    }
    Ok(current.into_iter().rev().map(MultiIndex).collect())
}

/// `S(κ, a) = Σ_{m ∈ Z} |m|^a e^{-κ|m|}`, summed until the terms are past
/// their peak and below `1e-17` of the running sum.
pub fn lattice_moment(kappa: f64, a: u32) -> f64 {
    let mut sum = if a == 0 { 1.0 } else { 0.0 };
    let peak = a as f64 / kappa;
    let mut m = 1u64;
    loop {
        let mf = m as f64;
        let term = 2.0 * mf.powi(a as i32) * (-kappa * mf).exp();
        sum += term;
        if mf > peak && term <= 1e-17 * sum {
            return sum;
        }
        m += 1;
    }
}

/// One `(ν, κ, α)` instance of `Σ_{m∈Z^ν} ∏_j |m_j|^{α_j} e^{-κ|m_j|} <= α! (C0/κ)^{|α|ν}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub nu: usize,
    pub kappa: f64,
    pub alpha: MultiIndex,
    pub lhs: f64,
    /// Right-hand side at the reported `C0`.
    pub rhs: f64,
    /// Smallest `C0` this row alone would need.
    pub c0_required: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C0Estimate {
    pub c0: f64,
    pub rows: Vec<CertificateRow>,
}

impl C0Estimate {
    /// CSV `nu,kappa,alpha,lhs,rhs,C0`; α components are `;`-separated.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("nu,kappa,alpha,lhs,rhs,C0\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{},{}", r.nu, r.kappa, r.alpha, r.lhs, r.rhs, self.c0);
        }
        s
    }
}

fn factorial_f64(alpha: &MultiIndex) -> f64 {
    alpha
        .components()
        .iter()
        .map(|&a| (1..=a).map(f64::from).product::<f64>())
        .product()
}

/// Smallest `C0` (to `1e-3`, by bisection) satisfying the elementary
/// lattice-sum inequality for every `α` in `alphas` (each of length `ν`,
/// `|α| >= 1`) and every `κ` in `kappas`.
pub fn estimate_c0(nu: usize, kappas: &[f64], alphas: &[MultiIndex]) -> Result<C0Estimate> {
    if nu == 0 || kappas.is_empty() || alphas.is_empty() {
        return Err(Error::invalid(MODULE, "need nu >= 1 and nonempty κ and α lists"));
    }
    if kappas.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(Error::invalid(MODULE, "κ values must be positive"));
    }
    if let Some(a) = alphas.iter().find(|a| a.len() != nu || a.weight() == 0) {
        return Err(Error::invalid(
            MODULE,
            format!("α = ({a}) must have length ν = {nu} and |α| >= 1"),
        ));
    }
    let mut rows = Vec::new();
    for &kappa in kappas {
        for alpha in alphas {
            let lhs: f64 = alpha.components().iter().map(|&a| lattice_moment(kappa, a)).product();
            let exponent = (alpha.weight() as usize * nu) as f64;
            let c0_required = kappa * (lhs / factorial_f64(alpha)).powf(1.0 / exponent);
            rows.push(CertificateRow {
                nu,
                kappa,
                alpha: alpha.clone(),
                lhs,
                rhs: 0.0,
                c0_required,
            });
        }
    }
    let holds = |c0: f64| {
        rows.iter().all(|r| {
            let exponent = (r.alpha.weight() as usize * nu) as i32;
            r.lhs <= factorial_f64(&r.alpha) * (c0 / r.kappa).powi(exponent)
        })
    };
    let mut hi = 1.0;
    while !holds(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    for r in &mut rows {
        let exponent = (r.alpha.weight() as usize * nu) as i32;
        r.rhs = factorial_f64(&r.alpha) * (hi / r.kappa).powi(exponent);
    }
    Ok(C0Estimate { c0: hi, rows })
}

/// Certification domain for `C0`: `κ ∈ {0.5, 1, 2}`, `1 <= |α| <= 6`.
pub const CERT_KAPPAS: [f64; 3] = [0.5, 1.0, 2.0];
pub const CERT_MAX_WEIGHT: u32 = 6;

/// `C0` on the fixed certification domain for the given `ν <= 3`.
pub fn certified_c0(nu: usize) -> Result<C0Estimate> {
    if nu == 0 || nu > 3 {
        return Err(Error::invalid(MODULE, "C0 is certified for 1 <= nu <= 3"));
    }
    let mut alphas = Vec::new();
    for w in 1..=CERT_MAX_WEIGHT {
        alphas.extend(enumerate_a(nu, w)?);
    }
    estimate_c0(nu, &CERT_KAPPAS, &alphas)
}

/// One logged Picard difference: `d = max_n sup_t |c_k - c_{k-1}| e^{κ|n|/4}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchySample {
    pub k: u32,
    pub weighted_diff: f64,
    pub b0: f64,
    pub kappa: f64,
    pub nu: usize,
    pub omega_norm: f64,
    pub t: f64,
}

impl CauchySample {
    /// Smallest `C1` with `d <= B0^{k+1} (4^{ν+1} C1 κ^{-ν} |ω| t)^k`.
    pub fn c1_required(&self) -> f64 {
        if self.weighted_diff == 0.0 || self.k == 0 {
            return 0.0;
        }
        let per_step = (self.weighted_diff / self.b0.powi(self.k as i32 + 1)).powf(1.0 / self.k as f64);
        let scale = 4f64.powi(self.nu as i32 + 1) * self.kappa.powi(-(self.nu as i32)) * self.omega_norm * self.t;
        per_step / scale
    }
}

/// Least `C1 >= c0` consistent with every logged sample.
pub fn estimate_c1(samples: &[CauchySample], c0: f64) -> f64 {
    samples
        .iter()
        .map(CauchySample::c1_required)
        .fold(c0, f64::max)
}
