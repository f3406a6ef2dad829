//! Frequency-lattice arithmetic.
//!
//! Lattice indices `n ∈ Z^ν` are measured in the ℓ¹ norm throughout, which
//! makes `e^{-κ|m1|} e^{-κ|m2|} <= e^{-κ|m1+m2|}` exact. All coefficient
//! families live on a hard box `|n| <= R`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

const MODULE: &str = "lattice";

/// Entries with modulus below this are dropped after a convolution.
pub const DEFAULT_PRUNE_FLOOR: f64 = 1e-30;

/// Slack granted when checking `|c(n)| <= B e^{-κ|n|}`, to absorb the rounding
/// in `exp(-κ|n|)` when data sits exactly on its envelope.
const ENVELOPE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::invalid(MODULE, "frequency vector must have nu >= 1"));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid(MODULE, "frequency vector has non-finite entries"));
        }
        let fv = FrequencyVector(omega);
        if fv.norm() == 0.0 {
            return Err(Error::invalid(MODULE, "frequency vector must be nonzero"));
        }
        Ok(fv)
    }

    pub fn nu(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean norm `|ω|`.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// `n·ω`.
    pub fn phase(&self, n: &LatticeIndex) -> Result<f64> {
        check_dim(self.nu(), n.nu())?;
        Ok(self.phase_unchecked(n))
    }

    pub(crate) fn phase_unchecked(&self, n: &LatticeIndex) -> f64 {
        n.0.iter().zip(&self.0).map(|(&k, &w)| k as f64 * w).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeIndex(Vec<i64>);

impl LatticeIndex {
    pub fn new(n: Vec<i64>) -> Self {
        LatticeIndex(n)
    }

    pub fn zero(nu: usize) -> Self {
        LatticeIndex(vec![0; nu])
    }

    pub fn nu(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    /// ℓ¹ norm.
    pub fn l1(&self) -> u64 {
        self.0.iter().map(|k| k.unsigned_abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

impl Add for &LatticeIndex {
    type Output = LatticeIndex;
    fn add(self, rhs: &LatticeIndex) -> LatticeIndex {
        debug_assert_eq!(self.nu(), rhs.nu());
        LatticeIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticeIndex {
    type Output = LatticeIndex;
    fn sub(self, rhs: &LatticeIndex) -> LatticeIndex {
        debug_assert_eq!(self.nu(), rhs.nu());
        LatticeIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticeIndex {
    type Output = LatticeIndex;
    fn neg(self) -> LatticeIndex {
        LatticeIndex(self.0.iter().map(|a| -a).collect())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            module: MODULE,
            expected,
            got,
        });
    }
    Ok(())
}

/// All `n ∈ Z^ν` with `|n| <= radius`, in lexicographic order.
pub fn box_indices(nu: usize, radius: u32) -> Vec<LatticeIndex> {
    fn rec(prefix: &mut Vec<i64>, left: usize, budget: i64, out: &mut Vec<LatticeIndex>) {
        if left == 0 {
            out.push(LatticeIndex(prefix.clone()));
            return;
        }
        for k in -budget..=budget {
            prefix.push(k);
            rec(prefix, left - 1, budget - k.abs(), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(nu), nu, radius as i64, &mut out);
    out
}

/// Exponential envelope `|c(n)| <= b e^{-κ|n|}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub b: f64,
    pub kappa: f64,
}

impl Envelope {
    pub fn new(b: f64, kappa: f64) -> Result<Self> {
        if !(b.is_finite() && kappa.is_finite() && b > 0.0 && kappa > 0.0) {
            return Err(Error::invalid(MODULE, format!("envelope needs B > 0, κ > 0 (got {b}, {kappa})")));
        }
        Ok(Envelope { b, kappa })
    }

    pub fn bound(&self, n: &LatticeIndex) -> f64 {
        self.b * (-self.kappa * n.l1() as f64).exp()
    }

    pub fn admits(&self, n: &LatticeIndex, value: Complex64) -> bool {
        value.norm() <= self.bound(n) * (1.0 + ENVELOPE_SLACK)
    }
}

/// Truncated Fourier coefficient family on the box `|n| <= radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffField {
    nu: usize,
    radius: u32,
    entries: BTreeMap<LatticeIndex, Complex64>,
    envelope: Option<Envelope>,
}

impl CoeffField {
    pub fn zero(nu: usize, radius: u32) -> Self {
        CoeffField {
            nu,
            radius,
            entries: BTreeMap::new(),
            envelope: None,
        }
    }

    pub fn from_entries<I>(nu: usize, radius: u32, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LatticeIndex, Complex64)>,
    {
        let mut field = CoeffField::zero(nu, radius);
        for (n, v) in entries {
            field.insert(n, v)?;
        }
        Ok(field)
    }

    /// Adds `value` to the entry at `n` (exact zeros are not stored).
    pub fn insert(&mut self, n: LatticeIndex, value: Complex64) -> Result<()> {
        check_dim(self.nu, n.nu())?;
        if n.l1() > self.radius as u64 {
            return Err(Error::invalid(
                MODULE,
                format!("index {n} outside box of radius {}", self.radius),
            ));
        }
        if let Some(env) = &self.envelope {
            if !env.admits(&n, value) {
                return Err(Error::invalid(MODULE, format!("entry {n} violates the envelope")));
            }
        }
        if value != Complex64::new(0.0, 0.0) {
            self.entries.insert(n, value);
        } else {
            self.entries.remove(&n);
        }
        Ok(())
    }

    /// Attaches an envelope after checking every stored entry against it.
    pub fn with_envelope(mut self, env: Envelope) -> Result<Self> {
        if let Some((n, v)) = self.entries.iter().find(|(n, v)| !env.admits(n, **v)) {
            return Err(Error::invalid(
                MODULE,
                format!(
                    "entry {n} has |c| = {:e} > envelope {:e}",
                    v.norm(),
                    env.bound(n)
                ),
            ));
        }
        self.envelope = Some(env);
        Ok(self)
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn envelope(&self) -> Option<Envelope> {
        self.envelope
    }

    pub fn get(&self, n: &LatticeIndex) -> Complex64 {
        self.entries.get(n).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> &BTreeMap<LatticeIndex, Complex64> {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticeIndex, &Complex64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `max_n |c(-n) - conj c(n)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.entries
            .iter()
            .map(|(n, v)| (self.get(&-n) - v.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// `Σ_n c(n) e^{i (n·ω) x}` in lexicographic order.
    pub fn synthesize(&self, omega: &FrequencyVector, x: f64) -> Complex64 {
        self.entries
            .iter()
            .map(|(n, c)| c * Complex64::cis(omega.phase_unchecked(n) * x))
            .sum()
    }

    /// Smallest `B` with `|c(n)| <= B e^{-κ|n|}` on the stored entries.
    pub fn measured_envelope(&self, kappa: f64) -> f64 {
        self.entries
            .iter()
            .map(|(n, v)| v.norm() * (kappa * n.l1() as f64).exp())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Drops entries with modulus below `floor`.
    pub fn pruned(mut self, floor: f64) -> Self {
        self.entries.retain(|_, v| v.norm() >= floor);
        self
    }

    /// Keeps only entries with `|n| <= radius` and shrinks the box.
    pub fn restricted(&self, radius: u32) -> Self {
        CoeffField {
            nu: self.nu,
            radius,
            entries: self
                .entries
                .iter()
                .filter(|(n, _)| n.l1() <= radius as u64)
                .map(|(n, v)| (n.clone(), *v))
                .collect(),
            envelope: self.envelope,
        }
    }

    pub fn to_document(&self, omega: &FrequencyVector) -> FieldDocument {
        FieldDocument {
            nu: self.nu,
            omega: omega.components().to_vec(),
            radius: self.radius,
            entries: self
                .entries
                .iter()
                .map(|(n, v)| FieldEntry {
                    n: n.components().to_vec(),
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &FieldDocument) -> Result<(CoeffField, FrequencyVector)> {
        let omega = FrequencyVector::new(doc.omega.clone())?;
        check_dim(doc.nu, omega.nu())?;
        let field = CoeffField::from_entries(
            doc.nu,
            doc.radius,
            doc.entries
                .iter()
                .map(|e| (LatticeIndex::new(e.n.clone()), Complex64::new(e.re, e.im))),
        )?;
        Ok((field, omega))
    }
}

/// JSON form of a coefficient field; entries are index-lexicographic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    pub nu: usize,
    pub omega: Vec<f64>,
    pub radius: u32,
    pub entries: Vec<FieldEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldEntry {
    pub n: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// `(n·ω)^3`.
pub fn phase_cube(n: &LatticeIndex, omega: &FrequencyVector) -> Result<f64> {
    Ok(omega.phase(n)?.powi(3))
}

/// `(n·ω)^3` in exact rational arithmetic on the binary values of `ω`.
pub fn phase_cube_exact(n: &LatticeIndex, omega: &FrequencyVector) -> Result<BigRational> {
    check_dim(omega.nu(), n.nu())?;
    let mut dot = BigRational::from_integer(BigInt::from(0));
    for (&k, &w) in n.components().iter().zip(omega.components()) {
        let w = BigRational::from_float(w).expect("finite by construction");
        dot += w * BigRational::from_integer(BigInt::from(k));
    }
    Ok(&dot * &dot * &dot)
}

/// Truncated convolution with the default prune floor.
pub fn convolve(a: &CoeffField, b: &CoeffField, out_radius: u32) -> Result<CoeffField> {
    convolve_with_floor(a, b, out_radius, DEFAULT_PRUNE_FLOOR)
}

/// `(a*b)(n) = Σ_{m1+m2=n} a(m1) b(m2)` for `|n| <= out_radius`. Each output
/// entry is accumulated in lexicographic order of `(m1, m2)`.
pub fn convolve_with_floor(
    a: &CoeffField,
    b: &CoeffField,
    out_radius: u32,
    floor: f64,
) -> Result<CoeffField> {
    check_dim(a.nu, b.nu)?;
    let mut out: BTreeMap<LatticeIndex, Complex64> = BTreeMap::new();
    for (m1, x) in &a.entries {
        for (m2, y) in &b.entries {
            let n = m1 + m2;
            if n.l1() <= out_radius as u64 {
                *out.entry(n).or_default() += x * y;
            }
        }
    }
    out.retain(|_, v| v.norm() >= floor && *v != Complex64::new(0.0, 0.0));
    Ok(CoeffField {
        nu: a.nu,
        radius: out_radius,
        entries: out,
        envelope: None,
    })
}

/// `(c(n) + conj c(-n)) / 2` on the union of the supports of `c` and its reflection.
pub fn hermitian_symmetrize(c: &CoeffField) -> CoeffField {
    let mut out = BTreeMap::new();
    for n in c.entries.keys() {
        for idx in [n.clone(), -n] {
            if !out.contains_key(&idx) {
                let v = (c.get(&idx) + c.get(&-&idx).conj()) * 0.5;
                if v != Complex64::new(0.0, 0.0) {
                    out.insert(idx, v);
                }
            }
        }
    }
    CoeffField {
        nu: c.nu,
        radius: c.radius,
        entries: out,
        envelope: None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineParams {
    pub a0: f64,
    pub b0: f64,
}

impl DiophantineParams {
    pub fn new(a0: f64, b0: f64) -> Result<Self> {
        if !(a0.is_finite() && b0.is_finite() && a0 > 0.0 && a0 < 1.0) {
            return Err(Error::invalid(MODULE, format!("a0 must lie in (0,1), got {a0}")));
        }
        Ok(DiophantineParams { a0, b0 })
    }
}

/// Finite certificate for `|n·ω| >= a0 |n|^{-b0}` over `0 < |n| <= n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub worst_n: Vec<i64>,
    /// `|n·ω| |n|^{b0} / a0` at the worst index; the inequality holds iff >= 1.
    pub worst_ratio: f64,
    pub pass: bool,
    pub tested: usize,
    pub n_max: u32,
}

pub fn check_diophantine(
    omega: &FrequencyVector,
    params: &DiophantineParams,
    n_max: u32,
) -> Result<DiophantineReport> {
    if n_max < 1 {
        return Err(Error::invalid(MODULE, "n_max must be >= 1"));
    }
    let nu = omega.nu();
    if params.b0 <= nu as f64 - 1.0 {
        return Err(Error::invalid(MODULE, format!("b0 must exceed nu - 1 = {}", nu - 1)));
    }
    let mut worst: Option<(LatticeIndex, f64)> = None;
    let mut tested = 0;
    for n in box_indices(nu, n_max) {
        if n.is_zero() {
            continue;
        }
        tested += 1;
        let ratio = omega.phase_unchecked(&n).abs() * (n.l1() as f64).powf(params.b0) / params.a0;
        if worst.as_ref().is_none_or(|(_, r)| ratio < *r) {
            worst = Some((n, ratio));
        }
    }
    let (worst_n, worst_ratio) = worst.expect("n_max >= 1 gives a nonempty scan");
    Ok(DiophantineReport {
        worst_n: worst_n.components().to_vec(),
        worst_ratio,
        pass: worst_ratio >= 1.0,
        tested,
        n_max,
    })
}

/// Result of a finite-window Bohr mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extraction {
    pub value: Complex64,
    /// `Σ_{n≠m} |h(n)| / (A |α_n - α_m|)` plus the quadrature change estimate.
    pub error_bound: f64,
    /// Smallest distance between distinct phases (target included).
    pub gap: f64,
}

/// `(1/2A) ∫_{-A}^{A} f(x) e^{-i(m·ω)x} dx` for `f = Σ h(n) e^{i(n·ω)x}`,
/// the finite-window version of the Bohr mean that isolates `h(m)`.
pub fn extract_coefficient(
    field: &CoeffField,
    omega: &FrequencyVector,
    target: &LatticeIndex,
    half_width: f64,
) -> Result<Extraction> {
    check_dim(field.nu, omega.nu())?;
    check_dim(omega.nu(), target.nu())?;
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::invalid(MODULE, "window half-width A must be positive"));
    }
    let target_phase = omega.phase_unchecked(target);
    let mut phases: Vec<(LatticeIndex, f64)> = field
        .entries
        .keys()
        .map(|n| (n.clone(), omega.phase_unchecked(n)))
        .collect();
    if !field.entries.contains_key(target) {
        phases.push((target.clone(), target_phase));
    }
    phases.sort_by(|a, b| a.1.total_cmp(&b.1));
    let scale = phases.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
    let mut gap = f64::INFINITY;
    for w in phases.windows(2) {
        let d = w[1].1 - w[0].1;
        if d <= 1e-12 * scale {
            return Err(Error::DegeneratePhase {
                first: w[0].0.components().to_vec(),
                second: w[1].0.components().to_vec(),
                phase: w[0].1,
            });
        }
        gap = gap.min(d);
    }

    let leakage: f64 = field
        .entries
        .iter()
        .filter(|(n, _)| *n != target)
        .map(|(n, h)| h.norm() / (half_width * (omega.phase_unchecked(n) - target_phase).abs()))
        .sum();

    let max_freq = phases
        .iter()
        .map(|p| (p.1 - target_phase).abs())
        .fold(0.0, f64::max);
    let panel = if max_freq > 0.0 {
        (std::f64::consts::FRAC_PI_2 / max_freq).min(1.0)
    } else {
        1.0
    };
    let panels = ((2.0 * half_width / panel).ceil() as usize).max(1);
    let integrand = |x: f64| field.synthesize(omega, x) * Complex64::cis(-target_phase * x);
    let coarse = quadrature::gauss_legendre(integrand, -half_width, half_width, panels);
    let fine = quadrature::gauss_legendre(integrand, -half_width, half_width, 2 * panels);
    let norm = 1.0 / (2.0 * half_width);
    Ok(Extraction {
        value: fine * norm,
        error_bound: leakage + (fine - coarse).norm() * norm,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn idx(v: &[i64]) -> LatticeIndex {
        LatticeIndex::new(v.to_vec())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_field(rng: &mut ChaCha8Rng, nu: usize, radius: u32) -> CoeffField {
        let mut entries = Vec::new();
        for n in box_indices(nu, radius) {
            if rng.random_bool(0.7) {
                entries.push((n, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
            }
        }
        CoeffField::from_entries(nu, radius, entries).unwrap()
    }

    #[test]
    fn phase_cube_examples() {
        let w1 = FrequencyVector::new(vec![1.0]).unwrap();
        assert_eq!(phase_cube(&idx(&[2]), &w1).unwrap(), 8.0);
        let w2 = FrequencyVector::new(vec![0.3, -1.7]).unwrap();
        assert_eq!(phase_cube(&idx(&[0, 0]), &w2).unwrap(), 0.0);
        assert!(matches!(
            phase_cube(&idx(&[1]), &w2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn phase_cube_matches_exact_rational() {
        use num_traits::ToPrimitive;
        let w = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).unwrap();
        let n = idx(&[1, 1]);
        let exact = phase_cube_exact(&n, &w).unwrap().to_f64().unwrap();
        let fast = phase_cube(&n, &w).unwrap();
        assert!((fast - exact).abs() <= 4.0 * f64::EPSILON * exact);
        assert!((fast - 14.071_067_811_865_47).abs() < 1e-12);
    }

    #[test]
    fn box_enumeration_is_lexicographic_and_complete() {
        let b = box_indices(2, 3);
        // |{n in Z^2 : |n|_1 <= 3}| = 2*3^2 + 2*3 + 1
        assert_eq!(b.len(), 25);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(box_indices(1, 4).len(), 9);
    }

    #[test]
    fn convolve_single_pair_and_zero() {
        let p = c(0.5, -1.0);
        let q = c(2.0, 0.25);
        let a = CoeffField::from_entries(1, 5, [(idx(&[1]), p)]).unwrap();
        let b = CoeffField::from_entries(1, 5, [(idx(&[2]), q)]).unwrap();
        let out = convolve(&a, &b, 5).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.get(&idx(&[3])), p * q);
        let zero = CoeffField::zero(1, 5);
        assert!(convolve(&a, &zero, 5).unwrap().is_empty());
    }

    #[test]
    fn convolve_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_field(&mut rng, 2, 3);
        let b = random_field(&mut rng, 2, 3);
        let out = convolve_with_floor(&a, &b, 6, 0.0).unwrap();
        // oracle: for every target n, scan the full square of candidate pairs
        for n in box_indices(2, 6) {
            let mut expect = c(0.0, 0.0);
            for m1 in box_indices(2, 3) {
                let m2 = &n - &m1;
                expect += a.get(&m1) * b.get(&m2);
            }
            assert!((out.get(&n) - expect).norm() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn convolve_dimension_mismatch() {
        assert!(convolve(&CoeffField::zero(1, 2), &CoeffField::zero(2, 2), 2).is_err());
    }

    #[test]
    fn convolution_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let a = random_field(&mut rng, 2, 3);
            let b = random_field(&mut rng, 2, 3);
            let ab = convolve(&a, &b, 4).unwrap();
            let ba = convolve(&b, &a, 4).unwrap();
            for n in box_indices(2, 4) {
                assert!((ab.get(&n) - ba.get(&n)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn convolution_respects_envelope_closure() {
        // Σ_m e^{-κ|m|} e^{-κ|n-m|} <= e^{-κ|n|/2} Σ_m e^{-κ|m|/2} = e^{-κ|n|/2} coth(κ/4)^ν
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let kappa = 1.3;
        for nu in 1..=2 {
            let env_field = |rng: &mut ChaCha8Rng, b: f64| {
                let entries: Vec<_> = box_indices(nu, 6)
                    .into_iter()
                    .map(|n| {
                        let r = b * (-kappa * n.l1() as f64).exp() * rng.random_range(0.0..1.0);
                        (n, Complex64::from_polar(r, rng.random_range(0.0..6.3)))
                    })
                    .collect();
                CoeffField::from_entries(nu, 6, entries)
                    .unwrap()
                    .with_envelope(Envelope::new(b, kappa).unwrap())
                    .unwrap()
            };
            let a = env_field(&mut rng, 0.7);
            let b = env_field(&mut rng, 1.9);
            let out = convolve(&a, &b, 12).unwrap();
            let constant = (1.0 / (kappa / 4.0).tanh()).powi(nu as i32);
            for (n, v) in out.iter() {
                let bound = 0.7 * 1.9 * constant * (-kappa * n.l1() as f64 / 2.0).exp();
                assert!(v.norm() <= bound, "n = {n}");
            }
        }
    }

    #[test]
    fn envelope_violation_is_rejected() {
        let f = CoeffField::from_entries(1, 2, [(idx(&[1]), c(0.5, 0.0))]).unwrap();
        assert!(f.clone().with_envelope(Envelope::new(1.0, 1.0).unwrap()).is_err());
        assert!(f.with_envelope(Envelope::new(2.0, 1.0).unwrap()).is_ok());
    }

    #[test]
    fn diophantine_examples() {
        let w = FrequencyVector::new(vec![1.0]).unwrap();
        let p = DiophantineParams::new(0.5, 1.0).unwrap();
        assert!(check_diophantine(&w, &p, 20).unwrap().pass);

        let w = FrequencyVector::new(vec![1.0, 1.0]).unwrap();
        let p = DiophantineParams::new(0.3, 1.2).unwrap();
        let r = check_diophantine(&w, &p, 2).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst_ratio, 0.0);
        assert_eq!(r.worst_n.iter().map(|k| k.abs()).collect::<Vec<_>>(), vec![1, 1]);
        assert_eq!(r.worst_n[0] + r.worst_n[1], 0);
    }

    #[test]
    fn diophantine_golden_ratio_matches_scan() {
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let w = FrequencyVector::new(vec![1.0, golden]).unwrap();
        let p = DiophantineParams::new(0.3, 1.2).unwrap();
        let r = check_diophantine(&w, &p, 50).unwrap();
        // independent scan over the square |n_j| <= 50 restricted to |n|_1 <= 50
        let mut worst = f64::INFINITY;
        for a in -50i64..=50 {
            for b in -50i64..=50 {
                let l1 = a.abs() + b.abs();
                if l1 == 0 || l1 > 50 {
                    continue;
                }
                let ratio = (a as f64 + b as f64 * golden).abs() * (l1 as f64).powf(1.2) / 0.3;
                worst = worst.min(ratio);
            }
        }
        assert_eq!(r.worst_ratio, worst);
        assert_eq!(r.pass, worst >= 1.0);
        assert_eq!(r.tested, 2 * 50 * 50 + 2 * 50);
    }

    #[test]
    fn hermitian_symmetrize_examples() {
        let f = CoeffField::from_entries(1, 3, [(idx(&[1]), c(1.0, 0.0))]).unwrap();
        let s = hermitian_symmetrize(&f);
        assert_eq!(s.get(&idx(&[1])), c(0.5, 0.0));
        assert_eq!(s.get(&idx(&[-1])), c(0.5, 0.0));
        assert_eq!(hermitian_symmetrize(&s), s);
    }

    #[test]
    fn symmetrized_field_synthesizes_real_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let w = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).unwrap();
        let s = hermitian_symmetrize(&random_field(&mut rng, 2, 3));
        assert!(s.is_hermitian(0.0));
        let scale: f64 = s.iter().map(|(_, v)| v.norm()).sum();
        for _ in 0..100 {
            let x = rng.random_range(-50.0..50.0);
            let u = s.synthesize(&w, x);
            assert!(u.im.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn extraction_self_term_and_orthogonality() {
        let w = FrequencyVector::new(vec![1.0]).unwrap();
        let f = CoeffField::from_entries(1, 3, [(idx(&[2]), c(1.0, 0.0))]).unwrap();
        let own = extract_coefficient(&f, &w, &idx(&[2]), 100.0).unwrap();
        assert!((own.value - 1.0).norm() < 1e-10);
        let other = extract_coefficient(&f, &w, &idx(&[1]), 100.0).unwrap();
        assert!(other.value.norm() <= other.error_bound);
        assert!(other.value.norm() < 1.0 / 100.0);
    }

    #[test]
    fn extraction_recovers_two_mode_amplitudes() {
        let w = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).unwrap();
        let p = c(0.3, -0.2);
        let q = c(-0.05, 0.4);
        let f = CoeffField::from_entries(2, 2, [(idx(&[1, 0]), p), (idx(&[0, 1]), q)]).unwrap();
        let ep = extract_coefficient(&f, &w, &idx(&[1, 0]), 1e4).unwrap();
        let eq = extract_coefficient(&f, &w, &idx(&[0, 1]), 1e4).unwrap();
        assert!((ep.value - p).norm() <= 1e-3);
        assert!((eq.value - q).norm() <= 1e-3);
        assert!((ep.value - p).norm() <= ep.error_bound);
        assert!((ep.gap - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn extraction_error_decays_like_inverse_window() {
        let w = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).unwrap();
        let f = CoeffField::from_entries(
            2,
            2,
            [(idx(&[1, 0]), c(1.0, 0.0)), (idx(&[0, 1]), c(0.0, 1.0))],
        )
        .unwrap();
        let errs: Vec<f64> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&a| {
                let e = extract_coefficient(&f, &w, &idx(&[1, 0]), a).unwrap();
                (e.value - 1.0).norm().max(e.error_bound)
            })
            .collect();
        for pair in errs.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!(ratio > 5.0 && ratio < 20.0, "ratio {ratio}");
        }
    }

    #[test]
    fn extraction_rejects_degenerate_phases() {
        let w = FrequencyVector::new(vec![1.0, 1.0]).unwrap();
        let f = CoeffField::from_entries(
            2,
            2,
            [(idx(&[1, 0]), c(1.0, 0.0)), (idx(&[0, 1]), c(1.0, 0.0))],
        )
        .unwrap();
        assert!(matches!(
            extract_coefficient(&f, &w, &idx(&[1, 0]), 10.0),
            Err(Error::DegeneratePhase { .. })
        ));
    }

    #[test]
    fn document_round_trip() {
        let w = FrequencyVector::new(vec![1.0, 0.5]).unwrap();
        let f = CoeffField::from_entries(
            2,
            2,
            [(idx(&[1, -1]), c(0.25, 0.5)), (idx(&[-1, 0]), c(-1.0, 0.0))],
        )
        .unwrap();
        let doc = f.to_document(&w);
        assert_eq!(doc.entries[0].n, vec![-1, 0]);
        let json = serde_json::to_string(&doc).unwrap();
        let back: FieldDocument = serde_json::from_str(&json).unwrap();
        let (g, w2) = CoeffField::from_document(&back).unwrap();
        assert_eq!(g, f);
        assert_eq!(w2, w);
    }

    proptest! {
        #[test]
        fn convolution_is_bilinear(
            s in -2.0f64..2.0,
            vals in proptest::collection::vec(-1.0f64..1.0, 15),
        ) {
            let mk = |off: usize| {
                CoeffField::from_entries(
                    1,
                    2,
                    (0..5).map(|i| (idx(&[i as i64 - 2]), c(vals[off + i], vals[(off + i + 7) % 15]))),
                )
                .unwrap()
            };
            let (a, b, d) = (mk(0), mk(5), mk(10));
            let sum = CoeffField::from_entries(
                1,
                2,
                box_indices(1, 2).into_iter().map(|n| {
                    let v = a.get(&n) * s + d.get(&n);
                    (n, v)
                }),
            )
            .unwrap();
            let lhs = convolve_with_floor(&sum, &b, 4, 0.0).unwrap();
            let ab = convolve_with_floor(&a, &b, 4, 0.0).unwrap();
            let db = convolve_with_floor(&d, &b, 4, 0.0).unwrap();
            for n in box_indices(1, 4) {
                let rhs = ab.get(&n) * s + db.get(&n);
                prop_assert!((lhs.get(&n) - rhs).norm() < 1e-12);
            }
        }
    }
}
