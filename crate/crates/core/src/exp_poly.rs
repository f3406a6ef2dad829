//! Exponential polynomials `Σ a_j t^{p_j} e^{iθ_j t}` in closed form.
//!
//! Values are kept canonical: sorted by `(θ, p)`, phases within `merge_tol`
//! merged, no zero coefficients. Summation always follows the canonical order.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub re: f64,
    pub im: f64,
    pub power: u32,
    pub phase: f64,
}

impl Term {
    pub fn new(coeff: Complex64, power: u32, phase: f64) -> Self {
        Term {
            re: coeff.re,
            im: coeff.im,
            power,
            phase,
        }
    }

    pub fn coeff(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    fn eval(&self, t: f64) -> Complex64 {
        self.coeff() * t.powi(self.power as i32) * Complex64::cis(self.phase * t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyOptions {
    /// Relative tolerance for merging phases.
    pub merge_tol: f64,
    /// Absolute `|Δ|` below which an outer integral is treated as resonant.
    pub resonance_tol: f64,
    /// Upper end of the time interval on which values are needed.
    pub horizon: f64,
    /// `|Δ|·max(1, horizon)` below which the outer integral is expanded as a
    /// Taylor series around the resonant phase instead of by parts. By parts
    /// loses about `p!/|Δ|^{p+1}` ulps of `|a|`, so small `|Δ|` must not use it.
    pub taylor_threshold: f64,
    pub max_terms: usize,
}

impl Default for ExpPolyOptions {
    fn default() -> Self {
        ExpPolyOptions {
            merge_tol: 1e-12,
            resonance_tol: 1e-9,
            horizon: 1.0,
            taylor_threshold: 0.5,
            max_terms: 100_000,
        }
    }
}

impl ExpPolyOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.merge_tol, self.resonance_tol, self.horizon, self.taylor_threshold]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !ok || self.max_terms == 0 {
            return Err(Error::invalid("exp_poly", "tolerances, horizon and max_terms must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    pub fn constant(a: Complex64) -> Self {
        Self::monomial(a, 0, 0.0)
    }

    /// `a t^p e^{iθt}`.
    pub fn monomial(a: Complex64, power: u32, phase: f64) -> Self {
        Self::from_terms(vec![Term::new(a, power, phase)], 1e-12)
    }

    /// Canonicalizes an arbitrary term list.
    pub fn from_terms(terms: Vec<Term>, merge_tol: f64) -> Self {
        let mut terms = terms;
        terms.retain(|t| t.re != 0.0 || t.im != 0.0);
        terms.sort_by(|a, b| a.phase.total_cmp(&b.phase));
        let scale = terms.iter().map(|t| t.phase.abs()).fold(1.0, f64::max);
        let tol = merge_tol * scale;

        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        let mut start = 0;
        while start < terms.len() {
            let anchor = terms[start].phase;
            let mut end = start + 1;
            while end < terms.len() && terms[end].phase - anchor <= tol {
                end += 1;
            }
            let group = &mut terms[start..end];
            group.sort_by_key(|t| t.power);
            let mut i = 0;
            while i < group.len() {
                let power = group[i].power;
                let mut acc = Complex64::new(0.0, 0.0);
                while i < group.len() && group[i].power == power {
                    acc += group[i].coeff();
                    i += 1;
                }
                if acc != Complex64::new(0.0, 0.0) {
                    out.push(Term::new(acc, power, anchor));
                }
            }
            start = end;
        }
        ExpPoly { terms: out }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn max_power(&self) -> u32 {
        self.terms.iter().map(|t| t.power).max().unwrap_or(0)
    }

    /// `Σ a_j t^{p_j} e^{iθ_j t}` in canonical order.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    /// `Σ |a_j| T^{p_j}`, an upper bound for `sup_{[0,T]} |f|`.
    pub fn abs_bound(&self, horizon: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff().norm() * horizon.powi(t.power as i32))
            .sum()
    }

    fn guard(self, opts: &ExpPolyOptions) -> Result<Self> {
        if self.terms.len() > opts.max_terms {
            return Err(Error::TermBudgetExceeded {
                terms: self.terms.len(),
                limit: opts.max_terms,
            });
        }
        Ok(self)
    }

    pub fn add(&self, other: &ExpPoly, opts: &ExpPolyOptions) -> Result<ExpPoly> {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        ExpPoly::from_terms(terms, opts.merge_tol).guard(opts)
    }

    pub fn sub(&self, other: &ExpPoly, opts: &ExpPolyOptions) -> Result<ExpPoly> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)), opts)
    }

    pub fn scale(&self, s: Complex64) -> ExpPoly {
        if s == Complex64::new(0.0, 0.0) {
            return ExpPoly::zero();
        }
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.coeff() * s, t.power, t.phase))
                .filter(|t| t.re != 0.0 || t.im != 0.0)
                .collect(),
        }
    }

    /// Sum of a sequence, canonicalized once at the end.
    pub fn sum<'a, I>(items: I, opts: &ExpPolyOptions) -> Result<ExpPoly>
    where
        I: IntoIterator<Item = &'a ExpPoly>,
    {
        let terms: Vec<Term> = items.into_iter().flat_map(|p| p.terms.iter().copied()).collect();
        ExpPoly::from_terms(terms, opts.merge_tol).guard(opts)
    }

    /// Termwise product.
    pub fn multiply(&self, other: &ExpPoly, opts: &ExpPolyOptions) -> Result<ExpPoly> {
        let raw = self.product_terms(other);
        ExpPoly::from_terms(raw, opts.merge_tol).guard(opts)
    }

    pub(crate) fn product_terms(&self, other: &ExpPoly) -> Vec<Term> {
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        self.push_product_terms(other, &mut raw);
        raw
    }

    /// Appends the raw (uncanonicalized) termwise product to `out`.
    pub(crate) fn push_product_terms(&self, other: &ExpPoly, out: &mut Vec<Term>) {
        for a in &self.terms {
            for b in &other.terms {
                out.push(Term::new(a.coeff() * b.coeff(), a.power + b.power, a.phase + b.phase));
            }
        }
    }

    /// `d/dt`, termwise: `a t^p e^{iθt} ↦ a (p t^{p-1} + iθ t^p) e^{iθt}`.
    pub fn derivative_t(&self) -> ExpPoly {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.power > 0 {
                terms.push(Term::new(t.coeff() * t.power as f64, t.power - 1, t.phase));
            }
            if t.phase != 0.0 {
                terms.push(Term::new(
                    t.coeff() * Complex64::new(0.0, t.phase),
                    t.power,
                    t.phase,
                ));
            }
        }
        ExpPoly::from_terms(terms, 1e-12)
    }

    /// `F(t) = ∫_0^t e^{iθ0(t-τ)} f(τ) dτ` in closed form.
    ///
    /// Per term `a τ^p e^{iφτ}` with `Δ = φ - θ0`:
    /// * `|Δ| <= resonance_tol`: `a t^{p+1}/(p+1) e^{iθ0 t}`;
    /// * `|Δ|·max(1, horizon) <= taylor_threshold`: `a e^{iθ0 t} Σ_j (iΔ)^j/j! t^{p+j+1}/(p+j+1)`,
    ///   truncated once the remainder on `[0, horizon]` is below `1e-17` relative;
    /// * otherwise by parts: `a [e^{iφt} Σ_q b_q t^q - b_0 e^{iθ0 t}]` with
    ///   `b_p = 1/(iΔ)`, `b_q = -(q+1) b_{q+1}/(iΔ)`.
    pub fn outer_integral(&self, theta0: f64, opts: &ExpPolyOptions) -> Result<ExpPoly> {
        let mut raw = Vec::new();
        for term in &self.terms {
            outer_integral_term(term, theta0, opts, &mut raw);
        }
        ExpPoly::from_terms(raw, opts.merge_tol).guard(opts)
    }

    /// Drops terms whose size on `[0, horizon]` is below `floor`.
    pub fn pruned(mut self, floor: f64, horizon: f64) -> ExpPoly {
        let h = horizon.max(1.0);
        self.terms
            .retain(|t| t.coeff().norm() * h.powi(t.power as i32) >= floor);
        self
    }

    /// Debug dump, one `re,im,power,phase` line per term.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,power,phase\n");
        for t in &self.terms {
            let _ = writeln!(s, "{},{},{},{}", t.re, t.im, t.power, t.phase);
        }
        s
    }
}

/// Value at `t` of the outer integral of a raw term list, skipping
/// canonicalization. `scratch` is reused between calls.
pub(crate) fn outer_integral_value(
    terms: &[Term],
    theta0: f64,
    t: f64,
    opts: &ExpPolyOptions,
    scratch: &mut Vec<Term>,
) -> Complex64 {
    scratch.clear();
    for term in terms {
        outer_integral_term(term, theta0, opts, scratch);
    }
    scratch.iter().map(|x| x.eval(t)).sum()
}

fn outer_integral_term(term: &Term, theta0: f64, opts: &ExpPolyOptions, out: &mut Vec<Term>) {
    let a = term.coeff();
    let p = term.power;
    let delta = term.phase - theta0;
    let x = delta.abs() * opts.horizon;

    if delta.abs() <= opts.resonance_tol {
        out.push(Term::new(a / (p + 1) as f64, p + 1, theta0));
        return;
    }

    if delta.abs() * opts.horizon.max(1.0) <= opts.taylor_threshold {
        let i_delta = Complex64::new(0.0, delta);
        let mut factor = Complex64::new(1.0, 0.0); // (iΔ)^j / j!
        let mut remainder = 1.0; // x^{j+1}/(j+1)!
        for j in 0u32..64 {
            out.push(Term::new(a * factor / (p + j + 1) as f64, p + j + 1, theta0));
            remainder *= x / (j + 1) as f64;
            if remainder <= 1e-17 {
                break;
            }
            factor *= i_delta / (j + 1) as f64;
        }
        return;
    }

    let inv = Complex64::new(0.0, delta).inv();
    let mut b = vec![Complex64::new(0.0, 0.0); p as usize + 1];
    b[p as usize] = inv;
    for q in (0..p as usize).rev() {
        b[q] = -(q as f64 + 1.0) * b[q + 1] * inv;
    }
    for (q, bq) in b.iter().enumerate() {
        out.push(Term::new(a * bq, q as u32, term.phase));
    }
    out.push(Term::new(-a * b[0], 0, theta0));
}
