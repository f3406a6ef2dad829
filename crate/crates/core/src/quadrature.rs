//! Composite Gauss–Legendre quadrature for complex-valued integrands.
//!
//! Used for Bohr-mean coefficient extraction and as an integration oracle
//! that shares nothing with the closed-form exponential-polynomial path.

use num_complex::Complex64;

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Integral of `f` over `[a, b]` with `panels` equal 8-point Gauss–Legendre panels.
pub fn gauss_legendre<F>(f: F, a: f64, b: f64, panels: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            acc += (f(mid - half * x) + f(mid + half * x)) * *w;
        }
        total += acc * half;
    }
    total
}

/// Doubles the panel count until two successive estimates agree to `tol`
/// (relative to `max(1, |I|)`). Returns the estimate and the last change.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, tol: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let mut panels = 1usize;
    let mut prev = gauss_legendre(&f, a, b, panels);
    loop {
        panels *= 2;
        let next = gauss_legendre(&f, a, b, panels);
        let change = (next - prev).norm();
        if change <= tol * next.norm().max(1.0) || panels >= 1 << 20 {
            return (next, change);
        }
        prev = next;
    }
}
