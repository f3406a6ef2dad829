//! Seeded initial-data families.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{box_indices, CoeffField, Envelope, LatticeIndex};

const MODULE: &str = "generators";

/// Hermitian data on the box with `|c(n)| <= b0 e^{-κ|n|}`, drawn from a
/// ChaCha8 stream in lexicographic index order. The envelope is attached.
pub fn random_hermitian(nu: usize, radius: u32, b0: f64, kappa: f64, seed: u64) -> Result<CoeffField> {
    if nu == 0 {
        return Err(Error::invalid(MODULE, "nu must be >= 1"));
    }
    let env = Envelope::new(b0, kappa)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = CoeffField::zero(nu, radius);
    for n in box_indices(nu, radius) {
        let neg = -&n;
        if n < neg {
            continue;
        }
        let bound = env.bound(&n);
        if n.is_zero() {
            field.insert(n, Complex64::new(bound * rng.random_range(-1.0..1.0), 0.0))?;
        } else {
            let v = Complex64::from_polar(
                bound * rng.random_range(0.0..1.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            field.insert(neg, v.conj())?;
            field.insert(n, v)?;
        }
    }
    field.with_envelope(env)
}

/// `u0(x) = amplitude · cos(ω_j x)`, i.e. `c(±e_j) = amplitude/2`.
pub fn cosine(nu: usize, radius: u32, component: usize, amplitude: f64, envelope: Envelope) -> Result<CoeffField> {
    if component >= nu {
        return Err(Error::invalid(
            MODULE,
            format!("component {component} out of range for nu = {nu}"),
        ));
    }
    if radius == 0 {
        return Err(Error::invalid(MODULE, "cosine data needs box radius >= 1"));
    }
    let mut e = vec![0i64; nu];
    e[component] = 1;
    let plus = LatticeIndex::new(e);
    let half = Complex64::new(amplitude / 2.0, 0.0);
    CoeffField::from_entries(nu, radius, [(-&plus, half), (plus, half)])?.with_envelope(envelope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_data_is_hermitian_and_enveloped() {
        let c = random_hermitian(2, 4, 0.1, 10f64.ln(), 7).unwrap();
        assert_eq!(c.hermitian_defect(), 0.0);
        let env = c.envelope().unwrap();
        assert!(c.iter().all(|(n, v)| env.admits(n, *v)));
        assert_eq!(c, random_hermitian(2, 4, 0.1, 10f64.ln(), 7).unwrap());
        assert_ne!(c, random_hermitian(2, 4, 0.1, 10f64.ln(), 8).unwrap());
    }

    #[test]
    fn cosine_data() {
        let c = cosine(1, 8, 0, 0.2, Envelope::new(1.0, 10f64.ln()).unwrap()).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c.get(&LatticeIndex::new(vec![1])).re - 0.1).abs() < 1e-17);
        assert!(cosine(1, 8, 1, 0.2, Envelope::new(1.0, 1.0).unwrap()).is_err());
    }
}
