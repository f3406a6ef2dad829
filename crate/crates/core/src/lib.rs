//! Quasi-periodic KdV: Picard iteration on the Fourier lattice, exact
//! exponential-polynomial time dependence, and the machinery used to check it.

pub mod combinatorics;
pub mod error;
pub mod exp_poly;
pub mod generators;
pub mod lattice;
pub mod picard;
pub mod quadrature;
pub mod rk4;
pub mod spectral;
pub mod tree;
pub mod uniqueness;

pub use error::{Error, Result};
pub use exp_poly::{ExpPoly, ExpPolyOptions, Term};
pub use lattice::{CoeffField, Envelope, FrequencyVector, LatticeIndex};
