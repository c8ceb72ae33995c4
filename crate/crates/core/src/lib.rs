//! Symmetric logarithmic derivatives (SLD) and quantum Fisher information (QFI)
//! for parametrized density matrices.
//!
//! The crate is `no_std` with `alloc`. Everything here is a pure function of its
//! inputs: validated density matrices, their spectra, several independent SLD
//! routes (spectral, Sylvester/Kronecker, integral quadrature, anti-commutator
//! series, commuting and quadratic-class closed forms), QFI scalars and
//! matrices, depolarizing-channel and block-diagonal helpers, the unitary
//! effective-SLD frame, and a Monte-Carlo Cramér–Rao harness.
//!
//! Parametrized families are described by [`model::ModelSpec`], whose entries
//! are small arithmetic expressions ([`expr`]) evaluated with forward-mode
//! dual numbers ([`dual`]) so that `∂ρ/∂θ` is exact to round-off.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channels;
pub mod density;
pub mod dual;
pub mod error;
pub mod estimation;
pub mod expr;
pub mod linalg;
pub mod model;
pub mod qfi;
pub mod random;
pub mod sld;
pub mod unitary;

pub use density::{DensityMatrix, Spectrum, Tolerances};
pub use error::{Error, Result};
pub use linalg::{c64, ComplexMatrix};
pub use model::{ModelSpec, ParameterPoint};
pub use sld::{Gauge, SldOperator, SolverOptions};
