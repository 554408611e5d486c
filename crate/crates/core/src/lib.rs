//! Numerical laboratory for coherent states on truncated Fock spaces.
//!
//! The crate compares two families of phase-space coordinate changes:
//! holomorphic ones, under which the Fock vacuum and the coherent states are
//! shared by every observer, and nonholomorphic ones, under which they are
//! not. Everything here is pure computation over `alloc`; file formats and
//! the command-line runner live in the `cohatlas` crate.
//!
//! Module map:
//!
//! * [`fock`]: truncated number basis, ladder and quadrature operators.
//! * [`coherent`]: coherent vectors, eigen-residuals, overlaps and the
//!   quadrature resolution of unity.
//! * [`phase_space`]: polynomial maps in `(w, w̄)`, exact `∂̄` classification,
//!   canonicity and almost complex structures.
//! * [`quantize`]: normal-ordered quantization and vacuum diagnostics.
//! * [`atlas`]: chart atlases, global/local coherence verdicts and the
//!   duality-candidate filter.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod atlas;
pub mod coherent;
mod error;
pub mod fock;
pub mod linalg;
pub mod phase_space;
pub mod quadrature;
pub mod quantize;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
