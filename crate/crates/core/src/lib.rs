//! Green functions of flat tori and the critical-point structure they carry.
//!
//! Every torus is normalized to the lattice `Z + Z tau` with `Im tau > 0`.
//! Evaluation is layered: [`theta`] sums the Jacobi theta series with
//! quasi-period reduction, [`weier`] builds the Weierstrass functions on top
//! of it, [`green`] assembles the Green function and its derivatives, and
//! [`critical`], [`moduli`] and [`mfe`] answer the geometric questions:
//! how many critical points a torus has, where in moduli space that number
//! changes, and which explicit mean field solutions exist.

pub mod critical;
pub mod error;
pub mod green;
pub mod lattice;
pub mod mfe;
pub mod moduli;
pub mod quad;
pub mod theta;
pub mod weier;

pub use error::{Error, Result};
pub use lattice::{make_torus, reduce_modulus, wrap_point, LatticeCoords, Sl2z, Torus};
pub use num_complex::Complex64;
pub use theta::LogComplex;
