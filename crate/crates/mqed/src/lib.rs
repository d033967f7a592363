//! Second-order effective Hamiltonians of nonrelativistic (molecular) QED.
//!
//! Numerical machinery for atom–field problems in the multipolar coupling
//! scheme within the dipole approximation: frequency-dependent atomic
//! response tensors (the pole-free β function and the dynamic
//! polarizability α), off-energy-shell transformation matrix elements on
//! finite mode bases, and the energy-shift calculators built on top of
//! them — regularized vacuum (Lamb-type) shifts, the atom–surface
//! Casimir–Polder potential in front of a perfectly conducting plane, and
//! two-/three-body dispersion interactions, both as discrete mode sums and
//! in the free-space continuum limit.
//!
//! Everything is validated against independent oracles: brute-force
//! Rayleigh–Schrödinger perturbation theory (up to fourth order, with a
//! multi-atom graded variant) and exact diagonalization on truncated Fock
//! bases.
//!
//! Internal unit system is Gaussian-cgs; "model units" (ħ = c = 1 and a
//! reference energy) are available for dimensionless work.

pub mod cli;
pub mod discrete;
pub mod error;
pub mod manifest;
pub mod model;
pub mod modes;
pub mod oracle;
pub mod response;
pub mod shifts;

pub use error::{MqedError, Result};
