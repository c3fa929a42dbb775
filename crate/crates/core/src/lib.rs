//! Multiphoton ladder algebras for exactly solvable one-dimensional Hamiltonians
//! and their k-th order supersymmetric partners.
//!
//! The crate is organised around the eigenvalue function `E(n)` of the initial
//! Hamiltonian `H0`:
//!
//! * [`spectrum`] defines the solvable models and their gap functions.
//! * [`ladder`] gives the intrinsic and multiphoton ladder actions on `H0` eigenstates.
//! * [`susy`] carries the same structure over to the partner `Hk`.
//! * [`coherent`] builds Barut-Girardello multiphoton coherent states.
//! * [`uncertainty`] evaluates quadrature uncertainty products on them.
//! * [`oracle`] recomputes everything from truncated dense matrices.
//! * [`position_space`] realises the Darboux chain on a uniform grid.
//! * [`cli`] is the configuration-driven front end used by the binary.
//!
//! Units are `hbar = m = omega = 1` throughout.

pub mod cli;
pub mod coherent;
pub mod error;
pub mod ladder;
pub mod oracle;
pub mod position_space;
pub mod spectrum;
pub mod susy;
pub mod uncertainty;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
