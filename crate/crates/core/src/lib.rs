//! Coupled-cluster engine for tiny relativistic model systems with QED
//! channels (Breit, Lamb, hyperfine, electron-positron pairs), thermal photon
//! couplings and a brute-force Fock-space oracle.
//!
//! Everything works in atomic units. Level energies exclude the rest energy.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cc;
pub mod fock;
pub mod model;
pub mod mrcc;
pub mod oracle_h2;
pub mod photon;
pub mod qed;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for one-body integrals and CI matrices.
pub type CMatrix = nalgebra::DMatrix<C64>;
