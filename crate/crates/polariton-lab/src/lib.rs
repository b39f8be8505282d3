//! Simulation toolkit for a single four-level atom strongly coupled to a
//! driven cavity mode.
//!
//! The crate computes, in a frame rotating at the cavity frequency:
//!
//! - exact dressed states of the undriven atom-cavity Hamiltonian, manifold by
//!   manifold, via closed-form quartic roots with a numeric fallback
//!   ([`dressed`]);
//! - effective Rabi-frequency tables and damping matrices in the polariton
//!   basis, polariton ladder operators, and their commutator identities
//!   ([`polariton`]);
//! - the reduced two-level model of the driven ground/dark-state pair and its
//!   dynamic Stark splitting ([`stark`]);
//! - steady states and fluorescence spectra of the full Lindblad master
//!   equation via the quantum regression theorem ([`lindblad`],
//!   [`fluorescence`]), with Lorentzian peak detection and transition
//!   identification ([`peaks`]).
//!
//! All frequencies and rates are dimensionless multiples of one reference
//! rate chosen by the caller (the conventional choice is the cavity decay
//! rate). The only dimensional entry point is
//! [`params::drive_amplitude_from_power`].

pub mod basis;
pub mod config;
pub mod dressed;
pub mod fluorescence;
pub mod linalg;
pub mod lindblad;
pub mod operators;
pub mod params;
pub mod peaks;
pub mod polariton;
pub mod runner;
pub mod stark;

pub use num_complex::Complex64 as C64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("degenerate steady state: {0}")]
    Degenerate(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
