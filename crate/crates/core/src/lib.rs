//! Measurement-interpreted open quantum systems.
//!
//! Two model families share a dense numeric core: adiabatic transport of an
//! electron along a quantum-dot chain (CTAP) under point-contact and
//! two-level-fluctuator dephasing, and one-dimensional collisional quantum
//! Brownian motion built from Gaussian wave-packet collisions, with the
//! classical jump process as an oracle. Natural units ħ = k_B = 1.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod collision;
pub mod ctap;
pub mod error;
pub mod gas;
pub mod measurement;
pub mod numeric;
pub mod qbm;
pub mod qpc;
pub mod rng;
pub mod tls;
pub mod wigner;

pub use error::{Error, Result};

/// Library version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Double-precision aliases of the generic numeric types.
pub type StateVector = numeric::StateVector<f64>;
pub type DensityOperator = numeric::DensityOperator<f64>;
pub type PhaseSpaceGrid = numeric::PhaseSpaceGrid<f64>;
pub type PositionGrid = numeric::PositionGrid<f64>;
pub type CMatrix = numeric::CMatrix<f64>;
pub type C64 = num_complex::Complex<f64>;
