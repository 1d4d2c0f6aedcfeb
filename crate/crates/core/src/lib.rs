//! Reduced-order model of thermally tuned buckled-drumhead phononic waveguides.
//!
//! Each unit cell is a pre-buckled drumhead with a translational and a
//! rotational degree of freedom. Temperature sets the residual in-plane strain,
//! which moves the buckled equilibrium and with it the linearized stiffness.
//! The crate covers the isolated cell, the infinite periodic lattice, finite
//! disordered waveguides, their normal modes and the transient response to a
//! tap on the first cell.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod cli;
pub mod cell;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod modal;
pub mod rng;

pub use error::{Error, Result};

/// Angular frequency in rad/s to cyclic frequency in MHz.
pub fn omega_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI * 1e6)
}
