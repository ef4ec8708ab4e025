//! Circuit-to-Hamiltonian compilation, Schrieffer-Wolff analysis and
//! certificates for approximate Hamiltonian simulation, on dense matrices.

pub mod config;
pub mod error;
pub mod operators;

pub use config::Constants;
pub use error::{Error, Result};
pub mod circuits;
pub mod kitaev;
pub mod schrieffer_wolff;
pub mod simulation;
pub mod universality;
