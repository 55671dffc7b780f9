//! Steady-state simulation of weakly driven, dissipative networks of Kerr
//! modes joined by complex (flux-carrying) couplings.
//!
//! The usual pipeline is [`model::NetworkModel`] → [`fockspace::build_basis`]
//! → [`model::build_hamiltonian`] → [`dynamics::build_liouvillian`] →
//! [`dynamics::steady_state`] → [`observables`].

pub mod cli;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod fockspace;
pub mod model;
pub mod observables;

pub use error::{Error, Result};
