//! Simulator and parameter-engineering toolkit for a polaritonic
//! two-component Bose-Hubbard model hosted in an array of coupled cavities.
//!
//! The crate maps microscopic cavity-QED parameters onto the coefficients of
//! an effective two-species lattice model, checks every inequality the
//! mapping relies on, and verifies the effective model against exact
//! propagation of the bosonized atom-cavity model at desk scale. It also
//! simulates the species-selective number-statistics measurement protocol on
//! an exact few-atom system.

pub mod evolve;
pub mod fock;
pub mod models;
pub mod params;
pub mod sweep;
