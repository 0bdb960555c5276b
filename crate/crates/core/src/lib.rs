//! A desk-scale laboratory for quantum collision finding and set equality.
//!
//! * [`oracles`] samples the structured function distributions.
//! * [`exact`] certifies their polynomial structure by exact enumeration.
//! * [`qsim`] simulates query algorithms on explicit statevectors.
//! * [`harness`] runs Monte Carlo estimates, sweeps and envelope fits.
//! * [`plot`] renders sweep reports as deterministic SVG.

pub mod error;
pub mod exact;
pub mod harness;
pub mod oracles;
pub mod plot;
pub mod qsim;
pub mod rng;

pub use error::{Error, Result};
