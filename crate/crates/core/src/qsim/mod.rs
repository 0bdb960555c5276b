//! Statevector simulation of quantum query algorithms.

mod bht;
mod bitdrop;
mod domain;
mod grover;
mod oracle;
mod state;
mod subset;

pub use bht::*;
pub use bitdrop::*;
pub use domain::{round_up_domain, rounded_domain_size};
pub use grover::{grover_search, grover_success_probability, GroverOutcome};
pub use oracle::*;
pub use state::*;
pub use subset::*;
