//! Monte Carlo estimates, scaling sweeps and the classical baseline.

mod records;
mod stats;
mod strategy;
mod sweep;

pub use records::*;
pub use stats::*;
pub use strategy::{
    estimate_advantage, estimate_success, run_strategy, summarize_advantage, AdvantageEstimate, Strategy, SuccessEstimate,
    TrialOutcome,
};
pub use sweep::*;
