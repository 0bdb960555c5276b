use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stats::{advantage_ci95, RateEstimate};
use crate::error::{Error, Result};
use crate::oracles::{first_collision, sample_table, DistributionSpec, FunctionTable};
use crate::qsim::{bht_budgeted, MarkingMode, OracleGate, SimulatorCaps};
use crate::rng::{child_seed, stream};

/// Query strategies with a fixed budget `q`. Each one doubles as a
/// distinguisher through its accept bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Budgeted BHT; accepts iff it returns a verified collision.
    CollisionCheck,
    /// `q` distinct uniformly random classical queries; accepts iff two
    /// of them collide.
    ClassicalBirthday,
    /// `q` distinct random classical queries; accepts iff they show at
    /// most `max(1, ⌊q/2⌋)` distinct images.
    ImageCount,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::CollisionCheck, Strategy::ClassicalBirthday, Strategy::ImageCount];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::CollisionCheck => "collision-check",
            Strategy::ClassicalBirthday => "classical-birthday",
            Strategy::ImageCount => "image-count",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub accept: bool,
    /// A verified collision was produced.
    pub found: bool,
    pub queries: u64,
}

/// Runs one strategy against one table.
pub fn run_strategy(strategy: Strategy, table: &FunctionTable, q: usize, caps: &SimulatorCaps, rng: &mut impl Rng) -> Result<TrialOutcome> {
    match strategy {
        Strategy::CollisionCheck => {
            let out = bht_budgeted(&OracleGate::standard(table.clone()), q, MarkingMode::Compressed, caps, rng)?;
            Ok(TrialOutcome { accept: out.found(), found: out.found(), queries: out.queries })
        }
        Strategy::ClassicalBirthday | Strategy::ImageCount => {
            let k = q.min(table.domain_size());
            let images: Vec<usize> = index::sample(rng, table.domain_size(), k).iter().map(|x| table.eval(x)).collect();
            let found = first_collision(&images).is_some();
            let accept = if strategy == Strategy::ImageCount {
                images.iter().collect::<HashSet<_>>().len() <= (k / 2).max(1)
            } else {
                found
            };
            Ok(TrialOutcome { accept, found, queries: k as u64 })
        }
    }
}

/// Evaluates `trial(t)` for `t in 0..trials`, in parallel when enabled.
/// Output order always follows `t`.
pub(crate) fn run_trials<T, F>(trials: u64, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(trial).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(trial).collect()
    }
}

/// Trial `t` draws its instance from `spec` reseeded with a child of
/// `seed`, and its strategy randomness from a separate stream.
fn outcomes(strategy: Strategy, spec: &DistributionSpec, q: usize, trials: u64, seed: u64, caps: &SimulatorCaps) -> Result<Vec<TrialOutcome>> {
    spec.validate()?;
    run_trials(trials, |t| {
        let table = sample_table(&spec.with_seed(child_seed(seed, "instance", t)))?;
        run_strategy(strategy, &table, q, caps, &mut stream(seed, "strategy", t))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub strategy: Strategy,
    pub spec: DistributionSpec,
    pub q: usize,
    pub seed: u64,
    pub estimate: RateEstimate,
    pub total_queries: u64,
}

/// Fraction of trials in which `strategy` produces a verified collision.
pub fn estimate_success(strategy: Strategy, spec: &DistributionSpec, q: usize, trials: u64, seed: u64, caps: &SimulatorCaps) -> Result<SuccessEstimate> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let outs = outcomes(strategy, spec, q, trials, seed, caps)?;
    let successes = outs.iter().filter(|o| o.found).count() as u64;
    Ok(SuccessEstimate {
        strategy,
        spec: *spec,
        q,
        seed,
        estimate: RateEstimate::new(successes, trials),
        total_queries: outs.iter().map(|o| o.queries).sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageEstimate {
    /// `accept_a − accept_b`.
    pub mean: f64,
    pub trials: u64,
    pub ci95_halfwidth: f64,
    pub distinguisher_name: String,
    pub pair: (DistributionSpec, DistributionSpec),
    pub accept_a: RateEstimate,
    pub accept_b: RateEstimate,
    pub q: usize,
    pub seed: u64,
    pub total_queries: u64,
    /// Per-trial accept bits, kept for post-processing checks.
    #[serde(skip)]
    pub transcripts: (Vec<bool>, Vec<bool>),
}

impl AdvantageEstimate {
    /// Two-sided advantage `|accept_a − accept_b|`.
    pub fn advantage(&self) -> f64 {
        self.mean.abs()
    }
}

/// Runs `distinguisher` on `trials` samples from each side of `pair`.
pub fn estimate_advantage(
    pair: (&DistributionSpec, &DistributionSpec),
    distinguisher: Strategy,
    q: usize,
    trials: u64,
    seed: u64,
    caps: &SimulatorCaps,
) -> Result<AdvantageEstimate> {
    let (a, b) = pair;
    if (a.m, a.n) != (b.m, b.n) {
        return Err(Error::Dimension(format!("pair has ({}, {}) vs ({}, {})", a.m, a.n, b.m, b.n)));
    }
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let oa = outcomes(distinguisher, a, q, trials, child_seed(seed, "side", 0), caps)?;
    let ob = outcomes(distinguisher, b, q, trials, child_seed(seed, "side", 1), caps)?;
    let ta: Vec<bool> = oa.iter().map(|o| o.accept).collect();
    let tb: Vec<bool> = ob.iter().map(|o| o.accept).collect();
    let mut e = summarize_advantage(distinguisher.name(), (*a, *b), q, seed, ta, tb);
    e.total_queries = oa.iter().chain(&ob).map(|o| o.queries).sum();
    Ok(e)
}

/// Builds the estimate from raw accept bits.
pub fn summarize_advantage(
    name: &str,
    pair: (DistributionSpec, DistributionSpec),
    q: usize,
    seed: u64,
    ta: Vec<bool>,
    tb: Vec<bool>,
) -> AdvantageEstimate {
    let count = |v: &[bool]| v.iter().filter(|&&b| b).count() as u64;
    let (sa, sb) = (count(&ta), count(&tb));
    let (na, nb) = (ta.len() as u64, tb.len() as u64);
    let accept_a = RateEstimate::new(sa, na);
    let accept_b = RateEstimate::new(sb, nb);
    AdvantageEstimate {
        mean: accept_a.rate - accept_b.rate,
        trials: na.min(nb),
        ci95_halfwidth: advantage_ci95(sa, na, sb, nb),
        distinguisher_name: name.to_string(),
        pair,
        accept_a,
        accept_b,
        q,
        seed,
        total_queries: 0,
        transcripts: (ta, tb),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::DistributionKind;

    fn caps() -> SimulatorCaps {
        SimulatorCaps::default()
    }

    #[test]
    fn injective_spec_never_succeeds() {
        let spec = DistributionSpec::new(DistributionKind::Permutation, 64, 64, 0);
        for s in Strategy::ALL {
            let e = estimate_success(s, &spec, 9, 50, 1, &caps()).unwrap();
            assert_eq!(e.estimate.successes, 0);
        }
    }

    #[test]
    fn constant_function_is_caught_with_two_queries() {
        let spec = DistributionSpec::new(DistributionKind::SmallRange { r: 1 }, 32, 32, 0);
        let e = estimate_success(Strategy::ClassicalBirthday, &spec, 2, 40, 1, &caps()).unwrap();
        assert_eq!(e.estimate.rate, 1.0);
    }

    #[test]
    fn estimates_are_reproducible() {
        let spec = DistributionSpec::new(DistributionKind::Uniform, 128, 128, 0);
        let a = estimate_success(Strategy::CollisionCheck, &spec, 7, 200, 5, &caps()).unwrap();
        let b = estimate_success(Strategy::CollisionCheck, &spec, 7, 200, 5, &caps()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parse_names() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("nope".parse::<Strategy>().is_err());
    }

    #[test]
    fn mismatched_pair_is_rejected() {
        let a = DistributionSpec::new(DistributionKind::Uniform, 8, 8, 0);
        let b = DistributionSpec::new(DistributionKind::Uniform, 8, 16, 0);
        assert!(estimate_advantage((&a, &b), Strategy::ImageCount, 2, 10, 0, &caps()).is_err());
    }
}
