use std::collections::HashMap;

use rand::seq::index;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::bht::CollisionClaim;
use super::oracle::{OracleGate, QueryBudget};
use crate::error::{Error, Result};
use crate::oracles::first_collision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distinctness {
    Distinct,
    Collision(usize, usize),
}

/// Exact element distinctness by hashing every image. Returns the first
/// colliding pair in scan order.
pub fn element_distinctness_bruteforce(images: &[usize]) -> Distinctness {
    match first_collision(images) {
        Some((a, b)) => Distinctness::Collision(a, b),
        None => Distinctness::Distinct,
    }
}

/// Number of unordered colliding pairs among `images`.
pub fn colliding_pairs(images: &[usize]) -> usize {
    let mut counts: HashMap<usize, usize> = HashMap::with_capacity(images.len());
    for &v in images {
        *counts.entry(v).or_default() += 1;
    }
    counts.values().map(|&c| c * (c - 1) / 2).sum()
}

/// A solver for element distinctness on a restricted table. Indices in the
/// answer refer to positions in `images`.
pub trait ElementDistinctnessSolver: Sync {
    fn name(&self) -> &str;
    fn solve(&self, images: &[usize], rng: &mut dyn RngCore) -> Distinctness;
}

/// Reference solver: always exact.
#[derive(Debug, Clone, Copy, Default)]
pub struct BruteForceSolver;

impl ElementDistinctnessSolver for BruteForceSolver {
    fn name(&self) -> &str {
        "brute-force"
    }

    fn solve(&self, images: &[usize], _rng: &mut dyn RngCore) -> Distinctness {
        element_distinctness_bruteforce(images)
    }
}

/// Answers only on instances with exactly one colliding pair and reports
/// "distinct" otherwise, so it honours nothing beyond the one-collision
/// promise.
#[derive(Debug, Clone, Copy, Default)]
pub struct PromiseStrictSolver;

impl ElementDistinctnessSolver for PromiseStrictSolver {
    fn name(&self) -> &str {
        "promise-strict"
    }

    fn solve(&self, images: &[usize], _rng: &mut dyn RngCore) -> Distinctness {
        if colliding_pairs(images) == 1 {
            element_distinctness_bruteforce(images)
        } else {
            Distinctness::Distinct
        }
    }
}

/// `⌈√(2N)⌉`: the subset size at which a random subset holds about one
/// colliding pair.
pub fn default_subset_size(n: usize) -> usize {
    ceil_sqrt(2 * n)
}

/// `⌈√N / 2⌉`.
pub fn quarter_subset_size(n: usize) -> usize {
    ceil_sqrt(n).div_ceil(2)
}

fn ceil_sqrt(v: usize) -> usize {
    let mut r = (v as f64).sqrt() as usize;
    while r * r < v {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= v {
        r -= 1;
    }
    r
}

/// `size` distinct images from `[n]` with exactly one duplicated pair.
/// Returns the images and the planted positions `(i, j)`, `i < j`.
pub fn plant_single_collision(size: usize, n: usize, rng: &mut impl Rng) -> Result<(Vec<usize>, (usize, usize))> {
    if size < 2 || size - 1 > n {
        return Err(Error::Parameter(format!("cannot plant one collision in {size} images over [{n}]")));
    }
    let mut images = index::sample(rng, n, size - 1).into_vec();
    let pair = index::sample(rng, size, 2).into_vec();
    let (i, j) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
    images.insert(j, images[i]);
    Ok((images, (i, j)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetAttempt {
    /// Colliding pairs inside the sampled subset.
    pub subset_pairs: usize,
    pub claim: Option<CollisionClaim>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetOutcome {
    pub claim: Option<CollisionClaim>,
    pub attempts: Vec<SubsetAttempt>,
    pub queries: u64,
}

impl SubsetOutcome {
    pub fn found(&self) -> bool {
        self.claim.is_some_and(|c| c.verified)
    }
}

/// Restricts `f` to a random subset, hands the restriction to `solver` and
/// verifies its answer with two queries, for up to `retries` fresh subsets.
/// Reading the restricted table costs `subset_size` queries per attempt.
pub fn subset_restriction_collision(
    oracle: &OracleGate,
    subset_size: usize,
    retries: usize,
    solver: &dyn ElementDistinctnessSolver,
    rng: &mut impl Rng,
) -> Result<SubsetOutcome> {
    let table = oracle.table();
    let m = table.domain_size();
    if subset_size > m {
        return Err(Error::Parameter(format!("subset size {subset_size} exceeds domain {m}")));
    }
    let mut budget = QueryBudget::new();
    let mut out = SubsetOutcome { claim: None, attempts: Vec::with_capacity(retries), queries: 0 };
    for _ in 0..retries {
        let subset = index::sample(rng, m, subset_size).into_vec();
        let images: Vec<usize> = subset.iter().map(|&x| table.eval(x)).collect();
        budget.charge(subset_size as u64);
        let mut attempt = SubsetAttempt { subset_pairs: colliding_pairs(&images), claim: None };
        if let Distinctness::Collision(a, b) = solver.solve(&images, rng) {
            let (x1, x2) = (subset[a], subset[b]);
            attempt.claim = Some(CollisionClaim::check(table, x1, x2, &mut budget));
        }
        out.attempts.push(attempt);
        if attempt.claim.is_some() {
            out.claim = attempt.claim;
        }
        if attempt.claim.is_some_and(|c| c.verified) {
            break;
        }
    }
    out.queries = budget.queries();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{injective_table, FunctionTable};
    use crate::rng::stream;

    #[test]
    fn bruteforce_examples() {
        assert_eq!(element_distinctness_bruteforce(&[0, 1, 2]), Distinctness::Distinct);
        assert_eq!(element_distinctness_bruteforce(&[5, 3, 5]), Distinctness::Collision(0, 2));
    }

    #[test]
    fn planted_pair_is_found() {
        for seed in 0..50 {
            let (images, pair) = plant_single_collision(40, 1000, &mut stream(seed, "plant", 0)).unwrap();
            assert_eq!(colliding_pairs(&images), 1);
            assert_eq!(element_distinctness_bruteforce(&images), Distinctness::Collision(pair.0, pair.1));
        }
    }

    #[test]
    fn subset_sizes() {
        assert_eq!(default_subset_size(4096), 91);
        assert_eq!(quarter_subset_size(4096), 32);
        assert_eq!(quarter_subset_size(10), 2);
    }

    #[test]
    fn planted_subset_collision_is_verified() {
        let mut images: Vec<usize> = (0..32).collect();
        images[20] = images[3];
        let oracle = OracleGate::standard(FunctionTable::new(32, 32, images).unwrap());
        let out = subset_restriction_collision(&oracle, 32, 1, &BruteForceSolver, &mut stream(0, "s", 0)).unwrap();
        assert!(out.found());
        assert_eq!(out.queries, 34);
    }

    #[test]
    fn injective_oracle_fails_every_retry() {
        let f = injective_table(64, 64, &mut stream(3, "f", 0)).unwrap();
        let oracle = OracleGate::standard(f);
        let out = subset_restriction_collision(&oracle, 16, 5, &BruteForceSolver, &mut stream(3, "s", 0)).unwrap();
        assert!(!out.found() && out.claim.is_none());
        assert_eq!(out.attempts.len(), 5);
    }
}
