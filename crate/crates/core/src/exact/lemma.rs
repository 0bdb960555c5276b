use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::law::{EnumerationCaps, TableLaw};
use super::poly::{Rational, RationalPolynomial, RationalString};
use crate::error::{Error, Result};
use crate::oracles::RParam;

/// Point constraints `f(x_i) = y_i`. Repeated `x` with conflicting `y` is
/// allowed and simply has probability zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub pairs: Vec<(usize, usize)>,
}

impl ConstraintSet {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Parameter("a constraint set needs at least one pair".into()));
        }
        Ok(ConstraintSet { pairs })
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    /// Number of distinct values among the first `k - 1` constraints.
    pub fn distinct_prior_values(&self) -> usize {
        let mut ys: Vec<usize> = self.pairs[..self.k() - 1].iter().map(|p| p.1).collect();
        ys.sort_unstable();
        ys.dedup();
        ys.len()
    }

    pub fn has_distinct_points(&self) -> bool {
        let mut xs: Vec<usize> = self.pairs.iter().map(|p| p.0).collect();
        xs.sort_unstable();
        xs.windows(2).all(|w| w[0] != w[1])
    }

    pub fn with(&self, next: (usize, usize)) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.push(next);
        ConstraintSet { pairs }
    }

    pub fn holds(&self, images: &[usize]) -> bool {
        self.pairs.iter().all(|&(x, y)| images.get(x) == Some(&y))
    }

    fn check_bounds(&self, n: usize) -> Result<()> {
        match self.pairs.iter().find(|&&(x, y)| x >= n || y >= n) {
            Some(p) => Err(Error::Parameter(format!("constraint {p:?} outside [{n}]x[{n}]"))),
            None => Ok(()),
        }
    }

    /// Every constraint set of size `k` on `[n] x [n]` with distinct,
    /// increasing points.
    pub fn all_with_distinct_points(n: usize, k: usize) -> Vec<ConstraintSet> {
        let mut out = Vec::new();
        let mut xs = Vec::with_capacity(k);
        fn choose(n: usize, k: usize, start: usize, xs: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if xs.len() == k {
                out.push(xs.clone());
                return;
            }
            for x in start..n {
                xs.push(x);
                choose(n, k, x + 1, xs, out);
                xs.pop();
            }
        }
        let mut subsets = Vec::new();
        choose(n, k, 0, &mut xs, &mut subsets);
        for xs in subsets {
            let total = n.pow(k as u32);
            for mut code in 0..total {
                let pairs = xs
                    .iter()
                    .map(|&x| {
                        let y = code % n;
                        code /= n;
                        (x, y)
                    })
                    .collect();
                out.push(ConstraintSet { pairs });
            }
        }
        out
    }
}

/// Caches exact `D_r` laws on `[n] -> [n]` so that many constraint sets
/// can be evaluated against the same enumeration.
#[derive(Debug, Clone)]
pub struct DrOracle {
    n: usize,
    caps: EnumerationCaps,
    laws: BTreeMap<RParam, TableLaw>,
}

impl DrOracle {
    pub fn new(n: usize, caps: EnumerationCaps) -> Self {
        DrOracle { n, caps, laws: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn law(&mut self, r: RParam) -> Result<&TableLaw> {
        if !self.laws.contains_key(&r) {
            let law = TableLaw::dr(self.n, self.n, r, &self.caps)?;
            self.laws.insert(r, law);
        }
        Ok(&self.laws[&r])
    }

    /// `Pr_{f <- D_r}[f(x_i) = y_i for all i]`.
    pub fn joint_probability(&mut self, r: RParam, constraints: &ConstraintSet) -> Result<Rational> {
        constraints.check_bounds(self.n)?;
        Ok(self.law(r)?.probability_where(|t| constraints.holds(t)))
    }

    /// `Pr[f(x_k) = y_k | f(x_i) = y_i, i < k]` by enumeration.
    pub fn conditional_factor(
        &mut self,
        r: RParam,
        prior: &ConstraintSet,
        next: (usize, usize),
    ) -> Result<Rational> {
        let p_prior = self.joint_probability(r, prior)?;
        if p_prior.is_zero() {
            return Err(Error::Conditioning(format!("prior {:?} has probability 0 under D_{r}", prior.pairs)));
        }
        Ok(self.joint_probability(r, &prior.with(next))? / p_prior)
    }
}

pub fn exact_joint_probability(n: usize, r: RParam, constraints: &ConstraintSet, caps: &EnumerationCaps) -> Result<Rational> {
    DrOracle::new(n, *caps).joint_probability(r, constraints)
}

pub fn conditional_factor(
    n: usize,
    r: RParam,
    prior: &ConstraintSet,
    next: (usize, usize),
    caps: &EnumerationCaps,
) -> Result<Rational> {
    DrOracle::new(n, *caps).conditional_factor(r, prior, next)
}

/// Closed-form conditional factor: `1/r` when `y_k` repeats a prior value,
/// `(1 - l/r)/(n - l)` otherwise, with `l` distinct prior values. A point
/// already constrained gives 1 or 0.
pub fn predicted_conditional_factor(n: usize, r: RParam, prior: &ConstraintSet, next: (usize, usize)) -> Rational {
    let (xk, yk) = next;
    if let Some(&(_, y)) = prior.pairs.iter().find(|p| p.0 == xk) {
        return if y == yk { Rational::one() } else { Rational::zero() };
    }
    let inv_r = match r {
        RParam::Finite(r) => Rational::new(BigInt::one(), BigInt::from(r)),
        RParam::Infinity => Rational::zero(),
    };
    if prior.pairs.iter().any(|p| p.1 == yk) {
        return inv_r;
    }
    let l = prior.with(next).distinct_prior_values();
    (Rational::one() - inv_r * BigInt::from(l)) / BigInt::from(n - l)
}

fn inverse(r: u64) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(r))
}

/// Lagrange interpolant in `u = 1/r` through the exact probabilities at
/// `sample_rs`.
pub fn interpolate_in_inverse_r(
    oracle: &mut DrOracle,
    constraints: &ConstraintSet,
    sample_rs: &[u64],
) -> Result<RationalPolynomial> {
    if sample_rs.len() < constraints.k() {
        return Err(Error::Interpolation(format!(
            "{} sample points cannot pin a polynomial for k={}",
            sample_rs.len(),
            constraints.k()
        )));
    }
    if sample_rs.contains(&0) {
        return Err(Error::Interpolation("r = 0 is not a sample point".into()));
    }
    let points = sample_rs
        .iter()
        .map(|&r| Ok((inverse(r), oracle.joint_probability(RParam::Finite(r), constraints)?)))
        .collect::<Result<Vec<_>>>()?;
    RationalPolynomial::lagrange(&points)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeldOutCheck {
    pub r: RParam,
    pub exact: RationalString,
    pub predicted: RationalString,
    pub ok: bool,
}

/// Evidence that `p(r)` is a polynomial of degree `<= k - 1` in `1/r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub n: usize,
    pub constraints: Vec<(usize, usize)>,
    pub interpolation_rs: Vec<u64>,
    pub coefficients: Vec<RationalString>,
    pub checks: Vec<HeldOutCheck>,
    pub passed: bool,
}

/// Certifies from a table of exact probabilities. The interpolant is built
/// from `interpolation_rs` (which must have `k` entries in `table`) and
/// every other table entry is a held-out check; the `Infinity` entry is
/// compared against the constant term.
pub fn certify_probability_table(
    n: usize,
    constraints: &ConstraintSet,
    interpolation_rs: &[u64],
    table: &BTreeMap<RParam, Rational>,
) -> Result<Certificate> {
    if interpolation_rs.len() != constraints.k() {
        return Err(Error::Interpolation(format!(
            "degree bound k-1 needs exactly k={} interpolation points",
            constraints.k()
        )));
    }
    let points = interpolation_rs
        .iter()
        .map(|&r| {
            table
                .get(&RParam::Finite(r))
                .map(|p| (inverse(r), p.clone()))
                .ok_or_else(|| Error::Interpolation(format!("no probability recorded for r={r}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let poly = RationalPolynomial::lagrange(&points)?;
    let checks: Vec<HeldOutCheck> = table
        .iter()
        .filter(|(r, _)| !matches!(r, RParam::Finite(v) if interpolation_rs.contains(v)))
        .map(|(&r, exact)| {
            let predicted = match r {
                RParam::Finite(v) => poly.eval(&inverse(v)),
                RParam::Infinity => poly.coefficient(0),
            };
            HeldOutCheck { r, exact: exact.into(), ok: &predicted == exact, predicted: (&predicted).into() }
        })
        .collect();
    let passed = checks.iter().all(|c| c.ok);
    Ok(Certificate {
        n,
        constraints: constraints.pairs.clone(),
        interpolation_rs: interpolation_rs.to_vec(),
        coefficients: poly.coefficients().iter().map(RationalString::from).collect(),
        checks,
        passed,
    })
}

/// Interpolates at `r = 1..=k` and checks every `r` in `test_rs` plus
/// `r = ∞` exactly.
pub fn certify_degree_bound(oracle: &mut DrOracle, constraints: &ConstraintSet, test_rs: &[u64]) -> Result<Certificate> {
    let interp: Vec<u64> = (1..=constraints.k() as u64).collect();
    let mut table = BTreeMap::new();
    for &r in interp.iter().chain(test_rs) {
        let r = RParam::Finite(r);
        if let std::collections::btree_map::Entry::Vacant(e) = table.entry(r) {
            e.insert(oracle.joint_probability(r, constraints)?);
        }
    }
    table.insert(RParam::Infinity, oracle.joint_probability(RParam::Infinity, constraints)?);
    certify_probability_table(oracle.n(), constraints, &interp, &table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::poly::rat;

    fn cs(pairs: &[(usize, usize)]) -> ConstraintSet {
        ConstraintSet::new(pairs.to_vec()).unwrap()
    }

    fn caps() -> EnumerationCaps {
        EnumerationCaps::default()
    }

    #[test]
    fn single_constraint_is_one_over_n() {
        for r in [RParam::Finite(1), RParam::Finite(2), RParam::Finite(5), RParam::Infinity] {
            assert_eq!(exact_joint_probability(3, r, &cs(&[(1, 2)]), &caps()).unwrap(), rat(1, 3));
        }
    }

    #[test]
    fn conflicting_constraints_have_probability_zero() {
        let p = exact_joint_probability(3, RParam::Finite(2), &cs(&[(0, 1), (0, 2)]), &caps()).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn constant_law_on_two_points() {
        let p = exact_joint_probability(2, RParam::Finite(1), &cs(&[(0, 0), (1, 0)]), &caps()).unwrap();
        assert_eq!(p, rat(1, 2));
    }

    #[test]
    fn conditional_factor_examples() {
        let f = conditional_factor(3, RParam::Finite(2), &cs(&[(0, 1)]), (1, 1), &caps()).unwrap();
        assert_eq!(f, rat(1, 2));
        let f = conditional_factor(3, RParam::Finite(3), &cs(&[(0, 1)]), (1, 2), &caps()).unwrap();
        assert_eq!(f, rat(1, 3));
        let f = conditional_factor(2, RParam::Finite(1), &cs(&[(0, 0)]), (1, 1), &caps()).unwrap();
        assert!(f.is_zero());
        assert_eq!(predicted_conditional_factor(2, RParam::Finite(1), &cs(&[(0, 0)]), (1, 1)), rat(0, 1));
    }

    #[test]
    fn conditioning_on_impossible_prior_fails() {
        let err = conditional_factor(3, RParam::Finite(2), &cs(&[(0, 1), (0, 2)]), (1, 1), &caps());
        assert!(matches!(err, Err(Error::Conditioning(_))));
    }

    #[test]
    fn interpolation_examples() {
        let mut oracle = DrOracle::new(3, caps());
        let p = interpolate_in_inverse_r(&mut oracle, &cs(&[(2, 0)]), &[1, 4, 7]).unwrap();
        assert_eq!(p, RationalPolynomial::constant(rat(1, 3)));
        let p = interpolate_in_inverse_r(&mut oracle, &cs(&[(0, 1), (0, 2)]), &[1, 2]).unwrap();
        assert!(p.is_zero());
        let c = cs(&[(0, 1), (1, 1)]);
        let p = interpolate_in_inverse_r(&mut oracle, &c, &[1, 2]).unwrap();
        assert_eq!(p.degree(), Some(1));
        for r in 3..=8 {
            let exact = oracle.joint_probability(RParam::Finite(r), &c).unwrap();
            assert_eq!(p.eval(&rat(1, r as i64)), exact, "r={r}");
        }
        assert!(matches!(
            interpolate_in_inverse_r(&mut oracle, &c, &[2, 2]),
            Err(Error::Interpolation(_))
        ));
    }

    #[test]
    fn certificate_passes_and_detects_corruption() {
        let mut oracle = DrOracle::new(3, caps());
        let c = cs(&[(0, 1), (2, 1)]);
        let cert = certify_degree_bound(&mut oracle, &c, &[3, 4, 5, 6]).unwrap();
        assert!(cert.passed, "{cert:?}");
        assert_eq!(cert.checks.len(), 5);

        let mut table = BTreeMap::new();
        for r in 1..=6u64 {
            table.insert(RParam::Finite(r), oracle.joint_probability(RParam::Finite(r), &c).unwrap());
        }
        table.insert(RParam::Infinity, oracle.joint_probability(RParam::Infinity, &c).unwrap());
        assert!(certify_probability_table(3, &c, &[1, 2], &table).unwrap().passed);
        *table.get_mut(&RParam::Finite(5)).unwrap() += rat(1, 1000);
        assert!(!certify_probability_table(3, &c, &[1, 2], &table).unwrap().passed);
    }

    #[test]
    fn enumerates_constraint_sets() {
        assert_eq!(ConstraintSet::all_with_distinct_points(4, 1).len(), 16);
        assert_eq!(ConstraintSet::all_with_distinct_points(4, 2).len(), 96);
        assert_eq!(ConstraintSet::all_with_distinct_points(4, 3).len(), 256);
        assert!(ConstraintSet::all_with_distinct_points(4, 3).iter().all(ConstraintSet::has_distinct_points));
    }
}
