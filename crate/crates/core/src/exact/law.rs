use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::poly::Rational;
use crate::error::{Error, Result};
use crate::oracles::{DistributionKind, DistributionSpec, RParam};

/// Limits on brute-force enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationCaps {
    pub max_n: usize,
    pub max_r: u64,
    /// Upper bound on elementary enumeration steps for one law.
    pub max_steps: u64,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        EnumerationCaps { max_n: 5, max_r: 12, max_steps: 100_000_000 }
    }
}

impl EnumerationCaps {
    fn check_steps(&self, what: &str, steps: Option<u64>) -> Result<u64> {
        match steps {
            Some(s) if s <= self.max_steps => Ok(s),
            _ => Err(Error::EnumerationTooLarge(format!(
                "{what} needs more than {} enumeration steps",
                self.max_steps
            ))),
        }
    }
}

/// Exact law of a random table `[m] -> [n]` as integer weights over all
/// `n^m` tables with a common denominator `total`.
///
/// Table index: `Σ_x images[x] · n^x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableLaw {
    m: usize,
    n: usize,
    weights: Vec<u64>,
    total: u64,
}

fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e))
}

fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

/// All permutations of `[n]` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// Visits every word of `[base]^len` in odometer order (digit 0 fastest),
/// restricted to words whose last digit equals `top` when `len > 0`.
fn for_each_word(len: usize, base: usize, top: Option<usize>, mut visit: impl FnMut(&[usize])) {
    let mut word = vec![0usize; len];
    let free = match top {
        Some(t) if len > 0 => {
            word[len - 1] = t;
            len - 1
        }
        _ => len,
    };
    loop {
        visit(&word);
        let mut i = 0;
        loop {
            if i == free {
                return;
            }
            word[i] += 1;
            if word[i] < base {
                break;
            }
            word[i] = 0;
            i += 1;
        }
    }
}

impl TableLaw {
    fn space(m: usize, n: usize) -> Result<usize> {
        checked_pow(n as u64, m)
            .filter(|&s| s <= 1 << 24)
            .map(|s| s as usize)
            .ok_or_else(|| Error::EnumerationTooLarge(format!("{n}^{m} tables do not fit the enumerator")))
    }

    fn index(&self, images: &[usize]) -> usize {
        images.iter().rev().fold(0, |acc, &y| acc * self.n + y)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        (0..self.m)
            .map(|_| {
                let y = index % self.n;
                index /= self.n;
                y
            })
            .collect()
    }

    pub fn domain_size(&self) -> usize {
        self.m
    }

    pub fn codomain_size(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Weight of a specific table (out of [`TableLaw::total`]).
    pub fn weight(&self, images: &[usize]) -> u64 {
        if images.len() != self.m || images.iter().any(|&y| y >= self.n) {
            return 0;
        }
        self.weights[self.index(images)]
    }

    pub fn probability(&self, images: &[usize]) -> Rational {
        Rational::new(BigInt::from(self.weight(images)), BigInt::from(self.total))
    }

    /// Iterates `(table, weight)` over tables of nonzero weight.
    pub fn support(&self) -> impl Iterator<Item = (Vec<usize>, u64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(i, &w)| (self.decode(i), w))
    }

    /// Probability that a random table satisfies `pred`.
    pub fn probability_where(&self, mut pred: impl FnMut(&[usize]) -> bool) -> Rational {
        let hits: u64 = self.support().filter(|(t, _)| pred(t)).map(|(_, w)| w).sum();
        Rational::new(BigInt::from(hits), BigInt::from(self.total))
    }

    /// Accumulates weights from `chunks` independent partitions of the
    /// enumeration; partition sums are combined exactly.
    fn accumulate(m: usize, n: usize, chunks: usize, fill: impl Fn(usize, &mut Vec<u64>) + Sync) -> Result<Vec<u64>> {
        let space = Self::space(m, n)?;
        let run = |c: usize| {
            let mut w = vec![0u64; space];
            fill(c, &mut w);
            w
        };
        #[cfg(feature = "parallel")]
        let parts: Vec<Vec<u64>> = {
            use rayon::prelude::*;
            (0..chunks).into_par_iter().map(run).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<Vec<u64>> = (0..chunks).map(run).collect();
        let mut total = vec![0u64; space];
        for part in parts {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
        Ok(total)
    }

    pub fn uniform(m: usize, n: usize, caps: &EnumerationCaps) -> Result<Self> {
        let total = caps.check_steps("uniform law", checked_pow(n as u64, m))?;
        let space = Self::space(m, n)?;
        Ok(TableLaw { m, n, weights: vec![1; space], total })
    }

    /// Uniform injections `[m] -> [n]`, enumerated as permutations of `[n]`
    /// truncated to their first `m` slots.
    pub fn injective(m: usize, n: usize, caps: &EnumerationCaps) -> Result<Self> {
        if m > n {
            return Err(Error::Parameter(format!("no injection from [{m}] into [{n}]")));
        }
        let total = caps.check_steps("injective law", factorial(n))?;
        let perms = permutations(n);
        let mut law = TableLaw { m, n, weights: vec![0; Self::space(m, n)?], total };
        for p in &perms {
            let i = law.index(&p[..m]);
            law.weights[i] += 1;
        }
        Ok(law)
    }

    /// Exact `D_r` law on `[m] -> [n]`: every `g: [m] -> [r]` against every
    /// permutation of `[n]`, whose first `|image(g)|` slots give `h` on the
    /// sorted image set. `r = ∞` enumerates injective `g` instead.
    pub fn dr(m: usize, n: usize, r: RParam, caps: &EnumerationCaps) -> Result<Self> {
        if n > caps.max_n {
            return Err(Error::EnumerationTooLarge(format!("n={n} exceeds cap {}", caps.max_n)));
        }
        let perms = permutations(n);
        match r {
            RParam::Finite(r) => {
                if r == 0 {
                    return Err(Error::Parameter("r must be positive".into()));
                }
                if r > caps.max_r {
                    return Err(Error::EnumerationTooLarge(format!("r={r} exceeds cap {}", caps.max_r)));
                }
                if (m as u64).min(r) > n as u64 {
                    return Err(Error::Parameter(format!("D_r with m={m}, r={r} cannot inject into [{n}]")));
                }
                let steps = checked_pow(r, m).and_then(|g| g.checked_mul(factorial(n)?));
                let total = caps.check_steps("D_r law", steps)?;
                let r = r as usize;
                let chunks = if m == 0 { 1 } else { r };
                let proto = TableLaw { m, n, weights: Vec::new(), total };
                let weights = Self::accumulate(m, n, chunks, |top, w| {
                    let mut slots = vec![0usize; m];
                    let mut support: Vec<usize> = Vec::with_capacity(m);
                    let mut images = vec![0usize; m];
                    for_each_word(m, r, Some(top), |g| {
                        support.clear();
                        support.extend_from_slice(g);
                        support.sort_unstable();
                        support.dedup();
                        for (s, v) in slots.iter_mut().zip(g) {
                            *s = support.binary_search(v).expect("value in support");
                        }
                        for p in &perms {
                            for (img, &s) in images.iter_mut().zip(&slots) {
                                *img = p[s];
                            }
                            w[proto.index(&images)] += 1;
                        }
                    });
                })?;
                Ok(TableLaw { weights, ..proto })
            }
            RParam::Infinity => {
                if m > n {
                    return Err(Error::Parameter(format!("D_inf on [{m}] -> [{n}] needs m <= n")));
                }
                let steps = factorial(m).and_then(|a| a.checked_mul(factorial(n)?));
                let total = caps.check_steps("D_inf law", steps)?;
                let proto = TableLaw { m, n, weights: Vec::new(), total };
                let labelings = permutations(m);
                let weights = Self::accumulate(m, n, 1, |_, w| {
                    let mut images = vec![0usize; m];
                    for g in &labelings {
                        // g is injective, so its sorted image set is [m] and
                        // each label is its own slot
                        for p in &perms {
                            for (img, &s) in images.iter_mut().zip(g) {
                                *img = p[s];
                            }
                            w[proto.index(&images)] += 1;
                        }
                    }
                })?;
                Ok(TableLaw { weights, ..proto })
            }
        }
    }

    pub fn small_range(m: usize, n: usize, r: u64, caps: &EnumerationCaps) -> Result<Self> {
        if r == 0 {
            return Err(Error::Parameter("r must be positive".into()));
        }
        let steps = checked_pow(r, m).and_then(|g| g.checked_mul(checked_pow(n as u64, r as usize)?));
        let total = caps.check_steps("small-range law", steps)?;
        let r = r as usize;
        let proto = TableLaw { m, n, weights: Vec::new(), total };
        let weights = Self::accumulate(m, n, 1, |_, w| {
            let mut images = vec![0usize; m];
            for_each_word(m, r, None, |g| {
                for_each_word(r, n, None, |h| {
                    for (img, &v) in images.iter_mut().zip(g) {
                        *img = h[v];
                    }
                    w[proto.index(&images)] += 1;
                });
            });
        })?;
        Ok(TableLaw { weights, ..proto })
    }

    /// The exact law a [`DistributionSpec`] induces on tables.
    pub fn for_spec(spec: &DistributionSpec, caps: &EnumerationCaps) -> Result<Self> {
        spec.validate()?;
        let (m, n) = (spec.m, spec.n);
        match spec.kind {
            DistributionKind::Uniform => Self::uniform(m, n, caps),
            DistributionKind::Permutation | DistributionKind::Injective => Self::injective(m, n, caps),
            DistributionKind::Dr { r } => Self::dr(m, n, r, caps),
            DistributionKind::SmallRange { r } => Self::small_range(m, n, r, caps),
            other => Err(Error::NotEnumerable(format!("{other:?} has no table enumerator"))),
        }
    }
}

/// Exact total variation distance between the laws two specs induce.
pub fn tv_distance(a: &DistributionSpec, b: &DistributionSpec, caps: &EnumerationCaps) -> Result<Rational> {
    if (a.m, a.n) != (b.m, b.n) {
        return Err(Error::Dimension(format!(
            "cannot compare [{}]->[{}] with [{}]->[{}]",
            a.m, a.n, b.m, b.n
        )));
    }
    let la = TableLaw::for_spec(a, caps)?;
    let lb = TableLaw::for_spec(b, caps)?;
    Ok(tv_between(&la, &lb))
}

pub fn tv_between(a: &TableLaw, b: &TableLaw) -> Rational {
    // ½ Σ |wa/A - wb/B| = Σ |wa·B - wb·A| / (2AB)
    let (ta, tb) = (u128::from(a.total), u128::from(b.total));
    let diff: BigInt = a
        .weights
        .iter()
        .zip(&b.weights)
        .map(|(&wa, &wb)| BigInt::from((u128::from(wa) * tb).abs_diff(u128::from(wb) * ta)))
        .sum();
    Rational::new(diff, BigInt::from(2u8) * BigInt::from(ta) * BigInt::from(tb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::poly::rat;
    use num_traits::Zero;

    fn spec(kind: DistributionKind, m: usize, n: usize) -> DistributionSpec {
        DistributionSpec::new(kind, m, n, 0)
    }

    #[test]
    fn permutations_are_complete_and_distinct() {
        let p = permutations(4);
        assert_eq!(p.len(), 24);
        let mut sorted = p.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 24);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn d1_law_is_uniform_over_constants() {
        let law = TableLaw::dr(3, 3, RParam::Finite(1), &EnumerationCaps::default()).unwrap();
        let support: Vec<_> = law.support().collect();
        assert_eq!(support.len(), 3);
        assert!(support.iter().all(|(t, _)| t.iter().all(|&y| y == t[0])));
        assert_eq!(law.probability(&[2, 2, 2]), rat(1, 3));
    }

    #[test]
    fn special_case_identities() {
        let caps = EnumerationCaps::default();
        for n in 2..=3 {
            let d_n = spec(DistributionKind::Dr { r: RParam::Finite(n as u64) }, n, n);
            assert!(tv_distance(&d_n, &spec(DistributionKind::Uniform, n, n), &caps).unwrap().is_zero());
            let d_inf = spec(DistributionKind::Dr { r: RParam::Infinity }, n, n);
            assert!(tv_distance(&d_inf, &spec(DistributionKind::Permutation, n, n), &caps).unwrap().is_zero());
        }
    }

    #[test]
    fn d1_versus_uniform_on_two_points() {
        let caps = EnumerationCaps::default();
        let d1 = spec(DistributionKind::Dr { r: RParam::Finite(1) }, 2, 2);
        let u = spec(DistributionKind::Uniform, 2, 2);
        assert_eq!(tv_distance(&d1, &u, &caps).unwrap(), rat(1, 2));
        assert_eq!(tv_distance(&u, &d1, &caps).unwrap(), rat(1, 2));
    }

    #[test]
    fn small_range_one_is_d1() {
        let caps = EnumerationCaps::default();
        let sr = spec(DistributionKind::SmallRange { r: 1 }, 3, 3);
        let d1 = spec(DistributionKind::Dr { r: RParam::Finite(1) }, 3, 3);
        assert!(tv_distance(&sr, &d1, &caps).unwrap().is_zero());
    }

    #[test]
    fn caps_and_mismatches_are_reported() {
        let caps = EnumerationCaps::default();
        assert!(matches!(
            TableLaw::dr(6, 6, RParam::Finite(3), &caps),
            Err(Error::EnumerationTooLarge(_))
        ));
        assert!(matches!(
            TableLaw::dr(4, 4, RParam::Finite(13), &caps),
            Err(Error::EnumerationTooLarge(_))
        ));
        let a = spec(DistributionKind::Uniform, 2, 2);
        let b = spec(DistributionKind::Uniform, 2, 3);
        assert!(matches!(tv_distance(&a, &b, &caps), Err(Error::Dimension(_))));
        let h = spec(DistributionKind::HybridChain { depth: 1 }, 4, 2);
        assert!(matches!(tv_distance(&h, &h, &caps), Err(Error::NotEnumerable(_))));
    }
}
