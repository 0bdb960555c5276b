use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::hybrid::{compose, HybridChain};
use super::table::FunctionTable;
use crate::error::{param, Error, Result};
use crate::rng::{stream, StreamRng};

/// Size of the intermediate space of a `D_r` sample: a positive integer or
/// the injective limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RParam {
    Finite(u64),
    Infinity,
}

impl RParam {
    pub fn finite(self) -> Option<u64> {
        match self {
            RParam::Finite(r) => Some(r),
            RParam::Infinity => None,
        }
    }
}

impl fmt::Display for RParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RParam::Finite(r) => write!(f, "{r}"),
            RParam::Infinity => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for RParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(RParam::Infinity),
            other => other
                .parse::<u64>()
                .ok()
                .filter(|&r| r > 0)
                .map(RParam::Finite)
                .ok_or_else(|| Error::Parameter(format!("r must be a positive integer or 'inf', got '{s}'"))),
        }
    }
}

impl Serialize for RParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RParam::Finite(r) => s.serialize_u64(*r),
            RParam::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for RParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(0) => Err(serde::de::Error::custom("r must be positive")),
            Raw::Num(r) => Ok(RParam::Finite(r)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
    Permutation,
    Injective,
    /// `h ∘ g` with `g: [m] -> [r]` uniform and `h` a uniform injection of
    /// `g`'s image set into `[n]`.
    Dr { r: RParam },
    /// `h ∘ g` with `g: [m] -> [r]` and `h: [r] -> [n]` both uniform.
    SmallRange { r: u64 },
    /// Composition of `depth` uniform halving stages, `[2^depth n] -> [n]`.
    HybridChain { depth: u32 },
    /// Set-equality construction; `m` is each function's domain, `n` the
    /// shared codomain.
    SetEquality { case: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub kind: DistributionKind,
    pub m: usize,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

impl DistributionSpec {
    pub fn new(kind: DistributionKind, m: usize, n: usize, seed: u64) -> Self {
        DistributionSpec { kind, m, n, seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        DistributionSpec { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        if m == 0 || n == 0 {
            return param(format!("domain and codomain must be positive (m={m}, n={n})"));
        }
        match self.kind {
            DistributionKind::Uniform => Ok(()),
            DistributionKind::Permutation | DistributionKind::Injective if m > n => {
                param(format!("{:?} needs m <= n (m={m}, n={n})", self.kind))
            }
            DistributionKind::Permutation | DistributionKind::Injective => Ok(()),
            DistributionKind::Dr { r: RParam::Finite(0) } => param("D_r needs r >= 1"),
            DistributionKind::Dr { r: RParam::Finite(r) } => {
                let max_image = (m as u128).min(u128::from(r));
                if max_image > n as u128 {
                    param(format!(
                        "D_r with m={m}, r={r} can produce {max_image} distinct g-images, more than n={n}"
                    ))
                } else {
                    Ok(())
                }
            }
            DistributionKind::Dr { r: RParam::Infinity } if m > n => {
                param(format!("D_inf is injective and needs m <= n (m={m}, n={n})"))
            }
            DistributionKind::Dr { .. } => Ok(()),
            DistributionKind::SmallRange { r: 0 } => param("small-range needs r >= 1"),
            DistributionKind::SmallRange { .. } => Ok(()),
            DistributionKind::HybridChain { depth } => {
                if depth == 0 || depth >= usize::BITS {
                    return param(format!("hybrid depth must be in 1..{}", usize::BITS));
                }
                if n.checked_shl(depth).filter(|&v| v >> depth == n) != Some(m) {
                    param(format!("hybrid chain of depth {depth} needs m = 2^{depth}*n (m={m}, n={n})"))
                } else {
                    Ok(())
                }
            }
            DistributionKind::SetEquality { case } if !(1..=3).contains(&case) => {
                param(format!("set-equality case must be 1, 2 or 3 (got {case})"))
            }
            DistributionKind::SetEquality { .. } if n < 2 * m => param(format!(
                "set equality needs a codomain of at least twice the domain (m={m}, n={n})"
            )),
            DistributionKind::SetEquality { .. } => Ok(()),
        }
    }
}

/// Two injective functions `[m] -> [n]` from the set-equality construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetEqualityInstance {
    #[serde(rename = "case")]
    pub case_label: u8,
    pub f: FunctionTable,
    pub g: FunctionTable,
}

impl SetEqualityInstance {
    /// Views `(f, g)` as one function on `[2m]`: `f` on the first half, `g`
    /// on the second. Its collisions across the halves are exactly the claws.
    pub fn joined(&self) -> FunctionTable {
        let m = self.f.domain_size();
        FunctionTable::from_fn(2 * m, self.f.codomain_size(), |x| {
            if x < m {
                self.f.eval(x)
            } else {
                self.g.eval(x - m)
            }
        })
        .expect("joined tables stay in range")
    }

    pub fn ranges_identical(&self) -> bool {
        self.f.range() == self.g.range()
    }

    pub fn ranges_disjoint(&self) -> bool {
        let rf = self.f.range();
        self.g.range().iter().all(|y| rf.binary_search(y).is_err())
    }
}

/// Outcome of [`sample`]: the kind of object depends on the distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sample {
    Table(FunctionTable),
    Hybrid { chain: HybridChain, base: FunctionTable },
    SetEquality(SetEqualityInstance),
}

impl Sample {
    /// Collapses the sample to the single oracle table an algorithm queries.
    pub fn into_table(self) -> FunctionTable {
        match self {
            Sample::Table(t) => t,
            Sample::Hybrid { chain, base } => compose(&chain, &base).expect("sampled chains compose"),
            Sample::SetEquality(inst) => inst.joined(),
        }
    }
}

pub fn uniform_table(m: usize, n: usize, rng: &mut impl Rng) -> FunctionTable {
    FunctionTable::from_fn(m, n, |_| rng.random_range(0..n)).expect("images drawn in range")
}

/// Uniform injective map `[m] -> [n]` by shuffling `[n]`.
pub fn injective_table(m: usize, n: usize, rng: &mut impl Rng) -> Result<FunctionTable> {
    if m > n {
        return param(format!("no injection from [{m}] into [{n}]"));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm.truncate(m);
    FunctionTable::new(m, n, perm)
}

/// Composes `labels` with an injection of its image set into `[n]`: the
/// shuffled prefix of `[n]` is assigned to the image set in sorted order.
fn inject_labels(labels: &[u64], n: usize, rng: &mut impl Rng) -> Result<FunctionTable> {
    let mut support = labels.to_vec();
    support.sort_unstable();
    support.dedup();
    if support.len() > n {
        return param(format!("{} distinct intermediate values cannot inject into [{n}]", support.len()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let images = labels
        .iter()
        .map(|l| perm[support.binary_search(l).expect("label in support")])
        .collect();
    FunctionTable::new(labels.len(), n, images)
}

/// One draw from `D_r` on `[m] -> [n]`. The infinite case draws `g`
/// injectively instead of taking a limit.
pub fn dr_table(m: usize, n: usize, r: RParam, g_rng: &mut impl Rng, h_rng: &mut impl Rng) -> Result<FunctionTable> {
    let labels: Vec<u64> = match r {
        RParam::Finite(r) => (0..m).map(|_| g_rng.random_range(0..r)).collect(),
        RParam::Infinity => {
            let mut l: Vec<u64> = (0..m as u64).collect();
            l.shuffle(g_rng);
            l
        }
    };
    inject_labels(&labels, n, h_rng)
}

pub fn small_range_table(m: usize, n: usize, r: u64, rng: &mut impl Rng) -> Result<FunctionTable> {
    let r = usize::try_from(r).map_err(|_| Error::Parameter(format!("r={r} too large")))?;
    let g = uniform_table(m, r, rng);
    let h = uniform_table(r, n, rng);
    FunctionTable::from_fn(m, n, |x| h.eval(g.eval(x)))
}

/// The hybrid `D_k` over `[2^depth n] -> [n]`: uniform stages `f_1..f_k`
/// with `f_i: [2^i n] -> [2^(i-1) n]` and a uniform base
/// `g: [2^depth n] -> [2^k n]`.
pub fn hybrid_sample(n: usize, depth: u32, k: u32, rng: &mut impl Rng) -> Result<(HybridChain, FunctionTable)> {
    if depth == 0 || k >= depth {
        return param(format!("hybrid index k={k} must satisfy k < depth={depth}"));
    }
    let components = (1..=k)
        .map(|i| uniform_table(n << i, n << (i - 1), rng))
        .collect::<Vec<_>>();
    let base = uniform_table(n << depth, n << k, rng);
    Ok((HybridChain::new(components)?, base))
}

/// Draws `(f, g)` for the given set-equality case over `[m] -> [n]`.
pub fn set_equality_sample(m: usize, n: usize, case: u8, rng: &mut impl Rng) -> Result<SetEqualityInstance> {
    let mut f_labels: Vec<u64>;
    let mut g_labels: Vec<u64>;
    match case {
        1 => {
            f_labels = (0..m as u64).collect();
            g_labels = f_labels.clone();
            f_labels.shuffle(rng);
            g_labels.shuffle(rng);
        }
        2 => {
            f_labels = (0..m).map(|_| rng.random_range(0..m as u64)).collect();
            g_labels = (0..m).map(|_| rng.random_range(0..m as u64)).collect();
        }
        3 => {
            f_labels = (0..m as u64).collect();
            g_labels = (m as u64..2 * m as u64).collect();
            f_labels.shuffle(rng);
            g_labels.shuffle(rng);
        }
        other => return param(format!("set-equality case must be 1, 2 or 3 (got {other})")),
    }
    let all: Vec<u64> = f_labels.iter().chain(&g_labels).copied().collect();
    let joined = inject_labels(&all, n, rng)?;
    let images = joined.images();
    Ok(SetEqualityInstance {
        case_label: case,
        f: FunctionTable::new(m, n, images[..m].to_vec())?,
        g: FunctionTable::new(m, n, images[m..].to_vec())?,
    })
}

fn spec_rng(spec: &DistributionSpec, purpose: &str) -> StreamRng {
    stream(spec.seed, purpose, 0)
}

/// Draws one sample from `spec`. Identical specs give identical samples.
pub fn sample(spec: &DistributionSpec) -> Result<Sample> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    Ok(match spec.kind {
        DistributionKind::Uniform => Sample::Table(uniform_table(m, n, &mut spec_rng(spec, "uniform"))),
        DistributionKind::Permutation | DistributionKind::Injective => {
            Sample::Table(injective_table(m, n, &mut spec_rng(spec, "injective"))?)
        }
        DistributionKind::Dr { r } => Sample::Table(dr_table(
            m,
            n,
            r,
            &mut spec_rng(spec, "dr/g"),
            &mut spec_rng(spec, "dr/h"),
        )?),
        DistributionKind::SmallRange { r } => {
            Sample::Table(small_range_table(m, n, r, &mut spec_rng(spec, "small-range"))?)
        }
        DistributionKind::HybridChain { depth } => {
            let (chain, base) = hybrid_sample(n, depth, depth - 1, &mut spec_rng(spec, "hybrid"))?;
            Sample::Hybrid { chain, base }
        }
        DistributionKind::SetEquality { case } => {
            Sample::SetEquality(set_equality_sample(m, n, case, &mut spec_rng(spec, "set-equality"))?)
        }
    })
}

/// Draws a single oracle table; composite samples are collapsed.
pub fn sample_table(spec: &DistributionSpec) -> Result<FunctionTable> {
    sample(spec).map(Sample::into_table)
}
