use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// An explicit function `[m] -> [n]`, stored as its image array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct FunctionTable {
    m: usize,
    n: usize,
    images: Vec<usize>,
}

#[derive(Deserialize)]
struct RawTable {
    m: usize,
    n: usize,
    images: Vec<usize>,
}

impl TryFrom<RawTable> for FunctionTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        FunctionTable::new(raw.m, raw.n, raw.images)
    }
}

impl FunctionTable {
    pub fn new(m: usize, n: usize, images: Vec<usize>) -> Result<Self> {
        if m == 0 || n == 0 {
            return param(format!("domain and codomain must be non-empty (m={m}, n={n})"));
        }
        if images.len() != m {
            return param(format!("table has {} images but m={m}", images.len()));
        }
        if let Some((x, y)) = images.iter().enumerate().find(|(_, &y)| y >= n) {
            return param(format!("image f({x})={y} lies outside [0, {n})"));
        }
        Ok(FunctionTable { m, n, images })
    }

    /// Builds a table by evaluating `f` on every domain point.
    pub fn from_fn(m: usize, n: usize, f: impl FnMut(usize) -> usize) -> Result<Self> {
        Self::new(m, n, (0..m).map(f).collect())
    }

    pub fn identity(m: usize) -> Self {
        FunctionTable { m, n: m, images: (0..m).collect() }
    }

    pub fn constant(m: usize, n: usize, value: usize) -> Result<Self> {
        Self::new(m, n, vec![value; m])
    }

    pub fn domain_size(&self) -> usize {
        self.m
    }

    pub fn codomain_size(&self) -> usize {
        self.n
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn eval(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn is_injective(&self) -> bool {
        first_collision(&self.images).is_none()
    }

    pub fn is_collision(&self, x1: usize, x2: usize) -> bool {
        x1 != x2 && x1 < self.m && x2 < self.m && self.images[x1] == self.images[x2]
    }

    /// The sorted set of values actually hit.
    pub fn range(&self) -> Vec<usize> {
        let mut r = self.images.clone();
        r.sort_unstable();
        r.dedup();
        r
    }

    /// Restriction to the listed domain points, in the listed order.
    pub fn restrict(&self, points: &[usize]) -> Result<FunctionTable> {
        if points.is_empty() {
            return param("cannot restrict to an empty subset");
        }
        let images = points
            .iter()
            .map(|&x| {
                self.images
                    .get(x)
                    .copied()
                    .ok_or_else(|| Error::Parameter(format!("point {x} outside domain {}", self.m)))
            })
            .collect::<Result<Vec<_>>>()?;
        FunctionTable::new(points.len(), self.n, images)
    }
}

/// The first pair `(i, j)`, `i < j`, with equal values, by order of `j`.
pub(crate) fn first_collision(values: &[usize]) -> Option<(usize, usize)> {
    let mut seen: HashMap<usize, usize> = HashMap::with_capacity(values.len());
    for (j, &v) in values.iter().enumerate() {
        if let Some(&i) = seen.get(&v) {
            return Some((i, j));
        }
        seen.insert(v, j);
    }
    None
}

/// Number of image points with each multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionProfile {
    pub counts: BTreeMap<usize, usize>,
}

impl CollisionProfile {
    /// Σ i·counts[i]; equals the domain size of the profiled table.
    pub fn domain_size(&self) -> usize {
        self.counts.iter().map(|(i, c)| i * c).sum()
    }

    pub fn distinct_images(&self) -> usize {
        self.counts.values().sum()
    }

    /// Number of unordered colliding pairs, Σ C(i, 2)·counts[i].
    pub fn colliding_pairs(&self) -> usize {
        self.counts.iter().map(|(i, c)| i * (i - 1) / 2 * c).sum()
    }
}

pub fn collision_profile(f: &FunctionTable) -> CollisionProfile {
    let mut mult: HashMap<usize, usize> = HashMap::new();
    for &y in f.images() {
        *mult.entry(y).or_default() += 1;
    }
    let mut counts = BTreeMap::new();
    for (_, m) in mult {
        *counts.entry(m).or_default() += 1;
    }
    CollisionProfile { counts }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(pairs: &[(usize, usize)]) -> CollisionProfile {
        CollisionProfile { counts: pairs.iter().copied().collect() }
    }

    #[test]
    fn profiles_of_basic_tables() {
        assert_eq!(collision_profile(&FunctionTable::identity(4)), profile(&[(1, 4)]));
        assert_eq!(
            collision_profile(&FunctionTable::constant(4, 4, 2).unwrap()),
            profile(&[(4, 1)])
        );
        let t = FunctionTable::new(3, 3, vec![0, 0, 1]).unwrap();
        assert_eq!(collision_profile(&t), profile(&[(1, 1), (2, 1)]));
    }

    #[test]
    fn rejects_out_of_range_images() {
        assert!(FunctionTable::new(2, 2, vec![0, 2]).is_err());
        assert!(FunctionTable::new(3, 2, vec![0, 1]).is_err());
        assert!(FunctionTable::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn json_shape_and_validation() {
        let t = FunctionTable::new(3, 4, vec![3, 0, 3]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"m":3,"n":4,"images":[3,0,3]}"#);
        let back: FunctionTable = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<FunctionTable>(r#"{"m":2,"n":2,"images":[0,5]}"#).is_err());
    }

    #[test]
    fn first_collision_reports_earliest_closing_pair() {
        assert_eq!(first_collision(&[0, 1, 2]), None);
        assert_eq!(first_collision(&[5, 3, 5]), Some((0, 2)));
        assert_eq!(first_collision(&[1, 2, 2, 1]), Some((1, 2)));
    }
}
