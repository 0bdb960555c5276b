use rand::Rng;

use crate::error::{Error, Result};
use crate::oracles::FunctionTable;

/// `N·2^c` with `c = max(0, ⌈log₂(M/N)⌉)`.
pub fn rounded_domain_size(m: usize, n: usize) -> Result<usize> {
    if m == 0 || n == 0 {
        return Err(Error::Parameter("domain and codomain must be non-empty".into()));
    }
    let mut size = n;
    while size < m {
        size = size
            .checked_mul(2)
            .ok_or_else(|| Error::Parameter(format!("rounded domain for M={m} overflows")))?;
    }
    Ok(size)
}

/// Extends `f` to a domain of size `N·2^c` with fresh uniform images on the
/// new points. The first `M` entries are unchanged.
pub fn round_up_domain(f: &FunctionTable, rng: &mut impl Rng) -> Result<FunctionTable> {
    let (m, n) = (f.domain_size(), f.codomain_size());
    let size = rounded_domain_size(m, n)?;
    let mut images = f.images().to_vec();
    images.extend((m..size).map(|_| rng.random_range(0..n)));
    FunctionTable::new(size, n, images)
}
