use serde::{Deserialize, Serialize};

use super::state::Statevector;
use crate::error::{Error, Result};
use crate::oracles::FunctionTable;

/// How an oracle response is written into its output register.
///
/// Values of a codomain of size `n = 2^top_bits * base` are split as
/// `value = hi * base + lo`; `hi` is XORed in and `lo` is added mod `base`.
/// `Xor` is the all-bits case and `AddMod` the single-digit case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "convention", rename_all = "snake_case")]
pub enum QueryConvention {
    Xor,
    AddMod,
    Composite { top_bits: u32 },
}

/// Query count consumed so far. Every oracle application charges exactly one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QueryBudget {
    q: u64,
}

impl QueryBudget {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn queries(&self) -> u64 {
        self.q
    }

    pub fn charge(&mut self, count: u64) {
        self.q += count;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleGate {
    table: FunctionTable,
    convention: QueryConvention,
    top_dim: usize,
    base: usize,
}

/// Where an oracle writes: one register holding the whole value, or a
/// top-bits register and a digit register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputTarget {
    Register(usize),
    Split { top: usize, digit: usize },
}

impl OracleGate {
    pub fn new(table: FunctionTable, convention: QueryConvention) -> Result<Self> {
        let n = table.codomain_size();
        let top_bits = match convention {
            QueryConvention::Xor => {
                if !n.is_power_of_two() {
                    return Err(Error::Parameter(format!("XOR queries need a power-of-two codomain, got {n}")));
                }
                n.trailing_zeros()
            }
            QueryConvention::AddMod => 0,
            QueryConvention::Composite { top_bits } => top_bits,
        };
        let top_dim = 1usize
            .checked_shl(top_bits)
            .filter(|&t| n.is_multiple_of(t))
            .ok_or_else(|| Error::Parameter(format!("codomain {n} is not 2^{top_bits} times an integer")))?;
        Ok(OracleGate { base: n / top_dim, top_dim, table, convention })
    }

    /// XOR oracle on power-of-two codomains, add-mod otherwise.
    pub fn standard(table: FunctionTable) -> Self {
        let convention = if table.codomain_size().is_power_of_two() {
            QueryConvention::Xor
        } else {
            QueryConvention::AddMod
        };
        Self::new(table, convention).expect("standard conventions always fit")
    }

    pub fn table(&self) -> &FunctionTable {
        &self.table
    }

    pub fn convention(&self) -> QueryConvention {
        self.convention
    }

    /// `(2^top_bits, base)`.
    pub fn split_dims(&self) -> (usize, usize) {
        (self.top_dim, self.base)
    }

    #[inline]
    fn write(&self, y: usize, v: usize, inverse: bool) -> usize {
        let (yh, yl) = (y / self.base, y % self.base);
        let (vh, vl) = (v / self.base, v % self.base);
        let lo = if inverse { (yl + self.base - vl) % self.base } else { (yl + vl) % self.base };
        (yh ^ vh) * self.base + lo
    }

    /// Output register value after writing `f`'s response `v` onto `y`.
    pub fn respond(&self, y: usize, v: usize) -> usize {
        self.write(y, v, false)
    }

    /// True when every response acts as a bijection on the output register,
    /// so the induced basis map is a permutation.
    pub fn is_basis_permutation(&self) -> bool {
        let n = self.table.codomain_size();
        (0..n).all(|v| {
            let mut seen = vec![false; n];
            (0..n).all(|y| !std::mem::replace(&mut seen[self.respond(y, v)], true))
        })
    }

    fn apply(&self, state: &mut Statevector, input: usize, output: OutputTarget, inverse: bool) -> Result<()> {
        state.check_register(input)?;
        if state.dims()[input] != self.table.domain_size() {
            return Err(Error::Dimension(format!(
                "input register has dimension {} but the oracle domain is {}",
                state.dims()[input],
                self.table.domain_size()
            )));
        }
        let in_stride = state.stride(input);
        let in_dim = state.dims()[input];
        match output {
            OutputTarget::Register(out) => {
                state.check_register(out)?;
                if out == input || state.dims()[out] != self.table.codomain_size() {
                    return Err(Error::Dimension(format!(
                        "output register {out} of dimension {} cannot hold codomain {}",
                        state.dims()[out],
                        self.table.codomain_size()
                    )));
                }
                let (os, od) = (state.stride(out), state.dims()[out]);
                state.permute_basis(|i| {
                    let x = (i / in_stride) % in_dim;
                    let y = (i / os) % od;
                    let y2 = self.write(y, self.table.eval(x), inverse);
                    i - y * os + y2 * os
                });
            }
            OutputTarget::Split { top, digit } => {
                state.check_register(top)?;
                state.check_register(digit)?;
                if state.dims()[top] != self.top_dim || state.dims()[digit] != self.base || top == digit {
                    return Err(Error::Dimension(format!(
                        "split output needs registers of dimension ({}, {}), got ({}, {})",
                        self.top_dim,
                        self.base,
                        state.dims()[top],
                        state.dims()[digit]
                    )));
                }
                let (ts, ds) = (state.stride(top), state.stride(digit));
                let (td, dd) = (self.top_dim, self.base);
                state.permute_basis(|i| {
                    let x = (i / in_stride) % in_dim;
                    let (h, l) = ((i / ts) % td, (i / ds) % dd);
                    let y2 = self.write(h * self.base + l, self.table.eval(x), inverse);
                    let (h2, l2) = (y2 / self.base, y2 % self.base);
                    i - h * ts - l * ds + h2 * ts + l2 * ds
                });
            }
        }
        Ok(())
    }
}

/// One quantum query: `|x, y⟩ -> |x, y ⊕ f(x)⟩` under the oracle's
/// convention, extended linearly. Charges one query.
pub fn apply_query(
    state: &mut Statevector,
    oracle: &OracleGate,
    input: usize,
    output: OutputTarget,
    budget: &mut QueryBudget,
) -> Result<()> {
    oracle.apply(state, input, output, false)?;
    budget.charge(1);
    Ok(())
}

/// The inverse query (identical to [`apply_query`] for pure XOR oracles).
/// Also charges one query.
pub fn apply_inverse_query(
    state: &mut Statevector,
    oracle: &OracleGate,
    input: usize,
    output: OutputTarget,
    budget: &mut QueryBudget,
) -> Result<()> {
    oracle.apply(state, input, output, true)?;
    budget.charge(1);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::state::{dft_matrix, SimulatorCaps};
    use num_complex::Complex64;

    fn table(m: usize, n: usize, images: &[usize]) -> FunctionTable {
        FunctionTable::new(m, n, images.to_vec()).unwrap()
    }

    #[test]
    fn query_on_zero_writes_the_image() {
        let f = table(4, 4, &[3, 1, 1, 0]);
        let oracle = OracleGate::standard(f.clone());
        let mut budget = QueryBudget::new();
        for x in 0..4 {
            let mut s = Statevector::basis(&[4, 4], &[x, 0], &SimulatorCaps::default()).unwrap();
            apply_query(&mut s, &oracle, 0, OutputTarget::Register(1), &mut budget).unwrap();
            assert_eq!(s.amplitude(&[x, f.eval(x)]).unwrap(), Complex64::new(1.0, 0.0));
        }
        assert_eq!(budget.queries(), 4);
    }

    #[test]
    fn xor_query_is_an_involution_and_addmod_has_an_inverse() {
        let caps = SimulatorCaps::default();
        let mut s = Statevector::zero(&[4, 4], &caps).unwrap();
        s.apply_register_unitary(0, &dft_matrix(4)).unwrap();
        s.apply_register_unitary(1, &dft_matrix(4)).unwrap();
        s.apply_phase(|i| Complex64::from_polar(1.0, i as f64 * 0.3));
        let before = s.clone();
        let mut b = QueryBudget::new();
        let xor = OracleGate::standard(table(4, 4, &[2, 3, 3, 1]));
        apply_query(&mut s, &xor, 0, OutputTarget::Register(1), &mut b).unwrap();
        apply_query(&mut s, &xor, 0, OutputTarget::Register(1), &mut b).unwrap();
        assert_eq!(s, before);
        let add = OracleGate::new(table(4, 4, &[2, 3, 3, 1]), QueryConvention::AddMod).unwrap();
        apply_query(&mut s, &add, 0, OutputTarget::Register(1), &mut b).unwrap();
        assert_ne!(s, before);
        apply_inverse_query(&mut s, &add, 0, OutputTarget::Register(1), &mut b).unwrap();
        assert_eq!(s, before);
        assert_eq!(b.queries(), 4);
    }

    #[test]
    fn uniform_superposition_query() {
        let f = table(8, 4, &[0, 3, 3, 1, 2, 2, 0, 1]);
        let oracle = OracleGate::standard(f.clone());
        let mut s = Statevector::zero(&[8, 4], &SimulatorCaps::default()).unwrap();
        s.apply_register_unitary(0, &dft_matrix(8)).unwrap();
        apply_query(&mut s, &oracle, 0, OutputTarget::Register(1), &mut QueryBudget::new()).unwrap();
        let amp = 1.0 / 8f64.sqrt();
        for x in 0..8 {
            for y in 0..4 {
                let expect = if y == f.eval(x) { amp } else { 0.0 };
                assert!((s.amplitude(&[x, y]).unwrap() - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn composite_layout_splits_bits_and_digit() {
        // codomain {0,1} x [3]: value = bit * 3 + digit
        let g = table(2, 6, &[4, 2]);
        let oracle = OracleGate::new(g, QueryConvention::Composite { top_bits: 1 }).unwrap();
        assert_eq!(oracle.split_dims(), (2, 3));
        // top bits 1 ^ 1 cancel, digits add mod 3
        assert_eq!(oracle.respond(5, 4), (2 + 1) % 3);
        assert!(oracle.is_basis_permutation());
        let mut s = Statevector::basis(&[2, 2, 3], &[0, 1, 2], &SimulatorCaps::default()).unwrap();
        apply_query(&mut s, &oracle, 0, OutputTarget::Split { top: 1, digit: 2 }, &mut QueryBudget::new()).unwrap();
        assert_eq!(s.amplitude(&[0, 0, 0]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn layout_mismatches_are_errors() {
        let oracle = OracleGate::standard(table(4, 4, &[0, 1, 2, 3]));
        let mut s = Statevector::zero(&[4, 2], &SimulatorCaps::default()).unwrap();
        let mut b = QueryBudget::new();
        assert!(apply_query(&mut s, &oracle, 0, OutputTarget::Register(1), &mut b).is_err());
        assert!(apply_query(&mut s, &oracle, 1, OutputTarget::Register(0), &mut b).is_err());
        assert_eq!(b.queries(), 0);
        assert!(OracleGate::new(table(2, 3, &[0, 1]), QueryConvention::Xor).is_err());
    }

    #[test]
    fn every_convention_is_a_permutation() {
        for n in [1usize, 2, 3, 4, 6, 8, 12] {
            let f = FunctionTable::from_fn(n, n, |x| (x * 5 + 1) % n).unwrap();
            let add = OracleGate::new(f.clone(), QueryConvention::AddMod).unwrap();
            assert!(add.is_basis_permutation());
            if n % 2 == 0 {
                let c = OracleGate::new(f.clone(), QueryConvention::Composite { top_bits: 1 }).unwrap();
                assert!(c.is_basis_permutation());
            }
            if n.is_power_of_two() {
                assert!(OracleGate::new(f, QueryConvention::Xor).unwrap().is_basis_permutation());
            }
        }
    }
}
