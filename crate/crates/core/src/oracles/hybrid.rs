use serde::{Deserialize, Serialize};

use super::table::FunctionTable;
use crate::error::{Error, Result};

/// A chain of component tables `f_1, ..., f_l`, composed as
/// `f_1 ∘ f_2 ∘ ... ∘ f_l`.
///
/// `components[0]` is `f_1`, the outermost stage. Adjacent stages must
/// compose: the codomain of `f_{i+1}` is the domain of `f_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridChain {
    components: Vec<FunctionTable>,
}

impl HybridChain {
    pub fn new(components: Vec<FunctionTable>) -> Result<Self> {
        for (i, pair) in components.windows(2).enumerate() {
            let (outer, inner) = (&pair[0], &pair[1]);
            if inner.codomain_size() != outer.domain_size() {
                return Err(Error::Composition(format!(
                    "stage {} has codomain {} but stage {} has domain {}",
                    i + 2,
                    inner.codomain_size(),
                    i + 1,
                    outer.domain_size()
                )));
            }
        }
        Ok(HybridChain { components })
    }

    pub fn empty() -> Self {
        HybridChain { components: Vec::new() }
    }

    pub fn components(&self) -> &[FunctionTable] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Domain of the innermost stage, if any.
    pub fn input_size(&self) -> Option<usize> {
        self.components.last().map(FunctionTable::domain_size)
    }

    /// Evaluates the chain at a point of the innermost stage's domain.
    pub fn eval(&self, v: usize) -> usize {
        self.components.iter().rev().fold(v, |acc, f| f.eval(acc))
    }
}

/// Which part of a composition first merged two inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Base,
    /// 1-based index `i` of `f_i` in the chain.
    Component(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCollision {
    pub stage: Stage,
    /// Distinct inputs to `stage` that it maps to the same value.
    pub inputs: (usize, usize),
}

fn check_base(chain: &HybridChain, base: &FunctionTable) -> Result<()> {
    match chain.input_size() {
        Some(d) if d != base.codomain_size() => Err(Error::Composition(format!(
            "base codomain {} does not match innermost stage domain {d}",
            base.codomain_size()
        ))),
        _ => Ok(()),
    }
}

/// Tabulates `f_1 ∘ ... ∘ f_l ∘ base`.
pub fn compose(chain: &HybridChain, base: &FunctionTable) -> Result<FunctionTable> {
    check_base(chain, base)?;
    let n = chain.components.first().map_or(base.codomain_size(), FunctionTable::codomain_size);
    FunctionTable::from_fn(base.domain_size(), n, |x| chain.eval(base.eval(x)))
}

/// Walks a collision of the composed function from the base outward and
/// returns the first stage whose two inputs differ but whose outputs agree.
pub fn find_component_collision(
    chain: &HybridChain,
    base: &FunctionTable,
    x1: usize,
    x2: usize,
) -> Result<ComponentCollision> {
    check_base(chain, base)?;
    let m = base.domain_size();
    if x1 == x2 || x1 >= m || x2 >= m {
        return Err(Error::ContractViolation(format!(
            "({x1}, {x2}) is not a pair of distinct points of [0, {m})"
        )));
    }
    let (mut v1, mut v2) = (base.eval(x1), base.eval(x2));
    if v1 == v2 {
        return Ok(ComponentCollision { stage: Stage::Base, inputs: (x1, x2) });
    }
    for (idx, f) in chain.components.iter().enumerate().rev() {
        let (w1, w2) = (f.eval(v1), f.eval(v2));
        if w1 == w2 {
            return Ok(ComponentCollision { stage: Stage::Component(idx + 1), inputs: (v1, v2) });
        }
        v1 = w1;
        v2 = w2;
    }
    Err(Error::ContractViolation(format!(
        "({x1}, {x2}) is not a collision of the composed function"
    )))
}

impl ComponentCollision {
    /// Re-evaluates the named stage on the reported inputs.
    pub fn is_valid(&self, chain: &HybridChain, base: &FunctionTable) -> bool {
        let (a, b) = self.inputs;
        let table = match self.stage {
            Stage::Base => base,
            Stage::Component(i) => match chain.components.get(i.wrapping_sub(1)) {
                Some(t) => t,
                None => return false,
            },
        };
        table.is_collision(a, b)
    }
}
