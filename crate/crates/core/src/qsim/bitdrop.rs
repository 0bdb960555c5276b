use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bht::CollisionClaim;
use super::oracle::{apply_inverse_query, apply_query, OracleGate, OutputTarget, QueryBudget, QueryConvention};
use super::state::{dft_matrix, SimulatorCaps, Statevector};
use crate::error::{Error, Result};
use crate::oracles::FunctionTable;
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AdversaryStep {
    Fourier { register: usize },
    /// `|x, y⟩ -> |x, y + f(x) mod N'⟩`
    Query { input: usize, output: usize },
}

/// A query adversary for `f: [2N'] -> [N']` written as a fixed circuit.
/// All registers start at zero; after the last step the whole state is
/// measured and the two `output` registers give the claimed pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerAdversary {
    registers: Vec<usize>,
    steps: Vec<AdversaryStep>,
    output: (usize, usize),
}

impl InnerAdversary {
    pub fn new(registers: Vec<usize>, steps: Vec<AdversaryStep>, output: (usize, usize)) -> Result<Self> {
        let r = registers.len();
        let in_range = |i: usize| i < r;
        let ok = in_range(output.0)
            && in_range(output.1)
            && steps.iter().all(|s| match *s {
                AdversaryStep::Fourier { register } => in_range(register),
                AdversaryStep::Query { input, output } => in_range(input) && in_range(output) && input != output,
            });
        if !ok {
            return Err(Error::Dimension("adversary step refers to a missing register".into()));
        }
        Ok(InnerAdversary { registers, steps, output })
    }

    /// Two independent "superpose, query, measure" pairs. Measuring the
    /// image registers collapses each input to a random preimage, so the
    /// output is an f-collision whenever the two images agree.
    pub fn two_pair_collapse(n_prime: usize) -> Self {
        let m = 2 * n_prime;
        let steps = vec![
            AdversaryStep::Fourier { register: 0 },
            AdversaryStep::Query { input: 0, output: 1 },
            AdversaryStep::Fourier { register: 2 },
            AdversaryStep::Query { input: 2, output: 3 },
        ];
        InnerAdversary { registers: vec![m, n_prime, m, n_prime], steps, output: (0, 2) }
    }

    pub fn registers(&self) -> &[usize] {
        &self.registers
    }

    pub fn steps(&self) -> &[AdversaryStep] {
        &self.steps
    }

    pub fn queries(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, AdversaryStep::Query { .. })).count()
    }
}

/// How the reduction answers an f-query with g.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitDropMode {
    /// The top bit is XORed into a fresh `|+⟩` qubit, which it leaves
    /// unchanged. One g-query per f-query.
    #[default]
    PlusState,
    /// g is computed into scratch, its low digit added into the response
    /// register, then uncomputed. Two g-queries per f-query.
    Uncompute,
    /// The top bit is written into a fresh `|0⟩` qubit and left there.
    /// Entangles the dropped bit with the adversary's registers.
    ZeroAncilla,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitDropTrial {
    pub claim: CollisionClaim,
    pub f_collision: bool,
    pub inner_queries: u64,
    /// g-queries made while simulating the adversary.
    pub g_queries: u64,
    /// Fidelity of the reduction's state on the adversary registers with
    /// the direct simulation, minimised over steps.
    pub min_fidelity: f64,
}

/// `f(x) = g(x) mod N'` for `g` with codomain `2N'`.
pub fn drop_top_bit(g: &FunctionTable) -> Result<FunctionTable> {
    let n2 = g.codomain_size();
    if !n2.is_multiple_of(2) {
        return Err(Error::Dimension(format!("codomain {n2} has no top bit to drop")));
    }
    FunctionTable::from_fn(g.domain_size(), n2 / 2, |x| g.eval(x) % (n2 / 2))
}

/// `Σ_e |Σ_a conj(ψ_A[a]) ψ_B[a, e]|²` where `ψ_B`'s extra registers come last.
pub fn reduced_fidelity(direct: &Statevector, extended: &Statevector) -> Result<f64> {
    let la = direct.len();
    if la == 0 || !extended.len().is_multiple_of(la) || extended.dims()[..direct.dims().len()] != *direct.dims() {
        return Err(Error::Dimension("extended state does not contain the direct registers first".into()));
    }
    let e = extended.len() / la;
    let (a, b) = (direct.amplitudes(), extended.amplitudes());
    Ok((0..e)
        .map(|j| (0..la).map(|i| a[i].conj() * b[i * e + j]).sum::<Complex64>().norm_sqr())
        .sum())
}

/// Runs `adversary` against `f = g mod N'` while answering every query
/// through `g`, then forwards its measured pair as a claim against `g`.
/// Alongside, the adversary is simulated directly against `f` and the
/// two states are compared after every step.
pub fn bit_drop_adversary(
    adversary: &InnerAdversary,
    g: &FunctionTable,
    mode: BitDropMode,
    caps: &SimulatorCaps,
    rng: &mut impl Rng,
) -> Result<BitDropTrial> {
    let f = drop_top_bit(g)?;
    let n_prime = f.codomain_size();
    for step in &adversary.steps {
        if let AdversaryStep::Query { input, output } = *step {
            if adversary.registers[input] != g.domain_size() || adversary.registers[output] != n_prime {
                return Err(Error::Dimension(format!(
                    "query registers ({}, {}) do not match f: [{}] -> [{n_prime}]",
                    adversary.registers[input],
                    adversary.registers[output],
                    g.domain_size()
                )));
            }
        }
    }
    let f_gate = OracleGate::new(f.clone(), QueryConvention::AddMod)?;
    let g_gate = OracleGate::new(g.clone(), QueryConvention::Composite { top_bits: 1 })?;
    let extra_dim = match mode {
        BitDropMode::PlusState | BitDropMode::ZeroAncilla => 2,
        BitDropMode::Uncompute => 2 * n_prime,
    };
    let base = adversary.registers.len();
    let mut dims = adversary.registers.clone();
    dims.extend(std::iter::repeat_n(extra_dim, adversary.queries()));

    let mut direct = Statevector::zero(&adversary.registers, caps)?;
    let mut reduced = Statevector::zero(&dims, caps)?;
    if mode == BitDropMode::PlusState {
        let h = dft_matrix(2);
        for reg in base..dims.len() {
            reduced.apply_register_unitary(reg, &h)?;
        }
    }
    let mut inner_budget = QueryBudget::new();
    let mut g_budget = QueryBudget::new();
    let mut min_fidelity = reduced_fidelity(&direct, &reduced)?;
    let mut next_extra = base;
    for step in &adversary.steps {
        match *step {
            AdversaryStep::Fourier { register } => {
                let u = dft_matrix(adversary.registers[register]);
                direct.apply_register_unitary(register, &u)?;
                reduced.apply_register_unitary(register, &u)?;
            }
            AdversaryStep::Query { input, output } => {
                apply_query(&mut direct, &f_gate, input, OutputTarget::Register(output), &mut inner_budget)?;
                let extra = next_extra;
                next_extra += 1;
                match mode {
                    BitDropMode::PlusState | BitDropMode::ZeroAncilla => {
                        let target = OutputTarget::Split { top: extra, digit: output };
                        apply_query(&mut reduced, &g_gate, input, target, &mut g_budget)?;
                    }
                    BitDropMode::Uncompute => {
                        let scratch = OutputTarget::Register(extra);
                        apply_query(&mut reduced, &g_gate, input, scratch, &mut g_budget)?;
                        let (ys, ss) = (reduced.stride(output), reduced.stride(extra));
                        reduced.permute_basis(|i| {
                            let y = (i / ys) % n_prime;
                            let lo = (i / ss) % extra_dim % n_prime;
                            i - y * ys + ((y + lo) % n_prime) * ys
                        });
                        apply_inverse_query(&mut reduced, &g_gate, input, scratch, &mut g_budget)?;
                    }
                }
            }
        }
        min_fidelity = min_fidelity.min(reduced_fidelity(&direct, &reduced)?);
    }
    let outcome = reduced.sample_basis(rng);
    let (x1, x2) = (outcome[adversary.output.0], outcome[adversary.output.1]);
    let f_collision = f.is_collision(x1, x2);
    let mut verify = QueryBudget::new();
    let claim = CollisionClaim::check(g, x1, x2, &mut verify);
    Ok(BitDropTrial {
        claim,
        f_collision,
        inner_queries: inner_budget.queries(),
        g_queries: g_budget.queries(),
        min_fidelity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftEstimate {
    pub trials: u64,
    pub f_collisions: u64,
    pub g_collisions: u64,
    pub min_fidelity: f64,
}

impl LiftEstimate {
    pub fn rate(&self) -> f64 {
        if self.f_collisions == 0 {
            0.0
        } else {
            self.g_collisions as f64 / self.f_collisions as f64
        }
    }
}

/// Runs the two-pair adversary through the reduction on fresh uniform
/// `g: [2N'] -> [2N']` until `target` trials have produced an f-collision.
pub fn estimate_lift_rate(n_prime: usize, target: u64, mode: BitDropMode, seed: u64, caps: &SimulatorCaps) -> Result<LiftEstimate> {
    let adversary = InnerAdversary::two_pair_collapse(n_prime);
    let mut est = LiftEstimate { trials: 0, f_collisions: 0, g_collisions: 0, min_fidelity: 1.0 };
    while est.f_collisions < target {
        let mut rng = stream(seed, "bit-drop", est.trials);
        let g = crate::oracles::uniform_table(2 * n_prime, 2 * n_prime, &mut rng);
        let trial = bit_drop_adversary(&adversary, &g, mode, caps, &mut rng)?;
        est.trials += 1;
        est.min_fidelity = est.min_fidelity.min(trial.min_fidelity);
        if trial.f_collision {
            est.f_collisions += 1;
            est.g_collisions += u64::from(trial.claim.verified);
        }
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> SimulatorCaps {
        SimulatorCaps::default()
    }

    #[test]
    fn reduction_is_invisible_to_the_adversary() {
        for (seed, n_prime) in [(0, 2), (1, 3), (2, 4)] {
            let g = crate::oracles::uniform_table(2 * n_prime, 2 * n_prime, &mut stream(seed, "g", 0));
            let adv = InnerAdversary::two_pair_collapse(n_prime);
            for mode in [BitDropMode::PlusState, BitDropMode::Uncompute] {
                let t = bit_drop_adversary(&adv, &g, mode, &caps(), &mut stream(seed, "m", 0)).unwrap();
                assert!(t.min_fidelity > 1.0 - 1e-9, "{mode:?}: {}", t.min_fidelity);
                let per = if mode == BitDropMode::Uncompute { 2 } else { 1 };
                assert_eq!(t.g_queries, per * t.inner_queries);
            }
        }
    }

    #[test]
    fn leaving_the_bit_behind_is_detected() {
        // top bits of g differ across x, so the ancilla records which-x information
        let g = FunctionTable::new(4, 4, vec![0, 2, 1, 3]).unwrap();
        let adv = InnerAdversary::two_pair_collapse(2);
        let t = bit_drop_adversary(&adv, &g, BitDropMode::ZeroAncilla, &caps(), &mut stream(0, "m", 0)).unwrap();
        assert!(t.min_fidelity < 0.99);
    }

    #[test]
    fn claim_lifts_only_with_matching_top_bits() {
        // f-images all 0; top bits split {0,1} vs {2,3}
        let g = FunctionTable::new(4, 4, vec![0, 0, 2, 2]).unwrap();
        let adv = InnerAdversary::two_pair_collapse(2);
        for i in 0..40 {
            let t = bit_drop_adversary(&adv, &g, BitDropMode::PlusState, &caps(), &mut stream(5, "m", i)).unwrap();
            let (a, b) = (t.claim.x1, t.claim.x2);
            if t.f_collision {
                assert_eq!(t.claim.verified, a / 2 == b / 2);
            }
        }
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let g = FunctionTable::identity(6);
        let adv = InnerAdversary::two_pair_collapse(2);
        assert!(bit_drop_adversary(&adv, &g, BitDropMode::PlusState, &caps(), &mut stream(0, "m", 0)).is_err());
    }
}
