use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::oracle::{apply_query, OracleGate, OutputTarget, QueryBudget, QueryConvention};
use super::state::{SimulatorCaps, Statevector};
use crate::error::{Error, Result};
use crate::oracles::FunctionTable;

/// `sin²((2t+1)θ)` with `sin θ = √(marked/space)`.
pub fn grover_success_probability(marked: usize, space: usize, iterations: usize) -> f64 {
    if space == 0 {
        return 0.0;
    }
    let theta = (marked as f64 / space as f64).sqrt().min(1.0).asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroverOutcome {
    pub measured: usize,
    pub marked: bool,
    /// Probability mass on marked elements just before measurement.
    pub success_probability: f64,
    pub queries: u64,
}

/// Grover search over `[marked.len()]` with `iterations` rounds of
/// phase-flip and diffusion from the uniform state.
///
/// The phase flip is the predicate's XOR oracle acting on a `|−⟩`
/// ancilla, one query per iteration.
pub fn grover_search(marked: &[bool], iterations: usize, caps: &SimulatorCaps, rng: &mut impl Rng) -> Result<GroverOutcome> {
    let m = marked.len();
    if !marked.iter().any(|&b| b) {
        return Err(Error::Search("no marked element".into()));
    }
    let predicate = FunctionTable::from_fn(m, 2, |x| usize::from(marked[x]))?;
    let oracle = OracleGate::new(predicate, QueryConvention::Xor)?;
    // uniform over x, ancilla in |−⟩
    let amp = 1.0 / ((2 * m) as f64).sqrt();
    let init: Vec<Complex64> = (0..2 * m)
        .map(|i| Complex64::new(if i % 2 == 0 { amp } else { -amp }, 0.0))
        .collect();
    let mut state = Statevector::from_amplitudes(&[m, 2], init, caps)?;
    let axis = vec![1.0 / (m as f64).sqrt(); m];
    let mut budget = QueryBudget::new();
    for _ in 0..iterations {
        apply_query(&mut state, &oracle, 0, OutputTarget::Register(1), &mut budget)?;
        state.reflect_register(0, &axis)?;
    }
    let probs = state.register_probabilities(0)?;
    let success_probability = probs.iter().zip(marked).filter(|(_, &b)| b).map(|(p, _)| p).sum();
    let measured = state.sample_registers(&[0], rng)?[0];
    Ok(GroverOutcome { measured, marked: marked[measured], success_probability, queries: budget.queries() })
}

/// Amplitude amplification restricted to `domain`, with the marking
/// phase flip applied directly to the search register. Returns the state
/// over `[domain.len()]`.
pub(crate) fn amplify_compressed(domain: &[bool], marked: &[bool], iterations: usize, caps: &SimulatorCaps) -> Result<Statevector> {
    let m = domain.len();
    let size = domain.iter().filter(|&&d| d).count();
    if size == 0 {
        return Err(Error::Search("empty search domain".into()));
    }
    let a = 1.0 / (size as f64).sqrt();
    let axis: Vec<f64> = domain.iter().map(|&d| if d { a } else { 0.0 }).collect();
    let init = axis.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut state = Statevector::from_amplitudes(&[m], init, caps)?;
    for _ in 0..iterations {
        state.apply_phase(|x| if marked[x] { Complex64::new(-1.0, 0.0) } else { Complex64::new(1.0, 0.0) });
        state.reflect_register(0, &axis)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    fn marks(m: usize, which: &[usize]) -> Vec<bool> {
        (0..m).map(|x| which.contains(&x)).collect()
    }

    #[test]
    fn one_of_four_is_found_with_certainty() {
        let out = grover_search(&marks(4, &[2]), 1, &SimulatorCaps::default(), &mut rng(1)).unwrap();
        assert!((out.success_probability - 1.0).abs() < 1e-12);
        assert_eq!(out.measured, 2);
        assert_eq!(out.queries, 1);
    }

    #[test]
    fn zero_iterations_is_uniform_sampling() {
        let out = grover_search(&marks(10, &[1, 4, 7]), 0, &SimulatorCaps::default(), &mut rng(2)).unwrap();
        assert!((out.success_probability - 0.3).abs() < 1e-12);
        assert_eq!(out.queries, 0);
    }

    #[test]
    fn two_of_eight_after_one_iteration() {
        // sin θ = 1/2, so sin²(3θ) = 1
        let out = grover_search(&marks(8, &[0, 5]), 1, &SimulatorCaps::default(), &mut rng(3)).unwrap();
        assert!((out.success_probability - grover_success_probability(2, 8, 1)).abs() < 1e-12);
        assert!((out.success_probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simulator_matches_rotation_formula() {
        for (m, k) in [(16usize, 1usize), (64, 3), (100, 7), (37, 2)] {
            let marked: Vec<bool> = (0..m).map(|x| x % (m / k) == 0 && x / (m / k) < k).collect();
            let kk = marked.iter().filter(|&&b| b).count();
            for t in 0..8 {
                let out = grover_search(&marked, t, &SimulatorCaps::default(), &mut rng(t as u64)).unwrap();
                let expect = grover_success_probability(kk, m, t);
                assert!((out.success_probability - expect).abs() < 1e-6, "m={m} k={kk} t={t}");
            }
        }
    }

    #[test]
    fn empty_marked_set_is_an_error() {
        assert!(matches!(
            grover_search(&[false; 4], 1, &SimulatorCaps::default(), &mut rng(0)),
            Err(Error::Search(_))
        ));
    }

    #[test]
    fn restricted_domain_uses_its_own_rotation() {
        let m = 20;
        let domain: Vec<bool> = (0..m).map(|x| x >= 4).collect();
        let marked = marks(m, &[6, 11]);
        for t in 0..5 {
            let s = amplify_compressed(&domain, &marked, t, &SimulatorCaps::default()).unwrap();
            let p = s.register_probabilities(0).unwrap();
            assert!(p[..4].iter().all(|&v| v < 1e-20));
            let got = p[6] + p[11];
            assert!((got - grover_success_probability(2, 16, t)).abs() < 1e-9);
        }
    }
}
