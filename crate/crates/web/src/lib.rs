//! WebAssembly bindings for the static demo page in `www/`.

use qcl_core::harness::{scaling_sweep, CsvRow, Strategy, SweepConfig, SweepFamily};
use qcl_core::oracles::{collision_profile, sample_table, DistributionKind, DistributionSpec, RParam};
use qcl_core::plot::render_svg;
use qcl_core::qsim::{grover_success_probability, SimulatorCaps};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest sweep the page will run; keeps the tab responsive.
const MAX_WORK: u64 = 5_000_000;

/// Samples `f: [n] -> [n]` from D_r (`r = 0` means r = ∞) and returns
/// `{"images": [...], "profile": {multiplicity: count}, "distinct": k}`.
pub fn sample_dr_json(n: usize, r: u32, seed: u64) -> Result<String, String> {
    let r = if r == 0 { RParam::Infinity } else { RParam::Finite(u64::from(r)) };
    let spec = DistributionSpec::new(DistributionKind::Dr { r }, n, n, seed);
    let table = sample_table(&spec).map_err(|e| e.to_string())?;
    let profile = collision_profile(&table);
    let distinct: usize = profile.counts.values().sum();
    Ok(json!({ "images": table.images(), "profile": profile.counts, "distinct": distinct }).to_string())
}

/// Grover success probability after 0..=max_iter iterations.
pub fn grover_curve_values(marked: usize, space: usize, max_iter: usize) -> Vec<f64> {
    (0..=max_iter).map(|j| grover_success_probability(marked, space, j)).collect()
}

/// Runs a collision-check sweep at one `n` over q = 0..=qmax and renders it.
pub fn scaling_svg_string(n: usize, qmax: usize, trials: u32, seed: u64) -> Result<String, String> {
    if n < 2 || qmax == 0 || trials == 0 {
        return Err("need n >= 2, qmax >= 1 and trials >= 1".into());
    }
    let work = u64::from(trials) * (qmax as u64 + 1) * (qmax as u64 + 1);
    if work > MAX_WORK {
        return Err(format!("sweep too large for the browser ({work} > {MAX_WORK} evaluations)"));
    }
    let cfg = SweepConfig {
        family: SweepFamily::Collision,
        strategy: Strategy::CollisionCheck,
        ns: vec![n],
        qs: (0..=qmax).collect(),
        trials: u64::from(trials),
        seed,
    };
    let result = scaling_sweep(&cfg, &SimulatorCaps::default()).map_err(|e| e.to_string())?;
    let rows = CsvRow::from_sweep("sweep", &result);
    render_svg(&rows, result.envelope_constant, &format!("collision-check, N = {n}")).ok_or_else(|| "nothing to plot".into())
}

#[wasm_bindgen]
pub fn sample_dr(n: usize, r: u32, seed: u32) -> Result<String, JsError> {
    sample_dr_json(n, r, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn grover_curve(marked: usize, space: usize, max_iter: usize) -> Vec<f64> {
    grover_curve_values(marked, space, max_iter)
}

#[wasm_bindgen]
pub fn scaling_svg(n: usize, qmax: usize, trials: u32, seed: u32) -> Result<String, JsError> {
    scaling_svg_string(n, qmax, trials, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn d1_sample_is_constant() {
        let v: Value = serde_json::from_str(&sample_dr_json(16, 1, 3).unwrap()).unwrap();
        let images = v["images"].as_array().unwrap();
        assert!(images.iter().all(|x| x == &images[0]));
        assert_eq!(v["distinct"], 1);
        assert_eq!(v["profile"]["16"], 1);
    }

    #[test]
    fn d_inf_sample_is_a_permutation() {
        let v: Value = serde_json::from_str(&sample_dr_json(32, 0, 9).unwrap()).unwrap();
        assert_eq!(v["distinct"], 32);
        assert_eq!(sample_dr_json(32, 0, 9).unwrap(), sample_dr_json(32, 0, 9).unwrap());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(sample_dr_json(0, 2, 0).is_err());
        assert!(scaling_svg_string(64, 0, 10, 0).is_err());
        assert!(scaling_svg_string(64, 10_000, 100, 0).is_err());
    }

    #[test]
    fn grover_curve_peaks_near_optimum() {
        let c = grover_curve_values(1, 64, 12);
        assert_eq!(c.len(), 13);
        assert!((c[0] - 1.0 / 64.0).abs() < 1e-12);
        let best = (0..c.len()).max_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap();
        assert_eq!(best, 6);
    }

    #[test]
    fn scaling_plot_has_one_series() {
        let svg = scaling_svg_string(128, 8, 200, 1).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("class=\"series\"").count(), 1);
    }
}
