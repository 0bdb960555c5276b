use serde::{Deserialize, Serialize};

use super::stats::RateEstimate;
use super::strategy::{estimate_success, Strategy};
use crate::error::{Error, Result};
use crate::oracles::{DistributionKind, DistributionSpec};
use crate::qsim::SimulatorCaps;
use crate::rng::child_seed;

/// Rows with a success rate below this are used for slope fits.
pub const LOW_REGIME: f64 = 0.2;

/// Which instances a sweep draws.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepFamily {
    /// Uniform `[N] -> [N]`.
    #[default]
    Collision,
    /// Case-1 set-equality pairs over `[N/2] -> [N]`, joined into one
    /// `[N] -> [N]` table.
    SetEquality,
}

impl SweepFamily {
    pub fn spec(self, n: usize) -> DistributionSpec {
        match self {
            SweepFamily::Collision => DistributionSpec::new(DistributionKind::Uniform, n, n, 0),
            SweepFamily::SetEquality => DistributionSpec::new(DistributionKind::SetEquality { case: 1 }, n / 2, n, 0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepFamily::Collision => "collision",
            SweepFamily::SetEquality => "set-equality",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: SweepFamily,
    pub strategy: Strategy,
    pub ns: Vec<usize>,
    pub qs: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// Domain size of the queried table.
    pub m: usize,
    pub q: usize,
    pub estimate: RateEstimate,
    pub seed: u64,
    pub queries: u64,
}

/// Weighted least-squares fit of `ln s = a + b·ln(q+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub n: Option<usize>,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub points: usize,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<SlopeFit>,
    /// `max s·N/(q+1)³` over low-regime rows; a fitted constant, not a bound.
    pub envelope_constant: Option<f64>,
}

impl SweepResult {
    pub fn fit_for(&self, n: usize) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.n == Some(n))
    }
}

fn in_low_regime(row: &SweepRow) -> bool {
    row.estimate.successes > 0 && row.estimate.rate < LOW_REGIME
}

/// Fits the low-regime rows. Each point is weighted by the inverse of the
/// delta-method variance `(1−s)/(t·s)` of `ln s`. Needs two distinct `q`.
pub fn fit_loglog(rows: &[SweepRow]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| in_low_regime(r))
        .map(|r| {
            let s = r.estimate.rate;
            let w = r.estimate.trials as f64 * s / (1.0 - s);
            (((r.q + 1) as f64).ln(), s.ln(), w)
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = pts.iter().map(|p| p.1 - intercept - slope * p.0).collect();
    Some(SlopeFit { n: rows.first().map(|r| r.n), slope, slope_se: (1.0 / sxx).sqrt(), intercept, points: pts.len(), residuals })
}

pub fn envelope_constant(rows: &[SweepRow]) -> Option<f64> {
    rows.iter()
        .filter(|r| in_low_regime(r))
        .map(|r| r.estimate.rate * r.n as f64 / ((r.q + 1) as f64).powi(3))
        .max_by(f64::total_cmp)
}

/// Estimates success on every `(N, q)` pair, then fits each `N` separately.
pub fn scaling_sweep(config: &SweepConfig, caps: &SimulatorCaps) -> Result<SweepResult> {
    if config.ns.is_empty() || config.qs.is_empty() || config.trials == 0 {
        return Err(Error::Parameter("sweep needs N values, q values and trials".into()));
    }
    let mut rows = Vec::with_capacity(config.ns.len() * config.qs.len());
    for (i, &n) in config.ns.iter().enumerate() {
        let spec = config.family.spec(n);
        for (j, &q) in config.qs.iter().enumerate() {
            let seed = child_seed(config.seed, "sweep", (i * config.qs.len() + j) as u64);
            let e = estimate_success(config.strategy, &spec, q, config.trials, seed, caps)?;
            let m = spec.m * if config.family == SweepFamily::SetEquality { 2 } else { 1 };
            rows.push(SweepRow { n, m, q, estimate: e.estimate, seed, queries: e.total_queries });
        }
    }
    let fits = config
        .ns
        .iter()
        .filter_map(|&n| {
            let sub: Vec<SweepRow> = rows.iter().filter(|r| r.n == n).copied().collect();
            fit_loglog(&sub)
        })
        .collect();
    let envelope_constant = envelope_constant(&rows);
    Ok(SweepResult { config: config.clone(), rows, fits, envelope_constant })
}
