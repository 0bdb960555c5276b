//! The experiments the CLI can run, each with its JSON-compatible arguments.

use std::time::Instant;

use clap::Args;
use qcl_core::exact::{certify_degree_bound, Certificate, ConstraintSet, DrOracle};
use qcl_core::harness::{
    estimate_advantage, scaling_sweep, CsvRow, RateEstimate, Strategy, SweepConfig, SweepFamily,
};
use qcl_core::oracles::{collision_profile, sample, sample_table, DistributionKind, DistributionSpec, RParam, Sample};
use qcl_core::qsim::{
    bht_collision, default_subset_size, iteration_cap, schedule_bounds, schedule_success_probability,
    subset_restriction_collision, BhtConfig, BruteForceSolver, ElementDistinctnessSolver, MarkingMode, OracleGate,
    PromiseStrictSolver,
};
use qcl_core::rng::{child_seed, stream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{default_seed, parse_list, CapsArgs, Outputs, SpecArgs};
use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    /// Base seed (default: $QCL_SEED, else 0)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, Args)]
pub struct LemmaArgs {
    /// Codomain size N (M = N).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Number of constraints.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Values of r, as `1..8` or `1,2,5`. The first k interpolate and the
    /// rest are held out; r = ∞ is always checked.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rs: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub caps: CapsArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, Args)]
pub struct BhtArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    /// Classical table size (default ⌈M^{1/3}⌉).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_size: Option<usize>,
    /// Monte Carlo trials
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Base seed (default: $QCL_SEED, else 0)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// compressed or full
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marking: Option<String>,
    /// Rounds of the iteration schedule.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub caps: CapsArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, Args)]
pub struct SubsetArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    /// Subset size (default ⌈√(2N)⌉).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset_size: Option<usize>,
    /// Fresh subsets tried per trial.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retries: Option<usize>,
    /// brute-force or promise-strict
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    /// Monte Carlo trials
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Base seed (default: $QCL_SEED, else 0)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
pub struct AdvantageArgs {
    /// uniform-permutation, uniform-small-range, dr-n-dr-inf or set-equality
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// r for uniform-small-range.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    /// collision-check, classical-birthday or image-count
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinguisher: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    /// Monte Carlo trials
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Base seed (default: $QCL_SEED, else 0)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Explicit first distribution (config files only).
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<DistributionSpec>,
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<DistributionSpec>,
    #[command(flatten)]
    #[serde(flatten)]
    pub caps: CapsArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, Args)]
pub struct SweepArgs {
    /// collision or set-equality
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// collision-check, classical-birthday or image-count
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    /// N values, e.g. `256,512,1024`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<String>,
    /// Budgets, e.g. `1..7` or `1,3,7`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qs: Option<String>,
    /// Monte Carlo trials
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Base seed (default: $QCL_SEED, else 0)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub caps: CapsArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    Sample(SampleArgs),
    VerifyLemma(LemmaArgs),
    RunBht(BhtArgs),
    RunSubset(SubsetArgs),
    Advantage(AdvantageArgs),
    Sweep(SweepArgs),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Sample(_) => "sample",
            Experiment::VerifyLemma(_) => "verify-lemma",
            Experiment::RunBht(_) => "run-bht",
            Experiment::RunSubset(_) => "run-subset",
            Experiment::Advantage(_) => "advantage",
            Experiment::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accounting {
    pub wall_clock_seconds: f64,
    pub total_queries: u64,
}

/// Everything a run produced. `config` is fully resolved, so running it
/// again reproduces the rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    #[serde(default)]
    pub rows: Vec<CsvRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<Certificate>,
    #[serde(default)]
    pub summary: Value,
    #[serde(default)]
    pub envelope_constant: Option<f64>,
    pub accounting: Accounting,
}

fn seed_or_default(seed: &mut Option<u64>) -> Result<u64, CliError> {
    match seed {
        Some(s) => Ok(*s),
        None => Ok(*seed.insert(default_seed()?)),
    }
}

fn positive(what: &str, v: u64) -> Result<u64, CliError> {
    if v == 0 {
        return Err(CliError::Validation(format!("{what} must be at least 1")));
    }
    Ok(v)
}

impl Experiment {
    /// Fills every default so the echoed config is complete.
    pub fn resolve(&mut self) -> Result<(), CliError> {
        match self {
            Experiment::Sample(a) => {
                a.spec.resolve("uniform", 16);
                seed_or_default(&mut a.seed)?;
            }
            Experiment::VerifyLemma(a) => {
                a.n.get_or_insert(3);
                a.k.get_or_insert(2);
                a.rs.get_or_insert_with(|| "1..10".into());
                a.caps.resolve()?;
            }
            Experiment::RunBht(a) => {
                a.spec.resolve("uniform", 256);
                let m = a.spec.m.unwrap_or(1);
                a.table_size.get_or_insert(ceil_cbrt(m).max(1));
                positive("trials", *a.trials.get_or_insert(200))?;
                seed_or_default(&mut a.seed)?;
                a.marking.get_or_insert_with(|| "compressed".into());
                if a.max_rounds.is_none() {
                    let space = m.saturating_sub(a.table_size.unwrap_or(1)).max(1);
                    a.max_rounds = Some(schedule_bounds(space, &BhtConfig::new(1)).len());
                }
                a.caps.resolve()?;
            }
            Experiment::RunSubset(a) => {
                a.spec.resolve("uniform", 4096);
                let n = a.spec.n.unwrap_or(1);
                a.subset_size.get_or_insert(default_subset_size(n));
                a.retries.get_or_insert(1);
                a.solver.get_or_insert_with(|| "brute-force".into());
                positive("trials", *a.trials.get_or_insert(2000))?;
                seed_or_default(&mut a.seed)?;
            }
            Experiment::Advantage(a) => {
                let n = *a.n.get_or_insert(256);
                a.distinguisher.get_or_insert_with(|| "collision-check".into());
                a.q.get_or_insert(ceil_cbrt(n));
                positive("trials", *a.trials.get_or_insert(2000))?;
                seed_or_default(&mut a.seed)?;
                if a.a.is_none() || a.b.is_none() {
                    let pair = a.pair.get_or_insert_with(|| "uniform-permutation".into()).clone();
                    let (sa, sb) = builtin_pair(&pair, n, a.m, a.r)?;
                    a.m.get_or_insert(sa.m);
                    a.a = Some(sa);
                    a.b = Some(sb);
                }
                a.caps.resolve()?;
            }
            Experiment::Sweep(a) => {
                a.family.get_or_insert_with(|| "collision".into());
                a.strategy.get_or_insert_with(|| "collision-check".into());
                a.ns.get_or_insert_with(|| "256,512,1024".into());
                a.qs.get_or_insert_with(|| "1,2,3,4,5,6,7,9,11".into());
                positive("trials", *a.trials.get_or_insert(2000))?;
                seed_or_default(&mut a.seed)?;
                a.caps.resolve()?;
            }
        }
        Ok(())
    }
}

fn builtin_pair(name: &str, n: usize, m: Option<usize>, r: Option<u64>) -> Result<(DistributionSpec, DistributionSpec), CliError> {
    use DistributionKind::*;
    let mk = |k, m| DistributionSpec::new(k, m, n, 0);
    let sq = m.unwrap_or(n);
    Ok(match name {
        "uniform-permutation" => (mk(Uniform, sq), mk(Permutation, sq)),
        "uniform-small-range" => (mk(Uniform, sq), mk(SmallRange { r: r.unwrap_or(1) }, sq)),
        "dr-n-dr-inf" => (mk(Dr { r: RParam::Finite(n as u64) }, sq), mk(Dr { r: RParam::Infinity }, sq)),
        "set-equality" => {
            let half = m.unwrap_or(n / 2);
            (mk(SetEquality { case: 1 }, half), mk(SetEquality { case: 3 }, half))
        }
        other => return Err(CliError::Validation(format!("unknown pair `{other}`"))),
    })
}

fn parse_strategy(s: &str) -> Result<Strategy, CliError> {
    s.parse().map_err(|e: qcl_core::Error| CliError::Validation(e.to_string()))
}

fn need<T: Clone>(v: &Option<T>) -> T {
    v.clone().expect("resolved")
}

/// Runs a resolved experiment.
pub fn execute(config: &ExperimentConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let label = config.name.clone().unwrap_or_else(|| config.experiment.name().to_string());
    let mut rows = Vec::new();
    let mut certificates = Vec::new();
    let mut envelope_constant = None;
    let mut total_queries = 0;
    let summary = match &config.experiment {
        Experiment::Sample(a) => {
            let spec = a.spec.spec(need(&a.seed))?;
            let s = sample(&spec)?;
            let profile = match &s {
                Sample::Table(t) => Some(collision_profile(t)),
                _ => None,
            };
            json!({ "spec": spec, "sample": s, "profile": profile })
        }
        Experiment::VerifyLemma(a) => {
            let (n, k) = (need(&a.n), need(&a.k));
            let rs = parse_list(&need(&a.rs))?;
            if k == 0 || k > n {
                return Err(CliError::Validation(format!("k must be in 1..={n}")));
            }
            let test_rs: Vec<u64> = rs.into_iter().filter(|&r| r > k as u64).collect();
            let mut oracle = DrOracle::new(n, a.caps.enumeration());
            for c in ConstraintSet::all_with_distinct_points(n, k) {
                certificates.push(certify_degree_bound(&mut oracle, &c, &test_rs)?);
            }
            let passed = certificates.iter().filter(|c| c.passed).count();
            rows.push(CsvRow {
                experiment: label.clone(),
                n,
                m: n,
                q: k,
                trials: certificates.len() as u64,
                success_rate: passed as f64 / certificates.len().max(1) as f64,
                ci95: 0.0,
                distinguisher: "exact".into(),
                seed: 0,
            });
            json!({ "constraint_sets": certificates.len(), "passed": passed, "held_out_rs": test_rs, "all_passed": passed == certificates.len() })
        }
        Experiment::RunBht(a) => {
            let seed = need(&a.seed);
            let spec = a.spec.spec(seed)?;
            let marking = match need(&a.marking).as_str() {
                "compressed" => MarkingMode::Compressed,
                "full" => MarkingMode::Full,
                other => return Err(CliError::Validation(format!("unknown marking `{other}`"))),
            };
            let cfg = BhtConfig { table_size: need(&a.table_size), max_rounds: a.max_rounds, marking, ..BhtConfig::new(1) };
            let caps = a.caps.simulator();
            let trials = need(&a.trials);
            let outs = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let f = sample_table(&spec.with_seed(child_seed(seed, "instance", t)))?;
                    bht_collision(&OracleGate::standard(f), &cfg, &caps, &mut stream(seed, "bht", t))
                })
                .collect::<qcl_core::Result<Vec<_>>>()?;
            let found = outs.iter().filter(|o| o.found()).count() as u64;
            let est = RateEstimate::new(found, trials);
            total_queries = outs.iter().map(|o| o.queries).sum();
            let reference = outs
                .iter()
                .map(|o| {
                    if o.table_collision {
                        1.0
                    } else {
                        schedule_success_probability(o.marked_count, o.search_space, &schedule_bounds(o.search_space, &cfg))
                    }
                })
                .sum::<f64>()
                / trials as f64;
            rows.push(CsvRow {
                experiment: label.clone(),
                n: spec.n,
                m: spec.m,
                q: cfg.table_size,
                trials,
                success_rate: est.rate,
                ci95: est.ci95,
                distinguisher: "bht".into(),
                seed,
            });
            json!({
                "success": est,
                "reference_success": reference,
                "table_collisions": outs.iter().filter(|o| o.table_collision).count(),
                "mean_queries": total_queries as f64 / trials as f64,
                "iteration_cap": iteration_cap(spec.m.saturating_sub(cfg.table_size)),
            })
        }
        Experiment::RunSubset(a) => {
            let seed = need(&a.seed);
            let spec = a.spec.spec(seed)?;
            let solver: &dyn ElementDistinctnessSolver = match need(&a.solver).as_str() {
                "brute-force" => &BruteForceSolver,
                "promise-strict" => &PromiseStrictSolver,
                other => return Err(CliError::Validation(format!("unknown solver `{other}`"))),
            };
            let (size, retries, trials) = (need(&a.subset_size), need(&a.retries), need(&a.trials));
            let outs = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let f = sample_table(&spec.with_seed(child_seed(seed, "instance", t)))?;
                    subset_restriction_collision(&OracleGate::standard(f), size, retries, solver, &mut stream(seed, "subset", t))
                })
                .collect::<qcl_core::Result<Vec<_>>>()?;
            let found = outs.iter().filter(|o| o.found()).count() as u64;
            let est = RateEstimate::new(found, trials);
            let attempts: Vec<_> = outs.iter().flat_map(|o| o.attempts.iter()).collect();
            let exactly_one = attempts.iter().filter(|a| a.subset_pairs == 1).count();
            total_queries = outs.iter().map(|o| o.queries).sum();
            let lambda = (size * size.saturating_sub(1) / 2) as f64 / spec.n as f64;
            rows.push(CsvRow {
                experiment: label.clone(),
                n: spec.n,
                m: spec.m,
                q: size,
                trials,
                success_rate: est.rate,
                ci95: est.ci95,
                distinguisher: solver.name().into(),
                seed,
            });
            json!({
                "success": est,
                "attempts": attempts.len(),
                "exactly_one_pair_rate": exactly_one as f64 / attempts.len().max(1) as f64,
                "poisson_lambda": lambda,
                "poisson_exactly_one": lambda * (-lambda).exp(),
            })
        }
        Experiment::Advantage(a) => {
            let (sa, sb) = (need(&a.a), need(&a.b));
            let strategy = parse_strategy(&need(&a.distinguisher))?;
            let e = estimate_advantage((&sa, &sb), strategy, need(&a.q), need(&a.trials), need(&a.seed), &a.caps.simulator())?;
            rows.push(CsvRow::from_advantage(&label, &e));
            total_queries = e.total_queries;
            json!({ "advantage": e.advantage(), "estimate": e })
        }
        Experiment::Sweep(a) => {
            let family = match need(&a.family).as_str() {
                "collision" => SweepFamily::Collision,
                "set-equality" | "set_equality" => SweepFamily::SetEquality,
                other => return Err(CliError::Validation(format!("unknown family `{other}`"))),
            };
            let cfg = SweepConfig {
                family,
                strategy: parse_strategy(&need(&a.strategy))?,
                ns: parse_list(&need(&a.ns))?.into_iter().map(|v| v as usize).collect(),
                qs: parse_list(&need(&a.qs))?.into_iter().map(|v| v as usize).collect(),
                trials: need(&a.trials),
                seed: need(&a.seed),
            };
            let res = scaling_sweep(&cfg, &a.caps.simulator())?;
            rows = CsvRow::from_sweep(&label, &res);
            total_queries = res.rows.iter().map(|r| r.queries).sum();
            envelope_constant = res.envelope_constant;
            json!({ "fits": res.fits, "envelope_constant": res.envelope_constant, "low_regime_below": qcl_core::harness::LOW_REGIME })
        }
    };
    Ok(Report {
        config: config.clone(),
        rows,
        certificates,
        summary,
        envelope_constant,
        accounting: Accounting { wall_clock_seconds: start.elapsed().as_secs_f64(), total_queries },
    })
}

fn ceil_cbrt(n: usize) -> usize {
    let mut c = (n as f64).cbrt().round() as usize;
    while c.saturating_mul(c).saturating_mul(c) < n {
        c += 1;
    }
    while c > 0 && (c - 1) * (c - 1) * (c - 1) >= n {
        c -= 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::ceil_cbrt;

    #[test]
    fn integer_cube_root() {
        for n in 1..5000usize {
            let c = ceil_cbrt(n);
            assert!(c * c * c >= n && (c - 1) * (c - 1) * (c - 1) < n, "{n}");
        }
        assert_eq!(ceil_cbrt(0), 0);
        assert_eq!(ceil_cbrt(4096), 16);
    }
}
