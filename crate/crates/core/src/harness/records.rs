use std::io::Write;

use serde::{Deserialize, Serialize};

use super::strategy::{AdvantageEstimate, SuccessEstimate};
use super::sweep::SweepResult;
use crate::error::Result;

/// One line of experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub experiment: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub q: usize,
    pub trials: u64,
    pub success_rate: f64,
    pub ci95: f64,
    pub distinguisher: String,
    pub seed: u64,
}

impl CsvRow {
    pub fn from_success(experiment: &str, e: &SuccessEstimate) -> Self {
        CsvRow {
            experiment: experiment.to_string(),
            n: e.spec.n,
            m: e.spec.m,
            q: e.q,
            trials: e.estimate.trials,
            success_rate: e.estimate.rate,
            ci95: e.estimate.ci95,
            distinguisher: e.strategy.name().to_string(),
            seed: e.seed,
        }
    }

    /// The rate column carries the two-sided advantage.
    pub fn from_advantage(experiment: &str, e: &AdvantageEstimate) -> Self {
        CsvRow {
            experiment: experiment.to_string(),
            n: e.pair.0.n,
            m: e.pair.0.m,
            q: e.q,
            trials: e.trials,
            success_rate: e.advantage(),
            ci95: e.ci95_halfwidth,
            distinguisher: e.distinguisher_name.clone(),
            seed: e.seed,
        }
    }

    pub fn from_sweep(experiment: &str, s: &SweepResult) -> Vec<Self> {
        s.rows
            .iter()
            .map(|r| CsvRow {
                experiment: experiment.to_string(),
                n: r.n,
                m: r.m,
                q: r.q,
                trials: r.estimate.trials,
                success_rate: r.estimate.rate,
                ci95: r.estimate.ci95,
                distinguisher: s.config.strategy.name().to_string(),
                seed: r.seed,
            })
            .collect()
    }
}

/// Writes rows with a header line. The header is written even when there
/// are no rows.
pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["experiment", "N", "M", "q", "trials", "success_rate", "ci95", "distinguisher", "seed"])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}
