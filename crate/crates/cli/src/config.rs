//! Experiment configuration. Every subcommand's arguments double as a JSON
//! object; a config file supplies values and flags override them.

use std::path::PathBuf;

use clap::Args;
use qcl_core::exact::EnumerationCaps;
use qcl_core::oracles::{DistributionSpec, RParam};
use qcl_core::qsim::SimulatorCaps;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Flags that steer a run but are not part of the experiment itself.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Print the full report as JSON on stdout.
    #[arg(long)]
    pub json: bool,
    /// Write result rows as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Write the JSON report.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Write a log-log SVG plot of the rows.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
    /// Worker threads for trials (default: available cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, Args)]
pub struct CapsArgs {
    /// Largest N for exact enumeration.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
    /// Largest r for exact enumeration.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_r: Option<u64>,
    /// Step budget for one exact enumeration.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    /// Largest statevector, in amplitudes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_amplitudes: Option<usize>,
}

impl CapsArgs {
    pub fn resolve(&mut self) -> Result<(), CliError> {
        let e = EnumerationCaps::default();
        let s = SimulatorCaps::default();
        self.max_n.get_or_insert(e.max_n);
        self.max_r.get_or_insert(e.max_r);
        self.max_steps.get_or_insert(e.max_steps);
        self.max_amplitudes.get_or_insert(s.max_amplitudes);
        if self.max_n == Some(0) || self.max_r == Some(0) || self.max_steps == Some(0) || self.max_amplitudes == Some(0) {
            return Err(CliError::Validation("caps must be positive".into()));
        }
        Ok(())
    }

    pub fn enumeration(&self) -> EnumerationCaps {
        let d = EnumerationCaps::default();
        EnumerationCaps {
            max_n: self.max_n.unwrap_or(d.max_n),
            max_r: self.max_r.unwrap_or(d.max_r),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
        }
    }

    pub fn simulator(&self) -> SimulatorCaps {
        SimulatorCaps { max_amplitudes: self.max_amplitudes.unwrap_or(SimulatorCaps::default().max_amplitudes) }
    }
}

/// A distribution given by flags: `--kind dr --r inf --m 4 --n 4`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, Args)]
pub struct SpecArgs {
    /// uniform, permutation, injective, dr, small-range, hybrid-chain, set-equality
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// Range parameter for dr (a positive integer or `inf`) and small-range.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    /// Domain size (defaults to N).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Codomain size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Chain depth for hybrid-chain.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    /// Case 1, 2 or 3 for set-equality.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
}

impl SpecArgs {
    pub fn resolve(&mut self, default_kind: &str, default_n: usize) {
        let kind = self.kind.get_or_insert_with(|| default_kind.to_string());
        *kind = kind.replace('-', "_");
        let n = *self.n.get_or_insert(default_n);
        match kind.as_str() {
            "hybrid_chain" => {
                let depth = *self.depth.get_or_insert(1);
                self.m.get_or_insert(n << depth);
            }
            "set_equality" => {
                self.case.get_or_insert(1);
                self.m.get_or_insert(n / 2);
            }
            _ => {
                self.m.get_or_insert(n);
            }
        }
    }

    /// Builds the spec through its JSON form.
    pub fn spec(&self, seed: u64) -> Result<DistributionSpec, CliError> {
        let mut obj = Map::new();
        obj.insert("kind".into(), Value::from(self.kind.clone().unwrap_or_default()));
        if let Some(r) = &self.r {
            let r: RParam = r.parse().map_err(|e: qcl_core::Error| CliError::Validation(e.to_string()))?;
            obj.insert("r".into(), serde_json::to_value(r).expect("serializable"));
        }
        if let Some(d) = self.depth {
            obj.insert("depth".into(), d.into());
        }
        if let Some(c) = self.case {
            obj.insert("case".into(), c.into());
        }
        obj.insert("m".into(), self.m.unwrap_or(0).into());
        obj.insert("n".into(), self.n.unwrap_or(0).into());
        obj.insert("seed".into(), seed.into());
        let spec: DistributionSpec = serde_json::from_value(Value::Object(obj))
            .map_err(|e| CliError::Validation(format!("invalid distribution: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Overlays the flag values onto the file values and deserializes the result.
pub fn merge<T: Serialize + DeserializeOwned>(file: Option<Value>, flags: &T) -> Result<T, CliError> {
    let mut base = match file {
        Some(Value::Object(m)) => m,
        Some(_) => return Err(CliError::Validation("config must be a JSON object".into())),
        None => Map::new(),
    };
    base.remove("experiment");
    base.remove("outputs");
    base.remove("name");
    if let Value::Object(over) = serde_json::to_value(flags).expect("serializable") {
        for (k, v) in over {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Validation(format!("invalid config: {e}")))
}

pub fn read_json(path: &std::path::Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{} is not valid JSON: {e}", path.display())))
}

/// Default seed: `QCL_SEED` when set, else 0.
pub fn default_seed() -> Result<u64, CliError> {
    match std::env::var("QCL_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Validation(format!("QCL_SEED={s} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

/// Parses `a..b` (inclusive) or a comma-separated list.
pub fn parse_list(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Validation(format!("cannot parse `{s}` as a list (use `1..8` or `1,2,5`)"));
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}
