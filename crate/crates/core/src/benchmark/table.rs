//! The bundled per-function configuration table and its override mechanism.

use super::{ProblemId, ProblemSpec};
use crate::error::{Error, Result};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

const BUNDLED: &str = include_str!("suite.toml");

#[derive(Debug, Deserialize)]
struct RawEntry {
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    nkp: usize,
    peak_value: f64,
    niche_radius: f64,
    max_fes: u64,
}

/// Per-function benchmark configuration, keyed by function name.
#[derive(Debug, Clone)]
pub struct SuiteTable {
    entries: BTreeMap<String, ProblemSpecData>,
}

#[derive(Debug, Clone)]
struct ProblemSpecData {
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    nkp: usize,
    peak_value: f64,
    niche_radius: f64,
    max_fes: u64,
}

impl SuiteTable {
    /// The table shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled suite table is valid")
    }

    /// Parse a table from TOML text. Single-entry bounds broadcast to `dim`.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, RawEntry> = toml::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("suite table: {e}")))?;
        let mut entries = BTreeMap::new();
        for (name, r) in raw {
            let lower = broadcast(&name, r.lower, r.dim)?;
            let upper = broadcast(&name, r.upper, r.dim)?;
            entries.insert(
                name,
                ProblemSpecData {
                    dim: r.dim,
                    lower,
                    upper,
                    nkp: r.nkp,
                    peak_value: r.peak_value,
                    niche_radius: r.niche_radius,
                    max_fes: r.max_fes,
                },
            );
        }
        Ok(SuiteTable { entries })
    }

    /// Load a table from a file, starting from the bundled defaults: entries
    /// present in the file replace the bundled ones.
    pub fn load_with_overrides(path: &Path) -> Result<Self> {
        let mut table = Self::bundled();
        let text = std::fs::read_to_string(path)?;
        let overrides = Self::parse(&text)?;
        table.entries.extend(overrides.entries);
        Ok(table)
    }

    pub fn spec(&self, id: ProblemId) -> Result<ProblemSpec> {
        let key = id.to_string();
        let e = self
            .entries
            .get(&key)
            .ok_or_else(|| Error::UnknownProblem(key))?;
        Ok(ProblemSpec {
            id,
            dim: e.dim,
            lower: e.lower.clone(),
            upper: e.upper.clone(),
            nkp: e.nkp,
            peak_value: e.peak_value,
            niche_radius: e.niche_radius,
            max_fes: e.max_fes,
        })
    }
}

fn broadcast(name: &str, v: Vec<f64>, dim: usize) -> Result<Vec<f64>> {
    if v.len() == dim {
        Ok(v)
    } else if v.len() == 1 {
        Ok(vec![v[0]; dim])
    } else {
        Err(Error::InvalidConfig(format!(
            "{name}: bounds must have 1 or {dim} entries, got {}",
            v.len()
        )))
    }
}
