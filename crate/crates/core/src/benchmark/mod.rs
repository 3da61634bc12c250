//! The multimodal benchmark suite: twenty maximization problems with known
//! global-optimum counts, a budget-enforcing evaluator, and the peak-counting
//! metrics.
//!
//! F1-F10 are analytic niching classics; F11-F20 are weighted composition
//! functions whose shift points and rotation matrices are generated
//! deterministically from a seed, so their landscapes are reproducible but not
//! identical to any external data files.

mod composition;
mod evaluator;
mod functions;
mod metrics;
mod table;

pub use evaluator::BudgetedEvaluator;
pub use metrics::{count_found_optima, peak_ratio_success_rate, SolutionSet};
pub use table::SuiteTable;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Identifier of a benchmark function, F1 through F20.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemId(pub u8);

impl ProblemId {
    pub const ALL: [ProblemId; 20] = {
        let mut ids = [ProblemId(0); 20];
        let mut i = 0;
        while i < 20 {
            ids[i] = ProblemId(i as u8 + 1);
            i += 1;
        }
        ids
    };

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.0)
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let digits = trimmed
            .strip_prefix('F')
            .or_else(|| trimmed.strip_prefix('f'))
            .unwrap_or(trimmed);
        match digits.parse::<u8>() {
            Ok(n) if (1..=20).contains(&n) => Ok(ProblemId(n)),
            _ => Err(Error::UnknownProblem(s.to_string())),
        }
    }
}

/// Static description of one benchmark function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Number of known global optima.
    pub nkp: usize,
    /// Fitness of every global optimum (maximization convention).
    pub peak_value: f64,
    /// Two solutions closer than this count as the same peak.
    pub niche_radius: f64,
    /// Evaluation budget.
    pub max_fes: u64,
}

impl ProblemSpec {
    pub fn contains(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        for (d, &v) in x.iter().enumerate() {
            if !(v >= self.lower[d] && v <= self.upper[d]) {
                return Err(Error::OutOfBounds {
                    dim: d,
                    value: v,
                    lower: self.lower[d],
                    upper: self.upper[d],
                });
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.lower.len() != self.dim || self.upper.len() != self.dim {
            return Err(Error::InvalidConfig(format!(
                "{}: bounds arrays must have {} entries",
                self.id, self.dim
            )));
        }
        for d in 0..self.dim {
            if !(self.lower[d] < self.upper[d]) {
                return Err(Error::InvalidConfig(format!(
                    "{}: lower >= upper in dimension {}",
                    self.id, d
                )));
            }
        }
        if self.nkp == 0 || self.niche_radius <= 0.0 || self.max_fes == 0 {
            return Err(Error::InvalidConfig(format!(
                "{}: nkp, niche_radius and max_fes must be positive",
                self.id
            )));
        }
        Ok(())
    }
}

/// A benchmark function together with its spec and catalogued optima.
/// Immutable after construction, safe to share across threads.
#[derive(Debug)]
pub struct Problem {
    spec: ProblemSpec,
    objective: functions::Objective,
    known_optima: Vec<Vec<f64>>,
}

impl Problem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    /// Raw fitness (maximization convention), no budget accounting.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    /// Catalogued global-optimum positions. Complete for every function in
    /// the suite; each position evaluates to `peak_value` within 1e-9.
    pub fn known_optima(&self) -> &[Vec<f64>] {
        &self.known_optima
    }
}

/// Build a problem and a budgeted evaluator for it. `seed` only affects the
/// generated composition data of F11-F20.
pub fn make_problem(id: ProblemId, seed: u64) -> Result<(Arc<Problem>, BudgetedEvaluator)> {
    make_problem_with_table(id, seed, &SuiteTable::bundled())
}

/// Same as [`make_problem`] with an explicit (possibly overridden) table.
pub fn make_problem_with_table(
    id: ProblemId,
    seed: u64,
    table: &SuiteTable,
) -> Result<(Arc<Problem>, BudgetedEvaluator)> {
    let spec = table.spec(id)?;
    spec.validate()?;
    let (objective, known_optima) = functions::build(&spec, seed);
    let problem = Arc::new(Problem {
        spec,
        objective,
        known_optima,
    });
    let evaluator = BudgetedEvaluator::new(Arc::clone(&problem));
    Ok((problem, evaluator))
}
