//! Three-stage multimodal optimizer.
//!
//! Stage one fits a neural surrogate of the objective from a budgeted uniform
//! sample. Stage two runs evaluation-free multi-start gradient descent on the
//! surrogate and clusters the converged points into a candidate peak archive.
//! Stage three refines each candidate with separable CMA-ES under the
//! remaining evaluation budget. The benchmark module scores results with the
//! peak-ratio / success-rate metrics.

pub mod benchmark;
pub mod fpd;
pub mod harness;
pub mod glf;
pub mod pls;
pub mod error;
pub mod linalg;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
pub use benchmark::{BudgetedEvaluator, Problem, ProblemId, ProblemSpec, SolutionSet, SuiteTable};
pub use harness::{run_apdmmo, run_suite, RunConfig, RunReport, Variant};
