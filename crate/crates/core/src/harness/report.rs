//! Machine-readable run reports and suite aggregation.

use crate::benchmark::peak_ratio_success_rate;
use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub dataset_fes: u64,
    pub local_search_fes: u64,
    pub total_used: u64,
    pub max_fes: u64,
}

/// Wall-clock stage timings. Excluded from the determinism contract.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub fit_ms: u64,
    pub detect_ms: u64,
    pub refine_ms: u64,
    pub total_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccuracyCount {
    pub accuracy: f64,
    pub npf: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoundSolution {
    pub point: Vec<f64>,
    pub fitness: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub problem: String,
    pub dim: usize,
    pub nkp: usize,
    pub seed: u64,
    pub variant: String,
    pub npf_at_accuracy: Vec<AccuracyCount>,
    pub ledger: BudgetLedger,
    pub archive_size: usize,
    /// True when peak detection produced no archive and the run fell back to
    /// random local-search centers.
    pub fell_back_to_random_centers: bool,
    pub loss_trace: Vec<f64>,
    pub solutions: Vec<FoundSolution>,
    pub timings: Timings,
    pub config_echo: serde_json::Value,
}

impl RunReport {
    pub fn npf_at(&self, accuracy: f64) -> Option<usize> {
        self.npf_at_accuracy
            .iter()
            .find(|a| (a.accuracy - accuracy).abs() < 1e-15)
            .map(|a| a.npf)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One aggregated row of a suite table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteRow {
    pub problem: String,
    pub dim: usize,
    pub variant: String,
    pub runs: usize,
    /// (accuracy, PR, SR) triples, accuracy descending.
    pub metrics: Vec<(f64, f64, f64)>,
    pub mean_total_ms: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SuiteResult {
    pub rows: Vec<SuiteRow>,
}

impl SuiteResult {
    pub fn aggregate(problem: &str, dim: usize, variant: &str, reports: &[RunReport]) -> SuiteRow {
        assert!(!reports.is_empty());
        let nkp = reports
            .iter()
            .map(|r| r.nkp)
            .max()
            .expect("nonempty reports");
        let accuracies: Vec<f64> = reports[0]
            .npf_at_accuracy
            .iter()
            .map(|a| a.accuracy)
            .collect();
        let mut metrics = Vec::new();
        for &acc in &accuracies {
            let npf: Vec<usize> = reports
                .iter()
                .map(|r| r.npf_at(acc).expect("accuracy present in every run"))
                .collect();
            let (pr, sr) = peak_ratio_success_rate(&npf, nkp);
            metrics.push((acc, pr, sr));
        }
        let mean_total_ms =
            reports.iter().map(|r| r.timings.total_ms).sum::<u64>() / reports.len() as u64;
        SuiteRow {
            problem: problem.to_string(),
            dim,
            variant: variant.to_string(),
            runs: reports.len(),
            metrics,
            mean_total_ms,
        }
    }

    /// CSV with one row per (problem, variant, accuracy).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("problem,dim,variant,runs,accuracy,pr,sr,mean_total_ms\n");
        for row in &self.rows {
            for (acc, pr, sr) in &row.metrics {
                out.push_str(&format!(
                    "{},{},{},{},{:e},{:.6},{:.6},{}\n",
                    row.problem, row.dim, row.variant, row.runs, acc, pr, sr, row.mean_total_ms
                ));
            }
        }
        out
    }

    /// Compact table with the PR(SR) convention at each accuracy.
    pub fn to_pretty(&self) -> String {
        let mut out = String::new();
        let accs: Vec<f64> = self
            .rows
            .first()
            .map(|r| r.metrics.iter().map(|m| m.0).collect())
            .unwrap_or_default();
        out.push_str(&format!("{:<10}{:<10}{:<6}", "problem", "variant", "runs"));
        for a in &accs {
            out.push_str(&format!("{:>16}", format!("PR(SR)@{a:.0e}")));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{:<10}{:<10}{:<6}",
                format!("{}({}D)", row.problem, row.dim),
                row.variant,
                row.runs
            ));
            for (_, pr, sr) in &row.metrics {
                out.push_str(&format!("{:>16}", format!("{pr:.3}({sr:.3})")));
            }
            out.push('\n');
        }
        out
    }
}
