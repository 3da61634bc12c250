//! End-to-end orchestration: budget allocation, the three-stage pipeline,
//! ablation variants, suites, and report emission.

pub mod profiles;
pub mod report;

pub use profiles::{desk_profile, paper_profile, PipelineConfig};
pub use report::{
    AccuracyCount, BudgetLedger, FoundSolution, RunReport, SuiteResult, SuiteRow, Timings,
    REPORT_SCHEMA_VERSION,
};

use crate::benchmark::{
    count_found_optima, make_problem_with_table, BudgetedEvaluator, ProblemId, SolutionSet,
    SuiteTable,
};
use crate::error::{Error, Result};
use crate::fpd::{build_archive, cluster_points, multistart_descent, to_unit_cube, PeakArchive};
use crate::glf::{build_dataset, train};
use crate::linalg::Mat;
use crate::model::activation::Mode;
use crate::model::{forward, init_model, BlockKind, ModelConfig, ModelParams};
use crate::pls::round_robin_search;
use crate::rng::{stage_rng, Stage};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Fixed default seed for generated problem data (composition rotations and
/// shifts), independent of the run seed so repeated runs race on the same
/// landscape.
pub const DEFAULT_PROBLEM_SEED: u64 = 2013;

/// Benchmark-standard accuracy levels, descending.
pub const DEFAULT_ACCURACY_LEVELS: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// All three stages.
    Full,
    /// No surrogate, no detection: local search from random centers with the
    /// whole budget.
    NoFpd,
    /// Fit and detect only; archive centers are the answer.
    NoPls,
    /// Architecture studies: parallel / MLP / sequential blocks at depth 1 or 5.
    P1,
    P5,
    M1,
    M5,
    S1,
    S5,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::Full,
        Variant::NoFpd,
        Variant::NoPls,
        Variant::P1,
        Variant::P5,
        Variant::M1,
        Variant::M5,
        Variant::S1,
        Variant::S5,
    ];

    /// Architecture forced by the variant, if any.
    fn architecture(self) -> Option<(BlockKind, usize)> {
        match self {
            Variant::P1 => Some((BlockKind::Nla, 1)),
            Variant::P5 => Some((BlockKind::Nla, 5)),
            Variant::M1 => Some((BlockKind::Mlp, 1)),
            Variant::M5 => Some((BlockKind::Mlp, 5)),
            Variant::S1 => Some((BlockKind::SeqNla, 1)),
            Variant::S5 => Some((BlockKind::SeqNla, 5)),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Full => "full",
            Variant::NoFpd => "no-fpd",
            Variant::NoPls => "no-pls",
            Variant::P1 => "p1",
            Variant::P5 => "p5",
            Variant::M1 => "m1",
            Variant::M5 => "m5",
            Variant::S1 => "s1",
            Variant::S5 => "s5",
        };
        f.write_str(s)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "full" => Ok(Variant::Full),
            "no-fpd" | "nofpd" => Ok(Variant::NoFpd),
            "no-pls" | "nopls" => Ok(Variant::NoPls),
            "p1" => Ok(Variant::P1),
            "p5" => Ok(Variant::P5),
            "m1" => Ok(Variant::M1),
            "m5" => Ok(Variant::M5),
            "s1" => Ok(Variant::S1),
            "s5" => Ok(Variant::S5),
            other => Err(Error::InvalidConfig(format!("unknown variant `{other}`"))),
        }
    }
}

/// Optional per-stage overrides, applied on top of the resolved profile.
/// Field names double as the config-file schema.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Overrides {
    pub hidden_dim: Option<usize>,
    pub depth: Option<usize>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub levels: Option<usize>,
    pub weight_decay: Option<f64>,
    pub n_starts: Option<usize>,
    pub step_size: Option<f64>,
    pub descent_steps: Option<usize>,
    pub vanilla_descent: Option<bool>,
    pub chunk_size: Option<usize>,
    pub eps: Option<f64>,
    pub min_pts: Option<usize>,
    pub population: Option<usize>,
    pub sigma0: Option<f64>,
    pub max_generations: Option<usize>,
    pub stop_tol: Option<f64>,
    pub stop_evals: Option<usize>,
    pub no_fpd_centers: Option<usize>,
}

impl Overrides {
    fn apply(&self, p: &mut PipelineConfig) {
        macro_rules! set {
            ($src:expr, $dst:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(self.hidden_dim, p.model_hidden);
        set!(self.depth, p.model_depth);
        set!(self.epochs, p.train.epochs);
        set!(self.batch_size, p.train.batch_size);
        set!(self.learning_rate, p.train.learning_rate);
        set!(self.levels, p.train.levels);
        set!(self.weight_decay, p.train.adamw.weight_decay);
        set!(self.n_starts, p.descent.n_starts);
        set!(self.step_size, p.descent.step_size);
        set!(self.descent_steps, p.descent.steps);
        if let Some(true) = self.vanilla_descent {
            p.descent.optimizer = crate::fpd::DescentOptimizer::Vanilla;
        }
        set!(self.chunk_size, p.descent.chunk_size);
        set!(self.eps, p.cluster.eps);
        set!(self.min_pts, p.cluster.min_pts);
        set!(self.population, p.cma.population);
        set!(self.sigma0, p.cma.sigma0);
        set!(self.max_generations, p.cma.max_generations);
        set!(self.stop_tol, p.cma.stop_tol);
        set!(self.stop_evals, p.cma.stop_evals);
        set!(self.no_fpd_centers, p.no_fpd_centers);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub seed: u64,
    pub problem_seed: u64,
    /// Fraction of the evaluation budget spent on the training sample.
    pub train_ratio: f64,
    pub variant: Variant,
    pub paper_scale: bool,
    pub accuracy_levels: Vec<f64>,
    pub overrides: Overrides,
}

impl RunConfig {
    pub fn new(problem: ProblemId, seed: u64) -> Self {
        RunConfig {
            problem,
            seed,
            problem_seed: DEFAULT_PROBLEM_SEED,
            train_ratio: 3.0 / 8.0,
            variant: Variant::Full,
            paper_scale: false,
            accuracy_levels: DEFAULT_ACCURACY_LEVELS.to_vec(),
            overrides: Overrides::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0 < self.train_ratio && self.train_ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train ratio must be in (0,1), got {}",
                self.train_ratio
            )));
        }
        if self.accuracy_levels.is_empty()
            || self.accuracy_levels.iter().any(|&a| a <= 0.0)
            || self.accuracy_levels.windows(2).any(|w| w[0] <= w[1])
        {
            return Err(Error::InvalidConfig(
                "accuracy levels must be positive and strictly descending".into(),
            ));
        }
        Ok(())
    }

    /// Resolve the stage parameters for a given problem dimension.
    pub fn resolve(&self, dim: usize) -> PipelineConfig {
        let mut p = if self.paper_scale {
            paper_profile(dim)
        } else {
            desk_profile(dim)
        };
        if let Some((kind, depth)) = self.variant.architecture() {
            p.block_kind = kind;
            p.model_depth = depth;
        }
        self.overrides.apply(&mut p);
        p.train.seed = self.seed;
        p
    }
}

/// `(floor(r * max_fes), max_fes - floor(r * max_fes))`.
pub fn allocate_budget(max_fes: u64, r: f64) -> (u64, u64) {
    assert!(0.0 < r && r < 1.0);
    let train = (r * max_fes as f64).floor() as u64;
    (train, max_fes - train)
}

fn random_centers(
    evaluator: &BudgetedEvaluator,
    count: usize,
    seed: u64,
) -> PeakArchive {
    let spec = evaluator.problem().spec();
    let mut rng = stage_rng(seed, Stage::Descent);
    let centers = (0..count)
        .map(|_| crate::fpd::ArchiveEntry {
            point: (0..spec.dim)
                .map(|d| rng.gen_range(spec.lower[d]..spec.upper[d]))
                .collect(),
            predicted: 0.0,
        })
        .collect();
    PeakArchive { centers }
}

/// Execute one configured run end to end and score it at every accuracy
/// level.
pub fn run_apdmmo(config: &RunConfig) -> Result<RunReport> {
    run_apdmmo_with_table(config, &SuiteTable::bundled())
}

pub fn run_apdmmo_with_table(config: &RunConfig, table: &SuiteTable) -> Result<RunReport> {
    config.validate()?;
    let (problem, evaluator) = make_problem_with_table(config.problem, config.problem_seed, table)?;
    let spec = problem.spec().clone();
    let pipeline = config.resolve(spec.dim);
    pipeline.cma.validate()?;

    let t_start = Instant::now();
    let mut timings = Timings::default();
    let mut loss_trace = Vec::new();
    let archive_size;
    let mut fell_back = false;
    let mut dataset_fes = 0u64;

    let solutions: SolutionSet = match config.variant {
        Variant::NoFpd => {
            // pure local-search baseline: every evaluation goes to refinement
            let t = Instant::now();
            let archive = random_centers(&evaluator, pipeline.no_fpd_centers, config.seed);
            archive_size = archive.len();
            let sols = round_robin_search(&evaluator, &archive, &pipeline.cma, config.seed)?;
            timings.refine_ms = t.elapsed().as_millis() as u64;
            sols
        }
        _ => {
            let t_fit = Instant::now();
            let dataset = build_dataset(
                &evaluator,
                config.train_ratio,
                pipeline.train.levels,
                config.seed,
            )?;
            dataset_fes = dataset.len() as u64;
            let model_config = ModelConfig::new(
                spec.dim,
                pipeline.model_hidden,
                pipeline.model_depth,
                pipeline.block_kind,
            );
            let mut params = init_model(model_config, config.seed);
            loss_trace = train(&mut params, &dataset, &pipeline.train)?;
            timings.fit_ms = t_fit.elapsed().as_millis() as u64;

            let t_detect = Instant::now();
            let converged = multistart_descent(&params, &pipeline.descent, config.seed)?;
            let unit = to_unit_cube(&converged);
            let labels = cluster_points(&unit, &pipeline.cluster);
            let archive = match build_archive(&converged, &labels, &params) {
                Ok(a) => a,
                Err(Error::EmptyArchive) => {
                    fell_back = true;
                    random_centers(&evaluator, pipeline.no_fpd_centers, config.seed)
                }
                Err(e) => return Err(e),
            };
            archive_size = archive.len();
            timings.detect_ms = t_detect.elapsed().as_millis() as u64;

            let t_refine = Instant::now();
            let sols = if config.variant == Variant::NoPls && !fell_back {
                // archive centers themselves, scored with true fitness
                let mut sols = SolutionSet::new();
                for entry in &archive.centers {
                    if evaluator.remaining() == 0 {
                        break;
                    }
                    let fitness = evaluator.evaluate_one(&entry.point)?;
                    sols.push(entry.point.clone(), fitness);
                }
                sols
            } else {
                round_robin_search(&evaluator, &archive, &pipeline.cma, config.seed)?
            };
            timings.refine_ms = t_refine.elapsed().as_millis() as u64;
            sols
        }
    };

    timings.total_ms = t_start.elapsed().as_millis() as u64;
    let total_used = evaluator.used_fes();
    let npf_at_accuracy = config
        .accuracy_levels
        .iter()
        .map(|&accuracy| AccuracyCount {
            accuracy,
            npf: count_found_optima(&spec, &solutions, accuracy),
        })
        .collect();

    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        problem: spec.id.to_string(),
        dim: spec.dim,
        nkp: spec.nkp,
        seed: config.seed,
        variant: config.variant.to_string(),
        npf_at_accuracy,
        ledger: BudgetLedger {
            dataset_fes,
            local_search_fes: total_used - dataset_fes,
            total_used,
            max_fes: spec.max_fes,
        },
        archive_size,
        fell_back_to_random_centers: fell_back,
        loss_trace,
        solutions: solutions
            .points
            .into_iter()
            .map(|(point, fitness)| FoundSolution { point, fitness })
            .collect(),
        timings,
        config_echo: serde_json::json!({
            "run": config,
            "pipeline": pipeline,
        }),
    })
}

/// Run every config `repetitions` times (seeds `seed..seed+repetitions`) and
/// aggregate PR/SR per accuracy level. Runs execute in parallel when worker
/// threads are available; results are independent of parallelism.
pub fn run_suite(
    configs: &[RunConfig],
    repetitions: usize,
    table: &SuiteTable,
) -> Result<SuiteResult> {
    assert!(!configs.is_empty() && repetitions >= 1);
    let jobs: Vec<(usize, RunConfig)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| {
            (0..repetitions).map(move |rep| {
                let mut cfg = c.clone();
                cfg.seed = c.seed + rep as u64;
                (ci, cfg)
            })
        })
        .collect();
    let reports: Vec<(usize, RunReport)> = jobs
        .par_iter()
        .map(|(ci, cfg)| run_apdmmo_with_table(cfg, table).map(|r| (*ci, r)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (ci, config) in configs.iter().enumerate() {
        let group: Vec<RunReport> = reports
            .iter()
            .filter(|(i, _)| *i == ci)
            .map(|(_, r)| r.clone())
            .collect();
        let dim = group[0].dim;
        rows.push(SuiteResult::aggregate(
            &config.problem.to_string(),
            dim,
            &config.variant.to_string(),
            &group,
        ));
    }
    Ok(SuiteResult { rows })
}

/// Uniform prediction grid in raw fitness units (maximization convention),
/// for external contour plotting. Supports 1D and 2D models.
pub fn emit_surrogate_grid(
    params: &ModelParams,
    lower: &[f64],
    upper: &[f64],
    resolution: usize,
) -> Result<Vec<Vec<f64>>> {
    let dim = params.config().input_dim;
    if dim > 2 {
        return Err(Error::GridDimension(dim));
    }
    assert!(resolution >= 2);
    let axis = |d: usize| -> Vec<f64> {
        (0..resolution)
            .map(|i| lower[d] + (upper[d] - lower[d]) * i as f64 / (resolution - 1) as f64)
            .collect()
    };
    let points: Vec<Vec<f64>> = if dim == 1 {
        axis(0).into_iter().map(|x| vec![x]).collect()
    } else {
        let xs = axis(0);
        let ys = axis(1);
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| vec![x, y]))
            .collect()
    };
    let mut rows = Vec::with_capacity(points.len());
    for chunk in points.chunks(4096) {
        let mut flat = Vec::with_capacity(chunk.len() * dim);
        for p in chunk {
            flat.extend(params.norm.normalize_point(p));
        }
        let x = Mat::from_vec(chunk.len(), dim, flat);
        let preds = forward(params, &x, Mode::Eval)?;
        for (p, pred_std) in chunk.iter().zip(preds) {
            // destandardize, then flip the internal minimization sign back
            let raw_internal = params.norm.destandardize_y(pred_std);
            let mut row = p.clone();
            row.push(-raw_internal);
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Write grid rows as columnar text.
pub fn write_grid<W: std::io::Write>(rows: &[Vec<f64>], w: &mut W) -> Result<()> {
    for row in rows {
        let cols: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", cols.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
