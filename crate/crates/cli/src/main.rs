//! Command-line driver: single runs, suites, ablations, the budget-ratio
//! sweep, and surrogate grid dumps.

use apdmmo::benchmark::{make_problem_with_table, ProblemId, SuiteTable};
use apdmmo::glf::{build_dataset, train};
use apdmmo::harness::{
    emit_surrogate_grid, run_apdmmo_with_table, run_suite, write_grid, Overrides, RunConfig,
    SuiteResult, Variant,
};
use apdmmo::model::{init_model, ModelConfig, ModelParams};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "apdmmo", about = "Surrogate-assisted multimodal optimizer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem once and write a JSON report.
    Run(RunArgs),
    /// Run several problems with repetitions and aggregate PR/SR.
    Suite(SuiteArgs),
    /// Compare pipeline variants on one problem.
    Ablate(AblateArgs),
    /// Sweep the training budget ratio r over 1/8 .. 7/8.
    RatioSweep(RatioSweepArgs),
    /// Fit a surrogate and dump its prediction grid (1D/2D problems).
    Grid(GridArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Problem id, F1..F20.
    #[arg(long)]
    problem: String,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Fraction of the budget used for surrogate training.
    #[arg(long)]
    r: Option<f64>,
    /// Number of descent start points.
    #[arg(long)]
    n_starts: Option<usize>,
    /// Pipeline variant (full, no-fpd, no-pls, p1, p5, m1, m5, s1, s5).
    #[arg(long)]
    variant: Option<String>,
    /// Use the full published scale (GPU-sized; very slow on one core).
    #[arg(long)]
    paper_scale: bool,
    /// TOML config file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark table overrides (TOML, same schema as the bundled table).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Seed for generated problem data (composition rotations/shifts).
    #[arg(long)]
    problem_seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output path for the JSON report (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Repetitions per problem.
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Comma-separated problems or ranges, e.g. "F1-F5,F10".
    #[arg(long)]
    problems: Option<String>,
    /// Output directory for CSV + text tables (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    /// Comma-separated variants to compare.
    #[arg(long, default_value = "full,no-fpd,no-pls")]
    variants: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatioSweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    /// Output file for the columnar grid (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional path to save the trained model checkpoint.
    #[arg(long)]
    save_model: Option<PathBuf>,
    /// Load a checkpoint instead of training.
    #[arg(long)]
    load_model: Option<PathBuf>,
}

/// Config-file schema: run-level fields plus stage overrides, all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    seed: Option<u64>,
    problem_seed: Option<u64>,
    train_ratio: Option<f64>,
    variant: Option<String>,
    paper_scale: Option<bool>,
    accuracy_levels: Option<Vec<f64>>,
    #[serde(flatten)]
    overrides: Overrides,
}

fn load_table(path: &Option<PathBuf>) -> Result<SuiteTable, apdmmo::Error> {
    match path {
        Some(p) => SuiteTable::load_with_overrides(p),
        None => Ok(SuiteTable::bundled()),
    }
}

fn build_run_config(common: &CommonArgs, problem: ProblemId) -> Result<RunConfig, apdmmo::Error> {
    let mut cfg = RunConfig::new(problem, common.seed);
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)?;
        let file: FileConfig = toml::from_str(&text)
            .map_err(|e| apdmmo::Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        if let Some(v) = file.seed {
            cfg.seed = v;
        }
        if let Some(v) = file.problem_seed {
            cfg.problem_seed = v;
        }
        if let Some(v) = file.train_ratio {
            cfg.train_ratio = v;
        }
        if let Some(v) = &file.variant {
            cfg.variant = Variant::from_str(v)?;
        }
        if let Some(v) = file.paper_scale {
            cfg.paper_scale = v;
        }
        if let Some(v) = file.accuracy_levels {
            cfg.accuracy_levels = v;
        }
        cfg.overrides = file.overrides;
    }
    // command line wins over the file
    cfg.seed = common.seed;
    if let Some(r) = common.r {
        cfg.train_ratio = r;
    }
    if let Some(n) = common.n_starts {
        cfg.overrides.n_starts = Some(n);
    }
    if let Some(v) = &common.variant {
        cfg.variant = Variant::from_str(v)?;
    }
    if common.paper_scale {
        cfg.paper_scale = true;
    }
    if let Some(ps) = common.problem_seed {
        cfg.problem_seed = ps;
    }
    Ok(cfg)
}

fn parse_problem_list(spec: &str) -> Result<Vec<ProblemId>, apdmmo::Error> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once('-') {
            let lo = ProblemId::from_str(a)?;
            let hi = ProblemId::from_str(b)?;
            for n in lo.0..=hi.0 {
                out.push(ProblemId(n));
            }
        } else {
            out.push(ProblemId::from_str(part)?);
        }
    }
    if out.is_empty() {
        return Err(apdmmo::Error::InvalidConfig("empty problem list".into()));
    }
    Ok(out)
}

fn emit_suite(result: &SuiteResult, out: &Option<PathBuf>, stem: &str) -> Result<(), apdmmo::Error> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{stem}.csv")), result.to_csv())?;
            std::fs::write(dir.join(format!("{stem}.txt")), result.to_pretty())?;
            println!("{}", result.to_pretty());
            println!("wrote {stem}.csv and {stem}.txt to {}", dir.display());
        }
        None => {
            println!("{}", result.to_pretty());
            print!("{}", result.to_csv());
        }
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<(), apdmmo::Error> {
    let problem = ProblemId::from_str(&args.common.problem)?;
    let table = load_table(&args.common.table)?;
    let cfg = build_run_config(&args.common, problem)?;
    let report = run_apdmmo_with_table(&cfg, &table)?;
    let json = report.to_json();
    match &args.out {
        Some(p) => {
            std::fs::write(p, &json)?;
            let pr_line: Vec<String> = report
                .npf_at_accuracy
                .iter()
                .map(|a| format!("{:.0e}:{}", a.accuracy, a.npf))
                .collect();
            println!(
                "{} seed {} variant {}: NPF {{{}}} of {} | FEs {}/{} | {} ms",
                report.problem,
                report.seed,
                report.variant,
                pr_line.join(" "),
                report.nkp,
                report.ledger.total_used,
                report.ledger.max_fes,
                report.timings.total_ms
            );
            println!("report written to {}", p.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_suite(args: &SuiteArgs) -> Result<(), apdmmo::Error> {
    let table = load_table(&args.common.table)?;
    let problems = match &args.suite_problem_list() {
        Some(list) => parse_problem_list(list)?,
        None => vec![ProblemId::from_str(&args.common.problem)?],
    };
    let configs: Vec<RunConfig> = problems
        .iter()
        .map(|&p| build_run_config(&args.common, p))
        .collect::<Result<_, _>>()?;
    let result = run_suite(&configs, args.runs, &table)?;
    emit_suite(&result, &args.out, "suite")
}

impl SuiteArgs {
    fn suite_problem_list(&self) -> Option<String> {
        self.problems.clone()
    }
}

fn cmd_ablate(args: &AblateArgs) -> Result<(), apdmmo::Error> {
    let problem = ProblemId::from_str(&args.common.problem)?;
    let table = load_table(&args.common.table)?;
    let mut configs = Vec::new();
    for v in args.variants.split(',') {
        let mut cfg = build_run_config(&args.common, problem)?;
        cfg.variant = Variant::from_str(v.trim())?;
        configs.push(cfg);
    }
    let result = run_suite(&configs, args.runs, &table)?;
    emit_suite(&result, &args.out, "ablate")
}

fn cmd_ratio_sweep(args: &RatioSweepArgs) -> Result<(), apdmmo::Error> {
    let problem = ProblemId::from_str(&args.common.problem)?;
    let table = load_table(&args.common.table)?;
    let mut rows = SuiteResult::default();
    for num in 1..=7u32 {
        let mut cfg = build_run_config(&args.common, problem)?;
        cfg.train_ratio = num as f64 / 8.0;
        let result = run_suite(&[cfg], args.runs, &table)?;
        let mut row = result.rows.into_iter().next().unwrap();
        row.variant = format!("r={num}/8");
        rows.rows.push(row);
    }
    emit_suite(&rows, &args.out, "ratio_sweep")
}

fn cmd_grid(args: &GridArgs) -> Result<(), apdmmo::Error> {
    let problem = ProblemId::from_str(&args.common.problem)?;
    let table = load_table(&args.common.table)?;
    let cfg = build_run_config(&args.common, problem)?;
    let (prob, evaluator) =
        make_problem_with_table(problem, cfg.problem_seed, &table)?;
    let spec = prob.spec().clone();

    let params: ModelParams = match &args.load_model {
        Some(path) => ModelParams::load_from_path(path)?,
        None => {
            let pipeline = cfg.resolve(spec.dim);
            let dataset = build_dataset(&evaluator, cfg.train_ratio, pipeline.train.levels, cfg.seed)?;
            let mc = ModelConfig::new(
                spec.dim,
                pipeline.model_hidden,
                pipeline.model_depth,
                pipeline.block_kind,
            );
            let mut params = init_model(mc, cfg.seed);
            train(&mut params, &dataset, &pipeline.train)?;
            params
        }
    };
    if let Some(path) = &args.save_model {
        params.save_to_path(path)?;
        eprintln!("checkpoint saved to {}", path.display());
    }
    let rows = emit_surrogate_grid(&params, &spec.lower, &spec.upper, args.resolution)?;
    match &args.out {
        Some(p) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
            write_grid(&rows, &mut f)?;
            eprintln!("grid with {} rows written to {}", rows.len(), p.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            write_grid(&rows, &mut stdout)?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::RatioSweep(a) => cmd_ratio_sweep(a),
        Command::Grid(a) => cmd_grid(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
