//! `roc-npmle`: constrained nonparametric ROC analysis at the command line.
//!
//! Subcommands: `analyze` (full pipeline on a counts or scores file),
//! `verify` (PAVA against the exact partition oracle), and the
//! `simulate-bias` / `simulate-coverage` / `simulate-sd` Monte Carlo
//! harnesses. Exit codes: 0 success, 1 input or usage error, 2 verification
//! failure or estimator precondition failure.

mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roc_npmle_core::{
    anova_variance, auc_constrained, auc_unconstrained, bias_sweep, empirical_roc, induced_pq,
    log_likelihood, oracle_constrained_mle, pava, read_counts_csv, read_scores_csv,
    run_experiment, simple_variance, tabulate, wald_ci, BinMode, CategoryCounts, Error, Family,
    PavaResult, RocCurve, SimConfig, ORACLE_MAX_K,
};

use report::{merged_rows, ratio_list, render_text, sig5, AnalysisReport, VariantReport};

#[derive(Parser)]
#[command(name = "roc-npmle", version, about = "Convexity-constrained nonparametric ROC estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for every randomized command (fixed default, never wall-clock).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads for simulation commands; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on one dataset and report both AUC variants.
    Analyze(AnalyzeArgs),
    /// Check that pooling attains the exact constrained maximum likelihood.
    Verify(VerifyArgs),
    /// Sweep target AUCs and emit fractional-bias curves.
    SimulateBias(SimulateBiasArgs),
    /// Estimate confidence-interval miss rates for one cell.
    SimulateCoverage(SimulateCellArgs),
    /// Compare empirical SDs with mean variance estimates for one cell.
    SimulateSd(SimulateCellArgs),
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("input").required(true).args(["counts", "scores"])))]
struct AnalyzeArgs {
    /// Counts file: `category,diseased,nondiseased`.
    #[arg(long)]
    counts: Option<PathBuf>,

    /// Raw scores file: `score,label` with label 1 = signal present.
    #[arg(long)]
    scores: Option<PathBuf>,

    /// Bin-edge file for scores (one ascending edge per line); without it
    /// each distinct score is its own category.
    #[arg(long, requires = "scores")]
    bin_edges: Option<PathBuf>,

    /// Dataset label for the report (defaults to the input path).
    #[arg(long)]
    label: Option<String>,

    /// Two-sided interval level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Write the empirical ROC vertices as `fpr,tpr`.
    #[arg(long)]
    curve_out: Option<PathBuf>,

    /// Write the constrained ROC vertices as `fpr,tpr`.
    #[arg(long)]
    constrained_curve_out: Option<PathBuf>,

    /// Write pooled counts as `category,diseased,nondiseased,original_categories`.
    #[arg(long)]
    merged_out: Option<PathBuf>,
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["counts", "fuzz"])))]
struct VerifyArgs {
    /// Counts file to verify.
    #[arg(long)]
    counts: Option<PathBuf>,

    /// Verify this many random instances instead of a file.
    #[arg(long)]
    fuzz: Option<u64>,

    /// Refuse inputs with more categories than this (hard cap 20).
    #[arg(long, default_value_t = 12)]
    max_k: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Normal,
    Uniform,
}

impl From<FamilyArg> for Family {
    fn from(value: FamilyArg) -> Self {
        match value {
            FamilyArg::Normal => Family::Normal,
            FamilyArg::Uniform => Family::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BinModeArg {
    EqualWidth,
    PopulationQuantile,
    PooledQuantile,
}

impl From<BinModeArg> for BinMode {
    fn from(value: BinModeArg) -> Self {
        match value {
            BinModeArg::EqualWidth => BinMode::EqualWidth,
            BinModeArg::PopulationQuantile => BinMode::PopulationQuantile,
            BinModeArg::PooledQuantile => BinMode::PooledQuantile,
        }
    }
}

#[derive(clap::Args)]
struct SimulateCellArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,

    /// Continuous target AUC in (0.5, 1).
    #[arg(long)]
    auc: f64,

    /// Signal-present (diseased) sample size M.
    #[arg(long)]
    m: u64,

    /// Signal-absent size is ratio * M.
    #[arg(long)]
    ratio: u64,

    /// Number of rating categories.
    #[arg(long)]
    k: usize,

    /// Replicates per cell.
    #[arg(long)]
    reps: u64,

    #[arg(long, value_enum, default_value_t = BinModeArg::EqualWidth)]
    bin_mode: BinModeArg,

    /// Two-sided interval level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct SimulateBiasArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,

    /// Signal-present (diseased) sample size per replicate.
    #[arg(long, default_value_t = 110)]
    m: u64,

    /// Signal-absent sample size per replicate.
    #[arg(long, default_value_t = 55)]
    n: u64,

    /// Number of rating categories.
    #[arg(long, default_value_t = 7)]
    k: usize,

    /// Replicates per grid point.
    #[arg(long)]
    reps: u64,

    #[arg(long, default_value_t = 0.60)]
    grid_start: f64,

    #[arg(long, default_value_t = 0.99)]
    grid_stop: f64,

    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,

    #[arg(long, value_enum, default_value_t = BinModeArg::EqualWidth)]
    bin_mode: BinModeArg,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

enum AppError {
    Core(Error),
    VerifyFailed(String),
    Usage(String),
}

impl From<Error> for AppError {
    fn from(err: Error) -> Self {
        AppError::Core(err)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(Error::OracleLimit { .. }) => 2,
            AppError::Core(Error::DegenerateSample { .. }) => 2,
            AppError::Core(_) => 1,
            AppError::VerifyFailed(_) => 2,
            AppError::Usage(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            AppError::Core(err) => err.to_string(),
            AppError::VerifyFailed(msg) => msg.clone(),
            AppError::Usage(msg) => msg.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let outcome = match cli.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build();
            match pool {
                Ok(pool) => pool.install(|| run(&cli)),
                Err(err) => Err(AppError::Usage(format!("cannot build thread pool: {err}"))),
            }
        }
        None => run(&cli),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::Analyze(args) => cmd_analyze(cli, args),
        Command::Verify(args) => cmd_verify(cli, args),
        Command::SimulateCoverage(args) => cmd_simulate_coverage(cli, args),
        Command::SimulateSd(args) => cmd_simulate_sd(cli, args),
        Command::SimulateBias(args) => cmd_simulate_bias(cli, args),
    }
}

fn load_counts(args: &AnalyzeArgs) -> Result<(CategoryCounts, String), AppError> {
    if let Some(path) = &args.counts {
        let counts = read_counts_csv(path)?;
        return Ok((counts, path.display().to_string()));
    }
    let path = args.scores.as_ref().expect("clap enforces the input group");
    let edges = match &args.bin_edges {
        Some(edge_path) => Some(roc_npmle_core::counts::read_bin_edges(edge_path)?),
        None => None,
    };
    let sample = read_scores_csv(path, edges.as_deref())?;
    Ok((tabulate(&sample)?, path.display().to_string()))
}

fn cmd_analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<(), AppError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(AppError::Usage(format!(
            "--alpha must be in (0, 1), got {}",
            args.alpha
        )));
    }
    let (counts, default_label) = load_counts(args)?;
    let dataset = args.label.clone().unwrap_or(default_label);

    let curve = empirical_roc(&counts);
    let fit = pava(&counts);
    let constrained_curve = roc_npmle_core::constrained_roc(&fit);

    let auc_u = auc_unconstrained(&counts);
    let auc_c = auc_constrained(&fit);
    let var_u = anova_variance(&counts)?;
    let var_c = anova_variance(fit.merged())?;
    let n = counts.absent_total();
    let m = counts.present_total();
    let simple_u = simple_variance(auc_u.value(), n, m);
    let simple_c = simple_variance(auc_c.value(), n, m);
    let ci_u = wald_ci(auc_u.value(), var_u.total, args.alpha);
    let ci_c = wald_ci(auc_c.value(), var_c.total, args.alpha);

    let report = AnalysisReport {
        schema_version: report::SCHEMA_VERSION,
        dataset,
        alpha: args.alpha,
        k: counts.k(),
        k_merged: fit.k_merged(),
        unconstrained: VariantReport::new(auc_u.value(), var_u.total, simple_u.total, ci_u),
        constrained: VariantReport::new(auc_c.value(), var_c.total, simple_c.total, ci_c),
        merged_categories: merged_rows(&fit),
        index_map: fit.index_map().iter().map(|&b| b + 1).collect(),
    };

    if let Some(path) = &args.curve_out {
        write_curve_csv(path, &curve)?;
    }
    if let Some(path) = &args.constrained_curve_out {
        write_curve_csv(path, &constrained_curve)?;
    }
    if let Some(path) = &args.merged_out {
        write_merged_csv(path, &fit)?;
    }

    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        print!("{}", render_text(&report));
        println!("pooled ratios (m~/n~): {}", ratio_list(fit.merged()));
    }
    Ok(())
}

fn write_curve_csv(path: &Path, curve: &RocCurve) -> Result<(), AppError> {
    let mut out = String::from("fpr,tpr\n");
    for &(fpr, tpr) in curve.vertices() {
        let _ = writeln!(out, "{fpr},{tpr}");
    }
    std::fs::write(path, out).map_err(Error::from)?;
    Ok(())
}

fn write_merged_csv(path: &Path, fit: &PavaResult) -> Result<(), AppError> {
    let mut out = String::from("category,diseased,nondiseased,original_categories\n");
    for row in merged_rows(fit) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.category, row.diseased, row.nondiseased, row.original_categories
        );
    }
    std::fs::write(path, out).map_err(Error::from)?;
    Ok(())
}

/// Likelihood of the pooled fit, evaluated at the induced per-category
/// probabilities.
fn pava_loglik(counts: &CategoryCounts, fit: &PavaResult) -> f64 {
    let (p, q) = induced_pq(counts, fit.index_map());
    log_likelihood(counts, &p, &q).loglik
}

fn verify_one(counts: &CategoryCounts) -> Result<(f64, f64), AppError> {
    let fit = pava(counts);
    let at_pava = pava_loglik(counts, &fit);
    let oracle = oracle_constrained_mle(counts)?;
    if (at_pava - oracle.loglik).abs() > 1e-9 {
        return Err(AppError::VerifyFailed(format!(
            "pava log-likelihood {at_pava:.12} differs from oracle maximum {:.12}",
            oracle.loglik
        )));
    }
    Ok((at_pava, oracle.loglik))
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<(), AppError> {
    let max_k = args.max_k.min(ORACLE_MAX_K);
    if let Some(path) = &args.counts {
        let counts = read_counts_csv(path)?;
        if counts.k() > max_k {
            return Err(AppError::Core(Error::OracleLimit {
                k: counts.k(),
                max_k,
            }));
        }
        let (at_pava, at_oracle) = verify_one(&counts)?;
        println!("pava   log-likelihood: {at_pava:.12}");
        println!("oracle log-likelihood: {at_oracle:.12}");
        println!("PASS");
        return Ok(());
    }

    let instances = args.fuzz.expect("clap enforces the mode group");
    if instances == 0 {
        return Err(AppError::Usage("--fuzz must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    for i in 0..instances {
        let counts = random_counts(&mut rng, max_k);
        verify_one(&counts).map_err(|err| match err {
            AppError::VerifyFailed(msg) => AppError::VerifyFailed(format!(
                "instance {i}: {msg} (m = {:?}, n = {:?})",
                counts.present(),
                counts.absent()
            )),
            other => other,
        })?;
    }
    println!("fuzz: {instances}/{instances} instances PASS");
    Ok(())
}

/// Random counts with k <= max_k and per-category counts <= 20, both classes
/// non-empty.
fn random_counts<R: Rng>(rng: &mut R, max_k: usize) -> CategoryCounts {
    loop {
        let k = rng.random_range(1..=max_k);
        let m: Vec<u64> = (0..k).map(|_| rng.random_range(0..=20)).collect();
        let n: Vec<u64> = (0..k).map(|_| rng.random_range(0..=20)).collect();
        if let Ok(counts) = CategoryCounts::new(m, n) {
            return counts;
        }
    }
}

fn cell_config(cli: &Cli, args: &SimulateCellArgs) -> SimConfig {
    SimConfig {
        family: args.family.into(),
        target_auc: args.auc,
        m_present: args.m,
        ratio: args.ratio,
        categories: args.k,
        replicates: args.reps,
        alpha: args.alpha,
        seed: cli.seed,
        bin_mode: args.bin_mode.into(),
    }
}

fn cmd_simulate_coverage(cli: &Cli, args: &SimulateCellArgs) -> Result<(), AppError> {
    let config = cell_config(cli, args);
    let result = run_experiment(&config)?;
    let mut out = String::from("family,auc,m,ratio,k,miss_rate\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        config.family.as_str(),
        config.target_auc,
        config.m_present,
        config.ratio,
        config.categories,
        result.coverage_miss_rate
    );
    std::fs::write(&args.out, out).map_err(Error::from)?;
    if cli.json {
        println!(
            "{}",
            serde_json::json!({
                "schema_version": report::SCHEMA_VERSION,
                "miss_rate": result.coverage_miss_rate,
                "discretized_auc": result.discretized_auc,
                "replicates": result.replicates_run,
            })
        );
    } else {
        println!(
            "miss rate {} over {} replicates (reference: discretized AUC {})",
            sig5(result.coverage_miss_rate),
            result.replicates_run,
            sig5(result.discretized_auc)
        );
    }
    Ok(())
}

fn cmd_simulate_sd(cli: &Cli, args: &SimulateCellArgs) -> Result<(), AppError> {
    let config = cell_config(cli, args);
    let result = run_experiment(&config)?;
    let mut out = String::from(
        "family,auc,m,ratio,k,sd_auc_unconstrained,sqrt_mean_var_unconstrained,sd_auc_constrained,sqrt_mean_var_constrained\n",
    );
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        config.family.as_str(),
        config.target_auc,
        config.m_present,
        config.ratio,
        config.categories,
        result.sd_auc_unconstrained,
        result.mean_var_unconstrained.sqrt(),
        result.sd_auc_constrained,
        result.mean_var_constrained.sqrt()
    );
    std::fs::write(&args.out, out).map_err(Error::from)?;
    if !cli.json {
        println!(
            "sd(unconstrained) {} vs sqrt mean var {}; sd(constrained) {} vs sqrt mean var {}",
            sig5(result.sd_auc_unconstrained),
            sig5(result.mean_var_unconstrained.sqrt()),
            sig5(result.sd_auc_constrained),
            sig5(result.mean_var_constrained.sqrt())
        );
    } else {
        println!(
            "{}",
            serde_json::json!({
                "schema_version": report::SCHEMA_VERSION,
                "sd_auc_unconstrained": result.sd_auc_unconstrained,
                "sqrt_mean_var_unconstrained": result.mean_var_unconstrained.sqrt(),
                "sd_auc_constrained": result.sd_auc_constrained,
                "sqrt_mean_var_constrained": result.mean_var_constrained.sqrt(),
            })
        );
    }
    Ok(())
}

fn cmd_simulate_bias(cli: &Cli, args: &SimulateBiasArgs) -> Result<(), AppError> {
    if args.grid_step <= 0.0 || args.grid_stop < args.grid_start {
        return Err(AppError::Usage(
            "need grid_step > 0 and grid_stop >= grid_start".into(),
        ));
    }
    let steps = ((args.grid_stop - args.grid_start) / args.grid_step).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| args.grid_start + i as f64 * args.grid_step)
        .filter(|&auc| auc < 1.0)
        .collect();
    if grid.is_empty() {
        return Err(AppError::Usage("empty AUC grid".into()));
    }

    let points = bias_sweep(
        args.family.into(),
        &grid,
        args.m,
        args.n,
        args.k,
        args.reps,
        cli.seed,
        args.bin_mode.into(),
    )?;

    let mut out =
        String::from("target_auc,fractional_bias_unconstrained,fractional_bias_constrained\n");
    for point in &points {
        let _ = writeln!(
            out,
            "{},{},{}",
            point.target_auc,
            point.mean_unconstrained / point.target_auc,
            point.mean_constrained / point.target_auc
        );
    }
    std::fs::write(&args.out, out).map_err(Error::from)?;
    if !cli.json {
        println!(
            "bias sweep: {} grid points, {} replicates each",
            points.len(),
            args.reps
        );
    } else {
        println!(
            "{}",
            serde_json::json!({
                "schema_version": report::SCHEMA_VERSION,
                "points": points.len(),
                "replicates": args.reps,
            })
        );
    }
    Ok(())
}
