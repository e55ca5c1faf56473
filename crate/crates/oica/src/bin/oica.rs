//! Command-line front end: dataset generation, single runs, L-sweeps,
//! fluctuation studies, and record comparison.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oica::config::OrderingConfig;
use oica::error::OicaError;
use oica::fast::ordering_ica_fast;
use oica::io::{
    read_dataset, read_run_record, write_dataset, write_run_record, DatasetBundle, Format,
    RunRecord,
};
use oica::linalg::signed_min_distance;
use oica::metrics::{fluctuation, ordering_error};
use oica::reference::ordering_ica_reference;
use oica::result::{Algorithm, SeparationResult};
use oica::signal::{compose_unmixing, preprocess, RealMatrix, DEFAULT_EIG_FLOOR};
use oica::sourcegen::{gen_dataset, gg_kurtosis, paper_rho_grid, SourceSpec};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_ALGORITHM: u8 = 4;

#[derive(Parser)]
#[command(name = "oica", version, about = "Ordering ICA: blind source separation with ordered extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset bundle
    Gen(GenArgs),
    /// Run one separation and write a run record
    Run(RunArgs),
    /// Sweep the candidate count L, averaging metrics over repeats
    Sweep(SweepArgs),
    /// Measure run-to-run fluctuation of the separating vectors
    Fluct(FluctArgs),
    /// Compare two run records
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Output bundle directory
    #[arg(long)]
    out: PathBuf,
    /// Shape parameter of one generalized Gaussian source (repeatable)
    #[arg(long = "rho")]
    rhos: Vec<f64>,
    /// Use the 20-value geometric rho grid instead of explicit --rho flags
    #[arg(long, conflicts_with = "rhos")]
    paper_grid: bool,
    /// Number of additional Gaussian sources
    #[arg(long, default_value_t = 0)]
    gaussian: usize,
    /// Samples per source
    #[arg(long)]
    samples: usize,
    /// RNG seed
    #[arg(long)]
    seed: u64,
    /// On-disk matrix encoding
    #[arg(long, default_value = "binary", value_parser = parse_format)]
    format: Format,
    /// Skip the random mixing matrix (X = S)
    #[arg(long)]
    identity_mixing: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset bundle directory
    #[arg(long)]
    dataset: PathBuf,
    /// Solver to use
    #[arg(long, default_value = "fast", value_parser = parse_algorithm)]
    algorithm: Algorithm,
    /// Candidate count per component
    #[arg(long)]
    l: usize,
    /// Iteration cap per component
    #[arg(long, default_value_t = 30)]
    k: usize,
    /// Convergence tolerance
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// RNG seed for candidate initialization
    #[arg(long)]
    seed: u64,
    /// Output record directory
    #[arg(long)]
    out: PathBuf,
    /// On-disk matrix encoding for the record
    #[arg(long, default_value = "binary", value_parser = parse_format)]
    format: Format,
    /// Disable the Gaussianity stop test (extract all components)
    #[arg(long)]
    no_gauss_test: bool,
    /// Fast solver: score only candidates that converged within K iterations
    #[arg(long)]
    strict: bool,
    /// Reference solver: draw initial vectors in the reduced complement
    /// space, matching the fast solver's trajectories
    #[arg(long)]
    matched_init: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "fast", value_parser = parse_algorithm)]
    algorithm: Algorithm,
    /// Candidate count to sweep (repeatable)
    #[arg(long = "l", required = true)]
    l_values: Vec<usize>,
    /// Repeats per L value
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    /// Base seed; repeat j uses seed + j
    #[arg(long)]
    seed: u64,
    /// Output directory for the CSV files
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Tolerance for counting an entry of W.A as an ordering error
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    #[arg(long)]
    no_gauss_test: bool,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct FluctArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "fast", value_parser = parse_algorithm)]
    algorithm: Algorithm,
    #[arg(long)]
    l: usize,
    /// Number of runs to compare pairwise
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    /// Base seed; run j uses seed + j
    #[arg(long)]
    seed: u64,
    /// Use the same seed for every run (determinism check)
    #[arg(long)]
    identical_seeds: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long)]
    no_gauss_test: bool,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct CompareArgs {
    record_a: PathBuf,
    record_b: PathBuf,
    /// Maximum allowed sign-invariant row deviation of W
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

fn parse_format(s: &str) -> Result<Format, String> {
    Format::parse(s).ok_or_else(|| format!("unknown format '{s}' (expected text|binary)"))
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s).ok_or_else(|| format!("unknown algorithm '{s}' (expected fast|reference)"))
}

fn error_exit(err: &OicaError) -> u8 {
    match err {
        OicaError::Io(_)
        | OicaError::Format { .. }
        | OicaError::ChecksumMismatch { .. } => EXIT_IO,
        _ => EXIT_ALGORITHM,
    }
}

fn fail(err: OicaError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(error_exit(&err))
}

fn usage_fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("OICA_THREADS") {
        if threads != "0" {
            std::env::set_var("MATMUL_NUM_THREADS", threads);
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Fluct(args) => cmd_fluct(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn cmd_gen(args: GenArgs) -> ExitCode {
    let rhos = if args.paper_grid {
        paper_rho_grid()
    } else {
        args.rhos
    };
    if rhos.is_empty() && args.gaussian == 0 {
        return usage_fail("need at least one source (--rho, --paper-grid, or --gaussian)");
    }
    if args.samples == 0 {
        return usage_fail("--samples must be at least 1");
    }
    if rhos.iter().any(|&r| !(r.is_finite() && r > 0.0)) {
        return usage_fail("every --rho must be a positive finite number");
    }
    let spec = SourceSpec {
        rhos,
        gaussian_count: args.gaussian,
        samples: args.samples,
        seed: args.seed,
        identity_mixing: args.identity_mixing,
    };
    let dataset = match gen_dataset(&spec) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    if let Err(e) = write_dataset(&args.out, &dataset, &spec, args.format) {
        return fail(e);
    }
    println!("bundle: {}", args.out.display());
    println!("source rho  kurtosis");
    for (i, &rho) in spec.rhos.iter().enumerate() {
        println!("{:>6} {:<10} {}", i + 1, rho, gg_kurtosis(rho));
    }
    for g in 0..spec.gaussian_count {
        println!("{:>6} {:<10} {}", spec.rhos.len() + g + 1, "gaussian", 0.0);
    }
    ExitCode::SUCCESS
}

struct RunOutcome {
    /// Unmixing matrix acting on the raw (uncentered) observations.
    w: RealMatrix,
    result: SeparationResult,
}

fn run_once(
    bundle: &DatasetBundle,
    algorithm: Algorithm,
    config: &OrderingConfig,
) -> Result<RunOutcome, OicaError> {
    let (xw, model) = preprocess(&bundle.dataset.observed, DEFAULT_EIG_FLOOR)?;
    let result = match algorithm {
        Algorithm::Reference => ordering_ica_reference(&xw, config)?,
        Algorithm::Fast => ordering_ica_fast(&xw, config)?,
    };
    let w = compose_unmixing(&result.w, &model)?;
    Ok(RunOutcome { w, result })
}

fn cmd_run(args: RunArgs) -> ExitCode {
    if args.l == 0 {
        return usage_fail("--l must be at least 1");
    }
    let bundle = match read_dataset(&args.dataset) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let mut config = OrderingConfig::new(args.l, args.seed);
    config.max_iterations = args.k;
    config.tolerance = args.eps;
    config.gaussianity_test = !args.no_gauss_test;
    config.strict_converged_only = args.strict;
    config.matched_init = args.matched_init;

    let outcome = match run_once(&bundle, args.algorithm, &config) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let mut record_result = outcome.result;
    let record = RunRecord {
        algorithm: args.algorithm,
        candidates: args.l,
        max_iterations: args.k,
        tolerance: args.eps,
        seed: args.seed,
        dataset_path: args.dataset.clone(),
        dataset_hash: bundle.hash,
        result: SeparationResult {
            w: outcome.w,
            ..record_result.clone()
        },
    };
    if let Err(e) = write_run_record(&args.out, &record, args.format) {
        return fail(e);
    }
    println!("record: {}", args.out.display());
    println!("component  upsilon  iterations  seconds");
    for i in 0..record_result.upsilons.len() {
        println!(
            "{:>9}  {:.6}  {:>10}  {:.6}",
            i + 1,
            record_result.upsilons[i],
            record_result.iterations[i],
            record_result.component_seconds[i]
        );
    }
    if let Some(idx) = record_result.stop_index {
        println!(
            "stopped at component {idx}: upsilon {} below the Gaussianity threshold",
            record_result.stop_upsilon.take().unwrap_or(f64::NAN)
        );
    }
    println!("total seconds: {}", record_result.total_seconds);
    ExitCode::SUCCESS
}

/// Pads `W` with zero rows up to `n` so partial extractions can still be
/// scored against an N x N ground truth.
fn pad_rows(w: &RealMatrix, n: usize) -> RealMatrix {
    let mut full = RealMatrix::zeros((n, w.ncols()));
    for (i, row) in w.rows().into_iter().enumerate() {
        full.row_mut(i).assign(&row);
    }
    full
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn write_stat_csv(path: &PathBuf, rows: &[(usize, f64, f64)]) -> std::io::Result<()> {
    let mut out = String::from("L,mean,stddev\n");
    for (l, mean, std) in rows {
        let _ = writeln!(out, "{l},{mean},{std}");
    }
    fs::write(path, out)
}

fn cmd_sweep(args: SweepArgs) -> ExitCode {
    if args.repeats == 0 {
        return usage_fail("--repeats must be at least 1");
    }
    if args.l_values.iter().any(|&l| l == 0) {
        return usage_fail("every --l must be at least 1");
    }
    let bundle = match read_dataset(&args.dataset) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let mixing = match &bundle.dataset.mixing {
        Some(a) => a.clone(),
        None => return fail(OicaError::InvalidMatrix(
            "sweep needs a bundle with a ground-truth mixing matrix".into(),
        )),
    };
    let order = match bundle.dataset.nongaussianity_order() {
        Some(o) => o,
        None => return fail(OicaError::InvalidMatrix(
            "sweep needs a bundle with known source kurtoses".into(),
        )),
    };
    // reorder the ground-truth mixing columns so a perfect ordered
    // separation maps to the identity pattern
    let n = mixing.nrows();
    let mut a_sorted = RealMatrix::zeros((n, n));
    for (rank, &src) in order.iter().enumerate() {
        a_sorted.column_mut(rank).assign(&mixing.column(src));
    }

    if let Err(e) = fs::create_dir_all(&args.out) {
        return fail(e.into());
    }
    let mut err_rows = Vec::new();
    let mut time_rows = Vec::new();
    let mut count_rows = Vec::new();
    for &l in &args.l_values {
        let mut errs = Vec::new();
        let mut times = Vec::new();
        let mut counts = Vec::new();
        for j in 0..args.repeats {
            let mut config = OrderingConfig::new(l, args.seed + j as u64);
            config.max_iterations = args.k;
            config.tolerance = args.eps;
            config.gaussianity_test = !args.no_gauss_test;
            config.strict_converged_only = args.strict;
            let outcome = match run_once(&bundle, args.algorithm, &config) {
                Ok(o) => o,
                Err(e) => return fail(e),
            };
            let padded = pad_rows(&outcome.w, n);
            match ordering_error(&padded, &a_sorted, args.tau) {
                Ok(e) => errs.push(e),
                Err(e) => return fail(e),
            }
            times.push(outcome.result.total_seconds);
            counts.push(outcome.result.extracted() as f64);
        }
        let (em, es) = mean_std(&errs);
        let (tm, ts) = mean_std(&times);
        let (cm, cs) = mean_std(&counts);
        err_rows.push((l, em, es));
        time_rows.push((l, tm, ts));
        count_rows.push((l, cm, cs));
        println!("L={l}: ordering error {em} (sd {es}), time {tm}s, extracted {cm}");
    }
    for (name, rows) in [
        ("ordering_error_vs_L.csv", &err_rows),
        ("time_vs_L.csv", &time_rows),
        ("ngauss_count_vs_L.csv", &count_rows),
    ] {
        if let Err(e) = write_stat_csv(&args.out.join(name), rows) {
            return fail(e.into());
        }
    }
    println!("csv: {}", args.out.display());
    ExitCode::SUCCESS
}

fn cmd_fluct(args: FluctArgs) -> ExitCode {
    if args.repeats < 2 {
        return usage_fail("--repeats must be at least 2 (fluctuation needs run pairs)");
    }
    if args.l == 0 {
        return usage_fail("--l must be at least 1");
    }
    let bundle = match read_dataset(&args.dataset) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let mut runs: Vec<RealMatrix> = Vec::with_capacity(args.repeats);
    for j in 0..args.repeats {
        let seed = if args.identical_seeds {
            args.seed
        } else {
            args.seed + j as u64
        };
        let mut config = OrderingConfig::new(args.l, seed);
        config.max_iterations = args.k;
        config.tolerance = args.eps;
        config.gaussianity_test = !args.no_gauss_test;
        config.strict_converged_only = args.strict;
        match run_once(&bundle, args.algorithm, &config) {
            Ok(o) => runs.push(o.w),
            Err(e) => return fail(e),
        }
    }
    // Runs may stop at different depths; compare the ranks all runs share.
    let min_rows = runs.iter().map(|r| r.nrows()).min().unwrap_or(0);
    if min_rows == 0 {
        return fail(OicaError::DimensionMismatch(
            "at least one run extracted no components".into(),
        ));
    }
    let truncated: Vec<RealMatrix> = runs
        .iter()
        .map(|r| r.slice(ndarray::s![..min_rows, ..]).to_owned())
        .collect();
    let report = match fluctuation(&truncated) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Err(e) = fs::create_dir_all(&args.out) {
        return fail(e.into());
    }
    let mut csv = String::from("rank,mean_divergence\n");
    for (i, v) in report.per_component.iter().enumerate() {
        let _ = writeln!(csv, "{},{v}", i + 1);
    }
    if let Err(e) = fs::write(args.out.join("fluctuation_per_rank.csv"), csv) {
        return fail(e.into());
    }
    let mut groups = String::from("group,mean_divergence\n");
    for (label, v) in &report.group_averages {
        let _ = writeln!(groups, "{label},{v}");
        println!("{label}: {v}");
    }
    if let Err(e) = fs::write(args.out.join("fluctuation_groups.csv"), groups) {
        return fail(e.into());
    }
    println!("csv: {}", args.out.display());
    ExitCode::SUCCESS
}

fn cmd_compare(args: CompareArgs) -> ExitCode {
    let a = match read_run_record(&args.record_a) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let b = match read_run_record(&args.record_b) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if a.dataset_hash != b.dataset_hash {
        return fail(OicaError::DimensionMismatch(format!(
            "records come from different datasets ({:016x} vs {:016x})",
            a.dataset_hash, b.dataset_hash
        )));
    }
    if a.result.w.dim() != b.result.w.dim() {
        println!(
            "W shapes differ: {}x{} vs {}x{}",
            a.result.w.nrows(),
            a.result.w.ncols(),
            b.result.w.nrows(),
            b.result.w.ncols()
        );
        return ExitCode::from(1);
    }
    let mut max_dev: f64 = 0.0;
    for (ra, rb) in a.result.w.rows().into_iter().zip(b.result.w.rows()) {
        max_dev = max_dev.max(signed_min_distance(ra, rb));
    }
    println!("max row deviation (sign-invariant): {max_dev}");
    println!("component  upsilon_a  upsilon_b  delta");
    for i in 0..a.result.upsilons.len().min(b.result.upsilons.len()) {
        let ua = a.result.upsilons[i];
        let ub = b.result.upsilons[i];
        println!("{:>9}  {ua:.6}  {ub:.6}  {:+.3e}", i + 1, ua - ub);
    }
    if b.result.total_seconds > 0.0 {
        println!(
            "speed ratio (a/b): {}",
            a.result.total_seconds / b.result.total_seconds
        );
    }
    if max_dev <= args.tol {
        println!("records match within tolerance {}", args.tol);
        ExitCode::SUCCESS
    } else {
        println!("records differ beyond tolerance {}", args.tol);
        ExitCode::from(1)
    }
}
