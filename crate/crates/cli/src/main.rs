use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use chunkforge::bench::{run_suite, write_csv, write_plot_files, BenchCase, BenchConfig};
use chunkforge::cwa::{cwa_density, full_density, BandwidthRule};
use chunkforge::datagen::{GenKind, GenSpec};
use chunkforge::estimators::{lookup, EstimatorOptions};
use chunkforge::executor::{hardware_threads, ExecPolicy};
use chunkforge::io::{read_matrix_file, write_densities, write_matrix};
use chunkforge::{full_estimate, make_chunk_plan, relative_l1_diff, verify};

/// Chunk-averaged parallel estimation.
#[derive(Parser)]
#[command(name = "chunkforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV.
    Gen(GenArgs),
    /// Run the full and/or chunk-averaged estimator on a CSV file.
    Estimate(EstimateArgs),
    /// Time full against chunk-averaged estimation.
    Bench(BenchArgs),
    /// Run the built-in self-checks.
    Verify,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    kind: GenKind,
    #[arg(long)]
    n: usize,
    /// Number of predictors (regression only).
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Fe,
    Ca,
    Both,
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV input, one observation per row. Regression estimators take the
    /// last column as the response.
    #[arg(long)]
    data: PathBuf,
    /// mean, ols, quantreg, kendall-naive, kendall-knight, kde or cwa-kde.
    #[arg(long)]
    estimator: String,
    #[arg(long)]
    chunks: Option<usize>,
    /// Worker threads [default: hardware threads]
    #[arg(long, env = "CHUNKFORGE_WORKERS")]
    workers: Option<usize>,
    /// Run chunks one after another on the calling thread.
    #[arg(long, conflicts_with = "workers")]
    serial: bool,
    /// Quantile for quantreg.
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    /// Fixed kernel bandwidth for kde and cwa-kde.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// cwa-kde: one Silverman bandwidth from the whole sample.
    #[arg(long, conflicts_with = "bandwidth")]
    global_bandwidth: bool,
    /// Evaluation points for kde.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    points: Vec<f64>,
    #[arg(long)]
    no_intercept: bool,
    /// [default: both; ca for cwa-kde]
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// The first input row is a header.
    #[arg(long)]
    header: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML file of [[case]] tables.
    #[arg(long, conflicts_with_all = ["estimator", "kind", "n"])]
    config: Option<PathBuf>,
    #[arg(long, requires_all = ["kind", "n"])]
    estimator: Option<String>,
    #[arg(long)]
    kind: Option<GenKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    p: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Chunk counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    chunks: Vec<usize>,
    /// Worker counts, comma separated. Every (chunks, workers) pair is run.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    workers: Vec<usize>,
    /// Use r = workers for each worker count instead of the cross product.
    #[arg(long)]
    sweep: bool,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long)]
    bandwidth: Option<f64>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-estimator (workers, speedup) data files.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let p = match (args.kind, args.p) {
        (GenKind::Regression, None) => Cli::command()
            .error(ErrorKind::MissingRequiredArgument, "--kind regression requires --p")
            .exit(),
        (_, p) => p.unwrap_or(0),
    };
    let spec = GenSpec {
        kind: args.kind,
        n: args.n,
        p,
        seed: args.seed,
    };
    let data = spec.generate()?;
    let mut out = output(args.out.as_deref())?;
    write_matrix(&mut out, Some(&spec.metadata_line()), &data)?;
    out.flush()?;
    Ok(())
}

fn policy_for(args: &EstimateArgs) -> Result<ExecPolicy> {
    if args.serial {
        return Ok(ExecPolicy::serial());
    }
    Ok(ExecPolicy::parallel(args.workers.unwrap_or_else(hardware_threads))?)
}

fn chunks_for(args: &EstimateArgs) -> Result<usize> {
    args.chunks.context("--chunks is required unless --mode fe")
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let data = read_matrix_file(&args.data, args.header)?;
    if args.estimator == "cwa-kde" {
        return cmd_cwa(&args, data.view().column(0), data.cols());
    }
    let opts = EstimatorOptions {
        quantile: args.q,
        intercept: !args.no_intercept,
        bandwidth: args.bandwidth,
        kde_points: args.points.clone(),
    };
    let est = lookup(&args.estimator, &opts)?;
    let mode = args.mode.unwrap_or(Mode::Both);

    let mut report = Map::new();
    report.insert("estimator".into(), json!(args.estimator));
    let fe = if mode != Mode::Ca {
        let fe = full_estimate(data.view(), est.as_ref())?;
        report.insert("fe".into(), serde_json::to_value(&fe)?);
        Some(fe)
    } else {
        None
    };
    if mode != Mode::Fe {
        let plan = make_chunk_plan(data.rows(), chunks_for(&args)?)?;
        let policy = policy_for(&args)?;
        let ca = chunkforge::ca_estimate_timed(data.view(), est.as_ref(), &plan, &policy)?.result;
        if let Some(fe) = &fe {
            report.insert("rel_l1".into(), json!(relative_l1_diff(&ca.theta_bar, &fe.theta_hat)?));
        }
        report.insert("ca".into(), serde_json::to_value(&ca)?);
    }

    let mut out = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &Value::Object(report))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_cwa(args: &EstimateArgs, sample: Vec<f64>, cols: usize) -> Result<()> {
    if cols != 1 {
        bail!("cwa-kde needs exactly one column, got {cols}");
    }
    let densities = match args.mode.unwrap_or(Mode::Ca) {
        Mode::Fe => full_density(&sample)?,
        Mode::Ca => {
            let plan = make_chunk_plan(sample.len(), chunks_for(args)?)?;
            let rule = match (args.bandwidth, args.global_bandwidth) {
                (Some(h), _) => BandwidthRule::Fixed(h),
                (None, true) => BandwidthRule::Global,
                (None, false) => BandwidthRule::PerChunk,
            };
            cwa_density(&sample, &plan, rule, &policy_for(args)?)?
        }
        Mode::Both => bail!("cwa-kde writes one density column; use --mode fe or --mode ca"),
    };
    let mut out = output(args.out.as_deref())?;
    write_densities(&mut out, &sample, &densities)?;
    out.flush()?;
    Ok(())
}

fn inline_cases(args: &BenchArgs) -> Vec<BenchCase> {
    let (Some(estimator), Some(kind), Some(n)) = (&args.estimator, args.kind, args.n) else {
        return Vec::new();
    };
    let pairs: Vec<(usize, usize)> = if args.sweep {
        args.workers.iter().map(|&w| (w, w)).collect()
    } else {
        args.chunks
            .iter()
            .flat_map(|&r| args.workers.iter().map(move |&w| (r, w)))
            .collect()
    };
    pairs
        .into_iter()
        .map(|(chunks, workers)| BenchCase {
            estimator: estimator.clone(),
            kind,
            n,
            p: args.p,
            seed: args.seed,
            chunks,
            workers,
            reps: args.reps,
            q: args.q,
            bandwidth: args.bandwidth,
        })
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<bool> {
    let config = match &args.config {
        Some(path) => BenchConfig::load(path)?,
        None if args.estimator.is_some() => BenchConfig {
            cases: inline_cases(&args),
        },
        None => bail!("bench needs --config or --estimator/--kind/--n"),
    };
    let records = run_suite(&config);
    for rec in &records {
        match &rec.error {
            Some(e) => eprintln!("{} n={} r={} workers={}: error: {e}", rec.estimator, rec.n, rec.r, rec.workers),
            None => eprintln!(
                "{} n={} r={} workers={}: speedup {:.3}, rel_l1 {:.2e}",
                rec.estimator, rec.n, rec.r, rec.workers, rec.speedup, rec.rel_l1
            ),
        }
    }
    let mut out = output(args.out.as_deref())?;
    write_csv(&records, &mut out)?;
    out.flush()?;
    if let Some(dir) = &args.plot_dir {
        for path in write_plot_files(&records, dir)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(records.iter().all(|r| r.error.is_none()))
}

fn cmd_verify() -> bool {
    let checks = verify::run_all();
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag}  {} ({}, {:.2}s)", c.name, c.detail, c.elapsed.as_secs_f64());
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    failed == 0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a).map(|_| true),
        Command::Estimate(a) => cmd_estimate(a).map(|_| true),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify => Ok(cmd_verify()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
