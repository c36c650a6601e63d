//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{apply_stats, load_csv};
use crate::diversity::kw_of;
use crate::ensemble::ensemble_error;
use crate::error::{Error, Result};
use crate::ga::EnsembleSelection;
use crate::pool::{load_pool, save_pool};
use crate::sweep::{
    build_sweep_pool, calibrate, emit_report, export_synthetic, prepare_data, run_sweep_with,
    DataSource, SweepConfig,
};

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "ENSEMBLE_FORGE_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ensemble-forge",
    version,
    about = "Select structurally diverse MLP sub-ensembles and map diversity against voting error"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Master seed (overridden by ENSEMBLE_FORGE_SEED when set)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON sweep configuration; every field is optional
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Suppress progress messages
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classifier pool operations
    Pool {
        #[command(subcommand)]
        action: PoolAction,
    },
    /// Find the diversity values the GA can reach on a saved pool
    Calibrate {
        /// Pool file written by `pool build`
        #[arg(long, value_name = "PATH")]
        pool: PathBuf,
    },
    /// Run the full pipeline and write the report files
    Sweep,
    /// Score a saved selection by majority vote on a CSV file
    Evaluate {
        #[arg(long, value_name = "PATH")]
        pool: PathBuf,
        /// Pool indices, e.g. "0;4;9"
        #[arg(long)]
        indices: String,
        /// CSV with a header row and a label column
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        #[arg(long, default_value = "label")]
        label_column: String,
    },
    /// Write the synthetic dataset as CSV
    Synth {
        /// Output file (default: <out>/synthetic.csv)
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum PoolAction {
    /// Train the max-diversity pool and save it
    Build {
        /// Output file (default: <out>/pool.efp)
        #[arg(long, value_name = "PATH")]
        file: Option<PathBuf>,
    },
}

struct Context {
    config: SweepConfig,
    out: PathBuf,
    quiet: bool,
}

impl Context {
    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Reads [`SEED_ENV`] from the environment.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    dispatch_with_env(argv, std::env::var(SEED_ENV).ok())
}

/// [`cli_dispatch`] with an explicit value for the seed override variable.
pub fn dispatch_with_env<I, T>(argv: I, env_seed: Option<String>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let env_seed = match env_seed.map(|s| s.trim().parse::<u64>().map_err(|_| s)) {
        None => None,
        Some(Ok(seed)) => Some(seed),
        Some(Err(raw)) => {
            eprintln!("error: {SEED_ENV}={raw:?} is not an unsigned integer");
            return EXIT_USAGE;
        }
    };
    match run(cli, env_seed) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn run(cli: Cli, env_seed: Option<u64>) -> Result<()> {
    let mut config = match &cli.global.config {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig::default(),
    };
    if let Some(seed) = env_seed.or(cli.global.seed) {
        config.seed = seed;
    }
    let out = cli
        .global
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context {
        config,
        out,
        quiet: cli.global.quiet,
    };

    match cli.command {
        Command::Pool {
            action: PoolAction::Build { file },
        } => pool_build(&ctx, file),
        Command::Calibrate { pool } => calibrate_cmd(&ctx, &pool),
        Command::Sweep => sweep_cmd(&ctx),
        Command::Evaluate {
            pool,
            indices,
            data,
            label_column,
        } => evaluate_cmd(&ctx, &pool, &indices, &data, &label_column),
        Command::Synth { output } => synth_cmd(&ctx, output),
    }
}

fn create_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn pool_build(ctx: &Context, file: Option<PathBuf>) -> Result<()> {
    ctx.config.validate()?;
    let bundle = prepare_data(&ctx.config)?;
    let pool = build_sweep_pool(&ctx.config, &bundle)?;
    let path = match file {
        Some(p) => p,
        None => {
            create_out(&ctx.out)?;
            ctx.out.join("pool.efp")
        }
    };
    save_pool(&pool, &path)?;
    ctx.note(&format!(
        "pool of {} classifiers (kw {:.6}, {} rejected) written to {}",
        pool.len(),
        pool.pool_kw.value(),
        pool.rejections,
        path.display()
    ));
    Ok(())
}

fn calibrate_cmd(ctx: &Context, pool_path: &Path) -> Result<()> {
    ctx.config.validate()?;
    let pool = load_pool(pool_path)?;
    let targets = calibrate(&ctx.config, &pool)?;
    let mut csv = String::from("probe_kw,achieved_kw,indices\n");
    for t in &targets {
        let _ = writeln!(csv, "{},{},{}", t.probe, t.kw, t.selection.to_field());
    }
    create_out(&ctx.out)?;
    let path = ctx.out.join("calibration.csv");
    std::fs::write(&path, &csv).map_err(|e| Error::io(&path, e))?;
    if !ctx.quiet {
        print!("{csv}");
    }
    Ok(())
}

fn sweep_cmd(ctx: &Context) -> Result<()> {
    let report = run_sweep_with(&ctx.config, |m| ctx.note(m))?;
    let written = emit_report(&report, &ctx.out)?;
    for path in written {
        ctx.note(&format!("wrote {}", path.display()));
    }
    Ok(())
}

fn evaluate_cmd(ctx: &Context, pool_path: &Path, indices: &str, data: &Path, label: &str) -> Result<()> {
    let pool = load_pool(pool_path)?;
    let selection = EnsembleSelection::parse(indices, pool.len())?;
    let raw = load_csv(data, label)?;
    let split = match &pool.stats {
        Some(stats) => apply_stats(&raw, stats)?.0,
        None => raw,
    };
    let error = ensemble_error(&selection, &pool, &split)?;
    let descriptors: Vec<_> = selection
        .indices()
        .iter()
        .map(|&i| pool.classifiers[i].descriptor)
        .collect();
    let kw = kw_of(&descriptors).value();
    if !ctx.quiet {
        println!("achieved_kw,error,samples");
    }
    println!("{kw},{error},{}", split.len());
    Ok(())
}

fn synth_cmd(ctx: &Context, output: Option<PathBuf>) -> Result<()> {
    let config = match &ctx.config.data {
        DataSource::Synthetic { .. } => ctx.config.clone(),
        DataSource::Csv { .. } => SweepConfig {
            data: DataSource::default(),
            ..ctx.config.clone()
        },
    };
    let path = match output {
        Some(p) => p,
        None => {
            create_out(&ctx.out)?;
            ctx.out.join("synthetic.csv")
        }
    };
    let n = export_synthetic(&config, &path)?;
    ctx.note(&format!("wrote {n} samples to {}", path.display()));
    Ok(())
}
