use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use plab::dsl::{parse_spec_bytes, ExperimentSpec};
use plab::lab::ColengthCache;
use plab::runner::{build_model, run_experiment, OutputFormat, RunOptions};
use plab::store::DiskCache;

const DEFAULT_CACHE_DIR: &str = ".plab-cache";

#[derive(Parser)]
#[command(name = "plab", version, about = "Run p-family volume and multiplicity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a spec and build its ring, ideals and families without running anything.
    Check {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run every experiment in a spec.
    Run {
        #[arg(long)]
        spec: PathBuf,
        /// Report directory; without it only the verdicts are printed.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Worker threads (0 picks one per core).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Seed for experiments that do not set their own.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = DEFAULT_CACHE_DIR)]
        cache_dir: PathBuf,
        #[arg(long)]
        no_cache: bool,
    },
    /// Delete the colength cache.
    CleanCache {
        #[arg(long, default_value = DEFAULT_CACHE_DIR)]
        cache_dir: PathBuf,
    },
}

fn load(path: &Path) -> Result<ExperimentSpec> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    match parse_spec_bytes(&bytes) {
        Ok(spec) => Ok(spec),
        Err(d) => bail!("{}:{d}", path.display()),
    }
}

fn check(spec_path: &Path) -> Result<()> {
    let spec = load(spec_path)?;
    let model = build_model(&spec)?;
    println!(
        "{}: ok ({} ideals, {} families, {} experiments)",
        spec_path.display(),
        model.ideals.len(),
        model.families.len(),
        spec.experiments().count()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    spec_path: &Path,
    out: Option<PathBuf>,
    format: Format,
    threads: usize,
    seed: Option<u64>,
    cache_dir: PathBuf,
    no_cache: bool,
) -> Result<()> {
    let spec = load(spec_path)?;
    let cache: Option<Arc<dyn ColengthCache>> = if no_cache {
        None
    } else {
        let c = DiskCache::open(&cache_dir).with_context(|| format!("opening cache {}", cache_dir.display()))?;
        Some(Arc::new(c))
    };
    let opts = RunOptions {
        out_dir: out.clone(),
        format: match format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
        seed,
        cache,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("starting the worker pool")?;
    let outcomes = pool.install(|| run_experiment(&spec, &opts))?;
    for o in &outcomes {
        println!("{:<32} {:?}", o.name, o.verdict);
    }
    if let Some(dir) = out {
        println!("reports written to {}", dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { spec } => check(&spec),
        Command::Run {
            spec,
            out,
            format,
            threads,
            seed,
            cache_dir,
            no_cache,
        } => run(&spec, out, format, threads, seed, cache_dir, no_cache),
        Command::CleanCache { cache_dir } => DiskCache::clear(&cache_dir)
            .map(|()| println!("removed {}", cache_dir.display()))
            .map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
