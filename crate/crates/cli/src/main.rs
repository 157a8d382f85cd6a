use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use condlab::bounds::BoundName;
use condlab::ensembles::{Distribution, MatrixKind};
use condlab::experiments::config::parse_sizes;
use condlab::experiments::contrast::{run_contrast, CONTRAST_NOTES, RANDOM_ENSEMBLE};
use condlab::experiments::emit::{render, OutputMeta, OutputRow};
use condlab::experiments::{
    run_bound_check, run_table_kappa, run_table_norms, ExperimentConfig, ExperimentKind, Grid,
    NormChoice, OutputFormat,
};
use condlab::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_VIOLATED: u8 = 2;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "condlab", version, about = "Conditioning experiments on random structured matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 1- and 2-norms of random matrices and their inverses.
    TableNorms(Common),
    /// Condition numbers of random matrices.
    TableKappa {
        #[command(flatten)]
        common: Common,
        /// 1 or 2; defaults to 2 for general/circulant and 1 for Toeplitz-like.
        #[arg(long)]
        norm: Option<NormChoice>,
    },
    /// Empirical cdfs against a probabilistic bound.
    BoundCheck {
        #[command(flatten)]
        common: Common,
        /// sv_general, norm_general, kappa_general, toeplitz_norm, inner_product,
        /// circulant_norm, circulant_inv or toeplitz_inv_factors.
        #[arg(long)]
        bound: BoundName,
        /// y0:y1:steps; defaults to a 20-point grid per size.
        #[arg(long)]
        grid: Option<Grid>,
    },
    /// Deterministic ill-conditioned Toeplitz families next to random ones.
    Contrast(Common),
}

#[derive(Args)]
struct Common {
    /// Comma-separated kinds: general, toeplitz, hankel, circulant, fcirculant:<f>.
    #[arg(long, value_delimiter = ',')]
    ensemble: Vec<MatrixKind>,
    /// Comma-separated, strictly increasing.
    #[arg(long)]
    sizes: Option<String>,
    /// Defaults to 100, or 10000 for bound-check.
    #[arg(long)]
    trials: Option<usize>,
    /// gaussian:mu,sigma or uniform:lo,hi.
    #[arg(long)]
    dist: Option<Distribution>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Worker threads; output does not depend on it.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn default_sizes(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::BoundCheck => "32",
        ExperimentKind::Contrast => "4,8,16,32",
        _ => "32,64,128,256,512,1024",
    }
}

fn config(kind: ExperimentKind, c: &Common, default_ensembles: &[MatrixKind]) -> anyhow::Result<ExperimentConfig> {
    let sizes = parse_sizes(c.sizes.as_deref().unwrap_or(default_sizes(kind)))?;
    let ensembles = if c.ensemble.is_empty() { default_ensembles.to_vec() } else { c.ensemble.clone() };
    let mut cfg = ExperimentConfig::new(kind, ensembles, sizes).seed(c.seed).jobs(c.jobs);
    if let Some(t) = c.trials {
        cfg = cfg.trials(t);
    }
    if let Some(d) = c.dist {
        cfg = cfg.dist(d);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_out<R: OutputRow>(c: &Common, meta: &OutputMeta, rows: &[R]) -> anyhow::Result<()> {
    match &c.out {
        Some(path) => condlab::experiments::emit(meta, rows, c.format, path)?,
        None => {
            let text = render(meta, rows, c.format)?;
            std::io::stdout().lock().write_all(text.as_bytes()).context("writing to stdout")?;
        }
    }
    Ok(())
}

/// Returns the number of violated verdicts.
fn run(command: Command) -> anyhow::Result<usize> {
    let tables = [MatrixKind::General, MatrixKind::Toeplitz, MatrixKind::Circulant];
    match command {
        Command::TableNorms(c) => {
            let cfg = config(ExperimentKind::TableNorms, &c, &tables)?;
            let r = run_table_norms(&cfg)?;
            let meta = OutputMeta::new(cfg.experiment.as_str(), cfg.seed, cfg.trials, &cfg.dist.to_string(), r.resampled)
                .note(format!("unconverged power iterations: {}", r.unconverged));
            write_out(&c, &meta, &r.rows)?;
            Ok(0)
        }
        Command::TableKappa { common: c, norm } => {
            let cfg = config(ExperimentKind::TableKappa, &c, &tables)?.norm(norm);
            let r = run_table_kappa(&cfg)?;
            let meta = OutputMeta::new(cfg.experiment.as_str(), cfg.seed, cfg.trials, &cfg.dist.to_string(), r.resampled)
                .note("kappa_1 is a lower estimate of the inverse 1-norm; kappa_1_exact uses all inverse entries");
            write_out(&c, &meta, &r.rows)?;
            Ok(0)
        }
        Command::BoundCheck { common: c, bound, grid } => {
            let cfg = config(ExperimentKind::BoundCheck, &c, &[])?;
            let r = run_bound_check(&cfg, bound, grid.as_ref())?;
            let points = r.rows.len();
            let meta = OutputMeta::new(cfg.experiment.as_str(), cfg.seed, cfg.trials, &cfg.dist.to_string(), r.resampled)
                .note(format!("bound: {bound}, direction: {}", bound.direction()))
                .note(format!(
                    "violated: broken by more than 3 binomial SE at a grid point; {points} points tested, \
                     Bonferroni level for the whole grid is {points} times the per-point level"
                ));
            write_out(&c, &meta, &r.rows)?;
            let v = r.violations();
            if v > 0 {
                eprintln!("{bound}: {v} of {points} grid points violated");
            }
            Ok(v)
        }
        Command::Contrast(c) => {
            let cfg = config(ExperimentKind::Contrast, &c, &[MatrixKind::Toeplitz])?;
            if cfg.ensembles != [MatrixKind::Toeplitz] {
                return Err(Error::Usage(format!("contrast compares against {RANDOM_ENSEMBLE} only")).into());
            }
            let rows = run_contrast(&cfg)?;
            let meta = OutputMeta::new(cfg.experiment.as_str(), cfg.seed, cfg.trials, &cfg.dist.to_string(), 0)
                .note(CONTRAST_NOTES);
            write_out(&c, &meta, &rows)?;
            Ok(0)
        }
    }
}

fn is_usage(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::Usage(_) | Error::Unsupported(_) | Error::Domain(_) | Error::DimensionMismatch { .. })
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(EXIT_VIOLATED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { EXIT_USAGE } else { EXIT_FAILURE })
        }
    }
}
