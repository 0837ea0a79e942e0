//! `himforge` command-line front end.

mod commands;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{compare, eval, gallery, post, segment, stats, synth};

#[derive(Parser)]
#[command(name = "himforge", version, about = "Synthetic nanoparticle micrographs and segmentation metrology")]
struct Cli {
    /// Worker threads for per-image parallelism; outputs do not depend on it.
    #[arg(long, global = true, env = "HIMFORGE_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic image/label dataset with a manifest.
    Synth(synth::Args),
    /// Turn images (baseline) or probability maps into binary masks.
    Segment(segment::Args),
    /// Area opening and distance-transform watershed on masks.
    Post(post::Args),
    /// Pixel metrics and particle counts against ground truth.
    Eval(eval::Args),
    /// Per-particle statistics and size histograms.
    Stats(stats::Args),
    /// Patch features, PCA and t-SNE over two image sets.
    Compare(compare::Args),
    /// Static HTML contact sheet with overlays and metrics.
    Gallery(gallery::Args),
    /// Re-run the command recorded in an output directory's metadata.json.
    Replay {
        #[arg(long)]
        metadata: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn replay(metadata: &PathBuf, out: PathBuf, pool: &rayon::ThreadPool) -> Result<()> {
    let text = std::fs::read_to_string(metadata).with_context(|| format!("reading {}", metadata.display()))?;
    let meta: io::Metadata = serde_json::from_str(&text).context("parsing metadata")?;
    let params = meta.parameters;
    macro_rules! rerun {
        ($module:ident) => {{
            let mut args: $module::Args = serde_json::from_value(params).context("metadata parameters")?;
            args.out = out;
            $module::run(&args, pool)
        }};
    }
    match meta.command.as_str() {
        "synth" => rerun!(synth),
        "segment" => rerun!(segment),
        "post" => rerun!(post),
        "eval" => rerun!(eval),
        "stats" => rerun!(stats),
        "compare" => rerun!(compare),
        "gallery" => rerun!(gallery),
        other => anyhow::bail!("unknown command {other:?} in metadata"),
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        anyhow::ensure!(n >= 1, "--workers must be at least 1");
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building worker pool")?;
    match cli.command {
        Command::Synth(a) => synth::run(&a, &pool),
        Command::Segment(a) => segment::run(&a, &pool),
        Command::Post(a) => post::run(&a, &pool),
        Command::Eval(a) => eval::run(&a, &pool),
        Command::Stats(a) => stats::run(&a, &pool),
        Command::Compare(a) => compare::run(&a, &pool),
        Command::Gallery(a) => gallery::run(&a, &pool),
        Command::Replay { metadata, out } => replay(&metadata, out, &pool),
    }
}

fn main() -> ExitCode {
    // Usage errors exit with status 2 inside `parse`.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
