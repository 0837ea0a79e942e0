use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ArgGroup;
use himforge::codec::{read_image, write_mask};
use himforge::segment::{baseline_segment, threshold_probability, BaselineParams, DEFAULT_THRESHOLD};
use himforge::{BinaryMask, Error, GrayImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{create_dir, list_pngs, stem, write_metadata};
use crate::manifest;

#[derive(clap::Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("source").required(true).args(["baseline", "probmaps"])))]
pub struct Args {
    /// Segment raw images with the classical baseline (needs --images).
    #[arg(long, requires = "images")]
    pub baseline: bool,
    /// Image directory, or a synth output directory with a manifest.
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// Directory of 16-bit probability-map PNGs.
    #[arg(long)]
    pub probmaps: Option<PathBuf>,
    /// Pixels strictly above this probability are particles.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// JSON file with baseline parameters; defaults apply to missing fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

fn inputs(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.join(manifest::MANIFEST_FILE).is_file() {
        let (_, entries) = manifest::read(dir)?;
        return Ok(entries.iter().map(|e| dir.join(&e.image)).collect());
    }
    list_pngs(dir)
}

fn baseline_map(img: &GrayImage, params: &BaselineParams, name: &str) -> Result<GrayImage> {
    match baseline_segment(img, params) {
        Ok(map) => Ok(map),
        Err(Error::DegenerateHistogram) => {
            eprintln!("warning: {name}: degenerate histogram, writing an empty mask");
            Ok(GrayImage::filled(img.width(), img.height(), 0.0))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run(args: &Args, pool: &rayon::ThreadPool) -> Result<()> {
    let params: BaselineParams = match &args.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?).context("parsing baseline config")?,
        None => BaselineParams::default(),
    };
    // Validate the threshold before touching any file.
    threshold_probability(&GrayImage::filled(1, 1, 0.0), args.threshold)?;
    let files = match (&args.probmaps, &args.images) {
        (Some(dir), _) => list_pngs(dir)?,
        (None, Some(dir)) => inputs(dir)?,
        (None, None) => anyhow::bail!("either --baseline --images DIR or --probmaps DIR is required"),
    };
    create_dir(&args.out)?;
    pool.install(|| {
        files.par_iter().try_for_each(|path| -> Result<()> {
            let name = stem(path);
            let img = read_image(path).with_context(|| format!("reading {}", path.display()))?;
            let prob = if args.probmaps.is_some() { img } else { baseline_map(&img, &params, &name)? };
            let mask: BinaryMask = threshold_probability(&prob, args.threshold)?;
            write_mask(args.out.join(format!("{name}.png")), &mask)?;
            Ok(())
        })
    })?;
    #[derive(Serialize)]
    struct Recorded<'a> {
        #[serde(flatten)]
        args: &'a Args,
        resolved_baseline: Option<&'a BaselineParams>,
    }
    write_metadata(
        &args.out,
        "segment",
        &Recorded {
            args,
            resolved_baseline: args.baseline.then_some(&params),
        },
    )
}
