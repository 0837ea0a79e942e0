use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use himforge::analyze::{emit_gallery, GalleryEntry, MetricsReport};
use himforge::codec::read_image;
use serde::{Deserialize, Serialize};

use crate::io::{pair_by_name, read_instances, write_metadata};

#[derive(clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Grayscale images.
    #[arg(long)]
    pub images: PathBuf,
    /// Label maps or masks with the same file names.
    #[arg(long)]
    pub labels: PathBuf,
    /// Optional report written by `eval`, for the metrics columns.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Deserialize)]
struct ReportImage {
    name: String,
    metrics: MetricsReport,
}

#[derive(Deserialize)]
struct Report {
    images: Vec<ReportImage>,
}

pub fn run(args: &Args, _pool: &rayon::ThreadPool) -> Result<()> {
    let metrics: BTreeMap<String, MetricsReport> = match &args.report {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let report: Report = serde_json::from_str(&text).context("parsing eval report")?;
            report.images.into_iter().map(|r| (r.name, r.metrics)).collect()
        }
        None => BTreeMap::new(),
    };
    let entries = pair_by_name(&args.images, &args.labels)?
        .into_iter()
        .map(|(name, image, labels)| {
            Ok(GalleryEntry {
                metrics: metrics.get(&name).copied(),
                image: read_image(&image)?,
                labels: read_instances(&labels)?,
                name,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit_gallery(&entries, &args.out)?;
    write_metadata(&args.out, "gallery", args)
}
