use std::path::PathBuf;

use anyhow::{Context, Result};
use himforge::analyze::{confusion, metrics, ConfusionCounts, MetricsReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{create_dir, instance_count, pair_by_name, read_instances, write_json};

#[derive(clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Predicted masks or label maps.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground truth with the same file names: 16-bit instance maps, or 8-bit masks labeled with 8-connectivity.
    #[arg(long)]
    pub gt: PathBuf,
    /// Ground-truth particles smaller than this many pixels are not counted.
    #[arg(long, default_value_t = 0)]
    pub gt_min_area: usize,
    /// Output JSON report; it doubles as the run's metadata.
    #[arg(long = "report")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ImageReport {
    name: String,
    metrics: MetricsReport,
    good: bool,
    pred_count: usize,
    gt_count: usize,
    /// |pred - gt| / gt; absent when the ground truth has no particle.
    count_relative_error: Option<f64>,
}

#[derive(Serialize)]
struct Aggregate {
    images: usize,
    /// Metrics of the summed confusion counts.
    pooled: MetricsReport,
    /// Mean over images with a defined F1.
    mean_f1: Option<f64>,
    good_fraction: f64,
    mean_count_relative_error: Option<f64>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'static str,
    version: &'static str,
    parameters: &'a Args,
    images: Vec<ImageReport>,
    aggregate: Aggregate,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn run(args: &Args, pool: &rayon::ThreadPool) -> Result<()> {
    let pairs = pair_by_name(&args.pred, &args.gt)?;
    let images: Vec<ImageReport> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(name, pred_path, gt_path)| -> Result<ImageReport> {
                let pred = read_instances(pred_path)?;
                let gt = read_instances(gt_path)?;
                let c = confusion(&pred.support(), &gt.support()).with_context(|| name.clone())?;
                let m = metrics(&c);
                let min_area = args.gt_min_area.max(1);
                let gt_count = gt.areas().iter().skip(1).filter(|&&a| a >= min_area).count();
                let pred_count = instance_count(&pred);
                Ok(ImageReport {
                    name: name.clone(),
                    good: m.is_good(),
                    metrics: m,
                    pred_count,
                    gt_count,
                    count_relative_error: (gt_count > 0)
                        .then(|| (pred_count as f64 - gt_count as f64).abs() / gt_count as f64),
                })
            })
            .collect::<Result<_>>()
    })?;
    let pooled = images.iter().fold(ConfusionCounts::default(), |acc, r| acc + r.metrics.counts);
    let aggregate = Aggregate {
        images: images.len(),
        pooled: metrics(&pooled),
        mean_f1: mean(images.iter().filter_map(|r| r.metrics.f1)),
        good_fraction: images.iter().filter(|r| r.good).count() as f64 / images.len() as f64,
        mean_count_relative_error: mean(images.iter().filter_map(|r| r.count_relative_error)),
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_json(
        &args.out,
        &Report {
            command: "eval",
            version: env!("CARGO_PKG_VERSION"),
            parameters: args,
            images,
            aggregate,
        },
    )
}
