use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use himforge::analyze::{component_stats, confusion, metrics, size_histogram, ComponentStats, SizeHistogram};
use himforge::PixelScale;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{create_dir, list_pngs, read_instances, read_mask, stem, write_json, write_metadata};

#[derive(clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Label maps (16-bit) or masks (8-bit, labeled with 8-connectivity).
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub nm_per_px: f64,
    /// Histogram bin width in nanometers.
    #[arg(long, default_value_t = 5.0)]
    pub hist_bin: f64,
    /// Optional ground-truth masks with matching names, for an F1 column.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ImageStats {
    image: String,
    count: usize,
    f1: Option<f64>,
    histogram: SizeHistogram,
    components: Vec<ComponentStats>,
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn run(args: &Args, pool: &rayon::ThreadPool) -> Result<()> {
    let scale = PixelScale::new(args.nm_per_px)?;
    let files = list_pngs(&args.labels)?;
    create_dir(&args.out)?;
    let per_image: Vec<ImageStats> = pool.install(|| {
        files
            .par_iter()
            .map(|path| -> Result<ImageStats> {
                let labels = read_instances(path)?;
                let components = component_stats(&labels, scale);
                let f1 = match &args.gt {
                    Some(dir) => {
                        let gt = read_mask(&dir.join(path.file_name().expect("listed file")))?;
                        metrics(&confusion(&labels.support(), &gt)?).f1
                    }
                    None => None,
                };
                let stats = ImageStats {
                    image: stem(path),
                    count: components.len(),
                    f1,
                    histogram: size_histogram(&components, args.hist_bin)?,
                    components,
                };
                write_json(&args.out.join(format!("{}.json", stats.image)), &stats)?;
                Ok(stats)
            })
            .collect::<Result<_>>()
    })?;

    let mut csv = String::from("image,n_p,mean_sqrt_area_nm,median_sqrt_area_nm,f1\n");
    let mut all = Vec::new();
    for s in &per_image {
        let mut sizes: Vec<f64> = s.components.iter().map(|c| c.sqrt_area_nm).collect();
        sizes.sort_by(f64::total_cmp);
        let mean = (!sizes.is_empty()).then(|| sizes.iter().sum::<f64>() / sizes.len() as f64);
        let _ = writeln!(csv, "{},{},{},{},{}", s.image, s.count, fmt_opt(mean), fmt_opt(median(&sizes)), fmt_opt(s.f1));
        all.extend(s.components.iter().cloned());
    }
    fs::write(args.out.join("summary.csv"), csv)?;
    write_json(&args.out.join("histogram.json"), &size_histogram(&all, args.hist_bin)?)?;
    write_metadata(&args.out, "stats", args)
}
