use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use himforge::analyze::{extract_patches, patch_features, pca, tsne, PatchMode, TsneParams};
use himforge::codec::read_image;
use himforge::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{create_dir, list_pngs, stem, write_json, write_metadata};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    Sequential,
    Random,
}

#[derive(clap::Args, Serialize, Deserialize)]
pub struct Args {
    #[arg(long)]
    pub set_a: PathBuf,
    #[arg(long)]
    pub set_b: PathBuf,
    #[arg(long, default_value = "real")]
    pub name_a: String,
    #[arg(long, default_value = "synthetic")]
    pub name_b: String,
    #[arg(long, value_enum, default_value_t = Sampling::Sequential)]
    pub sampling_a: Sampling,
    #[arg(long, value_enum, default_value_t = Sampling::Random)]
    pub sampling_b: Sampling,
    /// Patches drawn per image in random sampling.
    #[arg(long, default_value_t = 10)]
    pub per_image: usize,
    #[arg(long, default_value_t = 144)]
    pub patch: usize,
    #[arg(long, default_value_t = 0.9)]
    pub variance: f64,
    #[arg(long, default_value_t = 30.0)]
    pub perplexity: f64,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

const FEATURES: &str = "hand-crafted features";

fn features(dir: &Path, set: &str, sampling: Sampling, args: &Args) -> Result<Vec<Vec<f64>>> {
    let files = list_pngs(dir)?;
    let root = Rng::new(args.seed).fork("patches").fork(set);
    let per_file: Vec<Vec<Vec<f64>>> = files
        .par_iter()
        .map(|path| -> Result<Vec<Vec<f64>>> {
            let img = read_image(path).with_context(|| format!("reading {}", path.display()))?;
            let mode = match sampling {
                Sampling::Sequential => PatchMode::Sequential,
                Sampling::Random => PatchMode::Random { count: args.per_image },
            };
            let patches = extract_patches(&img, args.patch, mode, &mut root.fork(&stem(path)))?;
            patches.iter().map(|p| Ok(patch_features(p)?)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_file.into_iter().flatten().collect())
}

#[derive(Serialize)]
struct Summary {
    feature_extractor: &'static str,
    patches_a: usize,
    patches_b: usize,
    pca_components: usize,
    retained_variance: f64,
    tsne_initial_kl: f64,
    tsne_final_kl: f64,
}

pub fn run(args: &Args, pool: &rayon::ThreadPool) -> Result<()> {
    let (a, b) = pool.install(|| -> Result<_> {
        Ok((
            features(&args.set_a, "a", args.sampling_a, args)?,
            features(&args.set_b, "b", args.sampling_b, args)?,
        ))
    })?;
    let all: Vec<Vec<f64>> = a.iter().chain(&b).cloned().collect();
    let (model, projected) = pca(&all, args.variance)?;
    let params = TsneParams {
        perplexity: args.perplexity,
        iterations: args.iterations,
        ..TsneParams::default()
    };
    let embedding = tsne(&projected, &params, &mut Rng::new(args.seed).fork("tsne"))?;

    create_dir(&args.out)?;
    let mut csv = String::from("source,kind,x,y\n");
    for (i, p) in embedding.positions.iter().enumerate() {
        let source = if i < a.len() { &args.name_a } else { &args.name_b };
        let _ = writeln!(csv, "{source},patch,{},{}", p[0], p[1]);
    }
    fs::write(args.out.join("embedding.csv"), csv)?;
    write_json(
        &args.out.join("summary.json"),
        &Summary {
            feature_extractor: FEATURES,
            patches_a: a.len(),
            patches_b: b.len(),
            pca_components: model.components(),
            retained_variance: model.retained_variance,
            tsne_initial_kl: embedding.initial_kl,
            tsne_final_kl: embedding.final_kl,
        },
    )?;
    write_metadata(&args.out, "compare", args)
}
