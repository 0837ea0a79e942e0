use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use himforge::codec::write_labels;
use himforge::postprocess::{postprocess_chain, WatershedParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{create_dir, ConnArg, instance_count, list_pngs, read_mask, stem, write_json, write_metadata};

#[derive(clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Directory of binary mask PNGs.
    #[arg(long)]
    pub masks: PathBuf,
    /// Components smaller than this many pixels are removed first.
    #[arg(long, default_value_t = 0)]
    pub min_area: usize,
    /// Minimum depth a distance minimum needs to seed its own particle.
    #[arg(long, default_value_t = 2.0)]
    pub dynamic: f64,
    /// Rescale distances to [0, 255] before flooding.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long, value_enum, default_value = "8")]
    pub connectivity: ConnArg,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

pub fn run(args: &Args, pool: &rayon::ThreadPool) -> Result<()> {
    anyhow::ensure!(args.dynamic >= 0.0, "--dynamic must be >= 0");
    let params = WatershedParams {
        dynamic: args.dynamic,
        normalized: args.normalized,
        connectivity: args.connectivity.into(),
    };
    let files = list_pngs(&args.masks)?;
    create_dir(&args.out)?;
    let counts: BTreeMap<String, usize> = pool.install(|| {
        files
            .par_iter()
            .map(|path| -> Result<(String, usize)> {
                let name = stem(path);
                let mask = read_mask(path)?;
                let labels = postprocess_chain(&mask, args.min_area, &params).with_context(|| name.clone())?;
                write_labels(args.out.join(format!("{name}.png")), &labels)?;
                Ok((name, instance_count(&labels)))
            })
            .collect::<Result<_>>()
    })?;
    write_json(&args.out.join("counts.json"), &counts)?;
    write_metadata(&args.out, "post", args)
}
