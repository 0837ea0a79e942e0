use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use himforge::codec::{write_image, write_labels, write_mask, Depth};
use himforge::pipeline::{degrade, resize_labels_nearest, resize_mask_nearest};
use himforge::render::render_pair;
use himforge::scene::{build_scene, canonical_json, Recipe};
use himforge::{LabelMap, Rng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::{create_dir, write_metadata};
use crate::manifest::{self, Degradation, Entry, Header, RecipeRef, MANIFEST_VERSION};

/// Pixel size of the reference micrographs, 1 / 1.0309 nm.
pub const DEFAULT_NM_PER_PX: f64 = 1.0 / 1.0309;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirtMode {
    /// Per-scene coin flip with the recipe's dirt probability.
    Recipe,
    /// Dirt on even indices only.
    Alternate,
    Always,
    Never,
}

#[derive(clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Built-in recipe name (sio2, tio2, ag) or path to a recipe JSON file.
    #[arg(long, default_value = "sio2")]
    pub recipe: String,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    /// Side of the degraded output images in pixels.
    #[arg(long, default_value_t = 2031)]
    pub target: usize,
    /// Standard deviation of the additive Gaussian noise.
    #[arg(long, default_value_t = 0.03)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = DirtMode::Recipe)]
    pub dirt: DirtMode,
    /// Pixel size of the output images, recorded in the manifest.
    #[arg(long, default_value_t = DEFAULT_NM_PER_PX)]
    pub nm_per_px: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn load_recipe(spec: &str) -> Result<Recipe> {
    let path = Path::new(spec);
    let recipe = if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        serde_json::from_str(&text).with_context(|| format!("parsing recipe {spec}"))?
    } else {
        Recipe::builtin(spec).with_context(|| format!("{spec:?} is neither a recipe file nor a built-in recipe"))?
    };
    recipe.validate()?;
    Ok(recipe)
}

fn synth_one(args: &Args, recipe: &Recipe, index: usize) -> Result<Entry> {
    let label = format!("scene/{index}");
    let rng = Rng::new(args.seed).fork(&label);
    let mut scene = build_scene(recipe, &rng)?;
    match args.dirt {
        DirtMode::Recipe => {}
        DirtMode::Alternate => scene.dirt.enabled = index.is_multiple_of(2),
        DirtMode::Always => scene.dirt.enabled = true,
        DirtMode::Never => scene.dirt.enabled = false,
    }
    let rendered = render_pair(&scene)?;
    let image = degrade(&rendered.beauty, args.target, args.sigma, &mut rng.fork("degrade"))?;
    let mask = resize_mask_nearest(&rendered.label_mask, args.target, args.target)?;
    let ids = resize_labels_nearest(&rendered.id_map, args.target, args.target)?;
    // Instance ids restricted to the eroded mask, so both ground truths share one support.
    let masked: Vec<u32> = ids.ids().iter().zip(mask.bits()).map(|(&id, &on)| if on { id } else { 0 }).collect();
    let instances = LabelMap::with_count(args.target, args.target, masked, ids.count())?;

    let name = format!("{index:06}");
    let entry = Entry {
        index,
        image: format!("images/{name}.png"),
        label: format!("labels/{name}.png"),
        ids: format!("instances/{name}.png"),
        scene: format!("scenes/{name}.json"),
        lineage: scene.lineage.clone(),
        degradation: Degradation {
            source_resolution: scene.camera.resolution,
            target: args.target,
            sigma: args.sigma,
        },
        dirt: scene.dirt.enabled,
        instances: scene.instances.len(),
    };
    write_image(args.out.join(&entry.image), &image, Depth::Sixteen)?;
    write_mask(args.out.join(&entry.label), &mask)?;
    write_labels(args.out.join(&entry.ids), &instances)?;
    fs::write(args.out.join(&entry.scene), scene.canonical_json()? + "\n")?;
    Ok(entry)
}

pub fn run(args: &Args, pool: &rayon::ThreadPool) -> Result<()> {
    anyhow::ensure!(args.target >= 1, "--target must be at least 1");
    anyhow::ensure!(args.nm_per_px > 0.0, "--nm-per-px must be positive");
    let recipe = load_recipe(&args.recipe)?;
    for sub in ["images", "labels", "instances", "scenes"] {
        create_dir(&args.out.join(sub))?;
    }
    let recipe_json = canonical_json(&recipe)? + "\n";
    fs::write(args.out.join("recipe.json"), &recipe_json)?;

    let entries = pool.install(|| {
        (0..args.count)
            .into_par_iter()
            .map(|i| synth_one(args, &recipe, i).with_context(|| format!("scene {i}")))
            .collect::<Result<Vec<_>>>()
    })?;
    let header = Header {
        version: MANIFEST_VERSION,
        master_seed: args.seed,
        recipe: RecipeRef {
            name: recipe.name.clone(),
            path: "recipe.json".into(),
            sha256: sha256_hex(recipe_json.as_bytes()),
        },
        nm_per_px: args.nm_per_px,
        count: args.count,
    };
    manifest::write(&args.out, &header, &entries)?;
    write_metadata(&args.out, "synth", args)
}
