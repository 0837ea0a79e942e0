//! Line-delimited dataset manifest: one header line, then one line per entry.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecipeRef {
    pub name: String,
    /// Relative path of the resolved recipe JSON.
    pub path: String,
    /// SHA-256 of that file's bytes, hex encoded.
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: u32,
    pub master_seed: u64,
    pub recipe: RecipeRef,
    pub nm_per_px: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Degradation {
    pub source_resolution: usize,
    pub target: usize,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub index: usize,
    pub image: String,
    pub label: String,
    /// 16-bit instance ids on the label mask's support.
    pub ids: String,
    pub scene: String,
    pub lineage: Vec<String>,
    pub degradation: Degradation,
    pub dirt: bool,
    pub instances: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Header(Header),
    Entry(Entry),
}

fn line(value: &Line) -> Result<String> {
    // Round-trip through Value for sorted keys.
    Ok(serde_json::to_string(&serde_json::to_value(value)?)?)
}

pub fn write(dir: &Path, header: &Header, entries: &[Entry]) -> Result<()> {
    let mut text = line(&Line::Header(header.clone()))?;
    text.push('\n');
    for e in entries {
        text.push_str(&line(&Line::Entry(e.clone()))?);
        text.push('\n');
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// Parses and checks a manifest: dense indices, existing files, recipe hash.
pub fn read(dir: &Path) -> Result<(Header, Vec<Entry>)> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = match serde_json::from_str(lines.next().context("empty manifest")?)? {
        Line::Header(h) => h,
        Line::Entry(_) => bail!("manifest must start with a header line"),
    };
    ensure!(header.version == MANIFEST_VERSION, "unsupported manifest version {}", header.version);
    let recipe = fs::read(dir.join(&header.recipe.path))?;
    ensure!(
        crate::commands::synth::sha256_hex(&recipe) == header.recipe.sha256,
        "recipe hash mismatch"
    );
    let mut entries = Vec::new();
    for (i, l) in lines.enumerate() {
        let Line::Entry(e) = serde_json::from_str(l)? else {
            bail!("unexpected second header at line {}", i + 2);
        };
        ensure!(e.index == i, "entry indices must be dense from 0");
        for f in [&e.image, &e.label, &e.ids, &e.scene] {
            ensure!(dir.join(f).is_file(), "missing file {f}");
        }
        entries.push(e);
    }
    ensure!(entries.len() == header.count, "manifest lists {} of {} entries", entries.len(), header.count);
    Ok((header, entries))
}
