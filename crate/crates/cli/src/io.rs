//! Directory listing, metadata and small file helpers shared by commands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Written to every output directory. Holds no timestamps or worker counts,
/// so identical runs produce identical files.
#[derive(Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub version: String,
    pub parameters: serde_json::Value,
}

pub fn write_metadata<T: Serialize>(out: &Path, command: &str, params: &T) -> Result<()> {
    let meta = Metadata {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        parameters: serde_json::to_value(params)?,
    };
    write_json(&out.join("metadata.json"), &meta)
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let value = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

/// PNG files directly inside `dir`, sorted by file name.
pub fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
            out.push(path);
        }
    }
    out.sort();
    anyhow::ensure!(!out.is_empty(), "no PNG files in {}", dir.display());
    Ok(out)
}

pub fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Pairs files in `a` with same-named files in `b`.
pub fn pair_by_name(a: &Path, b: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    list_pngs(a)?
        .into_iter()
        .map(|p| {
            let name = p.file_name().expect("listed file").to_owned();
            let other = b.join(&name);
            anyhow::ensure!(other.is_file(), "{} has no counterpart in {}", p.display(), b.display());
            Ok((stem(&p), p, other))
        })
        .collect()
}

/// Reads a 16-bit label map, or labels an 8-bit mask with 8-connectivity.
pub fn read_instances(path: &Path) -> Result<himforge::LabelMap> {
    use himforge::codec::{decode_labels, decode_mask, probe_depth, Depth};
    use himforge::postprocess::{connected_components, Connectivity};
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let labels = match probe_depth(&bytes)? {
        Depth::Sixteen => decode_labels(&bytes)?,
        Depth::Eight => connected_components(&decode_mask(&bytes)?, Connectivity::Eight),
    };
    Ok(labels)
}

/// Number of ids owning at least one pixel.
pub fn instance_count(labels: &himforge::LabelMap) -> usize {
    labels.areas().iter().skip(1).filter(|&&a| a > 0).count()
}

pub fn read_mask(path: &Path) -> Result<himforge::BinaryMask> {
    himforge::codec::read_mask(path).with_context(|| format!("reading {}", path.display()))
}

/// Pixel adjacency as a command-line value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
pub enum ConnArg {
    #[value(name = "4")]
    #[serde(rename = "4")]
    Four,
    #[value(name = "8")]
    #[serde(rename = "8")]
    Eight,
}

impl From<ConnArg> for himforge::postprocess::Connectivity {
    fn from(c: ConnArg) -> Self {
        match c {
            ConnArg::Four => Self::Four,
            ConnArg::Eight => Self::Eight,
        }
    }
}
