use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::codec::encode_rgb8;
use crate::error::{Error, Result};
use crate::raster::{GrayImage, LabelMap};

use super::MetricsReport;

/// Component colors; id `k` uses entry `(k - 1) % 12`.
pub const PALETTE: [[u8; 3]; 12] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [70, 240, 240],
    [145, 30, 180],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [170, 110, 40],
    [128, 0, 0],
];

/// Outline color for label boundaries; not in the palette.
const BOUNDARY: [u8; 3] = [255, 0, 255];

pub fn palette_color(id: u32) -> Option<[u8; 3]> {
    (id > 0).then(|| PALETTE[(id as usize - 1) % PALETTE.len()])
}

pub struct GalleryEntry {
    pub name: String,
    pub image: GrayImage,
    pub labels: LabelMap,
    pub metrics: Option<MetricsReport>,
}

/// RGB overlay: labeled pixels blended half-and-half with their palette
/// color, boundary pixels (a 4-neighbor with a different id) in magenta.
pub fn overlay_rgb(image: &GrayImage, labels: &LabelMap) -> Result<Vec<u8>> {
    if image.dims() != labels.dims() {
        let (a, b) = (image.dims(), labels.dims());
        return Err(Error::DimensionMismatch(a.0, a.1, b.0, b.1));
    }
    let (w, h) = image.dims();
    let mut rgb = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let g = (image.get(x, y) * 255.0).round() as u8;
            let id = labels.get(x, y);
            let Some(color) = palette_color(id) else {
                rgb.extend_from_slice(&[g, g, g]);
                continue;
            };
            let edge = (x == 0 || labels.get(x - 1, y) != id)
                || (x + 1 == w || labels.get(x + 1, y) != id)
                || (y == 0 || labels.get(x, y - 1) != id)
                || (y + 1 == h || labels.get(x, y + 1) != id);
            if edge {
                rgb.extend_from_slice(&BOUNDARY);
            } else {
                rgb.extend(color.iter().map(|&c| ((c as u16 + g as u16) / 2) as u8));
            }
        }
    }
    Ok(rgb)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"))
}

/// Writes `panel_NNN.png` overlays and an `index.html` contact sheet.
pub fn emit_gallery(entries: &[GalleryEntry], out_dir: &Path) -> Result<PathBuf> {
    if entries.is_empty() {
        return Err(Error::InvalidParameter("gallery needs at least one entry".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut html = String::from(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Segmentation gallery</title></head>\n<body>\n<h1>Segmentation gallery</h1>\n<table border=\"1\">\n<tr><th>#</th><th>name</th><th>overlay</th><th>particles</th><th>accuracy</th><th>precision</th><th>recall</th><th>F1</th><th>good</th></tr>\n",
    );
    for (i, e) in entries.iter().enumerate() {
        let file = format!("panel_{i:03}.png");
        let (w, h) = e.image.dims();
        fs::write(out_dir.join(&file), encode_rgb8(w, h, &overlay_rgb(&e.image, &e.labels)?)?)?;
        let particles = e.labels.areas().iter().skip(1).filter(|&&a| a > 0).count();
        let (acc, prec, rec, f1, good) = match &e.metrics {
            Some(m) => (cell(m.accuracy), cell(m.precision), cell(m.recall), cell(m.f1), m.is_good().to_string()),
            None => Default::default(),
        };
        let _ = writeln!(
            html,
            "<tr><td>{i}</td><td>{}</td><td><img src=\"{file}\" width=\"256\"></td><td>{particles}</td><td>{acc}</td><td>{prec}</td><td>{rec}</td><td>{f1}</td><td>{good}</td></tr>",
            escape(&e.name)
        );
    }
    html.push_str("</table>\n</body></html>\n");
    let index = out_dir.join("index.html");
    fs::write(&index, html)?;
    Ok(index)
}
