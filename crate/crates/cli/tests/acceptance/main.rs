//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail a check.

mod oracles;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use himforge::analyze::{
    confusion, extract_patches, metrics, patch_features, pca, tsne, PatchMode, SizeHistogram, TsneParams,
};
use himforge::codec::read_image;
use himforge::postprocess::{
    area_opening, connected_components, distance_transform, watershed_split, Connectivity, WatershedParams,
};
use himforge::render::render_label;
use himforge::scene::{build_scene, ParticleTemplate, Recipe, SceneSpec, Shader, Shape};
use himforge::{BinaryMask, Rng};
use rand_distr::{Distribution, Normal};
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! check {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn random_mask(rng: &mut Rng, w: usize, h: usize, density: f64) -> BinaryMask {
    BinaryMask::new(w, h, (0..w * h).map(|_| rng.unit() < density).collect()).unwrap()
}

fn himforge(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_himforge"))
        .args(args)
        .env_remove("HIMFORGE_WORKERS")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("himforge {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn metrics_exactness() -> Outcome {
    let mut rng = Rng::new(11);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let density = 0.1 + 0.8 * rng.unit();
        let pred = random_mask(&mut rng, 64, 64, density);
        let gt = random_mask(&mut rng, 64, 64, 0.5);
        let c = confusion(&pred, &gt).map_err(|e| e.to_string())?;
        let t = oracles::tally(&pred, &gt);
        check!((c.tp, c.tn, c.fp, c.fn_) == (t.tp, t.tn, t.fp, t.fn_), "pair {i}: counts differ");
        let m = metrics(&c);
        let got = [m.accuracy, m.precision, m.recall, m.f1].map(|v| v.unwrap_or(f64::NAN));
        for (g, e) in got.iter().zip(oracles::hand_metrics(&t)) {
            worst = worst.max((g - e).abs());
        }
    }
    check!(worst < 1e-12, "max metric error {worst:e}");
    Ok(format!("50 pairs, counts exact, max metric error {worst:.1e}"))
}

fn morphology_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = Rng::new(12);
    for i in 0..100 {
        let w = 32 + (rng.unit() * 33.0) as usize;
        let h = 32 + (rng.unit() * 33.0) as usize;
        let density = 0.3 + 0.4 * rng.unit();
        let mut mask = random_mask(&mut rng, w, h, density);
        if mask.count_ones() == mask.width() * mask.height() {
            mask = BinaryMask::from_fn(mask.width(), mask.height(), |x, y| (x, y) != (0, 0));
        }
        let dt = distance_transform(&mask).map_err(|e| e.to_string())?;
        check!(dt.squared() == oracles::brute_squared_edt(&mask).as_slice(), "mask {i}: distance transform differs");
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let (ids, n) = oracles::flood_fill(&mask, conn);
            let labels = connected_components(&mask, conn);
            check!(labels.ids() == ids.as_slice() && labels.count() == n, "mask {i}: labeling differs ({conn:?})");
            let min_area = 1 + (rng.unit() * 12.0) as usize;
            check!(
                area_opening(&mask, min_area, conn) == oracles::filter_components(&mask, min_area, conn),
                "mask {i}: area opening differs ({conn:?}, {min_area})"
            );
        }
    }
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(60), "took {elapsed:.1?}");
    Ok(format!("100 masks exact in {elapsed:.1?}"))
}

fn watershed_separation() -> Outcome {
    let (c1, c2, r) = ((16.0, 16.0), (32.0, 16.0), 10.0);
    let mask = BinaryMask::from_fn(48, 32, |x, y| {
        let (x, y) = (x as f64, y as f64);
        (x - c1.0).hypot(y - c1.1) <= r || (x - c2.0).hypot(y - c2.1) <= r
    });
    let max_d = distance_transform(&mask).map_err(|e| e.to_string())?.max();
    let run = |dynamic: f64| {
        let params = WatershedParams { dynamic, normalized: false, connectivity: Connectivity::Eight };
        watershed_split(&mask, &params).map_err(|e| e.to_string())
    };
    let split = run(2.0)?;
    check!(split.count() == 2, "dynamic 2 gave {} labels", split.count());
    let left = split.ids()[16 * 48 + 10];
    let right = split.ids()[16 * 48 + 38];
    check!(left != right, "disc centres share a label");
    for y in 0..32 {
        for x in 0..48 {
            let id = split.ids()[y * 48 + x];
            check!(id == 0 || (x < 24 && id == left) || (x > 24 && id == right) || x == 24, "pixel ({x},{y}) across the neck");
        }
    }
    let merged = run(max_d + 0.5)?;
    check!(merged.count() == 1, "dynamic above max EDT gave {} labels", merged.count());
    for dynamic in [0.0, 0.5, 1.0, 2.0, 3.0, 5.0, max_d, max_d + 0.5, 100.0] {
        check!(run(dynamic)?.support() == mask, "support changed at dynamic {dynamic}");
    }
    Ok(format!("2 labels at dynamic 2, 1 above max EDT {max_d:.2}, support preserved"))
}

/// Drops instances whose disc crosses the crop edge; returns how many remain
/// fully inside with a projected radius of at least 3 px.
fn keep_inside(scene: &mut SceneSpec, radius: f64) -> usize {
    let crop = scene.camera.crop;
    let ppu = scene.camera.px_per_unit();
    let inside = |x: f64, y: f64, r: f64| {
        x - r >= crop.x && y - r >= crop.y && x + r <= crop.x + crop.width && y + r <= crop.y + crop.height
    };
    scene.instances.retain(|inst| {
        let r = radius * inst.scale;
        let [x, y, _] = inst.center;
        let outside = x + r <= crop.x || y + r <= crop.y || x - r >= crop.x + crop.width || y - r >= crop.y + crop.height;
        inside(x, y, r) || outside
    });
    scene
        .instances
        .iter()
        .filter(|inst| {
            let r = radius * inst.scale;
            inside(inst.center[0], inst.center[1], r) && r * ppu >= 3.0
        })
        .count()
}

fn render_label_coherence() -> Outcome {
    let recipe = Recipe {
        name: "separated".into(),
        templates: vec![ParticleTemplate::new("ball", Shape::Sphere { radius: 1.5 }, Shader::Diffuse { albedo: 0.85 })],
        weights: vec![1.0],
        count: [50, 100],
        scale: [0.9, 1.1],
        min_separation: 3.6,
        dirt_probability: 0.0,
        zoom: [0.8, 1.0],
        resolution: 256,
        ..Recipe::sio2()
    };
    let root = Rng::new(2025);
    let mut total = 0;
    for i in 0..20 {
        let mut scene = build_scene(&recipe, &root.fork(&format!("scene/{i}"))).map_err(|e| e.to_string())?;
        check!((50..=100).contains(&scene.instances.len()), "scene {i}: {} spheres", scene.instances.len());
        let expected = keep_inside(&mut scene, 1.5);
        let (mask, _) = render_label(&scene).map_err(|e| e.to_string())?;
        let count = connected_components(&mask, Connectivity::Eight).count() as usize;
        check!(count == expected, "scene {i}: {count} components, {expected} instances");
        total += expected;
    }
    Ok(format!("20 scenes, {total} instances, counts exact"))
}

fn end_to_end(work: &Path) -> Outcome {
    let start = Instant::now();
    let data = work.join("e2e");
    let seg = work.join("e2e_seg");
    let post = work.join("e2e_post");
    let report = work.join("e2e_report.json");
    // 400 px at 2031 px scaled to 1014 px.
    let min_area = (400.0 * (1014.0f64 / 2031.0).powi(2)).round() as usize;
    let min_area = min_area.to_string();
    himforge(&["synth", "--count", "20", "--seed", "2", "--target", "1014", "--sigma", "0.03", "--dirt", "alternate", "--out", s(&data)])?;
    himforge(&["segment", "--baseline", "--images", s(&data), "--out", s(&seg)])?;
    himforge(&["post", "--masks", s(&seg), "--min-area", &min_area, "--normalized", "--dynamic", "4", "--out", s(&post)])?;
    himforge(&["eval", "--pred", s(&post), "--gt", s(&data.join("instances")), "--gt-min-area", &min_area, "--report", s(&report)])?;
    let elapsed = start.elapsed();
    let agg = &read_json(&report)?["aggregate"];
    let f1 = agg["mean_f1"].as_f64().unwrap_or(0.0);
    let count_err = agg["mean_count_relative_error"].as_f64().unwrap_or(f64::INFINITY);
    let summary = format!("mean F1 {f1:.3}, count error {:.1}%, {elapsed:.1?}", 100.0 * count_err);
    check!(f1 >= 0.70 && count_err <= 0.10 && elapsed < Duration::from_secs(300), "{summary}");
    Ok(summary)
}

fn bimodal_recovery(work: &Path) -> Outcome {
    let (r_small, r_large) = (1.5, 3.0);
    let sphere = |name: &str, radius: f64| ParticleTemplate::new(name, Shape::Sphere { radius }, Shader::Diffuse { albedo: 0.85 });
    let recipe = Recipe {
        name: "bimodal".into(),
        templates: vec![sphere("small", r_small), sphere("large", r_large)],
        weights: vec![0.5, 0.5],
        count: [60, 80],
        scale: [1.0, 1.0],
        min_separation: 2.0 * r_large + 1.0,
        dirt_probability: 0.0,
        zoom: [1.0, 1.0],
        resolution: 512,
        ..Recipe::sio2()
    };
    let recipe_path = work.join("bimodal.json");
    fs::write(&recipe_path, serde_json::to_string_pretty(&recipe).unwrap()).map_err(|e| e.to_string())?;
    let (data, seg, post, stats) = (work.join("bi"), work.join("bi_seg"), work.join("bi_post"), work.join("bi_stats"));
    let bin = 5.0;
    himforge(&["synth", "--recipe", s(&recipe_path), "--count", "10", "--seed", "4", "--target", "512", "--dirt", "never", "--nm-per-px", "1", "--out", s(&data)])?;
    himforge(&["segment", "--baseline", "--images", s(&data), "--out", s(&seg)])?;
    himforge(&["post", "--masks", s(&seg), "--min-area", "20", "--dynamic", "2", "--out", s(&post)])?;
    himforge(&["stats", "--labels", s(&post), "--nm-per-px", "1", "--hist-bin", &bin.to_string(), "--out", s(&stats)])?;
    let hist: SizeHistogram = serde_json::from_value(read_json(&stats.join("histogram.json"))?).map_err(|e| e.to_string())?;

    let ppu = recipe.resolution as f64 / recipe.extent;
    let design = [r_small, r_large].map(|r| (PI.sqrt() * r * ppu / bin).floor() as i64);
    let peaks = hist.peaks();
    check!(peaks.len() >= 2, "histogram has {} local maxima", peaks.len());
    let mut top = [peaks[0].0 as i64, peaks[1].0 as i64];
    top.sort();
    let summary = format!("peaks at bins {top:?}, design bins {design:?} ({bin} nm bins, {} particles)", hist.total);
    check!((top[0] - design[0]).abs() <= 1 && (top[1] - design[1]).abs() <= 1, "{summary}");
    Ok(summary)
}

fn blobs(per: usize, dim: usize, sep: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = Rng::new(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut v = Vec::new();
    let mut labels = Vec::new();
    for c in 0..2 {
        for _ in 0..per {
            v.push((0..dim).map(|k| normal.sample(&mut rng) + if k == 0 { c as f64 * sep } else { 0.0 }).collect());
            labels.push(c);
        }
    }
    (v, labels)
}

fn pca_tsne(work: &Path) -> Outcome {
    // Patch features from the end-to-end dataset.
    let images = work.join("e2e").join("images");
    let mut features = Vec::new();
    let mut files: Vec<PathBuf> = fs::read_dir(&images).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    files.sort();
    for path in files.iter().take(6) {
        let img = read_image(path).map_err(|e| e.to_string())?;
        for p in extract_patches(&img, 144, PatchMode::Sequential, &mut Rng::new(0)).map_err(|e| e.to_string())? {
            features.push(patch_features(&p).map_err(|e| e.to_string())?);
        }
    }
    let (model, projected) = pca(&features, 0.9).map_err(|e| e.to_string())?;
    let again = pca(&features, 0.9).map_err(|e| e.to_string())?;
    check!(again.0 == model && again.1 == projected, "PCA not deterministic");
    check!(model.retained_variance >= 0.9, "retained {}", model.retained_variance);
    let residual = oracles::residual_fraction(&features, |v| model.reconstruct(&model.project(v)));
    let gap = (1.0 - residual - model.retained_variance).abs();
    check!(gap <= 1e-8, "retained {} vs residual oracle {}", model.retained_variance, 1.0 - residual);

    let (v, labels) = blobs(50, 32, 20.0, 1);
    let params = TsneParams { perplexity: 15.0, iterations: 500, ..TsneParams::default() };
    let a = tsne(&v, &params, &mut Rng::new(3)).map_err(|e| e.to_string())?;
    let b = tsne(&v, &params, &mut Rng::new(3)).map_err(|e| e.to_string())?;
    check!(a == b, "t-SNE not deterministic");
    let sil = oracles::silhouette(&a.positions, &labels);
    let summary = format!(
        "{} components retain {:.3} (oracle gap {gap:.1e}); silhouette {sil:.3}, KL {:.3} -> {:.3}",
        model.components(),
        model.retained_variance,
        a.initial_kl,
        a.final_kl
    );
    check!(sil > 0.5 && a.final_kl < a.initial_kl, "{summary}");
    Ok(summary)
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism(work: &Path) -> Outcome {
    let runs = [("1", "det_a"), ("1", "det_b"), ("8", "det_c")];
    let mut trees = Vec::new();
    for (workers, name) in runs {
        let out = work.join(name);
        himforge(&["--workers", workers, "synth", "--count", "5", "--seed", "7", "--out", s(&out)])?;
        trees.push(tree(&out));
    }
    let n = trees[0].len();
    check!(trees[0].keys().any(|k| k.starts_with("images")), "no images written");
    check!(trees[0] == trees[1], "repeat run differs");
    check!(trees[0] == trees[2], "workers 1 vs 8 differ");
    Ok(format!("{n} files byte-identical across 3 runs"))
}

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let w = work.path();
    let criteria: Vec<Criterion> = vec![
        ("metrics exactness", Box::new(metrics_exactness)),
        ("morphology oracles", Box::new(morphology_oracles)),
        ("watershed separation", Box::new(watershed_separation)),
        ("render/label coherence", Box::new(render_label_coherence)),
        ("end-to-end pipeline", Box::new(|| end_to_end(w))),
        ("bimodal recovery", Box::new(|| bimodal_recovery(w))),
        ("PCA/t-SNE", Box::new(|| pca_tsne(w))),
        ("determinism", Box::new(|| determinism(w))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
