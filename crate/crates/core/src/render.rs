//! Deterministic orthographic ray caster.
//!
//! One vertical primary ray per pixel center, nearest hit wins, no shadows
//! or bounces. The beauty and label passes share the same hit buffer, so a
//! pixel's instance id is always the instance that shaded it.

use rayon::prelude::*;

use crate::error::Result;
use crate::geom::{closest_on_segment, intersect_capsule, intersect_sphere, Ray, Vec3};
use crate::mesh::PlacedMesh;
use crate::postprocess::erode_square;
use crate::raster::{BinaryMask, GrayImage, LabelMap, ScalarMap};
use crate::rng::Rng;
use crate::scene::{SceneSpec, Shader, Shape};
use crate::texture::dirt_texture;

/// Fork label for the dirt texture stream beneath a scene's lineage.
pub const DIRT_STREAM: &str = "dirt/texture";

#[derive(Clone, Debug, PartialEq)]
pub struct RenderOutput {
    pub beauty: GrayImage,
    pub label_mask: BinaryMask,
    /// Pre-erosion instance ids (1-based instance index, 0 = substrate).
    pub id_map: LabelMap,
}

enum Geometry {
    Sphere { center: Vec3, radius: f64 },
    Capsule { a: Vec3, b: Vec3, radius: f64 },
    Mesh(PlacedMesh),
}

struct Placed {
    geometry: Geometry,
    shader: Shader,
    bbox: [f64; 4],
    top: f64,
}

impl Placed {
    fn hit(&self, ray: &Ray) -> Option<(f64, Vec3)> {
        match &self.geometry {
            Geometry::Sphere { center, radius } => {
                let t = intersect_sphere(ray, *center, *radius)?;
                Some((t, (ray.at(t) - *center) * (1.0 / radius)))
            }
            Geometry::Capsule { a, b, radius } => {
                let t = intersect_capsule(ray, *a, *b, *radius)?;
                let p = ray.at(t);
                Some((t, (p - closest_on_segment(p, *a, *b)).normalized()))
            }
            Geometry::Mesh(mesh) => {
                let hit = mesh.intersect(ray)?;
                let n = mesh.normal(hit.face);
                let n = if n.dot(ray.dir) > 0.0 { -n } else { n };
                Some((hit.t, n))
            }
        }
    }
}

fn place(scene: &SceneSpec) -> Vec<Placed> {
    scene
        .instances
        .iter()
        .map(|inst| {
            let template = scene
                .template(&inst.template)
                .expect("validated scene references known templates");
            let c = Vec3::from_array(inst.center);
            let s = inst.scale;
            let geometry = match &template.shape {
                Shape::Sphere { radius } => Geometry::Sphere {
                    center: c,
                    radius: radius * s,
                },
                Shape::Capsule { radius, length } => {
                    let half = Vec3::new(length * s / 2.0, 0.0, 0.0).rotate_z(inst.rotation);
                    Geometry::Capsule {
                        a: c - half,
                        b: c + half,
                        radius: radius * s,
                    }
                }
                Shape::Mesh(mesh) => Geometry::Mesh(PlacedMesh::new(mesh, c, s, inst.rotation)),
            };
            let (bbox, top) = match (&template.shape, &geometry) {
                (Shape::Mesh(mesh), _) => {
                    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                    let mut top = f64::NEG_INFINITY;
                    for &v in &mesh.vertices {
                        let w = (Vec3::from_array(v) * s).rotate_z(inst.rotation) + c;
                        b = [b[0].min(w.x), b[1].min(w.y), b[2].max(w.x), b[3].max(w.y)];
                        top = top.max(w.z);
                    }
                    (b, top)
                }
                (_, Geometry::Capsule { a, b, radius }) => (
                    [
                        a.x.min(b.x) - radius,
                        a.y.min(b.y) - radius,
                        a.x.max(b.x) + radius,
                        a.y.max(b.y) + radius,
                    ],
                    c.z + radius,
                ),
                (_, Geometry::Sphere { center, radius }) => (
                    [
                        center.x - radius,
                        center.y - radius,
                        center.x + radius,
                        center.y + radius,
                    ],
                    center.z + radius,
                ),
                _ => unreachable!(),
            };
            Placed {
                geometry,
                shader: template.shader.clone(),
                bbox,
                top,
            }
        })
        .collect()
}

/// Uniform xy grid over the crop listing instances whose bounding box meets each cell.
struct InstanceGrid {
    x0: f64,
    y0: f64,
    cell_w: f64,
    cell_h: f64,
    cells: usize,
    bins: Vec<Vec<u32>>,
}

impl InstanceGrid {
    fn new(scene: &SceneSpec, placed: &[Placed]) -> Self {
        let crop = scene.camera.crop;
        let cells = ((placed.len() as f64).sqrt().ceil() as usize).clamp(1, 64);
        let mut grid = Self {
            x0: crop.x,
            y0: crop.y,
            cell_w: crop.width / cells as f64,
            cell_h: crop.height / cells as f64,
            cells,
            bins: vec![Vec::new(); cells * cells],
        };
        for (i, p) in placed.iter().enumerate() {
            let [bx0, by0, bx1, by1] = p.bbox;
            if bx1 < crop.x || by1 < crop.y || bx0 > crop.x + crop.width || by0 > crop.y + crop.height {
                continue;
            }
            let (cx0, cy0) = grid.cell_of(bx0, by0);
            let (cx1, cy1) = grid.cell_of(bx1, by1);
            for cy in cy0..=cy1 {
                for cx in cx0..=cx1 {
                    grid.bins[cy * cells + cx].push(i as u32);
                }
            }
        }
        grid
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let clamp = |v: f64| (v.floor().max(0.0) as usize).min(self.cells - 1);
        (
            clamp((x - self.x0) / self.cell_w),
            clamp((y - self.y0) / self.cell_h),
        )
    }
}

#[derive(Clone, Copy)]
struct PixelHit {
    /// 1-based instance index, 0 for substrate.
    instance: u32,
    radiance: f64,
}

fn shade(shader: &Shader, n: Vec3, light: Vec3, view: Vec3, brightness: f64) -> f64 {
    let diffuse = |albedo: f64| albedo * n.dot(light).max(0.0) * brightness;
    match *shader {
        Shader::Diffuse { albedo } => diffuse(albedo),
        Shader::Glossy {
            albedo,
            specular_strength,
            shininess,
        } => {
            let h = (light + view).normalized();
            diffuse(albedo) + specular_strength * n.dot(h).max(0.0).powf(shininess) * brightness
        }
        Shader::EdgeEffect {
            albedo,
            edge_gain,
            edge_exponent,
        } => diffuse(albedo) + edge_gain * (1.0 - n.dot(view).abs()).powf(edge_exponent) * brightness,
    }
}

fn sample_dirt(dirt: &GrayImage, u: f64, v: f64) -> f64 {
    let side = dirt.width();
    let fx = (u * (side - 1) as f64).clamp(0.0, (side - 1) as f64);
    let fy = (v * (side - 1) as f64).clamp(0.0, (side - 1) as f64);
    let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(side - 1), (y0 + 1).min(side - 1));
    let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
    let top = dirt.get(x0, y0) * (1.0 - tx) + dirt.get(x1, y0) * tx;
    let bottom = dirt.get(x0, y1) * (1.0 - tx) + dirt.get(x1, y1) * tx;
    top * (1.0 - ty) + bottom * ty
}

/// Regenerates the scene's dirt overlay, or `None` when dirt is disabled.
pub fn scene_dirt(scene: &SceneSpec) -> Result<Option<GrayImage>> {
    if !scene.dirt.enabled {
        return Ok(None);
    }
    let mut rng = Rng::from_lineage(scene.seed, scene.lineage.clone()).fork(DIRT_STREAM);
    dirt_texture(&scene.dirt.params, &mut rng).map(Some)
}

fn trace(scene: &SceneSpec) -> Result<Vec<PixelHit>> {
    scene.validate()?;
    let placed = place(scene);
    let grid = InstanceGrid::new(scene, &placed);
    let dirt = scene_dirt(scene)?;
    let res = scene.camera.resolution;
    let crop = scene.camera.crop;
    let (px_w, px_h) = (crop.width / res as f64, crop.height / res as f64);
    let z_top = placed.iter().map(|p| p.top).fold(0.0, f64::max) + 1.0;
    let light = Vec3::from_array(scene.light.direction);
    let view = Vec3::new(0.0, 0.0, 1.0);
    let brightness = scene.light.brightness;
    let extent = scene.substrate.extent;
    let substrate = scene.substrate.albedo * brightness;

    let rows: Vec<Vec<PixelHit>> = (0..res)
        .into_par_iter()
        .map(|row| {
            let y = crop.y + crop.height - (row as f64 + 0.5) * px_h;
            (0..res)
                .map(|col| {
                    let x = crop.x + (col as f64 + 0.5) * px_w;
                    let ray = Ray::vertical(x, y, z_top);
                    // The substrate plane z = 0 is hit at t = z_top.
                    let mut best: Option<(f64, u32, Vec3)> = None;
                    let (cx, cy) = grid.cell_of(x, y);
                    for &i in &grid.bins[cy * grid.cells + cx] {
                        if let Some((t, n)) = placed[i as usize].hit(&ray) {
                            if t < z_top && best.is_none_or(|(bt, bi, _)| t < bt || (t == bt && i < bi)) {
                                best = Some((t, i, n));
                            }
                        }
                    }
                    match best {
                        Some((_, i, n)) => PixelHit {
                            instance: i + 1,
                            radiance: shade(&placed[i as usize].shader, n, light, view, brightness),
                        },
                        None => {
                            let overlay = dirt
                                .as_ref()
                                .map_or(0.0, |d| sample_dirt(d, x / extent, (extent - y) / extent));
                            PixelHit {
                                instance: 0,
                                radiance: substrate + overlay,
                            }
                        }
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Beauty pass before the final clamp.
pub fn render_radiance(scene: &SceneSpec) -> Result<ScalarMap> {
    let res = scene.camera.resolution;
    let hits = trace(scene)?;
    ScalarMap::new(res, res, hits.iter().map(|h| h.radiance).collect())
}

fn beauty_from(res: usize, hits: &[PixelHit]) -> Result<GrayImage> {
    GrayImage::from_clamped(res, res, hits.iter().map(|h| h.radiance).collect())
}

fn labels_from(scene: &SceneSpec, res: usize, hits: &[PixelHit]) -> Result<(BinaryMask, LabelMap)> {
    let id_map = LabelMap::with_count(
        res,
        res,
        hits.iter().map(|h| h.instance).collect(),
        scene.instances.len() as u32,
    )?;
    let mask = erode_square(&id_map.support());
    Ok((mask, id_map))
}

pub fn render_beauty(scene: &SceneSpec) -> Result<GrayImage> {
    let hits = trace(scene)?;
    beauty_from(scene.camera.resolution, &hits)
}

/// Instance-id raster and the once-eroded particle mask.
pub fn render_label(scene: &SceneSpec) -> Result<(BinaryMask, LabelMap)> {
    let hits = trace(scene)?;
    labels_from(scene, scene.camera.resolution, &hits)
}

pub fn render_pair(scene: &SceneSpec) -> Result<RenderOutput> {
    let res = scene.camera.resolution;
    let hits = trace(scene)?;
    let beauty = beauty_from(res, &hits)?;
    let (label_mask, id_map) = labels_from(scene, res, &hits)?;
    Ok(RenderOutput {
        beauty,
        label_mask,
        id_map,
    })
}
