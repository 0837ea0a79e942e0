//! Declarative virtual specimens and the randomized recipe that builds them.
//!
//! Scene coordinates put the origin at the bottom-left corner of the
//! substrate, x to the right, y up, z out of the substrate plane.

use std::collections::HashSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::TriangleMesh;
use crate::rng::Rng;
use crate::texture::DirtParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Sphere { radius: f64 },
    /// Rod lying in the substrate plane, axis along local x.
    Capsule { radius: f64, length: f64 },
    Mesh(TriangleMesh),
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Sphere { radius } if !(*radius > 0.0) => Err(Error::InvalidParameter(
                format!("sphere radius must be > 0, got {radius}"),
            )),
            Shape::Capsule { radius, length } if !(*radius > 0.0 && *length > 0.0) => {
                Err(Error::InvalidParameter(format!(
                    "capsule radius and length must be > 0, got {radius}, {length}"
                )))
            }
            Shape::Mesh(mesh) => mesh.validate(),
            _ => Ok(()),
        }
    }

    /// Radius of the bounding sphere about the local origin, at unit scale.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Shape::Sphere { radius } => *radius,
            Shape::Capsule { radius, length } => radius + length / 2.0,
            Shape::Mesh(mesh) => mesh.bounding_radius(),
        }
    }

    /// Distance from the local origin down to the lowest point, at unit scale.
    pub fn depth_below_origin(&self) -> f64 {
        match self {
            Shape::Sphere { radius } | Shape::Capsule { radius, .. } => *radius,
            Shape::Mesh(mesh) => mesh.depth_below_origin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shader {
    Diffuse {
        albedo: f64,
    },
    Glossy {
        albedo: f64,
        specular_strength: f64,
        shininess: f64,
    },
    EdgeEffect {
        albedo: f64,
        edge_gain: f64,
        edge_exponent: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleTemplate {
    pub id: String,
    pub shape: Shape,
    pub shader: Shader,
}

impl ParticleTemplate {
    pub fn new(id: impl Into<String>, shape: Shape, shader: Shader) -> Self {
        Self {
            id: id.into(),
            shape,
            shader,
        }
    }
}

/// Axis-aligned rectangle in substrate coordinates (`x`, `y` is the bottom-left corner).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn square(x: f64, y: f64, side: f64) -> Self {
        Self {
            x,
            y,
            width: side,
            height: side,
        }
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.x + other.width <= self.x + self.width
            && other.y + other.height <= self.y + self.height
    }
}

/// Randomized particle centers plus the camera window over the substrate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionMap {
    /// `(x, y, z)` with `z` a normalized height in `[0, 1]`.
    pub centers: Vec<[f64; 3]>,
    pub crop: Rect,
    pub extent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub template: String,
    pub center: [f64; 3],
    pub scale: f64,
    /// Radians about the vertical axis.
    pub rotation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Substrate {
    pub extent: f64,
    pub albedo: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Light {
    /// Unit vector from the surface toward the light.
    pub direction: [f64; 3],
    pub brightness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub crop: Rect,
    /// Output raster side in pixels.
    pub resolution: usize,
}

impl Camera {
    /// Pixels per scene unit along x.
    pub fn px_per_unit(&self) -> f64 {
        self.resolution as f64 / self.crop.width
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirtSpec {
    pub enabled: bool,
    pub params: DirtParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub substrate: Substrate,
    pub templates: Vec<ParticleTemplate>,
    pub instances: Vec<Instance>,
    pub light: Light,
    pub camera: Camera,
    pub dirt: DirtSpec,
    pub seed: u64,
    pub lineage: Vec<String>,
}

impl SceneSpec {
    pub fn template(&self, id: &str) -> Option<&ParticleTemplate> {
        self.templates.iter().find(|t| t.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for t in &self.templates {
            if !ids.insert(t.id.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate template id `{}`",
                    t.id
                )));
            }
            t.shape.validate()?;
        }
        for inst in &self.instances {
            if !ids.contains(inst.template.as_str()) {
                return Err(Error::UnknownTemplate(inst.template.clone()));
            }
            if !(inst.scale > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "instance scale must be > 0, got {}",
                    inst.scale
                )));
            }
        }
        if !(self.light.brightness > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "brightness must be > 0, got {}",
                self.light.brightness
            )));
        }
        if (Vec3::from_array(self.light.direction).norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(
                "light direction must be a unit vector".into(),
            ));
        }
        if self.camera.resolution < 16 {
            return Err(Error::InvalidParameter(format!(
                "resolution must be >= 16, got {}",
                self.camera.resolution
            )));
        }
        let extent = Rect::square(0.0, 0.0, self.substrate.extent);
        if !(self.camera.crop.width > 0.0 && self.camera.crop.height > 0.0)
            || !extent.contains_rect(&self.camera.crop)
        {
            return Err(Error::InvalidParameter(
                "camera crop must be a nonempty rectangle inside the substrate".into(),
            ));
        }
        Ok(())
    }

    /// JSON with sorted keys and shortest round-trip float formatting.
    pub fn canonical_json(&self) -> Result<String> {
        canonical_json(self)
    }
}

/// Serializes through `serde_json::Value`, whose maps are key-sorted.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(&serde_json::to_value(value)?)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Agglomeration {
    pub cluster_probability: f64,
    pub cluster_size: [u32; 2],
    pub contact_slack: f64,
}

impl Default for Agglomeration {
    fn default() -> Self {
        Self {
            cluster_probability: 0.0,
            cluster_size: [2, 4],
            contact_slack: 0.15,
        }
    }
}

/// Randomization ranges for building scenes. All `[lo, hi]` pairs are inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Recipe {
    pub name: String,
    pub templates: Vec<ParticleTemplate>,
    pub weights: Vec<f64>,
    pub count: [u32; 2],
    /// Scale jitter, sampled uniformly in log space.
    pub scale: [f64; 2],
    pub min_separation: f64,
    pub agglomeration: Agglomeration,
    pub brightness: [f64; 2],
    pub light_direction: [f64; 3],
    pub dirt_probability: f64,
    pub dirt: DirtParams,
    /// Crop side as a fraction of the substrate extent.
    pub zoom: [f64; 2],
    pub resolution: usize,
    pub extent: f64,
    pub substrate_albedo: f64,
    /// Largest sunk fraction of a particle's height.
    pub max_sink: f64,
}

impl Default for Recipe {
    fn default() -> Self {
        Self::sio2()
    }
}

fn ordered(name: &str, r: [f64; 2]) -> Result<()> {
    if r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} range [{}, {}] must be ordered",
            r[0], r[1]
        )))
    }
}

impl Recipe {
    pub fn validate(&self) -> Result<()> {
        if self.templates.is_empty() {
            return Err(Error::InvalidParameter("recipe has no templates".into()));
        }
        for t in &self.templates {
            t.shape.validate()?;
        }
        if self.weights.len() != self.templates.len()
            || self.weights.iter().any(|&w| !(w >= 0.0))
            || !(self.weights.iter().sum::<f64>() > 0.0)
        {
            return Err(Error::InvalidParameter(
                "weights must be one nonnegative value per template with positive sum".into(),
            ));
        }
        if self.count[0] > self.count[1] {
            return Err(Error::InvalidParameter("count range must be ordered".into()));
        }
        ordered("scale", self.scale)?;
        ordered("brightness", self.brightness)?;
        ordered("zoom", self.zoom)?;
        if !(self.scale[0] > 0.0) || !(self.brightness[0] > 0.0) {
            return Err(Error::InvalidParameter(
                "scale and brightness must be positive".into(),
            ));
        }
        if !(self.zoom[0] > 0.0 && self.zoom[1] <= 1.0) {
            return Err(Error::InvalidParameter("zoom must lie in (0, 1]".into()));
        }
        let agg = &self.agglomeration;
        if !(0.0..=1.0).contains(&agg.cluster_probability)
            || agg.cluster_size[0] < 1
            || agg.cluster_size[0] > agg.cluster_size[1]
            || !(agg.contact_slack < 1.0)
        {
            return Err(Error::InvalidParameter("invalid agglomeration settings".into()));
        }
        if !(0.0..=1.0).contains(&self.dirt_probability) {
            return Err(Error::InvalidParameter("dirt probability must lie in [0, 1]".into()));
        }
        if !(0.0..=0.5).contains(&self.max_sink) {
            return Err(Error::InvalidParameter("max sink must lie in [0, 0.5]".into()));
        }
        if self.resolution < 16 || !(self.extent > 0.0) || self.min_separation < 0.0 {
            return Err(Error::InvalidParameter(
                "resolution must be >= 16, extent > 0, min separation >= 0".into(),
            ));
        }
        if (Vec3::from_array(self.light_direction).norm()) == 0.0 {
            return Err(Error::InvalidParameter("light direction must be nonzero".into()));
        }
        Ok(())
    }

    /// Silica-like spheres: two diffuse sizes and a smaller glossy one.
    pub fn sio2() -> Self {
        Self {
            name: "sio2".into(),
            templates: vec![
                ParticleTemplate::new(
                    "sphere_large",
                    Shape::Sphere { radius: 2.4 },
                    Shader::Diffuse { albedo: 0.85 },
                ),
                ParticleTemplate::new(
                    "sphere_medium",
                    Shape::Sphere { radius: 2.2 },
                    Shader::Diffuse { albedo: 0.8 },
                ),
                ParticleTemplate::new(
                    "sphere_small_glossy",
                    Shape::Sphere { radius: 1.3 },
                    Shader::Glossy {
                        albedo: 0.8,
                        specular_strength: 0.3,
                        shininess: 12.0,
                    },
                ),
            ],
            weights: vec![0.35, 0.25, 0.4],
            count: [60, 110],
            scale: [0.9, 1.1],
            min_separation: 0.0,
            agglomeration: Agglomeration::default(),
            brightness: [0.8, 1.2],
            light_direction: [0.0, 0.0, 1.0],
            dirt_probability: 0.5,
            dirt: DirtParams::default(),
            zoom: [0.6, 1.0],
            resolution: 507,
            extent: 100.0,
            substrate_albedo: 0.2,
            max_sink: 0.3,
        }
    }

    /// Titania-like faceted particles with edge shading, combined into agglomerates.
    pub fn tio2() -> Self {
        let edge = Shader::EdgeEffect {
            albedo: 0.45,
            edge_gain: 0.8,
            edge_exponent: 1.5,
        };
        Self {
            name: "tio2".into(),
            templates: vec![
                ParticleTemplate::new(
                    "faceted_round",
                    Shape::Mesh(TriangleMesh::ellipsoid([2.0, 1.8, 1.4], 9, 6)),
                    edge.clone(),
                ),
                ParticleTemplate::new(
                    "faceted_oblong",
                    Shape::Mesh(TriangleMesh::ellipsoid([2.8, 1.5, 1.2], 10, 6)),
                    edge.clone(),
                ),
                ParticleTemplate::new(
                    "bipyramid",
                    Shape::Mesh(TriangleMesh::bipyramid(6, 1.9, 1.5)),
                    edge.clone(),
                ),
                ParticleTemplate::new(
                    "block",
                    Shape::Mesh(TriangleMesh::cuboid([1.7, 1.3, 1.1])),
                    edge,
                ),
            ],
            weights: vec![1.0, 1.0, 1.0, 1.0],
            count: [40, 80],
            scale: [0.6, 1.6],
            min_separation: 0.0,
            agglomeration: Agglomeration {
                cluster_probability: 0.5,
                cluster_size: [2, 4],
                contact_slack: 0.15,
            },
            brightness: [0.8, 1.2],
            light_direction: [0.3, 0.2, 0.933_273_1],
            dirt_probability: 0.3,
            dirt: DirtParams::default(),
            zoom: [0.6, 1.0],
            resolution: 507,
            extent: 100.0,
            substrate_albedo: 0.2,
            max_sink: 0.3,
        }
    }

    /// Silver-wire-like capsules.
    pub fn ag() -> Self {
        Self {
            name: "ag".into(),
            templates: vec![
                ParticleTemplate::new(
                    "wire",
                    Shape::Capsule {
                        radius: 0.6,
                        length: 14.0,
                    },
                    Shader::EdgeEffect {
                        albedo: 0.55,
                        edge_gain: 0.6,
                        edge_exponent: 2.0,
                    },
                ),
                ParticleTemplate::new(
                    "rod",
                    Shape::Capsule {
                        radius: 0.7,
                        length: 5.0,
                    },
                    Shader::EdgeEffect {
                        albedo: 0.55,
                        edge_gain: 0.6,
                        edge_exponent: 2.0,
                    },
                ),
            ],
            weights: vec![0.6, 0.4],
            count: [15, 40],
            scale: [0.8, 1.5],
            min_separation: 0.0,
            agglomeration: Agglomeration::default(),
            brightness: [0.8, 1.2],
            light_direction: [0.0, 0.0, 1.0],
            dirt_probability: 0.3,
            dirt: DirtParams::default(),
            zoom: [0.6, 1.0],
            resolution: 507,
            extent: 100.0,
            substrate_albedo: 0.2,
            max_sink: 0.3,
        }
    }

    /// Built-in recipe by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "sio2" => Some(Self::sio2()),
            "tio2" => Some(Self::tio2()),
            "ag" => Some(Self::ag()),
            _ => None,
        }
    }
}

/// Upper bound on rejection-sampling attempts for one distribution map.
pub const PLACEMENT_ATTEMPT_BUDGET: usize = 1_000_000;

/// Uniform hashing grid for minimum-separation queries.
struct SeparationGrid {
    cell: f64,
    cells: usize,
    bins: Vec<Vec<(f64, f64)>>,
}

impl SeparationGrid {
    fn new(extent: f64, min_separation: f64) -> Self {
        let cells = ((extent / min_separation).floor() as usize).clamp(1, 2048);
        Self {
            cell: extent / cells as f64,
            cells,
            bins: vec![Vec::new(); cells * cells],
        }
    }

    fn index(&self, v: f64) -> usize {
        ((v / self.cell).floor().max(0.0) as usize).min(self.cells - 1)
    }

    fn is_clear(&self, x: f64, y: f64, min_separation: f64) -> bool {
        let (cx, cy) = (self.index(x) as isize, self.index(y) as isize);
        let min2 = min_separation * min_separation;
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (cx + dx, cy + dy);
                if nx < 0 || ny < 0 || nx >= self.cells as isize || ny >= self.cells as isize {
                    continue;
                }
                for &(px, py) in &self.bins[ny as usize * self.cells + nx as usize] {
                    if (px - x).powi(2) + (py - y).powi(2) < min2 {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, x: f64, y: f64) {
        let i = self.index(y) * self.cells + self.index(x);
        self.bins[i].push((x, y));
    }
}

/// Draws `count` particle centers uniformly over the substrate and a camera window.
///
/// With `min_separation > 0`, candidates closer than that to an accepted center
/// are rejected. The crop side is `extent * uniform(zoom.0, zoom.1)`, placed
/// uniformly so it stays inside the substrate.
pub fn sample_distribution(
    count: usize,
    extent: f64,
    min_separation: f64,
    zoom: (f64, f64),
    rng: &mut Rng,
) -> Result<DistributionMap> {
    if !(extent > 0.0) || min_separation < 0.0 {
        return Err(Error::InvalidParameter(
            "extent must be > 0 and min separation >= 0".into(),
        ));
    }
    if !(zoom.0 > 0.0 && zoom.0 <= zoom.1 && zoom.1 <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "zoom range ({}, {}) must satisfy 0 < lo <= hi <= 1",
            zoom.0, zoom.1
        )));
    }
    let side = extent * rng.uniform(zoom.0, zoom.1);
    let crop = Rect::square(
        rng.uniform(0.0, extent - side),
        rng.uniform(0.0, extent - side),
        side,
    );

    let mut centers = Vec::with_capacity(count);
    let mut grid = (min_separation > 0.0).then(|| SeparationGrid::new(extent, min_separation));
    let mut attempts = 0usize;
    while centers.len() < count {
        if attempts >= PLACEMENT_ATTEMPT_BUDGET {
            return Err(Error::PlacementInfeasible {
                placed: centers.len(),
                requested: count,
            });
        }
        attempts += 1;
        let x = rng.uniform(0.0, extent);
        let y = rng.uniform(0.0, extent);
        if let Some(grid) = grid.as_mut() {
            if !grid.is_clear(x, y, min_separation) {
                continue;
            }
            grid.insert(x, y);
        }
        let z = rng.unit();
        centers.push([x, y, z]);
    }
    Ok(DistributionMap {
        centers,
        crop,
        extent,
    })
}

/// One member of an agglomerate: template, scale, and scaled bounding radius.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterMember {
    pub template: String,
    pub scale: f64,
    pub radius: f64,
}

/// Chains `k` instances: member `i + 1` sits at planar distance
/// `(r_i + r_{i+1}) * (1 - contact_slack)` from member `i` in a random
/// direction. Member `i` uses `base[i % base.len()]`; the first member is at
/// the local origin and all `z` are zero.
pub fn agglomerate(
    base: &[ClusterMember],
    k: usize,
    contact_slack: f64,
    rng: &mut Rng,
) -> Result<Vec<Instance>> {
    if k == 0 || base.is_empty() {
        return Err(Error::InvalidParameter(
            "agglomerate needs k >= 1 and a nonempty base".into(),
        ));
    }
    let mut out: Vec<Instance> = Vec::with_capacity(k);
    let mut pos = (0.0, 0.0);
    for i in 0..k {
        let member = &base[i % base.len()];
        if i > 0 {
            let prev = &base[(i - 1) % base.len()];
            let d = (prev.radius + member.radius) * (1.0 - contact_slack);
            let angle = rng.uniform(0.0, TAU);
            pos = (pos.0 + d * angle.cos(), pos.1 + d * angle.sin());
        }
        out.push(Instance {
            template: member.template.clone(),
            center: [pos.0, pos.1, 0.0],
            scale: member.scale,
            rotation: rng.uniform(0.0, TAU),
        });
    }
    Ok(out)
}

fn pick_weighted(weights: &[f64], rng: &mut Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.unit() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn pick_count(range: [u32; 2], rng: &mut Rng) -> u32 {
    let span = u64::from(range[1] - range[0]) + 1;
    range[0] + ((rng.unit() * span as f64) as u64).min(span - 1) as u32
}

/// Builds one scene. Every random decision comes from a labelled fork of
/// `rng`, so the result depends only on `(recipe, rng lineage)`.
pub fn build_scene(recipe: &Recipe, rng: &Rng) -> Result<SceneSpec> {
    recipe.validate()?;
    let count = pick_count(recipe.count, &mut rng.fork("count")) as usize;
    let dist = sample_distribution(
        count,
        recipe.extent,
        recipe.min_separation,
        (recipe.zoom[0], recipe.zoom[1]),
        &mut rng.fork("distribution"),
    )?;

    let mut template_rng = rng.fork("templates");
    let mut scale_rng = rng.fork("scale");
    let mut rotation_rng = rng.fork("rotation");
    let mut cluster_rng = rng.fork("cluster");
    let (log_lo, log_hi) = (recipe.scale[0].ln(), recipe.scale[1].ln());
    let draw_member = |template_rng: &mut Rng, scale_rng: &mut Rng| {
        let t = &recipe.templates[pick_weighted(&recipe.weights, template_rng)];
        let scale = scale_rng.uniform(log_lo, log_hi).exp();
        ClusterMember {
            template: t.id.clone(),
            scale,
            radius: t.shape.bounding_radius() * scale,
        }
    };
    let depth_of = |id: &str| {
        recipe
            .templates
            .iter()
            .find(|t| t.id == id)
            .map(|t| t.shape.depth_below_origin())
            .unwrap_or(0.0)
    };

    let agg = &recipe.agglomeration;
    let mut instances = Vec::new();
    for (i, c) in dist.centers.iter().enumerate() {
        let sink = c[2] * recipe.max_sink;
        let clustered = agg.cluster_probability > 0.0 && cluster_rng.unit() < agg.cluster_probability;
        let group = if clustered {
            let k = pick_count(agg.cluster_size, &mut cluster_rng) as usize;
            let members: Vec<ClusterMember> = (0..k)
                .map(|_| draw_member(&mut template_rng, &mut scale_rng))
                .collect();
            agglomerate(
                &members,
                k,
                agg.contact_slack,
                &mut rng.fork(&format!("cluster/{i}")),
            )?
        } else {
            let m = draw_member(&mut template_rng, &mut scale_rng);
            vec![Instance {
                template: m.template,
                center: [0.0; 3],
                scale: m.scale,
                rotation: rotation_rng.uniform(0.0, TAU),
            }]
        };
        for mut inst in group {
            let x = c[0] + inst.center[0];
            let y = c[1] + inst.center[1];
            if !(0.0..=recipe.extent).contains(&x) || !(0.0..=recipe.extent).contains(&y) {
                continue;
            }
            let depth = depth_of(&inst.template) * inst.scale;
            inst.center = [x, y, depth * (1.0 - 2.0 * sink)];
            instances.push(inst);
        }
    }

    let brightness = rng
        .fork("light")
        .uniform(recipe.brightness[0], recipe.brightness[1]);
    let dirt_enabled = recipe.dirt_probability > 0.0 && rng.fork("dirt").unit() < recipe.dirt_probability;

    let scene = SceneSpec {
        substrate: Substrate {
            extent: recipe.extent,
            albedo: recipe.substrate_albedo,
        },
        templates: recipe.templates.clone(),
        instances,
        light: Light {
            direction: Vec3::from_array(recipe.light_direction)
                .normalized()
                .to_array(),
            brightness,
        },
        camera: Camera {
            crop: dist.crop,
            resolution: recipe.resolution,
        },
        dirt: DirtSpec {
            enabled: dirt_enabled,
            params: recipe.dirt.clone(),
        },
        seed: rng.master(),
        lineage: rng.lineage().to_vec(),
    };
    scene.validate()?;
    Ok(scene)
}
