//! Triangle meshes for faceted particle templates, plus the placed-mesh
//! form used by the renderer (world-space triangles binned in a uniform
//! xy grid).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{intersect_triangle, Ray, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn validate(&self) -> Result<()> {
        if self.faces.is_empty() {
            return Err(Error::InvalidParameter("mesh has no faces".into()));
        }
        for (i, face) in self.faces.iter().enumerate() {
            if face.iter().any(|&v| v as usize >= self.vertices.len()) {
                return Err(Error::InvalidParameter(format!(
                    "face {i} references a missing vertex"
                )));
            }
            let [a, b, c] = face.map(|v| Vec3::from_array(self.vertices[v as usize]));
            if (b - a).cross(c - a).norm() <= 1e-12 {
                return Err(Error::InvalidParameter(format!("face {i} has zero area")));
            }
        }
        Ok(())
    }

    /// Largest vertex distance from the local origin.
    pub fn bounding_radius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|&v| Vec3::from_array(v).norm())
            .fold(0.0, f64::max)
    }

    /// Depth of the lowest vertex below the local origin.
    pub fn depth_below_origin(&self) -> f64 {
        self.vertices.iter().map(|v| -v[2]).fold(0.0, f64::max)
    }

    /// Closed faceted ellipsoid built from `slices` longitudes and `stacks` latitude bands.
    pub fn ellipsoid(radii: [f64; 3], slices: u32, stacks: u32) -> Self {
        assert!(slices >= 3 && stacks >= 2);
        let mut vertices = vec![[0.0, 0.0, radii[2]]];
        for i in 1..stacks {
            let phi = PI * f64::from(i) / f64::from(stacks);
            for j in 0..slices {
                let theta = 2.0 * PI * f64::from(j) / f64::from(slices);
                vertices.push([
                    radii[0] * phi.sin() * theta.cos(),
                    radii[1] * phi.sin() * theta.sin(),
                    radii[2] * phi.cos(),
                ]);
            }
        }
        vertices.push([0.0, 0.0, -radii[2]]);
        let bottom = vertices.len() as u32 - 1;
        let ring = |i: u32, j: u32| 1 + (i - 1) * slices + (j % slices);
        let mut faces = Vec::new();
        for j in 0..slices {
            faces.push([0, ring(1, j), ring(1, j + 1)]);
        }
        for i in 1..stacks - 1 {
            for j in 0..slices {
                faces.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
                faces.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
            }
        }
        for j in 0..slices {
            faces.push([ring(stacks - 1, j), bottom, ring(stacks - 1, j + 1)]);
        }
        Self { vertices, faces }
    }

    /// Double pyramid over a regular `sides`-gon.
    pub fn bipyramid(sides: u32, radius: f64, half_height: f64) -> Self {
        assert!(sides >= 3);
        let mut vertices = vec![[0.0, 0.0, half_height], [0.0, 0.0, -half_height]];
        for j in 0..sides {
            let theta = 2.0 * PI * f64::from(j) / f64::from(sides);
            vertices.push([radius * theta.cos(), radius * theta.sin(), 0.0]);
        }
        let rim = |j: u32| 2 + (j % sides);
        let mut faces = Vec::new();
        for j in 0..sides {
            faces.push([0, rim(j), rim(j + 1)]);
            faces.push([1, rim(j + 1), rim(j)]);
        }
        Self { vertices, faces }
    }

    /// Axis-aligned box with the given half extents.
    pub fn cuboid(half: [f64; 3]) -> Self {
        let [hx, hy, hz] = half;
        let vertices = vec![
            [-hx, -hy, -hz],
            [hx, -hy, -hz],
            [hx, hy, -hz],
            [-hx, hy, -hz],
            [-hx, -hy, hz],
            [hx, -hy, hz],
            [hx, hy, hz],
            [-hx, hy, hz],
        ];
        let faces = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        Self { vertices, faces }
    }
}

/// Mesh placed in world space with an xy binning grid for vertical rays.
#[derive(Clone, Debug)]
pub struct PlacedMesh {
    triangles: Vec<[Vec3; 3]>,
    normals: Vec<Vec3>,
    min: (f64, f64),
    max: (f64, f64),
    cell: (f64, f64),
    cells_x: usize,
    cells_y: usize,
    bins: Vec<Vec<u32>>,
}

/// Nearest mesh hit: ray parameter and face index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshHit {
    pub t: f64,
    pub face: usize,
}

impl PlacedMesh {
    /// Scales, rotates about z, then translates the template mesh.
    pub fn new(mesh: &TriangleMesh, center: Vec3, scale: f64, rotation: f64) -> Self {
        let world: Vec<Vec3> = mesh
            .vertices
            .iter()
            .map(|&v| (Vec3::from_array(v) * scale).rotate_z(rotation) + center)
            .collect();
        let triangles: Vec<[Vec3; 3]> = mesh
            .faces
            .iter()
            .map(|f| f.map(|i| world[i as usize]))
            .collect();
        let normals = triangles
            .iter()
            .map(|[a, b, c]| (*b - *a).cross(*c - *a).normalized())
            .collect();

        let (mut lo_x, mut lo_y) = (f64::INFINITY, f64::INFINITY);
        let (mut hi_x, mut hi_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &world {
            lo_x = lo_x.min(v.x);
            lo_y = lo_y.min(v.y);
            hi_x = hi_x.max(v.x);
            hi_y = hi_y.max(v.y);
        }
        let side = ((triangles.len() as f64).sqrt().ceil() as usize).clamp(1, 64);
        let cell = (
            ((hi_x - lo_x) / side as f64).max(1e-12),
            ((hi_y - lo_y) / side as f64).max(1e-12),
        );
        let mut placed = Self {
            triangles,
            normals,
            min: (lo_x, lo_y),
            max: (hi_x, hi_y),
            cell,
            cells_x: side,
            cells_y: side,
            bins: vec![Vec::new(); side * side],
        };
        for (i, tri) in placed.triangles.iter().enumerate() {
            let (x0, x1) = (
                tri.iter().map(|v| v.x).fold(f64::INFINITY, f64::min),
                tri.iter().map(|v| v.x).fold(f64::NEG_INFINITY, f64::max),
            );
            let (y0, y1) = (
                tri.iter().map(|v| v.y).fold(f64::INFINITY, f64::min),
                tri.iter().map(|v| v.y).fold(f64::NEG_INFINITY, f64::max),
            );
            let (cx0, cy0) = placed.cell_of(x0, y0);
            let (cx1, cy1) = placed.cell_of(x1, y1);
            for cy in cy0..=cy1 {
                for cx in cx0..=cx1 {
                    placed.bins[cy * placed.cells_x + cx].push(i as u32);
                }
            }
        }
        placed
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let cx = ((x - self.min.0) / self.cell.0).floor();
        let cy = ((y - self.min.1) / self.cell.1).floor();
        (
            (cx.max(0.0) as usize).min(self.cells_x - 1),
            (cy.max(0.0) as usize).min(self.cells_y - 1),
        )
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    /// Unit face normal (counter-clockwise winding).
    pub fn normal(&self, face: usize) -> Vec3 {
        self.normals[face]
    }

    fn nearest<I: Iterator<Item = usize>>(&self, ray: &Ray, faces: I) -> Option<MeshHit> {
        let mut best: Option<MeshHit> = None;
        for face in faces {
            let [a, b, c] = self.triangles[face];
            if let Some(t) = intersect_triangle(ray, a, b, c) {
                let better = match best {
                    None => true,
                    Some(h) => t < h.t || (t == h.t && face < h.face),
                };
                if better {
                    best = Some(MeshHit { t, face });
                }
            }
        }
        best
    }

    /// Tests every face.
    pub fn intersect_brute(&self, ray: &Ray) -> Option<MeshHit> {
        self.nearest(ray, 0..self.triangles.len())
    }

    /// Grid-accelerated for vertical rays, exhaustive otherwise.
    pub fn intersect(&self, ray: &Ray) -> Option<MeshHit> {
        if ray.dir.x != 0.0 || ray.dir.y != 0.0 {
            return self.intersect_brute(ray);
        }
        let (x, y) = (ray.origin.x, ray.origin.y);
        let outside = x < self.min.0 || y < self.min.1 || x > self.max.0 || y > self.max.1;
        if outside {
            return None;
        }
        let (cx, cy) = self.cell_of(x, y);
        self.nearest(
            ray,
            self.bins[cy * self.cells_x + cx].iter().map(|&f| f as usize),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_valid() {
        TriangleMesh::ellipsoid([2.0, 1.5, 1.0], 8, 5).validate().unwrap();
        TriangleMesh::bipyramid(6, 1.5, 1.2).validate().unwrap();
        TriangleMesh::cuboid([1.0, 0.8, 0.6]).validate().unwrap();
    }

    #[test]
    fn invalid_meshes_rejected() {
        let bad_index = TriangleMesh {
            vertices: vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            faces: vec![[0, 1, 3]],
        };
        assert!(bad_index.validate().is_err());
        let degenerate = TriangleMesh {
            vertices: vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            faces: vec![[0, 1, 2]],
        };
        assert!(degenerate.validate().is_err());
    }

    #[test]
    fn outward_normals_on_cuboid_top() {
        let placed = PlacedMesh::new(&TriangleMesh::cuboid([1.0, 1.0, 1.0]), Vec3::default(), 1.0, 0.0);
        let hit = placed.intersect(&Ray::vertical(0.3, 0.2, 5.0)).unwrap();
        assert!((hit.t - 4.0).abs() < 1e-12);
        assert!((placed.normal(hit.face).z - 1.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn grid_agrees_with_brute_force(
            radii in (0.5f64..3.0, 0.5f64..3.0, 0.3f64..2.0),
            slices in 3u32..24,
            stacks in 2u32..12,
            scale in 0.5f64..2.0,
            rotation in 0.0f64..6.3,
            rays in proptest::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 64),
        ) {
            let mesh = TriangleMesh::ellipsoid([radii.0, radii.1, radii.2], slices, stacks);
            proptest::prop_assume!(mesh.faces.len() <= 500);
            let placed = PlacedMesh::new(&mesh, Vec3::new(0.25, -0.5, 0.1), scale, rotation);
            for (x, y) in rays {
                let ray = Ray::vertical(x, y, 10.0);
                let (a, b) = (placed.intersect(&ray), placed.intersect_brute(&ray));
                proptest::prop_assert_eq!(a.map(|h| h.t), b.map(|h| h.t));
            }
        }
    }
}
