//! Indexed triangle meshes and the geometric primitives built on them.

mod adjacency;
mod ball;
mod components;
mod curvature;
mod hull;
pub mod io;
pub(crate) mod planar;

use std::sync::OnceLock;

pub use adjacency::{Edge, EdgeAdjacency};
pub use ball::bounding_ball_radius;
pub use components::connected_components;
pub(crate) use curvature::classify_with_eps;
pub use curvature::{classify_edge_concavity, vertex_angle_deficit, Concavity, CurvatureField};
pub use hull::convex_hull;

use crate::error::{Error, Result};
use crate::geom::{triangle_cross, Vec3};

/// Relative area threshold: faces below `AREA_EPS * diag²` are degenerate.
pub const AREA_EPS: f64 = 1e-12;
/// Relative welding distance.
pub const WELD_EPS: f64 = 1e-9;
/// Absolute angle tolerance in radians.
pub const ANGLE_EPS: f64 = 1e-8;
/// Relative distance tolerance for planarity and concavity tests.
pub const PLANE_EPS: f64 = 1e-9;

/// An indexed triangle mesh with CCW faces (outward normals).
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    normals: OnceLock<Vec<(Vec3, f64)>>,
}

/// Counts reported by [`TriangleMesh::clean`] and the loaders.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CleanReport {
    pub dropped_degenerate: usize,
    pub welded_vertices: usize,
}

impl TriangleMesh {
    /// Builds a mesh, checking index bounds and coordinate finiteness.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh(format!("vertex {i} has a non-finite coordinate")));
        }
        let n = vertices.len();
        if let Some(f) = faces.iter().position(|f| f.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidMesh(format!(
                "face {f} references a vertex out of range ({n} vertices)"
            )));
        }
        Ok(Self::from_parts_unchecked(vertices, faces))
    }

    pub(crate) fn from_parts_unchecked(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        Self {
            vertices,
            faces,
            normals: OnceLock::new(),
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn into_parts(self) -> (Vec<Vec3>, Vec<[usize; 3]>) {
        (self.vertices, self.faces)
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Axis-aligned bounds, or `None` for a mesh without vertices.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        bounds_of(&self.vertices)
    }

    /// Length of the bounding-box diagonal (0 for an empty mesh).
    pub fn diagonal(&self) -> f64 {
        self.bounds().map_or(0.0, |(lo, hi)| (hi - lo).norm())
    }

    pub fn area_eps(&self) -> f64 {
        let d = self.diagonal();
        AREA_EPS * d * d
    }

    pub fn plane_eps(&self) -> f64 {
        PLANE_EPS * self.diagonal()
    }

    /// Cached per-face unit normal and area. Degenerate faces get a zero normal.
    pub fn face_normals(&self) -> &[(Vec3, f64)] {
        self.normals.get_or_init(|| {
            self.faces
                .iter()
                .map(|&[a, b, c]| {
                    let cr = triangle_cross(&self.vertices[a], &self.vertices[b], &self.vertices[c]);
                    let len = cr.norm();
                    if len > 0.0 {
                        (cr / len, 0.5 * len)
                    } else {
                        (Vec3::zeros(), 0.0)
                    }
                })
                .collect()
        })
    }

    /// Unit normal and area of one face.
    pub fn facet_normal_area(&self, face: usize) -> Result<(Vec3, f64)> {
        let (n, area) = *self
            .face_normals()
            .get(face)
            .ok_or_else(|| Error::InvalidMesh(format!("face {face} out of range")))?;
        if area <= self.area_eps() || area == 0.0 {
            return Err(Error::DegenerateFace(face));
        }
        Ok((n, area))
    }

    pub fn face_centroid(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (a + b + c) / 3.0
    }

    pub fn total_area(&self) -> f64 {
        self.face_normals().iter().map(|(_, a)| a).sum()
    }

    /// Drops faces whose area is below the degeneracy tolerance (including
    /// faces with repeated vertex indices) and unreferenced vertices.
    pub fn clean(self) -> (Self, CleanReport) {
        let eps = self.area_eps();
        let normals = self.face_normals();
        let keep: Vec<[usize; 3]> = self
            .faces
            .iter()
            .zip(normals)
            .filter(|(f, (_, area))| {
                f[0] != f[1] && f[1] != f[2] && f[0] != f[2] && *area > eps && *area > 0.0
            })
            .map(|(f, _)| *f)
            .collect();
        let dropped = self.faces.len() - keep.len();
        let mesh = Self::from_parts_unchecked(self.vertices, keep).compact();
        (
            mesh,
            CleanReport {
                dropped_degenerate: dropped,
                welded_vertices: 0,
            },
        )
    }

    /// Removes unreferenced vertices, keeping the relative vertex order.
    pub fn compact(self) -> Self {
        let mut used = vec![false; self.vertices.len()];
        for f in &self.faces {
            for &i in f {
                used[i] = true;
            }
        }
        if used.iter().all(|&u| u) {
            return self;
        }
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if used[i] {
                remap[i] = vertices.len();
                vertices.push(*v);
            }
        }
        let faces = self
            .faces
            .iter()
            .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
            .collect();
        Self::from_parts_unchecked(vertices, faces)
    }

    /// Merges vertices closer than `WELD_EPS * diag` and drops faces that
    /// collapse. Vertices are visited in index order so the result is
    /// deterministic.
    pub fn weld(self) -> (Self, usize) {
        let tol = WELD_EPS * self.diagonal();
        let (vertices, remap) = weld_points(&self.vertices, tol);
        let welded = self.vertices.len() - vertices.len();
        let faces = self
            .faces
            .iter()
            .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
            .collect();
        (Self::from_parts_unchecked(vertices, faces), welded)
    }

    /// Applies `p -> rotation * p + translation` to every vertex.
    pub fn transformed(&self, rotation: &crate::geom::Mat3, translation: &Vec3) -> Self {
        let vertices = self
            .vertices
            .iter()
            .map(|v| rotation * v + translation)
            .collect();
        Self::from_parts_unchecked(vertices, self.faces.clone())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let vertices = self.vertices.iter().map(|v| v * factor).collect();
        Self::from_parts_unchecked(vertices, self.faces.clone())
    }

    /// Splits every face 4-to-1 at edge midpoints.
    pub fn subdivided(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut mids = std::collections::HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                vertices.push((vertices[a] + vertices[b]) * 0.5);
                vertices.len() - 1
            })
        };
        let mut faces = Vec::with_capacity(self.faces.len() * 4);
        for &[a, b, c] in &self.faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            faces.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        Self::from_parts_unchecked(vertices, faces)
    }

    /// Sub-mesh made of the given faces, with vertices re-indexed in order of
    /// their original index.
    pub fn submesh(&self, faces: &[usize]) -> Self {
        let picked: Vec<[usize; 3]> = faces.iter().map(|&f| self.faces[f]).collect();
        Self::from_parts_unchecked(self.vertices.clone(), picked).compact()
    }

    /// Concatenates meshes without welding.
    pub fn merge(meshes: &[&TriangleMesh]) -> Self {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for m in meshes {
            let base = vertices.len();
            vertices.extend_from_slice(&m.vertices);
            faces.extend(m.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
        }
        Self::from_parts_unchecked(vertices, faces)
    }

    /// True when no directed edge is used by two faces, i.e. neighbouring
    /// faces traverse their shared edge in opposite directions.
    pub fn is_consistently_oriented(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.faces.len() * 3);
        self.faces
            .iter()
            .all(|f| (0..3).all(|k| seen.insert((f[k], f[(k + 1) % 3]))))
    }

    /// Area-weighted vertex normals (zero for isolated vertices).
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut acc = vec![Vec3::zeros(); self.vertices.len()];
        for (f, (n, area)) in self.faces.iter().zip(self.face_normals()) {
            for &i in f {
                acc[i] += n * *area;
            }
        }
        acc.into_iter()
            .map(|v| {
                let len = v.norm();
                if len > 0.0 {
                    v / len
                } else {
                    v
                }
            })
            .collect()
    }
}

pub(crate) fn bounds_of(points: &[Vec3]) -> Option<(Vec3, Vec3)> {
    let first = points.first()?;
    Some(points.iter().fold((*first, *first), |(lo, hi), p| {
        (lo.inf(p), hi.sup(p))
    }))
}

/// Grid-hash welding. Returns the unique points and the old -> new index map.
pub(crate) fn weld_points(points: &[Vec3], tol: f64) -> (Vec<Vec3>, Vec<usize>) {
    use std::collections::HashMap;
    let cell = if tol > 0.0 { tol * 4.0 } else { 1.0 };
    let key = |p: &Vec3| -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut unique: Vec<Vec3> = Vec::new();
    let mut remap = Vec::with_capacity(points.len());
    for p in points {
        let (kx, ky, kz) = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &u in bucket {
                            if (unique[u] - p).norm() <= tol {
                                found = Some(u);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        let idx = match found {
            Some(u) => u,
            None => {
                unique.push(*p);
                grid.entry((kx, ky, kz)).or_default().push(unique.len() - 1);
                unique.len() - 1
            }
        };
        remap.push(idx);
    }
    (unique, remap)
}
