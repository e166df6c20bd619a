//! Incremental construction of oriented triangle surfaces.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::planar::{triangulate_rings, P2};
use crate::mesh::TriangleMesh;

/// Collects vertices (shared by exact coordinates) and triangles whose
/// winding is chosen from a caller-supplied outward direction.
#[derive(Default)]
pub(crate) struct SurfaceBuilder {
    vertices: Vec<Vec3>,
    index: HashMap<[u64; 3], usize>,
    faces: Vec<[usize; 3]>,
}

impl SurfaceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, p: Vec3) -> usize {
        // Normalise -0.0 so that it shares a slot with 0.0.
        let key = [p.x + 0.0, p.y + 0.0, p.z + 0.0].map(f64::to_bits);
        let n = self.vertices.len();
        *self.index.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            n
        })
    }

    pub fn point(&self, i: usize) -> Vec3 {
        self.vertices[i]
    }

    /// Adds a triangle wound so its normal has a positive component along
    /// `outward`. Triangles with repeated indices are skipped.
    pub fn tri(&mut self, a: usize, b: usize, c: usize, outward: Vec3) {
        if a == b || b == c || a == c {
            return;
        }
        let n = (self.vertices[b] - self.vertices[a]).cross(&(self.vertices[c] - self.vertices[a]));
        if n.dot(&outward) >= 0.0 {
            self.faces.push([a, b, c]);
        } else {
            self.faces.push([a, c, b]);
        }
    }

    /// Adds the quad `a b c d` (in cyclic order) as two triangles.
    pub fn quad(&mut self, a: usize, b: usize, c: usize, d: usize, outward: Vec3) {
        self.tri(a, b, c, outward);
        self.tri(a, c, d, outward);
    }

    /// Strip between two parallel vertex rows of equal length. `closed`
    /// joins the last column back to the first. `outward` receives the
    /// quad's four corners.
    pub fn strip(&mut self, lower: &[usize], upper: &[usize], closed: bool, outward: impl Fn(&[Vec3; 4]) -> Vec3) {
        debug_assert_eq!(lower.len(), upper.len());
        let n = lower.len();
        let cols = if closed { n } else { n - 1 };
        for k in 0..cols {
            let k1 = (k + 1) % n;
            let q = [lower[k], lower[k1], upper[k1], upper[k]];
            let dir = outward(&q.map(|i| self.vertices[i]));
            self.quad(q[0], q[1], q[2], q[3], dir);
        }
    }

    /// Triangulates the planar region bounded by `rings` (even-odd rule)
    /// with normals along `normal`, using no vertices beyond the rings.
    pub fn planar(&mut self, rings: &[Vec<usize>], normal: Vec3) -> Result<()> {
        let n = normal.normalize();
        let u = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let u = (u - n * n.dot(&u)).normalize();
        let v = n.cross(&u);
        let flat: Vec<Vec<P2>> = rings
            .iter()
            .map(|r| r.iter().map(|&i| [self.vertices[i].dot(&u), self.vertices[i].dot(&v)]).collect())
            .collect();
        let ids: Vec<usize> = rings.iter().flatten().copied().collect();
        for t in triangulate_rings(&flat)? {
            self.tri(ids[t[0]], ids[t[1]], ids[t[2]], n);
        }
        Ok(())
    }

    /// Vertices of the rows `z = levels[r]` over the profile points `(x, y)`.
    pub fn extrude_columns(&mut self, profile: &[[f64; 2]], levels: &[f64]) -> Vec<Vec<usize>> {
        levels
            .iter()
            .map(|&z| profile.iter().map(|p| self.vertex(Vec3::new(p[0], p[1], z))).collect())
            .collect()
    }

    pub fn finish(self) -> Result<TriangleMesh> {
        if self.faces.is_empty() {
            return Err(Error::Invariant("generated surface has no faces".into()));
        }
        TriangleMesh::new(self.vertices, self.faces).map(TriangleMesh::compact)
    }
}

/// `rows + 1` evenly spaced levels from `z0` to `z1`, with exact endpoints.
pub(crate) fn levels(z0: f64, z1: f64, rows: usize) -> Vec<f64> {
    (0..=rows)
        .map(|r| match r {
            0 => z0,
            r if r == rows => z1,
            r => z0 + (z1 - z0) * r as f64 / rows as f64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::EdgeAdjacency;

    #[test]
    fn shared_vertices_and_orientation() {
        let mut b = SurfaceBuilder::new();
        let ring: Vec<usize> = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
            .iter()
            .map(|p| b.vertex(Vec3::new(p[0], p[1], 0.0)))
            .collect();
        assert_eq!(b.vertex(Vec3::new(-0.0, 0.0, 0.0)), ring[0]);
        b.planar(&[ring], -Vec3::z()).unwrap();
        let m = b.finish().unwrap();
        assert_eq!(m.face_count(), 2);
        for (n, _) in m.face_normals() {
            assert!(n.z < 0.0);
        }
    }

    #[test]
    fn closed_strip_is_a_tube() {
        let mut b = SurfaceBuilder::new();
        let profile: Vec<[f64; 2]> = (0..12)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 12.0;
                [t.cos(), t.sin()]
            })
            .collect();
        let rows = b.extrude_columns(&profile, &levels(0.0, 2.0, 3));
        for w in rows.windows(2) {
            b.strip(&w[0], &w[1], true, |q| {
                let c = (q[0] + q[1] + q[2] + q[3]) / 4.0;
                -Vec3::new(c.x, c.y, 0.0)
            });
        }
        let m = b.finish().unwrap();
        assert_eq!(m.face_count(), 12 * 3 * 2);
        assert!(m.is_consistently_oriented());
        assert_eq!(EdgeAdjacency::build(&m).boundary_edges().count(), 24);
        for f in 0..m.face_count() {
            let (n, _) = m.face_normals()[f];
            let c = m.face_centroid(f);
            assert!(n.dot(&Vec3::new(c.x, c.y, 0.0)) < 0.0);
        }
    }
}
