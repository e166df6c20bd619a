//! Watertight stock blocks with features subtracted by boundary stitching.
//!
//! Each feature surface is generated in the stock frame with its open
//! boundary lying on the stock faces. A stock face is then rebuilt as the
//! planar region bounded by its square outline and the reversed feature
//! boundary edges on it, and triangulated without extra vertices.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::classes::{self, Tess, STOCK};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::planar::{triangulate_rings, P2};
use crate::mesh::{EdgeAdjacency, TriangleMesh};

const S: f64 = STOCK;

/// A stock block and, per face, the index of the feature it belongs to.
#[derive(Debug, Clone)]
pub struct GeneratedBlock {
    pub mesh: TriangleMesh,
    /// `None` for stock faces, otherwise an index into `classes`.
    pub face_feature: Vec<Option<usize>>,
    /// Class id of each placed feature.
    pub classes: Vec<usize>,
}

impl GeneratedBlock {
    /// Face indices of feature `k`, ascending.
    pub fn feature_faces(&self, k: usize) -> Vec<usize> {
        (0..self.face_feature.len())
            .filter(|&f| self.face_feature[f] == Some(k))
            .collect()
    }
}

/// Position and size of one feature on the top face of the stock. Sizes
/// are in stock units: `size[0]` is the diameter of holes and the width of
/// slots; `depth` is ignored by through features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub class: usize,
    pub center: [f64; 2],
    pub size: [f64; 2],
    pub depth: f64,
}

/// Classes that [`gen_block_with_features`] can place.
pub const PLACEABLE: [usize; 5] = [1, 2, 10, 4, 7];

impl Placement {
    /// Top-face footprint `[xlo, ylo, xhi, yhi]`.
    fn footprint(&self) -> [f64; 4] {
        let [cx, cy] = self.center;
        let (hx, hy) = match self.class {
            1 | 2 => (0.5 * self.size[0], 0.5 * self.size[0]),
            _ => (0.5 * self.size[0], 0.5 * self.size[1]),
        };
        if self.class == 7 {
            [cx - hx, 0.0, cx + hx, S]
        } else {
            [cx - hx, cy - hy, cx + hx, cy + hy]
        }
    }

    fn check(&self) -> Result<()> {
        if !PLACEABLE.contains(&self.class) {
            return Err(Error::Placement(format!("class {} cannot be placed on a block", self.class)));
        }
        let [x0, y0, x1, y1] = self.footprint();
        let blind = matches!(self.class, 2 | 10 | 7);
        let ok_xy = x0 > 0.0 && x1 < S && x1 > x0 && y1 > y0 && (self.class == 7 || (y0 > 0.0 && y1 < S));
        if !ok_xy || (blind && !(self.depth > 0.0 && self.depth < S)) {
            return Err(Error::Placement(format!("{self:?} does not fit inside the stock")));
        }
        Ok(())
    }

    fn surface(&self, tess: Tess, phase: f64) -> Result<TriangleMesh> {
        let [x0, y0, x1, y1] = self.footprint();
        match self.class {
            1 => classes::hole(self.center, 0.5 * self.size[0], None, tess, phase),
            2 => classes::hole(self.center, 0.5 * self.size[0], Some(self.depth), tess, phase),
            4 => classes::rectangle([x0, y0], [x1, y1], None, tess.rows),
            10 => classes::rectangle([x0, y0], [x1, y1], Some(self.depth), tess.rows),
            _ => classes::through_slot(x0, x1, self.depth),
        }
    }
}

/// Builds a block with the given features cut into the top face.
/// Footprints must lie inside the stock and must not touch each other.
pub fn gen_block_with_features(features: &[Placement], rng: &mut dyn RngCore) -> Result<GeneratedBlock> {
    for p in features {
        p.check()?;
    }
    for i in 0..features.len() {
        for j in i + 1..features.len() {
            let (a, b) = (features[i].footprint(), features[j].footprint());
            if a[0] <= b[2] && b[0] <= a[2] && a[1] <= b[3] && b[1] <= a[3] {
                return Err(Error::Placement(format!("features {i} and {j} overlap")));
            }
        }
    }
    let mut surfaces = Vec::with_capacity(features.len());
    for p in features {
        let tess = Tess {
            segments: rng.gen_range(24..=64),
            rows: rng.gen_range(1..=3),
        };
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        surfaces.push(p.surface(tess, phase)?);
    }
    let classes = features.iter().map(|p| p.class).collect();
    assemble(&surfaces, classes)
}

/// A `n x n` grid of through holes of diameter `0.5 S / n`.
pub fn through_hole_grid(n: usize) -> Vec<Placement> {
    let pitch = S / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(Placement {
                class: 1,
                center: [(i as f64 + 0.5) * pitch, (j as f64 + 0.5) * pitch],
                size: [0.5 * pitch, 0.5 * pitch],
                depth: 0.0,
            });
        }
    }
    out
}

/// Stock face: outward axis and side, plus its in-plane `(u, v)` axes with
/// `u x v` equal to the outward normal.
#[derive(Clone, Copy)]
struct StockFace {
    axis: usize,
    high: bool,
    u: usize,
    v: usize,
}

const STOCK_FACES: [StockFace; 6] = [
    StockFace { axis: 0, high: false, u: 2, v: 1 },
    StockFace { axis: 0, high: true, u: 1, v: 2 },
    StockFace { axis: 1, high: false, u: 0, v: 2 },
    StockFace { axis: 1, high: true, u: 2, v: 0 },
    StockFace { axis: 2, high: false, u: 1, v: 0 },
    StockFace { axis: 2, high: true, u: 0, v: 1 },
];

impl StockFace {
    fn level(&self) -> f64 {
        if self.high {
            S
        } else {
            0.0
        }
    }

    fn holds(&self, p: &Vec3) -> bool {
        p[self.axis] == self.level()
    }

    fn uv(&self, p: &Vec3) -> P2 {
        [p[self.u], p[self.v]]
    }

    /// Counter-clockwise perimeter parameter of a point on the square
    /// outline, or `None` if it is strictly inside.
    fn perimeter(&self, p: &Vec3) -> Option<f64> {
        let [u, v] = self.uv(p);
        if v == 0.0 {
            Some(u)
        } else if u == S {
            Some(S + v)
        } else if v == S {
            Some(3.0 * S - u)
        } else if u == 0.0 {
            Some(4.0 * S - v)
        } else {
            None
        }
    }

    fn corners(&self) -> [Vec3; 4] {
        [[0.0, 0.0], [S, 0.0], [S, S], [0.0, S]].map(|[u, v]| {
            let mut p = Vec3::zeros();
            p[self.axis] = self.level();
            p[self.u] = u;
            p[self.v] = v;
            p
        })
    }
}

/// Stitches feature surfaces (stock frame, disjoint) into a closed block.
pub(crate) fn assemble(features: &[TriangleMesh], classes: Vec<usize>) -> Result<GeneratedBlock> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut face_feature = Vec::new();
    // Reversed boundary edges, i.e. as the neighbouring stock face runs them.
    let mut rim: Vec<(usize, usize)> = Vec::new();
    for (k, m) in features.iter().enumerate() {
        let base = vertices.len();
        vertices.extend_from_slice(m.vertices());
        let adj = EdgeAdjacency::build(m);
        for e in adj.boundary_edges() {
            let f = m.faces()[e.faces[0]];
            let (a, b) = e.vertices;
            let forward = (0..3).any(|i| f[i] == a && f[(i + 1) % 3] == b);
            let (a, b) = if forward { (a, b) } else { (b, a) };
            rim.push((b + base, a + base));
        }
        faces.extend(m.faces().iter().map(|f| f.map(|i| i + base)));
        face_feature.extend(std::iter::repeat_n(Some(k), m.face_count()));
    }

    let mut corner_ids: HashMap<[u64; 3], usize> = HashMap::new();
    let rim_vertices: Vec<usize> = {
        let mut v: Vec<usize> = rim.iter().flat_map(|&(a, b)| [a, b]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };

    for sf in &STOCK_FACES {
        let on_face: Vec<(usize, usize)> = rim
            .iter()
            .copied()
            .filter(|&(a, b)| sf.holds(&vertices[a]) && sf.holds(&vertices[b]))
            .collect();

        // Square outline split at every rim vertex lying on it.
        let mut outline: Vec<(f64, usize)> = Vec::new();
        for c in sf.corners() {
            let key = c.map(f64::to_bits);
            let id = *corner_ids.entry([key.x, key.y, key.z]).or_insert_with(|| {
                vertices.push(c);
                vertices.len() - 1
            });
            outline.push((sf.perimeter(&c).unwrap(), id));
        }
        for &v in &rim_vertices {
            if sf.holds(&vertices[v]) {
                if let Some(t) = sf.perimeter(&vertices[v]) {
                    outline.push((t, v));
                }
            }
        }
        outline.sort_by(|a, b| a.0.total_cmp(&b.0));
        if outline.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Invariant("two outline vertices coincide on a stock face".into()));
        }

        let departs = |v: usize| on_face.iter().any(|&(a, _)| a == v);
        let arrives = |v: usize| on_face.iter().any(|&(_, b)| b == v);
        let mut kept = outline
            .iter()
            .find_map(|&(_, v)| {
                if departs(v) {
                    Some(true)
                } else if arrives(v) {
                    Some(false)
                } else {
                    None
                }
            })
            .unwrap_or(true);
        let mut next: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let n = outline.len();
        for i in 0..n {
            let v = outline[i].1;
            if departs(v) && arrives(v) {
                return Err(Error::Invariant("feature rim touches the stock outline twice at one vertex".into()));
            }
            if arrives(v) {
                kept = true;
            } else if departs(v) {
                kept = false;
            }
            if kept {
                next.entry(v).or_default().push(outline[(i + 1) % n].1);
            }
        }
        for &(a, b) in &on_face {
            next.entry(a).or_default().push(b);
        }

        let rings = trace_rings(next)?;
        let flat: Vec<Vec<P2>> = rings
            .iter()
            .map(|r| r.iter().map(|&i| sf.uv(&vertices[i])).collect())
            .collect();
        let ids: Vec<usize> = rings.iter().flatten().copied().collect();
        for t in triangulate_rings(&flat)? {
            faces.push(t.map(|i| ids[i]));
            face_feature.push(None);
        }
    }

    // Stock corners cut away by a feature are left unreferenced.
    let mesh = TriangleMesh::new(vertices, faces)?.compact();
    let adj = EdgeAdjacency::build(&mesh);
    if !adj.is_closed_manifold() || !mesh.is_consistently_oriented() {
        return Err(Error::Invariant("assembled block is not a closed oriented surface".into()));
    }
    Ok(GeneratedBlock {
        mesh,
        face_feature,
        classes,
    })
}

/// Splits a successor map with one out- and one in-edge per vertex into
/// closed rings.
fn trace_rings(mut next: BTreeMap<usize, Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    if next.values().any(|s| s.len() != 1) {
        return Err(Error::Invariant("stock face outline branches".into()));
    }
    let mut rings = Vec::new();
    while let Some((&start, _)) = next.iter().next() {
        let mut ring = vec![start];
        let mut cur = next.remove(&start).unwrap()[0];
        while cur != start {
            ring.push(cur);
            cur = next
                .remove(&cur)
                .ok_or_else(|| Error::Invariant("stock face outline is not closed".into()))?[0];
        }
        rings.push(ring);
    }
    Ok(rings)
}

/// A block holding one feature of any class, generated as by
/// [`super::gen_feature_surface`] but without the rigid motion.
pub fn gen_single_feature_block(class: usize, spec: &super::GenSpec, rng: &mut dyn RngCore) -> Result<GeneratedBlock> {
    let surface = super::stock_frame_surface(class, spec, rng)?;
    assemble(&[surface], vec![class])
}
