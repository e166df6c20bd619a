//! Feature isolation: open slots via hyperbolic edges and supporting planes,
//! and enclosed features via stock-face removal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::{
    connected_components, convex_hull, vertex_angle_deficit, Concavity, EdgeAdjacency,
    TriangleMesh,
};

/// Maximum deviation `|n_face - n_plane|` for a face to lie on a plane.
pub const NORMAL_EPS: f64 = 1e-6;
/// Point-plane distance tolerance, relative to the bounding-box diagonal.
pub const DIST_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    OpenSlot,
    StockRemoval,
    External,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::OpenSlot => "open-slot",
            Provenance::StockRemoval => "stock-removal",
            Provenance::External => "external",
        }
    }
}

/// A connected piece of a parent mesh (or a standalone surface) treated as
/// one candidate feature.
#[derive(Debug, Clone)]
pub struct FeatureSubmesh {
    faces: Vec<usize>,
    mesh: TriangleMesh,
    provenance: Provenance,
}

impl FeatureSubmesh {
    /// Materializes `faces` of `parent`. The face list is sorted and must be
    /// non-empty with positive total area.
    pub fn from_faces(parent: &TriangleMesh, mut faces: Vec<usize>, provenance: Provenance) -> Result<Self> {
        faces.sort_unstable();
        faces.dedup();
        if faces.is_empty() {
            return Err(Error::Invariant("feature with no faces".into()));
        }
        if let Some(&f) = faces.iter().find(|&&f| f >= parent.face_count()) {
            return Err(Error::Invariant(format!("feature face {f} not in parent")));
        }
        let mesh = parent.submesh(&faces);
        if mesh.total_area() <= 0.0 {
            return Err(Error::Invariant("feature with zero area".into()));
        }
        Ok(Self {
            faces,
            mesh,
            provenance,
        })
    }

    /// Wraps a standalone surface (for example a generated feature).
    pub fn external(mesh: TriangleMesh) -> Result<Self> {
        let n = mesh.face_count();
        Self::from_faces(&mesh, (0..n).collect(), Provenance::External)
    }

    /// Same face set, new geometry (used after a rigid transform).
    pub(crate) fn with_mesh(&self, mesh: TriangleMesh) -> Self {
        Self {
            faces: self.faces.clone(),
            mesh,
            provenance: self.provenance,
        }
    }

    pub fn faces(&self) -> &[usize] {
        &self.faces
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn area(&self) -> f64 {
        self.mesh.total_area()
    }
}

/// Hyperbolic vertices `V_H`, concave edges `E_C` and hyperbolic edges
/// `E_H` (concave edges joining two hyperbolic vertices). Edges are stored
/// as sorted vertex pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HyperbolicSet {
    pub vertices: Vec<usize>,
    pub concave_edges: Vec<(usize, usize)>,
    pub hyperbolic_edges: Vec<(usize, usize)>,
}

impl HyperbolicSet {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.concave_edges.is_empty()
    }
}

pub fn find_hyperbolic_set(mesh: &TriangleMesh) -> HyperbolicSet {
    find_hyperbolic_set_with(mesh, &EdgeAdjacency::build(mesh))
}

pub fn find_hyperbolic_set_with(mesh: &TriangleMesh, adj: &EdgeAdjacency) -> HyperbolicSet {
    let k = vertex_angle_deficit(mesh, adj);
    let vertices: Vec<usize> = (0..mesh.vertex_count()).filter(|&v| k.is_hyperbolic(v)).collect();
    let eps = mesh.plane_eps();
    let mut concave_edges = Vec::new();
    let mut hyperbolic_edges = Vec::new();
    for (id, e) in adj.edges().iter().enumerate() {
        if !e.is_manifold() {
            continue;
        }
        if crate::mesh::classify_with_eps(mesh, adj, id, eps).ok() == Some(Concavity::Concave) {
            concave_edges.push(e.vertices);
            if k.is_hyperbolic(e.vertices.0) && k.is_hyperbolic(e.vertices.1) {
                hyperbolic_edges.push(e.vertices);
            }
        }
    }
    HyperbolicSet {
        vertices,
        concave_edges,
        hyperbolic_edges,
    }
}

/// An oriented plane `normal · x = offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    fn same_as(&self, other: &Plane, dist_tol: f64) -> bool {
        (self.normal - other.normal).norm() <= NORMAL_EPS
            && (self.offset - other.offset).abs() <= dist_tol
    }

    /// Face lies on the plane: same orientation and all corners within tolerance.
    pub fn holds_face(&self, mesh: &TriangleMesh, face: usize, dist_tol: f64) -> bool {
        let (n, area) = mesh.face_normals()[face];
        if area <= 0.0 || (n - self.normal).norm() > NORMAL_EPS {
            return false;
        }
        mesh.faces()[face]
            .iter()
            .all(|&v| (self.normal.dot(&mesh.vertices()[v]) - self.offset).abs() <= dist_tol)
    }
}

/// Supporting planes of hyperbolic-edge faces and every face lying on one.
#[derive(Debug, Clone, Default)]
pub struct SupportingPlaneSet {
    pub planes: Vec<Plane>,
    pub faces: Vec<usize>,
}

pub fn collect_supporting_faces(mesh: &TriangleMesh, hset: &HyperbolicSet) -> SupportingPlaneSet {
    collect_supporting_faces_with(mesh, &EdgeAdjacency::build(mesh), hset)
}

fn collect_supporting_faces_with(
    mesh: &TriangleMesh,
    adj: &EdgeAdjacency,
    hset: &HyperbolicSet,
) -> SupportingPlaneSet {
    let tol = DIST_EPS * mesh.diagonal();
    let mut planes: Vec<Plane> = Vec::new();
    for &(a, b) in &hset.hyperbolic_edges {
        let Some(id) = adj.find(a, b) else { continue };
        for &f in &adj.edge(id).faces {
            let (n, area) = mesh.face_normals()[f];
            if area <= 0.0 {
                continue;
            }
            let p = Plane {
                normal: n,
                offset: n.dot(&mesh.face_centroid(f)),
            };
            if !planes.iter().any(|q| q.same_as(&p, tol)) {
                planes.push(p);
            }
        }
    }
    let faces = (0..mesh.face_count())
        .filter(|&f| planes.iter().any(|p| p.holds_face(mesh, f, tol)))
        .collect();
    SupportingPlaneSet { planes, faces }
}

/// The stock's box frame: three orthonormal axes and the six outward slab
/// planes (`+a0, -a0, +a1, -a1, +a2, -a2`).
#[derive(Debug, Clone)]
pub struct StockFrame {
    pub axes: [Vec3; 3],
    pub planes: [Plane; 6],
}

impl StockFrame {
    /// Face indices lying on any slab plane.
    pub fn stock_faces(&self, mesh: &TriangleMesh) -> Vec<bool> {
        let tol = DIST_EPS * mesh.diagonal();
        (0..mesh.face_count())
            .map(|f| self.planes.iter().any(|p| p.holds_face(mesh, f, tol)))
            .collect()
    }
}

struct Region {
    normal: Vec3,
    offset: f64,
    area: f64,
}

/// Box frame of a block model.
///
/// Axes come from the largest-area triple of mutually orthogonal pairs of
/// opposite planar regions on the convex hull, which stays exact for cubes
/// and for blocks whose corners have been cut away; a covariance box is the
/// fallback. Slab offsets are the extreme vertex projections.
pub fn stock_frame(mesh: &TriangleMesh) -> Option<StockFrame> {
    let axes = hull_face_axes(mesh).or_else(|| {
        crate::alignment::obb_of_points(mesh.vertices())
            .ok()
            .map(|b| b.axes)
    })?;
    let mut planes = [Plane {
        normal: Vec3::zeros(),
        offset: 0.0,
    }; 6];
    for (k, a) in axes.iter().enumerate() {
        let (lo, hi) = mesh
            .vertices()
            .iter()
            .map(|v| a.dot(v))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
        planes[2 * k] = Plane {
            normal: *a,
            offset: hi,
        };
        planes[2 * k + 1] = Plane {
            normal: -a,
            offset: -lo,
        };
    }
    Some(StockFrame { axes, planes })
}

fn hull_face_axes(mesh: &TriangleMesh) -> Option<[Vec3; 3]> {
    const REGION_TOL: f64 = 1e-6;
    const ORTHO_TOL: f64 = 1e-6;
    let hull = convex_hull(mesh.vertices()).ok()?;
    let dist_tol = REGION_TOL * hull.diagonal();
    let mut order: Vec<usize> = (0..hull.face_count()).collect();
    let normals = hull.face_normals();
    order.sort_by(|&a, &b| normals[b].1.total_cmp(&normals[a].1).then(a.cmp(&b)));
    let mut regions: Vec<Region> = Vec::new();
    for f in order {
        let (n, area) = normals[f];
        if area <= 0.0 {
            continue;
        }
        let off = n.dot(&hull.face_centroid(f));
        match regions
            .iter_mut()
            .find(|r| (r.normal - n).norm() <= REGION_TOL && (r.offset - off).abs() <= dist_tol)
        {
            Some(r) => r.area += area,
            None => regions.push(Region {
                normal: n,
                offset: off,
                area,
            }),
        }
    }
    // Opposite region pairs, keyed by the larger region's normal.
    let mut pairs: Vec<(Vec3, f64)> = Vec::new();
    for i in 0..regions.len() {
        for j in i + 1..regions.len() {
            if (regions[i].normal + regions[j].normal).norm() <= REGION_TOL {
                let (a, b) = (&regions[i], &regions[j]);
                let n = if a.area >= b.area { a.normal } else { -b.normal };
                pairs.push((n, a.area + b.area));
            }
        }
    }
    let ortho = |a: &Vec3, b: &Vec3| a.dot(b).abs() <= ORTHO_TOL;
    let mut best: Option<(f64, [usize; 3])> = None;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if !ortho(&pairs[i].0, &pairs[j].0) {
                continue;
            }
            for k in j + 1..pairs.len() {
                if ortho(&pairs[i].0, &pairs[k].0) && ortho(&pairs[j].0, &pairs[k].0) {
                    let score = pairs[i].1 + pairs[j].1 + pairs[k].1;
                    if best.is_none_or(|(s, _)| score > s) {
                        best = Some((score, [i, j, k]));
                    }
                }
            }
        }
    }
    let picked: Vec<Vec3> = match best {
        Some((_, idx)) => idx.iter().map(|&i| pairs[i].0).collect(),
        None => {
            // Two orthogonal pairs still fix the frame.
            let mut best2: Option<(f64, [usize; 2])> = None;
            for i in 0..pairs.len() {
                for j in i + 1..pairs.len() {
                    let score = pairs[i].1 + pairs[j].1;
                    if ortho(&pairs[i].0, &pairs[j].0) && best2.is_none_or(|(s, _)| score > s) {
                        best2 = Some((score, [i, j]));
                    }
                }
            }
            let (_, [i, j]) = best2?;
            vec![pairs[i].0, pairs[j].0, pairs[i].0.cross(&pairs[j].0)]
        }
    };
    // Gram-Schmidt in pick order.
    let a0 = picked[0].normalize();
    let a1 = (picked[1] - a0 * a0.dot(&picked[1])).normalize();
    let mut a2 = a0.cross(&a1);
    if a2.dot(&picked[2]) < 0.0 {
        a2 = -a2;
    }
    Some([a0, a1, a2])
}

/// Connected components of the supporting-plane faces, minus components
/// that lie entirely on the stock's slab planes.
pub fn extract_open_slots(mesh: &TriangleMesh) -> Vec<FeatureSubmesh> {
    let adj = EdgeAdjacency::build(mesh);
    let stock = stock_frame(mesh).map(|s| s.stock_faces(mesh));
    open_slots_with(mesh, &adj, stock.as_deref())
}

fn open_slots_with(
    mesh: &TriangleMesh,
    adj: &EdgeAdjacency,
    stock: Option<&[bool]>,
) -> Vec<FeatureSubmesh> {
    let hset = find_hyperbolic_set_with(mesh, adj);
    if hset.hyperbolic_edges.is_empty() {
        return Vec::new();
    }
    let support = collect_supporting_faces_with(mesh, adj, &hset);
    connected_components(mesh, adj, &support.faces)
        .into_iter()
        .filter(|c| !stock.is_some_and(|s| c.iter().all(|&f| s[f])))
        .filter_map(|c| FeatureSubmesh::from_faces(mesh, c, Provenance::OpenSlot).ok())
        .collect()
}

/// Components of the faces that do not lie on the stock's six slab planes.
pub fn extract_by_stock_removal(mesh: &TriangleMesh) -> Vec<FeatureSubmesh> {
    let adj = EdgeAdjacency::build(mesh);
    let stock = stock_frame(mesh).map(|s| s.stock_faces(mesh));
    stock_removal_with(mesh, &adj, stock.as_deref())
}

fn stock_removal_with(
    mesh: &TriangleMesh,
    adj: &EdgeAdjacency,
    stock: Option<&[bool]>,
) -> Vec<FeatureSubmesh> {
    let rest: Vec<usize> = (0..mesh.face_count())
        .filter(|&f| !stock.is_some_and(|s| s[f]))
        .collect();
    connected_components(mesh, adj, &rest)
        .into_iter()
        .filter_map(|c| FeatureSubmesh::from_faces(mesh, c, Provenance::StockRemoval).ok())
        .collect()
}

/// Open-slot and stock-removal features merged into disjoint face sets,
/// ordered by smallest face index.
///
/// Identical face sets keep the open-slot copy; overlapping sets keep the
/// one with more faces (the earlier one on equal counts).
pub fn extract_features(mesh: &TriangleMesh) -> Vec<FeatureSubmesh> {
    let adj = EdgeAdjacency::build(mesh);
    let stock = stock_frame(mesh).map(|s| s.stock_faces(mesh));
    let mut candidates = open_slots_with(mesh, &adj, stock.as_deref());
    candidates.extend(stock_removal_with(mesh, &adj, stock.as_deref()));
    merge_features(candidates)
}

pub(crate) fn merge_features(candidates: Vec<FeatureSubmesh>) -> Vec<FeatureSubmesh> {
    let mut kept: Vec<FeatureSubmesh> = Vec::new();
    'next: for cand in candidates {
        let mut i = 0;
        while i < kept.len() {
            let k = &kept[i];
            if k.faces == cand.faces {
                continue 'next;
            }
            if overlaps(&k.faces, &cand.faces) {
                if cand.faces.len() > k.faces.len() {
                    kept.remove(i);
                    continue;
                }
                continue 'next;
            }
            i += 1;
        }
        kept.push(cand);
    }
    kept.sort_by_key(|f| f.faces[0]);
    kept
}

fn overlaps(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}
