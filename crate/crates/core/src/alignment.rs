//! Pose normalization of feature surfaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::FeatureSubmesh;
use crate::geom::{
    rot_z, rotation_between, triangle_area, triangle_second_moment,
    triangle_third_moment, Mat3, Vec3,
};
use crate::mesh::{convex_hull, EdgeAdjacency, TriangleMesh};

/// Relative eigenvalue gap below which two covariance axes count as tied.
pub const EIGEN_TIE: f64 = 1e-6;
/// Relative difference below which two box extents count as equal.
pub const EXTENT_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedBoundingBox {
    pub center: Vec3,
    /// Orthonormal, right-handed, ordered by extent (descending).
    pub axes: [Vec3; 3],
    /// Half-lengths along `axes`.
    pub extents: [f64; 3],
}

/// OBB of a feature from the covariance of its convex hull surface.
pub fn obb_from_hull(feature: &FeatureSubmesh) -> OrientedBoundingBox {
    obb_of_mesh_vertices(feature.mesh())
}

fn obb_of_mesh_vertices(mesh: &TriangleMesh) -> OrientedBoundingBox {
    // Mesh construction guarantees at least one finite vertex for features.
    obb_of_points(mesh.vertices()).unwrap_or(OrientedBoundingBox {
        center: Vec3::zeros(),
        axes: [Vec3::x(), Vec3::y(), Vec3::z()],
        extents: [0.0; 3],
    })
}

/// OBB of a point set. Flat sets use the area covariance of their 2D hull
/// polygon; collinear sets take the line direction as the major axis.
pub fn obb_of_points(points: &[Vec3]) -> Result<OrientedBoundingBox> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no points for bounding box".into()));
    }
    let tris: Vec<[Vec3; 3]> = match convex_hull(points) {
        Ok(h) => (0..h.face_count()).map(|f| h.triangle(f)).collect(),
        Err(Error::Degenerate { dimension: 2 }) => planar_hull_fan(points),
        Err(Error::Degenerate { dimension: 1 }) => {
            let (a, b) = farthest_pair(points);
            let d = (b - a).normalize();
            let helper = if d.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            let u = d.cross(&helper).normalize();
            return Ok(finish_box(points, [d, u, d.cross(&u)]));
        }
        Err(Error::Degenerate { .. }) => {
            return Ok(finish_box(points, [Vec3::x(), Vec3::y(), Vec3::z()]));
        }
        Err(e) => return Err(e),
    };
    let cov = surface_covariance(&tris);
    Ok(finish_box(points, principal_axes(&cov)))
}

fn farthest_pair(points: &[Vec3]) -> (Vec3, Vec3) {
    let far = |from: &Vec3| {
        *points
            .iter()
            .max_by(|a, b| (*a - from).norm_squared().total_cmp(&(*b - from).norm_squared()))
            .unwrap()
    };
    let a = far(&points[0]);
    (a, far(&a))
}

/// Area covariance of a triangle set about its area centroid.
fn surface_covariance(tris: &[[Vec3; 3]]) -> Mat3 {
    let mut area = 0.0;
    let mut first = Vec3::zeros();
    let mut second = Mat3::zeros();
    for [a, b, c] in tris {
        let w = triangle_area(a, b, c);
        area += w;
        first += (a + b + c) * (w / 3.0);
        second += triangle_second_moment(a, b, c);
    }
    if area <= 0.0 {
        return Mat3::zeros();
    }
    let mean = first / area;
    second / area - mean * mean.transpose()
}

/// Fan triangulation of the 2D convex hull of coplanar points.
fn planar_hull_fan(points: &[Vec3]) -> Vec<[Vec3; 3]> {
    let mean = points.iter().sum::<Vec3>() / points.len() as f64;
    let mut cov = Mat3::zeros();
    for p in points {
        let d = p - mean;
        cov += d * d.transpose();
    }
    let eig = psd_eigen(&cov);
    let mut idx = [0, 1, 2];
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let u: Vec3 = eig.eigenvectors.column(idx[0]).into();
    let v: Vec3 = eig.eigenvectors.column(idx[1]).into();
    let mut pts: Vec<(f64, f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (u.dot(&(p - mean)), v.dot(&(p - mean)), i))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    // Andrew's monotone chain.
    let cross = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64, usize)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64, usize)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    (1..hull.len().saturating_sub(1))
        .map(|k| [hull[0], hull[k], hull[k + 1]].map(|q| points[q.2]))
        .collect()
}

struct Eigen {
    eigenvalues: Vec3,
    eigenvectors: Mat3,
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi
/// rotations. nalgebra 0.33's symmetric solver and SVD both lose accuracy on
/// nearly diagonal input (eigenvector residuals up to 0.05), which is exactly
/// what re-aligning an aligned feature produces.
fn psd_eigen(m: &Mat3) -> Eigen {
    let mut a = *m;
    let mut v = Mat3::identity();
    for _ in 0..64 {
        let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        if off <= f64::EPSILON.powi(2) * a.norm_squared() || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[(p, q)] == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut g = Mat3::identity();
            g[(p, p)] = c;
            g[(q, q)] = c;
            g[(p, q)] = s;
            g[(q, p)] = -s;
            a = g.transpose() * a * g;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
            v *= g;
        }
    }
    Eigen {
        eigenvalues: Vec3::new(a[(0, 0)], a[(1, 1)], a[(2, 2)]),
        eigenvectors: v,
    }
}

/// Eigenvectors of a symmetric matrix, with tied eigenvalues resolved by
/// projecting the raw Z, X, Y axes (in that order) onto the tied subspace.
/// That order matches where alignment sends the major and middle axes, so
/// a tied feature that is already aligned keeps its pose.
/// Each returned vector has its largest-magnitude component positive.
fn principal_axes(cov: &Mat3) -> [Vec3; 3] {
    let eig = psd_eigen(cov);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs: Vec<Vec3> = idx.iter().map(|&i| eig.eigenvectors.column(i).into()).collect();
    let scale = vals[0].abs().max(f64::MIN_POSITIVE);
    let mut out: Vec<Vec3> = Vec::with_capacity(3);
    let mut i = 0;
    while i < 3 {
        let mut j = i + 1;
        while j < 3 && (vals[j - 1] - vals[j]).abs() <= EIGEN_TIE * scale {
            j += 1;
        }
        if j - i == 1 {
            out.push(vecs[i]);
        } else {
            let basis = &vecs[i..j];
            let mut chosen: Vec<Vec3> = Vec::new();
            for raw in [Vec3::z(), Vec3::x(), Vec3::y()] {
                if chosen.len() == j - i {
                    break;
                }
                let mut p: Vec3 = basis.iter().map(|b| b * b.dot(&raw)).sum();
                for c in &chosen {
                    p -= c * c.dot(&p);
                }
                if p.norm() > 1e-6 {
                    chosen.push(p.normalize());
                }
            }
            out.extend(chosen);
        }
        i = j;
    }
    let mut axes = [out[0], out[1], out[2]].map(canonical_sign);
    axes[2] = axes[0].cross(&axes[1]);
    axes
}

fn canonical_sign(v: Vec3) -> Vec3 {
    let k = v.iamax();
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// Extents from vertex projections; axes re-ordered by extent (stable, so
/// equal extents keep eigenvalue order) and made right-handed.
fn finish_box(points: &[Vec3], axes: [Vec3; 3]) -> OrientedBoundingBox {
    let mut spans: Vec<(Vec3, f64, f64)> = axes
        .iter()
        .map(|a| {
            let (lo, hi) = points
                .iter()
                .map(|p| a.dot(p))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
            (*a, lo, hi)
        })
        .collect();
    // Extents equal up to round-off keep the principal-axis order.
    let tol = EXTENT_TIE * spans.iter().map(|s| s.2 - s.1).fold(0.0, f64::max);
    spans.sort_by(|x, y| {
        let (ex, ey) = (x.2 - x.1, y.2 - y.1);
        if (ex - ey).abs() <= tol {
            std::cmp::Ordering::Equal
        } else {
            ey.total_cmp(&ex)
        }
    });
    let center = spans.iter().map(|(a, lo, hi)| a * (0.5 * (lo + hi))).sum();
    let mut ax = [spans[0].0, spans[1].0, spans[2].0];
    if ax[0].cross(&ax[1]).dot(&ax[2]) < 0.0 {
        ax[2] = -ax[2];
    }
    OrientedBoundingBox {
        center,
        axes: ax,
        extents: [0, 1, 2].map(|k| 0.5 * (spans[k].2 - spans[k].1)),
    }
}

/// A closed chain of boundary edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLoop {
    pub vertices: Vec<usize>,
    pub perimeter: f64,
    /// Centroid of the loop's segments, weighted by segment length.
    pub centroid: Vec3,
}

/// Boundary loops sorted by perimeter (descending), then by smallest vertex.
pub fn boundary_loops(mesh: &TriangleMesh) -> Vec<BoundaryLoop> {
    let adj = EdgeAdjacency::build(mesh);
    // Boundary edges directed as in their face, keyed by start vertex.
    let mut next: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for e in adj.boundary_edges() {
        let f = mesh.faces()[e.faces[0]];
        let (a, b) = e.vertices;
        let forward = (0..3).any(|k| f[k] == a && f[(k + 1) % 3] == b);
        let (from, to) = if forward { (a, b) } else { (b, a) };
        next.entry(from).or_default().push(to);
    }
    for v in next.values_mut() {
        v.sort_unstable();
    }
    let verts = mesh.vertices();
    let mut loops = Vec::new();
    while let Some((&start, _)) = next.iter().find(|(_, v)| !v.is_empty()) {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(list) = next.get_mut(&cur).filter(|l| !l.is_empty()) {
            let to = list.remove(0);
            if to == start {
                break;
            }
            chain.push(to);
            cur = to;
        }
        let n = chain.len();
        let mut perimeter = 0.0;
        let mut acc = Vec3::zeros();
        for k in 0..n {
            let (a, b) = (verts[chain[k]], verts[chain[(k + 1) % n]]);
            let len = (b - a).norm();
            perimeter += len;
            acc += (a + b) * (0.5 * len);
        }
        let centroid = if perimeter > 0.0 { acc / perimeter } else { verts[start] };
        loops.push(BoundaryLoop {
            vertices: chain,
            perimeter,
            centroid,
        });
    }
    loops.sort_by(|a, b| {
        b.perimeter
            .total_cmp(&a.perimeter)
            .then(a.vertices.iter().min().cmp(&b.vertices.iter().min()))
    });
    loops
}

/// Rigid transform `p -> rotation * p + translation` applied by alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
    pub flip_applied: bool,
}

#[derive(Serialize, Deserialize)]
struct TransformRecord {
    rotation: [f64; 9],
    translation: [f64; 3],
    flip_applied: bool,
}

impl AlignmentTransform {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// JSON record with the rotation in row-major order.
    pub fn to_json(&self) -> String {
        let r = &self.rotation;
        let rec = TransformRecord {
            rotation: [
                r[(0, 0)], r[(0, 1)], r[(0, 2)],
                r[(1, 0)], r[(1, 1)], r[(1, 2)],
                r[(2, 0)], r[(2, 1)], r[(2, 2)],
            ],
            translation: [self.translation.x, self.translation.y, self.translation.z],
            flip_applied: self.flip_applied,
        };
        serde_json::to_string_pretty(&rec).expect("transform serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: TransformRecord =
            serde_json::from_str(text).map_err(|e| Error::Persistence(e.to_string()))?;
        Ok(Self {
            rotation: Mat3::from_row_slice(&rec.rotation),
            translation: Vec3::from_row_slice(&rec.translation),
            flip_applied: rec.flip_applied,
        })
    }
}

fn third_moment(mesh: &TriangleMesh, dir: &Vec3) -> f64 {
    (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            triangle_third_moment(&a, &b, &c, dir)
        })
        .sum()
}

/// Aligns a feature: OBB center to the origin, major axis to +Z, middle
/// axis to +X, then one of the four half-turns about X, Y or Z (or none)
/// chosen from sign evidence, in this order of precedence:
///
/// 1. the largest boundary loop's centroid, which must end up at -Z;
/// 2. third moments of the surface along Z, X and Y (Z negative, X and Y
///    positive);
/// 3. the area-weighted mean normal along Z, X and Y (each positive).
///
/// Each decisive item fixes the sign of one axis; once two are fixed the
/// third follows from keeping the frame right-handed. Items below a
/// relative tolerance are skipped, so symmetric features fall through to
/// the next item instead of following round-off.
pub fn align_feature(feature: &FeatureSubmesh) -> (FeatureSubmesh, AlignmentTransform) {
    let mesh = feature.mesh();
    let obb = obb_of_mesh_vertices(mesh);
    let r1 = rotation_between(&obb.axes[0], &Vec3::z());
    let m = r1 * obb.axes[1];
    let r2 = rot_z(-m.y.atan2(m.x));
    let base = r2 * r1;
    let centered = mesh.transformed(&base, &(-(base * obb.center)));

    let signs = canonical_signs(&centered);
    let turn = Mat3::from_diagonal(&Vec3::new(signs[0], signs[1], signs[2]));
    let rotation = turn * base;
    let translation = -(rotation * obb.center);
    let aligned = mesh.transformed(&rotation, &translation);
    (
        feature.with_mesh(aligned),
        AlignmentTransform {
            rotation,
            translation,
            flip_applied: signs[2] < 0.0,
        },
    )
}

/// Per-axis signs (`±1`, product `+1`) for a mesh already centered in its
/// OBB frame.
fn canonical_signs(centered: &TriangleMesh) -> [f64; 3] {
    let diag = centered.diagonal();
    let area = centered.total_area();
    let len_tol = 1e-9 * diag;
    let moment_tol = 1e-9 * area * diag.powi(3);
    let normal_tol = 1e-9 * area;

    let loops = boundary_loops(centered);
    let opening = match loops.as_slice() {
        [only] => Some(only),
        [a, b, ..] if a.perimeter - b.perimeter > len_tol.max(1e-9 * a.perimeter) => Some(a),
        _ => None,
    };
    let mean_normal: Vec3 = centered.face_normals().iter().map(|(n, a)| n * *a).sum();

    // (axis, value, tolerance): the axis sign is chosen to make value positive.
    let mut evidence: Vec<(usize, f64, f64)> = Vec::with_capacity(7);
    if let Some(l) = opening {
        evidence.push((2, -l.centroid.z, len_tol));
    }
    evidence.push((2, -third_moment(centered, &Vec3::z()), moment_tol));
    evidence.push((0, third_moment(centered, &Vec3::x()), moment_tol));
    evidence.push((1, third_moment(centered, &Vec3::y()), moment_tol));
    evidence.push((2, mean_normal.z, normal_tol));
    evidence.push((0, mean_normal.x, normal_tol));
    evidence.push((1, mean_normal.y, normal_tol));

    let mut fixed: [Option<f64>; 3] = [None; 3];
    for (axis, value, tol) in evidence {
        if fixed.iter().flatten().count() == 2 {
            break;
        }
        if fixed[axis].is_none() && value.abs() > tol {
            fixed[axis] = Some(value.signum());
        }
    }
    match fixed {
        [Some(x), Some(y), _] => [x, y, x * y],
        [Some(x), None, Some(z)] => [x, x * z, z],
        [None, Some(y), Some(z)] => [y * z, y, z],
        // One axis fixed: the other two keep their current sign unless
        // the fixed one is negative, which forces exactly one more flip.
        [Some(x), None, None] => [x, 1.0, x],
        [None, Some(y), None] => [y, y, 1.0],
        [None, None, Some(z)] => [1.0, z, z],
        _ => [1.0, 1.0, 1.0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::random_rotation;
    use crate::mesh::test_shapes::*;
    use rand::SeedableRng;

    fn box_points(sx: f64, sy: f64, sz: f64) -> Vec<Vec3> {
        let mut v = Vec::new();
        for i in 0..8 {
            v.push(Vec3::new(
                if i & 1 == 0 { -sx } else { sx },
                if i & 2 == 0 { -sy } else { sy },
                if i & 4 == 0 { -sz } else { sz },
            ));
        }
        v
    }

    #[test]
    fn axis_aligned_box() {
        let b = obb_of_points(&box_points(2.0, 0.5, 0.25)).unwrap();
        assert!((b.axes[0].x.abs() - 1.0).abs() < 1e-12);
        assert!((b.axes[1].y.abs() - 1.0).abs() < 1e-12);
        assert!((b.extents[0] - 2.0).abs() < 1e-12);
        assert!((b.extents[1] - 0.5).abs() < 1e-12);
        assert!(b.center.norm() < 1e-12);
    }

    #[test]
    fn rotated_box_axes_follow_rotation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let r = random_rotation(&mut rng);
            let pts: Vec<Vec3> = box_points(2.0, 0.5, 0.25).iter().map(|p| r * p).collect();
            let b = obb_of_points(&pts).unwrap();
            for k in 0..3 {
                let expect: Vec3 = r.column(k).into();
                assert!((b.axes[k].dot(&expect).abs() - 1.0).abs() < 1e-6);
            }
            assert!((b.axes[0].cross(&b.axes[1]) - b.axes[2]).norm() < 1e-9);
        }
    }

    #[test]
    fn cube_ties_follow_raw_axes() {
        let b = obb_of_points(&box_points(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(b.axes, [Vec3::z(), Vec3::x(), Vec3::y()]);
    }

    #[test]
    fn planar_points_use_fallback() {
        let pts: Vec<Vec3> = box_points(3.0, 1.0, 0.0)[..4].to_vec();
        let b = obb_of_points(&pts).unwrap();
        assert!((b.axes[0].x.abs() - 1.0).abs() < 1e-12);
        assert_eq!(b.extents[2], 0.0);
    }

    #[test]
    fn single_triangle_loop() {
        let m = TriangleMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]])
            .unwrap();
        let loops = boundary_loops(&m);
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].vertices.len(), 3);
        assert!(boundary_loops(&unit_cube()).is_empty());
    }

    #[test]
    fn transform_json_roundtrip() {
        let t = AlignmentTransform {
            rotation: crate::geom::axis_angle(&Vec3::new(0.0, 0.6, 0.8), 1.1),
            translation: Vec3::new(1.0, -2.0, 0.5),
            flip_applied: true,
        };
        let back = AlignmentTransform::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn alignment_is_idempotent_on_sphere_patch() {
        let m = sphere(2);
        let keep: Vec<usize> = (0..m.face_count())
            .filter(|&f| {
                let c = m.face_centroid(f);
                c.z > 0.2 && c.x > -0.5
            })
            .collect();
        let f = FeatureSubmesh::from_faces(&m, keep, crate::extraction::Provenance::External).unwrap();
        let (a, t) = align_feature(&f);
        assert!((t.rotation.determinant() - 1.0).abs() < 1e-9);
        let (b, _) = align_feature(&a);
        let diag = a.mesh().diagonal();
        for (p, q) in a.mesh().vertices().iter().zip(b.mesh().vertices()) {
            assert!((p - q).norm() < 1e-9 * diag);
        }
    }
}
