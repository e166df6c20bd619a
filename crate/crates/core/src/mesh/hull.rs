//! Incremental 3D convex hull with per-face outside sets.

use std::collections::HashMap;

use super::{bounds_of, TriangleMesh};
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Relative distance below which a point counts as on a hull plane.
pub const HULL_EPS: f64 = 1e-10;

struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(points: &[Vec3], v: [usize; 3], inside: &Vec3) -> Self {
        let [a, b, c] = v.map(|i| points[i]);
        let mut v = v;
        let mut n = (b - a).cross(&(c - a)).normalize();
        if n.dot(&(inside - a)) > 0.0 {
            v.swap(1, 2);
            n = -n;
        }
        Self {
            v,
            normal: n,
            offset: n.dot(&a),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Convex hull of `points` as a closed triangle mesh with outward normals.
/// Only extreme points become hull vertices; they keep their relative input
/// order. Fewer than three affine dimensions is a degeneracy error.
pub fn convex_hull(points: &[Vec3]) -> Result<TriangleMesh> {
    let (lo, hi) = bounds_of(points).ok_or(Error::Degenerate { dimension: 0 })?;
    let eps = HULL_EPS * (hi - lo).norm();
    let mut active: Vec<usize> = (0..points.len()).collect();
    loop {
        let tris = build(points, &active, eps)?;
        // A point can enter the hull while extreme and end up flat once later
        // points arrive. Such vertices have zero angle deficit; drop them and
        // rebuild from the rest, which spans the same convex set.
        let mesh = TriangleMesh::from_parts_unchecked(points.to_vec(), tris);
        let adj = super::EdgeAdjacency::build(&mesh);
        let k = super::vertex_angle_deficit(&mesh, &adj);
        let on_hull: Vec<usize> = (0..points.len()).filter(|&i| !k.isolated[i]).collect();
        let flat: Vec<usize> = on_hull
            .iter()
            .copied()
            .filter(|&i| k.deficit[i] < FLAT_DEFICIT)
            .collect();
        if flat.is_empty() {
            return Ok(mesh.compact());
        }
        active = on_hull.into_iter().filter(|i| !flat.contains(i)).collect();
    }
}

const FLAT_DEFICIT: f64 = 1e-9;

fn build(all: &[Vec3], active: &[usize], eps: f64) -> Result<Vec<[usize; 3]>> {
    let subset: Vec<Vec3> = active.iter().map(|&i| all[i]).collect();
    let points = &subset[..];
    let tet = initial_simplex(points, eps)?;
    let inside = tet.iter().map(|&i| points[i]).sum::<Vec3>() / 4.0;

    let mut faces: Vec<Face> = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]
        .iter()
        .map(|t| Face::new(points, t.map(|k| tet[k]), &inside))
        .collect();
    let mut used = vec![false; points.len()];
    for &i in &tet {
        used[i] = true;
    }
    let all: Vec<usize> = (0..points.len()).filter(|&i| !used[i]).collect();
    assign(points, &mut faces, 0..4, &all, eps);

    while let Some(fi) = faces.iter().position(|f| f.alive && !f.outside.is_empty()) {
        // Farthest outside point of this face; lowest index on ties.
        let eye = *faces[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                let (da, db) = (faces[fi].distance(&points[a]), faces[fi].distance(&points[b]));
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        let p = points[eye];
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&i| faces[i].alive && faces[i].distance(&p) > eps)
            .collect();

        // Horizon: directed edges of visible faces whose twin is not visible.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for &i in &visible {
            let v = faces[i].v;
            for k in 0..3 {
                *directed.entry((v[k], v[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut horizon: Vec<(usize, usize)> = directed
            .keys()
            .filter(|&&(a, b)| !directed.contains_key(&(b, a)))
            .copied()
            .collect();
        horizon.sort_unstable();

        let mut orphans = Vec::new();
        for &i in &visible {
            faces[i].alive = false;
            orphans.append(&mut faces[i].outside);
        }
        orphans.retain(|&q| q != eye);
        orphans.sort_unstable();
        used[eye] = true;

        let start = faces.len();
        for (a, b) in horizon {
            faces.push(Face::new(points, [a, b, eye], &inside));
        }
        let end = faces.len();
        assign(points, &mut faces, start..end, &orphans, eps);
    }

    Ok(faces
        .iter()
        .filter(|f| f.alive)
        .map(|f| f.v.map(|i| active[i]))
        .collect())
}

fn assign(
    points: &[Vec3],
    faces: &mut [Face],
    range: std::ops::Range<usize>,
    candidates: &[usize],
    eps: f64,
) {
    for &q in candidates {
        let p = points[q];
        let mut best: Option<(usize, f64)> = None;
        for fi in range.clone() {
            let d = faces[fi].distance(&p);
            if d > eps && best.is_none_or(|(_, bd)| d > bd) {
                best = Some((fi, d));
            }
        }
        if let Some((fi, _)) = best {
            faces[fi].outside.push(q);
        }
    }
}

fn initial_simplex(points: &[Vec3], eps: f64) -> Result<[usize; 4]> {
    let argmax = |f: &dyn Fn(&Vec3) -> f64| -> (usize, f64) {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, f(p)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
    };
    let a = argmax(&|p| -p.x - 1e-3 * p.y - 1e-6 * p.z).0;
    let pa = points[a];
    let (b, dab) = argmax(&|p| (p - pa).norm());
    if dab <= eps {
        return Err(Error::Degenerate { dimension: 0 });
    }
    let dir = (points[b] - pa) / dab;
    let (c, dline) = argmax(&|p| (p - pa).cross(&dir).norm());
    if dline <= eps {
        return Err(Error::Degenerate { dimension: 1 });
    }
    let n = (points[b] - pa).cross(&(points[c] - pa)).normalize();
    let (d, dplane) = argmax(&|p| n.dot(&(p - pa)).abs());
    if dplane <= eps {
        return Err(Error::Degenerate { dimension: 2 });
    }
    Ok([a, b, c, d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::EdgeAdjacency;
    use proptest::prelude::*;

    fn cube_corners() -> Vec<Vec3> {
        let mut v = Vec::new();
        for i in 0..8 {
            v.push(Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        v
    }

    #[test]
    fn cube_with_interior_points() {
        let mut pts = vec![Vec3::new(0.5, 0.5, 0.5), Vec3::new(0.2, 0.7, 0.4)];
        pts.extend(cube_corners());
        pts.push(Vec3::new(0.5, 0.5, 1.0)); // on a face
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertex_count(), 8);
        assert_eq!(h.face_count(), 12);
        assert!(EdgeAdjacency::build(&h).is_closed_manifold());
        assert!((h.total_area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn flat_input_reports_dimension() {
        let pts: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64, (i * i) as f64, 0.0)).collect();
        assert!(matches!(convex_hull(&pts), Err(Error::Degenerate { dimension: 2 })));
        let line: Vec<Vec3> = (0..5).map(|i| Vec3::x() * i as f64).collect();
        assert!(matches!(convex_hull(&line), Err(Error::Degenerate { dimension: 1 })));
        assert!(matches!(convex_hull(&[Vec3::x(); 4]), Err(Error::Degenerate { dimension: 0 })));
    }

    #[test]
    fn cylinder_hull_vertices_lie_on_rims() {
        let n = 40;
        let mut pts = Vec::new();
        for z in [0.0, 0.5, 1.0, 2.5, 4.0] {
            for k in 0..n {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                pts.push(Vec3::new(t.cos(), t.sin(), z));
            }
        }
        let h = convex_hull(&pts).unwrap();
        for v in h.vertices() {
            assert!(v.z.abs() < 1e-12 || (v.z - 4.0).abs() < 1e-12, "{v}");
        }
        assert_eq!(h.vertex_count(), 2 * n);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn all_points_inside_every_facet(pts in proptest::collection::vec(
            (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 4..120)) {
            let pts: Vec<Vec3> = pts.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect();
            let Ok(h) = convex_hull(&pts) else { return Ok(()); };
            let tol = 1e-9 * 10.0 * 3f64.sqrt();
            for f in 0..h.face_count() {
                let (n, _) = h.face_normals()[f];
                let a = h.triangle(f)[0];
                for p in &pts {
                    prop_assert!(n.dot(&(p - a)) <= tol);
                }
            }
            prop_assert!(EdgeAdjacency::build(&h).is_closed_manifold());
        }
    }
}
