//! Constrained triangulation of planar regions bounded by closed rings.

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};

pub(crate) type P2 = [f64; 2];

/// Twice the signed area of a ring (positive when counter-clockwise).
pub(crate) fn signed_area2(ring: &[P2]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum()
}

/// Even-odd point-in-ring test.
pub(crate) fn inside_ring(p: P2, ring: &[P2]) -> bool {
    let mut inside = false;
    let n = ring.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Triangulates the even-odd interior of a set of non-crossing closed rings
/// without adding vertices. Returned indices address the concatenation of
/// all rings in order; triangles are counter-clockwise.
pub(crate) fn triangulate_rings(rings: &[Vec<P2>]) -> Result<Vec<[usize; 3]>> {
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let mut handle_to_index = std::collections::HashMap::new();
    let mut handles = Vec::new();
    let mut offset = 0;
    for ring in rings {
        for (k, p) in ring.iter().enumerate() {
            let h = cdt
                .insert(Point2::new(p[0], p[1]))
                .map_err(|e| Error::Degeneracy(format!("triangulation insert: {e:?}")))?;
            handle_to_index.entry(h.index()).or_insert(offset + k);
            handles.push(h);
        }
        offset += ring.len();
    }
    let mut offset = 0;
    for ring in rings {
        let n = ring.len();
        for k in 0..n {
            let (a, b) = (handles[offset + k], handles[offset + (k + 1) % n]);
            if a != b && cdt.try_add_constraint(a, b).is_empty() {
                return Err(Error::Degeneracy("crossing boundary rings".into()));
            }
        }
        offset += n;
    }
    let mut out = Vec::new();
    for face in cdt.inner_faces() {
        let vs = face.vertices();
        let pts = vs.map(|v| {
            let p = v.position();
            [p.x, p.y]
        });
        let c = [
            (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0,
            (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0,
        ];
        let crossings = rings.iter().filter(|r| inside_ring(c, r)).count();
        if crossings % 2 == 1 {
            let mut tri = vs.map(|v| handle_to_index[&v.fix().index()]);
            if signed_area2(&pts) < 0.0 {
                tri.swap(1, 2);
            }
            out.push(tri);
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(tris: &[[usize; 3]], pts: &[P2]) -> f64 {
        tris.iter()
            .map(|t| signed_area2(&t.map(|i| pts[i])) / 2.0)
            .sum()
    }

    #[test]
    fn square_with_hole() {
        let outer = vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]];
        let hole = vec![[1.0, 1.0], [1.0, 2.0], [2.0, 2.0], [2.0, 1.0]];
        let tris = triangulate_rings(&[outer.clone(), hole.clone()]).unwrap();
        let all: Vec<P2> = outer.into_iter().chain(hole).collect();
        assert!((area(&tris, &all) - 15.0).abs() < 1e-12);
        assert!(tris.iter().all(|t| signed_area2(&t.map(|i| all[i])) > 0.0));
    }

    #[test]
    fn collinear_points_are_kept() {
        let ring = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]];
        let tris = triangulate_rings(std::slice::from_ref(&ring)).unwrap();
        assert_eq!(tris.len(), 3);
        let used: std::collections::BTreeSet<usize> = tris.iter().flatten().copied().collect();
        assert_eq!(used.len(), 5);
        assert!((area(&tris, &ring) - 2.0).abs() < 1e-12);
    }
}
