use super::TriangleMesh;
use crate::geom::Vec3;

/// Enclosing-ball radius. Ritter's two-pass estimate (farthest-point
/// diameter guess, then growth over outliers) is cross-checked with a short
/// Bădoiu–Clarkson refinement, whose 100 steps bound the result by
/// 1.1× the minimal radius; the smaller of the two is returned.
pub fn bounding_ball_radius(mesh: &TriangleMesh) -> f64 {
    let pts = mesh.vertices();
    ritter(pts).1.min(badoiu_clarkson(pts, 100).1)
}

fn farthest<'a>(points: &'a [Vec3], from: &Vec3) -> &'a Vec3 {
    points
        .iter()
        .max_by(|a, b| (*a - from).norm_squared().total_cmp(&(*b - from).norm_squared()))
        .unwrap()
}

fn covering_radius(points: &[Vec3], center: &Vec3) -> f64 {
    points.iter().map(|p| (p - center).norm()).fold(0.0, f64::max)
}

pub(crate) fn ritter(points: &[Vec3]) -> (Vec3, f64) {
    let Some(p0) = points.first() else {
        return (Vec3::zeros(), 0.0);
    };
    let a = *farthest(points, p0);
    let b = *farthest(points, &a);
    let mut center = (a + b) * 0.5;
    let mut radius = (b - a).norm() * 0.5;
    for p in points {
        let d = (p - center).norm();
        if d > radius {
            let grown = 0.5 * (radius + d);
            center += (p - center) * ((grown - radius) / d);
            radius = grown;
        }
    }
    // Rounding during growth can leave a point a hair outside.
    (center, radius.max(covering_radius(points, &center)))
}

pub(crate) fn badoiu_clarkson(points: &[Vec3], steps: usize) -> (Vec3, f64) {
    let Some(p0) = points.first() else {
        return (Vec3::zeros(), 0.0);
    };
    let mut c = *p0;
    for i in 1..=steps {
        let f = *farthest(points, &c);
        c += (f - c) / (i as f64 + 1.0);
    }
    (c, covering_radius(points, &c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::test_shapes::*;
    use proptest::prelude::*;

    #[test]
    fn unit_cube_radius_within_bounds() {
        let r = bounding_ball_radius(&unit_cube());
        let exact = 3f64.sqrt() / 2.0;
        assert!(r >= exact - 1e-12 && r <= 1.5 * exact, "{r}");
    }

    #[test]
    fn repeated_point_has_zero_radius() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        let m = TriangleMesh::new(vec![p, p, p], vec![[0, 1, 2]]).unwrap();
        assert_eq!(bounding_ball_radius(&m), 0.0);
    }

    proptest! {
        #[test]
        fn radius_between_half_diameter_and_bound(pts in proptest::collection::vec(
            (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0), 3..60)) {
            let pts: Vec<Vec3> = pts.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect();
            let faces = (0..pts.len() / 3).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
            let m = TriangleMesh::new(pts.clone(), faces).unwrap();
            let r = bounding_ball_radius(&m);
            let mut diam: f64 = 0.0;
            for a in &pts {
                for b in &pts {
                    diam = diam.max((a - b).norm());
                }
            }
            prop_assert!(r >= diam / 2.0 - 1e-9);
            // A long refinement is within 1% of the minimal radius.
            let near_min = badoiu_clarkson(&pts, 10_000).1 / 1.01;
            prop_assert!(r <= 1.5 * near_min);
        }
    }
}
