//! Discrete Gauss map signatures: area histograms of facet normals over a
//! fixed set of sphere directions.

mod csv;
mod kdtree;

pub use csv::{format_g9, read_signature_csv, signature_csv_string, write_signature_csv, SignatureTable};
pub use kdtree::{brute_force_nearest, KdTree, DOT_TIE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::FeatureSubmesh;
use crate::geom::Vec3;
use crate::mesh::TriangleMesh;

/// Supported direction counts.
pub const SUPPORTED_NV: [usize; 3] = [27, 102, 227];

/// Sphere directions in latitude order: north pole, `rings` rings of
/// `longitudes` directions (west to east), south pole.
#[derive(Debug, Clone)]
pub struct SphereSampling {
    nv: usize,
    rings: usize,
    longitudes: usize,
    directions: Vec<Vec3>,
    tree: KdTree,
}

impl SphereSampling {
    pub fn new(nv: usize) -> Result<Self> {
        let (rings, longitudes) = match nv {
            27 => (5, 5),
            102 => (10, 10),
            227 => (15, 15),
            _ => {
                return Err(Error::Config(format!(
                    "unsupported nv {nv} (expected one of 27, 102, 227)"
                )))
            }
        };
        let mut directions = Vec::with_capacity(nv);
        directions.push(Vec3::z());
        for i in 1..=rings {
            let theta = i as f64 * std::f64::consts::PI / (rings + 1) as f64;
            for j in 0..longitudes {
                let phi = j as f64 * std::f64::consts::TAU / longitudes as f64;
                directions.push(Vec3::new(
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                ));
            }
        }
        directions.push(-Vec3::z());
        let tree = KdTree::build(&directions);
        Ok(Self {
            nv,
            rings,
            longitudes,
            directions,
            tree,
        })
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn rings(&self) -> usize {
        self.rings
    }

    pub fn longitudes(&self) -> usize {
        self.longitudes
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    /// Index of the ring direction `(ring, j)` with `ring` in `1..=rings`.
    pub fn index_of(&self, ring: usize, j: usize) -> usize {
        1 + (ring - 1) * self.longitudes + j
    }

    /// Direction with the largest dot product with `normal`; near-ties go
    /// to the lowest index.
    pub fn nearest_direction(&self, normal: &Vec3) -> Result<usize> {
        let len = normal.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::Degeneracy("zero or non-finite normal".into()));
        }
        if (len - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!("normal has length {len}, expected 1")));
        }
        Ok(self.tree.nearest(normal).expect("sampling is non-empty"))
    }

    /// Reference linear scan, equal to [`Self::nearest_direction`].
    pub fn nearest_direction_brute(&self, normal: &Vec3) -> usize {
        brute_force_nearest(&self.directions, normal).expect("sampling is non-empty")
    }
}

pub fn make_sphere_sampling(nv: usize) -> Result<SphereSampling> {
    SphereSampling::new(nv)
}

/// Normalized area histogram of facet normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussSignature {
    pub nv: usize,
    pub values: Vec<f64>,
}

impl GaussSignature {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

pub fn compute_signature(feature: &FeatureSubmesh, sampling: &SphereSampling) -> Result<GaussSignature> {
    signature_of_mesh(feature.mesh(), sampling)
}

pub fn signature_of_mesh(mesh: &TriangleMesh, sampling: &SphereSampling) -> Result<GaussSignature> {
    let mut values = vec![0.0; sampling.nv()];
    let mut total = 0.0;
    for (n, area) in mesh.face_normals() {
        if *area <= 0.0 {
            continue;
        }
        values[sampling.nearest_direction(n)?] += area;
        total += area;
    }
    if !(total > 0.0) {
        return Err(Error::Degeneracy("feature has zero total area".into()));
    }
    for v in &mut values {
        *v /= total;
    }
    Ok(GaussSignature {
        nv: sampling.nv(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::test_shapes::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_unit(rng: &mut impl Rng) -> Vec3 {
        loop {
            let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                return v / n;
            }
        }
    }

    #[test]
    fn layouts() {
        for (nv, r) in [(27, 5), (102, 10), (227, 15)] {
            let s = make_sphere_sampling(nv).unwrap();
            assert_eq!(s.directions().len(), nv);
            assert_eq!(s.rings(), r);
            assert_eq!(s.directions()[0], Vec3::z());
            assert_eq!(s.directions()[nv - 1], -Vec3::z());
            for d in s.directions() {
                assert!((d.norm() - 1.0).abs() < 1e-12);
            }
        }
        assert!(matches!(make_sphere_sampling(100), Err(Error::Config(_))));
    }

    #[test]
    fn equatorial_rings_of_nv102() {
        let s = make_sphere_sampling(102).unwrap();
        // 1-based indices 42..=61 are rings 5 and 6.
        assert_eq!(s.index_of(5, 0) + 1, 42);
        assert_eq!(s.index_of(6, 9) + 1, 61);
        let d5 = s.directions()[s.index_of(5, 0)];
        let d6 = s.directions()[s.index_of(6, 0)];
        assert!(d5.z > 0.0 && d6.z < 0.0);
        assert!((d5.z + d6.z).abs() < 1e-15);
    }

    #[test]
    fn poles() {
        let s = make_sphere_sampling(102).unwrap();
        assert_eq!(s.nearest_direction(&Vec3::z()).unwrap(), 0);
        assert_eq!(s.nearest_direction(&-Vec3::z()).unwrap(), 101);
        assert!(matches!(s.nearest_direction(&Vec3::zeros()), Err(Error::Degeneracy(_))));
    }

    #[test]
    fn equator_normals_tie_to_the_northern_ring() {
        let s = make_sphere_sampling(102).unwrap();
        for k in 0..360 {
            let t = (k as f64).to_radians();
            let n = Vec3::new(t.cos(), t.sin(), 0.0);
            let i = s.nearest_direction(&n).unwrap();
            assert!((41..51).contains(&i), "{k} -> {i}");
        }
    }

    #[test]
    fn kd_tree_equals_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for nv in SUPPORTED_NV {
            let s = make_sphere_sampling(nv).unwrap();
            for _ in 0..10_000 {
                let n = random_unit(&mut rng);
                assert_eq!(s.nearest_direction(&n).unwrap(), s.nearest_direction_brute(&n));
            }
            // Exact directions and axis-aligned normals hit ties.
            for d in s.directions().iter().chain(&[Vec3::x(), Vec3::y(), -Vec3::x(), -Vec3::y()]) {
                assert_eq!(s.nearest_direction(d).unwrap(), s.nearest_direction_brute(d));
            }
        }
    }

    #[test]
    fn planar_patch_facing_up() {
        let s = make_sphere_sampling(102).unwrap();
        let sig = signature_of_mesh(&flat_grid(3), &s).unwrap();
        assert_eq!(sig.values[0], 1.0);
        assert_eq!(sig.sum(), 1.0);
    }

    #[test]
    fn zero_area_is_an_error() {
        let s = make_sphere_sampling(27).unwrap();
        let m = TriangleMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0], vec![[0, 1, 2]]).unwrap();
        assert!(matches!(signature_of_mesh(&m, &s), Err(Error::Degeneracy(_))));
    }

    #[test]
    fn sphere_signature_invariants() {
        let s = make_sphere_sampling(102).unwrap();
        let m = sphere(3).transformed(&crate::geom::axis_angle(&Vec3::new(0.3, 0.4, 0.5).normalize(), 0.77), &Vec3::zeros());
        let a = signature_of_mesh(&m, &s).unwrap();
        assert!((a.sum() - 1.0).abs() < 1e-9);
        let scaled = signature_of_mesh(&m.scaled(37.5), &s).unwrap();
        let sub = signature_of_mesh(&m.subdivided(), &s).unwrap();
        for k in 0..102 {
            assert!((a.values[k] - scaled.values[k]).abs() <= 1e-12);
            assert!((a.values[k] - sub.values[k]).abs() <= 1e-12);
        }
    }

    proptest! {
        #[test]
        fn spin_by_one_longitude_permutes_bins(seed in 0u64..1000) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let s = make_sphere_sampling(102).unwrap();
            let base = sphere(1).transformed(&crate::geom::random_rotation(&mut rng), &Vec3::zeros());
            let keep: Vec<usize> = (0..base.face_count()).filter(|_| rng.gen_bool(0.6)).collect();
            prop_assume!(!keep.is_empty());
            let m = base.submesh(&keep);
            let a = signature_of_mesh(&m, &s).unwrap();
            let r = crate::geom::rot_z(std::f64::consts::TAU / 10.0);
            let b = signature_of_mesh(&m.transformed(&r, &Vec3::zeros()), &s).unwrap();
            prop_assert!((a.values[0] - b.values[0]).abs() < 1e-12);
            prop_assert!((a.values[101] - b.values[101]).abs() < 1e-12);
            for ring in 1..=10 {
                for j in 0..10 {
                    let from = a.values[s.index_of(ring, j)];
                    let to = b.values[s.index_of(ring, (j + 1) % 10)];
                    prop_assert!((from - to).abs() < 1e-12);
                }
            }
        }
    }
}
