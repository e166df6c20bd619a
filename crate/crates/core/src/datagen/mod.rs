//! Synthetic labelled features, test blocks and noise.

mod block;
mod builder;
mod classes;
mod dataset;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use block::{gen_block_with_features, gen_single_feature_block, through_hole_grid, GeneratedBlock, Placement, PLACEABLE};
pub use classes::{ParamKind, ParamSpec, STOCK};
pub use dataset::{gen_dataset, load_dataset, DatasetManifest, FileEntry, ParamRange, MANIFEST_FILE, SIGNATURE_FILE};

use crate::error::{Error, Result};
use crate::extraction::FeatureSubmesh;
use crate::forest::splitmix64;
use crate::geom::{random_rotation, rot_z, Vec3};
use crate::mesh::{bounding_ball_radius, TriangleMesh};

/// Number of feature classes.
pub const NUM_CLASSES: usize = 24;

/// One registered class with the ranges its generator draws from.
#[derive(Debug, Clone, Serialize)]
pub struct ClassInfo {
    pub id: usize,
    pub name: &'static str,
    pub params: &'static [ParamSpec],
}

/// The 24 feature classes, ids dense from 0.
#[derive(Debug, Clone)]
pub struct ClassRegistry {
    classes: Vec<ClassInfo>,
}

impl Default for ClassRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl ClassRegistry {
    pub fn standard() -> Self {
        let classes = classes::CLASS_TABLE
            .iter()
            .enumerate()
            .map(|(id, &(name, params))| ClassInfo { id, name, params })
            .collect();
        Self { classes }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn get(&self, id: usize) -> Result<&ClassInfo> {
        self.classes.get(id).ok_or_else(|| Error::Registry(format!("id {id}")))
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.to_string()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClassInfo> {
        self.classes.iter()
    }
}

/// Sampling options shared by all classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    /// Range of the factor applied to every drawn length (1 = registry ranges).
    pub dim_scale: [f64; 2],
    /// Segments per full circle for curved walls.
    pub segments: [usize; 2],
    /// Rows along the height of vertical walls.
    pub rows: [usize; 2],
    /// Apply a uniformly random rotation and translation.
    pub rotate: bool,
    /// Apply a random spin about the stock's vertical axis.
    pub spin: bool,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            dim_scale: [1.0, 1.0],
            segments: [24, 64],
            rows: [1, 3],
            rotate: true,
            spin: true,
        }
    }
}

/// Fewest circle segments for which every generator still yields a
/// closed, non-degenerate tessellation.
pub const MIN_SEGMENTS: usize = 8;

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let [s0, s1] = self.dim_scale;
        if !(s0 > 0.0 && s0 <= s1 && s1 <= 1.0) {
            return Err(Error::Config(format!("dim_scale {:?} must satisfy 0 < lo <= hi <= 1", self.dim_scale)));
        }
        if self.segments[0] < MIN_SEGMENTS || self.segments[0] > self.segments[1] {
            return Err(Error::Config(format!("segments {:?} must satisfy {MIN_SEGMENTS} <= lo <= hi", self.segments)));
        }
        if self.rows[0] == 0 || self.rows[0] > self.rows[1] {
            return Err(Error::Config(format!("rows {:?} must satisfy 1 <= lo <= hi", self.rows)));
        }
        Ok(())
    }
}

/// Gaussian displacement along vertex normals with `sigma = fraction * R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    fraction: f64,
    seed: u64,
}

impl NoiseSpec {
    pub fn new(fraction: f64, seed: u64) -> Result<Self> {
        if !(fraction.is_finite() && fraction >= 0.0) {
            return Err(Error::Config(format!("noise fraction {fraction} must be finite and non-negative")));
        }
        Ok(Self { fraction, seed })
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// The feature surface in the stock frame, before any rigid motion.
pub(crate) fn stock_frame_surface(class: usize, spec: &GenSpec, rng: &mut dyn RngCore) -> Result<TriangleMesh> {
    spec.validate()?;
    if class >= NUM_CLASSES {
        return Err(Error::Registry(format!("id {class}")));
    }
    let scale = rng.gen_range(spec.dim_scale[0]..=spec.dim_scale[1]);
    let tess = classes::Tess {
        segments: rng.gen_range(spec.segments[0]..=spec.segments[1]),
        rows: rng.gen_range(spec.rows[0]..=spec.rows[1]),
    };
    classes::generate(class, scale, tess, rng)
}

/// A labelled feature surface of the given class with randomized
/// dimensions and tessellation, optionally moved rigidly.
pub fn gen_feature_surface(class: usize, spec: &GenSpec, rng: &mut dyn RngCore) -> Result<(FeatureSubmesh, usize)> {
    let mut mesh = stock_frame_surface(class, spec, rng)?;
    let centre = Vec3::repeat(0.5 * STOCK);
    if spec.spin {
        let r = rot_z(rng.gen_range(0.0..std::f64::consts::TAU));
        mesh = mesh.transformed(&r, &(centre - r * centre));
    }
    if spec.rotate {
        let r = random_rotation(rng);
        let t = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * STOCK;
        mesh = mesh.transformed(&r, &t);
    }
    Ok((FeatureSubmesh::external(mesh)?, class))
}

/// The generator's RNG, seeded.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of sample `index` of `class` under a master seed.
pub fn sample_seed(master: u64, class: usize, index: usize) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(class as u64)) ^ index as u64)
}

/// Sample `index` of `class`, generated from its own derived seed.
pub fn gen_sample(class: usize, index: usize, master: u64, spec: &GenSpec) -> Result<FeatureSubmesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(master, class, index));
    gen_feature_surface(class, spec, &mut rng).map(|(f, _)| f)
}

/// `per_class` samples of every class, class-major, generated in parallel.
pub fn gen_corpus(per_class: usize, spec: &GenSpec, master: u64) -> Result<Vec<(usize, FeatureSubmesh)>> {
    spec.validate()?;
    (0..NUM_CLASSES * per_class)
        .into_par_iter()
        .map(|k| {
            let (class, index) = (k / per_class, k % per_class);
            gen_sample(class, index, master, spec).map(|f| (class, f))
        })
        .collect()
}

/// Displaces every vertex along its area-weighted normal by a Gaussian
/// amount with standard deviation `fraction * bounding_ball_radius`.
pub fn add_normal_noise(mesh: &TriangleMesh, spec: &NoiseSpec) -> TriangleMesh {
    if spec.fraction == 0.0 || mesh.is_empty() {
        return mesh.clone();
    }
    let sigma = spec.fraction * bounding_ball_radius(mesh);
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normals = mesh.vertex_normals();
    let vertices: Vec<Vec3> = mesh
        .vertices()
        .iter()
        .zip(&normals)
        .map(|(p, n)| p + n * normal.sample(&mut rng))
        .collect();
    TriangleMesh::new(vertices, mesh.faces().to_vec()).expect("same topology, finite coordinates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::boundary_loops;
    use crate::mesh::EdgeAdjacency;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn registry_is_dense_and_unique() {
        let reg = ClassRegistry::standard();
        assert_eq!(reg.len(), NUM_CLASSES);
        let mut names = reg.names();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), NUM_CLASSES);
        for (i, c) in reg.iter().enumerate() {
            assert_eq!(c.id, i);
            assert!(c.params.iter().all(|p| p.lo <= p.hi));
        }
        assert_eq!(reg.id_of("blind hole"), Some(2));
        assert!(matches!(reg.get(24), Err(Error::Registry(_))));
    }

    #[test]
    fn invalid_class_is_a_registry_error() {
        assert!(matches!(gen_feature_surface(24, &GenSpec::default(), &mut rng(0)), Err(Error::Registry(_))));
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let bad = GenSpec { segments: [4, 64], ..GenSpec::default() };
        assert!(matches!(gen_feature_surface(1, &bad, &mut rng(0)), Err(Error::Config(_))));
        assert!(NoiseSpec::new(-0.1, 0).is_err());
    }

    #[test]
    fn generated_surfaces_are_clean_and_oriented() {
        let spec = GenSpec::default();
        for class in 0..NUM_CLASSES {
            for seed in 0..10 {
                let (f, label) = gen_feature_surface(class, &spec, &mut rng(seed)).unwrap();
                assert_eq!(label, class);
                let m = f.mesh().clone();
                let n = m.face_count();
                let (clean, report) = m.clone().clean();
                assert_eq!(report.dropped_degenerate, 0, "class {class}");
                assert_eq!(clean.face_count(), n);
                assert!(m.is_consistently_oriented(), "class {class}");
                assert_eq!(EdgeAdjacency::build(&m).non_manifold_count(), 0);
            }
        }
    }

    #[test]
    fn hole_loops() {
        let spec = GenSpec::default();
        let (through, _) = gen_feature_surface(1, &spec, &mut rng(5)).unwrap();
        assert_eq!(boundary_loops(through.mesh()).len(), 2);
        let (blind, _) = gen_feature_surface(2, &spec, &mut rng(5)).unwrap();
        let loops = boundary_loops(blind.mesh());
        assert_eq!(loops.len(), 1);
        let boundary = EdgeAdjacency::build(blind.mesh()).boundary_edges().count();
        assert_eq!(boundary, loops[0].vertices.len());
    }

    #[test]
    fn passage_and_blind_slot_differ_by_floor() {
        // Same tessellation draws; the blind slot adds floor facets whose
        // normals point out of the opening.
        let spec = GenSpec { rotate: false, spin: false, ..GenSpec::default() };
        let (slot, _) = gen_feature_surface(8, &spec, &mut rng(9)).unwrap();
        let (passage, _) = gen_feature_surface(4, &spec, &mut rng(9)).unwrap();
        let floor = |m: &TriangleMesh| m.face_normals().iter().filter(|(n, _)| n.z > 0.999).count();
        assert!(floor(slot.mesh()) > 0);
        assert_eq!(floor(passage.mesh()), 0);
    }

    #[test]
    fn noise_zero_is_identity_and_seeded() {
        let (f, _) = gen_feature_surface(2, &GenSpec::default(), &mut rng(1)).unwrap();
        let m = f.mesh();
        let same = add_normal_noise(m, &NoiseSpec::new(0.0, 3).unwrap());
        assert_eq!(same.vertices(), m.vertices());
        let a = add_normal_noise(m, &NoiseSpec::new(0.01, 3).unwrap());
        let b = add_normal_noise(m, &NoiseSpec::new(0.01, 3).unwrap());
        assert_eq!(a.vertices(), b.vertices());
        assert_ne!(a.vertices(), m.vertices());
    }

    #[test]
    fn noise_mean_displacement_is_half_normal() {
        let mesh = crate::mesh::test_shapes::sphere(6);
        assert!(mesh.vertex_count() >= 10_000);
        let f = 0.01;
        let noisy = add_normal_noise(&mesh, &NoiseSpec::new(f, 11).unwrap());
        let r = bounding_ball_radius(&mesh);
        let mean = noisy
            .vertices()
            .iter()
            .zip(mesh.vertices())
            .map(|(a, b)| (a - b).norm())
            .sum::<f64>()
            / mesh.vertex_count() as f64;
        let expected = f * r * (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean / expected - 1.0).abs() < 0.05, "{mean} vs {expected}");
    }

    #[test]
    fn sample_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for c in 0..NUM_CLASSES {
            for i in 0..200 {
                assert!(seen.insert(sample_seed(42, c, i)));
            }
        }
    }
}
