//! Fixtures shared by the benchmarks.

use featrec_core::alignment::align_feature;
use featrec_core::datagen::{gen_block_with_features, gen_corpus, gen_feature_surface, seeded_rng, GenSpec, Placement};
use featrec_core::extraction::FeatureSubmesh;
use featrec_core::forest::LabeledSample;
use featrec_core::signature::{compute_signature, make_sphere_sampling};
use featrec_core::TriangleMesh;

/// One aligned feature surface of `class`, with fixed dimensions and seed.
pub fn aligned_feature(class: usize, seed: u64) -> FeatureSubmesh {
    let (f, _) = gen_feature_surface(class, &GenSpec::default(), &mut seeded_rng(seed)).expect("known class");
    align_feature(&f).0
}

/// Labelled signatures for `per_class` samples of every class.
pub fn labelled_signatures(per_class: usize, nv: usize, seed: u64) -> Vec<LabeledSample> {
    let sampling = make_sphere_sampling(nv).expect("supported nv");
    gen_corpus(per_class, &GenSpec::default(), seed)
        .expect("corpus generates")
        .iter()
        .map(|(label, f)| LabeledSample {
            signature: compute_signature(&align_feature(f).0, &sampling).expect("feature has area"),
            label: *label,
        })
        .collect()
}

/// A block with a through hole, a blind hole, a rectangular pocket and a
/// through slot.
pub fn mixed_block() -> TriangleMesh {
    let features = [
        Placement { class: 1, center: [2.0, 2.0], size: [1.5, 1.5], depth: 0.0 },
        Placement { class: 2, center: [2.0, 7.5], size: [1.2, 1.2], depth: 3.0 },
        Placement { class: 10, center: [5.5, 2.5], size: [2.0, 3.0], depth: 2.0 },
        Placement { class: 7, center: [8.5, 5.0], size: [1.0, 0.0], depth: 2.5 },
    ];
    gen_block_with_features(&features, &mut seeded_rng(3)).expect("valid layout").mesh
}
