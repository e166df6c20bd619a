use std::sync::OnceLock;

use featrec_core::datagen::{gen_block_with_features, gen_corpus, gen_single_feature_block, ClassRegistry, GenSpec, Placement};
use featrec_core::forest::{ForestModel, HyperParams, LabeledSample};
use featrec_core::geom::Vec3;
use featrec_core::extraction::FeatureSubmesh;
use featrec_core::pipeline::{feature_signature, predict_mesh, recognize, split_dataset, train_pipeline, Dataset};
use featrec_core::signature::SphereSampling;
use featrec_core::TriangleMesh;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model() -> &'static ForestModel {
    static M: OnceLock<ForestModel> = OnceLock::new();
    M.get_or_init(|| {
        let s = SphereSampling::new(102).unwrap();
        let samples = gen_corpus(120, &GenSpec::default(), 5)
            .unwrap()
            .iter()
            .map(|(c, f)| LabeledSample { signature: feature_signature(f, &s).unwrap(), label: *c })
            .collect();
        let ds = Dataset::new(ClassRegistry::standard().names(), samples).unwrap();
        let split = split_dataset(&ds.labels(), &ds.classes, [80, 0, 20], 5).unwrap();
        let out = train_pipeline(&ds, &HyperParams::default(), &split, Some(102)).unwrap();
        assert_eq!(out.train_accuracy, 1.0);
        assert!(out.validation.is_none());
        out.model
    })
}

#[test]
fn blind_hole_block_is_labelled_blind_hole() {
    let block = gen_single_feature_block(2, &GenSpec::default(), &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let r = predict_mesh(model(), &block.mesh, "blind").unwrap();
    assert_eq!(r.features.len(), 1);
    assert_eq!(r.features[0].class_name, "blind hole");
    assert_eq!(r.features[0].face_count, block.feature_faces(0).len());
}

#[test]
fn hole_pocket_and_slot_block_gets_three_correct_labels() {
    let p = |class, center, size, depth| Placement { class, center, size, depth };
    let features = [p(1, [2.5, 2.5], [2.0, 2.0], 0.0), p(10, [2.5, 7.0], [2.5, 3.0], 2.5), p(7, [7.5, 5.0], [2.0, 0.0], 3.0)];
    let block = gen_block_with_features(&features, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let r = predict_mesh(model(), &block.mesh, "mixed").unwrap();
    assert_eq!(r.features.len(), 3);
    let mut got: Vec<&str> = r.features.iter().map(|f| f.class_name.as_str()).collect();
    got.sort_unstable();
    assert_eq!(got, ["rectangular pocket", "rectangular through slot", "through hole"]);
}

/// A closed pipe (outer and inner wall, annular caps) is no trained class;
/// it still gets the nearest one.
#[test]
fn unseen_tube_gets_some_label() {
    let n = 32;
    let mut v = Vec::new();
    for (r, z) in [(3.0, 0.0), (3.0, 20.0), (2.0, 0.0), (2.0, 20.0)] {
        for k in 0..n {
            let a = k as f64 * std::f64::consts::TAU / n as f64;
            v.push(Vec3::new(r * a.cos(), r * a.sin(), z));
        }
    }
    let (ob, ot, ib, it) = (0, n, 2 * n, 3 * n);
    let mut f = Vec::new();
    for k in 0..n {
        let j = (k + 1) % n;
        f.push([ob + k, ob + j, ot + j]);
        f.push([ob + k, ot + j, ot + k]);
        f.push([ib + k, it + j, ib + j]);
        f.push([ib + k, it + k, it + j]);
        f.push([ot + k, ot + j, it + j]);
        f.push([ot + k, it + j, it + k]);
        f.push([ob + k, ib + j, ob + j]);
        f.push([ob + k, ib + k, ib + j]);
    }
    let mesh = TriangleMesh::new(v, f).unwrap();
    let r = recognize(model(), &[FeatureSubmesh::external(mesh).unwrap()]).unwrap();
    assert_eq!(r.len(), 1);
    assert!(r[0].label < 24);
    assert!(r[0].probability > 0.0 && r[0].probability <= 1.0);
}
