//! Random forest of CART trees with probability-averaging prediction and a
//! versioned JSON format.

mod tree;

pub use tree::{best_split, fit_tree_rows, gini_impurity, midpoint, Matrix, Node, Split, Tree, TreeParams, DECREASE_TIE};

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signature::GaussSignature;

pub const FORMAT_VERSION: u32 = 1;

/// A signature with its class id.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub signature: GaussSignature,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// `None` means `floor(sqrt(nv))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            n_estimators: 130,
            max_depth: 100,
            min_samples_split: 2,
            features_per_split: None,
            bootstrap: true,
            seed: 42,
        }
    }
}

impl HyperParams {
    /// A single deterministic CART tree: all features, no bootstrap.
    pub fn single_tree(seed: u64) -> Self {
        Self {
            n_estimators: 1,
            features_per_split: Some(usize::MAX),
            bootstrap: false,
            seed,
            ..Self::default()
        }
    }

    /// Copy with `features_per_split` fixed for `nv` features.
    pub fn resolved(&self, nv: usize) -> Self {
        let k = self
            .features_per_split
            .unwrap_or(((nv as f64).sqrt().floor() as usize).max(1))
            .min(nv);
        Self {
            features_per_split: Some(k),
            ..*self
        }
    }

    pub fn validate(&self, nv: usize) -> Result<()> {
        if self.n_estimators == 0 || self.max_depth == 0 || self.min_samples_split == 0 {
            return Err(Error::Config("n_estimators, max_depth and min_samples_split must be positive".into()));
        }
        if let Some(k) = self.features_per_split {
            if k == 0 || k > nv {
                return Err(Error::Config(format!("features_per_split {k} not in 1..={nv}")));
            }
        }
        Ok(())
    }

    fn tree_params(&self, nv: usize) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            features_per_split: self.resolved(nv).features_per_split.unwrap(),
        }
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of tree `k`, independent of evaluation order.
pub fn tree_seed(seed: u64, k: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub nv: usize,
    pub params: HyperParams,
    pub classes: Vec<String>,
    pub seed: u64,
    pub trees: Vec<Tree>,
}

fn to_matrix(samples: &[LabeledSample], n_classes: usize) -> Result<Matrix> {
    let rows: Vec<&[f64]> = samples.iter().map(|s| s.signature.values.as_slice()).collect();
    let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
    Matrix::new(&rows, &labels, n_classes)
}

fn check_samples(samples: &[LabeledSample]) -> Result<usize> {
    let first = samples
        .first()
        .ok_or_else(|| Error::EmptyInput("no training samples".into()))?;
    let nv = first.signature.nv;
    if let Some(s) = samples.iter().find(|s| s.signature.nv != nv || s.signature.values.len() != nv) {
        return Err(Error::Dataset(format!(
            "inconsistent signature length: {} vs {nv}",
            s.signature.values.len()
        )));
    }
    Ok(nv)
}

/// One tree on all given samples (no bootstrap).
pub fn fit_tree<R: Rng + ?Sized>(
    samples: &[LabeledSample],
    n_classes: usize,
    params: &HyperParams,
    rng: &mut R,
) -> Result<Tree> {
    let nv = check_samples(samples)?;
    let params = params.resolved(nv);
    params.validate(nv)?;
    let data = to_matrix(samples, n_classes)?;
    Ok(fit_tree_rows(&data, (0..data.len()).collect(), &params.tree_params(nv), rng))
}

/// Fits `n_estimators` trees in parallel. Tree `k` draws its bootstrap
/// sample and split features from its own seed, so the result does not
/// depend on scheduling.
pub fn fit_forest(samples: &[LabeledSample], classes: &[String], params: &HyperParams) -> Result<ForestModel> {
    let nv = check_samples(samples)?;
    let params = params.resolved(nv);
    params.validate(nv)?;
    let data = to_matrix(samples, classes.len())?;
    let tp = params.tree_params(nv);
    let n = data.len();
    let trees: Vec<Tree> = (0..params.n_estimators as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(params.seed, k));
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree_rows(&data, rows, &tp, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        format_version: FORMAT_VERSION,
        nv,
        params,
        classes: classes.to_vec(),
        seed: params.seed,
        trees,
    })
}

impl ForestModel {
    fn check_nv(&self, sig: &GaussSignature) -> Result<()> {
        if sig.values.len() != self.nv {
            return Err(Error::Mismatch(format!(
                "signature has {} values, model expects nv={}",
                sig.values.len(),
                self.nv
            )));
        }
        Ok(())
    }

    /// Mean of the per-tree leaf class distributions.
    pub fn predict_proba(&self, sig: &GaussSignature) -> Result<Vec<f64>> {
        self.check_nv(sig)?;
        let mut p = vec![0.0; self.classes.len()];
        for t in &self.trees {
            for (acc, q) in p.iter_mut().zip(t.predict_proba(&sig.values)) {
                *acc += q;
            }
        }
        let k = self.trees.len() as f64;
        p.iter_mut().for_each(|v| *v /= k);
        Ok(p)
    }

    /// Argmax of [`Self::predict_proba`], lowest class id on ties.
    pub fn predict_label(&self, sig: &GaussSignature) -> Result<usize> {
        Ok(argmax(&self.predict_proba(sig)?))
    }

    /// Impurity-decrease importances, normalized per tree and averaged.
    pub fn feature_importances(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.nv];
        for t in &self.trees {
            let mut imp = vec![0.0; self.nv];
            node_counts(t, 0, &mut imp);
            let s: f64 = imp.iter().sum();
            if s > 0.0 {
                for (a, v) in total.iter_mut().zip(&imp) {
                    *a += v / s;
                }
            }
        }
        let k = self.trees.len().max(1) as f64;
        total.iter_mut().for_each(|v| *v /= k);
        total
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ForestModel =
            serde_json::from_str(text).map_err(|e| Error::Persistence(format!("model JSON: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    /// Structural checks run after loading.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Persistence(m));
        if self.format_version != FORMAT_VERSION {
            return bad(format!(
                "format_version {} not supported (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        if self.trees.len() != self.params.n_estimators {
            return bad(format!("{} trees, params say {}", self.trees.len(), self.params.n_estimators));
        }
        if self.classes.is_empty() {
            return bad("empty class registry".into());
        }
        for (ti, t) in self.trees.iter().enumerate() {
            if t.nodes.is_empty() {
                return bad(format!("tree {ti} has no nodes"));
            }
            for (ni, n) in t.nodes.iter().enumerate() {
                match n {
                    Node::Split {
                        feature, left, right, threshold,
                    } => {
                        if *feature >= self.nv
                            || *left <= ni
                            || *right <= ni
                            || *left >= t.nodes.len()
                            || *right >= t.nodes.len()
                            || !threshold.is_finite()
                        {
                            return bad(format!("tree {ti} node {ni} is malformed"));
                        }
                    }
                    Node::Leaf { counts } => {
                        if counts.len() != self.classes.len() || counts.iter().sum::<usize>() == 0 {
                            return bad(format!("tree {ti} leaf {ni} has bad class counts"));
                        }
                    }
                }
            }
            if t.depth() > self.params.max_depth {
                return bad(format!("tree {ti} deeper than max_depth"));
            }
        }
        Ok(())
    }
}

fn node_counts(t: &Tree, i: usize, imp: &mut [f64]) -> Vec<usize> {
    match &t.nodes[i] {
        Node::Leaf { counts } => counts.clone(),
        Node::Split {
            feature, left, right, ..
        } => {
            let l = node_counts(t, *left, imp);
            let r = node_counts(t, *right, imp);
            let c: Vec<usize> = l.iter().zip(&r).map(|(a, b)| a + b).collect();
            let w = |v: &[usize]| {
                let n: usize = v.iter().sum();
                n as f64 * gini_impurity(v).unwrap_or(0.0)
            };
            imp[*feature] += w(&c) - w(&l) - w(&r);
            c
        }
    }
}

pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in p.iter().enumerate() {
        if *v > p[best] {
            best = i;
        }
    }
    best
}

pub fn save_model(model: &ForestModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ForestModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ForestModel::from_json(&text)
}
