//! CART trees over dense feature rows with Gini impurity.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Impurity decreases closer than this are treated as equal, and a split
/// must beat zero by more than this to count.
pub const DECREASE_TIE: f64 = 1e-12;

/// `1 - Σ (c_i / N)²`.
pub fn gini_impurity(counts: &[usize]) -> Result<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::Domain("gini impurity of an empty node".into()));
    }
    Ok(gini_unchecked(counts, n))
}

fn gini_unchecked(counts: &[usize], n: usize) -> f64 {
    let nf = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / nf;
            p * p
        })
        .sum::<f64>()
}

/// Row-major feature matrix with integer labels.
#[derive(Debug, Clone)]
pub struct Matrix {
    pub(crate) x: Vec<f64>,
    pub(crate) y: Vec<usize>,
    pub(crate) dim: usize,
    pub(crate) n_classes: usize,
}

impl Matrix {
    pub fn new(rows: &[&[f64]], labels: &[usize], n_classes: usize) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Dataset("row and label counts differ".into()));
        }
        let dim = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dataset("rows have different lengths".into()));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Dataset(format!("label {l} out of range ({n_classes} classes)")));
        }
        Ok(Self {
            x: rows.iter().flat_map(|r| r.iter().copied()).collect(),
            y: labels.to_vec(),
            dim,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn at(&self, row: usize, feature: usize) -> f64 {
        self.x[row * self.dim + feature]
    }

    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &r in rows {
            c[self.y[r]] += 1;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: f64,
}

/// Midpoint threshold between consecutive distinct values. When rounding
/// puts the midpoint on the upper value, the lower value is used so that
/// `x <= t` still separates the two.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

/// Best Gini split of `rows` over `features`: the largest impurity decrease,
/// with near-ties going to the lowest feature, then the lowest threshold.
/// Rows may repeat (bootstrap multiplicity).
pub fn best_split(data: &Matrix, rows: &[usize], features: &[usize]) -> Option<Split> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let parent = data.counts(rows);
    let parent_gini = gini_unchecked(&parent, n);
    let mut sorted_features = features.to_vec();
    sorted_features.sort_unstable();
    sorted_features.dedup();

    let mut candidates: Vec<Split> = Vec::new();
    let mut order = rows.to_vec();
    let mut left = vec![0usize; data.n_classes];
    for &f in &sorted_features {
        order.sort_by(|&a, &b| data.at(a, f).total_cmp(&data.at(b, f)));
        left.iter_mut().for_each(|c| *c = 0);
        for i in 0..n - 1 {
            left[data.y[order[i]]] += 1;
            let (lo, hi) = (data.at(order[i], f), data.at(order[i + 1], f));
            if lo == hi {
                continue;
            }
            let nl = i + 1;
            let nr = n - nl;
            let right: Vec<usize> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
            let weighted = (nl as f64 * gini_unchecked(&left, nl) + nr as f64 * gini_unchecked(&right, nr))
                / n as f64;
            candidates.push(Split {
                feature: f,
                threshold: midpoint(lo, hi),
                decrease: parent_gini - weighted,
            });
        }
    }
    pick_best(&candidates)
}

/// Maximum decrease, then lexicographically smallest (feature, threshold)
/// among those within [`DECREASE_TIE`] of it.
pub(crate) fn pick_best(candidates: &[Split]) -> Option<Split> {
    let max = candidates.iter().map(|s| s.decrease).fold(f64::NEG_INFINITY, f64::max);
    if !(max > DECREASE_TIE) {
        return None;
    }
    candidates
        .iter()
        .filter(|s| s.decrease >= max - DECREASE_TIE)
        .min_by(|a, b| a.feature.cmp(&b.feature).then(a.threshold.total_cmp(&b.threshold)))
        .copied()
}

/// A flattened tree node. Children are indices into [`Tree::nodes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

/// A CART tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

/// Stopping and sampling controls for one tree.
#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub features_per_split: usize,
}

impl Tree {
    pub fn leaf_for(&self, x: &[f64]) -> &[usize] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn rec(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + rec(t, *left).max(rec(t, *right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            rec(self, 0)
        }
    }

    /// Class distribution of the leaf reached by `x`.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let counts = self.leaf_for(x);
        let total: usize = counts.iter().sum();
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

/// Grows a tree on `rows` (with multiplicity). At each node a random
/// permutation of the features is drawn and the first
/// `features_per_split` are searched; if none of them splits, the search
/// continues along the permutation until one does or features run out.
pub fn fit_tree_rows<R: Rng + ?Sized>(data: &Matrix, rows: Vec<usize>, params: &TreeParams, rng: &mut R) -> Tree {
    let mut tree = Tree { nodes: Vec::new() };
    grow(data, rows, 0, params, rng, &mut tree);
    tree
}

fn grow<R: Rng + ?Sized>(
    data: &Matrix,
    rows: Vec<usize>,
    depth: usize,
    params: &TreeParams,
    rng: &mut R,
    tree: &mut Tree,
) -> usize {
    let counts = data.counts(&rows);
    let id = tree.nodes.len();
    tree.nodes.push(Node::Leaf { counts: counts.clone() });
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || depth >= params.max_depth || rows.len() < params.min_samples_split.max(2) {
        return id;
    }
    let split = if params.features_per_split >= data.dim {
        best_split(data, &rows, &(0..data.dim).collect::<Vec<_>>())
    } else {
        let mut perm: Vec<usize> = (0..data.dim).collect();
        perm.shuffle(rng);
        let k = params.features_per_split.max(1);
        let mut found = best_split(data, &rows, &perm[..k]);
        let mut next = k;
        while found.is_none() && next < perm.len() {
            found = best_split(data, &rows, &perm[next..next + 1]);
            next += 1;
        }
        found
    };
    let Some(s) = split else { return id };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| data.at(i, s.feature) <= s.threshold);
    let left = grow(data, l, depth + 1, params, rng, tree);
    let right = grow(data, r, depth + 1, params, rng, tree);
    tree.nodes[id] = Node::Split {
        feature: s.feature,
        threshold: s.threshold,
        left,
        right,
    };
    id
}
