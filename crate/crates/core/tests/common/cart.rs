//! Exhaustive CART reference. Splits are scored in exact rational
//! arithmetic; thresholds are midpoints of consecutive distinct values.

use featrec_core::forest::{LabeledSample, Node, Tree};
use featrec_core::signature::GaussSignature;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rat(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn exact_gini(counts: &[usize]) -> BigRational {
    let n: usize = counts.iter().sum();
    let mut g = rat(1, 1);
    for &c in counts {
        g -= rat(c * c, n * n);
    }
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefSplit {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: BigRational,
}

/// Every feature, every pair of consecutive distinct values.
pub fn reference_best_split(x: &[Vec<f64>], y: &[usize], rows: &[usize], n_classes: usize) -> Option<RefSplit> {
    let n = rows.len();
    let mut parent = vec![0usize; n_classes];
    for &r in rows {
        parent[y[r]] += 1;
    }
    let pg = exact_gini(&parent);
    let dim = x[0].len();
    let mut best: Option<RefSplit> = None;
    for f in 0..dim {
        let mut values: Vec<f64> = rows.iter().map(|&r| x[r][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let mut left = vec![0usize; n_classes];
            let mut right = vec![0usize; n_classes];
            for &r in rows {
                if x[r][f] <= t {
                    left[y[r]] += 1;
                } else {
                    right[y[r]] += 1;
                }
            }
            let (nl, nr): (usize, usize) = (left.iter().sum(), right.iter().sum());
            let dec = pg.clone() - rat(nl, n) * exact_gini(&left) - rat(nr, n) * exact_gini(&right);
            if dec <= BigRational::zero() {
                continue;
            }
            // Strictly greater wins; equal keeps the earlier (feature, threshold).
            if best.as_ref().is_none_or(|b| dec > b.decrease) {
                best = Some(RefSplit { feature: f, threshold: t, decrease: dec });
            }
        }
    }
    best
}

#[derive(Debug, PartialEq)]
pub enum RefTree {
    Leaf(Vec<usize>),
    Split(usize, f64, Box<RefTree>, Box<RefTree>),
}

pub fn reference_cart(x: &[Vec<f64>], y: &[usize], rows: Vec<usize>, n_classes: usize, depth: usize, max_depth: usize) -> RefTree {
    let mut counts = vec![0usize; n_classes];
    for &r in &rows {
        counts[y[r]] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() <= 1 || depth >= max_depth || rows.len() < 2 {
        return RefTree::Leaf(counts);
    }
    match reference_best_split(x, y, &rows, n_classes) {
        None => RefTree::Leaf(counts),
        Some(s) => {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][s.feature] <= s.threshold);
            RefTree::Split(
                s.feature,
                s.threshold,
                Box::new(reference_cart(x, y, l, n_classes, depth + 1, max_depth)),
                Box::new(reference_cart(x, y, r, n_classes, depth + 1, max_depth)),
            )
        }
    }
}

pub fn to_ref(tree: &Tree, id: usize) -> RefTree {
    match &tree.nodes[id] {
        Node::Leaf { counts } => RefTree::Leaf(counts.clone()),
        Node::Split { feature, threshold, left, right } => {
            RefTree::Split(*feature, *threshold, Box::new(to_ref(tree, *left)), Box::new(to_ref(tree, *right)))
        }
    }
}

/// Values on a coarse grid so that equal values and tied decreases occur.
pub fn random_dataset(seed: u64, n: usize, dim: usize, n_classes: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect()).collect();
    let y = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();
    (x, y)
}

pub fn samples(x: &[Vec<f64>], y: &[usize]) -> Vec<LabeledSample> {
    x.iter()
        .zip(y)
        .map(|(v, &label)| LabeledSample { signature: GaussSignature { nv: v.len(), values: v.clone() }, label })
        .collect()
}

