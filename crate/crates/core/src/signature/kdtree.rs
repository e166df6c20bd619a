//! A small static kd-tree over unit directions, queried by dot product.

use crate::geom::Vec3;

/// Dot products within this of the maximum count as ties.
pub const DOT_TIE: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Node {
    point: usize,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    nodes: Vec<Node>,
    root: Option<usize>,
}

impl KdTree {
    pub fn build(points: &[Vec3]) -> Self {
        let mut tree = Self {
            points: points.to_vec(),
            nodes: Vec::with_capacity(points.len()),
            root: None,
        };
        let mut idx: Vec<usize> = (0..points.len()).collect();
        tree.root = tree.build_rec(&mut idx, 0);
        tree
    }

    fn build_rec(&mut self, idx: &mut [usize], depth: usize) -> Option<usize> {
        if idx.is_empty() {
            return None;
        }
        let axis = depth % 3;
        let pts = &self.points;
        idx.sort_by(|&a, &b| pts[a][axis].total_cmp(&pts[b][axis]).then(a.cmp(&b)));
        let mid = idx.len() / 2;
        let point = idx[mid];
        let (lo, hi) = idx.split_at_mut(mid);
        let left = self.build_rec(lo, depth + 1);
        let right = self.build_rec(&mut hi[1..], depth + 1);
        self.nodes.push(Node {
            point,
            axis,
            left,
            right,
        });
        Some(self.nodes.len() - 1)
    }

    /// Index maximizing `dot(point, q)`; among points within [`DOT_TIE`] of
    /// the maximum, the lowest index. Matches [`brute_force_nearest`].
    pub fn nearest(&self, q: &Vec3) -> Option<usize> {
        let root = self.root?;
        // Greedy descent gives a lower bound on the best dot product.
        let mut node = root;
        let mut bound = f64::NEG_INFINITY;
        loop {
            let n = &self.nodes[node];
            bound = bound.max(self.points[n.point].dot(q));
            let go_left = q[n.axis] < self.points[n.point][n.axis];
            let next = if go_left { n.left.or(n.right) } else { n.right.or(n.left) };
            match next {
                Some(c) => node = c,
                None => break,
            }
        }
        // Every point with dot >= bound - DOT_TIE lies within this distance of
        // q when both are unit length; the slack absorbs non-unit rounding.
        let r2 = (2.0 - 2.0 * (bound - DOT_TIE)).max(0.0) + 1e-6;
        let radius = r2.sqrt();
        let mut found = Vec::new();
        self.range(root, q, radius, &mut found);
        let best = found
            .iter()
            .map(|&i| self.points[i].dot(q))
            .fold(f64::NEG_INFINITY, f64::max);
        found
            .into_iter()
            .filter(|&i| self.points[i].dot(q) >= best - DOT_TIE)
            .min()
    }

    fn range(&self, node: usize, q: &Vec3, radius: f64, out: &mut Vec<usize>) {
        let n = &self.nodes[node];
        let p = &self.points[n.point];
        if (p - q).norm() <= radius {
            out.push(n.point);
        }
        let diff = q[n.axis] - p[n.axis];
        if let Some(l) = n.left {
            if diff - radius <= 0.0 {
                self.range(l, q, radius, out);
            }
        }
        if let Some(r) = n.right {
            if diff + radius >= 0.0 {
                self.range(r, q, radius, out);
            }
        }
    }
}

/// Reference implementation of the tie-tolerant argmax.
pub fn brute_force_nearest(points: &[Vec3], q: &Vec3) -> Option<usize> {
    let best = points.iter().map(|p| p.dot(q)).fold(f64::NEG_INFINITY, f64::max);
    points.iter().position(|p| p.dot(q) >= best - DOT_TIE)
}
