//! Discrete Gaussian curvature sign (angle deficit) and edge concavity.

use std::f64::consts::TAU;

use super::{EdgeAdjacency, TriangleMesh};
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Per-vertex angle deficit `2π - Σθ`. The sign stands in for the sign of
/// the Gaussian curvature; boundary and isolated vertices carry 0.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub deficit: Vec<f64>,
    pub boundary: Vec<bool>,
    pub isolated: Vec<bool>,
}

impl CurvatureField {
    /// Interior vertex with a negative deficit beyond `ANGLE_EPS`.
    pub fn is_hyperbolic(&self, v: usize) -> bool {
        !self.boundary[v] && !self.isolated[v] && self.deficit[v] < -super::ANGLE_EPS
    }

    pub fn total(&self) -> f64 {
        self.deficit.iter().sum()
    }
}

fn corner_angle(at: &Vec3, p: &Vec3, q: &Vec3) -> f64 {
    let (u, v) = (p - at, q - at);
    u.cross(&v).norm().atan2(u.dot(&v))
}

pub fn vertex_angle_deficit(mesh: &TriangleMesh, adjacency: &EdgeAdjacency) -> CurvatureField {
    let n = mesh.vertex_count();
    let mut sum = vec![0.0; n];
    let mut isolated = vec![true; n];
    let v = mesh.vertices();
    for &[a, b, c] in mesh.faces() {
        sum[a] += corner_angle(&v[a], &v[b], &v[c]);
        sum[b] += corner_angle(&v[b], &v[c], &v[a]);
        sum[c] += corner_angle(&v[c], &v[a], &v[b]);
        isolated[a] = false;
        isolated[b] = false;
        isolated[c] = false;
    }
    let mut boundary = vec![false; n];
    for e in adjacency.edges() {
        if !e.is_manifold() {
            boundary[e.vertices.0] = true;
            boundary[e.vertices.1] = true;
        }
    }
    let deficit = (0..n)
        .map(|i| {
            if boundary[i] || isolated[i] {
                0.0
            } else {
                TAU - sum[i]
            }
        })
        .collect();
    CurvatureField {
        deficit,
        boundary,
        isolated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concavity {
    Convex,
    Concave,
    Planar,
}

/// Classifies a manifold edge by where the second face's centroid sits
/// relative to the first face's plane.
pub fn classify_edge_concavity(
    mesh: &TriangleMesh,
    adjacency: &EdgeAdjacency,
    edge: usize,
) -> Result<Concavity> {
    classify_with_eps(mesh, adjacency, edge, mesh.plane_eps())
}

pub(crate) fn classify_with_eps(
    mesh: &TriangleMesh,
    adjacency: &EdgeAdjacency,
    edge: usize,
    eps: f64,
) -> Result<Concavity> {
    let e = adjacency.edge(edge);
    if !e.is_manifold() {
        return Err(Error::NotClassifiable(e.vertices.0, e.vertices.1, e.faces.len()));
    }
    let (f1, f2) = (e.faces[0], e.faces[1]);
    let n1 = mesh.face_normals()[f1].0;
    let s = n1.dot(&(mesh.face_centroid(f2) - mesh.face_centroid(f1)));
    Ok(if s > eps {
        Concavity::Concave
    } else if s < -eps {
        Concavity::Convex
    } else {
        Concavity::Planar
    })
}
