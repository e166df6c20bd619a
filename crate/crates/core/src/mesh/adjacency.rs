use std::collections::HashMap;

use super::TriangleMesh;

/// An undirected edge `(lo, hi)` with its incident faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub vertices: (usize, usize),
    pub faces: Vec<usize>,
}

impl Edge {
    pub fn is_manifold(&self) -> bool {
        self.faces.len() == 2
    }

    pub fn is_boundary(&self) -> bool {
        self.faces.len() == 1
    }

    pub fn is_non_manifold(&self) -> bool {
        self.faces.len() >= 3
    }
}

/// Undirected edge table. Edges are sorted by vertex pair.
#[derive(Debug, Clone)]
pub struct EdgeAdjacency {
    edges: Vec<Edge>,
    lookup: HashMap<(usize, usize), usize>,
    face_edges: Vec<[usize; 3]>,
}

impl EdgeAdjacency {
    pub fn build(mesh: &TriangleMesh) -> Self {
        let mut raw: Vec<((usize, usize), usize, usize)> = Vec::with_capacity(mesh.face_count() * 3);
        for (fi, f) in mesh.faces().iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                raw.push(((a.min(b), a.max(b)), fi, k));
            }
        }
        raw.sort_unstable();
        let mut edges: Vec<Edge> = Vec::new();
        let mut face_edges = vec![[usize::MAX; 3]; mesh.face_count()];
        for (key, face, slot) in raw {
            match edges.last_mut() {
                Some(e) if e.vertices == key => e.faces.push(face),
                _ => edges.push(Edge {
                    vertices: key,
                    faces: vec![face],
                }),
            }
            face_edges[face][slot] = edges.len() - 1;
        }
        let lookup = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.vertices, i))
            .collect();
        Self {
            edges,
            lookup,
            face_edges,
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Edge id for an unordered vertex pair.
    pub fn find(&self, a: usize, b: usize) -> Option<usize> {
        self.lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// Edge ids of a face, in the order (v0v1, v1v2, v2v0).
    pub fn face_edges(&self, face: usize) -> [usize; 3] {
        self.face_edges[face]
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.is_boundary())
    }

    pub fn non_manifold_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_non_manifold()).count()
    }

    /// True when every edge has exactly two incident faces.
    pub fn is_closed_manifold(&self) -> bool {
        self.edges.iter().all(Edge::is_manifold)
    }

    /// Faces sharing an edge with `face` (excluding itself).
    pub fn face_neighbors(&self, face: usize) -> impl Iterator<Item = usize> + '_ {
        self.face_edges[face]
            .into_iter()
            .flat_map(move |e| self.edges[e].faces.iter().copied())
            .filter(move |&f| f != face)
    }
}
