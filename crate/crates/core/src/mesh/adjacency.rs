use std::collections::BTreeMap;

use super::Mesh;
use crate::scalar::Scalar;

/// Undirected edge with the faces that share it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// Endpoints, smaller index first.
    pub vertices: [usize; 2],
    /// One face for a boundary edge, two for an interior edge
    /// (more only on non-manifold input).
    pub faces: Vec<usize>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.faces.len() == 2
    }
}

/// Edge-to-face and vertex-to-vertex incidence, in deterministic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    pub edges: Vec<Edge>,
    /// Sorted neighbour lists per vertex.
    pub neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn new<T: Scalar>(mesh: &Mesh<T>) -> Self {
        Self::from_faces(mesh.vertex_count(), &mesh.faces)
    }

    pub fn from_faces(vertex_count: usize, faces: &[[usize; 3]]) -> Self {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (f, tri) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                map.entry((a.min(b), a.max(b))).or_default().push(f);
            }
        }
        let mut neighbors = vec![Vec::new(); vertex_count];
        for &(a, b) in map.keys() {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        let edges = map
            .into_iter()
            .map(|((a, b), faces)| Edge {
                vertices: [a, b],
                faces,
            })
            .collect();
        Self { edges, neighbors }
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.is_interior())
    }
}
