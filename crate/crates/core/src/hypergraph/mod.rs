//! Conflict hypergraphs.
//!
//! Vertices are the support points of a dataset. A set of vertices with
//! pairwise-distinct labels is a hyperedge when the closed ε-balls around
//! its points share a common point. The edge set is downward closed, so
//! degree-k edges are found by extending degree-(k−1) edges with common
//! neighbours of the degree-2 graph and re-checking the geometry.

mod build;
mod json;

pub use build::{build_conflict_graph, extend_hyperedges};
pub use json::HypergraphJson;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::geometry;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub label: usize,
    pub mass: f64,
}

/// Sorted vertex ids of one hyperedge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hyperedge(Vec<usize>);

impl Hyperedge {
    pub fn new(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Hyperedge(ids)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

/// Counters gathered while enumerating edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeTelemetry {
    /// Candidate vertex sets passed to the geometric test, per degree.
    pub candidates_tested: BTreeMap<usize, usize>,
    /// Tests whose enclosing radius fell inside the tolerance band around ε.
    pub boundary_tight: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictHypergraph {
    epsilon: f64,
    max_degree: usize,
    vertices: Vec<Vertex>,
    /// `edges[k]` holds the degree-k edges in lexicographic order.
    edges: Vec<Vec<Hyperedge>>,
    /// Sorted neighbour lists of the degree-2 graph.
    neighbors: Vec<Vec<usize>>,
    telemetry: EdgeTelemetry,
}

impl ConflictHypergraph {
    /// Assembles a hypergraph from explicit edges without any geometry.
    /// Edges must have 2..=`max_degree` distinct vertices with distinct labels.
    pub fn from_parts(
        epsilon: f64,
        max_degree: usize,
        vertices: Vec<Vertex>,
        edges: impl IntoIterator<Item = Hyperedge>,
    ) -> Result<Self> {
        if max_degree < 2 {
            return Err(Error::InvalidArgument(format!("max degree {max_degree} < 2")));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.id != i {
                return Err(Error::InvalidArgument(format!(
                    "vertex at position {i} has id {}",
                    v.id
                )));
            }
        }
        let mut by_degree: Vec<Vec<Hyperedge>> = vec![Vec::new(); max_degree + 1];
        for e in edges {
            let k = e.degree();
            if k < 2 || k > max_degree {
                return Err(Error::InvalidArgument(format!("edge {:?} has degree {k}", e.0)));
            }
            if let Some(&bad) = e.0.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument(format!("edge references unknown vertex {bad}")));
            }
            let mut labels: Vec<usize> = e.0.iter().map(|&v| vertices[v].label).collect();
            labels.sort_unstable();
            if labels.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument(format!("edge {:?} repeats a label", e.0)));
            }
            by_degree[k].push(e);
        }
        for list in &mut by_degree {
            list.sort();
            list.dedup();
        }
        let neighbors = adjacency(vertices.len(), &by_degree[2]);
        Ok(ConflictHypergraph {
            epsilon,
            max_degree,
            vertices,
            edges: by_degree,
            neighbors,
            telemetry: EdgeTelemetry::default(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.mass).collect()
    }

    /// Edges of exactly degree `k`.
    pub fn edges_of_degree(&self, k: usize) -> &[Hyperedge] {
        self.edges.get(k).map_or(&[], Vec::as_slice)
    }

    /// All edges, by increasing degree then lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = &Hyperedge> {
        self.edges.iter().flatten()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Number of edges of each exact degree ≥ 2 (dominated edges included).
    pub fn edge_counts(&self) -> BTreeMap<usize, usize> {
        (2..=self.max_degree)
            .map(|k| (k, self.edges_of_degree(k).len()))
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree_of(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn telemetry(&self) -> &EdgeTelemetry {
        &self.telemetry
    }

    pub fn contains_edge(&self, e: &Hyperedge) -> bool {
        self.edges_of_degree(e.degree()).binary_search(e).is_ok()
    }

    /// Copy restricted to edges of degree ≤ `m`.
    pub fn truncated(&self, m: usize) -> ConflictHypergraph {
        let m = m.clamp(2, self.max_degree);
        let mut g = self.clone();
        g.edges.truncate(m + 1);
        g.max_degree = m;
        g.telemetry.candidates_tested.retain(|&k, _| k <= m);
        g
    }

    /// A point inside every ε-ball of the edge's members: the midpoint for
    /// pairs, the minimum-enclosing-ball center otherwise.
    pub fn witness(&self, dataset: &LabeledDataset, edge: &[usize]) -> Result<Vec<f64>> {
        if dataset.len() != self.vertices.len() {
            return Err(Error::InvalidArgument(format!(
                "dataset has {} vertices, hypergraph has {}",
                dataset.len(),
                self.vertices.len()
            )));
        }
        witness_point(dataset, edge)
    }
}

pub(crate) fn witness_point(dataset: &LabeledDataset, edge: &[usize]) -> Result<Vec<f64>> {
    match edge {
        [] => Err(Error::InvalidArgument("empty edge".into())),
        [v] => Ok(dataset.point(*v).to_vec()),
        [a, b] => Ok(dataset
            .point(*a)
            .iter()
            .zip(dataset.point(*b))
            .map(|(x, y)| 0.5 * (x + y))
            .collect()),
        _ => {
            let pts: Vec<&[f64]> = edge.iter().map(|&v| dataset.point(v)).collect();
            Ok(geometry::min_enclosing_ball(&pts)?.center)
        }
    }
}

fn adjacency(n: usize, pairs: &[Hyperedge]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for e in pairs {
        let (a, b) = (e.0[0], e.0[1]);
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Edge–vertex incidence matrix `B`, stored as sorted row supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    num_vertices: usize,
    rows: Vec<Vec<usize>>,
}

impl IncidenceMatrix {
    pub fn new(num_vertices: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for r in &rows {
            if r.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("row {r:?} is not strictly increasing")));
            }
            if r.last().is_some_and(|&v| v >= num_vertices) {
                return Err(Error::InvalidArgument(format!("row {r:?} out of range")));
            }
        }
        Ok(IncidenceMatrix { num_vertices, rows })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn row(&self, e: usize) -> &[usize] {
        &self.rows[e]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, e: usize, v: usize) -> u8 {
        u8::from(self.rows[e].binary_search(&v).is_ok())
    }

    /// Rows containing each vertex.
    pub fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.num_vertices];
        for (e, r) in self.rows.iter().enumerate() {
            for &v in r {
                cols[v].push(e);
            }
        }
        cols
    }

    /// `B q`.
    pub fn mul(&self, q: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&v| q[v]).sum()).collect()
    }

    /// `Bᵀ z`.
    pub fn mul_transpose(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vertices];
        for (r, &ze) in self.rows.iter().zip(z) {
            for &v in r {
                out[v] += ze;
            }
        }
        out
    }

    pub fn with_row(&self, row: Vec<usize>) -> Result<Self> {
        let mut rows = self.rows.clone();
        rows.push(row);
        Self::new(self.num_vertices, rows)
    }
}

/// Incidence matrix of all edges of `graph`. With `dedupe_dominated`, edges
/// contained in another edge are dropped: for `q ≥ 0` their constraint is
/// implied by the larger edge's row.
pub fn incidence(graph: &ConflictHypergraph, dedupe_dominated: bool) -> IncidenceMatrix {
    let mut dominated: HashSet<&[usize]> = HashSet::new();
    let mut scratch_subsets: HashSet<Vec<usize>> = HashSet::new();
    if dedupe_dominated {
        for e in graph.edges().filter(|e| e.degree() >= 3) {
            let ids = e.vertices();
            let k = ids.len();
            for mask in 1u32..((1u32 << k) - 1) {
                if mask.count_ones() < 2 {
                    continue;
                }
                let sub: Vec<usize> = (0..k).filter(|b| mask & (1 << b) != 0).map(|b| ids[b]).collect();
                scratch_subsets.insert(sub);
            }
        }
        for e in graph.edges() {
            if scratch_subsets.contains(e.vertices()) {
                dominated.insert(e.vertices());
            }
        }
    }
    let rows = graph
        .edges()
        .filter(|e| !dominated.contains(e.vertices()))
        .map(|e| e.vertices().to_vec())
        .collect();
    IncidenceMatrix {
        num_vertices: graph.num_vertices(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn verts(labels: &[usize]) -> Vec<Vertex> {
        let n = labels.len() as f64;
        labels
            .iter()
            .enumerate()
            .map(|(id, &label)| Vertex {
                id,
                label,
                mass: 1.0 / n,
            })
            .collect()
    }

    #[test]
    fn triangle_incidence() {
        let g = ConflictHypergraph::from_parts(
            1.0,
            3,
            verts(&[0, 1, 2]),
            [vec![0, 1], vec![0, 2], vec![1, 2]].map(Hyperedge::new),
        )
        .unwrap();
        let b = incidence(&g, true);
        assert_eq!(b.num_rows(), 3);
        assert!(b.rows().iter().all(|r| r.len() == 2));
    }

    #[test]
    fn degree_three_edge_dominates_subedges() {
        let g = ConflictHypergraph::from_parts(
            1.0,
            3,
            verts(&[0, 1, 2]),
            [vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]].map(Hyperedge::new),
        )
        .unwrap();
        let b = incidence(&g, true);
        assert_eq!(b.rows(), &[vec![0, 1, 2]]);
        let full = incidence(&g, false);
        assert_eq!(full.num_rows(), 4);
        assert_eq!(g.edge_counts(), BTreeMap::from([(2, 3), (3, 1)]));
    }

    #[test]
    fn empty_edge_set() {
        let g = ConflictHypergraph::from_parts(0.0, 2, verts(&[0, 1]), Vec::new()).unwrap();
        let b = incidence(&g, true);
        assert_eq!(b.num_rows(), 0);
        assert_eq!(b.num_vertices(), 2);
    }

    #[test]
    fn from_parts_validates() {
        assert!(ConflictHypergraph::from_parts(1.0, 3, verts(&[0, 0]), [Hyperedge::new(vec![0, 1])]).is_err());
        assert!(ConflictHypergraph::from_parts(1.0, 2, verts(&[0, 1]), [Hyperedge::new(vec![0, 5])]).is_err());
        assert!(ConflictHypergraph::from_parts(1.0, 1, verts(&[0, 1]), Vec::new()).is_err());
    }

    #[test]
    fn incidence_products() {
        let b = IncidenceMatrix::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(b.mul(&[1.0, 2.0, 3.0]), vec![3.0, 5.0]);
        assert_eq!(b.mul_transpose(&[1.0, 10.0]), vec![1.0, 11.0, 10.0]);
        assert_eq!(b.get(0, 1), 1);
        assert_eq!(b.get(0, 2), 0);
        assert!(IncidenceMatrix::new(3, vec![vec![1, 0]]).is_err());
    }
}
