use serde::{Deserialize, Serialize};

use super::{ConflictHypergraph, Hyperedge, Vertex};
use crate::error::Result;

/// On-disk form of a hypergraph:
/// `{epsilon, max_degree, vertices: [{id, label, mass}], edges: [[ids…]]}`.
///
/// Geometry is not stored, so reading a document back skips re-enumeration
/// but also trusts its edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergraphJson {
    pub epsilon: f64,
    pub max_degree: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Hyperedge>,
}

impl From<&ConflictHypergraph> for HypergraphJson {
    fn from(g: &ConflictHypergraph) -> Self {
        HypergraphJson {
            epsilon: g.epsilon,
            max_degree: g.max_degree,
            vertices: g.vertices.clone(),
            edges: g.edges().cloned().collect(),
        }
    }
}

impl HypergraphJson {
    pub fn into_graph(self) -> Result<ConflictHypergraph> {
        let edges = self.edges.into_iter().map(|e| Hyperedge::new(e.0));
        ConflictHypergraph::from_parts(self.epsilon, self.max_degree, self.vertices, edges)
    }

    pub fn to_json(graph: &ConflictHypergraph) -> Result<String> {
        Ok(serde_json::to_string(&HypergraphJson::from(graph))?)
    }

    pub fn from_json(text: &str) -> Result<ConflictHypergraph> {
        serde_json::from_str::<HypergraphJson>(text)?.into_graph()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::tests::verts;

    #[test]
    fn round_trip() {
        let g = ConflictHypergraph::from_parts(
            0.25,
            3,
            verts(&[0, 1, 2, 1]),
            [vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2], vec![2, 3]].map(Hyperedge::new),
        )
        .unwrap();
        let text = HypergraphJson::to_json(&g).unwrap();
        assert!(text.contains("\"edges\":[[0,1],[0,2],[1,2],[2,3],[0,1,2]]"));
        let back = HypergraphJson::from_json(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rejects_bad_edges() {
        let text = r#"{"epsilon":1.0,"max_degree":2,"vertices":[{"id":0,"label":0,"mass":1.0}],"edges":[[0,1]]}"#;
        assert!(HypergraphJson::from_json(text).is_err());
    }
}
