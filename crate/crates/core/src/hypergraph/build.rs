use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use super::{adjacency, ConflictHypergraph, EdgeTelemetry, Hyperedge, Vertex};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::geometry::{self, RELATIVE_TOLERANCE};

const PROGRESS_EVERY: usize = 1_000_000;
const EARLY_EXIT_BLOCK: usize = 32;

/// `‖a − b‖² ≤ limit`, abandoning the sum once it exceeds `limit`.
fn within_squared(a: &[f64], b: &[f64], limit: f64) -> (bool, f64) {
    let mut acc = 0.0;
    for (ca, cb) in a.chunks(EARLY_EXIT_BLOCK).zip(b.chunks(EARLY_EXIT_BLOCK)) {
        acc += geometry::squared_distance(ca, cb);
        if acc > limit {
            return (false, acc);
        }
    }
    (true, acc)
}

/// Degree-2 conflict graph: every cross-class pair with `‖x_u − x_v‖ ≤ 2ε`.
pub fn build_conflict_graph(dataset: &LabeledDataset, epsilon: f64) -> Result<ConflictHypergraph> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(geometry::GeometryError::InvalidEpsilon(epsilon).into());
    }
    let n = dataset.len();
    let reach = 2.0 * epsilon * (1.0 + RELATIVE_TOLERANCE);
    let limit = reach * reach;
    let tight_lo = (2.0 * epsilon * (1.0 - RELATIVE_TOLERANCE)).powi(2);

    let per_vertex: Vec<(Vec<usize>, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = dataset.point(i);
            let li = dataset.label(i);
            let mut out = Vec::new();
            let mut tight = 0;
            for j in (i + 1)..n {
                if dataset.label(j) == li {
                    continue;
                }
                let (inside, d2) = within_squared(xi, dataset.point(j), limit);
                if inside {
                    debug_assert!(geometry::pair_within(d2, epsilon));
                    out.push(j);
                    if epsilon > 0.0 && d2 >= tight_lo {
                        tight += 1;
                    }
                }
            }
            (out, tight)
        })
        .collect();

    let mut pairs = Vec::new();
    let mut boundary_tight = 0;
    for (i, (js, tight)) in per_vertex.into_iter().enumerate() {
        boundary_tight += tight;
        pairs.extend(js.into_iter().map(|j| Hyperedge(vec![i, j])));
    }
    let mut cross = 0usize;
    let priors = class_counts(dataset);
    for a in 0..priors.len() {
        for b in (a + 1)..priors.len() {
            cross += priors[a] * priors[b];
        }
    }
    let vertices = (0..n)
        .map(|id| Vertex {
            id,
            label: dataset.label(id),
            mass: dataset.mass(id),
        })
        .collect();
    let neighbors = adjacency(n, &pairs);
    log::info!(
        "epsilon {epsilon}: {} degree-2 edges among {cross} cross-class pairs",
        pairs.len()
    );
    Ok(ConflictHypergraph {
        epsilon,
        max_degree: 2,
        vertices,
        edges: vec![Vec::new(), Vec::new(), pairs],
        neighbors,
        telemetry: EdgeTelemetry {
            candidates_tested: [(2, cross)].into(),
            boundary_tight,
        },
    })
}

fn class_counts(dataset: &LabeledDataset) -> Vec<usize> {
    let mut c = vec![0; dataset.num_classes()];
    for &l in dataset.labels() {
        c[l] += 1;
    }
    c
}

/// Adds every edge of degree 3..=m.
///
/// A degree-k candidate is a degree-(k−1) edge plus a vertex with a larger
/// id that is adjacent to all members, carries a new label, and completes
/// every (k−1)-subset to an existing edge. Candidates are tested in
/// parallel; the result is sorted, so it does not depend on scheduling.
pub fn extend_hyperedges(
    mut graph: ConflictHypergraph,
    dataset: &LabeledDataset,
    m: usize,
) -> Result<ConflictHypergraph> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("max degree {m} < 2")));
    }
    if dataset.len() != graph.num_vertices() {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} vertices, hypergraph has {}",
            dataset.len(),
            graph.num_vertices()
        )));
    }
    let epsilon = graph.epsilon;
    for k in (graph.max_degree + 1)..=m {
        let prev = &graph.edges[k - 1];
        let tested = AtomicUsize::new(0);
        let tight = AtomicUsize::new(0);
        let failure: std::sync::Mutex<Option<Error>> = std::sync::Mutex::new(None);

        let found: Vec<Vec<Hyperedge>> = prev
            .par_iter()
            .map(|e| {
                let members = e.vertices();
                let last = *members.last().expect("edges are non-empty");
                let seed = members
                    .iter()
                    .min_by_key(|&&u| graph.neighbors[u].len())
                    .copied()
                    .expect("edges are non-empty");
                let mut out = Vec::new();
                for &v in graph.neighbors[seed].iter().filter(|&&v| v > last) {
                    let lv = dataset.label(v);
                    if members.iter().any(|&u| dataset.label(u) == lv) {
                        continue;
                    }
                    if !members
                        .iter()
                        .all(|&u| u == seed || graph.neighbors[u].binary_search(&v).is_ok())
                    {
                        continue;
                    }
                    if k >= 4 && !faces_present(prev, members, v) {
                        continue;
                    }
                    let count = tested.fetch_add(1, Ordering::Relaxed) + 1;
                    if count.is_multiple_of(PROGRESS_EVERY) {
                        log::info!("degree {k}: {count} candidates tested");
                    }
                    let mut ids = members.to_vec();
                    ids.push(v);
                    let pts: Vec<&[f64]> = ids.iter().map(|&i| dataset.point(i)).collect();
                    match geometry::neighborhoods_intersect(&pts, epsilon) {
                        Ok(t) => {
                            if t.boundary_tight {
                                tight.fetch_add(1, Ordering::Relaxed);
                            }
                            if t.intersects {
                                out.push(Hyperedge(ids));
                            }
                        }
                        Err(err) => {
                            failure.lock().expect("poisoned").get_or_insert(err.into());
                        }
                    }
                }
                out
            })
            .collect();
        if let Some(err) = failure.into_inner().expect("poisoned") {
            return Err(err);
        }
        let mut edges: Vec<Hyperedge> = found.into_iter().flatten().collect();
        edges.sort();
        let tested = tested.into_inner();
        log::info!(
            "epsilon {epsilon}: {} degree-{k} edges from {tested} candidates",
            edges.len()
        );
        graph.telemetry.candidates_tested.insert(k, tested);
        graph.telemetry.boundary_tight += tight.into_inner();
        graph.edges.push(edges);
        graph.max_degree = k;
    }
    if m > graph.max_degree {
        graph.max_degree = m;
    }
    while graph.edges.len() <= graph.max_degree {
        graph.edges.push(Vec::new());
    }
    Ok(graph)
}

/// Every (k−1)-subset of `members ∪ {v}` containing `v` is in `prev`.
fn faces_present(prev: &[Hyperedge], members: &[usize], v: usize) -> bool {
    (0..members.len()).all(|skip| {
        let mut face: Vec<usize> = members
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &u)| u)
            .collect();
        face.push(v);
        prev.binary_search(&Hyperedge(face)).is_ok()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> LabeledDataset {
        LabeledDataset::uniform(rows, labels).unwrap()
    }

    fn triangle(r: f64) -> LabeledDataset {
        let h = 3f64.sqrt() / 2.0;
        dataset(
            vec![vec![0.0, r], vec![r * h, -r * 0.5], vec![-r * h, -r * 0.5]],
            vec![0, 1, 2],
        )
    }

    #[test]
    fn collinear_chain() {
        let eps = 0.5;
        let d = dataset(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0, 1, 2]);
        let g = build_conflict_graph(&d, eps).unwrap();
        let edges: Vec<_> = g.edges_of_degree(2).iter().map(|e| e.vertices().to_vec()).collect();
        assert_eq!(edges, vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn zero_epsilon_distinct_points_no_edges() {
        let d = dataset(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0, 1, 2]);
        let g = build_conflict_graph(&d, 0.0).unwrap();
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn same_class_never_conflicts() {
        let d = dataset(vec![vec![0.0], vec![0.01]], vec![0, 0]);
        let g = build_conflict_graph(&d, 0.1).unwrap();
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn identical_points_different_labels_conflict_at_zero() {
        let d = dataset(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![0, 1]);
        let g = build_conflict_graph(&d, 0.0).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn pairwise_only_triangle_has_no_triple() {
        let d = triangle(0.85);
        let g = extend_hyperedges(build_conflict_graph(&d, 0.8).unwrap(), &d, 3).unwrap();
        assert_eq!(g.edges_of_degree(2).len(), 3);
        assert_eq!(g.edges_of_degree(3).len(), 0);
    }

    #[test]
    fn close_triangle_has_triple() {
        let d = triangle(0.7);
        let g = extend_hyperedges(build_conflict_graph(&d, 0.8).unwrap(), &d, 3).unwrap();
        assert_eq!(g.edges_of_degree(2).len(), 3);
        assert_eq!(g.edges_of_degree(3), &[Hyperedge(vec![0, 1, 2])]);
        let w = g.witness(&d, &[0, 1, 2]).unwrap();
        for v in 0..3 {
            assert!(geometry::squared_distance(&w, d.point(v)).sqrt() <= 0.8);
        }
    }

    #[test]
    fn two_classes_cap_degree() {
        let d = dataset(vec![vec![0.0], vec![0.1], vec![0.2], vec![0.3]], vec![0, 1, 0, 1]);
        let g = extend_hyperedges(build_conflict_graph(&d, 10.0).unwrap(), &d, 4).unwrap();
        assert_eq!(g.edges_of_degree(2).len(), 4);
        assert_eq!(g.edges_of_degree(3).len(), 0);
        assert_eq!(g.edges_of_degree(4).len(), 0);
        assert_eq!(g.max_degree(), 4);
    }
}
