//! Independent sets of the degree-2 conflict graph: the Caro-Wei bound, its
//! randomized rounding, and exact maximum-weight search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::hypergraph::ConflictHypergraph;

/// Largest cap accepted by [`hard_loss_bruteforce`]; vertex sets are `u64` masks.
pub const MAX_HARD_CAP: usize = 64;

pub const DEFAULT_HARD_CAP: usize = 30;

fn check_weights(graph: &ConflictHypergraph, w: &[f64]) -> Result<()> {
    if w.len() != graph.num_vertices() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} vertices",
            w.len(),
            graph.num_vertices()
        )));
    }
    if let Some(x) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "weight {x} is not a nonnegative number"
        )));
    }
    Ok(())
}

/// `Σ_{w_v>0} p_v w_v / ((A+I)w)_v`: a lower bound on the mass of some
/// independent set.
pub fn caro_wei_mass(graph: &ConflictHypergraph, w: &[f64]) -> Result<f64> {
    check_weights(graph, w)?;
    let mut total = 0.0;
    for (v, vert) in graph.vertices().iter().enumerate() {
        if w[v] > 0.0 {
            let closed: f64 = w[v] + graph.neighbors(v).iter().map(|&u| w[u]).sum::<f64>();
            total += vert.mass * w[v] / closed;
        }
    }
    Ok(total)
}

/// `L_CW = 1 − caro_wei_mass`, an upper bound on the optimal hard-classifier loss.
pub fn caro_wei_bound(graph: &ConflictHypergraph, w: &[f64]) -> Result<f64> {
    Ok(1.0 - caro_wei_mass(graph, w)?)
}

/// One draw of the rounding behind the Caro-Wei bound.
///
/// Vertices are drawn i.i.d. with probability proportional to `w`, and `v`
/// is kept if it is drawn before every neighbour. The order of first draws
/// has the law of independent exponential clocks with rates `w_v`, which is
/// what is sampled here (ties broken by id). The result is sorted.
pub fn randomized_independent_set(graph: &ConflictHypergraph, w: &[f64], seed: u64) -> Result<Vec<usize>> {
    check_weights(graph, w)?;
    if w.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidArgument("all weights are zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arrival: Vec<f64> = w
        .iter()
        .map(|&x| {
            let e: f64 = Exp1.sample(&mut rng);
            if x > 0.0 {
                e / x
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let first = |a: usize, b: usize| (arrival[a], a) < (arrival[b], b);
    Ok((0..graph.num_vertices())
        .filter(|&v| w[v] > 0.0 && graph.neighbors(v).iter().all(|&u| first(v, u)))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardLoss {
    /// `1 − P(S)` for the best independent set `S`.
    pub loss: f64,
    pub independent_set: Vec<usize>,
}

/// Exact optimal hard-classifier loss: `1 − max P(S)` over independent sets
/// `S` of the degree-2 graph, by branch and bound. Refuses instances with
/// more than `cap` vertices.
pub fn hard_loss_bruteforce(graph: &ConflictHypergraph, masses: &[f64], cap: usize) -> Result<HardLoss> {
    let n = graph.num_vertices();
    if cap > MAX_HARD_CAP {
        return Err(Error::InvalidArgument(format!("hard cap {cap} exceeds {MAX_HARD_CAP}")));
    }
    if n > cap {
        return Err(Error::InstanceTooLarge { vertices: n, cap });
    }
    check_weights(graph, masses)?;
    let adj: Vec<u64> = (0..n)
        .map(|v| graph.neighbors(v).iter().fold(0u64, |m, &u| m | (1 << u)))
        .collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut search = Search {
        adj: &adj,
        w: masses,
        best: 0.0,
        best_set: 0,
    };
    search.branch(all, 0, 0.0);
    let set: Vec<usize> = (0..n).filter(|&v| search.best_set >> v & 1 == 1).collect();
    let mass: f64 = set.iter().map(|&v| masses[v]).sum();
    Ok(HardLoss {
        loss: 1.0 - mass,
        independent_set: set,
    })
}

struct Search<'a> {
    adj: &'a [u64],
    w: &'a [f64],
    best: f64,
    best_set: u64,
}

impl Search<'_> {
    fn branch(&mut self, candidates: u64, chosen: u64, value: f64) {
        if candidates == 0 {
            if value > self.best {
                self.best = value;
                self.best_set = chosen;
            }
            return;
        }
        if value + self.clique_cover_bound(candidates) <= self.best {
            return;
        }
        // Branch on the candidate with the most candidate neighbours.
        let v = bits(candidates)
            .max_by_key(|&v| ((self.adj[v] & candidates).count_ones(), std::cmp::Reverse(v)))
            .expect("non-empty");
        let bit = 1u64 << v;
        if self.adj[v] & candidates == 0 {
            // Isolated among candidates: always take it.
            self.branch(candidates & !bit, chosen | bit, value + self.w[v]);
            return;
        }
        self.branch(candidates & !bit & !self.adj[v], chosen | bit, value + self.w[v]);
        self.branch(candidates & !bit, chosen, value);
    }

    /// Greedy partition of the candidates into cliques; an independent set
    /// takes at most one vertex, hence at most the heaviest, from each.
    fn clique_cover_bound(&self, candidates: u64) -> f64 {
        let mut order: Vec<usize> = bits(candidates).collect();
        order.sort_by(|&a, &b| self.w[b].total_cmp(&self.w[a]).then(a.cmp(&b)));
        let mut cliques: Vec<(u64, f64)> = Vec::new();
        for v in order {
            match cliques.iter_mut().find(|(m, _)| m & !self.adj[v] == 0) {
                Some((m, _)) => *m |= 1 << v,
                None => cliques.push((1 << v, self.w[v])),
            }
        }
        cliques.iter().map(|(_, w)| w).sum()
    }
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            v
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{Hyperedge, Vertex};

    fn graph(n: usize, edges: &[(usize, usize)]) -> ConflictHypergraph {
        let verts = (0..n)
            .map(|id| Vertex {
                id,
                label: id,
                mass: 1.0 / n as f64,
            })
            .collect();
        ConflictHypergraph::from_parts(1.0, 2, verts, edges.iter().map(|&(a, b)| Hyperedge::new(vec![a, b]))).unwrap()
    }

    fn exhaustive(g: &ConflictHypergraph, w: &[f64]) -> f64 {
        let n = g.num_vertices();
        let mut best: f64 = 0.0;
        for mask in 0u32..(1 << n) {
            let ok = (0..n).all(|v| mask >> v & 1 == 0 || g.neighbors(v).iter().all(|&u| mask >> u & 1 == 0));
            if ok {
                best = best.max((0..n).filter(|&v| mask >> v & 1 == 1).map(|v| w[v]).sum());
            }
        }
        best
    }

    #[test]
    fn caro_wei_examples() {
        let empty = graph(3, &[]);
        assert!(caro_wei_bound(&empty, &[1.0; 3]).unwrap().abs() < 1e-15);
        let tri = graph(3, &[(0, 1), (0, 2), (1, 2)]);
        assert!((caro_wei_bound(&tri, &[1.0; 3]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((caro_wei_bound(&tri, &[0.0; 3]).unwrap() - 1.0).abs() < 1e-15);
        // Indicator of an independent set gives its mass exactly.
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert!((caro_wei_mass(&path, &[1.0, 0.0, 1.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rounding_is_independent() {
        let tri = graph(3, &[(0, 1), (0, 2), (1, 2)]);
        for seed in 0..50 {
            assert_eq!(randomized_independent_set(&tri, &[1.0; 3], seed).unwrap().len(), 1);
        }
        let empty = graph(4, &[]);
        assert_eq!(
            randomized_independent_set(&empty, &[1.0, 0.0, 2.0, 3.0], 7).unwrap(),
            vec![0, 2, 3]
        );
    }

    #[test]
    fn branch_and_bound_matches_enumeration() {
        let mut state = 12345u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..40 {
            let n = 2 + (next() % 13) as usize;
            let mut edges = Vec::new();
            for a in 0..n {
                for b in (a + 1)..n {
                    if next() % 3 == 0 {
                        edges.push((a, b));
                    }
                }
            }
            let g = graph(n, &edges);
            let raw: Vec<f64> = (0..n).map(|_| (next() % 1000) as f64 + 1.0).collect();
            let s: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let h = hard_loss_bruteforce(&g, &w, 30).unwrap();
            assert!((1.0 - h.loss - exhaustive(&g, &w)).abs() < 1e-12);
        }
    }

    #[test]
    fn hard_loss_cases() {
        let tri = graph(3, &[(0, 1), (0, 2), (1, 2)]);
        assert!((hard_loss_bruteforce(&tri, &[1.0 / 3.0; 3], 30).unwrap().loss - 2.0 / 3.0).abs() < 1e-15);
        let empty = graph(3, &[]);
        assert!(hard_loss_bruteforce(&empty, &[1.0 / 3.0; 3], 30).unwrap().loss.abs() < 1e-15);
        let big = graph(31, &[]);
        assert!(matches!(
            hard_loss_bruteforce(&big, &[1.0 / 31.0; 31], 30),
            Err(Error::InstanceTooLarge { vertices: 31, cap: 30 })
        ));
    }
}
