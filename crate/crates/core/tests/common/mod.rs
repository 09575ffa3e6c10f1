#![allow(dead_code)]

use optloss::data::LabeledDataset;
use optloss::hypergraph::{ConflictHypergraph, Hyperedge, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random points in the unit cube with random positive masses.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, k: usize, d: usize) -> LabeledDataset {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    let labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let masses = raw.iter().map(|m| m / total).collect();
    let names = (0..k).map(|c| c.to_string()).collect();
    LabeledDataset::new(rows, labels, masses, names, "random").unwrap()
}

/// Budget scaled so that a fair share of pairs conflict.
pub fn random_epsilon(rng: &mut ChaCha8Rng, d: usize) -> f64 {
    rng.random_range(0.05..0.35) * (d as f64).sqrt()
}

/// Random simple graph where every vertex has its own label, so any pair
/// may be an edge. Returns the graph and its edge list.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> (ConflictHypergraph, Vec<(usize, usize)>) {
    let vertices = (0..n)
        .map(|id| Vertex {
            id,
            label: id,
            mass: 1.0 / n as f64,
        })
        .collect();
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(density) {
                pairs.push((u, v));
            }
        }
    }
    let edges = pairs.iter().map(|&(u, v)| Hyperedge::new(vec![u, v]));
    (ConflictHypergraph::from_parts(1.0, 2, vertices, edges).unwrap(), pairs)
}

/// Brute-force maximum mass of an independent set, by full enumeration.
pub fn max_independent_mass(n: usize, pairs: &[(usize, usize)], masses: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for set in 0u32..(1 << n) {
        if pairs.iter().any(|&(u, v)| set >> u & 1 == 1 && set >> v & 1 == 1) {
            continue;
        }
        best = best.max((0..n).filter(|&v| set >> v & 1 == 1).map(|v| masses[v]).sum());
    }
    best
}

/// Minimum enclosing ball radius by trying the circumscribed ball of every
/// affinely independent subset of at most `d + 1` points.
pub fn meb_radius_oracle(points: &[Vec<f64>]) -> f64 {
    use nalgebra::{DMatrix, DVector};
    let n = points.len();
    let d = points[0].len();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if idx.len() > d + 1 {
            continue;
        }
        let x0 = &points[idx[0]];
        let k = idx.len() - 1;
        let center: Vec<f64> = if k == 0 {
            x0.clone()
        } else {
            let diffs: Vec<Vec<f64>> = idx[1..]
                .iter()
                .map(|&i| points[i].iter().zip(x0).map(|(a, b)| a - b).collect())
                .collect();
            let g = DMatrix::from_fn(k, k, |i, j| {
                diffs[i].iter().zip(&diffs[j]).map(|(a, b)| a * b).sum::<f64>()
            });
            let rhs = DVector::from_fn(k, |i, _| 0.5 * g[(i, i)]);
            let svd = g.clone().svd(true, true);
            let smax = svd.singular_values.max();
            if svd.singular_values.min() <= 1e-12 * smax.max(1e-300) {
                continue;
            }
            let Some(lambda) = g.lu().solve(&rhs) else { continue };
            let mut c = x0.clone();
            for (l, diff) in lambda.iter().zip(&diffs) {
                for (ci, di) in c.iter_mut().zip(diff) {
                    *ci += l * di;
                }
            }
            c
        };
        let r = idx.iter().map(|&i| dist(&points[i], &center)).fold(0.0, f64::max);
        if r >= best {
            continue;
        }
        if points.iter().all(|p| dist(p, &center) <= r * (1.0 + 1e-12) + 1e-15) {
            best = r;
        }
    }
    best
}
