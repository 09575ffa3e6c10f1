use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::hypergraph::{build_conflict_graph, ConflictHypergraph, IncidenceMatrix};
use crate::lp::{backend, solve_packing, PackingLp, Tolerances};

/// One-versus-one optimal losses. `a[i][j]` is the optimal loss of the
/// binary problem on classes `i` and `j` under the conditional distribution
/// `p_v / P(Y ∈ {i, j})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseLossMatrix {
    pub class_names: Vec<String>,
    pub a: Vec<Vec<f64>>,
    /// Pairs skipped because a class has no support points.
    pub notes: Vec<String>,
}

impl PairwiseLossMatrix {
    pub fn num_classes(&self) -> usize {
        self.a.len()
    }

    /// Builds a matrix from explicit entries; must be square, symmetric
    /// with zero diagonal, entries in `[0, ½]`.
    pub fn from_matrix(a: Vec<Vec<f64>>) -> Result<Self> {
        let k = a.len();
        for (i, row) in a.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidArgument("pairwise matrix must be square".into()));
            }
            for (j, &x) in row.iter().enumerate() {
                if !(0.0..=0.5 + 1e-12).contains(&x) || (i == j && x != 0.0) || (x - a[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "invalid pairwise entry a[{i}][{j}] = {x}"
                    )));
                }
            }
        }
        Ok(PairwiseLossMatrix {
            class_names: (0..k).map(|i| i.to_string()).collect(),
            a,
            notes: Vec::new(),
        })
    }

    /// Off-diagonal entries sorted by decreasing loss, as `(i, j, a_ij)`.
    pub fn ranked_pairs(&self) -> Vec<(usize, usize, f64)> {
        let k = self.num_classes();
        let mut out: Vec<_> = (0..k)
            .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.a[i][j]))
            .collect();
        out.sort_by(|x, y| y.2.total_cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));
        out
    }
}

/// Pairwise binary losses computed from scratch.
pub fn pairwise_binary_losses(dataset: &LabeledDataset, epsilon: f64, tol: &Tolerances) -> Result<PairwiseLossMatrix> {
    let graph = build_conflict_graph(dataset, epsilon)?;
    pairwise_from_graph(dataset, &graph, tol)
}

/// Pairwise binary losses from an existing conflict graph. Binary problems
/// only have degree-2 edges, so each subproblem is the degree-2 graph
/// restricted to the two classes.
pub fn pairwise_from_graph(
    dataset: &LabeledDataset,
    graph: &ConflictHypergraph,
    tol: &Tolerances,
) -> Result<PairwiseLossMatrix> {
    let k = dataset.num_classes();
    if k < 2 {
        return Err(Error::InvalidArgument(
            "pairwise losses need at least two classes".into(),
        ));
    }
    if graph.num_vertices() != dataset.len() {
        return Err(Error::InvalidArgument(
            "graph and dataset disagree on the vertex count".into(),
        ));
    }
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| ((i + 1)..k).map(move |j| (i, j))).collect();
    let results: Vec<Result<(f64, Option<String>)>> = pairs
        .par_iter()
        .map(|&(ci, cj)| binary_loss(dataset, graph, ci, cj, tol))
        .collect();
    let mut a = vec![vec![0.0; k]; k];
    let mut notes = Vec::new();
    for (&(i, j), r) in pairs.iter().zip(results) {
        let (loss, note) = r?;
        a[i][j] = loss;
        a[j][i] = loss;
        if let Some(n) = note {
            log::warn!("{n}");
            notes.push(n);
        }
    }
    Ok(PairwiseLossMatrix {
        class_names: dataset.class_names().to_vec(),
        a,
        notes,
    })
}

fn binary_loss(
    dataset: &LabeledDataset,
    graph: &ConflictHypergraph,
    ci: usize,
    cj: usize,
    tol: &Tolerances,
) -> Result<(f64, Option<String>)> {
    let members: Vec<usize> = (0..dataset.len())
        .filter(|&v| dataset.label(v) == ci || dataset.label(v) == cj)
        .collect();
    let has = |c: usize| members.iter().any(|&v| dataset.label(v) == c);
    if !has(ci) || !has(cj) {
        let names = dataset.class_names();
        return Ok((
            0.0,
            Some(format!(
                "class pair {}-{} has an empty class; entry set to 0",
                names[ci], names[cj]
            )),
        ));
    }
    let mut local = vec![usize::MAX; dataset.len()];
    for (k, &v) in members.iter().enumerate() {
        local[v] = k;
    }
    let total: f64 = members.iter().map(|&v| dataset.mass(v)).sum();
    let masses: Vec<f64> = members.iter().map(|&v| dataset.mass(v) / total).collect();
    let rows: Vec<Vec<usize>> = graph
        .edges_of_degree(2)
        .iter()
        .filter_map(|e| {
            let (u, v) = (e.vertices()[0], e.vertices()[1]);
            (local[u] != usize::MAX && local[v] != usize::MAX).then(|| vec![local[u], local[v]])
        })
        .collect();
    let lp = PackingLp::new(masses, IncidenceMatrix::new(members.len(), rows)?)?;
    Ok((solve_packing(&lp, tol)?.loss(), None))
}

/// Class-only coupling bound: the maximum of `Σ_ij π_i a_ij s_ij` over
/// symmetric doubly stochastic `s`, solved as a linear program over the
/// upper triangle of `s`.
pub fn class_only_bound(a: &PairwiseLossMatrix, priors: &[f64]) -> Result<f64> {
    let k = a.num_classes();
    if priors.len() != k {
        return Err(Error::InvalidArgument(format!(
            "{} priors for {k} classes",
            priors.len()
        )));
    }
    if priors.iter().any(|&p| !(p >= 0.0)) || (priors.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("priors must be nonnegative and sum to 1".into()));
    }
    let mut index = vec![vec![0; k]; k];
    let mut cost = Vec::new();
    for i in 0..k {
        for j in i..k {
            index[i][j] = cost.len();
            index[j][i] = cost.len();
            let c = if i == j {
                priors[i] * a.a[i][i]
            } else {
                priors[i] * a.a[i][j] + priors[j] * a.a[j][i]
            };
            cost.push(c);
        }
    }
    if cost.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let n = cost.len();
    let program = backend::LinearProgram {
        num_vars: n,
        cost: cost.iter().map(|c| -c).collect(),
        eq_rows: (0..k).map(|i| (0..k).map(|j| (index[i][j], 1.0)).collect()).collect(),
        eq_rhs: vec![1.0; k],
        le_rows: (0..n).map(|c| vec![(c, -1.0)]).collect(),
        le_rhs: vec![0.0; n],
    };
    let raw = backend::solve(&program, 200)?;
    // Any feasible s gives a valid value; evaluate at the clipped iterate
    // rescaled to row sums of at most 1.
    let s: Vec<f64> = raw.x.iter().map(|x| x.max(0.0)).collect();
    let worst = (0..k)
        .map(|i| (0..k).map(|j| s[index[i][j]]).sum::<f64>())
        .fold(1.0, f64::max);
    Ok(cost.iter().zip(&s).map(|(c, x)| c * x / worst).sum::<f64>().max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assignment_oracle(c: &[Vec<f64>]) -> f64 {
        fn go(c: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == c.len() {
                return 0.0;
            }
            let mut best = f64::NEG_INFINITY;
            for j in 0..c.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.max(c[row][j] + go(c, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        go(c, 0, &mut vec![false; c.len()])
    }

    #[test]
    fn zero_matrix() {
        let a = PairwiseLossMatrix::from_matrix(vec![vec![0.0; 3]; 3]).unwrap();
        assert_eq!(class_only_bound(&a, &[1.0 / 3.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn two_classes_anti_diagonal() {
        let a = PairwiseLossMatrix::from_matrix(vec![vec![0.0, 0.3], vec![0.3, 0.0]]).unwrap();
        assert!((class_only_bound(&a, &[0.5, 0.5]).unwrap() - 0.3).abs() < 1e-8);
    }

    #[test]
    fn three_classes_uniform() {
        let a = PairwiseLossMatrix::from_matrix(vec![vec![0.0, 0.3, 0.3], vec![0.3, 0.0, 0.3], vec![0.3, 0.3, 0.0]])
            .unwrap();
        assert!((class_only_bound(&a, &[1.0 / 3.0; 3]).unwrap() - 0.3).abs() < 1e-8);
    }

    #[test]
    fn matches_symmetrized_assignment() {
        let a = vec![
            vec![0.0, 0.1, 0.4, 0.05],
            vec![0.1, 0.0, 0.2, 0.3],
            vec![0.4, 0.2, 0.0, 0.15],
            vec![0.05, 0.3, 0.15, 0.0],
        ];
        let pi = [0.1, 0.2, 0.3, 0.4];
        let c: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| 0.5 * (pi[i] * a[i][j] + pi[j] * a[j][i])).collect())
            .collect();
        let m = PairwiseLossMatrix::from_matrix(a).unwrap();
        let lp = class_only_bound(&m, &pi).unwrap();
        assert!((lp - assignment_oracle(&c)).abs() < 1e-8, "{lp}");
    }
}
