use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::geometry::pair_within;
use crate::hypergraph::witness_point;
use crate::lp::{LpSolution, PackingLp};

/// Move chosen by the adversary after sampling a vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyMove {
    /// Row of the incidence matrix, or `None` for the singleton edge
    /// (the adversary leaves the point where it is).
    pub edge: Option<usize>,
    pub members: Vec<usize>,
    pub probability: f64,
    /// Adversarial example: a point within ε of every member.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexStrategy {
    pub vertex: usize,
    pub label: usize,
    pub mass: f64,
    pub q: f64,
    /// The cover exceeded `p_v`, so probabilities were scaled down.
    pub over_covered: bool,
    pub moves: Vec<StrategyMove>,
}

/// Optimal randomized adversary read off an optimal cover: after sampling
/// vertex `v`, play edge `e ∋ v` with probability `z_e / p_v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialStrategy {
    pub vertices: Vec<VertexStrategy>,
}

impl AdversarialStrategy {
    pub fn num_over_covered(&self) -> usize {
        self.vertices.iter().filter(|v| v.over_covered).count()
    }
}

/// Builds the adversary's strategy from a certified solution of `lp`, whose
/// rows index `sol.z`. Fails when some vertex is under-covered by more than
/// `feasibility_abs`.
pub fn extract_strategy(
    lp: &PackingLp,
    sol: &LpSolution,
    dataset: &LabeledDataset,
    feasibility_abs: f64,
) -> Result<AdversarialStrategy> {
    let n = lp.num_vertices();
    let b = lp.incidence();
    if dataset.len() != n || sol.q.len() != n || sol.z.len() != b.num_rows() || sol.z_singleton.len() != n {
        return Err(Error::InvalidArgument(
            "solution, program and dataset sizes differ".into(),
        ));
    }
    let mut witnesses: HashMap<usize, Vec<f64>> = HashMap::new();
    for (e, &z) in sol.z.iter().enumerate() {
        if z > 0.0 {
            witnesses.insert(e, witness_point(dataset, b.row(e))?);
        }
    }
    let columns = b.columns();
    let mut vertices = Vec::with_capacity(n);
    for v in 0..n {
        let p = lp.masses()[v];
        let stay = |probability| StrategyMove {
            edge: None,
            members: vec![v],
            probability,
            witness: dataset.point(v).to_vec(),
        };
        let mut moves = Vec::new();
        let mut over_covered = false;
        if p <= 0.0 {
            moves.push(stay(1.0));
        } else {
            for &e in &columns[v] {
                if sol.z[e] > 0.0 {
                    moves.push(StrategyMove {
                        edge: Some(e),
                        members: b.row(e).to_vec(),
                        probability: sol.z[e] / p,
                        witness: witnesses[&e].clone(),
                    });
                }
            }
            if sol.z_singleton[v] > 0.0 {
                moves.push(stay(sol.z_singleton[v] / p));
            }
            let cover: f64 = moves.iter().map(|m| m.probability).sum::<f64>() * p;
            if cover < p - feasibility_abs {
                return Err(Error::InvalidArgument(format!(
                    "vertex {v} is under-covered: cover {cover} < mass {p}"
                )));
            }
            over_covered = cover > p + feasibility_abs;
            let total: f64 = moves.iter().map(|m| m.probability).sum();
            if total > 0.0 {
                for m in &mut moves {
                    m.probability /= total;
                }
            } else {
                moves.push(stay(1.0));
            }
        }
        vertices.push(VertexStrategy {
            vertex: v,
            label: dataset.label(v),
            mass: p,
            q: sol.q[v],
            over_covered,
            moves,
        });
    }
    Ok(AdversarialStrategy { vertices })
}

/// A soft classifier built from an optimal `q`: at a query `x̃`, class `y`
/// gets the largest `q_v` among class-`y` support points within ε of `x̃`;
/// leftover probability is spread evenly.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftClassifierTable {
    dataset: LabeledDataset,
    q: Vec<f64>,
    epsilon: f64,
}

impl SoftClassifierTable {
    pub fn new(dataset: LabeledDataset, q: Vec<f64>, epsilon: f64) -> Result<Self> {
        if q.len() != dataset.len() {
            return Err(Error::InvalidArgument(format!(
                "{} q values for {} vertices",
                q.len(),
                dataset.len()
            )));
        }
        if q.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidArgument("q must lie in [0, 1]".into()));
        }
        Ok(SoftClassifierTable { dataset, q, epsilon })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Class probabilities at `query`. With `side_info`, only the listed
    /// classes receive probability.
    pub fn evaluate(&self, query: &[f64], side_info: Option<&[usize]>) -> Result<Vec<f64>> {
        evaluate_classifier(self, query, side_info)
    }
}

pub fn evaluate_classifier(
    table: &SoftClassifierTable,
    query: &[f64],
    side_info: Option<&[usize]>,
) -> Result<Vec<f64>> {
    let d = &table.dataset;
    if query.len() != d.dim() {
        return Err(Error::InvalidArgument(format!(
            "query has dimension {}, data has {}",
            query.len(),
            d.dim()
        )));
    }
    let k = d.num_classes();
    let allowed: Vec<bool> = match side_info {
        None => vec![true; k],
        Some(list) => {
            let mut a = vec![false; k];
            for &c in list {
                *a.get_mut(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("class {c} out of range")))? = true;
            }
            if list.is_empty() {
                return Err(Error::InvalidArgument("empty side-information set".into()));
            }
            a
        }
    };
    let mut g = vec![0.0f64; k];
    for v in 0..d.len() {
        let y = d.label(v);
        if allowed[y] && table.q[v] > g[y] {
            let sq = crate::geometry::squared_distance(query, d.point(v));
            // Closed ball of radius ε: reuse the pairwise test with radius ε/2.
            if pair_within(sq, 0.5 * table.epsilon) {
                g[y] = table.q[v];
            }
        }
    }
    let total: f64 = g.iter().sum();
    if total > 1.0 {
        for x in &mut g {
            *x /= total;
        }
    } else {
        let slots = allowed.iter().filter(|&&a| a).count() as f64;
        let share = (1.0 - total) / slots;
        for (x, &a) in g.iter_mut().zip(&allowed) {
            if a {
                *x += share;
            }
        }
    }
    Ok(g)
}

/// Expected loss when the adversary plays `strategy` against `table`:
/// `Σ_v p_v Σ_moves prob · (1 − h(witness)_{y_v})`.
pub fn strategy_loss(strategy: &AdversarialStrategy, table: &SoftClassifierTable) -> Result<f64> {
    let mut loss = 0.0;
    for vs in &strategy.vertices {
        for m in &vs.moves {
            let h = table.evaluate(&m.witness, None)?;
            loss += vs.mass * m.probability * (1.0 - h[vs.label]);
        }
    }
    Ok(loss)
}
