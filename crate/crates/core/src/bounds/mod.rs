//! The optimal loss and the bounds around it.
//!
//! For a dataset and budget ε these satisfy
//! `L_co(2) ≤ L*(2) ≤ … ≤ L*(K) ≤ L_hard ≤ L_CW`, where `L*(m)` uses
//! hyperedges of degree at most `m`, `L_co(2)` couples one-versus-one
//! losses, `L_hard` is the best deterministic classifier and `L_CW` is the
//! Caro-Wei estimate of it.

mod independent;
mod pairwise;
mod stats;
mod strategy;

pub use independent::{
    caro_wei_bound, caro_wei_mass, hard_loss_bruteforce, randomized_independent_set, HardLoss, DEFAULT_HARD_CAP,
    MAX_HARD_CAP,
};
pub use pairwise::{class_only_bound, pairwise_binary_losses, pairwise_from_graph, PairwiseLossMatrix};
pub use stats::{class_distance_stats, ClassDistance};
pub use strategy::{
    evaluate_classifier, extract_strategy, strategy_loss, AdversarialStrategy, SoftClassifierTable, StrategyMove,
    VertexStrategy,
};

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::hypergraph::{build_conflict_graph, extend_hyperedges, ConflictHypergraph};
use crate::lp::{solve_packing, LpSolution, PackingLp, Tolerances};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const HISTOGRAM_BINS: usize = 20;

/// Slack allowed between consecutive entries of the bound chain.
pub const CHAIN_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tolerances: Tolerances,
    /// Drop rows contained in another row before solving.
    pub dedupe_dominated: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerances: Tolerances::default(),
            dedupe_dominated: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimalLoss {
    pub loss: f64,
    pub lp: PackingLp,
    pub solution: LpSolution,
    pub graph: ConflictHypergraph,
}

/// Builds the conflict hypergraph with edges up to degree `m`.
pub fn build_hypergraph(dataset: &LabeledDataset, epsilon: f64, m: usize) -> Result<ConflictHypergraph> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("max degree {m} < 2")));
    }
    let g = build_conflict_graph(dataset, epsilon)?;
    if m == 2 {
        return Ok(g);
    }
    extend_hyperedges(g, dataset, m)
}

/// Solves the packing LP on an existing hypergraph.
pub fn solve_graph(graph: &ConflictHypergraph, opts: &SolveOptions) -> Result<(PackingLp, LpSolution)> {
    let lp = PackingLp::from_graph(graph, opts.dedupe_dominated);
    let sol = solve_packing(&lp, &opts.tolerances)?;
    Ok((lp, sol))
}

/// `L*(m)`: one minus the packing optimum on the degree-≤m hypergraph.
/// With `m ≥ K` this is the exact optimal soft-classifier loss.
pub fn optimal_loss(dataset: &LabeledDataset, epsilon: f64, m: usize) -> Result<OptimalLoss> {
    optimal_loss_with(dataset, epsilon, m, &SolveOptions::default())
}

pub fn optimal_loss_with(dataset: &LabeledDataset, epsilon: f64, m: usize, opts: &SolveOptions) -> Result<OptimalLoss> {
    let graph = build_hypergraph(dataset, epsilon, m)?;
    let (lp, solution) = solve_graph(&graph, opts)?;
    Ok(OptimalLoss {
        loss: solution.loss(),
        lp,
        solution,
        graph,
    })
}

/// Counts of `q` values in 20 equal bins over `[0, 1]`; the last bin is
/// closed. Values within 1e-9 below a bin edge count in the upper bin, so
/// solver noise does not split exact values such as ½.
pub fn q_histogram(q: &[f64]) -> Vec<usize> {
    let mut h = vec![0; HISTOGRAM_BINS];
    for &x in q {
        let b = ((x.clamp(0.0, 1.0) * HISTOGRAM_BINS as f64 + 1e-9) as usize).min(HISTOGRAM_BINS - 1);
        h[b] += 1;
    }
    h
}

/// Source of the vertex weights for the Caro-Wei bound.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CaroWeiWeights {
    /// Primal `q` of the `L*(2)` solve.
    #[default]
    LStar2,
    Ones,
    Custom(Vec<f64>),
}

impl CaroWeiWeights {
    fn describe(&self) -> &'static str {
        match self {
            CaroWeiWeights::LStar2 => "l_star_2_q",
            CaroWeiWeights::Ones => "ones",
            CaroWeiWeights::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundConfig {
    pub max_degree: usize,
    pub solve: SolveOptions,
    /// Brute-force the hard loss when the instance has at most this many
    /// vertices; `None` disables it.
    pub hard_cap: Option<usize>,
    pub caro_wei_weights: CaroWeiWeights,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            max_degree: 3,
            solve: SolveOptions::default(),
            hard_cap: Some(DEFAULT_HARD_CAP),
            caro_wei_weights: CaroWeiWeights::LStar2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub loss: f64,
    pub objective: f64,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: u32,
    pub lp_rows: usize,
    pub q_histogram: Vec<usize>,
}

/// Every bound at one `(dataset, ε, m)` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub schema_version: u32,
    pub epsilon: f64,
    pub max_degree: usize,
    pub num_vertices: usize,
    pub num_classes: usize,
    /// `L*(m)` for `m = 2..=max_degree`.
    pub l_star: BTreeMap<usize, f64>,
    pub class_only_2: f64,
    pub caro_wei: f64,
    pub caro_wei_weights: String,
    pub hard_bruteforce: Option<f64>,
    /// Edges of each exact degree, dominated edges included.
    pub edge_counts: BTreeMap<usize, usize>,
    pub candidates_tested: BTreeMap<usize, usize>,
    pub boundary_tight: usize,
    pub solves: BTreeMap<usize, SolveSummary>,
    pub pairwise: PairwiseLossMatrix,
    /// Wall-clock seconds per stage.
    pub runtimes: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    /// Violations of the bound ordering beyond [`CHAIN_SLACK`].
    pub fn chain_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |name_lo: String, lo: f64, name_hi: String, hi: f64| {
            if lo > hi + CHAIN_SLACK {
                out.push(format!("{name_lo} = {lo} exceeds {name_hi} = {hi}"));
            }
        };
        let chain: Vec<(usize, f64)> = self.l_star.iter().map(|(&m, &l)| (m, l)).collect();
        if let Some(&(m, l)) = chain.first() {
            check("L_co(2)".into(), self.class_only_2, format!("L*({m})"), l);
        }
        for w in chain.windows(2) {
            check(format!("L*({})", w[0].0), w[0].1, format!("L*({})", w[1].0), w[1].1);
        }
        if let (Some(&(m, l)), Some(h)) = (chain.last(), self.hard_bruteforce) {
            check(format!("L*({m})"), l, "L_hard".into(), h);
        }
        if let Some(h) = self.hard_bruteforce {
            check("L_hard".into(), h, "L_CW".into(), self.caro_wei);
        }
        out
    }
}

/// Computes the whole bound chain at one ε. Solves for different `m` and
/// the pairwise problems run in parallel on the current rayon pool.
pub fn compute_bound_report(dataset: &LabeledDataset, epsilon: f64, cfg: &BoundConfig) -> Result<BoundReport> {
    let t = Instant::now();
    let graph = build_hypergraph(dataset, epsilon, cfg.max_degree)?;
    let secs = t.elapsed().as_secs_f64();
    let mut report = bound_report_for_graph(dataset, &graph, cfg)?;
    report.runtimes.insert("hypergraph".to_string(), secs);
    Ok(report)
}

/// Bound chain on a prebuilt hypergraph (for instance one read back from
/// JSON). Missing degrees up to `cfg.max_degree` are enumerated first.
pub fn bound_report_for_graph(
    dataset: &LabeledDataset,
    graph: &ConflictHypergraph,
    cfg: &BoundConfig,
) -> Result<BoundReport> {
    if graph.num_vertices() != dataset.len() {
        return Err(Error::InvalidArgument(format!(
            "hypergraph has {} vertices, dataset has {}",
            graph.num_vertices(),
            dataset.len()
        )));
    }
    let mut runtimes = BTreeMap::new();
    let mut notes = Vec::new();
    let extended;
    let graph = if graph.max_degree() < cfg.max_degree {
        let t = Instant::now();
        extended = extend_hyperedges(graph.clone(), dataset, cfg.max_degree)?;
        runtimes.insert("hypergraph_extend".to_string(), t.elapsed().as_secs_f64());
        &extended
    } else {
        graph
    };
    let epsilon = graph.epsilon();

    let t = Instant::now();
    let degrees: Vec<usize> = (2..=cfg.max_degree).collect();
    let solved: Vec<Result<(PackingLp, LpSolution, f64)>> = degrees
        .par_iter()
        .map(|&m| {
            let start = Instant::now();
            let (lp, sol) = solve_graph(&graph.truncated(m), &cfg.solve)?;
            Ok((lp, sol, start.elapsed().as_secs_f64()))
        })
        .collect();
    let mut l_star = BTreeMap::new();
    let mut solves = BTreeMap::new();
    let mut q2 = None;
    for (&m, r) in degrees.iter().zip(solved) {
        let (lp, sol, secs) = r?;
        runtimes.insert(format!("lp_m{m}"), secs);
        l_star.insert(m, sol.loss());
        solves.insert(
            m,
            SolveSummary {
                loss: sol.loss(),
                objective: sol.objective,
                duality_gap: sol.duality_gap,
                primal_residual: sol.primal_residual,
                dual_residual: sol.dual_residual,
                iterations: sol.iterations,
                lp_rows: lp.num_rows(),
                q_histogram: q_histogram(&sol.q),
            },
        );
        if m == 2 {
            q2 = Some(sol.q);
        }
    }
    runtimes.insert("lp_total".to_string(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let pair_graph = graph.truncated(2);
    let pairwise = if dataset.num_classes() >= 2 {
        pairwise_from_graph(dataset, &pair_graph, &cfg.solve.tolerances)?
    } else {
        PairwiseLossMatrix {
            class_names: dataset.class_names().to_vec(),
            a: vec![vec![0.0]],
            notes: vec!["single class: no pairwise problems".into()],
        }
    };
    let class_only_2 = class_only_bound(&pairwise, &dataset.class_priors())?;
    runtimes.insert("class_only".to_string(), t.elapsed().as_secs_f64());
    notes.extend(pairwise.notes.iter().cloned());
    notes.push("pairwise losses condition on P(Y in {i,j}) (class-prior weighting)".into());

    let t = Instant::now();
    let weights = match &cfg.caro_wei_weights {
        CaroWeiWeights::LStar2 => q2.expect("m = 2 is always solved"),
        CaroWeiWeights::Ones => vec![1.0; graph.num_vertices()],
        CaroWeiWeights::Custom(w) => w.clone(),
    };
    let caro_wei = caro_wei_bound(&pair_graph, &weights)?;
    runtimes.insert("caro_wei".to_string(), t.elapsed().as_secs_f64());

    let hard_bruteforce = match cfg.hard_cap {
        Some(cap) if graph.num_vertices() <= cap => {
            let t = Instant::now();
            let h = hard_loss_bruteforce(&pair_graph, &pair_graph.masses(), cap)?;
            runtimes.insert("hard_bruteforce".to_string(), t.elapsed().as_secs_f64());
            Some(h.loss)
        }
        Some(cap) => {
            notes.push(format!(
                "hard loss skipped: {} vertices above the brute-force cap {cap}",
                graph.num_vertices()
            ));
            None
        }
        None => None,
    };
    if cfg.max_degree > dataset.num_classes() {
        notes.push(format!(
            "max degree {} exceeds the {} classes; higher degrees have no edges",
            cfg.max_degree,
            dataset.num_classes()
        ));
    }
    notes.push("edge counts include edges contained in larger edges".into());
    if cfg.solve.dedupe_dominated {
        notes.push("LP rows exclude edges contained in larger edges".into());
    }

    let mut report = BoundReport {
        schema_version: REPORT_SCHEMA_VERSION,
        epsilon,
        max_degree: cfg.max_degree,
        num_vertices: graph.num_vertices(),
        num_classes: dataset.num_classes(),
        l_star,
        class_only_2,
        caro_wei,
        caro_wei_weights: cfg.caro_wei_weights.describe().to_string(),
        hard_bruteforce,
        edge_counts: graph.truncated(cfg.max_degree).edge_counts(),
        candidates_tested: graph.telemetry().candidates_tested.clone(),
        boundary_tight: graph.telemetry().boundary_tight,
        solves,
        pairwise,
        runtimes,
        notes,
    };
    for v in report.chain_violations() {
        log::warn!("bound ordering violated: {v}");
        report.notes.push(format!("ordering violated: {v}"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::squared_distance;

    fn triangle(r: f64, masses: [f64; 3]) -> LabeledDataset {
        let h = 3f64.sqrt() / 2.0;
        LabeledDataset::new(
            vec![vec![0.0, r], vec![r * h, -r * 0.5], vec![-r * h, -r * 0.5]],
            vec![0, 1, 2],
            masses.to_vec(),
            vec!["u".into(), "v".into(), "w".into()],
            "triangle".to_string(),
        )
        .unwrap()
    }

    const THIRD: f64 = 1.0 / 3.0;

    #[test]
    fn three_class_examples() {
        let left = optimal_loss(&triangle(0.85, [THIRD; 3]), 0.8, 3).unwrap();
        assert_eq!(left.graph.edge_counts(), BTreeMap::from([(2, 3), (3, 0)]));
        assert!((left.solution.objective - 0.5).abs() < 1e-8);
        let right = optimal_loss(&triangle(0.7, [THIRD; 3]), 0.8, 3).unwrap();
        assert_eq!(right.graph.edge_counts(), BTreeMap::from([(2, 3), (3, 1)]));
        assert!((right.solution.objective - THIRD).abs() < 1e-8);
        let heavy = optimal_loss(&triangle(0.85, [0.6, 0.25, 0.15]), 0.8, 3).unwrap();
        assert!((heavy.solution.objective - 0.6).abs() < 1e-8);
    }

    #[test]
    fn zero_epsilon_zero_loss() {
        let d = LabeledDataset::uniform(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0, 1, 0]).unwrap();
        let r = optimal_loss(&d, 0.0, 2).unwrap();
        assert_eq!(r.loss, 0.0);
    }

    #[test]
    fn pairwise_cover_and_classifier() {
        let d = triangle(0.85, [THIRD; 3]);
        let r = optimal_loss(&d, 0.8, 3).unwrap();
        for &z in &r.solution.z {
            assert!((z - 1.0 / 6.0).abs() < 1e-7);
        }
        let s = extract_strategy(&r.lp, &r.solution, &d, 1e-8).unwrap();
        assert_eq!(s.num_over_covered(), 0);
        for vs in &s.vertices {
            assert_eq!(vs.moves.len(), 2);
            for m in &vs.moves {
                assert!((m.probability - 0.5).abs() < 1e-6);
            }
        }
        let table = SoftClassifierTable::new(d.clone(), r.solution.q.clone(), 0.8).unwrap();
        let mid: Vec<f64> = d.point(0).iter().zip(d.point(1)).map(|(a, b)| 0.5 * (a + b)).collect();
        let h = table.evaluate(&mid, None).unwrap();
        assert!((h[0] - 0.5).abs() < 1e-6 && (h[1] - 0.5).abs() < 1e-6 && h[2].abs() < 1e-6);
        let l = strategy_loss(&s, &table).unwrap();
        assert!((l - r.loss).abs() < 1e-6);
    }

    #[test]
    fn heavy_vertex_attracts_every_move() {
        let d = triangle(0.85, [0.6, 0.25, 0.15]);
        let r = optimal_loss(&d, 0.8, 3).unwrap();
        let s = extract_strategy(&r.lp, &r.solution, &d, 1e-8).unwrap();
        for v in [1, 2] {
            for m in &s.vertices[v].moves {
                assert!(m.probability < 1e-6 || m.members.contains(&0), "{m:?}");
            }
        }
    }

    #[test]
    fn isolated_vertex_stays() {
        let d = LabeledDataset::uniform(vec![vec![0.0], vec![10.0]], vec![0, 1]).unwrap();
        let r = optimal_loss(&d, 1.0, 2).unwrap();
        let s = extract_strategy(&r.lp, &r.solution, &d, 1e-8).unwrap();
        for vs in &s.vertices {
            assert_eq!(vs.moves.len(), 1);
            assert_eq!(vs.moves[0].edge, None);
            assert_eq!(vs.moves[0].witness, d.point(vs.vertex));
        }
        let table = SoftClassifierTable::new(d.clone(), r.solution.q.clone(), 1.0).unwrap();
        assert_eq!(table.evaluate(&[10.0], None).unwrap(), vec![0.0, 1.0]);
        assert_eq!(table.evaluate(&[5.0], None).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn classifier_neighbourhood_guarantee() {
        let d = triangle(0.7, [0.5, 0.3, 0.2]);
        let r = optimal_loss(&d, 0.8, 3).unwrap();
        let table = SoftClassifierTable::new(d.clone(), r.solution.q.clone(), 0.8).unwrap();
        for v in 0..3 {
            for step in 0..16 {
                let a = step as f64 * std::f64::consts::PI / 8.0;
                let x: Vec<f64> = vec![d.point(v)[0] + 0.8 * a.cos(), d.point(v)[1] + 0.8 * a.sin()];
                assert!(squared_distance(&x, d.point(v)).sqrt() <= 0.8 + 1e-12);
                let h = table.evaluate(&x, None).unwrap();
                assert!(h[d.label(v)] >= r.solution.q[v] - 1e-8);
                assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn report_chain() {
        let d = triangle(0.85, [THIRD; 3]);
        let rep = compute_bound_report(&d, 0.8, &BoundConfig::default()).unwrap();
        assert!(rep.chain_violations().is_empty(), "{:?}", rep.notes);
        assert!((rep.l_star[&2] - 0.5).abs() < 1e-8);
        assert!((rep.hard_bruteforce.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(rep.solves[&2].q_histogram.iter().sum::<usize>(), 3);
        assert_eq!(rep.solves[&2].q_histogram[10], 3);
    }
}
