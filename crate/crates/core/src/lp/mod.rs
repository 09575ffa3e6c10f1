//! Fractional vertex packing and its covering dual.
//!
//! Primal: `max pᵀq` subject to `q ≥ 0`, `Bq ≤ 1`, `q ≤ 1`. The upper bound
//! stands in for the singleton edges `{v}`, which are never stored as rows.
//!
//! Dual: `min 1ᵀz + 1ᵀy` subject to `Bᵀz + y ≥ p`, `z, y ≥ 0`. Here `z` is
//! indexed by the rows of `B` and `y` by vertices (the singleton edges).
//!
//! The solver is an interior-point method. Its iterate is repaired into an
//! exactly feasible primal/dual pair, and the pair is accepted only if the
//! duality gap passes the configured tolerance. Callers therefore never see
//! an answer without a certificate.

pub(crate) mod backend;
mod export;

pub use export::write_lp_format;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{incidence, ConflictHypergraph, IncidenceMatrix};

#[derive(Debug, Error)]
pub enum LpError {
    #[error("invalid masses: {0}")]
    InvalidMasses(String),

    #[error("incidence matrix has {matrix} columns but there are {masses} masses")]
    DimensionMismatch { matrix: usize, masses: usize },

    #[error(
        "no certified optimum after {iterations} iterations; objective lies in [{lower_objective}, {upper_objective}]"
    )]
    NonConvergence {
        iterations: u32,
        lower_objective: f64,
        upper_objective: f64,
    },

    #[error("solver backend: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub feasibility_abs: f64,
    pub gap_rel: f64,
    pub max_iterations: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility_abs: 1e-8,
            gap_rel: 1e-6,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingLp {
    masses: Vec<f64>,
    incidence: IncidenceMatrix,
}

impl PackingLp {
    /// Masses must be finite and nonnegative. Zero-mass vertices are left
    /// out of the solve and reported with `q = 0`.
    pub fn new(masses: Vec<f64>, incidence: IncidenceMatrix) -> Result<Self, LpError> {
        if masses.len() != incidence.num_vertices() {
            return Err(LpError::DimensionMismatch {
                matrix: incidence.num_vertices(),
                masses: masses.len(),
            });
        }
        if let Some((v, m)) = masses.iter().enumerate().find(|(_, m)| !m.is_finite() || **m < 0.0) {
            return Err(LpError::InvalidMasses(format!("vertex {v} has mass {m}")));
        }
        Ok(PackingLp { masses, incidence })
    }

    pub fn from_graph(graph: &ConflictHypergraph, dedupe_dominated: bool) -> Self {
        PackingLp {
            masses: graph.masses(),
            incidence: incidence(graph, dedupe_dominated),
        }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    pub fn num_vertices(&self) -> usize {
        self.masses.len()
    }

    pub fn num_rows(&self) -> usize {
        self.incidence.num_rows()
    }

    /// Same constraints, masses multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, LpError> {
        Self::new(self.masses.iter().map(|m| m * factor).collect(), self.incidence.clone())
    }
}

/// A certified primal/dual pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    /// Correct-classification probability of each vertex.
    pub q: Vec<f64>,
    /// Cover weight of each row of `B`.
    pub z: Vec<f64>,
    /// Cover weight of each singleton edge.
    pub z_singleton: Vec<f64>,
    /// `pᵀq`.
    pub objective: f64,
    /// `1ᵀz + 1ᵀz_singleton`.
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: u32,
    /// `1ᵀp`.
    pub total_mass: f64,
}

impl LpSolution {
    /// `1ᵀp − pᵀq`, which is `1 − pᵀq` for a probability vector but is
    /// exactly zero when every `q_v = 1`.
    pub fn loss(&self) -> f64 {
        (self.total_mass - self.objective).max(0.0)
    }
}

/// Solves the packing LP and certifies the answer.
pub fn solve_packing(lp: &PackingLp, tol: &Tolerances) -> Result<LpSolution, LpError> {
    if !(tol.feasibility_abs > 0.0) || !(tol.gap_rel > 0.0) || tol.max_iterations == 0 {
        return Err(LpError::Backend(format!("tolerances must be positive: {tol:?}")));
    }
    let n = lp.num_vertices();
    let b = &lp.incidence;
    let active: Vec<usize> = (0..n).filter(|&v| lp.masses[v] > 0.0).collect();
    let mut position = vec![usize::MAX; n];
    for (k, &v) in active.iter().enumerate() {
        position[v] = k;
    }
    // Rows restricted to positive-mass vertices; rows that become empty
    // or singletons impose nothing beyond `0 ≤ q ≤ 1`.
    let rows: Vec<(usize, Vec<usize>)> = b
        .rows()
        .iter()
        .enumerate()
        .map(|(e, r)| {
            (
                e,
                r.iter()
                    .filter(|&&v| position[v] != usize::MAX)
                    .map(|&v| position[v])
                    .collect::<Vec<_>>(),
            )
        })
        .filter(|(_, r)| r.len() >= 2)
        .collect();

    let mut q = vec![0.0; n];
    let mut z = vec![0.0; b.num_rows()];
    let mut iterations = 0;
    if rows.is_empty() {
        for &v in &active {
            q[v] = 1.0;
        }
    } else {
        let scale = active.iter().map(|&v| lp.masses[v]).fold(0.0, f64::max);
        let k = active.len();
        let mut le_rows: Vec<backend::SparseRow> = rows
            .iter()
            .map(|(_, r)| r.iter().map(|&c| (c, 1.0)).collect())
            .collect();
        let mut le_rhs = vec![1.0; rows.len()];
        for c in 0..k {
            le_rows.push(vec![(c, 1.0)]);
            le_rhs.push(1.0);
        }
        for c in 0..k {
            le_rows.push(vec![(c, -1.0)]);
            le_rhs.push(0.0);
        }
        let program = backend::LinearProgram {
            num_vars: k,
            cost: active.iter().map(|&v| -lp.masses[v] / scale).collect(),
            le_rows,
            le_rhs,
            ..Default::default()
        };
        let raw = backend::solve(&program, tol.max_iterations)?;
        iterations = raw.iterations;
        for (c, &v) in active.iter().enumerate() {
            q[v] = raw.x[c];
        }
        for ((e, _), &d) in rows.iter().zip(&raw.le_duals) {
            z[*e] = d * scale;
        }
        if !raw.converged {
            log::debug!("interior point stopped after {iterations} iterations without reaching its tolerance");
        }
    }
    let (q, z, y) = repair(lp, q, z);
    let report = certificate(lp, &q, &z, &y, tol);
    let sol = LpSolution {
        objective: report.primal_objective,
        dual_objective: report.dual_objective,
        duality_gap: report.duality_gap,
        primal_residual: report.primal_residual,
        dual_residual: report.dual_residual,
        q,
        z,
        z_singleton: y,
        iterations,
        total_mass: lp.masses.iter().sum(),
    };
    if !report.certified {
        return Err(LpError::NonConvergence {
            iterations,
            lower_objective: sol.objective,
            upper_objective: sol.dual_objective,
        });
    }
    Ok(sol)
}

/// Projects an approximate pair onto the feasible sets: `q` is clipped to
/// `[0, 1]` and divided by its largest row sum when that exceeds 1; `z` is
/// clipped at 0 and the singleton weights absorb the remaining deficit.
fn repair(lp: &PackingLp, mut q: Vec<f64>, mut z: Vec<f64>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    for (v, x) in q.iter_mut().enumerate() {
        *x = if lp.masses[v] > 0.0 { x.clamp(0.0, 1.0) } else { 0.0 };
    }
    let worst = lp.incidence.mul(&q).into_iter().fold(1.0, f64::max);
    if worst > 1.0 {
        for x in &mut q {
            *x /= worst;
        }
    }
    for x in &mut z {
        *x = x.max(0.0);
    }
    let covered = lp.incidence.mul_transpose(&z);
    let y = lp.masses.iter().zip(&covered).map(|(p, c)| (p - c).max(0.0)).collect();
    (q, z, y)
}

/// Independent re-evaluation of a primal/dual pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `1ᵀz + 1ᵀy − pᵀq`.
    pub duality_gap: f64,
    /// Largest violation of `q ≥ 0`, `q ≤ 1`, `Bq ≤ 1`.
    pub primal_residual: f64,
    /// Largest violation of `z ≥ 0`, `y ≥ 0`, `Bᵀz + y ≥ p`.
    pub dual_residual: f64,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub gap_ok: bool,
    /// Vertices with `q_v > tol` whose cover strictly exceeds `p_v`.
    pub over_covered_with_positive_q: Vec<usize>,
    /// Rows with `z_e > tol` that are not tight in the primal.
    pub slack_rows_with_positive_z: Vec<usize>,
    pub certified: bool,
}

/// Recomputes residuals and the gap from scratch. `sol.z_singleton` may be
/// empty, in which case singleton cover weights are taken as zero.
pub fn verify_certificates(lp: &PackingLp, sol: &LpSolution, tol: &Tolerances) -> CertificateReport {
    let y = if sol.z_singleton.is_empty() {
        vec![0.0; lp.num_vertices()]
    } else {
        sol.z_singleton.clone()
    };
    certificate(lp, &sol.q, &sol.z, &y, tol)
}

fn certificate(lp: &PackingLp, q: &[f64], z: &[f64], y: &[f64], tol: &Tolerances) -> CertificateReport {
    let n = lp.num_vertices();
    let b = &lp.incidence;
    let shape_ok = q.len() == n && y.len() == n && z.len() == b.num_rows();
    if !shape_ok {
        return CertificateReport {
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            duality_gap: f64::INFINITY,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            primal_feasible: false,
            dual_feasible: false,
            gap_ok: false,
            over_covered_with_positive_q: Vec::new(),
            slack_rows_with_positive_z: Vec::new(),
            certified: false,
        };
    }
    let bq = b.mul(q);
    let btz = b.mul_transpose(z);
    let mut primal_residual: f64 = 0.0;
    for &x in q {
        primal_residual = primal_residual.max(-x).max(x - 1.0);
    }
    for &s in &bq {
        primal_residual = primal_residual.max(s - 1.0);
    }
    let mut dual_residual: f64 = 0.0;
    for &x in z.iter().chain(y) {
        dual_residual = dual_residual.max(-x);
    }
    let cover: Vec<f64> = btz.iter().zip(y).map(|(a, b)| a + b).collect();
    for (c, p) in cover.iter().zip(&lp.masses) {
        dual_residual = dual_residual.max(p - c);
    }
    let primal_objective: f64 = lp.masses.iter().zip(q).map(|(p, x)| p * x).sum();
    let dual_objective: f64 = z.iter().sum::<f64>() + y.iter().sum::<f64>();
    let duality_gap = dual_objective - primal_objective;
    let t = tol.feasibility_abs;
    let primal_feasible = primal_residual <= t;
    let dual_feasible = dual_residual <= t;
    let gap_ok = duality_gap.abs() <= tol.gap_rel * primal_objective.abs().max(1.0);
    let over_covered_with_positive_q = (0..n).filter(|&v| q[v] > t && cover[v] > lp.masses[v] + t).collect();
    let slack_rows_with_positive_z = (0..b.num_rows()).filter(|&e| z[e] > t && bq[e] < 1.0 - t).collect();
    CertificateReport {
        primal_objective,
        dual_objective,
        duality_gap,
        primal_residual,
        dual_residual,
        primal_feasible,
        dual_feasible,
        gap_ok,
        over_covered_with_positive_q,
        slack_rows_with_positive_z,
        certified: primal_feasible && dual_feasible && gap_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(masses: &[f64], rows: Vec<Vec<usize>>) -> PackingLp {
        PackingLp::new(masses.to_vec(), IncidenceMatrix::new(masses.len(), rows).unwrap()).unwrap()
    }

    const THIRD: f64 = 1.0 / 3.0;

    #[test]
    fn pairwise_triangle() {
        let p = lp(&[THIRD; 3], vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        let s = solve_packing(&p, &Tolerances::default()).unwrap();
        assert!((s.objective - 0.5).abs() < 1e-8);
        for &x in &s.q {
            assert!((x - 0.5).abs() < 1e-6);
        }
        for &x in &s.z {
            assert!((x - 1.0 / 6.0).abs() < 1e-6);
        }
    }

    #[test]
    fn triple_edge() {
        let p = lp(&[THIRD; 3], vec![vec![0, 1, 2]]);
        let s = solve_packing(&p, &Tolerances::default()).unwrap();
        assert!((s.objective - THIRD).abs() < 1e-8);
        assert!((s.z[0] - THIRD).abs() < 1e-8);
    }

    #[test]
    fn no_rows() {
        let p = lp(&[0.25; 4], Vec::new());
        let s = solve_packing(&p, &Tolerances::default()).unwrap();
        assert_eq!(s.q, vec![1.0; 4]);
        assert_eq!(s.objective, 1.0);
        assert!(s.z.is_empty());
        assert_eq!(s.z_singleton, vec![0.25; 4]);
    }

    #[test]
    fn zero_mass_vertex_gets_zero() {
        let p = lp(&[0.5, 0.5, 0.0], vec![vec![0, 2], vec![1, 2]]);
        let s = solve_packing(&p, &Tolerances::default()).unwrap();
        assert_eq!(s.q[2], 0.0);
        assert!((s.objective - 1.0).abs() < 1e-8);
    }

    #[test]
    fn certificate_flags_corruption() {
        let p = lp(&[THIRD; 3], vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        let tol = Tolerances::default();
        let s = solve_packing(&p, &tol).unwrap();
        let ok = verify_certificates(&p, &s, &tol);
        assert!(ok.certified && ok.primal_residual < 1e-8 && ok.duality_gap.abs() < 1e-6);

        let mut bad = s.clone();
        bad.q[0] += 0.1;
        let r = verify_certificates(&p, &bad, &tol);
        assert!(!r.primal_feasible && r.primal_residual > 0.05);

        let mut bare = s.clone();
        bare.z = vec![0.0; 3];
        bare.z_singleton = vec![0.0; 3];
        let r = verify_certificates(&p, &bare, &tol);
        assert!(!r.dual_feasible && (r.dual_residual - THIRD).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_mass() {
        let b = IncidenceMatrix::new(2, vec![vec![0, 1]]).unwrap();
        assert!(PackingLp::new(vec![1.5, -0.5], b.clone()).is_err());
        assert!(PackingLp::new(vec![1.0], b).is_err());
    }
}
