//! Thin wrapper over the Clarabel interior-point solver for linear programs
//! of the form `min cᵀx` subject to `A_eq x = b_eq` and `A_le x ≤ b_le`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus, SupportedConeT, ZeroConeT,
};

use super::LpError;

const SOLVER_TOLERANCE: f64 = 1e-10;

/// Sparse row given as `(column, coefficient)` pairs.
pub(crate) type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, Default)]
pub(crate) struct LinearProgram {
    pub num_vars: usize,
    pub cost: Vec<f64>,
    pub eq_rows: Vec<SparseRow>,
    pub eq_rhs: Vec<f64>,
    pub le_rows: Vec<SparseRow>,
    pub le_rhs: Vec<f64>,
}

/// Raw interior-point output. Inequality multipliers satisfy
/// `c + A_eqᵀ μ + A_leᵀ le_duals = 0` with `le_duals ≥ 0`.
#[derive(Debug, Clone)]
pub(crate) struct RawSolution {
    pub x: Vec<f64>,
    pub le_duals: Vec<f64>,
    pub iterations: u32,
    pub converged: bool,
}

pub(crate) fn solve(lp: &LinearProgram, max_iterations: u32) -> Result<RawSolution, LpError> {
    let n = lp.num_vars;
    if lp.cost.len() != n || lp.eq_rows.len() != lp.eq_rhs.len() || lp.le_rows.len() != lp.le_rhs.len() {
        return Err(LpError::Backend("inconsistent LP dimensions".into()));
    }
    let m_eq = lp.eq_rows.len();
    let m = m_eq + lp.le_rows.len();
    let (mut ri, mut ci, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    for (r, row) in lp.eq_rows.iter().chain(&lp.le_rows).enumerate() {
        for &(c, v) in row {
            if c >= n {
                return Err(LpError::Backend(format!("column {c} out of range")));
            }
            ri.push(r);
            ci.push(c);
            vals.push(v);
        }
    }
    let a = CscMatrix::new_from_triplets(m, n, ri, ci, vals);
    let p = CscMatrix::<f64>::zeros((n, n));
    let b: Vec<f64> = lp.eq_rhs.iter().chain(&lp.le_rhs).copied().collect();
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    if m_eq > 0 {
        cones.push(ZeroConeT(m_eq));
    }
    if m > m_eq {
        cones.push(NonnegativeConeT(m - m_eq));
    }
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(max_iterations)
        .tol_gap_abs(SOLVER_TOLERANCE)
        .tol_gap_rel(SOLVER_TOLERANCE)
        .tol_feas(SOLVER_TOLERANCE)
        .tol_ktratio(1e-8)
        .build()
        .map_err(|e| LpError::Backend(format!("{e:?}")))?;
    let mut solver =
        DefaultSolver::new(&p, &lp.cost, &a, &b, &cones, settings).map_err(|e| LpError::Backend(format!("{e:?}")))?;
    solver.solve();
    let sol = &solver.solution;
    match sol.status {
        SolverStatus::PrimalInfeasible
        | SolverStatus::AlmostPrimalInfeasible
        | SolverStatus::DualInfeasible
        | SolverStatus::AlmostDualInfeasible => {
            return Err(LpError::Backend(format!("solver reported {:?}", sol.status)));
        }
        _ => {}
    }
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    if !finite(&sol.x) || !finite(&sol.z) {
        return Err(LpError::NonConvergence {
            iterations: sol.iterations,
            lower_objective: f64::NAN,
            upper_objective: f64::NAN,
        });
    }
    Ok(RawSolution {
        x: sol.x.clone(),
        le_duals: sol.z[m_eq..].to_vec(),
        iterations: sol.iterations,
        converged: matches!(sol.status, SolverStatus::Solved),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_box_lp() {
        // max x + 2y s.t. x + y ≤ 1, x, y ≥ 0  →  y = 1.
        let lp = LinearProgram {
            num_vars: 2,
            cost: vec![-1.0, -2.0],
            le_rows: vec![vec![(0, 1.0), (1, 1.0)], vec![(0, -1.0)], vec![(1, -1.0)]],
            le_rhs: vec![1.0, 0.0, 0.0],
            ..LinearProgram::default()
        };
        let s = solve(&lp, 100).unwrap();
        assert!(s.converged);
        assert!((s.x[1] - 1.0).abs() < 1e-8 && s.x[0].abs() < 1e-8);
        assert!((s.le_duals[0] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn equality_rows() {
        // min x s.t. x + y = 1, y ≤ 0.25, x, y ≥ 0  →  x = 0.75.
        let lp = LinearProgram {
            num_vars: 2,
            cost: vec![1.0, 0.0],
            eq_rows: vec![vec![(0, 1.0), (1, 1.0)]],
            eq_rhs: vec![1.0],
            le_rows: vec![vec![(1, 1.0)], vec![(0, -1.0)], vec![(1, -1.0)]],
            le_rhs: vec![0.25, 0.0, 0.0],
        };
        let s = solve(&lp, 100).unwrap();
        assert!((s.x[0] - 0.75).abs() < 1e-8);
    }
}
