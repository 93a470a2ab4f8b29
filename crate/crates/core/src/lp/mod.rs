//! Self-contained dense linear programming with primal and dual certificates.
//!
//! The reference algorithm is a two-phase simplex on a dense tableau with
//! Bland's anti-cycling rule, so solves are deterministic and terminate. Every
//! optimal answer is certified: primal feasibility, dual feasibility,
//! complementary slackness and the duality gap are all checked before the
//! solution is handed back, regardless of which backend produced it.

mod exact;
mod simplex;

pub use exact::{solve_enumerated, ExactResult};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

/// A dense LP statement: optimize `objective · x` subject to row constraints
/// and variable bounds. Lower bounds default to 0; `f64::NEG_INFINITY` marks a
/// free variable. Upper bounds are optional and require a finite lower bound.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub row_senses: Vec<RowSense>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

impl LinearProgram {
    /// A program with all variables nonnegative and no upper bounds.
    pub fn new(
        sense: Sense,
        objective: Vec<f64>,
        rows: Vec<Vec<f64>>,
        row_senses: Vec<RowSense>,
        rhs: Vec<f64>,
    ) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            rows,
            row_senses,
            rhs,
            lower: vec![0.0; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let m = self.num_rows();
        if self.row_senses.len() != m || self.rhs.len() != m {
            return Err(LpError::Shape("row arrays have inconsistent lengths".into()));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Shape("bound arrays have inconsistent lengths".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != n {
                return Err(LpError::Shape(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if !row.iter().all(|v| v.is_finite()) {
                return Err(LpError::Shape(format!("row {i} has a non-finite entry")));
            }
        }
        if !self.objective.iter().all(|v| v.is_finite()) {
            return Err(LpError::Shape("objective has a non-finite entry".into()));
        }
        if !self.rhs.iter().all(|v| v.is_finite()) {
            return Err(LpError::Shape("rhs has a non-finite entry".into()));
        }
        for j in 0..n {
            let l = self.lower[j];
            if l.is_nan() || l == f64::INFINITY {
                return Err(LpError::Shape(format!("lower bound of variable {j} is invalid")));
            }
            if let Some(u) = self.upper[j] {
                if !u.is_finite() {
                    return Err(LpError::Shape(format!("upper bound of variable {j} is not finite")));
                }
                if !l.is_finite() {
                    return Err(LpError::Shape(format!(
                        "variable {j} has an upper bound but no finite lower bound"
                    )));
                }
                if u < l {
                    return Err(LpError::Shape(format!("variable {j} has upper bound below lower bound")));
                }
            }
        }
        Ok(())
    }

    /// Plain-text matrix dump for debugging (flag-controlled in the CLI).
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let sense = match self.sense {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        };
        writeln!(s, "{sense} {} vars, {} rows", self.num_vars(), self.num_rows()).unwrap();
        write!(s, "c:").unwrap();
        for v in &self.objective {
            write!(s, " {v:.17e}").unwrap();
        }
        writeln!(s).unwrap();
        for (i, row) in self.rows.iter().enumerate() {
            for v in row {
                write!(s, " {v:.17e}").unwrap();
            }
            let op = match self.row_senses[i] {
                RowSense::Le => "<=",
                RowSense::Eq => "=",
                RowSense::Ge => ">=",
            };
            writeln!(s, " {op} {:.17e}", self.rhs[i]).unwrap();
        }
        for j in 0..self.num_vars() {
            if self.lower[j] != 0.0 || self.upper[j].is_some() {
                writeln!(s, "x{j} in [{}, {:?}]", self.lower[j], self.upper[j]).unwrap();
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration cap hit or a certificate check failed; never silently wrong.
    NumericalFailure,
}

/// Residuals of the optimality system, all absolute except the relative gap.
#[derive(Debug, Clone, Copy, Default)]
pub struct Certificate {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub complementarity: f64,
    pub duality_gap: f64,
}

impl Certificate {
    pub fn within(&self, cfg: &SimplexConfig) -> bool {
        self.primal_residual <= cfg.feas_tol
            && self.dual_residual <= cfg.feas_tol
            && self.complementarity <= cfg.cs_tol
            && self.duality_gap <= cfg.gap_tol
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// One multiplier per user row, in the sign convention of the problem
    /// sense (for `Maximize`, a binding `≤` row has a nonnegative dual).
    pub dual: Vec<f64>,
    /// Reduced cost of each variable, consistent with `dual` and the internal
    /// upper-bound multipliers.
    pub reduced_costs: Vec<f64>,
    /// Multipliers of the upper-bound rows (0 for unbounded-above variables).
    pub upper_duals: Vec<f64>,
    pub objective: f64,
    pub certificate: Certificate,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SimplexConfig {
    /// Entries smaller than this never serve as pivots.
    pub pivot_tol: f64,
    /// Feasibility tolerance for the certificate checks.
    pub feas_tol: f64,
    /// Complementary-slackness tolerance.
    pub cs_tol: f64,
    /// Relative primal/dual objective agreement.
    pub gap_tol: f64,
    pub max_iters: usize,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        SimplexConfig {
            pivot_tol: 1e-10,
            feas_tol: 1e-9,
            cs_tol: 1e-8,
            gap_tol: 1e-8,
            max_iters: 1_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Shape(String),
    #[error("instance too large for the enumeration oracle ({0} bases)")]
    TooLarge(f64),
}

/// Pluggable solver backend. The certificate checks in [`solve_with_backend`]
/// run on whatever the backend returns.
pub trait LpBackend {
    fn solve(&self, lp: &LinearProgram, cfg: &SimplexConfig) -> Result<LpSolution, LpError>;
}

/// The built-in dense two-phase simplex.
pub struct DenseSimplex;

impl LpBackend for DenseSimplex {
    fn solve(&self, lp: &LinearProgram, cfg: &SimplexConfig) -> Result<LpSolution, LpError> {
        simplex::solve(lp, cfg)
    }
}

/// Solves with the built-in simplex and the default configuration.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with(lp, &SimplexConfig::default())
}

pub fn solve_with(lp: &LinearProgram, cfg: &SimplexConfig) -> Result<LpSolution, LpError> {
    solve_with_backend(lp, &DenseSimplex, cfg)
}

pub fn solve_with_backend(
    lp: &LinearProgram,
    backend: &dyn LpBackend,
    cfg: &SimplexConfig,
) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let mut sol = backend.solve(lp, cfg)?;
    if sol.status == LpStatus::Optimal {
        sol.certificate = certify(lp, &sol);
        if !sol.certificate.within(cfg) {
            log::warn!(
                "certificate failure: primal {:.3e} dual {:.3e} cs {:.3e} gap {:.3e}",
                sol.certificate.primal_residual,
                sol.certificate.dual_residual,
                sol.certificate.complementarity,
                sol.certificate.duality_gap
            );
            sol.status = LpStatus::NumericalFailure;
        }
    }
    Ok(sol)
}

/// Recomputes the optimality residuals of a claimed solution from scratch.
/// Backend-independent: only the vectors in `sol` are trusted as inputs.
pub fn certify(lp: &LinearProgram, sol: &LpSolution) -> Certificate {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let x = &sol.primal;

    // Internally certify in minimize convention.
    let flip = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let c: Vec<f64> = lp.objective.iter().map(|v| v * flip).collect();
    let y: Vec<f64> = sol.dual.iter().map(|v| v * flip).collect();
    let mu: Vec<f64> = sol.upper_duals.iter().map(|v| v * flip).collect();

    let mut primal_residual = 0.0f64;
    let mut dual_residual = 0.0f64;
    let mut cs = 0.0f64;

    let mut dual_obj = 0.0f64;
    for i in 0..m {
        let ax: f64 = lp.rows[i].iter().zip(x).map(|(a, v)| a * v).sum();
        let slack = ax - lp.rhs[i];
        match lp.row_senses[i] {
            RowSense::Le => {
                primal_residual = primal_residual.max(slack);
                dual_residual = dual_residual.max(y[i]); // needs y_i ≤ 0
            }
            RowSense::Ge => {
                primal_residual = primal_residual.max(-slack);
                dual_residual = dual_residual.max(-y[i]);
            }
            RowSense::Eq => {
                primal_residual = primal_residual.max(slack.abs());
            }
        }
        cs = cs.max((y[i] * slack).abs());
        dual_obj += y[i] * lp.rhs[i];
    }

    for j in 0..n {
        // r_j = c_j − yᵀA_j − μ_j, with μ_j the upper-bound multiplier (≥ 0 in
        // minimize convention it enters as −μ_j with μ_j ≤ 0 ... we store the
        // signed multiplier directly).
        let yta: f64 = (0..m).map(|i| y[i] * lp.rows[i][j]).sum();
        let r = c[j] - yta - mu[j];
        let l = lp.lower[j];
        if l.is_finite() {
            primal_residual = primal_residual.max(l - x[j]);
            dual_residual = dual_residual.max(-r); // needs r_j ≥ 0
            cs = cs.max((r * (x[j] - l)).abs());
            dual_obj += l * r;
        } else {
            dual_residual = dual_residual.max(r.abs()); // free variable: r_j = 0
        }
        if let Some(u) = lp.upper[j] {
            primal_residual = primal_residual.max(x[j] - u);
            dual_residual = dual_residual.max(mu[j]); // μ_j ≤ 0 in min convention
            cs = cs.max((mu[j] * (u - x[j])).abs());
            dual_obj += u * mu[j];
        } else if mu[j] != 0.0 {
            dual_residual = dual_residual.max(mu[j].abs());
        }
    }

    let primal_obj: f64 = c.iter().zip(x).map(|(a, v)| a * v).sum();
    let duality_gap = (primal_obj - dual_obj).abs() / primal_obj.abs().max(1.0);

    Certificate { primal_residual, dual_residual, complementarity: cs, duality_gap }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_variable_max() {
        // max x s.t. x ≤ 3, x ≥ 0
        let lp = LinearProgram::new(
            Sense::Maximize,
            vec![1.0],
            vec![vec![1.0]],
            vec![RowSense::Le],
            vec![3.0],
        );
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-12);
        assert!((sol.primal[0] - 3.0).abs() < 1e-12);
        assert!((sol.dual[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_system() {
        // x ≤ −1, x ≥ 0
        let lp = LinearProgram::new(
            Sense::Maximize,
            vec![1.0],
            vec![vec![1.0]],
            vec![RowSense::Le],
            vec![-1.0],
        );
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let lp = LinearProgram::new(
            Sense::Maximize,
            vec![1.0],
            vec![vec![-1.0]],
            vec![RowSense::Le],
            vec![1.0],
        );
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn printed_example_lp() {
        // The four-row program whose optimal vertex is (3,3,3,3) for equal
        // weights summing to one.
        let alpha = [1.0 / 3.0; 3];
        let s: f64 = alpha.iter().sum();
        let a = vec![
            vec![0.0, -1.0, -1.0, 3.0],
            vec![-1.0, 0.0, -1.0, 3.0],
            vec![-1.0, -1.0, 0.0, 3.0],
            vec![-1.0, -1.0, -1.0, 6.0],
        ];
        let b = vec![3.0, 3.0, 3.0, 9.0];
        let c = vec![-alpha[0], -alpha[1], -alpha[2], 3.0 * s - 1.0];
        let lp = LinearProgram::new(Sense::Maximize, c, a, vec![RowSense::Le; 4], b);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-9, "got {}", sol.objective);
    }

    #[test]
    fn equality_and_free_variables() {
        // min x + y s.t. x + 2y = 4, x − y ≥ −5, y free
        let mut lp = LinearProgram::new(
            Sense::Minimize,
            vec![1.0, 1.0],
            vec![vec![1.0, 2.0], vec![1.0, -1.0]],
            vec![RowSense::Eq, RowSense::Ge],
            vec![4.0, -5.0],
        );
        lp.lower[1] = f64::NEG_INFINITY;
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // optimum at x = 0, y = 2
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!(sol.certificate.within(&SimplexConfig::default()));
    }

    #[test]
    fn shifted_lower_bounds() {
        // min x s.t. x ≥ 2 encoded through the bound
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0], vec![], vec![], vec![]);
        lp.lower[0] = 2.0;
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn upper_bounds() {
        // max x + y, x ≤ 1.5, y ≤ 2.5 via bounds
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0], vec![], vec![], vec![]);
        lp.upper[0] = Some(1.5);
        lp.upper[1] = Some(2.5);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 4.0).abs() < 1e-12);
        assert!(sol.certificate.within(&SimplexConfig::default()));
    }

    #[test]
    fn degenerate_program_terminates() {
        // Several redundant rows through the same vertex.
        let lp = LinearProgram::new(
            Sense::Maximize,
            vec![1.0, 1.0],
            vec![
                vec![1.0, 1.0],
                vec![2.0, 2.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
            ],
            vec![RowSense::Le; 4],
            vec![1.0, 2.0, 1.0, 1.0],
        );
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }
}
