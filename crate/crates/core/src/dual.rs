//! Dual side of the relaxed transport problem: excess functionals, the finite
//! dual program, weak/strong duality objectives, and the primal-dual
//! optimality checker.
//!
//! The k-point excess of a potential φ (vanishing at infinity) is the largest
//! value of `(1/k) Σ φ(x_i) − interaction(x_1..x_k)` over configurations of at
//! most `k` points from the sampled domain; unused slots sit at the point at
//! infinity, which contributes value 0 and no interaction. Admitting that
//! choice makes the excess ladder in `k` hold exactly on discrete domains.

use crate::cost::{pair_cost, Cost, CostError, Kernel};
use crate::lp::{self, LinearProgram, LpError, LpStatus, RowSense, Sense, SimplexConfig};
use crate::maxima::best_configuration;
use crate::measures::{compactify, DiscreteMeasure, Point};
use crate::primal::Decomposition;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DualError {
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LP solver failed with status {0:?}")]
    SolverFailure(LpStatus),
    #[error("points and values have different lengths ({points} vs {values})")]
    LengthMismatch { points: usize, values: usize },
    #[error("potential value {0} is not finite")]
    NonFiniteValue(f64),
    #[error("no potential value within 1e-9 of atom {0}")]
    DomainMismatch(usize),
    #[error("dual program too large: about {0:.3e} constraints (limit 1e6)")]
    TooManyConstraints(f64),
}

/// A dual variable: values on a finite family of points plus the value at the
/// point at infinity.
#[derive(Debug, Clone)]
pub struct DualPotential {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub value_at_infinity: f64,
}

impl DualPotential {
    /// The associated potential vanishing at infinity: `u − u(ω)` pointwise.
    pub fn c0_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v - self.value_at_infinity).collect()
    }

    /// The dual objective `∫ u dρ + (1 − ‖ρ‖) u(ω)`.
    pub fn objective(&self, rho: &DiscreteMeasure) -> Result<f64, DualError> {
        let mut total = (1.0 - rho.total_mass()) * self.value_at_infinity;
        for (i, (a, &w)) in rho.atoms().iter().zip(rho.weights()).enumerate() {
            let idx = find_point(&self.points, a).ok_or(DualError::DomainMismatch(i))?;
            total += w * self.values[idx];
        }
        Ok(total)
    }

    /// JSON export: `{"values": {"<index>": y, ..., "omega": y_omega}}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (i, v) in self.values.iter().enumerate() {
            map.insert(i.to_string(), serde_json::json!(v));
        }
        map.insert("omega".to_string(), serde_json::json!(self.value_at_infinity));
        serde_json::json!({
            "points": self.points.iter().map(|p| p.coords().unwrap().to_vec()).collect::<Vec<_>>(),
            "values": map,
        })
    }
}

pub(crate) fn find_point(points: &[Point], target: &Point) -> Option<usize> {
    points
        .iter()
        .position(|p| p.distance(target).is_some_and(|d| d <= 1e-9))
}

/// Result of an excess maximization: the value and an attaining configuration
/// (point indices; missing slots are at infinity).
#[derive(Debug, Clone)]
pub struct Excess {
    pub value: f64,
    pub configuration: Vec<usize>,
}

fn validate_potential(points: &[Point], values: &[f64]) -> Result<(), DualError> {
    if points.len() != values.len() {
        return Err(DualError::LengthMismatch { points: points.len(), values: values.len() });
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(DualError::NonFiniteValue(bad));
    }
    Ok(())
}

/// The k-point excess `M_k` of a sampled potential (0 for `k = 0`).
pub fn excess(points: &[Point], values: &[f64], k: usize, kernel: &Kernel) -> Result<Excess, DualError> {
    validate_potential(points, values)?;
    if k == 0 {
        return Ok(Excess { value: 0.0, configuration: Vec::new() });
    }
    let n = points.len();
    let mut pairs = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = pair_cost(&points[i], &points[j], kernel)?;
            let w = match w {
                Cost::Finite(v) => v,
                Cost::Infinite => f64::INFINITY,
            };
            pairs[i * n + j] = w;
            pairs[j * n + i] = w;
        }
    }
    let gains: Vec<f64> = values.iter().map(|v| v / k as f64).collect();
    let best = best_configuration(&gains, k, &|i, j| pairs[i * n + j]);
    Ok(Excess { value: best.value, configuration: best.indices })
}

/// The gap `Δ_N(φ) = M_N(φ) − M_{N−1}((N−1)φ/N)`, nonnegative by the ladder.
pub fn excess_gap(points: &[Point], values: &[f64], n: usize, kernel: &Kernel) -> Result<f64, DualError> {
    let top = excess(points, values, n, kernel)?.value;
    let scaled: Vec<f64> = values.iter().map(|v| v * (n - 1) as f64 / n as f64).collect();
    let below = excess(points, &scaled, n - 1, kernel)?.value;
    Ok(top - below)
}

/// Pointwise positive part; the excess functionals are invariant under it.
pub fn positive_part(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| v.max(0.0)).collect()
}

/// The finite dual program for the relaxed cost, built independently of the
/// primal program: maximize `Σ α_i y_i + (1 − Σα) y_ω` subject to one
/// constraint per finite-cost multiset of support points and `ω`.
pub fn dual_program(rho: &DiscreteMeasure, n: usize, kernel: &Kernel) -> Result<LinearProgram, DualError> {
    let k_atoms = rho.len();
    // One constraint per size-n multiset of the compactified support.
    let mut multisets = 1.0f64;
    for j in 1..=n {
        multisets = multisets * (k_atoms + j) as f64 / j as f64;
    }
    if multisets > 1e6 {
        return Err(DualError::TooManyConstraints(multisets));
    }
    let tilde = compactify(rho);

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    build_constraints(rho, n, kernel, 0, &mut stack, Cost::ZERO, &mut rows, &mut rhs)?;

    let mut objective = rho.weights().to_vec();
    objective.push(tilde.omega_mass());
    let mut lp = LinearProgram::new(
        Sense::Maximize,
        objective,
        rows,
        vec![RowSense::Le; rhs.len()],
        rhs,
    );
    lp.lower = vec![f64::NEG_INFINITY; k_atoms + 1];
    Ok(lp)
}

/// Emits, for every subset of atoms (the rest of the tuple at `ω`), the row
/// `Σ_{i∈S} y_i + (N − |S|) y_ω ≤ N · cost(S)`, skipping infinite costs.
#[allow(clippy::too_many_arguments)]
fn build_constraints(
    rho: &DiscreteMeasure,
    n: usize,
    kernel: &Kernel,
    start: usize,
    stack: &mut Vec<usize>,
    cost_so_far: Cost,
    rows: &mut Vec<Vec<f64>>,
    rhs: &mut Vec<f64>,
) -> Result<(), DualError> {
    let k_atoms = rho.len();
    if let Cost::Finite(c) = cost_so_far {
        let mut row = vec![0.0; k_atoms + 1];
        for &i in stack.iter() {
            row[i] = 1.0;
        }
        row[k_atoms] = (n - stack.len()) as f64;
        rows.push(row);
        rhs.push(n as f64 * c);
    }
    if stack.len() == n {
        return Ok(());
    }
    for next in start..k_atoms {
        let mut added = cost_so_far;
        for &i in stack.iter() {
            added = added + pair_cost(&rho.atoms()[i], &rho.atoms()[next], kernel)?;
        }
        if !added.is_finite() {
            continue;
        }
        stack.push(next);
        build_constraints(rho, n, kernel, next + 1, stack, added, rows, rhs)?;
        stack.pop();
    }
    Ok(())
}

/// Value and optimal potential of the dual program. An unbounded dual signals
/// an infinite relaxed cost (infeasible primal) and is reported as `+∞`.
#[derive(Debug, Clone)]
pub struct DualSolve {
    pub value: Cost,
    pub potential: Option<DualPotential>,
}

pub fn dual_lp(rho: &DiscreteMeasure, n: usize, kernel: &Kernel) -> Result<DualSolve, DualError> {
    dual_lp_with(rho, n, kernel, &SimplexConfig::default())
}

pub fn dual_lp_with(
    rho: &DiscreteMeasure,
    n: usize,
    kernel: &Kernel,
    cfg: &SimplexConfig,
) -> Result<DualSolve, DualError> {
    let lp = dual_program(rho, n, kernel)?;
    let sol = lp::solve_with(&lp, cfg)?;
    match sol.status {
        LpStatus::Optimal => {
            let k_atoms = rho.len();
            let potential = DualPotential {
                points: rho.atoms().to_vec(),
                values: sol.primal[..k_atoms].to_vec(),
                value_at_infinity: sol.primal[k_atoms],
            };
            Ok(DualSolve { value: Cost::Finite(sol.objective), potential: Some(potential) })
        }
        LpStatus::Unbounded => Ok(DualSolve { value: Cost::Infinite, potential: None }),
        other => Err(DualError::SolverFailure(other)),
    }
}

/// The dual objective `I_N(φ) = ∫ φ dρ − M_N(φ)` of a potential vanishing at
/// infinity, sampled on a domain covering the support of `ρ`. Weak duality
/// bounds it by the relaxed cost.
pub fn dual_objective(
    points: &[Point],
    values: &[f64],
    rho: &DiscreteMeasure,
    n: usize,
    kernel: &Kernel,
) -> Result<f64, DualError> {
    validate_potential(points, values)?;
    let mut integral = 0.0;
    for (i, (a, &w)) in rho.atoms().iter().zip(rho.weights()).enumerate() {
        let idx = find_point(points, a).ok_or(DualError::DomainMismatch(i))?;
        integral += w * values[idx];
    }
    Ok(integral - excess(points, values, n, kernel)?.value)
}

/// One evaluation of the three-term optimality identity for a candidate
/// decomposition and dual potential.
///
/// The total equals `Σ_k C_k(ρ_k) − I_N(φ)`, split into the mass defect term,
/// the per-layer duality gaps, and the per-layer excess gaps; each term is
/// nonnegative, and the pair is optimal exactly when all of them vanish.
#[derive(Debug, Clone)]
pub struct OptimalityReport {
    /// `M_N(φ) (1 − Σ_k ‖ρ_k‖)`.
    pub mass_term: f64,
    /// `C_k(ρ_k) − ∫ (kφ/N) dρ_k + M_k(kφ/N) ‖ρ_k‖` for k = 1..N.
    pub layer_gaps: Vec<f64>,
    /// `(M_N(φ) − M_k(kφ/N)) ‖ρ_k‖` for layers carrying mass.
    pub excess_gaps: Vec<Option<f64>>,
    pub total: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Set when `‖ρ‖ ≤ 1/N`, where the mass identity is not required.
    pub below_threshold: bool,
}

impl OptimalityReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "mass_term": self.mass_term,
            "layer_gaps": self.layer_gaps,
            "excess_gaps": self.excess_gaps,
            "total": self.total,
            "tolerance": self.tolerance,
            "pass": self.pass,
            "below_threshold": self.below_threshold,
        })
    }
}

const OPTIMALITY_TOL: f64 = 1e-6;

/// Evaluates the optimality conditions for `(decomposition, potential)`.
/// A report is always produced; `pass` says whether every term is within
/// tolerance. Layers with mass below 1e-9 skip the excess-gap condition.
pub fn check_optimality(
    rho: &DiscreteMeasure,
    decomposition: &Decomposition,
    potential: &DualPotential,
    n: usize,
    kernel: &Kernel,
) -> Result<OptimalityReport, DualError> {
    let phi = potential.c0_values();
    let points = &potential.points;
    validate_potential(points, &phi)?;

    let excess_top = excess(points, &phi, n, kernel)?.value;
    let mass_sum = decomposition.mass_sum();
    let mass_term = excess_top * (1.0 - mass_sum);

    let mut layer_gaps = Vec::with_capacity(n);
    let mut excess_gaps = Vec::with_capacity(n);
    for (idx, layer) in decomposition.layers.iter().enumerate() {
        let k = idx + 1;
        let scaled: Vec<f64> = phi.iter().map(|v| v * k as f64 / n as f64).collect();
        let excess_k = excess(points, &scaled, k, kernel)?.value;
        let mut integral = 0.0;
        for (i, (a, &w)) in layer.atoms().iter().zip(layer.weights()).enumerate() {
            let p = find_point(points, a).ok_or(DualError::DomainMismatch(i))?;
            integral += w * scaled[p];
        }
        let mass = layer.total_mass();
        layer_gaps.push(decomposition.layer_costs[idx] - integral + excess_k * mass);
        excess_gaps.push(if mass > 1e-9 { Some((excess_top - excess_k) * mass) } else { None });
    }

    let total = mass_term
        + layer_gaps.iter().sum::<f64>()
        + excess_gaps.iter().flatten().sum::<f64>();
    let pass = mass_term.abs() <= OPTIMALITY_TOL
        && layer_gaps.iter().all(|t| t.abs() <= OPTIMALITY_TOL)
        && excess_gaps.iter().flatten().all(|t| t.abs() <= OPTIMALITY_TOL);

    Ok(OptimalityReport {
        mass_term,
        layer_gaps,
        excess_gaps,
        total,
        tolerance: OPTIMALITY_TOL,
        pass,
        below_threshold: rho.total_mass() * n as f64 <= 1.0 + 1e-9,
    })
}
