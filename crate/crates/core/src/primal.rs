//! Multi-marginal transport programs on the compactified state space.
//!
//! Plans are stored on multisets of support points rather than ordered tuples:
//! the cost is symmetric, so symmetrizing loses nothing and cuts the variable
//! count by up to `N!`. A multiset containing a repeated finite atom has
//! infinite cost and is excluded when the program is built; if the exclusion
//! makes the marginal system infeasible the value is `+∞`.

use crate::cost::{interaction_cost, Cost, CostError, Kernel};
use crate::lp::{self, LinearProgram, LpError, LpStatus, RowSense, Sense, SimplexConfig};
use crate::measures::{compactify, DiscreteMeasure, MeasureError, Point};
use std::collections::BTreeMap;
use thiserror::Error;

/// Sentinel for the point at infinity inside plan multisets (sorts last).
pub const OMEGA_INDEX: usize = usize::MAX;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("need at least {min} marginals, got {got}")]
    BadMarginals { min: usize, got: usize },
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("LP solver failed with status {0:?}")]
    SolverFailure(LpStatus),
    #[error("plan does not match the measure: {0}")]
    PlanMismatch(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
}

/// A symmetrized transport plan: nonnegative mass per size-`n_marginals`
/// multiset of support indices ([`OMEGA_INDEX`] marks the point at infinity).
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub n_marginals: usize,
    /// Finite support points, in the order of the measure's atoms.
    pub support: Vec<Point>,
    pub entries: BTreeMap<Vec<usize>, f64>,
    /// Set when the plan came out of a certified optimal solve.
    pub certified: bool,
}

impl TransportPlan {
    pub fn total_mass(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Mass of each coordinate marginal at the finite support points.
    pub fn finite_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.support.len()];
        for (key, &mass) in &self.entries {
            for &idx in key {
                if idx != OMEGA_INDEX {
                    out[idx] += mass / self.n_marginals as f64;
                }
            }
        }
        out
    }

    pub fn omega_marginal(&self) -> f64 {
        let mut out = 0.0;
        for (key, &mass) in &self.entries {
            let omegas = key.iter().filter(|&&i| i == OMEGA_INDEX).count();
            out += mass * omegas as f64 / self.n_marginals as f64;
        }
        out
    }

    /// Total interaction cost carried by the plan.
    pub fn cost(&self, kernel: &Kernel) -> Result<Cost, TransportError> {
        let mut total = Cost::ZERO;
        for (key, &mass) in &self.entries {
            if mass == 0.0 {
                continue;
            }
            let pts = self.multiset_points(key);
            match interaction_cost(&pts, kernel)? {
                Cost::Finite(c) => total = total + Cost::Finite(mass * c),
                Cost::Infinite => return Ok(Cost::Infinite),
            }
        }
        Ok(total)
    }

    fn multiset_points(&self, key: &[usize]) -> Vec<Point> {
        key.iter()
            .map(|&i| if i == OMEGA_INDEX { Point::Omega } else { self.support[i].clone() })
            .collect()
    }

    /// Checks the structural invariants: key lengths, nonnegative masses,
    /// total mass in [0, 1], and no mass on an infinite-cost multiset.
    pub fn validate(&self, kernel: &Kernel) -> Result<(), TransportError> {
        for (key, &mass) in &self.entries {
            if key.len() != self.n_marginals {
                return Err(TransportError::PlanMismatch(format!(
                    "multiset {key:?} does not have {} elements",
                    self.n_marginals
                )));
            }
            if mass < -1e-12 {
                return Err(TransportError::PlanMismatch(format!("negative mass on {key:?}")));
            }
            if mass > 1e-12 && !interaction_cost(&self.multiset_points(key), kernel)?.is_finite() {
                return Err(TransportError::PlanMismatch(format!(
                    "positive mass on infinite-cost multiset {key:?}"
                )));
            }
        }
        let total = self.total_mass();
        if !(-1e-9..=1.0 + 1e-9).contains(&total) {
            return Err(TransportError::PlanMismatch(format!("total mass {total} outside [0, 1]")));
        }
        Ok(())
    }

    /// JSON export: a list of `{multiset, mass}` with `-1` marking `ω`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(key, mass)| {
                let ms: Vec<i64> =
                    key.iter().map(|&i| if i == OMEGA_INDEX { -1 } else { i as i64 }).collect();
                serde_json::json!({ "multiset": ms, "mass": mass })
            })
            .collect();
        let support: Vec<Vec<f64>> =
            self.support.iter().map(|p| p.coords().unwrap().to_vec()).collect();
        serde_json::json!({
            "n_marginals": self.n_marginals,
            "support": support,
            "entries": entries,
        })
    }
}

/// Value of a transport program together with an optimal plan; the plan is
/// absent exactly when the value is `+∞`.
#[derive(Debug, Clone)]
pub struct SolvedCost {
    pub value: Cost,
    pub plan: Option<TransportPlan>,
}

/// All subsets of `0..n_atoms` with at most `max_size` elements, ordered by
/// size then lexicographically. Each subset stands for the multiset obtained
/// by padding with `ω`.
fn subsets_up_to(n_atoms: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..max_size.min(n_atoms) {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&l| l + 1);
            for a in start..n_atoms {
                let mut t = s.clone();
                t.push(a);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn padded_key(subset: &[usize], n: usize) -> Vec<usize> {
    let mut key = subset.to_vec();
    key.resize(n, OMEGA_INDEX);
    key
}

struct MarginalLp {
    lp: LinearProgram,
    columns: Vec<Vec<usize>>,
}

/// The symmetrized program for the compactified problem: one variable per
/// finite-cost multiset, one equality row per support point and one for `ω`.
fn build_relaxed_lp(
    rho: &DiscreteMeasure,
    n: usize,
    kernel: &Kernel,
) -> Result<MarginalLp, TransportError> {
    let k_atoms = rho.len();
    let tilde = compactify(rho);
    let mut columns = Vec::new();
    let mut objective = Vec::new();
    for subset in subsets_up_to(k_atoms, n) {
        let pts: Vec<Point> = subset.iter().map(|&i| rho.atoms()[i].clone()).collect();
        match interaction_cost(&pts, kernel)? {
            Cost::Finite(c) => {
                columns.push(subset);
                objective.push(c);
            }
            Cost::Infinite => {}
        }
    }
    let m = k_atoms + 1;
    let mut rows = vec![vec![0.0; columns.len()]; m];
    for (col, subset) in columns.iter().enumerate() {
        for &a in subset {
            rows[a][col] = 1.0 / n as f64;
        }
        rows[k_atoms][col] = (n - subset.len()) as f64 / n as f64;
    }
    let mut rhs = rho.weights().to_vec();
    rhs.push(tilde.omega_mass());
    let lp = LinearProgram::new(Sense::Minimize, objective, rows, vec![RowSense::Eq; m], rhs);
    Ok(MarginalLp { lp, columns })
}

/// The primal program as a plain LP statement, for inspection and dumps.
pub fn relaxed_program(
    rho: &DiscreteMeasure,
    n: usize,
    kernel: &Kernel,
) -> Result<LinearProgram, TransportError> {
    if n < 2 {
        return Err(TransportError::BadMarginals { min: 2, got: n });
    }
    Ok(build_relaxed_lp(rho, n, kernel)?.lp)
}

/// Relaxed cost of a sub-probability: the `n`-marginal program on the
/// compactified support with every marginal equal to the compactified measure.
pub fn relaxed_cost(
    rho: &DiscreteMeasure,
    n: usize,
    kernel: &Kernel,
) -> Result<SolvedCost, TransportError> {
    relaxed_cost_with(rho, n, kernel, &SimplexConfig::default())
}

pub fn relaxed_cost_with(
    rho: &DiscreteMeasure,
    n: usize,
    kernel: &Kernel,
    cfg: &SimplexConfig,
) -> Result<SolvedCost, TransportError> {
    if n < 2 {
        return Err(TransportError::BadMarginals { min: 2, got: n });
    }
    let built = build_relaxed_lp(rho, n, kernel)?;
    let sol = lp::solve_with(&built.lp, cfg)?;
    match sol.status {
        LpStatus::Optimal => {
            let mut entries = BTreeMap::new();
            for (col, subset) in built.columns.iter().enumerate() {
                let mass = sol.primal[col];
                if mass > 1e-12 {
                    entries.insert(padded_key(subset, n), mass);
                }
            }
            let plan = TransportPlan {
                n_marginals: n,
                support: rho.atoms().to_vec(),
                entries,
                certified: true,
            };
            Ok(SolvedCost { value: Cost::Finite(sol.objective.max(0.0)), plan: Some(plan) })
        }
        LpStatus::Infeasible => Ok(SolvedCost { value: Cost::Infinite, plan: None }),
        other => Err(TransportError::SolverFailure(other)),
    }
}

/// The `k`-interaction partial cost of a measure: the `k`-marginal program
/// with every marginal equal to `mu` (no point at infinity involved). The
/// single-particle cost is identically zero.
pub fn partial_cost(
    mu: &DiscreteMeasure,
    k: usize,
    kernel: &Kernel,
) -> Result<SolvedCost, TransportError> {
    partial_cost_with(mu, k, kernel, &SimplexConfig::default())
}

pub fn partial_cost_with(
    mu: &DiscreteMeasure,
    k: usize,
    kernel: &Kernel,
    cfg: &SimplexConfig,
) -> Result<SolvedCost, TransportError> {
    if k < 1 {
        return Err(TransportError::BadMarginals { min: 1, got: k });
    }
    if mu.is_empty() || mu.total_mass() == 0.0 {
        let plan = TransportPlan {
            n_marginals: k,
            support: mu.atoms().to_vec(),
            entries: BTreeMap::new(),
            certified: true,
        };
        return Ok(SolvedCost { value: Cost::ZERO, plan: Some(plan) });
    }
    if k == 1 {
        let entries = mu
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| (vec![i], w))
            .collect();
        let plan = TransportPlan {
            n_marginals: 1,
            support: mu.atoms().to_vec(),
            entries,
            certified: true,
        };
        return Ok(SolvedCost { value: Cost::ZERO, plan: Some(plan) });
    }

    let k_atoms = mu.len();
    let mut columns = Vec::new();
    let mut objective = Vec::new();
    for subset in subsets_up_to(k_atoms, k) {
        if subset.len() != k {
            continue;
        }
        let pts: Vec<Point> = subset.iter().map(|&i| mu.atoms()[i].clone()).collect();
        match interaction_cost(&pts, kernel)? {
            Cost::Finite(c) => {
                columns.push(subset);
                objective.push(c);
            }
            Cost::Infinite => {}
        }
    }
    if columns.is_empty() {
        return Ok(SolvedCost { value: Cost::Infinite, plan: None });
    }
    let mut rows = vec![vec![0.0; columns.len()]; k_atoms];
    for (col, subset) in columns.iter().enumerate() {
        for &a in subset {
            rows[a][col] = 1.0 / k as f64;
        }
    }
    let lp = LinearProgram::new(
        Sense::Minimize,
        objective,
        rows,
        vec![RowSense::Eq; k_atoms],
        mu.weights().to_vec(),
    );
    let sol = lp::solve_with(&lp, cfg)?;
    match sol.status {
        LpStatus::Optimal => {
            let mut entries = BTreeMap::new();
            for (col, subset) in columns.iter().enumerate() {
                let mass = sol.primal[col];
                if mass > 1e-12 {
                    entries.insert(subset.clone(), mass);
                }
            }
            let plan =
                TransportPlan { n_marginals: k, support: mu.atoms().to_vec(), entries, certified: true };
            Ok(SolvedCost { value: Cost::Finite(sol.objective.max(0.0)), plan: Some(plan) })
        }
        LpStatus::Infeasible => Ok(SolvedCost { value: Cost::Infinite, plan: None }),
        other => Err(TransportError::SolverFailure(other)),
    }
}

/// The relaxed cost recomputed through the exact rational enumeration path.
/// Same program, independent solution route; used as a test oracle.
pub fn brute_force_cost(
    rho: &DiscreteMeasure,
    n: usize,
    kernel: &Kernel,
) -> Result<Cost, TransportError> {
    if n < 2 {
        return Err(TransportError::BadMarginals { min: 2, got: n });
    }
    let states = (rho.len() + 1) as f64;
    if states.powi(n as i32) > 1e6 {
        return Err(TransportError::TooLarge(format!("({} + 1)^{} > 1e6", rho.len(), n)));
    }
    let built = build_relaxed_lp(rho, n, kernel)?;
    match lp::solve_enumerated(&built.lp)? {
        lp::ExactResult::Optimal { value, .. } => Ok(Cost::Finite(value.max(0.0))),
        lp::ExactResult::Infeasible => Ok(Cost::Infinite),
    }
}

/// The decomposition of a measure into interaction layers extracted from a
/// plan: layer `k` collects the strata of the plan with exactly `k` finite
/// points, projected back to the base space.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub n_marginals: usize,
    /// `layers[k-1]` is the layer with `k` interacting points.
    pub layers: Vec<DiscreteMeasure>,
    /// Partial cost of each layer, computed by its own transport solve.
    pub layer_costs: Vec<f64>,
    /// True when the plan was certified optimal and the layer identities hold.
    pub certified: bool,
}

impl Decomposition {
    pub fn mass_sum(&self) -> f64 {
        self.layers.iter().map(DiscreteMeasure::total_mass).sum()
    }

    pub fn cost_sum(&self) -> f64 {
        self.layer_costs.iter().sum()
    }

    /// Weight that the combination `Σ (k/N) ρ_k` puts on `point`.
    pub fn combined_weight_at(&self, point: &Point, tol: f64) -> f64 {
        let n = self.n_marginals as f64;
        self.layers
            .iter()
            .enumerate()
            .map(|(i, layer)| {
                let k = (i + 1) as f64;
                let w: f64 = layer
                    .atoms()
                    .iter()
                    .zip(layer.weights())
                    .filter(|(a, _)| a.distance(point).is_some_and(|d| d <= tol))
                    .map(|(_, &w)| w)
                    .sum();
                k / n * w
            })
            .sum()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let layers: Vec<serde_json::Value> = self
            .layers
            .iter()
            .zip(&self.layer_costs)
            .enumerate()
            .map(|(i, (layer, &cost))| {
                serde_json::json!({
                    "k": i + 1,
                    "measure": layer.to_json_value(),
                    "mass": layer.total_mass(),
                    "cost": cost,
                })
            })
            .collect();
        serde_json::json!({
            "n_marginals": self.n_marginals,
            "layers": layers,
            "mass_sum": self.mass_sum(),
            "cost_sum": self.cost_sum(),
            "certified": self.certified,
        })
    }
}

/// Splits an optimal compactified plan into its interaction layers.
///
/// Layer `k` receives, from every multiset with exactly `k` finite points,
/// mass `m/k` at each of those points; this is the projection of the plan
/// restricted to the `k`-finite stratum, scaled so that `Σ (k/N) ρ_k = ρ`.
pub fn stratify(
    rho: &DiscreteMeasure,
    plan: &TransportPlan,
    kernel: &Kernel,
) -> Result<Decomposition, TransportError> {
    stratify_with(rho, plan, kernel, &SimplexConfig::default())
}

pub fn stratify_with(
    rho: &DiscreteMeasure,
    plan: &TransportPlan,
    kernel: &Kernel,
    cfg: &SimplexConfig,
) -> Result<Decomposition, TransportError> {
    let n = plan.n_marginals;
    if plan.support.len() != rho.len() {
        return Err(TransportError::PlanMismatch(format!(
            "plan has {} support points, measure has {} atoms",
            plan.support.len(),
            rho.len()
        )));
    }
    for (i, (p, a)) in plan.support.iter().zip(rho.atoms()).enumerate() {
        if !p.distance(a).is_some_and(|d| d <= 1e-9) {
            return Err(TransportError::PlanMismatch(format!(
                "support point {i} differs from atom {i}"
            )));
        }
    }
    let marginal = plan.finite_marginal();
    for (i, (&m, &w)) in marginal.iter().zip(rho.weights()).enumerate() {
        if (m - w).abs() > 1e-6 {
            return Err(TransportError::PlanMismatch(format!(
                "marginal at atom {i} is {m}, measure weight is {w}"
            )));
        }
    }

    let mut layer_weights = vec![vec![0.0f64; rho.len()]; n];
    for (key, &mass) in &plan.entries {
        let finite: Vec<usize> = key.iter().copied().filter(|&i| i != OMEGA_INDEX).collect();
        let k = finite.len();
        if k == 0 {
            continue;
        }
        for idx in finite {
            layer_weights[k - 1][idx] += mass / k as f64;
        }
    }

    let mut layers = Vec::with_capacity(n);
    let mut layer_costs = Vec::with_capacity(n);
    for weights in &layer_weights {
        let mut atoms = Vec::new();
        let mut w = Vec::new();
        for (i, &wi) in weights.iter().enumerate() {
            if wi > 0.0 {
                atoms.push(rho.atoms()[i].clone());
                w.push(wi);
            }
        }
        layers.push(DiscreteMeasure::new(rho.dim(), atoms, w)?);
    }
    for (i, layer) in layers.iter().enumerate() {
        let k = i + 1;
        let solved = partial_cost_with(layer, k, kernel, cfg)?;
        let value = solved.value.finite().ok_or_else(|| {
            TransportError::PlanMismatch(format!("layer {k} has infinite partial cost"))
        })?;
        layer_costs.push(value);
    }

    // Exact-index reconstruction check: Σ (k/N) ρ_k must give back ρ.
    for (i, &w) in rho.weights().iter().enumerate() {
        let combined: f64 = layer_weights
            .iter()
            .enumerate()
            .map(|(kk, lw)| (kk + 1) as f64 / n as f64 * lw[i])
            .sum();
        if (combined - w).abs() > 1e-9 {
            return Err(TransportError::PlanMismatch(format!(
                "layer combination misses atom {i} by {:.3e}",
                (combined - w).abs()
            )));
        }
    }

    let mass_sum: f64 = layers.iter().map(DiscreteMeasure::total_mass).sum();
    let plan_cost = plan
        .cost(kernel)?
        .finite()
        .ok_or_else(|| TransportError::PlanMismatch("plan carries infinite cost".to_string()))?;
    let cost_sum: f64 = layer_costs.iter().sum();
    // The mass identity Σ ‖ρ_k‖ = 1 is attainable only when N‖ρ‖ ≥ 1; below
    // that every admissible decomposition has Σ ‖ρ_k‖ = N‖ρ‖.
    let expected_mass = (n as f64 * rho.total_mass()).min(1.0);
    let certified = plan.certified
        && (cost_sum - plan_cost).abs() <= 1e-7 * (1.0 + plan_cost.abs())
        && (mass_sum - expected_mass).abs() <= 1e-8;

    Ok(Decomposition { n_marginals: n, layers, layer_costs, certified })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel() -> Kernel {
        Kernel::coulomb()
    }

    fn measure(dim: usize, coords: &[&[f64]], weights: &[f64]) -> DiscreteMeasure {
        let atoms = coords.iter().map(|c| Point::Coords(c.to_vec())).collect();
        DiscreteMeasure::new(dim, atoms, weights.to_vec()).unwrap()
    }

    /// Three pairwise unit-distance points in R^3.
    fn unit_triangle(weights: &[f64]) -> DiscreteMeasure {
        measure(
            3,
            &[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.5, 3f64.sqrt() / 2.0, 0.0]],
            weights,
        )
    }

    #[test]
    fn partial_cost_two_atoms() {
        let mu = measure(1, &[&[0.0], &[1.0]], &[0.5, 0.5]);
        let out = partial_cost(&mu, 2, &kernel()).unwrap();
        assert!((out.value.finite().unwrap() - 1.0).abs() < 1e-9);
        let plan = out.plan.unwrap();
        assert_eq!(plan.entries.len(), 1);
        assert!((plan.entries[&vec![0, 1]] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partial_cost_single_atom_is_infinite() {
        let mu = measure(1, &[&[0.0]], &[0.4]);
        let out = partial_cost(&mu, 2, &kernel()).unwrap();
        assert_eq!(out.value, Cost::Infinite);
        assert!(out.plan.is_none());
    }

    #[test]
    fn partial_cost_k1_is_zero() {
        let mu = measure(1, &[&[0.0], &[2.0]], &[0.25, 0.5]);
        let out = partial_cost(&mu, 1, &kernel()).unwrap();
        assert_eq!(out.value, Cost::ZERO);
        assert!((out.plan.unwrap().total_mass() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn relaxed_cost_triangle_full_mass() {
        let rho = unit_triangle(&[1.0 / 3.0; 3]);
        let out = relaxed_cost(&rho, 3, &kernel()).unwrap();
        assert!((out.value.finite().unwrap() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn relaxed_cost_triangle_third_mass_is_zero() {
        let rho = unit_triangle(&[1.0 / 9.0; 3]);
        let out = relaxed_cost(&rho, 3, &kernel()).unwrap();
        assert!(out.value.finite().unwrap().abs() < 1e-9);
    }

    #[test]
    fn relaxed_cost_triangle_half_mass() {
        let rho = unit_triangle(&[1.0 / 6.0; 3]);
        let out = relaxed_cost(&rho, 3, &kernel()).unwrap();
        assert!((out.value.finite().unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn relaxed_cost_of_the_zero_measure() {
        let rho = DiscreteMeasure::empty(2);
        let out = relaxed_cost(&rho, 3, &kernel()).unwrap();
        assert_eq!(out.value, Cost::ZERO);
        let plan = out.plan.unwrap();
        assert!((plan.total_mass() - 1.0).abs() < 1e-12);
        assert!((plan.omega_marginal() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relaxed_cost_forced_self_interaction() {
        let rho = measure(2, &[&[0.0, 0.0]], &[1.0]);
        let out = relaxed_cost(&rho, 2, &kernel()).unwrap();
        assert_eq!(out.value, Cost::Infinite);
    }

    #[test]
    fn brute_force_pair() {
        for dist in [0.5, 1.0, 4.0] {
            let rho = measure(1, &[&[0.0], &[dist]], &[0.5, 0.5]);
            let v = brute_force_cost(&rho, 2, &kernel()).unwrap();
            assert!((v.finite().unwrap() - 1.0 / dist).abs() < 1e-10);
        }
    }

    #[test]
    fn brute_force_matches_simplex() {
        let rho = unit_triangle(&[0.2, 0.15, 0.3]);
        let fast = relaxed_cost(&rho, 3, &kernel()).unwrap();
        let slow = brute_force_cost(&rho, 3, &kernel()).unwrap();
        assert!((fast.value.finite().unwrap() - slow.finite().unwrap()).abs() < 1e-8);
    }

    #[test]
    fn brute_force_zero_below_threshold() {
        let rho = measure(1, &[&[0.0], &[1.0], &[2.0]], &[0.1, 0.1, 0.1]);
        let v = brute_force_cost(&rho, 3, &kernel()).unwrap();
        assert!(v.finite().unwrap().abs() < 1e-10);
    }

    #[test]
    fn stratify_full_mass_two_marginals() {
        let rho = measure(1, &[&[0.0], &[1.0]], &[0.5, 0.5]);
        let out = relaxed_cost(&rho, 2, &kernel()).unwrap();
        let decomp = stratify(&rho, &out.plan.unwrap(), &kernel()).unwrap();
        assert!(decomp.certified);
        assert!(decomp.layers[0].is_empty());
        assert!((decomp.layers[1].total_mass() - 1.0).abs() < 1e-9);
        for (a, &w) in rho.atoms().iter().zip(rho.weights()) {
            let got = decomp.combined_weight_at(a, 1e-9);
            assert!((got - w).abs() < 1e-9);
        }
    }

    #[test]
    fn stratify_threshold_mass_sits_in_layer_one() {
        let rho = unit_triangle(&[1.0 / 9.0; 3]);
        let out = relaxed_cost(&rho, 3, &kernel()).unwrap();
        let decomp = stratify(&rho, &out.plan.unwrap(), &kernel()).unwrap();
        assert!(decomp.certified);
        assert!((decomp.layers[0].total_mass() - 1.0).abs() < 1e-8);
        assert!(decomp.cost_sum().abs() < 1e-9);
        for (a, &w) in rho.atoms().iter().zip(rho.weights()) {
            let got = decomp.combined_weight_at(a, 1e-9);
            assert!((got - w).abs() < 1e-9, "got {got} want {w}");
        }
    }

    #[test]
    fn stratify_flags_non_optimal_plans() {
        // A badly paired plan: marginals match, but re-pairing the top layer
        // is strictly cheaper, so the decomposition is not certified.
        let rho = measure(1, &[&[0.0], &[1.0], &[1.5], &[10.0]], &[0.2; 4]);
        let mut entries = BTreeMap::new();
        entries.insert(vec![0, 1], 0.4);
        entries.insert(vec![2, 3], 0.4);
        entries.insert(vec![OMEGA_INDEX, OMEGA_INDEX], 0.2);
        let plan = TransportPlan {
            n_marginals: 2,
            support: rho.atoms().to_vec(),
            entries,
            certified: false,
        };
        plan.validate(&kernel()).unwrap();
        let decomp = stratify(&rho, &plan, &kernel()).unwrap();
        assert!(!decomp.certified);
        // the restriction is still a valid decomposition of ρ
        for (a, &w) in rho.atoms().iter().zip(rho.weights()) {
            assert!((decomp.combined_weight_at(a, 1e-9) - w).abs() < 1e-9);
        }
        // and its layer costs strictly undercut the plan's own cost
        let plan_cost = plan.cost(&kernel()).unwrap().finite().unwrap();
        assert!(decomp.cost_sum() < plan_cost - 1e-3);
    }

    #[test]
    fn stratify_mixed_strata() {
        let rho = unit_triangle(&[1.0 / 6.0; 3]);
        let out = relaxed_cost(&rho, 3, &kernel()).unwrap();
        let value = out.value.finite().unwrap();
        let decomp = stratify(&rho, &out.plan.unwrap(), &kernel()).unwrap();
        assert!(decomp.certified);
        assert!((decomp.mass_sum() - 1.0).abs() < 1e-8);
        assert!((decomp.cost_sum() - value).abs() < 1e-7);
    }
}
