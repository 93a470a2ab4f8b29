//! Grid-based construction of Lipschitz dual potentials.
//!
//! A potential on a uniform box grid is regularized by the hat operator:
//! `φ̂(x) = φ(x) + N (M_{N−1}((N−1)φ/N) − [M_N φ](x))`, where `[M_N φ](x)` is
//! the excess profile with one point pinned at `x`. Averaging `φ` with `φ̂`
//! and repeating drives the excess gap `Δ_N` to zero while keeping the dual
//! objective nondecreasing, yielding an equi-Lipschitz optimal potential.
//!
//! The measure must live on grid nodes: the iteration needs `φ` and `φ̂` on a
//! common domain, and interpolation would break the exact excess ladder.

use crate::cost::{pair_cost_from_distance, Cost, Kernel};
use crate::dual::{dual_lp_with, positive_part, DualError};
use crate::lp::SimplexConfig;
use crate::maxima::best_configuration;
use crate::measures::{euclidean, DiscreteMeasure, Point};
use crate::primal::{relaxed_cost_with, TransportError};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("bad grid: {0}")]
    Grid(String),
    #[error("grids only go up to dimension 3, got {0}")]
    DimTooHigh(usize),
    #[error("the iteration requires total mass < 1, got {0} (use the dual solver for probabilities)")]
    MassNotBelowOne(f64),
    #[error("atom {0} does not sit on a grid node")]
    AtomOffGrid(usize),
    #[error("{0}")]
    Mismatch(String),
    #[error("per-step invariant violated: {0}")]
    InvariantViolated(String),
    #[error("truncation level {level} exceeds the value at infinity {at_infinity}")]
    BadTruncation { level: f64, at_infinity: f64 },
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Measure(#[from] crate::measures::MeasureError),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A uniform axis-aligned box grid in dimension ≤ 3, nodes in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    bounds: Vec<(f64, f64)>,
    shape: Vec<usize>,
    coords: Vec<f64>,
}

impl GridSpec {
    pub fn new(bounds: Vec<(f64, f64)>, shape: Vec<usize>) -> Result<Self, PotentialError> {
        let d = bounds.len();
        if d == 0 {
            return Err(PotentialError::Grid("empty bounds".into()));
        }
        if d > 3 {
            return Err(PotentialError::DimTooHigh(d));
        }
        if shape.len() != d {
            return Err(PotentialError::Grid("bounds and shape lengths differ".into()));
        }
        for (axis, (&(lo, hi), &n)) in bounds.iter().zip(&shape).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(PotentialError::Grid(format!("axis {axis} bounds [{lo}, {hi}]")));
            }
            if n < 2 {
                return Err(PotentialError::Grid(format!("axis {axis} needs at least 2 nodes")));
            }
        }
        let len: usize = shape.iter().product();
        let mut coords = Vec::with_capacity(len * d);
        let mut idx = vec![0usize; d];
        for _ in 0..len {
            for a in 0..d {
                let (lo, hi) = bounds[a];
                let t = idx[a] as f64 / (shape[a] - 1) as f64;
                coords.push(lo + t * (hi - lo));
            }
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(GridSpec { bounds, shape, coords })
    }

    /// Uniform 1-D grid.
    pub fn line(lo: f64, hi: f64, nodes: usize) -> Result<Self, PotentialError> {
        GridSpec::new(vec![(lo, hi)], vec![nodes])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        (hi - lo) / (self.shape[axis] - 1) as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    pub fn node_distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.node(i), self.node(j))
    }

    /// Index of the node within `tol` of `coords`, if any.
    pub fn index_of(&self, coords: &[f64], tol: f64) -> Option<usize> {
        if coords.len() != self.dim() {
            return None;
        }
        // Round to the nearest node and verify.
        let d = self.dim();
        let mut flat = 0usize;
        for a in 0..d {
            let (lo, _) = self.bounds[a];
            let t = (coords[a] - lo) / self.spacing(a);
            let k = t.round();
            if k < 0.0 || k as usize >= self.shape[a] {
                return None;
            }
            flat = flat * self.shape[a] + k as usize;
        }
        (euclidean(self.node(flat), coords) <= tol).then_some(flat)
    }

    /// Points view of the nodes, for interop with support-based routines.
    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|i| Point::Coords(self.node(i).to_vec())).collect()
    }

    /// Pairs of nodes adjacent along one axis, with their distance.
    pub fn neighbor_pairs(&self) -> Vec<(usize, usize, f64)> {
        let d = self.dim();
        let len = self.len();
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.shape[a + 1];
        }
        let mut out = Vec::new();
        for i in 0..len {
            let mut rest = i;
            for a in 0..d {
                let pos = rest / strides[a];
                rest %= strides[a];
                if pos + 1 < self.shape[a] {
                    out.push((i, i + strides[a], self.spacing(a)));
                }
            }
        }
        out
    }
}

/// Values of a potential on the nodes of a grid, plus its value at infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub value_at_infinity: f64,
}

impl GridFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>, value_at_infinity: f64) -> Result<Self, PotentialError> {
        if values.len() != grid.len() {
            return Err(PotentialError::Grid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) || !value_at_infinity.is_finite() {
            return Err(PotentialError::Grid("non-finite value".into()));
        }
        Ok(GridFunction { grid, values, value_at_infinity })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        let values = vec![value; grid.len()];
        GridFunction { grid, values, value_at_infinity: 0.0 }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn positive_part(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: positive_part(&self.values),
            value_at_infinity: self.value_at_infinity.max(0.0),
        }
    }

    /// Largest |Δvalue| / distance over axis-neighbor pairs.
    pub fn discrete_lipschitz(&self) -> f64 {
        self.grid
            .neighbor_pairs()
            .into_iter()
            .map(|(i, j, h)| (self.values[i] - self.values[j]).abs() / h)
            .fold(0.0, f64::max)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let bounds: Vec<[f64; 2]> = self.grid.bounds().iter().map(|&(lo, hi)| [lo, hi]).collect();
        serde_json::json!({
            "box": bounds,
            "shape": self.grid.shape(),
            "values": self.values,
            "value_at_infinity": self.value_at_infinity,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self, PotentialError> {
        #[derive(Deserialize)]
        struct Dto {
            #[serde(rename = "box")]
            bounds: Vec<[f64; 2]>,
            shape: Vec<usize>,
            values: Vec<f64>,
            #[serde(default)]
            value_at_infinity: f64,
        }
        let dto: Dto = serde_json::from_str(s)?;
        let grid = GridSpec::new(dto.bounds.iter().map(|b| (b[0], b[1])).collect(), dto.shape)?;
        GridFunction::new(grid, dto.values, dto.value_at_infinity)
    }
}

/// Pairwise node costs, tabulated when the grid is small enough.
struct NodeCosts<'a> {
    grid: &'a GridSpec,
    kernel: &'a Kernel,
    table: Option<Vec<f64>>,
}

impl<'a> NodeCosts<'a> {
    fn new(grid: &'a GridSpec, kernel: &'a Kernel) -> Self {
        let n = grid.len();
        let table = (n <= 1500).then(|| {
            let mut t = vec![0.0f64; n * n];
            for i in 0..n {
                t[i * n + i] = f64::INFINITY;
                for j in (i + 1)..n {
                    let w = cost_value(pair_cost_from_distance(grid.node_distance(i, j), kernel));
                    t[i * n + j] = w;
                    t[j * n + i] = w;
                }
            }
            t
        });
        NodeCosts { grid, kernel, table }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        match &self.table {
            Some(t) => t[i * self.grid.len() + j],
            None => cost_value(pair_cost_from_distance(self.grid.node_distance(i, j), self.kernel)),
        }
    }
}

fn cost_value(c: Cost) -> f64 {
    match c {
        Cost::Finite(v) => v,
        Cost::Infinite => f64::INFINITY,
    }
}

/// The k-point excess of a grid potential (nodes plus the point at infinity).
pub fn excess_on_grid(gf: &GridFunction, k: usize, kernel: &Kernel) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let costs = NodeCosts::new(&gf.grid, kernel);
    let gains: Vec<f64> = gf.values.iter().map(|v| v / k as f64).collect();
    best_configuration(&gains, k, &|i, j| costs.get(i, j)).value
}

/// The gap `Δ_N` of a grid potential.
pub fn excess_gap_on_grid(gf: &GridFunction, n: usize, kernel: &Kernel) -> f64 {
    let costs = NodeCosts::new(&gf.grid, kernel);
    let profile = profile_with(gf, n, kernel, &costs);
    top_excess(&profile) - profile.value_at_infinity
}

fn top_excess(profile: &GridFunction) -> f64 {
    profile.values.iter().copied().fold(0.0, f64::max)
}

/// The excess profile `[M_N φ](x)`: the best configuration value with one
/// point pinned at `x` and the other `N − 1` ranging over nodes and `ω`. Its
/// value at infinity is the excess of the scaled potential one level down,
/// which is also its limit.
pub fn excess_profile(gf: &GridFunction, n: usize, kernel: &Kernel) -> GridFunction {
    let costs = NodeCosts::new(&gf.grid, kernel);
    profile_with(gf, n, kernel, &costs)
}

fn profile_with(gf: &GridFunction, n: usize, _kernel: &Kernel, costs: &NodeCosts) -> GridFunction {
    let nf = n as f64;
    let nodes = gf.grid.len();
    let mut values = vec![0.0f64; nodes];
    let mut gains = vec![0.0f64; nodes];
    for x in 0..nodes {
        for i in 0..nodes {
            gains[i] = gf.values[i] / nf - costs.get(x, i);
        }
        let best = best_configuration(&gains, n - 1, &|i, j| costs.get(i, j));
        values[x] = gf.values[x] / nf + best.value;
    }
    // Value at infinity: the pinned point drops out.
    let below_gains: Vec<f64> = gf.values.iter().map(|v| v / nf).collect();
    let below = best_configuration(&below_gains, n - 1, &|i, j| costs.get(i, j)).value;
    GridFunction { grid: gf.grid.clone(), values, value_at_infinity: below }
}

/// The hat regularization `φ̂ = φ + N ([M_N φ](ω) − [M_N φ](·))`.
pub fn regularize(gf: &GridFunction, n: usize, kernel: &Kernel) -> GridFunction {
    let profile = excess_profile(gf, n, kernel);
    hat_from_profile(gf, &profile, n)
}

fn hat_from_profile(gf: &GridFunction, profile: &GridFunction, n: usize) -> GridFunction {
    let nf = n as f64;
    let values = gf
        .values
        .iter()
        .zip(&profile.values)
        .map(|(v, p)| v + nf * (profile.value_at_infinity - p))
        .collect();
    GridFunction { grid: gf.grid.clone(), values, value_at_infinity: gf.value_at_infinity }
}

/// The hat regularization through its infimum form,
/// `φ̂(x) = inf {N c(x, x_2..x_N) − Σ φ(x_i)} + N M_{N−1}((N−1)φ/N)`,
/// enumerated directly without pruning. Cross-check for [`regularize`].
pub fn regularize_direct(gf: &GridFunction, n: usize, kernel: &Kernel) -> GridFunction {
    let costs = NodeCosts::new(&gf.grid, kernel);
    let nf = n as f64;
    let nodes = gf.grid.len();
    let below_gains: Vec<f64> = gf.values.iter().map(|v| v / nf).collect();
    let below = best_configuration(&below_gains, n - 1, &|i, j| costs.get(i, j)).value;

    let mut values = Vec::with_capacity(nodes);
    for x in 0..nodes {
        let mut best = 0.0f64; // all companions at infinity
        let mut stack: Vec<usize> = Vec::new();
        inf_search(x, 0, n - 1, 0.0, &mut stack, &mut best, gf, &costs, nf);
        values.push(best + nf * below);
    }
    GridFunction { grid: gf.grid.clone(), values, value_at_infinity: gf.value_at_infinity }
}

#[allow(clippy::too_many_arguments)]
fn inf_search(
    x: usize,
    start: usize,
    slots: usize,
    value: f64,
    stack: &mut Vec<usize>,
    best: &mut f64,
    gf: &GridFunction,
    costs: &NodeCosts,
    nf: f64,
) {
    if value < *best {
        *best = value;
    }
    if slots == 0 {
        return;
    }
    for i in start..gf.grid.len() {
        if i == x {
            continue;
        }
        let mut add = nf * costs.get(x, i) - gf.values[i];
        for &j in stack.iter() {
            add += nf * costs.get(i, j);
        }
        if !add.is_finite() {
            continue;
        }
        stack.push(i);
        inf_search(x, i + 1, slots - 1, value + add, stack, best, gf, costs, nf);
        stack.pop();
    }
}

/// Lipschitz constant guaranteed by the hat operator for potentials bounded
/// by `r`: `16 (N−1) (1 + (N−1) r)² / (9 N)`.
pub fn lipschitz_bound(r: f64, n: usize) -> f64 {
    let nf = n as f64;
    16.0 * (nf - 1.0) * (1.0 + (nf - 1.0) * r).powi(2) / (9.0 * nf)
}

#[derive(Debug, Clone, Copy)]
pub struct IterationOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions { tol: 1e-6, max_iters: 500 }
    }
}

/// Per-iterate diagnostics: the dual objective, the excess gap, the sup of
/// the iterate, and the top excess.
#[derive(Debug, Clone, Copy)]
pub struct IterationStep {
    pub objective: f64,
    pub gap: f64,
    pub sup: f64,
    pub excess_top: f64,
}

#[derive(Debug, Clone)]
pub struct PotentialRun {
    /// Positive part of the final iterate.
    pub potential: GridFunction,
    pub steps: Vec<IterationStep>,
    pub converged: bool,
    /// `ε_n = Σ_{k ≥ n} Δ_N(u_k)`, computed after the run.
    pub remainders: Vec<f64>,
}

impl PotentialRun {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,objective,gap,sup,excess_top\n");
        for (i, step) in self.steps.iter().enumerate() {
            s.push_str(&format!(
                "{i},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                step.objective, step.gap, step.sup, step.excess_top
            ));
        }
        s
    }
}

/// Runs the averaged hat iteration `u_{n+1} = (1/N) û_n + (1 − 1/N) u_n`
/// from `phi0` until the excess gap falls below `opts.tol`, returning the
/// positive part of the final iterate and the full trace.
///
/// Each step asserts the exact discrete guarantees: the objective gain
/// `I(u_{n+1}) ≥ I(u_n) + (1 − ‖ρ‖) Δ(u_n)`, the excess hand-off
/// `M_N(u_{n+1}) = M_{N−1}((N−1)u_n/N)`, the pointwise bound
/// `u_{n+1} ≥ u_n − Δ(u_n)`, and the uniform bound `sup u_n ≤ N M_N(u_0)`.
pub fn iterate_potential(
    rho: &DiscreteMeasure,
    phi0: &GridFunction,
    n: usize,
    kernel: &Kernel,
    opts: &IterationOptions,
) -> Result<PotentialRun, PotentialError> {
    if rho.total_mass() >= 1.0 - 1e-12 {
        return Err(PotentialError::MassNotBelowOne(rho.total_mass()));
    }
    if phi0.value_at_infinity.abs() > 1e-12 {
        return Err(PotentialError::Mismatch(
            "initial potential must vanish at infinity".into(),
        ));
    }
    if !kernel.is_validated() {
        // The regularization estimates are only established for the default
        // kernel; other kernels run at the caller's risk.
        log::warn!(
            "kernel {:?} is user-supplied and unvalidated; the iteration guarantees assume 1/r",
            kernel.tag()
        );
    }
    let grid = &phi0.grid;
    let mut node_weights = vec![0.0f64; grid.len()];
    for (i, (a, &w)) in rho.atoms().iter().zip(rho.weights()).enumerate() {
        let idx = grid
            .index_of(a.coords().unwrap(), 1e-9)
            .ok_or(PotentialError::AtomOffGrid(i))?;
        node_weights[idx] += w;
    }
    let mass = rho.total_mass();
    let costs = NodeCosts::new(grid, kernel);

    let mut u = GridFunction {
        grid: grid.clone(),
        values: positive_part(&phi0.values),
        value_at_infinity: 0.0,
    };
    let mut steps: Vec<IterationStep> = Vec::new();
    let mut converged = false;
    let mut initial_top = f64::INFINITY;

    loop {
        let profile = profile_with(&u, n, kernel, &costs);
        let excess_top = top_excess(&profile);
        let gap = excess_top - profile.value_at_infinity;
        let integral: f64 =
            node_weights.iter().zip(&u.values).map(|(w, v)| w * v).sum();
        let objective = integral - excess_top;
        let sup = u.max_value().max(0.0);

        if steps.is_empty() {
            initial_top = excess_top;
        } else {
            let prev = steps.last().unwrap();
            let promised = prev.objective + (1.0 - mass) * prev.gap;
            if objective < promised - 1e-9 {
                return Err(PotentialError::InvariantViolated(format!(
                    "objective {objective} below promised {promised}"
                )));
            }
            // The new top excess must equal the previous lower excess.
            let expected = prev.excess_top - prev.gap;
            if (excess_top - expected).abs() > 1e-9 {
                return Err(PotentialError::InvariantViolated(format!(
                    "excess hand-off off by {:.3e}",
                    (excess_top - expected).abs()
                )));
            }
        }
        if sup > n as f64 * initial_top + 1e-9 {
            return Err(PotentialError::InvariantViolated(format!(
                "sup {sup} exceeds N times the initial excess {initial_top}"
            )));
        }

        steps.push(IterationStep { objective, gap, sup, excess_top });
        if gap <= opts.tol {
            converged = true;
            break;
        }
        if steps.len() > opts.max_iters {
            break;
        }

        // u ← u + ([M_N u](ω) − [M_N u]); pointwise this is ≥ u − Δ and ≥ 0.
        let mut next = Vec::with_capacity(u.values.len());
        for (i, (&v, &p)) in u.values.iter().zip(&profile.values).enumerate() {
            let nv = v + (profile.value_at_infinity - p);
            if nv < v - gap - 1e-9 {
                return Err(PotentialError::InvariantViolated(format!(
                    "pointwise drop of {:.3e} at node {i} exceeds the gap {gap}",
                    v - nv
                )));
            }
            next.push(nv.max(0.0));
        }
        u.values = next;
    }

    let mut remainders = vec![0.0f64; steps.len()];
    let mut acc = 0.0;
    for i in (0..steps.len()).rev() {
        acc += steps[i].gap;
        remainders[i] = acc;
    }

    Ok(PotentialRun { potential: u.positive_part(), steps, converged, remainders })
}

/// Default starting point: the optimal dual values on the support, extended
/// by zero to the grid and clamped to `[0, R]`, with `R` from the finite-cost
/// scaling bound `(C̄((1+δ)ρ) − (1+δ) C̄(ρ)) / (N δ)` at `δ = 0.1` when that
/// is computable (falling back to the largest dual value).
pub fn default_initial_potential(
    rho: &DiscreteMeasure,
    grid: &GridSpec,
    n: usize,
    kernel: &Kernel,
) -> Result<(GridFunction, f64), PotentialError> {
    let cfg = SimplexConfig::default();
    let solve = dual_lp_with(rho, n, kernel, &cfg)?;
    let potential = solve
        .potential
        .ok_or_else(|| PotentialError::Mismatch("dual program is unbounded (infinite cost)".into()))?;
    let phi_lp = positive_part(&potential.c0_values());
    let phi_max = phi_lp.iter().copied().fold(0.0, f64::max);

    let delta = 0.1;
    let mut bound = None;
    if rho.total_mass() * (1.0 + delta) <= 1.0 {
        let scaled = rho.scale(1.0 + delta)?;
        let c0 = relaxed_cost_with(rho, n, kernel, &cfg)?.value;
        let c1 = relaxed_cost_with(&scaled, n, kernel, &cfg)?.value;
        if let (Cost::Finite(c0), Cost::Finite(c1)) = (c0, c1) {
            bound = Some((c1 - (1.0 + delta) * c0) / (n as f64 * delta));
        }
    }
    let r = bound.unwrap_or(0.0).max(phi_max).max(1e-9);

    let mut values = vec![0.0f64; grid.len()];
    for (i, a) in rho.atoms().iter().enumerate() {
        let idx = grid
            .index_of(a.coords().unwrap(), 1e-9)
            .ok_or(PotentialError::AtomOffGrid(i))?;
        values[idx] = phi_lp[i].clamp(0.0, r);
    }
    Ok((GridFunction { grid: grid.clone(), values, value_at_infinity: 0.0 }, r))
}

/// Result of an admissibility scan of a dual variable `u` (values plus its
/// value at `ω`): the largest violation of
/// `(1/N) Σ u(x_i) ≤ c(x)` over size-N configurations of nodes and `ω`.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub max_violation: f64,
    pub checked: u64,
    pub exhaustive: bool,
}

pub fn check_admissible(
    u: &GridFunction,
    n: usize,
    kernel: &Kernel,
    sample_budget: u64,
) -> AdmissibilityReport {
    let nodes = u.grid.len();
    let costs = NodeCosts::new(&u.grid, kernel);
    let nf = n as f64;

    let mut total = 1.0f64;
    let mut pick = 1.0f64;
    for j in 1..=n.min(nodes) {
        pick = pick * (nodes - j + 1) as f64 / j as f64;
        total += pick;
    }

    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0u64;
    if total <= sample_budget as f64 {
        let mut stack = Vec::new();
        exhaustive_scan(u, n, &costs, 0, 0.0, 0.0, &mut stack, &mut worst, &mut checked, nf);
        AdmissibilityReport { max_violation: worst, checked, exhaustive: true }
    } else {
        let mut rng = StdRng::seed_from_u64(0x5EED_CAFE);
        for _ in 0..sample_budget {
            let j = rng.random_range(0..=n.min(nodes));
            let idx = rand::seq::index::sample(&mut rng, nodes, j);
            let mut sum = (n - j) as f64 * u.value_at_infinity;
            let mut cost = 0.0f64;
            let chosen: Vec<usize> = idx.into_iter().collect();
            for (a, &i) in chosen.iter().enumerate() {
                sum += u.values[i];
                for &k in &chosen[a + 1..] {
                    cost += costs.get(i, k);
                }
            }
            if cost.is_finite() {
                worst = worst.max(sum / nf - cost);
            }
            checked += 1;
        }
        AdmissibilityReport { max_violation: worst, checked, exhaustive: false }
    }
}

#[allow(clippy::too_many_arguments)]
fn exhaustive_scan(
    u: &GridFunction,
    n: usize,
    costs: &NodeCosts,
    start: usize,
    sum: f64,
    cost: f64,
    stack: &mut Vec<usize>,
    worst: &mut f64,
    checked: &mut u64,
    nf: f64,
) {
    let value = (sum + (n - stack.len()) as f64 * u.value_at_infinity) / nf - cost;
    *worst = worst.max(value);
    *checked += 1;
    if stack.len() == n {
        return;
    }
    for i in start..u.grid.len() {
        let mut added = 0.0;
        for &j in stack.iter() {
            added += costs.get(i, j);
        }
        if !added.is_finite() {
            continue;
        }
        stack.push(i);
        exhaustive_scan(u, n, costs, i + 1, sum + u.values[i], cost + added, stack, worst, checked, nf);
        stack.pop();
    }
}

/// Lifts the potential to `max(u, level)` pointwise. Admissibility is
/// preserved whenever `level` does not exceed the value at infinity.
pub fn truncate_at_infinity(u: &GridFunction, level: f64) -> Result<GridFunction, PotentialError> {
    if level > u.value_at_infinity + 1e-12 {
        return Err(PotentialError::BadTruncation { level, at_infinity: u.value_at_infinity });
    }
    Ok(GridFunction {
        grid: u.grid.clone(),
        values: u.values.iter().map(|v| v.max(level)).collect(),
        value_at_infinity: u.value_at_infinity.max(level),
    })
}
