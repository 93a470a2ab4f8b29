//! Minimization of `C̄(ρ) − ∫V dρ` over sub-probabilities and the mass
//! quantization of its minimizers.
//!
//! Over a discretized domain the problem linearizes over transport plans, so
//! the minimum equals `−M_N(V)` and is attained by spreading mass `1/N` on
//! each point of a best configuration. The minimal mass over all minimizers
//! is `k/N` where `k` is the last strict rise of the excess ladder
//! `M_1(V/N) ≤ M_2(2V/N) ≤ … ≤ M_N(V)`; sweeping a charge parameter moves
//! that index and the optimal mass jumps through the fractions `k/N`.

use crate::cost::{pair_cost, Cost, CostError, Kernel};
use crate::dual::DualError;
use crate::maxima::{best_configuration, BestConfig};
use crate::measures::{DiscreteMeasure, MeasureError, Point};
use crate::potential::GridFunction;
use crate::primal::{relaxed_cost, TransportError};
use num_rational::Ratio;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("the bound needs sup V > 0, got {0}")]
    NonpositiveSupremum(f64),
    #[error("the bound needs a positive support radius, got {0}")]
    NonpositiveRadius(f64),
    #[error("charge grid must be sorted ascending and positive")]
    BadChargeGrid,
    #[error("marginal count must be at least 2, got {0}")]
    BadMarginals(usize),
    #[error("witness cross-check failed: transport value {transport}, excess value {excess}")]
    WitnessMismatch { transport: f64, excess: f64 },
    #[error("optimal mass decreased along the sweep at Z = {0} (two marginals)")]
    MonotonicityViolated(f64),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Pairwise interaction of the sampled domain, tabulated when small.
struct SupportCosts<'a> {
    points: &'a [Point],
    kernel: &'a Kernel,
    table: Option<Vec<f64>>,
}

impl<'a> SupportCosts<'a> {
    fn new(points: &'a [Point], kernel: &'a Kernel) -> Result<Self, QuantizeError> {
        let n = points.len();
        let table = if n <= 1500 {
            let mut t = vec![0.0f64; n * n];
            for i in 0..n {
                t[i * n + i] = f64::INFINITY;
                for j in (i + 1)..n {
                    let w = match pair_cost(&points[i], &points[j], kernel)? {
                        Cost::Finite(v) => v,
                        Cost::Infinite => f64::INFINITY,
                    };
                    t[i * n + j] = w;
                    t[j * n + i] = w;
                }
            }
            Some(t)
        } else {
            None
        };
        Ok(SupportCosts { points, kernel, table })
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        match &self.table {
            Some(t) => t[i * self.points.len() + j],
            None => match pair_cost(&self.points[i], &self.points[j], self.kernel) {
                Ok(Cost::Finite(v)) => v,
                _ => f64::INFINITY,
            },
        }
    }
}

fn validate_input(points: &[Point], values: &[f64], n: usize) -> Result<usize, QuantizeError> {
    if n < 2 {
        return Err(QuantizeError::BadMarginals(n));
    }
    if points.is_empty() {
        return Err(QuantizeError::InvalidPotential("empty domain".into()));
    }
    if points.len() != values.len() {
        return Err(QuantizeError::InvalidPotential(format!(
            "{} points but {} values",
            points.len(),
            values.len()
        )));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(QuantizeError::InvalidPotential("non-finite value".into()));
    }
    let dim = points[0]
        .dim()
        .ok_or_else(|| QuantizeError::InvalidPotential("ω in the domain".into()))?;
    for p in points {
        if p.dim() != Some(dim) {
            return Err(QuantizeError::InvalidPotential("mixed dimensions".into()));
        }
    }
    Ok(dim)
}

/// Excess ladder `ladder[k] = M_k(kV/N)` for `k = 0..=N`, with an attaining
/// configuration for each level. The gains `V_i/N` are shared by every level;
/// only the configuration size cap changes, which makes the ladder monotone
/// by construction.
fn excess_ladder(costs: &SupportCosts, values: &[f64], n: usize, z: f64) -> (Vec<f64>, Vec<BestConfig>) {
    let gains: Vec<f64> = values.iter().map(|v| z * v / n as f64).collect();
    let mut ladder = vec![0.0f64];
    let mut configs = vec![BestConfig { value: 0.0, indices: Vec::new() }];
    for k in 1..=n {
        let best = best_configuration(&gains, k, &|i, j| costs.get(i, j));
        ladder.push(best.value);
        configs.push(best);
    }
    (ladder, configs)
}

fn witness_measure(
    dim: usize,
    points: &[Point],
    config: &[usize],
    n: usize,
) -> Result<DiscreteMeasure, QuantizeError> {
    let atoms: Vec<Point> = config.iter().map(|&i| points[i].clone()).collect();
    let weights = vec![1.0 / n as f64; config.len()];
    Ok(DiscreteMeasure::new(dim, atoms, weights)?)
}

fn cross_check_witness(
    witness: &DiscreteMeasure,
    points: &[Point],
    values: &[f64],
    config: &[usize],
    expected: f64,
    n: usize,
    kernel: &Kernel,
    tol: f64,
) -> Result<f64, QuantizeError> {
    let solved = relaxed_cost(witness, n, kernel)?;
    let cost = solved.value.finite().ok_or(QuantizeError::WitnessMismatch {
        transport: f64::INFINITY,
        excess: expected,
    })?;
    let _ = points;
    let integral: f64 = config.iter().map(|&i| values[i] / n as f64).sum();
    let achieved = cost - integral;
    if (achieved - expected).abs() > tol * (1.0 + expected.abs()) {
        return Err(QuantizeError::WitnessMismatch { transport: achieved, excess: expected });
    }
    Ok(achieved)
}

/// Minimizes `C̄(ρ) − ∫V dρ` over sub-probabilities supported on the sampled
/// domain. The value is `−M_N(V)`; the witness spreads mass `1/N` over a best
/// configuration and is cross-checked against the transport solver.
pub fn minimize(
    points: &[Point],
    values: &[f64],
    n: usize,
    kernel: &Kernel,
) -> Result<(f64, DiscreteMeasure), QuantizeError> {
    let dim = validate_input(points, values, n)?;
    let costs = SupportCosts::new(points, kernel)?;
    let gains: Vec<f64> = values.iter().map(|v| v / n as f64).collect();
    let best = best_configuration(&gains, n, &|i, j| costs.get(i, j));
    let witness = witness_measure(dim, points, &best.indices, n)?;
    cross_check_witness(&witness, points, values, &best.indices, -best.value, n, kernel, 1e-7)?;
    Ok((-best.value, witness))
}

/// The quantization analysis of a potential: the excess ladder, the index of
/// its last strict rise, the minimal minimizer mass `k_N/N` (exact rational),
/// and a witness of exactly that mass.
#[derive(Debug, Clone)]
pub struct QuantizationReport {
    pub n: usize,
    pub k_n: usize,
    pub minimal_mass: Ratio<u64>,
    /// `ladder[k] = M_k(kV/N)`, `ladder[0] = 0`.
    pub ladder: Vec<f64>,
    /// `−M_N(V)`.
    pub min_value: f64,
    pub witness: DiscreteMeasure,
    /// `C̄(witness) − ∫V d(witness)`, cross-checked against `min_value`.
    pub witness_value: f64,
    pub strict_gap: bool,
    pub gap_tol: f64,
    /// Finite-radius surrogate for `limsup |x| V(x)`; set by grid callers.
    pub beta: Option<f64>,
    /// `N² / (4 R sup V)` for compactly supported positive parts.
    pub t_lower: Option<f64>,
}

impl QuantizationReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "k_n": self.k_n,
            "minimal_mass": { "num": *self.minimal_mass.numer(), "den": *self.minimal_mass.denom() },
            "ladder": self.ladder,
            "min_value": self.min_value,
            "witness": self.witness.to_json_value(),
            "witness_value": self.witness_value,
            "strict_gap": self.strict_gap,
            "gap_tol": self.gap_tol,
            "beta_surrogate": self.beta,
            "t_lower": self.t_lower,
        })
    }
}

fn last_strict_rise(ladder: &[f64], gap_tol: f64) -> usize {
    for k in (1..ladder.len()).rev() {
        if ladder[k] > ladder[k - 1] + gap_tol {
            return k;
        }
    }
    0
}

pub fn quantization_report(
    points: &[Point],
    values: &[f64],
    n: usize,
    kernel: &Kernel,
    gap_tol: f64,
) -> Result<QuantizationReport, QuantizeError> {
    let dim = validate_input(points, values, n)?;
    let costs = SupportCosts::new(points, kernel)?;
    let (ladder, configs) = excess_ladder(&costs, values, n, 1.0);
    let k_n = last_strict_rise(&ladder, gap_tol);

    let config = &configs[k_n].indices;
    let witness = witness_measure(dim, points, config, n)?;
    // A strict rise at k_n forces the attaining configuration to use exactly
    // k_n points, so the witness mass is k_n/N on the nose.
    debug_assert_eq!(config.len(), k_n);
    let witness_value = if k_n == 0 {
        0.0
    } else {
        cross_check_witness(&witness, points, values, config, -ladder[n], n, kernel, 1e-6)?
    };

    let sup_v = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t_lower = if sup_v > 0.0 {
        let radius = points
            .iter()
            .zip(values)
            .filter(|(_, &v)| v > 0.0)
            .map(|(p, _)| crate::measures::euclidean(p.coords().unwrap(), &vec![0.0; dim]))
            .fold(0.0f64, f64::max);
        (radius > 0.0).then(|| (n * n) as f64 / (4.0 * radius * sup_v))
    } else {
        None
    };

    Ok(QuantizationReport {
        n,
        k_n,
        minimal_mass: Ratio::new(k_n as u64, n as u64),
        min_value: -ladder[n],
        witness,
        witness_value,
        strict_gap: ladder[n] > ladder[n - 1] + gap_tol,
        ladder,
        gap_tol,
        beta: None,
        t_lower,
    })
}

/// Whether the top of the ladder rises strictly; when it does every minimizer
/// is a probability and a full-size attaining configuration is returned.
#[derive(Debug, Clone)]
pub struct StrictGap {
    pub strict: bool,
    pub attaining: Option<Vec<usize>>,
}

pub fn strict_gap(
    points: &[Point],
    values: &[f64],
    n: usize,
    kernel: &Kernel,
    gap_tol: f64,
) -> Result<StrictGap, QuantizeError> {
    validate_input(points, values, n)?;
    let costs = SupportCosts::new(points, kernel)?;
    let (ladder, configs) = excess_ladder(&costs, values, n, 1.0);
    let strict = ladder[n] > ladder[n - 1] + gap_tol;
    Ok(StrictGap { strict, attaining: strict.then(|| configs[n].indices.clone()) })
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub z: f64,
    pub k_n: usize,
    pub mass: Ratio<u64>,
    pub min_value: f64,
}

#[derive(Debug, Clone)]
pub struct ChargeSweep {
    pub points: Vec<SweepPoint>,
    /// Whether the optimal mass was nondecreasing in the charge. Guaranteed
    /// (and enforced) for two marginals; reported for more.
    pub monotone: bool,
}

impl ChargeSweep {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("z,k_n,mass,min_value\n");
        for p in &self.points {
            s.push_str(&format!(
                "{:.16e},{},{:.16e},{:.16e}\n",
                p.z,
                p.k_n,
                *p.mass.numer() as f64 / *p.mass.denom() as f64,
                p.min_value
            ));
        }
        s
    }
}

/// Quantization indices of the rescaled potentials `Z V` along a charge grid.
pub fn charge_sweep(
    points: &[Point],
    values: &[f64],
    n: usize,
    kernel: &Kernel,
    z_grid: &[f64],
    gap_tol: f64,
) -> Result<ChargeSweep, QuantizeError> {
    validate_input(points, values, n)?;
    if z_grid.is_empty() || z_grid.windows(2).any(|w| w[1] <= w[0]) || z_grid[0] < 0.0 {
        return Err(QuantizeError::BadChargeGrid);
    }
    let costs = SupportCosts::new(points, kernel)?;
    let mut out = Vec::with_capacity(z_grid.len());
    let mut monotone = true;
    let mut prev_k = 0usize;
    for (i, &z) in z_grid.iter().enumerate() {
        let (ladder, _) = excess_ladder(&costs, values, n, z);
        let k_n = last_strict_rise(&ladder, gap_tol);
        if i > 0 && k_n < prev_k {
            if n == 2 {
                return Err(QuantizeError::MonotonicityViolated(z));
            }
            monotone = false;
        }
        prev_k = k_n;
        out.push(SweepPoint {
            z,
            k_n,
            mass: Ratio::new(k_n as u64, n as u64),
            min_value: -ladder[n],
        });
    }
    Ok(ChargeSweep { points: out, monotone })
}

/// Charge threshold below which no probability minimizer can exist for a
/// potential with compact support: `t = N² / (4 R sup V)` where the support
/// of the positive part sits in the centered ball of radius `R`.
pub fn nonexistence_bound(sup_v: f64, r_support: f64, n: usize) -> Result<f64, QuantizeError> {
    if n < 2 {
        return Err(QuantizeError::BadMarginals(n));
    }
    if sup_v <= 0.0 {
        return Err(QuantizeError::NonpositiveSupremum(sup_v));
    }
    if r_support <= 0.0 {
        return Err(QuantizeError::NonpositiveRadius(r_support));
    }
    Ok((n * n) as f64 / (4.0 * r_support * sup_v))
}

/// Finite-radius surrogate of `limsup |x| V(x)`: the largest `|x| V(x)` over
/// nodes lying on the sampled radial shells. Never a claim about the true
/// limit superior, only about the sampled radii.
pub fn beta_estimate(gf: &GridFunction, sample_radii: &[f64]) -> f64 {
    let half_width = 0.75 * gf.grid.max_spacing();
    let mut best = 0.0f64;
    for &r in sample_radii {
        for i in 0..gf.grid.len() {
            let norm = crate::measures::euclidean(gf.grid.node(i), &vec![0.0; gf.grid.dim()]);
            if (norm - r).abs() <= half_width {
                best = best.max(norm * gf.values[i]);
            }
        }
    }
    best
}
