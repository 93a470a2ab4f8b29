//! Discrete sub-probability measures on `R^d` and their compactification.
//!
//! A [`DiscreteMeasure`] is a finite family of distinct atoms with nonnegative
//! weights summing to at most one. Mass that is "missing" from a sub-probability
//! is interpreted as sitting at a distinguished point `ω` at infinity;
//! [`compactify`] makes that explicit by producing a probability measure on
//! `R^d ∪ {ω}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum Euclidean distance between two atoms of the same measure.
/// Closer pairs are merged at construction time (repulsive interaction
/// costs blow up as atoms collide, so near-duplicates carry no information).
pub const SEPARATION_TOL: f64 = 1e-9;

/// Slack allowed on the total-mass-at-most-one constraint.
pub const MASS_SLACK: f64 = 1e-12;

/// A location in `R^d`, or the point `ω` at infinity used to compactify the space.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Coords(Vec<f64>),
    Omega,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point::Coords(coords)
    }

    pub fn is_omega(&self) -> bool {
        matches!(self, Point::Omega)
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            Point::Omega => None,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.coords().map(<[f64]>::len)
    }

    /// Euclidean distance between two finite points of equal dimension.
    pub fn distance(&self, other: &Point) -> Option<f64> {
        match (self.coords(), other.coords()) {
            (Some(a), Some(b)) if a.len() == b.len() => {
                Some(euclidean(a, b))
            }
            _ => None,
        }
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("dim must be at least 1")]
    ZeroDimension,
    #[error("atoms[{index}] has {got} coordinates, expected {expected}")]
    DimensionMismatch { index: usize, got: usize, expected: usize },
    #[error("atoms[{index}] has a non-finite coordinate")]
    NonFiniteCoordinate { index: usize },
    #[error("atoms[{index}] is the point at infinity; atoms must be finite")]
    OmegaAtom { index: usize },
    #[error("weights[{index}] = {value} is negative or non-finite")]
    BadWeight { index: usize, value: f64 },
    #[error("atoms and weights have different lengths ({atoms} vs {weights})")]
    LengthMismatch { atoms: usize, weights: usize },
    #[error("total mass {total} exceeds 1 beyond the {MASS_SLACK} slack")]
    MassExceedsOne { total: f64 },
    #[error("operation requires positive total mass")]
    ZeroMass,
}

/// A nonnegative measure on `R^d` with finitely many atoms and total mass ≤ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Point>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl DiscreteMeasure {
    /// Builds a measure, validating all invariants. Atoms closer than
    /// [`SEPARATION_TOL`] are merged into the earlier atom (their weights add)
    /// and a warning is logged. Total mass may exceed 1 by at most
    /// [`MASS_SLACK`]; anything beyond fails.
    pub fn new(dim: usize, atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        if dim == 0 {
            return Err(MeasureError::ZeroDimension);
        }
        if atoms.len() != weights.len() {
            return Err(MeasureError::LengthMismatch { atoms: atoms.len(), weights: weights.len() });
        }
        for (index, a) in atoms.iter().enumerate() {
            let c = a.coords().ok_or(MeasureError::OmegaAtom { index })?;
            if c.len() != dim {
                return Err(MeasureError::DimensionMismatch { index, got: c.len(), expected: dim });
            }
            if !c.iter().all(|x| x.is_finite()) {
                return Err(MeasureError::NonFiniteCoordinate { index });
            }
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(MeasureError::BadWeight { index, value: w });
            }
        }

        // Merge near-coincident atoms into the first occurrence.
        let mut kept_atoms: Vec<Point> = Vec::with_capacity(atoms.len());
        let mut kept_weights: Vec<f64> = Vec::with_capacity(weights.len());
        let mut merged = 0usize;
        for (a, w) in atoms.into_iter().zip(weights) {
            let near = kept_atoms
                .iter()
                .position(|b| a.distance(b).map_or(false, |d| d <= SEPARATION_TOL));
            match near {
                Some(i) => {
                    kept_weights[i] += w;
                    merged += 1;
                }
                None => {
                    kept_atoms.push(a);
                    kept_weights.push(w);
                }
            }
        }
        if merged > 0 {
            log::warn!("merged {merged} atom(s) closer than {SEPARATION_TOL} to an earlier atom");
        }

        let total_mass: f64 = kept_weights.iter().sum();
        if total_mass > 1.0 + MASS_SLACK {
            return Err(MeasureError::MassExceedsOne { total: total_mass });
        }
        Ok(DiscreteMeasure { dim, atoms: kept_atoms, weights: kept_weights, total_mass })
    }

    /// The zero measure on `R^dim`.
    pub fn empty(dim: usize) -> Self {
        DiscreteMeasure { dim, atoms: Vec::new(), weights: Vec::new(), total_mass: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass - 1.0).abs() <= MASS_SLACK
    }

    /// Same atoms with every weight multiplied by `factor ≥ 0`.
    pub fn scale(&self, factor: f64) -> Result<Self, MeasureError> {
        let weights = self.weights.iter().map(|w| w * factor).collect();
        DiscreteMeasure::new(self.dim, self.atoms.clone(), weights)
    }

    /// Largest weight carried by a single atom (0 for the zero measure).
    pub fn concentration(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Variance (trace of the covariance matrix) of the normalized measure.
    pub fn variance(&self) -> Result<f64, MeasureError> {
        if self.total_mass <= 0.0 {
            return Err(MeasureError::ZeroMass);
        }
        let mut mean = vec![0.0; self.dim];
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            for (m, x) in mean.iter_mut().zip(a.coords().unwrap()) {
                *m += w * x;
            }
        }
        for m in &mut mean {
            *m /= self.total_mass;
        }
        let mut var = 0.0;
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            let d2: f64 = a
                .coords()
                .unwrap()
                .iter()
                .zip(&mean)
                .map(|(x, m)| (x - m) * (x - m))
                .sum();
            var += w * d2;
        }
        Ok(var / self.total_mass)
    }

    pub fn from_json_str(s: &str) -> Result<Self, LoadError> {
        let dto: MeasureJson = serde_json::from_str(s)?;
        let atoms = dto.atoms.into_iter().map(Point::Coords).collect();
        Ok(DiscreteMeasure::new(dto.dim, atoms, dto.weights)?)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let atoms: Vec<Vec<f64>> = self
            .atoms
            .iter()
            .map(|a| a.coords().unwrap().to_vec())
            .collect();
        serde_json::json!({ "dim": self.dim, "atoms": atoms, "weights": self.weights })
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    dim: usize,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// A sub-probability viewed as a probability on `R^d ∪ {ω}`: the missing mass
/// `1 − ‖ρ‖` is assigned to the point at infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactifiedMeasure {
    base: DiscreteMeasure,
    omega_mass: f64,
}

impl CompactifiedMeasure {
    pub fn base(&self) -> &DiscreteMeasure {
        &self.base
    }

    pub fn omega_mass(&self) -> f64 {
        self.omega_mass
    }

    /// Drops the mass at `ω`, recovering the original measure unchanged.
    pub fn into_base(self) -> DiscreteMeasure {
        self.base
    }
}

/// Embeds a sub-probability into the compactified space by placing its mass
/// defect at `ω`. Never fails: the type invariant guarantees total mass ≤ 1.
pub fn compactify(rho: &DiscreteMeasure) -> CompactifiedMeasure {
    let omega_mass = (1.0 - rho.total_mass()).max(0.0);
    CompactifiedMeasure { base: rho.clone(), omega_mass }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coords: &[f64]) -> Point {
        Point::Coords(coords.to_vec())
    }

    fn measure1d(positions: &[f64], weights: &[f64]) -> DiscreteMeasure {
        let atoms = positions.iter().map(|&x| p(&[x])).collect();
        DiscreteMeasure::new(1, atoms, weights.to_vec()).unwrap()
    }

    #[test]
    fn compactify_full_mass() {
        let rho = measure1d(&[0.0, 1.0], &[0.5, 0.5]);
        assert_eq!(compactify(&rho).omega_mass(), 0.0);
    }

    #[test]
    fn compactify_partial_and_empty() {
        let rho = measure1d(&[0.0], &[0.3]);
        assert!((compactify(&rho).omega_mass() - 0.7).abs() < 1e-15);
        let zero = DiscreteMeasure::empty(2);
        assert_eq!(compactify(&zero).omega_mass(), 1.0);
    }

    #[test]
    fn compactify_round_trips_bit_exactly() {
        let rho = measure1d(&[0.25, 3.5, -1.0], &[0.1, 0.2, 0.05]);
        let back = compactify(&rho).into_base();
        assert_eq!(back, rho);
    }

    #[test]
    fn concentration_examples() {
        assert_eq!(measure1d(&[0.0, 1.0], &[0.5, 0.3]).concentration(), 0.5);
        assert_eq!(DiscreteMeasure::empty(1).concentration(), 0.0);
        let thirds = measure1d(&[0.0, 1.0, 2.0], &[1.0 / 3.0; 3]);
        assert_eq!(thirds.concentration(), 1.0 / 3.0);
        assert!(thirds.concentration() <= thirds.total_mass());
    }

    #[test]
    fn variance_examples() {
        let rho = measure1d(&[0.0, 1.0], &[0.5, 0.5]);
        assert!((rho.variance().unwrap() - 0.25).abs() < 1e-15);
        let one = measure1d(&[4.0], &[1.0]);
        assert_eq!(one.variance().unwrap(), 0.0);
        let sym = measure1d(&[-1.0, 1.0], &[0.5, 0.5]);
        assert!((sym.variance().unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            DiscreteMeasure::empty(1).variance(),
            Err(MeasureError::ZeroMass)
        ));
    }

    #[test]
    fn close_atoms_merge() {
        let rho = measure1d(&[0.0, 1e-10, 1.0], &[0.1, 0.2, 0.3]);
        assert_eq!(rho.len(), 2);
        assert!((rho.weights()[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn mass_slack_is_enforced() {
        assert!(measure1d(&[0.0], &[1.0 + 1e-13]).total_mass() > 1.0);
        let atoms = vec![p(&[0.0])];
        assert!(matches!(
            DiscreteMeasure::new(1, atoms, vec![1.0 + 1e-9]),
            Err(MeasureError::MassExceedsOne { .. })
        ));
    }

    #[test]
    fn tiny_weights_are_kept() {
        let rho = measure1d(&[0.0, 1.0], &[1e-16, 0.5]);
        assert_eq!(rho.len(), 2);
        assert_eq!(rho.weights()[0], 1e-16);
    }

    #[test]
    fn loader_reports_first_violation() {
        let err = DiscreteMeasure::from_json_str(
            r#"{"dim": 2, "atoms": [[0.0, 0.0], [1.0]], "weights": [0.1, 0.1]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("atoms[1]"));
        let err = DiscreteMeasure::from_json_str(
            r#"{"dim": 1, "atoms": [[0.0], [1.0]], "weights": [0.1, -0.1]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("weights[1]"));
    }
}
