//! Relaxed multi-marginal optimal transport with repulsive pairwise costs.
//!
//! The crate solves the discrete relaxed transport problem on sub-probability
//! measures by linear programming on a compactified state space, verifies the
//! answer against an independently constructed dual program, extracts the
//! stratified decomposition of an optimal plan into interaction layers, builds
//! Lipschitz dual potentials on grids by a fixed-point regularization, and
//! computes the quantized minimal mass of minimizers under an external
//! potential.

pub mod cost;
pub mod dual;
pub mod lp;
mod maxima;
pub mod measures;
pub mod potential;
pub mod primal;
pub mod quantize;

pub use cost::{interaction_cost, pair_cost, Cost, Kernel};
pub use dual::{DualPotential, OptimalityReport};
pub use lp::{LinearProgram, LpSolution, LpStatus, SimplexConfig};
pub use measures::{compactify, CompactifiedMeasure, DiscreteMeasure, Point};
pub use potential::{GridFunction, GridSpec};
pub use primal::{Decomposition, TransportPlan};
pub use quantize::QuantizationReport;

#[cfg(test)]
mod thread_safety {
    //! Measures, kernels and solver outputs are immutable after construction
    //! and shared freely across workers.
    use super::*;

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn shared_types_are_send_and_sync() {
        assert_send_sync::<Kernel>();
        assert_send_sync::<DiscreteMeasure>();
        assert_send_sync::<CompactifiedMeasure>();
        assert_send_sync::<TransportPlan>();
        assert_send_sync::<Decomposition>();
        assert_send_sync::<DualPotential>();
        assert_send_sync::<GridFunction>();
        assert_send_sync::<QuantizationReport>();
        assert_send_sync::<LinearProgram>();
        assert_send_sync::<LpSolution>();
    }
}
