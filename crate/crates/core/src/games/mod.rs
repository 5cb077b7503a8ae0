//! Best responses and Nash equilibria of the temporal (TPA) and spatial
//! (SPA) power allocation games, played on the large-system utilities.

mod spa;
mod tpa;
mod waterfill;

pub(crate) use spa::joint_update;
pub use spa::{
    solve_ne_spa, spa_deviation_gain, spa_utilities, SpaProfile, BUDGET_TOL, SPA_DEVIATION_STEP,
    SPA_DEVIATION_TOL, SPA_UNIQUENESS_TOL,
};
pub use tpa::{
    solve_ne_tpa, tpa_best_response, tpa_deviation_gain, TpaProfile, DEVIATION_STEP, DEVIATION_TOL,
    FLAT_TOL, UNIQUENESS_TOL,
};
pub use waterfill::waterfill;

/// Default stopping tolerance on profile movement between rounds.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Default cap on best-response rounds.
pub const DEFAULT_MAX_ROUNDS: usize = 500;

/// An equilibrium found by best-response iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct NeResult<P> {
    pub profile: P,
    /// Approximated utilities at the equilibrium (bits).
    pub utilities: [f64; 2],
    /// Rounds used by the dynamics from the primary start.
    pub iterations: usize,
    pub converged: bool,
    /// Largest unilateral gain found by the deviation check (bits).
    pub residual: f64,
    /// Largest difference between equilibria reached from other starts.
    pub uniqueness_spread: f64,
}
