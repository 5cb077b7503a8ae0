//! Centralized baselines, equilibrium sum-rate sweeps, the leader's choice
//! of `p`, rate regions and randomized checks of the inequalities behind
//! equilibrium uniqueness.

mod centralized;
mod region;
mod stackelberg;
mod sweep;
mod verify;

pub use centralized::{
    centralized_spa_loadings, centralized_sumrate_spa, centralized_sumrate_tpa, eigen_precoders,
    CentralizedLoadings, CentralizedSpa,
};
pub use region::{rate_region, RateRegion};
pub(crate) use stackelberg::line_from_profile;
pub use stackelberg::{spa_line_coeffs, stackelberg_p, LineCoefficients};
pub use sweep::{tpa_sumrate_sweep, tpa_sumrate_sweep_with, uniform_grid, SweepResult};
pub use verify::{
    dsc_terms, lemma3_trace, ordered_eigen_gap, pair_trace, verify_concavity, verify_dsc,
    verify_trace_lemmas, CheckReport, SLACK,
};
