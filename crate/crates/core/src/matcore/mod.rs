//! Complex Hermitian linear algebra and Kronecker-correlated channel synthesis.

mod channel;
mod cmat;
mod hermitian;

pub use channel::{
    complex_gaussian, draw_channels, trial_seed, ChannelDraw, ChannelScenario, ScenarioSpec, State,
    User, TRACE_TOL,
};
pub use cmat::CMat;
pub use hermitian::{
    exp_correlation, hermitian_eig, logdet_ipm, psd_sqrt, Eigen, HermitianMatrix, HERMITIAN_TOL,
    PSD_TOL,
};
