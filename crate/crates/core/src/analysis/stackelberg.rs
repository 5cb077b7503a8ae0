use crate::error::Result;
use crate::games::{solve_ne_spa, SpaProfile, DEFAULT_MAX_ROUNDS, DEFAULT_TOLERANCE};
use crate::matcore::{logdet_ipm, ChannelScenario, State, User};
use crate::rates::{monte_carlo_draws, Estimate, McConfig, PowerProfile};

/// Equilibrium SPA sum-rate as a line in `p`: `R(p) = a p + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCoefficients {
    /// `E[J^(1) − J^(2)]` with `J^(s)` the joint log-det of state `s`.
    pub a: Estimate,
    /// `E[J^(2)]`.
    pub b: Estimate,
}

impl LineCoefficients {
    pub fn at(&self, p: f64) -> f64 {
        self.a.mean * p + self.b.mean
    }
}

/// Line coefficients from the SPA equilibrium loadings, which do not depend
/// on `p`; both states share one set of draws.
pub fn spa_line_coeffs(scenario: &ChannelScenario, mc: &McConfig) -> Result<LineCoefficients> {
    let ne = solve_ne_spa(scenario, DEFAULT_TOLERANCE, DEFAULT_MAX_ROUNDS)?;
    line_from_profile(scenario, &ne.profile, mc)
}

pub(crate) fn line_from_profile(
    scenario: &ChannelScenario,
    profile: &SpaProfile,
    mc: &McConfig,
) -> Result<LineCoefficients> {
    let pairs = [
        profile.precoders(scenario, State::One)?,
        profile.precoders(scenario, State::Two)?,
    ];
    let eta = scenario.eta();
    let est = monte_carlo_draws(scenario, mc, 2, |draw, out| {
        let joint = pairs.each_ref().map(|pair| {
            let k1 = pair.received(draw, User::One, eta);
            let k2 = pair.received(draw, User::Two, eta);
            logdet_ipm(&(&k1 + &k2))
        });
        out[0] = joint[0] - joint[1];
        out[1] = joint[1];
    });
    Ok(LineCoefficients {
        a: est[0],
        b: est[1],
    })
}

/// The leader's choice of `p`: 1 when the slope is positive, else 0.
pub fn stackelberg_p(coeffs: &LineCoefficients) -> f64 {
    if coeffs.a.mean > 0.0 {
        1.0
    } else {
        0.0
    }
}
