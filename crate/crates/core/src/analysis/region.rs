use crate::error::{domain, Result};
use crate::games::{solve_ne_spa, DEFAULT_MAX_ROUNDS, DEFAULT_TOLERANCE};
use crate::matcore::{ChannelScenario, User};
use crate::rates::{profile_rates, sud_rate_pair, Estimate, McConfig};

use super::centralized::{centralized_spa_loadings, eigen_precoders};
use super::stackelberg::{line_from_profile, LineCoefficients};

/// SIC rate pairs at the SPA equilibrium across `p`, with the SUD pair.
#[derive(Debug, Clone)]
pub struct RateRegion {
    pub p: Vec<f64>,
    /// `(u_1, u_2)` at each `p`.
    pub points: Vec<[Estimate; 2]>,
    /// Rates under single-user decoding at the SUD equilibrium.
    pub sud: [Estimate; 2],
    pub line: LineCoefficients,
    /// Largest distance (bits) of a point from the chord joining the
    /// first and last points.
    pub straightness: f64,
    /// Slope `Δu_2 / Δu_1` of that chord; −1 for a constant sum-rate.
    pub chord_slope: f64,
}

/// Equilibrium rate pairs of the SPA game for every `p` of the grid.
///
/// The SUD reference uses the loadings that maximise the approximated
/// two-user log-det: under single-user decoding each user's utility is
/// that log-det minus a term it does not control, so the SUD game is a
/// potential game whose equilibrium is the joint maximiser.
pub fn rate_region(
    scenario: &ChannelScenario,
    p_grid: &[f64],
    mc: &McConfig,
) -> Result<RateRegion> {
    if p_grid.len() < 2 || p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(domain(
            "rate region needs at least two probabilities in [0, 1]",
        ));
    }
    let ne = solve_ne_spa(scenario, DEFAULT_TOLERANCE, DEFAULT_MAX_ROUNDS)?;
    let mut points = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let s = scenario.with_p(p)?;
        points.push(profile_rates(&s, &ne.profile, mc)?.utilities);
    }
    let line = line_from_profile(scenario, &ne.profile, mc)?;
    let central = centralized_spa_loadings(scenario, DEFAULT_TOLERANCE, DEFAULT_MAX_ROUNDS)?;
    let sud_pair = sud_rate_pair(scenario, &eigen_precoders(scenario, &central.loadings)?, mc)?;

    let first = points[0].map(|e| e.mean);
    let last = points[points.len() - 1].map(|e| e.mean);
    let (dx, dy) = (last[0] - first[0], last[1] - first[1]);
    let len = dx.hypot(dy);
    let straightness = if len > 0.0 {
        points
            .iter()
            .map(|pt| ((pt[0].mean - first[0]) * dy - (pt[1].mean - first[1]) * dx).abs() / len)
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(RateRegion {
        p: p_grid.to_vec(),
        points,
        sud: [sud_pair.rate(User::One), sud_pair.rate(User::Two)],
        line,
        straightness,
        chord_slope: dy / dx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_line_corners() {
        let s = ChannelScenario::exp_transmit(2, 2, 2.0, [2.0, 6.0], [0.4, 0.3], 0.5).unwrap();
        let mc = McConfig::new(400, 4).unwrap();
        let r = rate_region(&s, &[0.0, 0.5, 1.0], &mc).unwrap();
        let sum = |i: usize| r.points[i][0].mean + r.points[i][1].mean;
        assert!((sum(0) - r.line.b.mean).abs() < 1e-12);
        assert!((sum(2) - (r.line.a.mean + r.line.b.mean)).abs() < 1e-12);
        assert!(r.points[2][0].mean >= r.points[0][0].mean);
        assert!(r.straightness < 1e-9);
    }
}
