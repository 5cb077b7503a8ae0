use crate::error::{domain, Result};
use crate::games::{solve_ne_tpa, TpaProfile, DEFAULT_MAX_ROUNDS, DEFAULT_TOLERANCE};
use crate::matcore::ChannelScenario;
use crate::rates::{profile_rates, Estimate, McConfig};

use super::centralized_sumrate_tpa;

/// TPA equilibrium sum-rate across coordination probabilities.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub p: Vec<f64>,
    pub profiles: Vec<TpaProfile>,
    /// Monte Carlo sum-rate at the equilibrium for each `p`.
    pub sumrate_ne: Vec<Estimate>,
    /// Monte Carlo utilities `(u_1, u_2)` at the equilibrium.
    pub utilities: Vec<[Estimate; 2]>,
    pub centralized: Estimate,
}

impl SweepResult {
    /// Centralized over equilibrium sum-rate at each `p`.
    pub fn price_of_anarchy(&self) -> Vec<f64> {
        self.sumrate_ne
            .iter()
            .map(|r| self.centralized.mean / r.mean)
            .collect()
    }

    /// `(max − min) / max` of the equilibrium sum-rate over the grid.
    pub fn relative_gap(&self) -> f64 {
        let max = self
            .sumrate_ne
            .iter()
            .map(|r| r.mean)
            .fold(f64::NEG_INFINITY, f64::max);
        let min = self
            .sumrate_ne
            .iter()
            .map(|r| r.mean)
            .fold(f64::INFINITY, f64::min);
        (max - min) / max
    }

    /// Second differences `R(p_{i-1}) − 2R(p_i) + R(p_{i+1})` at interior
    /// points of a uniform grid, each with the largest standard error of
    /// the three points.
    pub fn second_differences(&self) -> Vec<(f64, f64, f64)> {
        self.sumrate_ne
            .windows(3)
            .zip(self.p.windows(3))
            .map(|(r, p)| {
                let sigma = r.iter().map(|e| e.stderr).fold(0.0, f64::max);
                (p[1], r[0].mean - 2.0 * r[1].mean + r[2].mean, sigma)
            })
            .collect()
    }
}

/// Solves the TPA game at every `p` of the grid and evaluates the
/// equilibrium by Monte Carlo. All points share the draws of `mc`.
pub fn tpa_sumrate_sweep(
    scenario: &ChannelScenario,
    p_grid: &[f64],
    mc: &McConfig,
) -> Result<SweepResult> {
    tpa_sumrate_sweep_with(scenario, p_grid, mc, DEFAULT_TOLERANCE, DEFAULT_MAX_ROUNDS)
}

/// [`tpa_sumrate_sweep`] with explicit best-response stopping rules.
pub fn tpa_sumrate_sweep_with(
    scenario: &ChannelScenario,
    p_grid: &[f64],
    mc: &McConfig,
    tolerance: f64,
    max_rounds: usize,
) -> Result<SweepResult> {
    if p_grid.windows(2).any(|w| !(w[1] > w[0])) || p_grid.iter().any(|p| !(0.0..=1.0).contains(p))
    {
        return Err(domain("p grid must be strictly increasing within [0, 1]"));
    }
    let mut out = SweepResult {
        p: p_grid.to_vec(),
        profiles: Vec::with_capacity(p_grid.len()),
        sumrate_ne: Vec::with_capacity(p_grid.len()),
        utilities: Vec::with_capacity(p_grid.len()),
        centralized: centralized_sumrate_tpa(scenario, mc)?,
    };
    for &p in p_grid {
        let s = scenario.with_p(p)?;
        let ne = solve_ne_tpa(&s, tolerance, max_rounds).map_err(|e| annotate(e, p))?;
        let rates = profile_rates(&s, &ne.profile, mc)?;
        out.profiles.push(ne.profile);
        out.sumrate_ne.push(rates.sum_rate);
        out.utilities.push(rates.utilities);
    }
    Ok(out)
}

fn annotate(e: crate::Error, p: f64) -> crate::Error {
    match e {
        crate::Error::NoConvergence {
            solver,
            iterations,
            residual,
            context,
        } => crate::Error::NoConvergence {
            solver,
            iterations,
            residual,
            context: format!("{context} at p = {p}"),
        },
        other => other,
    }
}

/// `0, step, 2 step, …, 1` with the endpoint exact.
pub fn uniform_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (0..=n).map(|i| i as f64 / n as f64).collect()
}
