use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::games::{joint_update, SPA_UNIQUENESS_TOL};
use crate::largesys::{approx_logdet_joint, loaded_eigs, EigenLoading};
use crate::matcore::{CMat, ChannelScenario, HermitianMatrix, User};
use crate::rates::{ergodic_logdet, Estimate, McConfig, PrecodingPair};

/// `E log2|I + ρ_1 H_1 H_1^H + ρ_2 H_2 H_2^H|`: both users at full power
/// with uniform spatial allocation.
pub fn centralized_sumrate_tpa(scenario: &ChannelScenario, mc: &McConfig) -> Result<Estimate> {
    let n = scenario.n_t();
    let q1 = HermitianMatrix::from_real_diag(&vec![scenario.power(User::One); n]);
    let q2 = HermitianMatrix::from_real_diag(&vec![scenario.power(User::Two); n]);
    ergodic_logdet(scenario, Some(&q1), Some(&q2), mc)
}

/// Eigen-loadings maximising the approximated two-user log-det.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralizedLoadings {
    pub loadings: [EigenLoading; 2],
    /// Approximated sum-rate at the loadings (bits).
    pub approx_sumrate: f64,
    pub iterations: usize,
    /// Largest loading difference between the three starts.
    pub restart_spread: f64,
}

fn simultaneous_waterfill(
    scenario: &ChannelScenario,
    start: [EigenLoading; 2],
    tolerance: f64,
    max_rounds: usize,
) -> Result<([EigenLoading; 2], usize)> {
    let mut cur = start;
    for round in 1..=max_rounds {
        let mut next = cur.clone();
        next[0] = joint_update(scenario, User::One, &next)?;
        next[1] = joint_update(scenario, User::Two, &next)?;
        let moved = next[0].distance(&cur[0]).max(next[1].distance(&cur[1]));
        cur = next;
        if moved < tolerance {
            return Ok((cur, round));
        }
    }
    Err(Error::NoConvergence {
        solver: "centralized water-filling",
        iterations: max_rounds,
        residual: f64::NAN,
        context: String::new(),
    })
}

/// Joint maximisation of the approximated sum-rate over both users'
/// eigen-loadings by alternating water-filling on the two-user system.
/// The objective is concave, so agreement between the uniform start and
/// starts concentrated on the strongest and weakest modes certifies the
/// optimum.
pub fn centralized_spa_loadings(
    scenario: &ChannelScenario,
    tolerance: f64,
    max_rounds: usize,
) -> Result<CentralizedLoadings> {
    let n = scenario.n_t();
    let powers = [scenario.power(User::One), scenario.power(User::Two)];
    let uniform = [
        EigenLoading::uniform(n, powers[0])?,
        EigenLoading::uniform(n, powers[1])?,
    ];
    if scenario.eta() == 0.0 {
        return Ok(CentralizedLoadings {
            loadings: uniform,
            approx_sumrate: 0.0,
            iterations: 0,
            restart_spread: 0.0,
        });
    }
    let (best, iterations) = simultaneous_waterfill(scenario, uniform, tolerance, max_rounds)?;
    let mut spread: f64 = 0.0;
    for mode in [0, n - 1] {
        let start = powers.map(|p| {
            let mut v = vec![0.0; n];
            v[mode] = n as f64 * p;
            EigenLoading::new(v)
        });
        let [a, b] = start;
        let (other, _) = simultaneous_waterfill(scenario, [a?, b?], tolerance, max_rounds)?;
        spread = spread
            .max(other[0].distance(&best[0]))
            .max(other[1].distance(&best[1]));
    }
    if spread > SPA_UNIQUENESS_TOL {
        return Err(Error::NoConvergence {
            solver: "centralized water-filling",
            iterations,
            residual: spread,
            context: " (starts disagree)".into(),
        });
    }
    let w1 = loaded_eigs(scenario, User::One, &best[0])?;
    let w2 = loaded_eigs(scenario, User::Two, &best[1])?;
    let (approx_sumrate, _) =
        approx_logdet_joint(&w1, &w2, scenario.rx_eigenvalues(), scenario.eta(), n)?;
    Ok(CentralizedLoadings {
        loadings: best,
        approx_sumrate,
        iterations,
        restart_spread: spread,
    })
}

/// Precoders `U_k diag(P_k) U_k^H` for a pair of eigen-loadings.
pub fn eigen_precoders(
    scenario: &ChannelScenario,
    loadings: &[EigenLoading; 2],
) -> Result<PrecodingPair> {
    let factor = |user: User, l: &EigenLoading| {
        let u = scenario.tx_eigenvectors(user);
        let roots: Vec<f64> = l.powers().iter().map(|p| p.sqrt()).collect();
        CMat::from_fn(u.rows(), u.cols(), |i, j| {
            u[(i, j)] * Complex64::new(roots[j], 0.0)
        })
    };
    PrecodingPair::from_factors(
        factor(User::One, &loadings[0]),
        factor(User::Two, &loadings[1]),
    )
}

/// Centralized SPA sum-rate: Monte Carlo value of the joint log-det at the
/// loadings of [`centralized_spa_loadings`].
#[derive(Debug, Clone, PartialEq)]
pub struct CentralizedSpa {
    pub loadings: CentralizedLoadings,
    pub sumrate: Estimate,
}

pub fn centralized_sumrate_spa(
    scenario: &ChannelScenario,
    mc: &McConfig,
) -> Result<CentralizedSpa> {
    let loadings = centralized_spa_loadings(
        scenario,
        crate::games::DEFAULT_TOLERANCE,
        crate::games::DEFAULT_MAX_ROUNDS,
    )?;
    let pair = eigen_precoders(scenario, &loadings.loadings)?;
    let sumrate = ergodic_logdet(
        scenario,
        Some(pair.q(User::One)),
        Some(pair.q(User::Two)),
        mc,
    )?;
    Ok(CentralizedSpa { loadings, sumrate })
}
