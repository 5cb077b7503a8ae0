use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::largesys::{
    approx_logdet_joint, approx_logdet_single, approx_rates_spa, loaded_eigs, EigenLoading,
};
use crate::matcore::{CMat, ChannelScenario, State, User};
use crate::rates::{PowerProfile, PrecodingPair};

use super::{waterfill, NeResult};

/// Slack on the per-state trace constraint.
pub const BUDGET_TOL: f64 = 1e-9;
/// Transfer step of the deviation check, as a fraction of the budget.
pub const SPA_DEVIATION_STEP: f64 = 1e-3;
/// Largest accepted unilateral gain in any state (bits).
pub const SPA_DEVIATION_TOL: f64 = 1e-4;
/// Agreement required between loadings found from different starts.
pub const SPA_UNIQUENESS_TOL: f64 = 1e-4;

/// Spatial power allocation: per state and user, powers on the eigenmodes
/// of the user's transmit correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaProfile {
    /// `loadings[s][k]`.
    loadings: [[EigenLoading; 2]; 2],
}

impl SpaProfile {
    pub fn new(loadings: [[EigenLoading; 2]; 2]) -> Self {
        Self { loadings }
    }

    /// `P_k` on every eigenmode in both states.
    pub fn uniform(scenario: &ChannelScenario) -> Result<Self> {
        let n = scenario.n_t();
        let l1 = EigenLoading::uniform(n, scenario.power(User::One))?;
        let l2 = EigenLoading::uniform(n, scenario.power(User::Two))?;
        Ok(Self::new([[l1.clone(), l2.clone()], [l1, l2]]))
    }

    pub fn loading(&self, state: State, user: User) -> &EigenLoading {
        &self.loadings[state.index()][user.index()]
    }

    pub fn state_loadings(&self, state: State) -> &[EigenLoading; 2] {
        &self.loadings[state.index()]
    }

    /// Largest per-entry difference over all loadings.
    pub fn distance(&self, other: &SpaProfile) -> f64 {
        let mut d: f64 = 0.0;
        for s in 0..2 {
            for k in 0..2 {
                d = d.max(self.loadings[s][k].distance(&other.loadings[s][k]));
            }
        }
        d
    }
}

/// `U_k diag(√P)`, a factor of `Q = U_k diag(P) U_k^H`.
fn eigen_factor(scenario: &ChannelScenario, user: User, loading: &EigenLoading) -> CMat {
    let u = scenario.tx_eigenvectors(user);
    let roots: Vec<f64> = loading.powers().iter().map(|p| p.sqrt()).collect();
    CMat::from_fn(u.rows(), u.cols(), |i, j| {
        u[(i, j)] * Complex64::new(roots[j], 0.0)
    })
}

impl PowerProfile for SpaProfile {
    fn check_feasible(&self, scenario: &ChannelScenario) -> Result<()> {
        let n = scenario.n_t();
        for state in State::BOTH {
            for user in User::BOTH {
                let l = self.loading(state, user);
                let budget = n as f64 * scenario.power(user);
                if l.len() != n {
                    return Err(crate::error::domain(format!(
                        "loading of user {} in state {} has {} entries, expected {n}",
                        user.index() + 1,
                        state.index() + 1,
                        l.len()
                    )));
                }
                if l.total() > budget + BUDGET_TOL {
                    return Err(Error::Constraint {
                        constraint: "SPA per-state trace constraint, Tr(Q_k^(s)) <= n_t P_k",
                        detail: format!(
                            "user {} in state {} uses {} > {budget}",
                            user.index() + 1,
                            state.index() + 1,
                            l.total()
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    fn precoders(&self, scenario: &ChannelScenario, state: State) -> Result<PrecodingPair> {
        let [l1, l2] = self.state_loadings(state);
        PrecodingPair::from_factors(
            eigen_factor(scenario, User::One, l1),
            eigen_factor(scenario, User::Two, l2),
        )
    }
}

/// Water-filling update of the user decoded last: it sees no interference,
/// so its loading is tuned against the single-user system alone.
pub(crate) fn last_decoded_update(
    scenario: &ChannelScenario,
    user: User,
    own: &EigenLoading,
) -> Result<EigenLoading> {
    let w = loaded_eigs(scenario, user, own)?;
    let (_, fp) = approx_logdet_single(
        &w,
        scenario.rx_eigenvalues(),
        scenario.eta(),
        scenario.n_t(),
    )?;
    waterfill(
        scenario.tx_eigenvalues(user),
        fp.gamma,
        scenario.eta(),
        scenario.n_t() as f64 * scenario.power(user),
    )
}

/// Water-filling update against the two-user system, where each mode's
/// gain carries the factor `2η γ_2`.
pub(crate) fn joint_update(
    scenario: &ChannelScenario,
    user: User,
    pair: &[EigenLoading; 2],
) -> Result<EigenLoading> {
    let w1 = loaded_eigs(scenario, User::One, &pair[0])?;
    let w2 = loaded_eigs(scenario, User::Two, &pair[1])?;
    let (_, fp) = approx_logdet_joint(
        &w1,
        &w2,
        scenario.rx_eigenvalues(),
        scenario.eta(),
        scenario.n_t(),
    )?;
    waterfill(
        scenario.tx_eigenvalues(user),
        fp.gamma,
        2.0 * scenario.eta(),
        scenario.n_t() as f64 * scenario.power(user),
    )
}

fn solve_state(
    scenario: &ChannelScenario,
    state: State,
    start: [EigenLoading; 2],
    tolerance: f64,
    max_rounds: usize,
) -> Result<([EigenLoading; 2], usize)> {
    let last = state.last_decoded();
    let first = last.other();
    let mut cur = start;
    for round in 1..=max_rounds {
        let mut next = cur.clone();
        next[last.index()] = last_decoded_update(scenario, last, &cur[last.index()])?;
        next[first.index()] = joint_update(scenario, first, &next)?;
        let moved = next[0].distance(&cur[0]).max(next[1].distance(&cur[1]));
        cur = next;
        if moved < tolerance {
            return Ok((cur, round));
        }
    }
    Err(Error::NoConvergence {
        solver: "SPA iterative water-filling",
        iterations: max_rounds,
        residual: f64::NAN,
        context: format!(
            " (state {}, last loadings {:?} / {:?})",
            state.index() + 1,
            cur[0].powers(),
            cur[1].powers()
        ),
    })
}

/// Largest per-state rate gain (bits) available to a user who moves power
/// between two of its eigenmodes, on transfer steps of
/// [`SPA_DEVIATION_STEP`] times its budget.
pub fn spa_deviation_gain(scenario: &ChannelScenario, profile: &SpaProfile) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let n = scenario.n_t();
    for state in State::BOTH {
        let pair = profile.state_loadings(state);
        let base = approx_rates_spa(scenario, &pair[0], &pair[1], state)?;
        for user in User::BOTH {
            let k = user.index();
            let step = SPA_DEVIATION_STEP * n as f64 * scenario.power(user);
            if step == 0.0 {
                continue;
            }
            let own = pair[k].powers();
            for i in 0..n {
                for j in 0..n {
                    if i == j || own[i] == 0.0 {
                        continue;
                    }
                    let mut amounts: Vec<f64> = (1..)
                        .map(|m| m as f64 * step)
                        .take_while(|&a| a < own[i])
                        .collect();
                    amounts.push(own[i]);
                    for a in amounts {
                        let mut dev = own.to_vec();
                        dev[i] -= a;
                        dev[j] += a;
                        dev[i] = dev[i].max(0.0);
                        let mut trial = pair.clone();
                        trial[k] = EigenLoading::new(dev)?;
                        let r = approx_rates_spa(scenario, &trial[0], &trial[1], state)?;
                        worst = worst.max(r[k] - base[k]);
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn concentrated(n: usize, power: f64, mode: usize) -> Result<EigenLoading> {
    let mut v = vec![0.0; n];
    v[mode] = n as f64 * power;
    EigenLoading::new(v)
}

/// Nash equilibrium of the SPA game on the approximated rates.
///
/// The two states are solved independently. In each, the user decoded
/// last water-fills against its single-user system, then the other user
/// water-fills against the two-user system; rounds repeat until no power
/// moves by more than `tolerance`. The loadings do not depend on `p`.
/// Results are checked by a pairwise-transfer deviation search and by
/// restarting from loadings concentrated on the strongest and on the
/// weakest eigenmode.
pub fn solve_ne_spa(
    scenario: &ChannelScenario,
    tolerance: f64,
    max_rounds: usize,
) -> Result<NeResult<SpaProfile>> {
    let n = scenario.n_t();
    let uniform = SpaProfile::uniform(scenario)?;
    if scenario.eta() == 0.0 {
        return Ok(NeResult {
            profile: uniform,
            utilities: [0.0, 0.0],
            iterations: 0,
            converged: true,
            residual: 0.0,
            uniqueness_spread: 0.0,
        });
    }
    let mut loadings = uniform.loadings.clone();
    let mut iterations = 0;
    let mut spread: f64 = 0.0;
    for state in State::BOTH {
        let (ne, it) = solve_state(
            scenario,
            state,
            uniform.state_loadings(state).clone(),
            tolerance,
            max_rounds,
        )?;
        iterations = iterations.max(it);
        for mode in [0, n - 1] {
            let start = [
                concentrated(n, scenario.power(User::One), mode)?,
                concentrated(n, scenario.power(User::Two), mode)?,
            ];
            let (other, _) = solve_state(scenario, state, start, tolerance, max_rounds)?;
            spread = spread
                .max(other[0].distance(&ne[0]))
                .max(other[1].distance(&ne[1]));
        }
        loadings[state.index()] = ne;
    }
    let profile = SpaProfile::new(loadings);
    let residual = spa_deviation_gain(scenario, &profile)?;
    if residual > SPA_DEVIATION_TOL || spread > SPA_UNIQUENESS_TOL {
        return Err(Error::NoConvergence {
            solver: "SPA equilibrium check",
            iterations,
            residual,
            context: format!(" (restart spread {spread:e})"),
        });
    }
    let utilities = spa_utilities(scenario, &profile)?;
    Ok(NeResult {
        profile,
        utilities,
        iterations,
        converged: true,
        residual,
        uniqueness_spread: spread,
    })
}

/// Approximated utilities `Σ_s Pr[s] R̃_k^(s)` of an SPA profile.
pub fn spa_utilities(scenario: &ChannelScenario, profile: &SpaProfile) -> Result<[f64; 2]> {
    let mut u = [0.0; 2];
    for state in State::BOTH {
        let pr = scenario.state_probability(state);
        let pair = profile.state_loadings(state);
        let r = approx_rates_spa(scenario, &pair[0], &pair[1], state)?;
        for k in 0..2 {
            u[k] += pr * r[k];
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3(p: f64) -> ChannelScenario {
        ChannelScenario::exp_transmit(4, 4, 10f64.powf(0.3), [5.0, 50.0], [0.4, 0.3], p).unwrap()
    }

    #[test]
    fn identity_correlation_gives_uniform_loadings() {
        let s = ChannelScenario::uncorrelated(4, 4, 10f64.powf(0.5), [1.0, 10.0], 0.5).unwrap();
        let ne = solve_ne_spa(&s, 1e-12, 500).unwrap();
        for state in State::BOTH {
            for user in User::BOTH {
                for &p in ne.profile.loading(state, user).powers() {
                    assert!((p - s.power(user)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn last_decoded_loading_ignores_opponent() {
        let s = fig3(0.5);
        let a = solve_ne_spa(&s, 1e-12, 500).unwrap();
        let b = solve_ne_spa(&s.with_powers([5.0, 5.0]).unwrap(), 1e-12, 500).unwrap();
        let la = a.profile.loading(State::One, User::One);
        let lb = b.profile.loading(State::One, User::One);
        assert!(la.distance(lb) < 1e-9);
    }

    #[test]
    fn loadings_do_not_depend_on_p() {
        let a = solve_ne_spa(&fig3(0.2), 1e-12, 500).unwrap();
        let b = solve_ne_spa(&fig3(0.8), 1e-12, 500).unwrap();
        assert!(a.profile.distance(&b.profile) < 1e-9);
    }

    #[test]
    fn over_budget_profile_is_rejected() {
        let s = fig3(0.5);
        let mut prof = SpaProfile::uniform(&s).unwrap();
        prof.loadings[1][0] = EigenLoading::uniform(4, 5.1).unwrap();
        match prof.check_feasible(&s) {
            Err(Error::Constraint { constraint, .. }) => assert!(constraint.contains("trace")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precoders_live_in_transmit_eigenbasis() {
        let s = fig3(0.5);
        let ne = solve_ne_spa(&s, 1e-12, 500).unwrap();
        let pair = ne.profile.precoders(&s, State::One).unwrap();
        let q = pair.q(User::One);
        assert!((q.real_trace() - ne.profile.loading(State::One, User::One).total()).abs() < 1e-9);
        // Q commutes with T when they share eigenvectors.
        let t = s.spec().tx_corr[0].as_cmat();
        let comm = &(q.as_cmat() * t) - &(t * q.as_cmat());
        assert!(comm.max_abs() < 1e-9);
    }
}
