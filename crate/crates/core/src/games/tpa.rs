use crate::error::{Error, Result};
use crate::largesys::{approx_rates_tpa, tpa_utility_derivative};
use crate::matcore::{ChannelScenario, State, User};
use crate::rates::{PowerProfile, PrecodingPair};

use super::NeResult;

/// Slack allowed on the TPA action-set bounds.
const ACTION_TOL: f64 = 1e-12;
/// Utilities whose range over the action set is below this (bits) are
/// treated as flat; the best response is then the uniform choice 1.
pub const FLAT_TOL: f64 = 1e-9;
/// Step of the unilateral-deviation grid.
pub const DEVIATION_STEP: f64 = 1e-3;
/// Largest accepted unilateral gain on the deviation grid (bits).
pub const DEVIATION_TOL: f64 = 1e-4;
/// Agreement required between NE found from different starts.
pub const UNIQUENESS_TOL: f64 = 1e-6;

/// Temporal power allocation: `α_1` is user 1's fraction in state 1 and
/// `α_2` is user 2's fraction in state 2. The fractions for the other
/// state follow from saturating the average power constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpaProfile {
    p: f64,
    alpha: [f64; 2],
}

/// Probability of the state in which `user` is decoded last.
fn own_probability(p: f64, user: User) -> f64 {
    match user {
        User::One => p,
        User::Two => 1.0 - p,
    }
}

impl TpaProfile {
    /// Checks `α_1 ∈ [0, 1/p]` and `α_2 ∈ [0, 1/(1 − p)]`.
    pub fn new(p: f64, alpha_1: f64, alpha_2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(crate::error::domain(format!(
                "p = {p} is not a probability"
            )));
        }
        let mut alpha = [alpha_1, alpha_2];
        for user in User::BOTH {
            let k = user.index();
            let upper = Self::upper(p, user);
            let a = alpha[k];
            if !(a.is_finite() && a >= -ACTION_TOL && a <= upper * (1.0 + ACTION_TOL) + ACTION_TOL)
            {
                return Err(Error::Constraint {
                    constraint: if k == 0 {
                        "TPA action set of user 1, alpha_1 in [0, 1/p]"
                    } else {
                        "TPA action set of user 2, alpha_2 in [0, 1/(1-p)]"
                    },
                    detail: format!("alpha_{} = {a} with p = {p}", k + 1),
                });
            }
            alpha[k] = a.clamp(0.0, upper);
        }
        Ok(Self { p, alpha })
    }

    /// Largest admissible fraction `1/p_k` (infinite when the user's own
    /// state never occurs).
    pub fn upper(p: f64, user: User) -> f64 {
        1.0 / own_probability(p, user)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self, user: User) -> f64 {
        self.alpha[user.index()]
    }

    /// Fractions `[α_1^(s), α_2^(s)]` used in `state`. A fraction belonging
    /// to a state of probability zero is reported as 0.
    pub fn state_fractions(&self, state: State) -> [f64; 2] {
        let p = self.p;
        let q = 1.0 - p;
        match state {
            State::One => {
                let a2 = if p > 0.0 {
                    ((1.0 - q * self.alpha[1]) / p).max(0.0)
                } else {
                    0.0
                };
                let a1 = if p > 0.0 { self.alpha[0] } else { 0.0 };
                [a1, a2]
            }
            State::Two => {
                let a1 = if q > 0.0 {
                    ((1.0 - p * self.alpha[0]) / q).max(0.0)
                } else {
                    0.0
                };
                let a2 = if q > 0.0 { self.alpha[1] } else { 0.0 };
                [a1, a2]
            }
        }
    }

    fn with_alpha(&self, user: User, a: f64) -> Result<Self> {
        let mut alpha = self.alpha;
        alpha[user.index()] = a;
        Self::new(self.p, alpha[0], alpha[1])
    }

    fn distance(&self, other: &TpaProfile) -> f64 {
        (self.alpha[0] - other.alpha[0])
            .abs()
            .max((self.alpha[1] - other.alpha[1]).abs())
    }
}

impl PowerProfile for TpaProfile {
    fn check_feasible(&self, scenario: &ChannelScenario) -> Result<()> {
        if (scenario.p() - self.p).abs() > 0.0 {
            return Err(Error::Constraint {
                constraint: "TPA profile built for a different coordination probability",
                detail: format!("profile p = {}, scenario p = {}", self.p, scenario.p()),
            });
        }
        Self::new(self.p, self.alpha[0], self.alpha[1]).map(|_| ())
    }

    fn precoders(&self, scenario: &ChannelScenario, state: State) -> Result<PrecodingPair> {
        let a = self.state_fractions(state);
        PrecodingPair::scaled_identity(
            scenario.n_t(),
            a[0] * scenario.power(User::One),
            a[1] * scenario.power(User::Two),
        )
    }
}

fn profile_with(p: f64, user: User, own: f64, opponent: f64) -> Result<TpaProfile> {
    match user {
        User::One => TpaProfile::new(p, own, opponent),
        User::Two => TpaProfile::new(p, opponent, own),
    }
}

fn approx_utility(scenario: &ChannelScenario, user: User, own: f64, opponent: f64) -> Result<f64> {
    let prof = profile_with(scenario.p(), user, own, opponent)?;
    Ok(approx_rates_tpa(scenario, prof.alpha[0], prof.alpha[1])?.utilities[user.index()])
}

fn derivative(scenario: &ChannelScenario, user: User, own: f64, opponent: f64) -> Result<f64> {
    let prof = profile_with(scenario.p(), user, own, opponent)?;
    tpa_utility_derivative(scenario, user, prof.alpha[0], prof.alpha[1])
}

/// Maximiser of the approximated utility of `user` over its action set,
/// holding the opponent's fraction fixed.
///
/// The utility is concave in the own fraction, so the maximiser is an
/// endpoint when the derivative does not change sign and otherwise the
/// root of the derivative, found by bisection. When the utility is flat
/// to within [`FLAT_TOL`] the uniform choice 1 is returned; when the
/// user's own state has probability zero its fraction is irrelevant and 0
/// is returned.
pub fn tpa_best_response(
    scenario: &ChannelScenario,
    user: User,
    opponent_alpha: f64,
) -> Result<f64> {
    let p_own = own_probability(scenario.p(), user);
    if p_own == 0.0 {
        return Ok(0.0);
    }
    let upper = 1.0 / p_own;
    let g_lo = derivative(scenario, user, 0.0, opponent_alpha)?;
    let g_hi = derivative(scenario, user, upper, opponent_alpha)?;
    let best = if g_lo <= 0.0 {
        0.0
    } else if g_hi >= 0.0 {
        upper
    } else {
        let (mut lo, mut hi) = (0.0, upper);
        while hi - lo > 1e-14 * upper {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if derivative(scenario, user, mid, opponent_alpha)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let u_best = approx_utility(scenario, user, best, opponent_alpha)?;
    let u_lo = approx_utility(scenario, user, 0.0, opponent_alpha)?;
    let u_hi = approx_utility(scenario, user, upper, opponent_alpha)?;
    if u_best - u_lo.min(u_hi) < FLAT_TOL {
        return Ok(1.0);
    }
    Ok(best)
}

/// Largest gain (bits) any user obtains by a unilateral deviation on a grid
/// of step [`DEVIATION_STEP`] over its action set.
pub fn tpa_deviation_gain(scenario: &ChannelScenario, profile: &TpaProfile) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let base = approx_rates_tpa(scenario, profile.alpha[0], profile.alpha[1])?;
    for user in User::BOTH {
        let p_own = own_probability(scenario.p(), user);
        if p_own == 0.0 {
            continue;
        }
        let upper = 1.0 / p_own;
        let steps = (upper / DEVIATION_STEP).floor() as usize;
        let mut points: Vec<f64> = (0..=steps).map(|i| i as f64 * DEVIATION_STEP).collect();
        if points.last().is_some_and(|&x| x < upper) {
            points.push(upper);
        }
        for a in points {
            let dev = profile.with_alpha(user, a)?;
            let u = approx_rates_tpa(scenario, dev.alpha[0], dev.alpha[1])?.utilities[user.index()];
            worst = worst.max(u - base.utilities[user.index()]);
        }
    }
    Ok(worst)
}

fn best_response_dynamics(
    scenario: &ChannelScenario,
    start: [f64; 2],
    tolerance: f64,
    max_rounds: usize,
) -> Result<(TpaProfile, usize)> {
    let p = scenario.p();
    let mut cur = TpaProfile::new(p, start[0], start[1])?;
    for round in 1..=max_rounds {
        let a1 = tpa_best_response(scenario, User::One, cur.alpha[1])?;
        let a2 = tpa_best_response(scenario, User::Two, a1)?;
        let next = TpaProfile::new(p, a1, a2)?;
        let moved = next.distance(&cur);
        cur = next;
        if moved < tolerance {
            return Ok((cur, round));
        }
    }
    let last = cur;
    Err(Error::NoConvergence {
        solver: "TPA best-response dynamics",
        iterations: max_rounds,
        residual: f64::NAN,
        context: format!(
            " (last profile alpha = ({}, {}))",
            last.alpha[0], last.alpha[1]
        ),
    })
}

/// Nash equilibrium of the TPA game on the approximated utilities.
///
/// Best responses alternate (user 1 first) from the uniform profile until
/// neither fraction moves by more than `tolerance`. The result is checked
/// on the unilateral-deviation grid, and the dynamics are restarted from
/// both corners of the action space to witness uniqueness. For `p = 1`
/// (resp. `p = 0`) only user 1 (resp. 2) has a decision and the other
/// fraction is reported as 0.
pub fn solve_ne_tpa(
    scenario: &ChannelScenario,
    tolerance: f64,
    max_rounds: usize,
) -> Result<NeResult<TpaProfile>> {
    let p = scenario.p();
    let (profile, iterations, spread) = if p == 1.0 || p == 0.0 {
        let user = if p == 1.0 { User::One } else { User::Two };
        let a = tpa_best_response(scenario, user, 0.0)?;
        (profile_with(p, user, a, 0.0)?, 1, 0.0)
    } else {
        let uppers = [
            TpaProfile::upper(p, User::One),
            TpaProfile::upper(p, User::Two),
        ];
        let (ne, iterations) = best_response_dynamics(scenario, [1.0, 1.0], tolerance, max_rounds)?;
        let mut spread: f64 = 0.0;
        for start in [[0.0, 0.0], uppers] {
            let (other, _) = best_response_dynamics(scenario, start, tolerance, max_rounds)?;
            spread = spread.max(other.distance(&ne));
        }
        (ne, iterations, spread)
    };
    let residual = tpa_deviation_gain(scenario, &profile)?;
    let approx = approx_rates_tpa(scenario, profile.alpha[0], profile.alpha[1])?;
    if residual > DEVIATION_TOL || spread > UNIQUENESS_TOL {
        return Err(Error::NoConvergence {
            solver: "TPA equilibrium check",
            iterations,
            residual,
            context: format!(
                " (alpha = ({}, {}), restart spread {spread:e})",
                profile.alpha[0], profile.alpha[1]
            ),
        });
    }
    Ok(NeResult {
        profile,
        utilities: approx.utilities,
        iterations,
        converged: true,
        residual,
        uniqueness_spread: spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(p: f64) -> ChannelScenario {
        ChannelScenario::uncorrelated(4, 4, 10f64.powf(0.5), [1.0, 10.0], p).unwrap()
    }

    fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > tol {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(d);
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn profile_saturates_constraint() {
        for (p, a1, a2) in [(0.3, 2.1, 0.4), (0.5, 0.0, 2.0), (0.9, 1.0, 1.0)] {
            let prof = TpaProfile::new(p, a1, a2).unwrap();
            let s1 = prof.state_fractions(State::One);
            let s2 = prof.state_fractions(State::Two);
            assert!((p * s1[0] + (1.0 - p) * s2[0] - 1.0).abs() < 1e-15);
            assert!((p * s1[1] + (1.0 - p) * s2[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn infeasible_profile_names_constraint() {
        match TpaProfile::new(0.5, 2.5, 1.0) {
            Err(Error::Constraint { constraint, .. }) => assert!(constraint.contains("user 1")),
            other => panic!("{other:?}"),
        }
        assert!(TpaProfile::new(0.5, 1.0, -0.1).is_err());
    }

    #[test]
    fn best_response_matches_golden_section() {
        let s = fig1(0.5);
        for user in User::BOTH {
            let br = tpa_best_response(&s, user, 1.0).unwrap();
            let gs = golden_section(
                |a| approx_utility(&s, user, a, 1.0).unwrap(),
                0.0,
                2.0,
                1e-10,
            );
            assert!((br - gs).abs() < 1e-6, "{br} vs {gs}");
            if br > 0.0 && br < 2.0 {
                assert!(derivative(&s, user, br, 1.0).unwrap().abs() < 1e-8);
            }
        }
    }

    #[test]
    fn low_snr_best_response_is_tie_broken_to_one() {
        let s = fig1(0.5).with_eta(1e-6).unwrap();
        assert_eq!(tpa_best_response(&s, User::One, 0.3).unwrap(), 1.0);
        assert_eq!(tpa_best_response(&s, User::Two, 1.7).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_probabilities() {
        let ne = solve_ne_tpa(&fig1(1.0), 1e-10, 100).unwrap();
        assert_eq!(
            (ne.profile.alpha(User::One), ne.profile.alpha(User::Two)),
            (1.0, 0.0)
        );
        let ne = solve_ne_tpa(&fig1(0.0), 1e-10, 100).unwrap();
        assert_eq!(
            (ne.profile.alpha(User::One), ne.profile.alpha(User::Two)),
            (0.0, 1.0)
        );
    }

    #[test]
    fn fig1_equilibrium_is_verified() {
        let ne = solve_ne_tpa(&fig1(0.5), 1e-10, 200).unwrap();
        assert!(ne.converged);
        assert!(ne.residual <= DEVIATION_TOL);
        assert!(ne.uniqueness_spread <= UNIQUENESS_TOL);
    }
}
