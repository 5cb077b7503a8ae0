//! Deterministic large-system approximations of the ergodic rates.
//!
//! Both the single-user and the two-user (virtual MIMO) log-det expectations
//! reduce to one two-equation system in `(γ, δ)`:
//!
//! ```text
//! γ = (1/N) Σ_j d_R(j) / (1 + c η d_R(j) δ)
//! δ = (1/N) Σ_i w_i    / (1 + c η w_i γ)
//! ```
//!
//! with `(N, c) = (n_t, 1)` for one user and `(2 n_t, 2)` for both users, where
//! `w` stacks the power-weighted transmit eigenvalues of every active user.
//! The approximated rate is
//! `Σ_i log2(1 + c η w_i γ) + Σ_j log2(1 + c η d_R(j) δ) − c N η γ δ log2(e)`,
//! which is stationary in `(γ, δ)` at the solution, so derivatives with
//! respect to `w_i` only involve the explicit first sum.

use std::f64::consts::LOG2_E;

use crate::error::{domain, Error, Result};
use crate::games::TpaProfile;
use crate::matcore::{ChannelScenario, State, User};

/// Damping of the alternating substitution.
const DAMPING: f64 = 0.5;
/// Target residual of the substitution, relative to `max(1, γ, δ)`.
const FP_TARGET: f64 = 1e-13;
/// Largest accepted residual, relative to `max(1, γ, δ)`.
const FP_ACCEPT: f64 = 1e-11;
const FP_MAX_ITER: usize = 10_000;
/// Agreement required between restarts.
pub const RESTART_TOL: f64 = 1e-8;

/// A solution `(γ, δ)` of one of the two fixed-point systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub gamma: f64,
    pub delta: f64,
    /// `max(|γ − γ(δ)|, |δ − δ(γ)|)` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    /// Largest coordinate difference among the restarts, 0 when the solve
    /// was not restarted.
    pub restart_spread: f64,
}

/// Per-antenna powers in the eigenbasis of a user's transmit correlation,
/// ordered like the (descending) eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenLoading(Vec<f64>);

impl EigenLoading {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(domain(
                "eigen-loading powers must be finite and nonnegative",
            ));
        }
        Ok(Self(powers))
    }

    pub fn uniform(n_t: usize, power: f64) -> Result<Self> {
        Self::new(vec![power; n_t])
    }

    pub fn powers(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Largest absolute entry difference.
    pub fn distance(&self, other: &EigenLoading) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

struct System<'a> {
    w: &'a [f64],
    d_r: &'a [f64],
    /// `c η`.
    ce: f64,
    /// `N`.
    norm: f64,
}

impl System<'_> {
    fn gamma_of(&self, delta: f64) -> f64 {
        self.d_r
            .iter()
            .map(|&d| d / (1.0 + self.ce * d * delta))
            .sum::<f64>()
            / self.norm
    }

    fn delta_of(&self, gamma: f64) -> f64 {
        self.w
            .iter()
            .map(|&w| w / (1.0 + self.ce * w * gamma))
            .sum::<f64>()
            / self.norm
    }

    fn residual(&self, gamma: f64, delta: f64) -> f64 {
        (gamma - self.gamma_of(delta))
            .abs()
            .max((delta - self.delta_of(gamma)).abs())
    }

    fn gamma_max(&self) -> f64 {
        self.d_r.iter().sum::<f64>() / self.norm
    }

    fn delta_max(&self) -> f64 {
        self.w.iter().sum::<f64>() / self.norm
    }

    fn exact(&self) -> Option<(f64, f64)> {
        if self.ce == 0.0 {
            return Some((self.gamma_max(), self.delta_max()));
        }
        if self.w.iter().all(|&w| w == 0.0) {
            return Some((self.gamma_max(), 0.0));
        }
        if self.d_r.iter().all(|&d| d == 0.0) {
            return Some((0.0, self.delta_max()));
        }
        None
    }

    fn substitution(&self, start: (f64, f64)) -> Option<(f64, f64, usize)> {
        let (mut g, mut d) = start;
        for it in 1..=FP_MAX_ITER {
            g = (1.0 - DAMPING) * g + DAMPING * self.gamma_of(d);
            d = (1.0 - DAMPING) * d + DAMPING * self.delta_of(g);
            if self.residual(g, d) <= FP_TARGET * g.max(d).max(1.0) {
                return Some((g, d, it));
            }
        }
        None
    }

    /// Bisection on `γ − γ(δ(γ))`, which is negative at 0 and nonnegative
    /// at `γ_max`.
    fn bisection(&self) -> (f64, f64, usize) {
        let (mut lo, mut hi) = (0.0, self.gamma_max());
        let mut it = 0;
        while it < 200 {
            it += 1;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if mid - self.gamma_of(self.delta_of(mid)) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let g = 0.5 * (lo + hi);
        (g, self.delta_of(g), FP_MAX_ITER + it)
    }

    fn solve_from(&self, start: (f64, f64)) -> Result<FixedPoint> {
        let (gamma, delta, iterations) =
            self.substitution(start).unwrap_or_else(|| self.bisection());
        let residual = self.residual(gamma, delta);
        if !(residual <= FP_ACCEPT * gamma.max(delta).max(1.0)) {
            return Err(Error::NoConvergence {
                solver: "large-system fixed point",
                iterations,
                residual,
                context: format!(" at gamma = {gamma}, delta = {delta}"),
            });
        }
        Ok(FixedPoint {
            gamma,
            delta,
            residual,
            iterations,
            restart_spread: 0.0,
        })
    }

    fn solve(&self, restarts: bool) -> Result<FixedPoint> {
        if let Some((gamma, delta)) = self.exact() {
            return Ok(FixedPoint {
                gamma,
                delta,
                residual: self.residual(gamma, delta),
                iterations: 0,
                restart_spread: 0.0,
            });
        }
        let (gm, dm) = (self.gamma_max(), self.delta_max());
        let mut best = self.solve_from((gm, dm))?;
        if restarts {
            let mut spread: f64 = 0.0;
            for start in [(0.0, 0.0), (0.5 * gm, 0.5 * dm)] {
                let other = self.solve_from(start)?;
                spread = spread
                    .max((other.gamma - best.gamma).abs())
                    .max((other.delta - best.delta).abs());
                if other.residual < best.residual {
                    best = FixedPoint {
                        iterations: best.iterations,
                        ..other
                    };
                }
            }
            if spread > RESTART_TOL {
                return Err(Error::NoConvergence {
                    solver: "large-system fixed point",
                    iterations: best.iterations,
                    residual: best.residual,
                    context: format!(" (restarts disagree by {spread:e})"),
                });
            }
            best.restart_spread = spread;
        }
        Ok(best)
    }

    /// The approximated log-det in bits at a solution.
    fn value(&self, fp: &FixedPoint) -> f64 {
        let a: f64 = self
            .w
            .iter()
            .map(|&w| (self.ce * w * fp.gamma).ln_1p())
            .sum();
        let b: f64 = self
            .d_r
            .iter()
            .map(|&d| (self.ce * d * fp.delta).ln_1p())
            .sum();
        (a + b - self.ce * self.norm * fp.gamma * fp.delta) * LOG2_E
    }
}

fn check_inputs(w: &[f64], d_r: &[f64], eta: f64, n_t: usize) -> Result<()> {
    if n_t == 0 {
        return Err(domain("n_t must be positive"));
    }
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(domain(format!(
            "eta must be finite and nonnegative, got {eta}"
        )));
    }
    if w.iter().chain(d_r).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(domain("eigenvalues must be finite and nonnegative"));
    }
    Ok(())
}

fn single_system<'a>(w: &'a [f64], d_r: &'a [f64], eta: f64, n_t: usize) -> System<'a> {
    System {
        w,
        d_r,
        ce: eta,
        norm: n_t as f64,
    }
}

fn joint_system<'a>(w: &'a [f64], d_r: &'a [f64], eta: f64, n_t: usize) -> System<'a> {
    System {
        w,
        d_r,
        ce: 2.0 * eta,
        norm: 2.0 * n_t as f64,
    }
}

/// Single-user system. `w` holds the power-weighted transmit eigenvalues of
/// the user. Restarts from three initial points and checks agreement.
pub fn solve_fp_single(w: &[f64], d_r: &[f64], eta: f64, n_t: usize) -> Result<FixedPoint> {
    check_inputs(w, d_r, eta, n_t)?;
    single_system(w, d_r, eta, n_t).solve(true)
}

/// Two-user system with `1/(2 n_t)` normalisation and `2η` coupling.
pub fn solve_fp_joint(
    w_1: &[f64],
    w_2: &[f64],
    d_r: &[f64],
    eta: f64,
    n_t: usize,
) -> Result<FixedPoint> {
    let w: Vec<f64> = w_1.iter().chain(w_2).copied().collect();
    check_inputs(&w, d_r, eta, n_t)?;
    joint_system(&w, d_r, eta, n_t).solve(true)
}

/// Approximated single-user log-det (bits) and its fixed point.
pub fn approx_logdet_single(
    w: &[f64],
    d_r: &[f64],
    eta: f64,
    n_t: usize,
) -> Result<(f64, FixedPoint)> {
    check_inputs(w, d_r, eta, n_t)?;
    let sys = single_system(w, d_r, eta, n_t);
    let fp = sys.solve(false)?;
    Ok((sys.value(&fp), fp))
}

/// Approximated two-user log-det (bits) and its fixed point.
pub fn approx_logdet_joint(
    w_1: &[f64],
    w_2: &[f64],
    d_r: &[f64],
    eta: f64,
    n_t: usize,
) -> Result<(f64, FixedPoint)> {
    let w: Vec<f64> = w_1.iter().chain(w_2).copied().collect();
    check_inputs(&w, d_r, eta, n_t)?;
    let sys = joint_system(&w, d_r, eta, n_t);
    let fp = sys.solve(false)?;
    Ok((sys.value(&fp), fp))
}

/// `scale · d_k^T(i)` for every transmit eigenvalue of `user`.
pub fn weighted_eigs(scenario: &ChannelScenario, user: User, scale: f64) -> Vec<f64> {
    scenario
        .tx_eigenvalues(user)
        .iter()
        .map(|d| scale * d)
        .collect()
}

/// `P(i) · d_k^T(i)`.
pub fn loaded_eigs(
    scenario: &ChannelScenario,
    user: User,
    loading: &EigenLoading,
) -> Result<Vec<f64>> {
    let d = scenario.tx_eigenvalues(user);
    if d.len() != loading.len() {
        return Err(domain(format!(
            "loading of user {} has {} entries, expected {}",
            user.index() + 1,
            loading.len(),
            d.len()
        )));
    }
    Ok(d.iter().zip(loading.powers()).map(|(d, p)| d * p).collect())
}

/// Per-state rates of one state from the weighted eigenvalues of both users:
/// the user decoded last gets the single-user value, the other the joint
/// value minus it.
fn state_rates(scenario: &ChannelScenario, state: State, w: [&[f64]; 2]) -> Result<[f64; 2]> {
    let d_r = scenario.rx_eigenvalues();
    let (eta, n_t) = (scenario.eta(), scenario.n_t());
    let last = state.last_decoded();
    let (single, _) = approx_logdet_single(w[last.index()], d_r, eta, n_t)?;
    let (joint, _) = approx_logdet_joint(w[0], w[1], d_r, eta, n_t)?;
    let mut r = [0.0; 2];
    r[last.index()] = single;
    r[last.other().index()] = joint - single;
    Ok(r)
}

/// Approximated rates and utilities of a TPA profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpaApprox {
    /// `rates[s][k]` approximates `R_k^(s)`.
    pub rates: [[f64; 2]; 2],
    pub utilities: [f64; 2],
}

impl TpaApprox {
    pub fn sum_rate(&self) -> f64 {
        self.utilities[0] + self.utilities[1]
    }
}

/// Approximated per-state rates and utilities at `(α_1, α_2)`.
pub fn approx_rates_tpa(
    scenario: &ChannelScenario,
    alpha_1: f64,
    alpha_2: f64,
) -> Result<TpaApprox> {
    let profile = TpaProfile::new(scenario.p(), alpha_1, alpha_2)?;
    let p = scenario.p();
    let mut rates = [[0.0; 2]; 2];
    for state in State::BOTH {
        let a = profile.state_fractions(state);
        let w1 = weighted_eigs(scenario, User::One, a[0] * scenario.power(User::One));
        let w2 = weighted_eigs(scenario, User::Two, a[1] * scenario.power(User::Two));
        rates[state.index()] = state_rates(scenario, state, [&w1, &w2])?;
    }
    let utilities = [0, 1].map(|k| p * rates[0][k] + (1.0 - p) * rates[1][k]);
    Ok(TpaApprox { rates, utilities })
}

/// `∂ũ_k/∂α_k` of the approximated TPA utility.
///
/// The user's own fraction enters the state where it is decoded last through
/// the single-user system and, via the saturated constraint, the other state
/// through the joint system with slope `−p_k / (1 − p_k)`.
pub fn tpa_utility_derivative(
    scenario: &ChannelScenario,
    user: User,
    alpha_1: f64,
    alpha_2: f64,
) -> Result<f64> {
    let profile = TpaProfile::new(scenario.p(), alpha_1, alpha_2)?;
    let d_r = scenario.rx_eigenvalues();
    let (eta, n_t) = (scenario.eta(), scenario.n_t());
    let own_state = match user {
        User::One => State::One,
        User::Two => State::Two,
    };
    let other_state = match user {
        User::One => State::Two,
        User::Two => State::One,
    };
    let p_own = scenario.state_probability(own_state);
    let power = scenario.power(user);
    let d = scenario.tx_eigenvalues(user);

    let sum_term = |a: f64, cg: f64| -> f64 {
        d.iter()
            .map(|&di| power * di * cg / (1.0 + a * power * di * cg))
            .sum::<f64>()
    };

    let mut deriv = 0.0;
    if p_own > 0.0 {
        let a = profile.state_fractions(own_state)[user.index()];
        let w = weighted_eigs(scenario, user, a * power);
        let (_, fp) = approx_logdet_single(&w, d_r, eta, n_t)?;
        deriv += p_own * sum_term(a, eta * fp.gamma);
    }
    if p_own > 0.0 && p_own < 1.0 {
        let a = profile.state_fractions(other_state);
        let w1 = weighted_eigs(scenario, User::One, a[0] * scenario.power(User::One));
        let w2 = weighted_eigs(scenario, User::Two, a[1] * scenario.power(User::Two));
        let (_, fp) = approx_logdet_joint(&w1, &w2, d_r, eta, n_t)?;
        deriv -= p_own * sum_term(a[user.index()], 2.0 * eta * fp.gamma);
    }
    Ok(deriv * LOG2_E)
}

/// Approximated rates `[r_1, r_2]` of one state under eigen-loadings.
pub fn approx_rates_spa(
    scenario: &ChannelScenario,
    loading_1: &EigenLoading,
    loading_2: &EigenLoading,
    state: State,
) -> Result<[f64; 2]> {
    let w1 = loaded_eigs(scenario, User::One, loading_1)?;
    let w2 = loaded_eigs(scenario, User::Two, loading_2)?;
    state_rates(scenario, state, [&w1, &w2])
}

/// Positive root of `(1/(factor n_t)) Σ_j d_R(j) / (γ + d_R(j)) = 1`.
pub fn high_snr_gamma(d_r: &[f64], n_t: usize, factor: usize) -> Result<f64> {
    if n_t == 0 || !(factor == 1 || factor == 2) {
        return Err(domain("high-SNR equation needs n_t > 0 and factor 1 or 2"));
    }
    if d_r.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(domain("receive eigenvalues must be finite and nonnegative"));
    }
    let norm = (factor * n_t) as f64;
    let active = d_r.iter().filter(|&&d| d > 0.0).count();
    // The left side decreases from active/norm at 0+ to 0.
    if active as f64 <= norm {
        return Err(domain(format!(
            "high-SNR equation has no positive root: {active} nonzero receive eigenvalues \
             for normalisation {norm}"
        )));
    }
    let lhs = |g: f64| d_r.iter().map(|&d| d / (g + d)).sum::<f64>() / norm;
    let (mut lo, mut hi) = (0.0, d_r.iter().sum::<f64>() / norm);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lhs(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Low-SNR utilities `(1/n_t) η P_k Σ d_R Σ d_k^T log2(e)`; they depend on
/// neither the fractions nor `p`.
pub fn low_snr_rates(scenario: &ChannelScenario, _alpha_1: f64, _alpha_2: f64) -> [f64; 2] {
    let sum_r: f64 = scenario.rx_eigenvalues().iter().sum();
    User::BOTH.map(|k| {
        let sum_t: f64 = scenario.tx_eigenvalues(k).iter().sum();
        scenario.eta() * scenario.power(k) * sum_r * sum_t * LOG2_E / scenario.n_t() as f64
    })
}
