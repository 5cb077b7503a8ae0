//! Ergodic rates by Monte Carlo: log-det expectations, SIC and SUD rate
//! pairs, and the coordination-averaged utilities.
//!
//! Every estimator draws trial `t` from the substream `master_seed ^ t`, so
//! two calls with the same [`McConfig`] see the same channel realizations
//! (common random numbers). Trials are grouped in fixed chunks and chunk
//! statistics are merged in a fixed pairwise tree, which makes the result
//! depend on the trial count only, never on the thread count.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::matcore::{
    draw_channels, logdet_ipm, psd_sqrt, trial_seed, CMat, ChannelDraw, ChannelScenario,
    HermitianMatrix, State, User,
};

/// Default trial count for figure reproduction.
pub const FIGURE_TRIALS: usize = 20_000;
/// Default trial count for unit tests.
pub const TEST_TRIALS: usize = 2_000;

const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: usize,
    pub master_seed: u64,
}

impl McConfig {
    pub fn new(trials: usize, master_seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(domain("Monte Carlo trial count must be at least 1"));
        }
        Ok(Self {
            trials,
            master_seed,
        })
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(mean: f64) -> Self {
        Self { mean, stderr: 0.0 }
    }
}

#[derive(Clone)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0.0 {
            return b;
        }
        let n = a.n + b.n;
        let mut mean = a.mean;
        let mut m2 = a.m2;
        for i in 0..mean.len() {
            let delta = b.mean[i] - mean[i];
            mean[i] += delta * b.n / n;
            m2[i] += b.m2[i] + delta * delta * a.n * b.n / n;
        }
        Moments { n, mean, m2 }
    }
}

fn pairwise_merge(mut parts: Vec<Moments>) -> Moments {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => Moments::merge(a, b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop().expect("at least one chunk")
}

/// Runs `trials` evaluations of `f` and returns a mean and standard error
/// per output slot. `f` receives the trial seed and a zeroed buffer of
/// length `width`.
pub fn monte_carlo<F>(mc: &McConfig, width: usize, f: F) -> Vec<Estimate>
where
    F: Fn(u64, &mut [f64]) + Sync,
{
    let trials = mc.trials;
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments {
                n: 0.0,
                mean: vec![0.0; width],
                m2: vec![0.0; width],
            };
            let mut buf = vec![0.0; width];
            for t in (c * CHUNK)..((c + 1) * CHUNK).min(trials) {
                buf.iter_mut().for_each(|x| *x = 0.0);
                f(trial_seed(mc.master_seed, t as u64), &mut buf);
                m.n += 1.0;
                for i in 0..width {
                    let delta = buf[i] - m.mean[i];
                    m.mean[i] += delta / m.n;
                    m.m2[i] += delta * (buf[i] - m.mean[i]);
                }
            }
            m
        })
        .collect();
    let total = pairwise_merge(parts);
    (0..width)
        .map(|i| Estimate {
            mean: total.mean[i],
            stderr: if total.n > 1.0 {
                (total.m2[i] / (total.n - 1.0) / total.n).sqrt()
            } else {
                f64::NAN
            },
        })
        .collect()
}

/// Monte Carlo over channel draws of a scenario.
pub fn monte_carlo_draws<F>(
    scenario: &ChannelScenario,
    mc: &McConfig,
    width: usize,
    f: F,
) -> Vec<Estimate>
where
    F: Fn(&ChannelDraw, &mut [f64]) + Sync,
{
    monte_carlo(mc, width, |seed, out| {
        f(&draw_channels(scenario, seed), out)
    })
}

/// Transmit covariances `(Q_1, Q_2)` for one coordination state.
///
/// Each covariance is stored together with a factor `F` with `Q = F F^H`,
/// so the received covariance `H Q H^H` is a Gram matrix.
#[derive(Debug, Clone)]
pub struct PrecodingPair {
    q: [HermitianMatrix; 2],
    factor: [CMat; 2],
}

impl PrecodingPair {
    pub fn new(q1: HermitianMatrix, q2: HermitianMatrix) -> Result<Self> {
        if q1.dim() != q2.dim() {
            return Err(domain("precoders have different dimensions"));
        }
        let f1 = psd_sqrt(&q1)?.into_cmat();
        let f2 = psd_sqrt(&q2)?.into_cmat();
        Ok(Self {
            q: [q1, q2],
            factor: [f1, f2],
        })
    }

    /// Builds the pair from factors, `Q_k = F_k F_k^H`.
    pub fn from_factors(f1: CMat, f2: CMat) -> Result<Self> {
        if f1.rows() != f2.rows() {
            return Err(domain("precoder factors have different dimensions"));
        }
        let q1 = HermitianMatrix::new(f1.gram())?;
        let q2 = HermitianMatrix::new(f2.gram())?;
        Ok(Self {
            q: [q1, q2],
            factor: [f1, f2],
        })
    }

    /// `Q_k = a_k I` (uniform spatial allocation).
    pub fn scaled_identity(n_t: usize, a1: f64, a2: f64) -> Result<Self> {
        if !(a1 >= 0.0 && a2 >= 0.0) {
            return Err(domain("scaled-identity precoders need nonnegative scales"));
        }
        let id = CMat::identity(n_t);
        Self::from_factors(id.scale(a1.sqrt()), id.scale(a2.sqrt()))
    }

    pub fn q(&self, user: User) -> &HermitianMatrix {
        &self.q[user.index()]
    }

    pub fn dim(&self) -> usize {
        self.q[0].dim()
    }

    fn check_dims(&self, scenario: &ChannelScenario) -> Result<()> {
        if self.dim() != scenario.n_t() {
            return Err(domain(format!(
                "precoder dimension {} does not match n_t = {}",
                self.dim(),
                scenario.n_t()
            )));
        }
        Ok(())
    }

    /// `η H_k Q_k H_k^H` for one draw.
    pub(crate) fn received(&self, draw: &ChannelDraw, user: User, eta: f64) -> CMat {
        let k = user.index();
        (&draw.h[k] * &self.factor[k]).gram().scale(eta)
    }
}

/// Per-user rates in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    pub r: [Estimate; 2],
}

impl RatePair {
    pub fn rate(&self, user: User) -> Estimate {
        self.r[user.index()]
    }
}

/// `E log2|I + η Σ_k H_k Q_k H_k^H|` over the supplied (non-absent) precoders.
pub fn ergodic_logdet(
    scenario: &ChannelScenario,
    q1: Option<&HermitianMatrix>,
    q2: Option<&HermitianMatrix>,
    mc: &McConfig,
) -> Result<Estimate> {
    let n_t = scenario.n_t();
    let mut factors: Vec<(usize, CMat)> = Vec::new();
    for (k, q) in [q1, q2].into_iter().enumerate() {
        if let Some(q) = q {
            if q.dim() != n_t {
                return Err(domain(format!(
                    "precoder of user {} has dimension {}, expected {n_t}",
                    k + 1,
                    q.dim()
                )));
            }
            factors.push((k, psd_sqrt(q)?.into_cmat()));
        }
    }
    let eta = scenario.eta();
    let n_r = scenario.n_r();
    Ok(monte_carlo_draws(scenario, mc, 1, |draw, out| {
        let mut acc = CMat::zeros(n_r, n_r);
        for (k, f) in &factors {
            acc.add_scaled(eta, &(&draw.h[*k] * f).gram());
        }
        out[0] = logdet_ipm(&acc);
    })[0])
}

/// Per-draw SIC rates for one state: `[r_1, r_2]`. The user decoded last
/// gets its single-user rate, the other the joint rate minus that.
fn sic_rates_draw(draw: &ChannelDraw, state: State, pair: &PrecodingPair, eta: f64) -> [f64; 2] {
    let k1 = pair.received(draw, User::One, eta);
    let k2 = pair.received(draw, User::Two, eta);
    let joint = logdet_ipm(&(&k1 + &k2));
    let last = state.last_decoded();
    let single = logdet_ipm(if last == User::One { &k1 } else { &k2 });
    let mut r = [0.0; 2];
    r[last.index()] = single;
    r[last.other().index()] = joint - single;
    r
}

/// SIC rate pair for decoding state `s`.
pub fn sic_rate_pair(
    scenario: &ChannelScenario,
    state: State,
    pair: &PrecodingPair,
    mc: &McConfig,
) -> Result<RatePair> {
    pair.check_dims(scenario)?;
    let eta = scenario.eta();
    let est = monte_carlo_draws(scenario, mc, 2, |draw, out| {
        out.copy_from_slice(&sic_rates_draw(draw, state, pair, eta));
    });
    Ok(RatePair {
        r: [est[0], est[1]],
    })
}

/// Single-user decoding: each user treats the other as noise.
pub fn sud_rate_pair(
    scenario: &ChannelScenario,
    pair: &PrecodingPair,
    mc: &McConfig,
) -> Result<RatePair> {
    pair.check_dims(scenario)?;
    let eta = scenario.eta();
    let est = monte_carlo_draws(scenario, mc, 2, |draw, out| {
        let k1 = pair.received(draw, User::One, eta);
        let k2 = pair.received(draw, User::Two, eta);
        let joint = logdet_ipm(&(&k1 + &k2));
        out[0] = joint - logdet_ipm(&k2);
        out[1] = joint - logdet_ipm(&k1);
    });
    Ok(RatePair {
        r: [est[0], est[1]],
    })
}

/// A strategy profile of either game, mapped to per-state precoders.
pub trait PowerProfile {
    /// Checks the game's power constraint, naming the violated one.
    fn check_feasible(&self, scenario: &ChannelScenario) -> Result<()>;

    /// Precoders used in coordination state `state`.
    fn precoders(&self, scenario: &ChannelScenario, state: State) -> Result<PrecodingPair>;
}

/// Exact (Monte Carlo) rates of a profile, all from one set of draws.
#[derive(Debug, Clone, Copy)]
pub struct ProfileRates {
    /// `rates[s][k]` is `R_k^(s)`.
    pub rates: [[Estimate; 2]; 2],
    /// `u_k = p R_k^(1) + (1 - p) R_k^(2)`.
    pub utilities: [Estimate; 2],
    pub sum_rate: Estimate,
    /// Joint log-det per state, `R_1^(s) + R_2^(s)`.
    pub state_sum: [Estimate; 2],
}

pub fn profile_rates(
    scenario: &ChannelScenario,
    profile: &impl PowerProfile,
    mc: &McConfig,
) -> Result<ProfileRates> {
    profile.check_feasible(scenario)?;
    let pairs = [
        profile.precoders(scenario, State::One)?,
        profile.precoders(scenario, State::Two)?,
    ];
    for pair in &pairs {
        pair.check_dims(scenario)?;
    }
    let eta = scenario.eta();
    let p = scenario.p();
    let q = 1.0 - p;
    let est = monte_carlo_draws(scenario, mc, 9, |draw, out| {
        let s1 = sic_rates_draw(draw, State::One, &pairs[0], eta);
        let s2 = sic_rates_draw(draw, State::Two, &pairs[1], eta);
        out[0] = s1[0];
        out[1] = s1[1];
        out[2] = s2[0];
        out[3] = s2[1];
        out[4] = p * s1[0] + q * s2[0];
        out[5] = p * s1[1] + q * s2[1];
        out[6] = p * (s1[0] + s1[1]) + q * (s2[0] + s2[1]);
        out[7] = s1[0] + s1[1];
        out[8] = s2[0] + s2[1];
    });
    Ok(ProfileRates {
        rates: [[est[0], est[1]], [est[2], est[3]]],
        utilities: [est[4], est[5]],
        sum_rate: est[6],
        state_sum: [est[7], est[8]],
    })
}

/// `u_k = p R_k^(1) + (1 - p) R_k^(2)` for a feasible profile.
pub fn utility(
    scenario: &ChannelScenario,
    profile: &impl PowerProfile,
    user: User,
    mc: &McConfig,
) -> Result<Estimate> {
    Ok(profile_rates(scenario, profile, mc)?.utilities[user.index()])
}
