use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::games::TpaProfile;
use crate::largesys::approx_rates_tpa;
use crate::matcore::{
    complex_gaussian, draw_channels, hermitian_eig, logdet_ipm, trial_seed, CMat, ChannelScenario,
    State, User,
};
use crate::rates::{monte_carlo_draws, McConfig};

/// Slack below zero tolerated before an inequality counts as violated.
pub const SLACK: f64 = 1e-10;

/// Outcome of one randomized inequality check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    /// Smallest value of the quantity required to be nonnegative.
    pub worst_margin: f64,
    /// Description of the worst violating instance, if any.
    pub counterexample: Option<String>,
}

impl CheckReport {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            instances: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            counterexample: None,
        }
    }

    fn record(&mut self, margin: f64, violated: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if violated {
            self.violations += 1;
        }
        if margin < self.worst_margin {
            self.worst_margin = margin;
            if violated {
                self.counterexample = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    let s = (1.0 / cols as f64).sqrt();
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng) * s)
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let x = random_matrix(rng, n, n);
    x.gram()
}

fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let mut m = random_psd(rng, n);
    let eps = rng.random_range(0.01..1.0);
    m.add_scaled(eps, &CMat::identity(n));
    m
}

fn inv(m: &CMat) -> CMat {
    m.inverse_hpd().expect("positive definite by construction")
}

/// `Tr{(A″−A′)[(I+A′)⁻¹−(I+A″)⁻¹] + (B″−B′)[(I+B′+A′)⁻¹−(I+B″+A″)⁻¹]}`.
pub fn pair_trace(a1: &CMat, a2: &CMat, b1: &CMat, b2: &CMat) -> f64 {
    let id = CMat::identity(a1.rows());
    let m = (a2 - a1).trace_product(&(&inv(&(&id + a1)) - &inv(&(&id + a2))));
    let n = (b2 - b1).trace_product(&(&inv(&(&(&id + b1) + a1)) - &inv(&(&(&id + b2) + a2))));
    (m + n).re
}

/// `Tr[(X − Y)(Y⁻¹ − X⁻¹)]` for positive definite `X`, `Y`.
pub fn lemma3_trace(x: &CMat, y: &CMat) -> f64 {
    (x - y).trace_product(&(&inv(y) - &inv(x))).re
}

/// `Tr(XY) − Σ_i λ_X↓(i) λ_Y↓(n − i + 1)`.
pub fn ordered_eigen_gap(x: &CMat, y: &CMat) -> Result<f64> {
    let lx = hermitian_eig(x)?.values;
    let ly = hermitian_eig(y)?.values;
    let n = lx.len();
    let bound: f64 = (0..n).map(|i| lx[i] * ly[n - 1 - i]).sum();
    Ok(x.trace_product(y).re - bound)
}

/// Randomized checks of the trace inequalities behind uniqueness, each on
/// `trial_count` instances of dimension `dim`.
pub fn verify_trace_lemmas(trial_count: usize, dim: usize, seed: u64) -> Result<Vec<CheckReport>> {
    if dim == 0 {
        return Err(domain("lemma checks need dim >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diago = CheckReport::new("scalar-multiple pair trace Tr(M + N) >= 0");
    let mut product = CheckReport::new("Tr(MN) >= 0 for nonnegative M, N");
    let mut lemma3 = CheckReport::new("Tr[(X - Y)(Y^-1 - X^-1)] >= 0");
    let mut ordered = CheckReport::new("Tr(XY) >= sum of oppositely ordered eigenvalue products");
    for _ in 0..trial_count {
        let g1 = random_psd(&mut rng, dim);
        let g2 = random_psd(&mut rng, dim);
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..3.0));
        let t = pair_trace(
            &g1.scale(c[0]),
            &g1.scale(c[1]),
            &g2.scale(c[2]),
            &g2.scale(c[3]),
        );
        diago.record(t, t < -SLACK, || {
            format!(
                "a' = {}, a'' = {}, b' = {}, b'' = {}",
                c[0], c[1], c[2], c[3]
            )
        });

        let m = random_psd(&mut rng, dim);
        let n = random_psd(&mut rng, dim);
        let t = m.trace_product(&n).re;
        product.record(t, t < -SLACK, || format!("M = {m:?}, N = {n:?}"));

        let x = random_pd(&mut rng, dim);
        let y = random_pd(&mut rng, dim);
        let t = lemma3_trace(&x, &y);
        lemma3.record(t, t < -SLACK, || format!("X = {x:?}, Y = {y:?}"));

        let x = random_psd(&mut rng, dim);
        let y = random_psd(&mut rng, dim);
        let t = ordered_eigen_gap(&x, &y)?;
        ordered.record(t, t < -SLACK, || format!("X = {x:?}, Y = {y:?}"));
    }
    Ok(vec![diago, product, lemma3, ordered])
}

/// Per-state terms `[T^(1), T^(2)]` of the diagonally strict concavity
/// condition for one channel draw and two TPA profiles.
pub fn dsc_terms(
    g: [&CMat; 2],
    rho: [f64; 2],
    p: f64,
    first: [f64; 2],
    second: [f64; 2],
) -> [f64; 2] {
    let q = 1.0 - p;
    // State 1: user 1 decoded last with fraction α_1, user 2 at (1 − p̄ α_2)/p.
    let t1 = pair_trace(
        &g[0].scale(rho[0] * first[0]),
        &g[0].scale(rho[0] * second[0]),
        &g[1].scale(rho[1] * (1.0 - q * first[1]) / p),
        &g[1].scale(rho[1] * (1.0 - q * second[1]) / p),
    );
    // State 2: roles swapped.
    let t2 = pair_trace(
        &g[1].scale(rho[1] * first[1]),
        &g[1].scale(rho[1] * second[1]),
        &g[0].scale(rho[0] * (1.0 - p * first[0]) / q),
        &g[0].scale(rho[0] * (1.0 - p * second[0]) / q),
    );
    [t1, t2]
}

/// Checks `C = p T^(1) + (1 − p) T^(2) > 0` and each `T^(s) ≥ 0` on
/// `trial_count` random draws and random distinct pairs of TPA profiles.
pub fn verify_dsc(
    scenario: &ChannelScenario,
    trial_count: usize,
    seed: u64,
) -> Result<CheckReport> {
    let p = scenario.p();
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("strict concavity check needs p in (0, 1)"));
    }
    let rho = [
        scenario.eta() * scenario.power(User::One),
        scenario.eta() * scenario.power(User::Two),
    ];
    let upper = [
        TpaProfile::upper(p, User::One),
        TpaProfile::upper(p, User::Two),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut report = CheckReport::new("diagonally strict concavity C > 0");
    for t in 0..trial_count {
        let draw = draw_channels(scenario, trial_seed(seed, t as u64));
        let g = [draw.h[0].gram(), draw.h[1].gram()];
        let first: [f64; 2] = std::array::from_fn(|k| rng.random_range(0.0..=upper[k]));
        let second: [f64; 2] = std::array::from_fn(|k| rng.random_range(0.0..=upper[k]));
        let [t1, t2] = dsc_terms([&g[0], &g[1]], rho, p, first, second);
        let c = p * t1 + (1.0 - p) * t2;
        let violated = t1 < -SLACK || t2 < -SLACK || c < -SLACK;
        report.record(c.min(t1).min(t2), violated, || {
            format!("trial {t}: alpha' = {first:?}, alpha'' = {second:?}, T1 = {t1}, T2 = {t2}")
        });
    }
    Ok(report)
}

/// Negative second differences of each user's utility along its own
/// fraction, opponent at 1: the approximated utilities on a grid of step
/// 0.01 and the Monte Carlo utilities (shared draws) on a grid of step 0.1.
pub fn verify_concavity(scenario: &ChannelScenario, mc: &McConfig) -> Result<Vec<CheckReport>> {
    let p = scenario.p();
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("concavity check needs p in (0, 1)"));
    }
    let mut reports = Vec::new();
    for user in User::BOTH {
        let k = user.index();
        let upper = TpaProfile::upper(p, user);
        let profile_at = |a: f64| match user {
            User::One => TpaProfile::new(p, a, 1.0),
            User::Two => TpaProfile::new(p, 1.0, a),
        };

        let mut approx = CheckReport::new(format!(
            "approximated utility of user {} strictly concave",
            k + 1
        ));
        let grid = own_grid(upper, 0.01);
        let values = grid
            .iter()
            .map(|&a| {
                let prof = profile_at(a)?;
                Ok(
                    approx_rates_tpa(scenario, prof.alpha(User::One), prof.alpha(User::Two))?
                        .utilities[k],
                )
            })
            .collect::<Result<Vec<f64>>>()?;
        for (i, w) in values.windows(3).enumerate() {
            let d2 = w[0] - 2.0 * w[1] + w[2];
            approx.record(-d2, d2 >= 0.0, || {
                format!("alpha = {}, second difference {d2}", grid[i + 1])
            });
        }
        reports.push(approx);

        let mut exact = CheckReport::new(format!(
            "Monte Carlo utility of user {} strictly concave",
            k + 1
        ));
        let grid = own_grid(upper, 0.1);
        let profiles = grid
            .iter()
            .map(|&a| profile_at(a))
            .collect::<Result<Vec<_>>>()?;
        let rho = [
            scenario.eta() * scenario.power(User::One),
            scenario.eta() * scenario.power(User::Two),
        ];
        let est = monte_carlo_draws(scenario, mc, profiles.len(), |draw, out| {
            let g = [draw.h[0].gram(), draw.h[1].gram()];
            for (slot, prof) in out.iter_mut().zip(&profiles) {
                *slot = draw_utilities(&g, rho, prof)[k];
            }
        });
        for (i, w) in est.windows(3).enumerate() {
            let d2 = w[0].mean - 2.0 * w[1].mean + w[2].mean;
            exact.record(-d2, d2 >= 0.0, || {
                format!("alpha = {}, second difference {d2}", grid[i + 1])
            });
        }
        reports.push(exact);
    }
    Ok(reports)
}

fn own_grid(upper: f64, step: f64) -> Vec<f64> {
    let n = (upper / step).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    if g.last().is_some_and(|&x| upper - x > 1e-12) {
        g.push(upper);
    }
    g
}

/// Utilities `[u_1, u_2]` of a TPA profile for one draw, from the Gram
/// matrices `H_k H_k^H`.
pub(crate) fn draw_utilities(g: &[CMat; 2], rho: [f64; 2], profile: &TpaProfile) -> [f64; 2] {
    let p = profile.p();
    let mut u = [0.0; 2];
    for state in State::BOTH {
        let pr = if state == State::One { p } else { 1.0 - p };
        if pr == 0.0 {
            continue;
        }
        let a = profile.state_fractions(state);
        let k1 = g[0].scale(rho[0] * a[0]);
        let k2 = g[1].scale(rho[1] * a[1]);
        let joint = logdet_ipm(&(&k1 + &k2));
        let last = state.last_decoded();
        let single = logdet_ipm(if last == User::One { &k1 } else { &k2 });
        u[last.index()] += pr * single;
        u[last.other().index()] += pr * (joint - single);
    }
    u
}
