use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cmat::CMat;
use super::hermitian::{clamp_psd, eig_exact_hermitian, psd_sqrt, Eigen, HermitianMatrix};
use crate::error::{domain, Result};

/// Trace normalization tolerance for correlation matrices.
pub const TRACE_TOL: f64 = 1e-9;

/// Index of a user in the two-user MAC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum User {
    One,
    Two,
}

impl User {
    pub const BOTH: [User; 2] = [User::One, User::Two];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            User::One => 0,
            User::Two => 1,
        }
    }

    #[inline]
    pub fn other(self) -> User {
        match self {
            User::One => User::Two,
            User::Two => User::One,
        }
    }
}

impl TryFrom<usize> for User {
    type Error = crate::Error;
    fn try_from(k: usize) -> Result<Self> {
        match k {
            1 => Ok(User::One),
            2 => Ok(User::Two),
            _ => Err(domain(format!("user index must be 1 or 2, got {k}"))),
        }
    }
}

/// Static problem data for the two-user MIMO MAC.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub n_t: usize,
    pub n_r: usize,
    /// Inverse noise power, linear.
    pub eta: f64,
    /// Per-antenna power budgets `[P_1, P_2]`, linear.
    pub powers: [f64; 2],
    pub rx_corr: HermitianMatrix,
    pub tx_corr: [HermitianMatrix; 2],
    /// Probability that user 1 is decoded last.
    pub p: f64,
}

/// A validated scenario with its correlation factors precomputed.
#[derive(Debug, Clone)]
pub struct ChannelScenario {
    spec: ScenarioSpec,
    rx_sqrt: Option<CMat>,
    tx_sqrt: [Option<CMat>; 2],
    rx_eig: Vec<f64>,
    tx_eig: [Eigen; 2],
}

impl ChannelScenario {
    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        let ScenarioSpec {
            n_t,
            n_r,
            eta,
            powers,
            ref rx_corr,
            ref tx_corr,
            p,
        } = spec;
        if n_t == 0 || n_r == 0 {
            return Err(domain("antenna counts must be positive"));
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(domain(format!(
                "eta must be finite and nonnegative, got {eta}"
            )));
        }
        for (k, &pk) in powers.iter().enumerate() {
            if !(pk.is_finite() && pk >= 0.0) {
                return Err(domain(format!(
                    "power of user {} must be nonnegative, got {pk}",
                    k + 1
                )));
            }
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!(
                "coordination probability {p} outside [0, 1]"
            )));
        }
        check_correlation("receive", rx_corr, n_r)?;
        for (k, t) in tx_corr.iter().enumerate() {
            check_correlation(if k == 0 { "transmit 1" } else { "transmit 2" }, t, n_t)?;
        }

        let sqrt_unless_identity = |m: &HermitianMatrix| -> Result<Option<CMat>> {
            if *m.as_cmat() == CMat::identity(m.dim()) {
                Ok(None)
            } else {
                Ok(Some(psd_sqrt(m)?.into_cmat()))
            }
        };
        let rx_sqrt = sqrt_unless_identity(rx_corr)?;
        let tx_sqrt = [
            sqrt_unless_identity(&tx_corr[0])?,
            sqrt_unless_identity(&tx_corr[1])?,
        ];
        let rx_eig = clamp_psd(&eig_exact_hermitian(rx_corr).values)?;
        let mut tx_eig = [
            eig_exact_hermitian(&tx_corr[0]),
            eig_exact_hermitian(&tx_corr[1]),
        ];
        for e in tx_eig.iter_mut() {
            e.values = clamp_psd(&e.values)?;
        }
        Ok(Self {
            spec,
            rx_sqrt,
            tx_sqrt,
            rx_eig,
            tx_eig,
        })
    }

    /// No correlation at either side.
    pub fn uncorrelated(
        n_t: usize,
        n_r: usize,
        eta: f64,
        powers: [f64; 2],
        p: f64,
    ) -> Result<Self> {
        Self::new(ScenarioSpec {
            n_t,
            n_r,
            eta,
            powers,
            rx_corr: HermitianMatrix::identity(n_r),
            tx_corr: [
                HermitianMatrix::identity(n_t),
                HermitianMatrix::identity(n_t),
            ],
            p,
        })
    }

    /// Exponential transmit correlation profiles, no receive correlation.
    pub fn exp_transmit(
        n_t: usize,
        n_r: usize,
        eta: f64,
        powers: [f64; 2],
        t: [f64; 2],
        p: f64,
    ) -> Result<Self> {
        Self::new(ScenarioSpec {
            n_t,
            n_r,
            eta,
            powers,
            rx_corr: HermitianMatrix::identity(n_r),
            tx_corr: [
                super::exp_correlation(n_t, t[0])?,
                super::exp_correlation(n_t, t[1])?,
            ],
            p,
        })
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!(
                "coordination probability {p} outside [0, 1]"
            )));
        }
        let mut s = self.clone();
        s.spec.p = p;
        Ok(s)
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(domain(format!(
                "eta must be finite and nonnegative, got {eta}"
            )));
        }
        let mut s = self.clone();
        s.spec.eta = eta;
        Ok(s)
    }

    pub fn with_powers(&self, powers: [f64; 2]) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.powers = powers;
        Self::new(spec)
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }
    pub fn n_t(&self) -> usize {
        self.spec.n_t
    }
    pub fn n_r(&self) -> usize {
        self.spec.n_r
    }
    pub fn eta(&self) -> f64 {
        self.spec.eta
    }
    pub fn p(&self) -> f64 {
        self.spec.p
    }
    pub fn power(&self, user: User) -> f64 {
        self.spec.powers[user.index()]
    }
    /// Eigenvalues of the receive correlation, descending.
    pub fn rx_eigenvalues(&self) -> &[f64] {
        &self.rx_eig
    }
    /// Eigenvalues of a user's transmit correlation, descending.
    pub fn tx_eigenvalues(&self, user: User) -> &[f64] {
        &self.tx_eig[user.index()].values
    }
    /// Eigenbasis `U_k` of a user's transmit correlation.
    pub fn tx_eigenvectors(&self, user: User) -> &CMat {
        &self.tx_eig[user.index()].vectors
    }
    /// `Pr[S = s]` for the given decoding state.
    pub fn state_probability(&self, state: State) -> f64 {
        match state {
            State::One => self.spec.p,
            State::Two => 1.0 - self.spec.p,
        }
    }
}

fn check_correlation(name: &str, m: &HermitianMatrix, dim: usize) -> Result<()> {
    if m.dim() != dim {
        return Err(domain(format!(
            "{name} correlation has dimension {}, expected {dim}",
            m.dim()
        )));
    }
    let tr = m.real_trace();
    if (tr - dim as f64).abs() > TRACE_TOL {
        return Err(domain(format!(
            "{name} correlation trace {tr} must equal {dim}"
        )));
    }
    clamp_psd(&eig_exact_hermitian(m).values)
        .map_err(|_| domain(format!("{name} correlation is not positive semidefinite")))?;
    Ok(())
}

/// Realization of the coordination signal: which user is decoded last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    /// `S = 1`: user 1 decoded last, sees no interference.
    One,
    /// `S = 2`: user 2 decoded last.
    Two,
}

impl State {
    pub const BOTH: [State; 2] = [State::One, State::Two];

    /// The user decoded last (interference-free) in this state.
    pub fn last_decoded(self) -> User {
        match self {
            State::One => User::One,
            State::Two => User::Two,
        }
    }

    pub fn index(self) -> usize {
        match self {
            State::One => 0,
            State::Two => 1,
        }
    }
}

impl TryFrom<usize> for State {
    type Error = crate::Error;
    fn try_from(s: usize) -> Result<Self> {
        match s {
            1 => Ok(State::One),
            2 => Ok(State::Two),
            _ => Err(domain(format!(
                "coordination state must be 1 or 2, got {s}"
            ))),
        }
    }
}

/// One fading realization `H_k = R^{1/2} Θ_k T_k^{1/2}` for both users.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub h: [CMat; 2],
    pub seed: u64,
}

/// Per-trial seed for Monte Carlo substreams.
#[inline]
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    master ^ trial
}

/// Draws both channel matrices; a pure function of `(scenario, seed)`.
pub fn draw_channels(scenario: &ChannelScenario, seed: u64) -> ChannelDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_t = scenario.n_t();
    let n_r = scenario.n_r();
    let sigma = (0.5 / n_t as f64).sqrt();
    let mut draw_one = |k: usize| {
        let theta = CMat::from_fn(n_r, n_t, |_, _| complex_gaussian(&mut rng) * sigma);
        let left = match &scenario.rx_sqrt {
            Some(r) => r * &theta,
            None => theta,
        };
        match &scenario.tx_sqrt[k] {
            Some(t) => &left * t,
            None => left,
        }
    };
    let h1 = draw_one(0);
    let h2 = draw_one(1);
    ChannelDraw { h: [h1, h2], seed }
}

/// Standard complex Gaussian with unit-variance real and imaginary parts
/// (Box-Muller on two uniforms).
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = std::f64::consts::TAU * u2;
    Complex64::new(r * phi.cos(), r * phi.sin())
}
