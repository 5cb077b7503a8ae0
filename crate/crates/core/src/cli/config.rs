//! Scenario files.
//!
//! ```toml
//! [channel]
//! n_t = 4
//! n_r = 4
//! snr = "5 dB"                 # number (linear) or "X dB" / "X lin"
//! powers = [1, "10 lin"]
//! rx_correlation = "identity"  # default
//! tx_correlation = [{ exponential = 0.4 }, { matrix = [[1, 0.3], [0.3, 1]] }]
//!
//! [game]
//! kind = "tpa"                 # "tpa" (default) or "spa"
//! p_step = 0.05                # or `p = 0.5`, or `p_grid = [0, 0.5, 1]`
//!
//! [mc]
//! trials = 20000               # default
//! seed = 1                     # default
//! threads = 0                  # 0 uses every core
//!
//! [solver]
//! tolerance = 1e-10            # default
//! max_rounds = 500             # default
//! ```
//!
//! Only one of `p`, `p_grid`, `p_step` may be given; with none the grid is
//! `0, 0.05, …, 1`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::uniform_grid;
use crate::games::{DEFAULT_MAX_ROUNDS, DEFAULT_TOLERANCE};
use crate::matcore::{exp_correlation, CMat, ChannelScenario, HermitianMatrix, ScenarioSpec};
use crate::rates::{McConfig, FIGURE_TRIALS};

use super::CliError;

/// A linear value, or a string with an explicit `dB` or `lin` unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Linear(f64),
    Text(String),
}

impl Quantity {
    pub fn linear(&self) -> Result<f64, CliError> {
        let bad = || {
            CliError::Config(format!(
                "cannot read {self:?} as a quantity; use a number, \"X dB\" or \"X lin\""
            ))
        };
        let v = match self {
            Quantity::Linear(v) => *v,
            Quantity::Text(s) => {
                let s = s.trim();
                let (num, unit) = s
                    .find(|c: char| c.is_ascii_alphabetic())
                    .map(|i| s.split_at(i))
                    .ok_or_else(bad)?;
                let x: f64 = num.trim().parse().map_err(|_| bad())?;
                match unit.to_ascii_lowercase().as_str() {
                    "db" => 10f64.powf(x / 10.0),
                    "lin" => x,
                    _ => return Err(bad()),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad())
        }
    }
}

/// Receive or transmit correlation matrix.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correlation {
    #[default]
    Identity,
    /// `t^{|i−j|}`.
    Exponential(f64),
    /// Real symmetric matrix, row by row.
    Matrix(Vec<Vec<f64>>),
}

impl Correlation {
    fn build(&self, n: usize, what: &str) -> Result<HermitianMatrix, CliError> {
        let wrap = |e: crate::Error| CliError::Config(format!("{what} correlation: {e}"));
        match self {
            Correlation::Identity => Ok(HermitianMatrix::identity(n)),
            Correlation::Exponential(t) => exp_correlation(n, *t).map_err(wrap),
            Correlation::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::Config(format!(
                        "{what} correlation must be {n}x{n}"
                    )));
                }
                HermitianMatrix::new(CMat::from_real_rows(rows).map_err(wrap)?).map_err(wrap)
            }
        }
    }
}

fn identity_pair() -> [Correlation; 2] {
    [Correlation::Identity, Correlation::Identity]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub n_t: usize,
    pub n_r: usize,
    pub snr: Quantity,
    pub powers: [Quantity; 2],
    #[serde(default)]
    pub rx_correlation: Correlation,
    #[serde(default = "identity_pair")]
    pub tx_correlation: [Correlation; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    #[default]
    Tpa,
    Spa,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    #[serde(default)]
    pub kind: GameKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_step: Option<f64>,
}

fn default_trials() -> usize {
    FIGURE_TRIALS
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub threads: usize,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            seed: default_seed(),
            threads: 0,
        }
    }
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_rounds() -> usize {
    DEFAULT_MAX_ROUNDS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_rounds")]
    pub max_rounds: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            max_rounds: default_rounds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub channel: ChannelSection,
    #[serde(default)]
    pub game: GameSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub solver: SolverSection,
}

impl ScenarioConfig {
    /// Parses and validates a scenario document.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<(), CliError> {
        self.scenario()?;
        self.mc_config()?;
        let s = &self.solver;
        if !(s.tolerance.is_finite() && s.tolerance > 0.0) {
            return Err(CliError::Config(format!(
                "solver.tolerance must be positive, got {}",
                s.tolerance
            )));
        }
        if s.max_rounds == 0 {
            return Err(CliError::Config(
                "solver.max_rounds must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Coordination probabilities to evaluate.
    pub fn p_grid(&self) -> Result<Vec<f64>, CliError> {
        let g = &self.game;
        let grid = match (g.p, &g.p_grid, g.p_step) {
            (None, None, None) => uniform_grid(0.05),
            (Some(p), None, None) => vec![p],
            (None, Some(grid), None) => grid.clone(),
            (None, None, Some(step)) => {
                if !(step > 0.0 && step <= 1.0) {
                    return Err(CliError::Config(format!(
                        "game.p_step must be in (0, 1], got {step}"
                    )));
                }
                uniform_grid(step)
            }
            _ => {
                return Err(CliError::Config(
                    "give only one of game.p, game.p_grid, game.p_step".into(),
                ))
            }
        };
        if grid.is_empty()
            || grid.iter().any(|p| !(0.0..=1.0).contains(p))
            || grid.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(CliError::Config(
                "coordination probabilities must be strictly increasing within [0, 1]".into(),
            ));
        }
        Ok(grid)
    }

    /// The channel, with `p` at the first grid point.
    pub fn scenario(&self) -> Result<ChannelScenario, CliError> {
        let c = &self.channel;
        let spec = ScenarioSpec {
            n_t: c.n_t,
            n_r: c.n_r,
            eta: c.snr.linear()?,
            powers: [c.powers[0].linear()?, c.powers[1].linear()?],
            rx_corr: c.rx_correlation.build(c.n_r, "receive")?,
            tx_corr: [
                c.tx_correlation[0].build(c.n_t, "transmit 1")?,
                c.tx_correlation[1].build(c.n_t, "transmit 2")?,
            ],
            p: self.p_grid()?[0],
        };
        ChannelScenario::new(spec).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn mc_config(&self) -> Result<McConfig, CliError> {
        McConfig::new(self.mc.trials, self.mc.seed)
            .map_err(|e| CliError::Config(format!("mc: {e}")))
    }

    /// Same scenario with every quantity linear and the grid explicit.
    pub fn effective(&self) -> Result<Self, CliError> {
        let mut out = self.clone();
        out.channel.snr = Quantity::Linear(self.channel.snr.linear()?);
        for k in 0..2 {
            out.channel.powers[k] = Quantity::Linear(self.channel.powers[k].linear()?);
        }
        out.game = GameSection {
            kind: self.game.kind,
            p: None,
            p_grid: Some(self.p_grid()?),
            p_step: None,
        };
        Ok(out)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    /// SHA-256 of the effective configuration, hex encoded.
    pub fn hash(&self) -> Result<String, CliError> {
        let digest = Sha256::digest(self.effective()?.to_toml().as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[channel]
n_t = 2
n_r = 3
snr = "3 dB"
powers = [5, "50 lin"]
rx_correlation = { exponential = 0.2 }
tx_correlation = [{ exponential = 0.4 }, { matrix = [[1.0, 0.3], [0.3, 1.0]] }]

[game]
kind = "spa"
p_grid = [0.0, 0.5, 1.0]

[mc]
trials = 100
seed = 7
threads = 2

[solver]
tolerance = 1e-9
max_rounds = 50
"#;

    #[test]
    fn units() {
        let db = Quantity::Text("5 dB".into()).linear().unwrap();
        assert!((db - 10f64.powf(0.5)).abs() < 1e-15);
        assert_eq!(Quantity::Text("2.5lin".into()).linear().unwrap(), 2.5);
        assert_eq!(Quantity::Text("-10 db".into()).linear().unwrap(), 0.1);
        assert_eq!(Quantity::Linear(4.0).linear().unwrap(), 4.0);
        for bad in ["5", "5 W", "dB", "x dB"] {
            assert!(Quantity::Text(bad.into()).linear().is_err(), "{bad}");
        }
    }

    #[test]
    fn full_document_parses() {
        let cfg = ScenarioConfig::parse(FULL).unwrap();
        let s = cfg.scenario().unwrap();
        assert_eq!((s.n_t(), s.n_r()), (2, 3));
        assert!((s.eta() - 10f64.powf(0.3)).abs() < 1e-15);
        assert_eq!(cfg.game.kind, GameKind::Spa);
        assert_eq!(cfg.p_grid().unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(cfg.mc.threads, 2);
    }

    #[test]
    fn defaults() {
        let cfg = ScenarioConfig::parse("[channel]\nn_t = 4\nn_r = 4\nsnr = 2\npowers = [1, 1]\n")
            .unwrap();
        assert_eq!(cfg.game.kind, GameKind::Tpa);
        assert_eq!(cfg.p_grid().unwrap().len(), 21);
        assert_eq!(cfg.mc, McSection::default());
        assert_eq!(cfg.solver, SolverSection::default());
    }

    #[test]
    fn effective_config_round_trips() {
        let cfg = ScenarioConfig::parse(FULL).unwrap();
        let eff = cfg.effective().unwrap();
        let again = ScenarioConfig::parse(&eff.to_toml()).unwrap();
        assert_eq!(again, eff);
        assert_eq!(again.effective().unwrap(), eff);
        assert_eq!(again.hash().unwrap(), cfg.hash().unwrap());
        let (a, b) = (cfg.scenario().unwrap(), again.scenario().unwrap());
        assert_eq!(a.eta(), b.eta());
        assert_eq!(
            a.tx_eigenvalues(crate::matcore::User::Two),
            b.tx_eigenvalues(crate::matcore::User::Two)
        );
    }

    #[test]
    fn unknown_key_is_named() {
        let text = FULL.replace("seed = 7", "sead = 7");
        match ScenarioConfig::parse(&text) {
            Err(CliError::Config(msg)) => assert!(msg.contains("sead"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for (from, to) in [
            ("n_t = 2", "n_t = 0"),
            ("kind = \"spa\"", "kind = \"coop\""),
            ("p_grid = [0.0, 0.5, 1.0]", "p_grid = [0.5, 0.2]"),
            ("p_grid = [0.0, 0.5, 1.0]", "p = 0.5\np_step = 0.1"),
            ("trials = 100", "trials = 0"),
            ("exponential = 0.4", "exponential = 1.5"),
            ("[[1.0, 0.3], [0.3, 1.0]]", "[[1.0, 0.3], [0.2, 1.0]]"),
            ("tolerance = 1e-9", "tolerance = -1.0"),
        ] {
            let text = FULL.replace(from, to);
            assert!(
                matches!(ScenarioConfig::parse(&text), Err(CliError::Config(_))),
                "{to}"
            );
        }
    }
}
