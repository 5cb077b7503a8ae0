use crate::analysis::line_from_profile;
use crate::analysis::{
    centralized_spa_loadings, eigen_precoders, rate_region, stackelberg_p, tpa_sumrate_sweep_with,
    verify_concavity, verify_dsc, verify_trace_lemmas, CheckReport,
};
use crate::games::{solve_ne_spa, solve_ne_tpa};
use crate::matcore::User;
use crate::rates::{ergodic_logdet, profile_rates, sud_rate_pair, McConfig, PrecodingPair};

use super::config::{GameKind, ScenarioConfig};
use super::table::ResultTable;
use super::CliError;

const FIGURES: [&str; 4] = [
    include_str!("../../configs/fig1.toml"),
    include_str!("../../configs/fig2.toml"),
    include_str!("../../configs/fig3.toml"),
    include_str!("../../configs/fig4.toml"),
];

/// Transmit powers scale `P` swept by figure 2.
pub const FIG2_SCALES: [f64; 11] = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0];

/// Built-in scenario of a figure, with optional overrides of the Monte
/// Carlo settings.
pub fn figure_config(
    figure: u8,
    trials: Option<usize>,
    seed: Option<u64>,
) -> Result<ScenarioConfig, CliError> {
    let text = figure
        .checked_sub(1)
        .and_then(|i| FIGURES.get(i as usize))
        .ok_or_else(|| CliError::Config(format!("no figure {figure}; choose 1 to 4")))?;
    let mut cfg = ScenarioConfig::parse(text)?;
    if let Some(t) = trials {
        cfg.mc.trials = t;
    }
    if let Some(s) = seed {
        cfg.mc.seed = s;
    }
    cfg.mc_config()?;
    Ok(cfg)
}

fn base_table(cfg: &ScenarioConfig, columns: &[&str]) -> Result<ResultTable, CliError> {
    let mut t = ResultTable::new(columns);
    t.meta("scenario_sha256", cfg.hash()?)
        .meta("seed", cfg.mc.seed)
        .meta("trials", cfg.mc.trials);
    Ok(t)
}

/// Solves the configured game over its `p` grid.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ResultTable, CliError> {
    match cfg.game.kind {
        GameKind::Tpa => run_tpa(cfg),
        GameKind::Spa => run_spa(cfg),
    }
}

fn run_tpa(cfg: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let scenario = cfg.scenario()?;
    let mc = cfg.mc_config()?;
    let sweep = tpa_sumrate_sweep_with(
        &scenario,
        &cfg.p_grid()?,
        &mc,
        cfg.solver.tolerance,
        cfg.solver.max_rounds,
    )?;
    let mut t = base_table(
        cfg,
        &[
            "p",
            "alpha1",
            "alpha2",
            "rate_user1",
            "rate_user2",
            "sumrate_ne",
            "stderr",
            "sumrate_centralized",
        ],
    )?;
    t.meta("game", "tpa");
    for i in 0..sweep.p.len() {
        let prof = &sweep.profiles[i];
        let u = &sweep.utilities[i];
        t.push(vec![
            sweep.p[i],
            prof.alpha(User::One),
            prof.alpha(User::Two),
            u[0].mean,
            u[1].mean,
            sweep.sumrate_ne[i].mean,
            sweep.sumrate_ne[i].stderr,
            sweep.centralized.mean,
        ]);
    }
    Ok(t)
}

fn run_spa(cfg: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let scenario = cfg.scenario()?;
    let mc = cfg.mc_config()?;
    let (tol, rounds) = (cfg.solver.tolerance, cfg.solver.max_rounds);
    let ne = solve_ne_spa(&scenario, tol, rounds)?;
    let line = line_from_profile(&scenario, &ne.profile, &mc)?;
    let central = centralized_spa_loadings(&scenario, tol, rounds)?;
    let pair = eigen_precoders(&scenario, &central.loadings)?;
    let centralized = ergodic_logdet(
        &scenario,
        Some(pair.q(User::One)),
        Some(pair.q(User::Two)),
        &mc,
    )?;

    let mut t = base_table(
        cfg,
        &[
            "p",
            "rate_user1",
            "rate_user2",
            "sumrate_ne",
            "stderr",
            "sumrate_line",
            "sumrate_centralized",
        ],
    )?;
    t.meta("game", "spa")
        .meta("line_a", line.a.mean)
        .meta("line_a_stderr", line.a.stderr)
        .meta("line_b", line.b.mean)
        .meta("stackelberg_p", stackelberg_p(&line));
    for p in cfg.p_grid()? {
        let r = profile_rates(&scenario.with_p(p)?, &ne.profile, &mc)?;
        t.push(vec![
            p,
            r.utilities[0].mean,
            r.utilities[1].mean,
            r.sum_rate.mean,
            r.sum_rate.stderr,
            line.at(p),
            centralized.mean,
        ]);
    }
    Ok(t)
}

/// CSV of one figure's curves.
pub fn reproduce(
    figure: u8,
    trials: Option<usize>,
    seed: Option<u64>,
) -> Result<ResultTable, CliError> {
    let cfg = figure_config(figure, trials, seed)?;
    let mut t = match figure {
        1 => figure1(&cfg)?,
        2 => figure2(&cfg)?,
        3 => run_spa(&cfg)?,
        _ => figure4(&cfg)?,
    };
    t.metadata.insert(1, ("figure".into(), figure.to_string()));
    Ok(t)
}

fn figure1(cfg: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let scenario = cfg.scenario()?;
    let sweep = tpa_sumrate_sweep_with(
        &scenario,
        &cfg.p_grid()?,
        &cfg.mc_config()?,
        cfg.solver.tolerance,
        cfg.solver.max_rounds,
    )?;
    let mut t = base_table(cfg, &["p", "sumrate_ne", "sumrate_centralized", "stderr"])?;
    t.meta("stderr_centralized", sweep.centralized.stderr);
    for (p, r) in sweep.p.iter().zip(&sweep.sumrate_ne) {
        t.push(vec![*p, r.mean, sweep.centralized.mean, r.stderr]);
    }
    Ok(t)
}

fn figure2(cfg: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let base = cfg.scenario()?;
    let mc = cfg.mc_config()?;
    let fair_p = cfg.p_grid()?[0];
    let mut t = base_table(
        cfg,
        &["P", "sumrate_sic_fair", "sumrate_sic_unfair", "sumrate_sud"],
    )?;
    for scale in FIG2_SCALES {
        let s = base.with_powers([scale * base.power(User::One), scale * base.power(User::Two)])?;
        let mut sic = [0.0; 2];
        for (slot, p) in sic.iter_mut().zip([fair_p, 0.0]) {
            let sp = s.with_p(p)?;
            let ne = solve_ne_tpa(&sp, cfg.solver.tolerance, cfg.solver.max_rounds)?;
            *slot = profile_rates(&sp, &ne.profile, &mc)?.sum_rate.mean;
        }
        let uniform =
            PrecodingPair::scaled_identity(s.n_t(), s.power(User::One), s.power(User::Two))?;
        let sud = sud_rate_pair(&s, &uniform, &mc)?;
        t.push(vec![scale, sic[0], sic[1], sud.r[0].mean + sud.r[1].mean]);
    }
    Ok(t)
}

fn figure4(cfg: &ScenarioConfig) -> Result<ResultTable, CliError> {
    let region = rate_region(&cfg.scenario()?, &cfg.p_grid()?, &cfg.mc_config()?)?;
    let mut t = base_table(cfg, &["p", "rate_user1", "rate_user2"])?;
    t.meta("sud_row", "p = NaN")
        .meta("straightness", region.straightness)
        .meta("chord_slope", region.chord_slope);
    for (p, pt) in region.p.iter().zip(&region.points) {
        t.push(vec![*p, pt[0].mean, pt[1].mean]);
    }
    t.push(vec![f64::NAN, region.sud[0].mean, region.sud[1].mean]);
    Ok(t)
}

/// Randomized inequality checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Dsc,
    Lemmas,
    Concavity,
}

/// Dimension of the random matrices in the trace-lemma checks.
pub const LEMMA_DIM: usize = 4;

/// Runs a verification suite on the figure 1 channel at `p = 1/2`.
pub fn verify(suite: Suite, trials: usize, seed: u64) -> Result<Vec<CheckReport>, CliError> {
    if trials == 0 {
        return Err(CliError::Config("--trials must be positive".into()));
    }
    let scenario = figure_config(1, None, None)?.scenario()?.with_p(0.5)?;
    let mut reports = Vec::new();
    if matches!(suite, Suite::All | Suite::Lemmas) {
        reports.extend(verify_trace_lemmas(trials, LEMMA_DIM, seed)?);
    }
    if matches!(suite, Suite::All | Suite::Dsc) {
        reports.push(verify_dsc(&scenario, trials, seed)?);
    }
    if matches!(suite, Suite::All | Suite::Concavity) {
        reports.extend(verify_concavity(&scenario, &McConfig::new(trials, seed)?)?);
    }
    Ok(reports)
}

pub fn format_reports(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!(
            "{} {}: {} instances, {} violations, worst margin {:e}\n",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.instances,
            r.violations,
            r.worst_margin
        ));
        if let Some(c) = &r.counterexample {
            out.push_str(&format!("  counterexample: {c}\n"));
        }
    }
    out
}
