//! Suite runners: each verifies one family of claims against the
//! scenario's process and writes plot-ready CSV plus a detail JSON.

use std::path::Path;

use anyhow::{anyhow, bail, Result};
use betamix::field::IndexInterval;
use betamix::mixing::{
    atom_beta_bound, beta_bound_profile, finite_window_beta_exact, self_beta_product,
    ternary_site_law, FinitePartition,
};
use betamix::sequence::{LevelSequence, RateBudget};
use betamix::stats::{
    bell_numbers, clt_check, moment_suite, monte_carlo_level_variance, transfer_divergence,
    variance_level_exact, variance_profile, window_exceedance, ExceedanceMode, ExceedanceSpec,
    ENUMERATION_BUDGET,
};
use betamix::sums::{
    max_statistic, path_functional, path_profile, PathKind, PathMode, Profile, ProfileRequest,
    Series,
};
use num_traits::ToPrimitive;

use crate::artifacts::{cell, cell_opt, write_json, Check, Csv, Summary};
use crate::scenario::Scenario;

/// Claim labels grouping checks in consolidated reports.
pub mod claims {
    pub const CLT: &str = "clt-normal-limit";
    pub const WINDOW_LEVEL: &str = "window-max-level";
    pub const WINDOW_FULL: &str = "window-max-full";
    pub const FDD: &str = "fdd-contrast";
    pub const VARIANCE: &str = "variance-linear";
    pub const MIX_ZERO: &str = "mixing-zero-gap";
    pub const MIX_CHAIN: &str = "mixing-chain";
    pub const MIX_RATE: &str = "mixing-rate";
    pub const MIX_BUDGET: &str = "mixing-budget";
    pub const MOMENTS: &str = "moment-bounds";
    pub const BELL: &str = "bell-table";
    pub const DIVERGENCE: &str = "transfer-divergence";

    /// Human heading for a claim label, for the consolidated report.
    pub fn heading(claim: &str) -> &'static str {
        match claim {
            CLT => "Central limit theorem at root-n scaling",
            WINDOW_LEVEL => "Single-level window maximum persists",
            WINDOW_FULL => "Full-process window maximum persists",
            FDD => "Single-horizon exceedance vanishes against the window maximum",
            VARIANCE => "Partial-sum variance grows linearly",
            MIX_ZERO => "Dependence vanishes exactly beyond the level range",
            MIX_CHAIN => "Dependence-coefficient bound chain",
            MIX_RATE => "Aggregate dependence bound decays at the target rate",
            MIX_BUDGET => "Adaptive sequences meet their rate budget",
            MOMENTS => "Moment bounds hold at every order",
            BELL => "Bell number table",
            DIVERGENCE => "Transfer-function mass does not decay across levels",
            _ => "Other checks",
        }
    }
}

pub const SUITES: [&str; 6] = [
    "clt",
    "nontight",
    "variance",
    "mixing",
    "moments",
    "divergence",
];

/// Run one suite (or `all`) and write `summary.json` plus per-suite
/// artifacts under `out_root/<scenario name>/`.
pub fn run_scenario(sc: &Scenario, suite: &str, out_root: &Path) -> Result<Summary> {
    let dir = out_root.join(&sc.name);
    std::fs::create_dir_all(&dir)?;
    let mut checks = Vec::new();
    let suites: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => bail!("unknown suite {other:?} (expected one of {SUITES:?} or all)"),
    };
    for s in suites {
        checks.extend(match s {
            "clt" => run_clt(sc, &dir)?,
            "nontight" => run_nontight(sc, &dir)?,
            "variance" => run_variance(sc, &dir)?,
            "mixing" => run_mixing(sc, &dir)?,
            "moments" => run_moments(sc, &dir)?,
            "divergence" => run_divergence(sc, &dir)?,
            _ => unreachable!(),
        });
    }
    let summary = Summary {
        scenario: sc.name.clone(),
        suite: suite.to_string(),
        seed: sc.seed()?,
        checks,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn run_clt(sc: &Scenario, dir: &Path) -> Result<Vec<Check>> {
    let cfg = sc.process_config()?;
    let grid = sc.get_list_u64("n_grid", &[256, 1024, 4096])?;
    let trials = sc.get_u64("trials", 2000)?;
    let final_max = sc.get_f64("ks_final_max", 0.06)?;
    let band = 1.36 / (trials as f64).sqrt();

    let mut csv = Csv::new(&["n", "trials", "ks", "ks_null_band", "sample_mean", "sample_sd"]);
    let mut reports = Vec::new();
    for &n in &grid {
        let r = clt_check(&cfg, n, trials).map_err(|e| anyhow!("clt at n={n}: {e}"))?;
        csv.row(&[
            cell(n),
            cell(trials),
            cell(r.ks),
            cell(r.ks_null_band),
            cell(r.sample_mean),
            cell(r.sample_sd),
        ]);
        reports.push(r);
    }
    csv.write(&dir.join("clt.csv"))?;
    write_json(&dir.join("clt.json"), &reports)?;

    let final_ks = reports.last().map(|r| r.ks).unwrap_or(f64::NAN);
    let max_rise = reports
        .windows(2)
        .map(|w| w[1].ks - w[0].ks)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_rise = if reports.len() < 2 { 0.0 } else { max_rise };
    Ok(vec![
        Check::new(
            "clt.final-ks",
            claims::CLT,
            final_ks,
            Some(final_max),
            final_ks < final_max,
            format!("ks at n={} over {trials} trials", grid.last().unwrap_or(&0)),
        ),
        Check::new(
            "clt.monotone",
            claims::CLT,
            max_rise,
            Some(band),
            max_rise <= band,
            "largest ks rise along the grid, allowed one null band".into(),
        ),
    ])
}

fn run_nontight(sc: &Scenario, dir: &Path) -> Result<Vec<Check>> {
    let cfg = sc.process_config()?;
    let mode = match sc.get("mode").unwrap_or("level") {
        "level" => ExceedanceMode::Level,
        "full" => ExceedanceMode::Full,
        other => bail!("key `mode`: expected level or full, got {other:?}"),
    };
    let default_threshold = match mode {
        ExceedanceMode::Level => 1.0,
        ExceedanceMode::Full => 0.5,
    };
    let spec = ExceedanceSpec {
        level: sc.get_u64("focus_level", 2)? as usize,
        mode,
        threshold: sc.get_f64("threshold", default_threshold)?,
        trials: sc.get_u64("trials", 800)?,
    };
    let report = window_exceedance(&cfg, &spec).map_err(|e| anyhow!("window sweep: {e}"))?;

    let mut csv = Csv::new(&[
        "mode",
        "level",
        "scale",
        "threshold",
        "trials",
        "estimate",
        "se",
        "bound",
        "point_estimate",
        "point_se",
        "intrusion_bound",
    ]);
    csv.row(&[
        cell(match mode {
            ExceedanceMode::Level => "level",
            ExceedanceMode::Full => "full",
        }),
        cell(report.level),
        cell(report.level_scale),
        cell(report.threshold),
        cell(spec.trials),
        cell(report.estimate.estimate),
        cell(report.estimate.se),
        cell_opt(report.analytic_bound),
        cell(report.point_estimate.estimate),
        cell(report.point_estimate.se),
        cell_opt(report.intrusion_bound),
    ]);
    csv.write(&dir.join("nontight.csv"))?;
    write_json(&dir.join("nontight.json"), &report)?;

    let claim = match mode {
        ExceedanceMode::Level => claims::WINDOW_LEVEL,
        ExceedanceMode::Full => claims::WINDOW_FULL,
    };
    let mut checks = vec![match report.analytic_bound {
        Some(bound) => Check::new(
            "nontight.margin",
            claim,
            report.estimate.estimate,
            Some(bound),
            report.margin_pass.unwrap_or(false),
            format!(
                "estimate - 3 se = {} against {bound}",
                report.estimate.estimate - 3.0 * report.estimate.se
            ),
        ),
        None => Check::new(
            "nontight.margin",
            claim,
            report.estimate.estimate,
            None,
            true,
            "no analytic bound in force for these parameters".into(),
        ),
    }];
    if mode == ExceedanceMode::Full {
        let ratio = if report.estimate.estimate > 0.0 {
            report.point_estimate.estimate / report.estimate.estimate
        } else {
            f64::INFINITY
        };
        checks.push(Check::new(
            "nontight.fdd-contrast",
            claims::FDD,
            ratio,
            Some(1.0 / 3.0),
            ratio <= 1.0 / 3.0,
            format!(
                "single-horizon estimate {} vs window estimate {}",
                report.point_estimate.estimate, report.estimate.estimate
            ),
        ));
    }
    Ok(checks)
}

fn run_variance(sc: &Scenario, dir: &Path) -> Result<Vec<Check>> {
    let cfg = sc.process_config()?;
    let horizons = sc.get_list_u64("n_list", &(4..=4096).collect::<Vec<_>>())?;
    let sup_cap = sc.get_f64("sup_cap", 4.0)?;
    let mc_trials = sc.get_u64("mc_trials", 20_000)?;
    let mc_level = sc.get_u64("mc_level", 2)? as usize;
    let mc_horizon = sc.get_u64("mc_horizon", 256)?;
    let mc_tol = sc.get_f64("mc_tol", 0.05)?;

    let report = variance_profile(&cfg, &horizons).map_err(|e| anyhow!("variance profile: {e}"))?;
    let levels = cfg.truncation;
    let mut header = vec![
        "N".to_string(),
        "band_level".into(),
        "total_increment".into(),
        "ratio".into(),
        "total_process".into(),
    ];
    for k in 1..=levels {
        header.push(format!("level{k}_var"));
    }
    let mut csv = Csv::new(&header.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    for row in &report.rows {
        let mut cells = vec![
            cell(row.horizon),
            cell(row.band_level),
            cell(row.total_increment),
            cell(row.ratio),
            cell(row.total_process),
        ];
        for v in &row.per_level {
            cells.push(cell(*v));
        }
        csv.row(&cells);
    }
    csv.write(&dir.join("variance.csv"))?;

    let mc = monte_carlo_level_variance(&cfg, mc_level, mc_horizon, mc_trials)
        .map_err(|e| anyhow!("monte carlo variance: {e}"))?;
    write_json(&dir.join("variance.json"), &(&mc,))?;

    let mut checks = vec![
        Check::new(
            "variance.sup-ratio",
            claims::VARIANCE,
            report.sup_ratio,
            Some(sup_cap),
            report.sup_ratio <= sup_cap,
            format!("sup of variance/N over {} horizons", report.rows.len()),
        ),
        Check::new(
            "variance.splits",
            claims::VARIANCE,
            if report.splits_ok { 1.0 } else { 0.0 },
            None,
            report.splits_ok,
            "head and tail level sums inside their envelopes".into(),
        ),
        Check::new(
            "variance.mc",
            claims::VARIANCE,
            mc.relative_error,
            Some(mc_tol),
            mc.relative_error < mc_tol,
            format!(
                "sample variance {} vs exact {} over {} trials",
                mc.sample_variance, mc.exact_variance, mc.trials
            ),
        ),
    ];
    // the settled two-scale variance is exactly 3
    if (1..=cfg.truncation).any(|k| cfg.seq.n(k) == 2) {
        let v = variance_level_exact(2, 4).to_f64().unwrap();
        checks.push(Check::new(
            "variance.exact-smallest",
            claims::VARIANCE,
            v,
            Some(3.0),
            v == 3.0,
            "settled variance of the scale-2 level".into(),
        ));
    }
    Ok(checks)
}

fn run_mixing(sc: &Scenario, dir: &Path) -> Result<Vec<Check>> {
    let cfg = sc.process_config()?;
    let oracle_scale = sc.get_u64("oracle_scale", 2)?;
    let oracle_gap = sc.get_u64("oracle_gap", 2 * oracle_scale)?;
    let oracle_half_width = sc.get_u64("oracle_half_width", 1)?;
    let chain_scale = sc.get_u64("chain_scale", 8)?;
    let rate_delta = sc.get_f64("rate_delta", 0.1)?;
    let rate_levels = sc.get_u64("rate_levels", 3)? as usize;
    let rate_cap = sc.get_f64("rate_cap", 1.0)?;
    let budget_levels = sc.get_u64("budget_levels", 4)? as usize;

    // enumeration oracle at a gap past the dependence range
    let oracle = finite_window_beta_exact(
        oracle_scale,
        oracle_gap,
        oracle_half_width,
        ENUMERATION_BUDGET,
    )
    .map_err(|e| anyhow!("window enumeration: {e}"))?;
    let oracle_beta = oracle.beta.to_f64().unwrap();
    write_json(&dir.join("mixing-oracle.json"), &oracle)?;

    // the bound chain at the chain scale
    let m = 2 * chain_scale as usize;
    let laws = vec![ternary_site_law(chain_scale); m];
    let self_beta = self_beta_product(&laws).to_f64().unwrap();
    let atom = atom_beta_bound(&FinitePartition::Product(laws))
        .to_f64()
        .unwrap();
    let cap = 4.0 / chain_scale as f64;

    // aggregate bound profile of the scenario sequence
    let top = 2 * cfg.seq.n(cfg.seq.len());
    let mut grid = Vec::new();
    let mut d = 1u64;
    while d <= top {
        grid.push(d);
        d *= 2;
    }
    grid.push(top + 1);
    let profile = beta_bound_profile(&cfg.seq, &grid, None)?;
    let mut header = vec!["N".to_string(), "aggregate".into()];
    for k in 1..=cfg.seq.len() {
        header.push(format!("level{k}_bound"));
    }
    let mut csv = Csv::new(&header.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    for row in &profile.rows {
        let mut cells = vec![cell(row.distance), cell(row.aggregate)];
        for v in &row.per_level {
            cells.push(cell(*v));
        }
        csv.row(&cells);
    }
    csv.write(&dir.join("mixing.csv"))?;

    // decay-rate product for a delta-rule sequence
    let rate_seq = LevelSequence::delta_rule(&format!("{rate_delta}"), rate_levels)
        .map_err(|e| anyhow!("rate sequence: {e}"))?;
    let n2 = rate_seq.n(2.min(rate_seq.len()));
    let rate_grid: Vec<u64> = (0..=200)
        .map(|i| n2 + (1_000_000u64.saturating_sub(n2)) * i / 200)
        .collect();
    let rate = beta_bound_profile(&rate_seq, &rate_grid, Some(rate_delta))?
        .rate
        .expect("delta given");

    // adaptive budget verification
    let budget_rule: RateBudget = sc
        .get("budget_rule")
        .unwrap_or("inv-linear")
        .parse()
        .map_err(|e| anyhow!("{e}"))?;
    let adaptive = LevelSequence::adaptive(budget_rule, budget_levels, true)
        .map_err(|e| anyhow!("adaptive sequence: {e}"))?;
    let budget_rows = beta_bound_profile(&adaptive, &[1], None)?
        .budget
        .expect("adaptive origin");
    write_json(&dir.join("mixing-budget.json"), &budget_rows)?;
    let budget_ok = budget_rows.iter().all(|r| r.ok);

    Ok(vec![
        Check::new(
            "mixing.zero-gap",
            claims::MIX_ZERO,
            oracle_beta,
            Some(0.0),
            oracle.windows_disjoint && oracle_beta == 0.0,
            format!(
                "exact enumeration over {} coordinates at gap {oracle_gap}",
                oracle.coords
            ),
        ),
        Check::new(
            "mixing.chain-order",
            claims::MIX_CHAIN,
            self_beta,
            Some(cap),
            self_beta <= atom && atom <= cap,
            format!("chain {self_beta} <= {atom} <= {cap} at scale {chain_scale}"),
        ),
        Check::new(
            "mixing.nonincreasing",
            claims::MIX_CHAIN,
            if profile.nonincreasing { 1.0 } else { 0.0 },
            None,
            profile.nonincreasing,
            "aggregate bound nonincreasing over the distance grid".into(),
        ),
        Check::new(
            "mixing.rate",
            claims::MIX_RATE,
            rate.sup_product,
            Some(rate_cap),
            rate.sup_product.is_finite() && rate.sup_product <= rate_cap,
            format!(
                "sup of bound(2N) * N^(1/(2+{rate_delta})) over [{}, 1000000]",
                n2
            ),
        ),
        Check::new(
            "mixing.budget",
            claims::MIX_BUDGET,
            if budget_ok { 1.0 } else { 0.0 },
            None,
            budget_ok,
            format!("{} levels meet their rate targets", budget_rows.len()),
        ),
    ])
}

fn run_moments(sc: &Scenario, dir: &Path) -> Result<Vec<Check>> {
    let scales = sc.get_list_u64("scales", &[2, 3, 4])?;
    let orders = sc.get_list_f64("orders", &[0.5, 1.0, 2.0, 3.0, 4.0])?;
    let mut csv = Csv::new(&[
        "scale",
        "p",
        "increment_moment",
        "increment_bound",
        "transfer_moment",
        "transfer_bound",
        "enumerated",
    ]);
    let mut all_within = true;
    let mut all_enumerated = true;
    for &n_k in &scales {
        for &p in &orders {
            let r = moment_suite(n_k, p, ENUMERATION_BUDGET)
                .map_err(|e| anyhow!("moments at scale {n_k}, p={p}: {e}"))?;
            all_enumerated &= r.enumerated;
            all_within &= r.increment_within.unwrap_or(true) && r.transfer_within.unwrap_or(true);
            csv.row(&[
                cell(n_k),
                cell(p),
                cell_opt(r.increment_moment),
                cell_opt(r.increment_bound),
                cell_opt(r.transfer_moment),
                cell_opt(r.transfer_bound),
                cell(r.enumerated),
            ]);
        }
    }
    csv.write(&dir.join("moments.csv"))?;

    let bells = bell_numbers(10);
    let b10 = bells[10].to_u64().unwrap_or(0);
    Ok(vec![
        Check::new(
            "moments.bounds",
            claims::MOMENTS,
            if all_within { 1.0 } else { 0.0 },
            None,
            all_within && all_enumerated,
            format!(
                "{} scale/order pairs enumerated exactly",
                scales.len() * orders.len()
            ),
        ),
        Check::new(
            "moments.bell10",
            claims::BELL,
            b10 as f64,
            Some(115_975.0),
            b10 == 115_975,
            "tenth Bell number by the binomial recursion".into(),
        ),
    ])
}

fn run_divergence(sc: &Scenario, dir: &Path) -> Result<Vec<Check>> {
    let cfg = sc.process_config()?;
    let k_max = sc.get_u64("k_max", cfg.truncation as u64)? as usize;
    let report = transfer_divergence(cfg.seq.levels(), k_max)
        .map_err(|e| anyhow!("divergence: {e}"))?;
    let mut csv = Csv::new(&["level", "scale", "term", "partial_sum"]);
    for (t, &s) in report.terms.iter().zip(&report.partial_sums) {
        csv.row(&[cell(t.level), cell(t.level_scale), cell(t.value), cell(s)]);
    }
    csv.write(&dir.join("divergence.csv"))?;
    write_json(&dir.join("divergence.json"), &report)?;

    let positive = report.terms.iter().all(|t| t.value > 0.0);
    Ok(vec![
        Check::new(
            "divergence.positive",
            claims::DIVERGENCE,
            report.terms.last().map(|t| t.value).unwrap_or(0.0),
            Some(0.0),
            positive,
            format!("{} per-level terms", report.terms.len()),
        ),
        Check::new(
            "divergence.non-decay",
            claims::DIVERGENCE,
            if report.non_decaying { 1.0 } else { 0.0 },
            None,
            report.non_decaying,
            "every term at least 0.9 of its successor".into(),
        ),
    ])
}

/// Path and functional dumps for the `simulate` verb.
pub fn run_simulate(sc: &Scenario, out_root: &Path) -> Result<()> {
    let cfg = sc.process_config()?;
    let dir = out_root.join(&sc.name);
    std::fs::create_dir_all(&dir)?;
    let n_lo = sc.get_u64("n_lo", 1)?;
    let focus_level = sc.get_u64("focus_level", cfg.truncation as u64)? as usize;
    let default_hi = cfg.seq.n(focus_level).saturating_mul(cfg.seq.n(focus_level));
    let n_hi = sc.get_u64("n_hi", default_hi.min(4096))?;
    let mode = match sc.get("path_mode").unwrap_or("full") {
        "full" => PathMode::Full,
        "focus" => PathMode::FocusIntrusion,
        other => bail!("key `path_mode`: expected full or focus, got {other:?}"),
    };
    let paths = sc.get_u64("paths", 1)?;
    let t_points = sc.get_u64("t_points", 0)?;
    let dump_fields = sc.get("dump_fields") == Some("true");

    let req = ProfileRequest {
        n_lo,
        n_hi,
        focus_level,
        mode,
    };
    for trial in 0..paths {
        match path_profile(&cfg, &req, trial).map_err(|e| anyhow!("path profile: {e}"))? {
            Profile::Full(path) => {
                let mut csv = Csv::new(&["N", "S_h", "S_m", "S_Y"]);
                for ix in 0..path.s_h.len() {
                    csv.row(&[
                        cell(path.n_lo + ix as u64),
                        cell(path.s_h[ix]),
                        cell(path.s_m[ix]),
                        cell(path.s_y[ix]),
                    ]);
                }
                csv.write(&dir.join(format!("path-{trial}.csv")))?;
                if t_points > 0 {
                    if path.n_lo > 1 {
                        bail!("functional dumps need the path to start at N = 1");
                    }
                    let mut csv = Csv::new(&["t", "polygonal", "step"]);
                    let scale = path.n_hi();
                    for i in 0..=t_points {
                        let t = i as f64 / t_points as f64;
                        let poly =
                            path_functional(&path, Series::Total, scale, t, PathKind::Polygonal)
                                .map_err(|e| anyhow!("functional: {e}"))?;
                        let step =
                            path_functional(&path, Series::Total, scale, t, PathKind::Step)
                                .map_err(|e| anyhow!("functional: {e}"))?;
                        csv.row(&[cell(t), cell(poly), cell(step)]);
                    }
                    csv.write(&dir.join(format!("functional-{trial}.csv")))?;
                }
                let stat = max_statistic(&Profile::Full(path), cfg.seq.n(focus_level));
                if let Ok(stat) = stat {
                    write_json(&dir.join(format!("maxstat-{trial}.json")), &stat)?;
                }
            }
            Profile::Focus(focus) => {
                let stat = max_statistic(&Profile::Focus(focus.clone()), focus.n_k)
                    .map_err(|e| anyhow!("max statistic: {e}"))?;
                write_json(&dir.join(format!("focus-{trial}.json")), &(&stat, &focus.intrusion))?;
            }
        }
        if dump_fields {
            let mut csv = Csv::new(&["level", "index", "value"]);
            for level in 1..=cfg.truncation {
                let n_j = cfg.seq.n(level);
                let iv = IndexInterval::new(1 - 2 * n_j as i64, n_hi as i64 - 1)
                    .map_err(|e| anyhow!("{e}"))?;
                let field = cfg
                    .sample_level(level, iv, trial)
                    .map_err(|e| anyhow!("{e}"))?;
                for (site, value) in field.events() {
                    csv.row(&[cell(level), cell(site), cell(value)]);
                }
            }
            csv.write(&dir.join(format!("fields-{trial}.csv")))?;
        }
    }
    Ok(())
}
