//! Subcommand bodies. Each returns its stdout summary and the files to write.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tfe_core::expansion::{
    self, admissible_window, b0, backshoot_positive, default_d_grid, default_residual_grid, eval_expansion, hn,
    hn_linearized, residual_order, scan_d, scan_s0, solve_l_with, BackshootOptions, ExpansionParams, ExponentRule,
    SeedOrder,
};
use tfe_core::ivp::IntegratorConfig;
use tfe_core::oscillation::{
    classify_with_retries, find_nh, periodic_orbit, run_osc, OscProblem, EV_ESCAPE, EV_MAX,
};
use tfe_core::profile::{
    default_mu_bracket, event_label, find_mu, microscope, shoot, sign_changes_around, CriticalShoot, ProfileProblem,
    ProfileScale, ShootResult,
};
use tfe_core::special::{logfit_n3, nonexistence_scan};

use crate::config::RunConfig;
use crate::output::{num, opt_num, trajectory_table, Table};
use crate::{CliError, Command};

pub struct Report {
    pub summary: Vec<(String, String)>,
    pub files: Vec<(PathBuf, String)>,
    pub sidecar: Option<PathBuf>,
}

impl Report {
    fn new() -> Self {
        Self {
            summary: Vec::new(),
            files: Vec::new(),
            sidecar: None,
        }
    }

    fn put(&mut self, k: &str, v: impl Into<String>) {
        self.summary.push((k.to_string(), v.into()));
    }

    /// Attaches the data file (and its sidecar) when `--out` was given.
    fn data(&mut self, out: Option<&Path>, table: Table) {
        if let Some(p) = out {
            self.files.push((p.to_path_buf(), table.text().to_string()));
            self.sidecar = Some(crate::output::sidecar_path(p));
        }
    }
}

fn compute(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

fn integrator(cfg: &RunConfig) -> IntegratorConfig {
    IntegratorConfig {
        rtol: cfg.rtol,
        atol: cfg.atol,
        max_steps: cfg.max_steps,
        ..IntegratorConfig::default()
    }
}

fn scale(cfg: &RunConfig) -> ProfileScale {
    cfg.scale.parse().expect("validated scale")
}

fn rule(cfg: &RunConfig) -> ExponentRule {
    cfg.rule.parse().expect("validated rule")
}

fn profile_problem(cfg: &RunConfig, n: f64) -> Result<ProfileProblem, CliError> {
    let mut p = ProfileProblem::new(n).with_scale(scale(cfg)).with_eps(cfg.eps);
    p.y_max = cfg.y_max;
    p.blowup_f = cfg.blowup_f;
    p.undershoot_margin = cfg.undershoot_margin;
    p.slope_cap = cfg.slope_cap;
    p.zero_resolution = cfg.zero_resolution;
    p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(p)
}

fn osc_problem(cfg: &RunConfig, n: f64) -> OscProblem {
    OscProblem {
        n,
        eps: cfg.eps,
        s_transient: cfg.s_transient,
        s_observe: cfg.s_observe,
        escape_level: cfg.escape_level,
    }
}

fn backshoot_options(cfg: &RunConfig) -> BackshootOptions {
    BackshootOptions {
        delta: cfg.delta,
        eps: cfg.eps,
        rule: rule(cfg),
        seed: if cfg.seed == "two" {
            SeedOrder::TwoTerm
        } else {
            SeedOrder::ThreeTerm
        },
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

fn profile_table(r: &ShootResult, resample: usize, keep: impl Fn(f64) -> bool) -> Table {
    trajectory_table(
        &["y", "f", "f1", "f2", "event"],
        &r.traj,
        event_label,
        resample,
        |y, s| (y, *s),
        keep,
    )
}

fn critical(cfg: &RunConfig, p: &ProfileProblem) -> Result<CriticalShoot, CliError> {
    let (dlo, dhi) = default_mu_bracket(p.n, p.scale);
    let lo = cfg.mu_lo.unwrap_or(dlo);
    let hi = cfg.mu_hi.unwrap_or(dhi);
    if lo >= hi {
        return Err(CliError::Usage(format!("--lo: mu bracket [{lo}, {hi}] is empty")));
    }
    find_mu(p, lo, hi, cfg.mu_tol, &integrator(cfg)).map_err(compute)
}

fn shot_summary(rep: &mut Report, r: &ShootResult) {
    rep.put("n", num(r.n));
    rep.put("mu", num(r.mu));
    rep.put("outcome", r.outcome.label());
    rep.put("terminal", r.terminal.label());
    rep.put("y_end", num(r.y_end()));
    rep.put("min_f", num(r.min_f()));
    rep.put("zeros", r.zeros.len().to_string());
    rep.put("first_zero", opt_num(r.zeros.first().copied()));
    rep.put("interface_estimate", opt_num(r.interface_estimate));
    rep.put("steps", r.steps().to_string());
}

pub fn run(cmd: &Command, cfg: &RunConfig, out: Option<&Path>) -> Result<Report, CliError> {
    let mut rep = Report::new();
    let need_n = || cfg.require_n().map_err(|_| CliError::Usage("--n is required".into()));
    match cmd {
        Command::Shoot { .. } => {
            let p = profile_problem(cfg, need_n()?)?;
            let ic = integrator(cfg);
            let r = if cfg.microscope {
                microscope(&p, cfg.mu, &ic)
            } else {
                shoot(&p, cfg.mu, &ic)
            }
            .map_err(compute)?;
            shot_summary(&mut rep, &r);
            rep.data(out, profile_table(&r, cfg.resample, |_| true));
        }
        Command::Findmu { .. } => {
            let p = profile_problem(cfg, need_n()?)?;
            let c = critical(cfg, &p)?;
            let zeros = sign_changes_around(&c.microscope, c.y0, cfg.window, cfg.resolution);
            rep.put("n", num(p.n));
            rep.put("mu_star", num(c.mu_star));
            rep.put("bracket_width", num(c.bracket_width));
            rep.put("y0", num(c.y0));
            rep.put("iterations", c.iterations.to_string());
            rep.put("sign_changes", zeros.len().to_string());
            rep.put("zeros_near_interface", join(&zeros));
            let r = if cfg.microscope { &c.microscope } else { c.overshoot_side() };
            rep.data(out, profile_table(r, cfg.resample, |_| true));
        }
        Command::Osc { .. } => {
            let n = need_n()?;
            let p = osc_problem(cfg, n);
            let ic = integrator(cfg);
            let r = classify_with_retries(&p, &ic).map_err(compute)?;
            rep.put("n", num(n));
            rep.put("kind", r.kind.label());
            rep.put("period", opt_num(r.period));
            rep.put("amplitude", opt_num(r.amplitude));
            rep.put("sign_changing", r.sign_changing.to_string());
            rep.put("equilibrium_value", opt_num(r.equilibrium_value));
            rep.put("residual", num(r.residual));
            rep.put("maxima", r.maxima.to_string());
            rep.put("s_end", num(r.s_end));
            if out.is_some() {
                let tr = run_osc(&p, p.default_init(), &ic).map_err(compute)?;
                let label = |id: usize| match id {
                    EV_MAX => "max",
                    EV_ESCAPE => "escape",
                    _ => "event",
                };
                let t = trajectory_table(
                    &["s", "phi", "phi1", "phi2", "event"],
                    &tr,
                    label,
                    cfg.resample,
                    |s, x| (s, *x),
                    |_| true,
                );
                rep.data(out, t);
            }
        }
        Command::Nh { .. } => {
            let template = osc_problem(cfg, cfg.nh_lo);
            let est = find_nh(cfg.nh_lo, cfg.nh_hi, cfg.nh_tol, &template, &integrator(cfg)).map_err(compute)?;
            rep.put("n_h", num(est.n_h));
            rep.put("lo", num(est.lo));
            rep.put("hi", num(est.hi));
            rep.put("ended_on_indeterminate", est.ended_on_indeterminate.to_string());
            rep.put("evaluations", est.reports.len().to_string());
            let mut t = Table::new(&["n", "kind", "period", "amplitude", "residual", "maxima"]);
            for r in &est.reports {
                t.row(&[
                    num(r.n),
                    r.kind.label().to_string(),
                    opt_num(r.period),
                    opt_num(r.amplitude),
                    num(r.residual),
                    r.maxima.to_string(),
                ]);
            }
            rep.data(out, t);
        }
        Command::Cubic { .. } => {
            let n = need_n()?;
            let rl = rule(cfg);
            let (l, adm) = solve_l_with(n, rl).map_err(compute)?;
            let (lo, hi) = admissible_window(n);
            rep.put("n", num(n));
            rep.put("rule", cfg.rule.clone());
            rep.put("l", num(l));
            rep.put("window_lo", num(lo));
            rep.put("window_hi", num(hi));
            rep.put("admissible", adm.to_string());
            rep.put("b0", num(b0(n).map_err(compute)?));
            rep.data(out, cubic_table(n, rl)?);
        }
        Command::Expand { .. } => {
            let n = need_n()?;
            let p = ExpansionParams::with_rule(n, cfg.d, rule(cfg)).map_err(compute)?;
            let grid = default_residual_grid();
            let ro = residual_order(&p, &grid).map_err(compute)?;
            rep.put("n", num(n));
            rep.put("d", num(cfg.d));
            rep.put("l", num(p.l));
            rep.put("b0", num(p.b0));
            rep.put("admissible", p.admissible.to_string());
            rep.put("residual_slope", num(ro.slope));
            rep.put("expected_slope", num(ro.expected));
            rep.put("gate", num(ro.gate));
            rep.put("passes", ro.passes.to_string());
            let mut t = Table::new(&["z", "f", "f1", "f2", "f3"]);
            for z in grid {
                let s = eval_expansion(&p, z).map_err(compute)?;
                t.row(&[num(z), num(s[0]), num(s[1]), num(s[2]), num(s[3])]);
            }
            rep.data(out, t);
        }
        Command::Backshoot { .. } => {
            let n = need_n()?;
            let bs = backshoot_positive(n, cfg.d, &backshoot_options(cfg), &integrator(cfg)).map_err(compute)?;
            rep.put("n", num(n));
            rep.put("d", num(cfg.d));
            rep.put("f0", num(bs.origin[0]));
            rep.put("f1", num(bs.origin[1]));
            rep.put("f2", num(bs.origin[2]));
            rep.put("reflected_slope", num(bs.reflected_slope()));
            rep.put("steps", bs.traj.len().to_string());
            let t = trajectory_table(
                &["y", "f", "f1", "f2", "event"],
                &bs.traj,
                |_| "event",
                cfg.resample,
                |z, g| (1.0 - z, [g[0], -g[1], g[2]]),
                |_| true,
            );
            rep.data(out, t);
        }
        Command::ScanD { .. } => {
            let n = need_n()?;
            let grid = cfg.d_grid.clone().unwrap_or_else(default_d_grid);
            let table = scan_d(n, &grid, &backshoot_options(cfg), &integrator(cfg));
            rep.put("n", num(n));
            rep.put("rows", table.rows.len().to_string());
            rep.put("roots", table.roots.len().to_string());
            rep.put("d_star", join(&table.roots.iter().map(|r| r.d_star).collect::<Vec<_>>()));
            rep.put("min_abs_f1", num(table.min_abs_f1));
            if let Some(r) = table.best_positive_root() {
                rep.put("best_d_star", num(r.d_star));
                rep.put("best_f0", num(r.f0));
                rep.put("best_f1", num(r.f1));
            }
            let mut t = Table::new(&["d", "f0", "f1", "status"]);
            for r in &table.rows {
                t.row(&terminal_cells(num(r.d), &r.terminal));
            }
            rep.data(out, t);
        }
        Command::ScanS0 { .. } => {
            let n = need_n()?;
            let ic = integrator(cfg);
            let orbit = periodic_orbit(&osc_problem(cfg, n), &ic).map_err(compute)?;
            let rows = scan_s0(n, &orbit, cfg.s0_count, &backshoot_options(cfg), &ic);
            let best = rows
                .iter()
                .filter_map(|r| r.terminal.as_ref().ok().map(|t| (r.s0, t.1.abs())))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            rep.put("n", num(n));
            rep.put("period", num(orbit.period));
            rep.put("rows", rows.len().to_string());
            rep.put("best_s0", opt_num(best.map(|b| b.0)));
            rep.put("min_abs_f1", opt_num(best.map(|b| b.1)));
            let mut t = Table::new(&["s0", "f0", "f1", "status"]);
            for r in &rows {
                t.row(&terminal_cells(num(r.s0), &r.terminal));
            }
            rep.data(out, t);
        }
        Command::Log3 { .. } => {
            let p = profile_problem(cfg, 3.0)?;
            let c = critical(cfg, &p)?;
            let r = c.overshoot_side();
            let fit = logfit_n3(r, (cfg.log_lo, cfg.log_hi)).map_err(compute)?;
            rep.put("mu_star", num(c.mu_star));
            rep.put("y0", num(c.y0));
            rep.put("p", num(fit.p));
            rep.put("c", num(fit.c));
            rep.put("rms", num(fit.rms));
            let y0 = r.interface_estimate.unwrap_or(c.y0);
            let mut t = Table::new(&["z", "f", "fit"]);
            for z in expansion::log_space(cfg.log_lo * y0, cfg.log_hi * y0, 200) {
                let f = r.traj.dense_eval(y0 - z).map_err(compute)?[0];
                t.row(&[num(z), num(f), num(fit.c * z * (-z.ln()).powf(fit.p))]);
            }
            rep.data(out, t);
        }
        Command::Noexist4 { .. } => {
            let p = profile_problem(cfg, 4.0)?;
            let rows = nonexistence_scan(&p, &cfg.mu_list, &integrator(cfg)).map_err(compute)?;
            let all_positive = rows.iter().all(|r| r.min_f > 0.0);
            let mut t = Table::new(&["mu", "min_f", "y_at_min", "terminal"]);
            for r in &rows {
                t.row(&[num(r.mu), num(r.min_f), num(r.y_at_min), r.terminal.label().to_string()]);
            }
            rep.put("shots", rows.len().to_string());
            rep.put("min_f", join(&rows.iter().map(|r| r.min_f).collect::<Vec<_>>()));
            rep.put("all_positive", all_positive.to_string());
            rep.data(out, t);
        }
        Command::Sweep { .. } => sweep(cfg, out, &mut rep)?,
        Command::ReproFigs => repro_figs(cfg, out, &mut rep)?,
    }
    Ok(rep)
}

fn terminal_cells(key: String, t: &Result<(f64, f64), expansion::ExpansionError>) -> Vec<String> {
    match t {
        Ok((f0, f1)) => vec![key, num(*f0), num(*f1), "ok".into()],
        Err(e) => vec![key, String::new(), String::new(), csv_safe(&e.to_string())],
    }
}

fn csv_safe(s: &str) -> String {
    s.replace([',', '\n'], " ")
}

fn cubic_table(n: f64, rule: ExponentRule) -> Result<Table, CliError> {
    let mut t = Table::new(&["l", "h"]);
    for i in 0..=300 {
        let l = 3.0 * i as f64 / 300.0;
        let h = match rule {
            ExponentRule::Characteristic => hn(n, l),
            ExponentRule::Linearized => hn_linearized(n, l),
        }
        .map_err(compute)?;
        t.row(&[num(l), num(h)]);
    }
    Ok(t)
}

fn sweep_defaults(param: &str) -> Vec<f64> {
    match param {
        "n" => (0..=6).map(|i| 1.7 + 0.05 * i as f64).collect(),
        "mu" => (0..=10).map(|i| -0.1 * i as f64).collect(),
        "d" => vec![-10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0],
        _ => vec![1e-11, 5e-12, 2.5e-12],
    }
}

fn sweep_header(task: &str) -> Vec<&'static str> {
    let mut h = vec!["param", "value", "status"];
    h.extend(match task {
        "findmu" => vec!["mu_star", "y0", "sign_changes", "bracket_width", "steps"],
        "shoot" => vec!["outcome", "terminal", "y_end", "min_f", "first_zero", "steps"],
        "osc" => vec!["kind", "period", "amplitude", "steps"],
        "cubic" => vec!["l", "admissible", "b0"],
        _ => vec!["f0", "f1", "f2", "steps"],
    });
    h.extend(["rtol", "atol", "eps"]);
    h
}

/// Summary cells for one sweep point (without the key and metadata columns).
fn sweep_point(task: &str, cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let n = cfg.require_n().map_err(|_| CliError::Usage("--n is required".into()));
    let ic = integrator(cfg);
    Ok(match task {
        "findmu" => {
            let p = profile_problem(cfg, n?)?;
            let c = critical(cfg, &p)?;
            let z = sign_changes_around(&c.microscope, c.y0, cfg.window, cfg.resolution);
            let steps = c.result_low.steps() + c.result_high.steps();
            vec![num(c.mu_star), num(c.y0), z.len().to_string(), num(c.bracket_width), steps.to_string()]
        }
        "shoot" => {
            let r = shoot(&profile_problem(cfg, n?)?, cfg.mu, &ic).map_err(compute)?;
            vec![
                r.outcome.label().into(),
                r.terminal.label().into(),
                num(r.y_end()),
                num(r.min_f()),
                opt_num(r.zeros.first().copied()),
                r.steps().to_string(),
            ]
        }
        "osc" => {
            let r = classify_with_retries(&osc_problem(cfg, n?), &ic).map_err(compute)?;
            let steps = run_osc(&osc_problem(cfg, r.n), osc_problem(cfg, r.n).default_init(), &ic)
                .map(|t| t.stats.accepted)
                .unwrap_or(0);
            vec![r.kind.label().into(), opt_num(r.period), opt_num(r.amplitude), steps.to_string()]
        }
        "cubic" => {
            let n = n?;
            let (l, adm) = solve_l_with(n, rule(cfg)).map_err(compute)?;
            vec![num(l), adm.to_string(), num(b0(n).map_err(compute)?)]
        }
        _ => {
            let bs = backshoot_positive(n?, cfg.d, &backshoot_options(cfg), &ic).map_err(compute)?;
            vec![
                num(bs.origin[0]),
                num(bs.origin[1]),
                num(bs.origin[2]),
                bs.traj.len().to_string(),
            ]
        }
    })
}

fn sweep(cfg: &RunConfig, out: Option<&Path>, rep: &mut Report) -> Result<(), CliError> {
    let task = cfg.sweep_task.as_str();
    let param = cfg.sweep_param.as_str();
    let values = cfg.sweep_values.clone().unwrap_or_else(|| sweep_defaults(param));
    let width = sweep_header(task).len() - 6;
    let rows: Vec<Result<Vec<String>, CliError>> = values
        .par_iter()
        .map(|&v| {
            let mut c = cfg.clone();
            c.set(param, &v.to_string()).map_err(|e| CliError::Usage(format!("--values: {e}")))?;
            c.validate().map_err(|e| CliError::Usage(format!("--values: {e}")))?;
            let cells = match sweep_point(task, &c) {
                Ok(cells) => ("ok".to_string(), cells),
                Err(CliError::Compute(msg)) => (csv_safe(&msg), vec![String::new(); width]),
                Err(e) => return Err(e),
            };
            let mut row = vec![param.to_string(), num(v), cells.0];
            row.extend(cells.1);
            row.extend([num(c.rtol), num(c.atol), num(c.eps)]);
            Ok(row)
        })
        .collect();
    let mut t = Table::new(&sweep_header(task));
    let mut failed = 0;
    for r in rows {
        let r = r?;
        failed += usize::from(r[2] != "ok");
        t.row(&r);
    }
    rep.put("task", task);
    rep.put("param", param);
    rep.put("points", values.len().to_string());
    rep.put("failed", failed.to_string());
    if out.is_none() {
        print!("{}", t.text());
    }
    rep.data(out, t);
    Ok(())
}

fn repro_figs(cfg: &RunConfig, out: Option<&Path>, rep: &mut Report) -> Result<(), CliError> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| crate::resolve_out(Path::new("figs")));
    let ic = integrator(cfg);
    let mut files: Vec<(&str, Table)> = Vec::new();

    let c17 = critical(cfg, &profile_problem(cfg, 1.7)?)?;
    rep.put("fig01", format!("n=1.7 mu={} zeros={}", num(c17.microscope.mu), join(&c17.zeros_near_interface)));
    files.push(("fig01.csv", profile_table(&c17.microscope, cfg.resample, |_| true)));

    let r2 = microscope(&profile_problem(cfg, 1.75)?, -0.434097009, &ic).map_err(compute)?;
    rep.put("fig02", format!("n=1.75 mu=-0.434097009 first_zero={}", opt_num(r2.zeros.first().copied())));
    files.push(("fig02.csv", profile_table(&r2, cfg.resample, |_| true)));

    let r3 = microscope(&profile_problem(cfg, 1.75987)?, -0.435513146293, &ic).map_err(compute)?;
    rep.put("fig03", format!("n=1.75987 mu=-0.435513146293 y0={}", opt_num(r3.interface_estimate)));
    files.push(("fig03.csv", profile_table(&r3, cfg.resample, |_| true)));

    let c18 = critical(cfg, &profile_problem(cfg, 1.8)?)?;
    rep.put("fig04", format!("n=1.8 mu_star={} y0={}", num(c18.mu_star), num(c18.y0)));
    files.push(("fig04.csv", profile_table(c18.overshoot_side(), cfg.resample, |_| true)));
    let lo = (1.0 - cfg.window) * c18.y0;
    rep.put("fig05", format!("n=1.8 near interface y>={}", num(lo)));
    files.push(("fig05.csv", profile_table(&c18.microscope, cfg.resample, |y| y >= lo)));

    let c2 = critical(cfg, &profile_problem(cfg, 2.0)?)?;
    rep.put("fig06", format!("n=2 mu_star={} y0={}", num(c2.mu_star), num(c2.y0)));
    files.push(("fig06.csv", profile_table(c2.overshoot_side(), cfg.resample, |_| true)));

    let c3 = critical(cfg, &profile_problem(cfg, 3.0)?)?;
    rep.put("fig07", format!("n=3 mu_star={} y0={}", num(c3.mu_star), num(c3.y0)));
    files.push(("fig07.csv", profile_table(c3.overshoot_side(), cfg.resample, |_| true)));

    let p4 = profile_problem(cfg, 4.0)?;
    let mut t8 = Table::new(&["mu", "y", "f", "f1", "f2", "event"]);
    for &mu in &cfg.mu_list {
        let r = shoot(&p4, mu, &ic).map_err(compute)?;
        let t = profile_table(&r, cfg.resample, |_| true);
        for line in t.text().lines().skip(1) {
            let mut cells = vec![num(mu)];
            cells.extend(line.split(',').map(str::to_string));
            t8.row(&cells);
        }
    }
    rep.put("fig08", format!("n=4 mu={}", join(&cfg.mu_list)));
    files.push(("fig08.csv", t8));

    for (name, n) in [("fig10.csv", 2.0), ("fig11.csv", 1.8), ("fig12.csv", 1.7)] {
        let (l, _) = solve_l_with(n, rule(cfg)).map_err(compute)?;
        rep.put(&name[..5], format!("n={n} l={}", num(l)));
        files.push((name, cubic_table(n, rule(cfg))?));
    }

    rep.put("dir", dir.display().to_string());
    for (name, t) in files {
        rep.files.push((dir.join(name), t.text().to_string()));
    }
    rep.sidecar = Some(dir.join("figures.json"));
    Ok(())
}
