//! Boundary cases `n = 3` and `n = 4`.
//!
//! At `n = 3` the power `3/n` equals one and the interface behaviour is
//! linear up to a logarithmic factor, `f ~ C z |ln z|^p`. At `n = 4` forward
//! shots with `f''(0) < 0` turn back up before reaching zero.

use crate::expansion::{linear_fit, log_space};
use crate::ivp::IntegratorConfig;
use crate::profile::{shoot, ProfileError, ProfileProblem, ShootResult, TerminalReason};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("fit window ({lo}, {hi}) has too little range in ln|ln z|")]
    WindowTooClose { lo: f64, hi: f64 },
    #[error("fit window ({lo}, {hi}) must lie inside (0, 0.2)")]
    WindowOutOfRange { lo: f64, hi: f64 },
    #[error("profile is not positive at z = {z}")]
    NonPositive { z: f64 },
    #[error("shot has no interface estimate")]
    NoInterface,
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub c: f64,
    pub p: f64,
    /// Relative window `(z_min, z_max)`, in units of `y0`.
    pub window: (f64, f64),
    pub rms: f64,
}

pub const DEFAULT_LOG_WINDOW: (f64, f64) = (1e-4, 1e-2);
const FIT_POINTS: usize = 200;

/// Fits `ln(f/z) = ln C + p ln|ln z|` for `z` log-spaced in
/// `(window.0 y0, window.1 y0)`; `f` is sampled through `profile(z)`.
pub fn logfit(profile: impl Fn(f64) -> Option<f64>, y0: f64, window: (f64, f64)) -> Result<LogFit, SpecialError> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi < 0.2) {
        return Err(SpecialError::WindowOutOfRange { lo, hi });
    }
    let z_lo = lo * y0;
    let z_hi = hi * y0;
    let spread = (-z_lo.ln()).ln() - (-z_hi.ln()).ln();
    if !(spread > 0.05) {
        return Err(SpecialError::WindowTooClose { lo, hi });
    }
    let mut xs = Vec::with_capacity(FIT_POINTS);
    let mut ys = Vec::with_capacity(FIT_POINTS);
    for z in log_space(z_lo, z_hi, FIT_POINTS) {
        let f = profile(z).filter(|f| *f > 0.0).ok_or(SpecialError::NonPositive { z })?;
        xs.push((-z.ln()).ln());
        ys.push((f / z).ln());
    }
    let (p, b) = linear_fit(&xs, &ys).ok_or(SpecialError::WindowTooClose { lo, hi })?;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - p * x - b).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    Ok(LogFit {
        c: b.exp(),
        p,
        window,
        rms,
    })
}

/// Log fit on a critical forward shot at `n = 3`; `z = y0 - y` with `y0` the
/// shot's interface estimate.
pub fn logfit_n3(r: &ShootResult, window: (f64, f64)) -> Result<LogFit, SpecialError> {
    let y0 = r.interface_estimate.ok_or(SpecialError::NoInterface)?;
    logfit(|z| r.traj.dense_eval(y0 - z).ok().map(|s| s[0]), y0, window)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonexistenceRow {
    pub mu: f64,
    pub min_f: f64,
    pub y_at_min: f64,
    pub terminal: TerminalReason,
}

/// Forward shots at `n = 4` recording the minimum of `f` before the run stops.
pub fn nonexistence_scan_n4(mu_list: &[f64], cfg: &IntegratorConfig) -> Result<Vec<NonexistenceRow>, SpecialError> {
    nonexistence_scan(&ProfileProblem::new(4.0), mu_list, cfg)
}

pub fn nonexistence_scan(
    p: &ProfileProblem,
    mu_list: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<NonexistenceRow>, SpecialError> {
    mu_list
        .iter()
        .map(|&mu| {
            let r = shoot(p, mu, cfg)?;
            let (y_at_min, min_f) = r
                .traj
                .nodes()
                .map(|(y, s)| (y, s[0]))
                .fold((0.0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
            Ok(NonexistenceRow {
                mu,
                min_f,
                y_at_min,
                terminal: r.terminal,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_log_profile() {
        let c0 = 3.0 / 2f64.sqrt();
        let fit = logfit(|z| Some(c0 * z * (-z.ln()).powf(1.0 / 3.0)), 1.0, DEFAULT_LOG_WINDOW).unwrap();
        assert!((fit.p - 1.0 / 3.0).abs() < 1e-3);
        assert!((fit.c / c0 - 1.0).abs() < 1e-3);
        assert!(fit.rms < 1e-10);
    }

    #[test]
    fn window_checks() {
        let f = |z: f64| Some(z);
        assert!(matches!(logfit(f, 1.0, (1e-3, 0.5)), Err(SpecialError::WindowOutOfRange { .. })));
        assert!(matches!(logfit(f, 1.0, (1e-3, 1.01e-3)), Err(SpecialError::WindowTooClose { .. })));
        assert!(matches!(logfit(|_| Some(-1.0), 1.0, DEFAULT_LOG_WINDOW), Err(SpecialError::NonPositive { .. })));
    }
}
