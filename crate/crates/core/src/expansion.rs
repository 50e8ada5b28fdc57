//! Interface-local analysis.
//!
//! In the reflected frame `z = y0 - y` with `y0 = 1` and `k = 1`, the profile
//! equation becomes `g^(n-1) g''' = -(1 - z)` for a positive profile `g`. Its
//! explicit leading solution is `B0 z^m`, `m = 3/n`, with
//! `B0^n = 1/(m(m-1)(2-m))`, defined for `3/2 < n < 3`. The one-parameter
//! bundle `B0 z^m + D z^l + ...` is shot backward from `z = delta` to the
//! symmetry point `z = 1`, where `f'(0) = 0` must hold.

use crate::ivp::{self, IntegratorConfig, IvpError, Trajectory};
use crate::oscillation::TabulatedOrbit;
use crate::profile::{profile_rhs, ProfileProblem, ShootResult};
use crate::roots::{bracketed_root, RootError};
use crate::{reg_quotient, DEFAULT_EPS};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpansionError {
    #[error("n = {n} lies outside (3/2, 3)")]
    OutOfRange { n: f64 },
    #[error("no root of the characteristic cubic in [2, 4]: {0}")]
    RootBracketFailed(RootError),
    #[error("z must be positive, got {z}")]
    NonPositiveZ { z: f64 },
    #[error("exponent l = {l} is outside the admissible window ({lo}, {hi})")]
    NotAdmissible { l: f64, lo: f64, hi: f64 },
    #[error("residual fit failed: {0}")]
    FitFailed(String),
    #[error("seed value f(delta) = {f} is below 10 eps")]
    SeedUnderflow { f: f64 },
    #[error("delta = {delta} outside [1e-4, 1e-1]")]
    InvalidDelta { delta: f64 },
    #[error("no periodic orbit supplied for n = {n}")]
    OrbitMissing { n: f64 },
    #[error(transparent)]
    Integration(#[from] IvpError),
}

fn check_range(n: f64) -> Result<f64, ExpansionError> {
    if n > 1.5 && n < 3.0 {
        Ok(3.0 / n)
    } else {
        Err(ExpansionError::OutOfRange { n })
    }
}

/// `m(m-1)(2-m)` with `m = 3/n`.
fn shell(m: f64) -> f64 {
    m * (m - 1.0) * (2.0 - m)
}

/// Leading coefficient `B0 = [m(m-1)(2-m)]^(-1/n)`.
pub fn b0(n: f64) -> Result<f64, ExpansionError> {
    let m = check_range(n)?;
    Ok(shell(m).powf(-1.0 / n))
}

/// Characteristic cubic `H_n(l) = l(l-1)(l-2) - (n-1)[m(m-1)(2-m)]^(2/n)`.
pub fn hn(n: f64, l: f64) -> Result<f64, ExpansionError> {
    let m = check_range(n)?;
    Ok(l * (l - 1.0) * (l - 2.0) - (n - 1.0) * shell(m).powf(2.0 / n))
}

/// Cubic from linearizing `g^(n-1) g''' = -1` about `B0 z^m`:
/// `l(l-1)(l-2) - (n-1) m(m-1)(2-m)`. Coincides with [`hn`] at `n = 2`.
pub fn hn_linearized(n: f64, l: f64) -> Result<f64, ExpansionError> {
    let m = check_range(n)?;
    Ok(l * (l - 1.0) * (l - 2.0) - (n - 1.0) * shell(m))
}

/// Which cubic fixes the bundle exponent `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentRule {
    /// Root of [`hn`].
    #[default]
    Characteristic,
    /// Root of [`hn_linearized`], the exponent for which the first-order
    /// residual of the two-term series cancels exactly.
    Linearized,
}

impl std::str::FromStr for ExponentRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "characteristic" => Ok(Self::Characteristic),
            "linearized" => Ok(Self::Linearized),
            other => Err(format!("unknown exponent rule '{other}'")),
        }
    }
}

/// Admissible window `(3/n, 1 + 3/n)` for `l`.
pub fn admissible_window(n: f64) -> (f64, f64) {
    (3.0 / n, 1.0 + 3.0 / n)
}

/// Root `l > 2` of [`hn`] with its admissibility flag.
pub fn solve_l(n: f64) -> Result<(f64, bool), ExpansionError> {
    solve_l_with(n, ExponentRule::Characteristic)
}

pub fn solve_l_with(n: f64, rule: ExponentRule) -> Result<(f64, bool), ExpansionError> {
    check_range(n)?;
    let h = |l: f64| match rule {
        ExponentRule::Characteristic => hn(n, l).unwrap_or(f64::NAN),
        ExponentRule::Linearized => hn_linearized(n, l).unwrap_or(f64::NAN),
    };
    let l = bracketed_root(h, 2.0, 4.0, 1e-14).map_err(ExpansionError::RootBracketFailed)?;
    let (lo, hi) = admissible_window(n);
    Ok((l, l > lo && l < hi))
}

/// Correction `E z^(m+1)` cancelling the `+z` part of the right-hand side.
pub fn third_term_coefficient(n: f64) -> Result<f64, ExpansionError> {
    let m = check_range(n)?;
    let b = b0(n)?;
    Ok(1.0 / (b.powf(n - 1.0) * m * (m - 1.0) * (6.0 - 2.0 * n)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionParams {
    pub n: f64,
    pub m: f64,
    pub b0: f64,
    pub l: f64,
    pub d: f64,
    pub admissible: bool,
}

impl ExpansionParams {
    pub fn new(n: f64, d: f64) -> Result<Self, ExpansionError> {
        Self::with_rule(n, d, ExponentRule::Characteristic)
    }

    pub fn with_rule(n: f64, d: f64, rule: ExponentRule) -> Result<Self, ExpansionError> {
        let (l, admissible) = solve_l_with(n, rule)?;
        Ok(Self {
            n,
            m: 3.0 / n,
            b0: b0(n)?,
            l,
            d,
            admissible,
        })
    }

    /// Same data with `l` replaced (admissibility recomputed).
    pub fn with_l(mut self, l: f64) -> Self {
        let (lo, hi) = admissible_window(self.n);
        self.l = l;
        self.admissible = l > lo && l < hi;
        self
    }

    fn require_admissible(&self) -> Result<(), ExpansionError> {
        if self.admissible {
            Ok(())
        } else {
            let (lo, hi) = admissible_window(self.n);
            Err(ExpansionError::NotAdmissible { l: self.l, lo, hi })
        }
    }
}

/// `c z^p` and its first three derivatives.
fn power_term(c: f64, p: f64, z: f64) -> [f64; 4] {
    let zp = z.powf(p);
    [
        c * zp,
        c * p * zp / z,
        c * p * (p - 1.0) * zp / (z * z),
        c * p * (p - 1.0) * (p - 2.0) * zp / (z * z * z),
    ]
}

/// Two-term series `B0 z^m + D z^l` and its `z`-derivatives up to third order.
pub fn eval_expansion(p: &ExpansionParams, z: f64) -> Result<[f64; 4], ExpansionError> {
    if !(z > 0.0) {
        return Err(ExpansionError::NonPositiveZ { z });
    }
    p.require_admissible()?;
    let a = power_term(p.b0, p.m, z);
    let b = power_term(p.d, p.l, z);
    Ok(std::array::from_fn(|i| a[i] + b[i]))
}

/// Series including the `E z^(m+1)` correction.
pub fn eval_expansion_three_term(p: &ExpansionParams, z: f64) -> Result<[f64; 4], ExpansionError> {
    let two = eval_expansion(p, z)?;
    let c = power_term(third_term_coefficient(p.n)?, p.m + 1.0, z);
    Ok(std::array::from_fn(|i| two[i] + c[i]))
}

/// `z`-grid used by [`residual_order`] by default: 41 log-spaced points on
/// `[1e-6, 1e-2]`.
pub fn default_residual_grid() -> Vec<f64> {
    log_space(1e-6, 1e-2, 41)
}

pub fn log_space(a: f64, b: f64, count: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| (la + (lb - la) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOrder {
    /// Least-squares slope of `ln|r|` against `ln z`.
    pub slope: f64,
    /// `min(1, 2(l - m))`: the order left once the first-order term cancels.
    pub expected: f64,
    /// `expected - 0.1`.
    pub gate: f64,
    pub passes: bool,
}

/// Fits the decay order of `r(z) = f^(n-1) f''' + (1 - z)` on the series.
pub fn residual_order(p: &ExpansionParams, z_grid: &[f64]) -> Result<ResidualOrder, ExpansionError> {
    if z_grid.len() < 3 {
        return Err(ExpansionError::FitFailed("need at least three grid points".into()));
    }
    let mut xs = Vec::with_capacity(z_grid.len());
    let mut ys = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let [f, _, _, f3] = eval_expansion(p, z)?;
        if !(f > 0.0) {
            return Err(ExpansionError::FitFailed(format!("series is not positive at z = {z}")));
        }
        let r = f.powf(p.n - 1.0) * f3 + (1.0 - z);
        if r == 0.0 || !r.is_finite() {
            return Err(ExpansionError::FitFailed(format!("residual vanishes or overflows at z = {z}")));
        }
        xs.push(z.ln());
        ys.push(r.abs().ln());
    }
    let (slope, _) = linear_fit(&xs, &ys).ok_or_else(|| ExpansionError::FitFailed("degenerate grid".into()))?;
    let expected = (2.0 * (p.l - p.m)).min(1.0);
    let gate = expected - 0.1;
    Ok(ResidualOrder {
        slope,
        expected,
        gate,
        passes: slope >= gate,
    })
}

/// Least-squares `y = a x + b`; returns `(a, b)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = sxy / sxx;
    Some((a, my - a * mx))
}

/// Seed truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedOrder {
    TwoTerm,
    #[default]
    ThreeTerm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackshootOptions {
    pub delta: f64,
    pub eps: f64,
    pub rule: ExponentRule,
    pub seed: SeedOrder,
}

impl Default for BackshootOptions {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            eps: DEFAULT_EPS,
            rule: ExponentRule::Characteristic,
            seed: SeedOrder::ThreeTerm,
        }
    }
}

/// Absolute step floor for backward shots that cross the `eps` layer.
pub const BACKSHOOT_H_MIN: f64 = 1e-16;

/// A backward shot in the reflected frame (`y0 = 1`, `k = 1`).
#[derive(Debug, Clone)]
pub struct BackshootState {
    pub n: f64,
    pub delta: f64,
    /// `(g, g', g'')` at `z = delta` (z-derivatives).
    pub seed: [f64; 3],
    /// `(f, f', f'')` at `y = 0` in the forward sign convention (`f' = -g'`).
    pub origin: [f64; 3],
    /// Trajectory in `z` from `delta` to `1`.
    pub traj: Trajectory<3>,
}

impl BackshootState {
    /// Slope at the symmetry point in the reflected variable, `g'(1) = -f'(0)`.
    pub fn reflected_slope(&self) -> f64 {
        -self.origin[1]
    }

    /// `(f, f', f'')` at forward position `y` in `[0, 1 - delta]`.
    pub fn profile_at(&self, y: f64) -> Result<[f64; 3], IvpError> {
        let g = self.traj.dense_eval(1.0 - y)?;
        Ok([g[0], -g[1], g[2]])
    }
}

fn check_delta(delta: f64) -> Result<(), ExpansionError> {
    if (1e-4..=1e-1).contains(&delta) {
        Ok(())
    } else {
        Err(ExpansionError::InvalidDelta { delta })
    }
}

/// Integrates `g''' = -(1 - z) g (eps^2 + g^2)^(-n/2)` from `z = delta` to 1.
pub fn backshoot_from_seed(
    n: f64,
    seed: [f64; 3],
    delta: f64,
    eps: f64,
    cfg: &IntegratorConfig,
) -> Result<BackshootState, ExpansionError> {
    if !(seed[0] >= 10.0 * eps) {
        return Err(ExpansionError::SeedUnderflow { f: seed[0] });
    }
    let cfg = IntegratorConfig {
        h_min: cfg.h_min.or(Some(BACKSHOOT_H_MIN)),
        ..*cfg
    };
    let traj = ivp::integrate(
        |z, g: &[f64; 3]| [g[1], g[2], -(1.0 - z) * reg_quotient(g[0], n, eps)],
        delta,
        seed,
        1.0,
        &cfg,
    )?;
    let g = traj.last_state();
    Ok(BackshootState {
        n,
        delta,
        seed,
        origin: [g[0], -g[1], g[2]],
        traj,
    })
}

/// Seed for the positive bundle at `z = delta`.
pub fn positive_seed(n: f64, d: f64, opts: &BackshootOptions) -> Result<[f64; 3], ExpansionError> {
    let p = ExpansionParams::with_rule(n, d, opts.rule)?;
    let s = match opts.seed {
        SeedOrder::TwoTerm => eval_expansion(&p, opts.delta)?,
        SeedOrder::ThreeTerm => eval_expansion_three_term(&p, opts.delta)?,
    };
    Ok([s[0], s[1], s[2]])
}

/// Backward shot along the positive bundle with coefficient `d`.
pub fn backshoot_positive(
    n: f64,
    d: f64,
    opts: &BackshootOptions,
    cfg: &IntegratorConfig,
) -> Result<BackshootState, ExpansionError> {
    check_delta(opts.delta)?;
    let seed = positive_seed(n, d, opts)?;
    backshoot_from_seed(n, seed, opts.delta, opts.eps, cfg)
}

/// Default `D` grid: `0` and 20 log-spaced magnitudes in `[1e-2, 1e3]` of each sign.
pub fn default_d_grid() -> Vec<f64> {
    let mags = log_space(1e-2, 1e3, 20);
    let mut g: Vec<f64> = mags.iter().rev().map(|m| -m).collect();
    g.push(0.0);
    g.extend(mags);
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub d: f64,
    /// `(f(0), f'(0))` in the forward convention, or the reason the shot failed.
    pub terminal: Result<(f64, f64), ExpansionError>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DRoot {
    pub d_lo: f64,
    pub d_hi: f64,
    pub d_star: f64,
    pub f0: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub n: f64,
    pub rows: Vec<ScanRow>,
    pub roots: Vec<DRoot>,
    pub min_abs_f1: f64,
}

impl ScanTable {
    /// Refined root with positive `f(0)` and smallest `|f'(0)|`.
    pub fn best_positive_root(&self) -> Option<&DRoot> {
        self.roots
            .iter()
            .filter(|r| r.f0 > 0.0)
            .min_by(|a, b| a.f1.abs().partial_cmp(&b.f1.abs()).expect("finite"))
    }
}

/// Terminal data over a `D` grid with sign-change brackets of `f'(0)` refined
/// by a bracketing root finder.
pub fn scan_d(n: f64, grid: &[f64], opts: &BackshootOptions, cfg: &IntegratorConfig) -> ScanTable {
    let shot = |d: f64| backshoot_positive(n, d, opts, cfg).map(|b| (b.origin[0], b.origin[1]));
    let rows: Vec<ScanRow> = grid.iter().map(|&d| ScanRow { d, terminal: shot(d) }).collect();
    let mut roots = Vec::new();
    let mut min_abs_f1 = f64::INFINITY;
    for r in &rows {
        if let Ok((_, f1)) = r.terminal {
            min_abs_f1 = min_abs_f1.min(f1.abs());
        }
    }
    for w in rows.windows(2) {
        let (Ok((_, a)), Ok((_, b))) = (&w[0].terminal, &w[1].terminal) else {
            continue;
        };
        if a.signum() == b.signum() && *a != 0.0 {
            continue;
        }
        let slope = |d: f64| shot(d).map(|t| t.1).unwrap_or(f64::NAN);
        let tol = 1e-14 * w[0].d.abs().max(w[1].d.abs()).max(1.0);
        if let Ok(d_star) = bracketed_root(slope, w[0].d, w[1].d, tol) {
            if let Ok((f0, f1)) = shot(d_star) {
                min_abs_f1 = min_abs_f1.min(f1.abs());
                roots.push(DRoot {
                    d_lo: w[0].d,
                    d_hi: w[1].d,
                    d_star,
                    f0,
                    f1,
                });
            }
        }
    }
    ScanTable {
        n,
        rows,
        roots,
        min_abs_f1,
    }
}

/// Seed `z^m phi(ln z + s0)` and its first two `z`-derivatives.
pub fn oscillatory_seed(n: f64, s0: f64, delta: f64, orbit: &TabulatedOrbit) -> [f64; 3] {
    let m = 3.0 / n;
    let [p, p1, p2] = orbit.eval(delta.ln() + s0);
    let zm = delta.powf(m);
    [
        zm * p,
        zm / delta * (m * p + p1),
        zm / (delta * delta) * (m * (m - 1.0) * p + (2.0 * m - 1.0) * p1 + p2),
    ]
}

/// Backward shot from the oscillatory bundle at phase `s0`.
pub fn backshoot_oscillatory(
    n: f64,
    s0: f64,
    orbit: Option<&TabulatedOrbit>,
    opts: &BackshootOptions,
    cfg: &IntegratorConfig,
) -> Result<BackshootState, ExpansionError> {
    check_delta(opts.delta)?;
    let orbit = orbit.ok_or(ExpansionError::OrbitMissing { n })?;
    let seed = oscillatory_seed(n, s0, opts.delta, orbit);
    // the oscillatory seed may start near a zero of phi; let the integrator
    // see it rather than rejecting small seeds
    let cfg = IntegratorConfig {
        h_min: cfg.h_min.or(Some(BACKSHOOT_H_MIN)),
        ..*cfg
    };
    let traj = ivp::integrate(
        |z, g: &[f64; 3]| [g[1], g[2], -(1.0 - z) * reg_quotient(g[0], n, opts.eps)],
        opts.delta,
        seed,
        1.0,
        &cfg,
    )?;
    let g = traj.last_state();
    Ok(BackshootState {
        n,
        delta: opts.delta,
        seed,
        origin: [g[0], -g[1], g[2]],
        traj,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScanRow {
    pub s0: f64,
    pub terminal: Result<(f64, f64), ExpansionError>,
}

/// Oscillatory backshoots over `count` phases in `[0, T)`.
pub fn scan_s0(
    n: f64,
    orbit: &TabulatedOrbit,
    count: usize,
    opts: &BackshootOptions,
    cfg: &IntegratorConfig,
) -> Vec<PhaseScanRow> {
    (0..count)
        .map(|i| {
            let s0 = orbit.period * i as f64 / count as f64;
            let terminal = backshoot_oscillatory(n, s0, Some(orbit), opts, cfg).map(|b| (b.origin[0], b.origin[1]));
            PhaseScanRow { s0, terminal }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceConditions {
    pub y: f64,
    pub height: f64,
    pub slope: f64,
    /// `|f|^n f'''`.
    pub flux: f64,
    /// `(h, f'(y - h y))` for `h` in `1e-2, 1e-4, 1e-6`.
    pub slope_probes: Vec<(f64, f64)>,
}

pub const PROBE_OFFSETS: [f64; 3] = [1e-2, 1e-4, 1e-6];

/// Height, slope and flux at the closest approach of a forward shot, plus
/// slopes at relative offsets inside the interface.
pub fn interface_conditions(r: &ShootResult, p: &ProfileProblem) -> InterfaceConditions {
    let y = r.closest_approach.y;
    let s = r.traj.dense_eval(y).unwrap_or_else(|_| r.traj.last_state());
    let f3 = profile_rhs(p.n, p.eps, p.k(), y, &s)[2];
    let slope_probes = PROBE_OFFSETS
        .iter()
        .filter_map(|&h| r.traj.dense_eval(y - h * y).ok().map(|st| (h, st[1])))
        .collect();
    InterfaceConditions {
        y,
        height: s[0].abs(),
        slope: s[1].abs(),
        flux: (s[0].abs().powf(p.n) * f3).abs(),
        slope_probes,
    }
}

/// Rescales a backshoot onto a forward profile normalized by `f(0) = 1` with
/// `k = k_fwd`: returns `(A, B)` such that `f_fwd(y) = A g(1 - y/B)` where
/// `B` is the forward interface position.
pub fn forward_scaling(bs: &BackshootState, k_fwd: f64) -> (f64, f64) {
    let a = 1.0 / bs.origin[0];
    // unit-k scaling A g(y/B_u) with A^n = B_u^4, then y_unit = c y_fwd, c^4 = k_fwd
    let b_unit = a.powf(bs.n / 4.0);
    let c = k_fwd.powf(0.25);
    (a, b_unit / c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b0_n2() {
        assert!((b0(2.0).unwrap() - (8.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((b0(2.0).unwrap() - 1.632_993_161_855_452_1).abs() < 1e-15);
    }

    #[test]
    fn b0_near_lower_edge() {
        assert!(b0(1.5 + 1e-9).unwrap() > 1e3);
    }

    #[test]
    fn b0_out_of_range() {
        assert!(matches!(b0(3.0), Err(ExpansionError::OutOfRange { .. })));
        assert!(matches!(b0(1.5), Err(ExpansionError::OutOfRange { .. })));
    }

    #[test]
    fn hn_negative_at_two() {
        for i in 0..28 {
            let n = 1.55 + 0.05 * i as f64;
            assert!(hn(n, 2.0).unwrap() < 0.0);
        }
    }

    #[test]
    fn cubics_agree_at_n2() {
        let (a, _) = solve_l(2.0).unwrap();
        let (b, _) = solve_l_with(2.0, ExponentRule::Linearized).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn third_term_balances_z() {
        // f^(n-1) f''' of the three-term series equals -1 + z + o(z)
        let n = 2.0;
        let p = ExpansionParams::new(n, 0.0).unwrap();
        let z = 1e-4;
        let [f, _, _, f3] = eval_expansion_three_term(&p, z).unwrap();
        let lhs = f.powf(n - 1.0) * f3;
        assert!((lhs - (-1.0 + z)).abs() < 1e-3 * z);
    }

    #[test]
    fn d_grid_shape() {
        let g = default_d_grid();
        assert_eq!(g.len(), 41);
        assert_eq!(g[20], 0.0);
        assert!((g[0] + 1e3).abs() < 1e-9 && (g[40] - 1e3).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn linear_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let (a, b) = linear_fit(&xs, &ys).unwrap();
        assert!((a - 2.0).abs() < 1e-14 && (b + 1.0).abs() < 1e-14);
    }

    #[test]
    fn delta_range_checked() {
        let o = BackshootOptions {
            delta: 0.5,
            ..BackshootOptions::default()
        };
        assert!(matches!(
            backshoot_positive(2.0, 0.0, &o, &IntegratorConfig::default()),
            Err(ExpansionError::InvalidDelta { .. })
        ));
    }
}
