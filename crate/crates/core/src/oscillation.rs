//! The oscillatory component near the interface.
//!
//! Writing `f = z^m phi(s)`, `z = y0 - y`, `s = ln z`, `m = 3/n`, the leading
//! order of the profile equation reduces to the autonomous ODE
//!
//! `phi''' + 3(m-1) phi'' + (3m^2-6m+2) phi' + m(m-1)(m-2) phi + phi/|phi|^n = 0`.
//!
//! For small `n` it carries a stable sign-changing periodic orbit. The orbit
//! disappears at the heteroclinic exponent `n_h` when it collides with the
//! two constant equilibria `+-B0`; past that point forward orbits leave along
//! the unstable direction of `+-B0` and escape.

use crate::ivp::{self, Direction, EventSpec, IntegratorConfig, IvpError, Stop, Trajectory};
use crate::{reg_quotient, DEFAULT_EPS};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscError {
    #[error("n = {n} has no nonzero constant equilibrium (needs 3/2 < n < 3)")]
    NoEquilibrium { n: f64 },
    #[error("invalid oscillation problem: {0}")]
    InvalidProblem(String),
    #[error("bracket [{n_lo}, {n_hi}] is invalid: {reason}")]
    BracketInvalid { n_lo: f64, n_hi: f64, reason: String },
    #[error("classification stays indeterminate at n = {n}")]
    PersistentIndeterminate { n: f64 },
    #[error("no periodic orbit at n = {n} ({kind:?})")]
    NotPeriodic { n: f64, kind: AttractorKind },
    #[error(transparent)]
    Integration(#[from] IvpError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscProblem {
    pub n: f64,
    pub eps: f64,
    pub s_transient: f64,
    pub s_observe: f64,
    /// Orbits with `|phi|` above this are declared escaping.
    pub escape_level: f64,
}

impl OscProblem {
    pub fn new(n: f64) -> Self {
        Self {
            n,
            eps: DEFAULT_EPS,
            s_transient: 200.0,
            s_observe: 400.0,
            escape_level: 1e6,
        }
    }

    pub fn m(&self) -> f64 {
        3.0 / self.n
    }

    /// `(3(m-1), 3m^2-6m+2, m(m-1)(m-2))`.
    pub fn coefficients(&self) -> (f64, f64, f64) {
        let m = self.m();
        (3.0 * (m - 1.0), 3.0 * m * m - 6.0 * m + 2.0, m * (m - 1.0) * (m - 2.0))
    }

    pub fn validate(&self) -> Result<(), OscError> {
        let bad = |msg: &str| Err(OscError::InvalidProblem(msg.to_string()));
        if !(self.n > 0.0 && self.n < 3.0) {
            return bad("n must lie in (0, 3)");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(self.s_transient >= 0.0 && self.s_observe > 0.0) {
            return bad("s_transient must be non-negative and s_observe positive");
        }
        if !(self.escape_level > 0.0) {
            return bad("escape_level must be positive");
        }
        Ok(())
    }

    /// `(0.5 B0, 0, 0)` when the equilibrium exists, otherwise `(1, 0, 0)`.
    pub fn default_init(&self) -> [f64; 3] {
        match equilibrium_value(self.n) {
            Ok(b) => [0.5 * b, 0.0, 0.0],
            Err(_) => [1.0, 0.0, 0.0],
        }
    }
}

pub fn osc_rhs(p: &OscProblem, s: &[f64; 3]) -> [f64; 3] {
    let (a2, a1, a0) = p.coefficients();
    let [phi, d1, d2] = *s;
    [d1, d2, -(a2 * d2 + a1 * d1 + a0 * phi + reg_quotient(phi, p.n, p.eps))]
}

/// Nonzero constant solution `B0 = (-1/(m(m-1)(m-2)))^(1/n)`.
pub fn equilibrium_value(n: f64) -> Result<f64, OscError> {
    if !(n > 1.5 && n < 3.0) {
        return Err(OscError::NoEquilibrium { n });
    }
    let m = 3.0 / n;
    let a0 = m * (m - 1.0) * (m - 2.0);
    Ok((-1.0 / a0).powf(1.0 / n))
}

/// Absolute step floor used when the caller leaves `h_min` unset. Sign
/// changes cross a layer of width `eps` where the field is steep, and a
/// span-relative floor over `s ~ 600` cannot resolve it.
pub const OSC_H_MIN: f64 = 1e-14;

fn with_floor(cfg: &IntegratorConfig) -> IntegratorConfig {
    IntegratorConfig {
        h_min: cfg.h_min.or(Some(OSC_H_MIN)),
        ..*cfg
    }
}

pub const EV_MAX: usize = 0;
pub const EV_ESCAPE: usize = 1;

/// Integrates over `[0, s_transient + s_observe]`, recording local maxima of
/// `phi` (event id [`EV_MAX`]) and stopping on escape ([`EV_ESCAPE`]).
pub fn run_osc(p: &OscProblem, init: [f64; 3], cfg: &IntegratorConfig) -> Result<Trajectory<3>, OscError> {
    p.validate()?;
    let level = p.escape_level;
    let events = [
        EventSpec::new(|_, s: &[f64; 3]| s[1], Direction::Falling, false),
        EventSpec::new(move |_, s: &[f64; 3]| s[0].abs() - level, Direction::Rising, true),
    ];
    let pp = *p;
    Ok(ivp::integrate_with_events(
        move |_, s: &[f64; 3]| osc_rhs(&pp, s),
        0.0,
        init,
        p.s_transient + p.s_observe,
        &events,
        &with_floor(cfg),
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttractorKind {
    Periodic,
    Equilibrium,
    /// The orbit left every bounded set along the unstable direction of an
    /// equilibrium.
    Escape,
    Indeterminate,
}

impl AttractorKind {
    pub fn label(self) -> &'static str {
        match self {
            AttractorKind::Periodic => "periodic",
            AttractorKind::Equilibrium => "equilibrium",
            AttractorKind::Escape => "escape",
            AttractorKind::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorReport {
    pub n: f64,
    pub kind: AttractorKind,
    pub period: Option<f64>,
    /// Peak-to-peak amplitude.
    pub amplitude: Option<f64>,
    pub sign_changing: bool,
    /// For `Equilibrium` the limit; for `Escape` the equilibrium `+-B0` the
    /// orbit left from, signed by the escape direction.
    pub equilibrium_value: Option<f64>,
    /// Largest relative drift (Periodic) or deviation (Equilibrium).
    pub residual: f64,
    pub maxima: usize,
    pub s_end: f64,
}

const DRIFT_TOL: f64 = 0.01;
const MIN_MAXIMA: usize = 8;

pub fn classify_attractor(p: &OscProblem, cfg: &IntegratorConfig) -> Result<AttractorReport, OscError> {
    classify_attractor_from(p, p.default_init(), cfg)
}

pub fn classify_attractor_from(
    p: &OscProblem,
    init: [f64; 3],
    cfg: &IntegratorConfig,
) -> Result<AttractorReport, OscError> {
    let tr = run_osc(p, init, cfg)?;
    Ok(classify_trajectory(p, &tr))
}

/// Classification of a finished [`run_osc`] trajectory.
pub fn classify_trajectory(p: &OscProblem, tr: &Trajectory<3>) -> AttractorReport {
    let mut rep = AttractorReport {
        n: p.n,
        kind: AttractorKind::Indeterminate,
        period: None,
        amplitude: None,
        sign_changing: false,
        equilibrium_value: None,
        residual: f64::INFINITY,
        maxima: 0,
        s_end: tr.t_last(),
    };
    if tr.stop == Stop::Event(EV_ESCAPE) {
        let sign = tr.last_state()[0].signum();
        rep.kind = AttractorKind::Escape;
        rep.equilibrium_value = equilibrium_value(p.n).ok().map(|b| sign * b);
        return rep;
    }

    let s_end = tr.t_last();
    let maxima: Vec<f64> = tr
        .events_with_id(EV_MAX)
        .filter(|e| e.t >= p.s_transient)
        .map(|e| e.t)
        .collect();
    rep.maxima = maxima.len();

    let (lo, hi) = phi_range(tr, p.s_transient, s_end);
    rep.sign_changing = lo < 0.0 && hi > 0.0;

    if maxima.len() >= MIN_MAXIMA {
        let spacings: Vec<f64> = maxima.windows(2).map(|w| w[1] - w[0]).collect();
        let amps: Vec<f64> = maxima
            .windows(2)
            .map(|w| {
                let (a, b) = phi_range(tr, w[0], w[1]);
                b - a
            })
            .collect();
        let drift = |v: &[f64]| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let spread = v.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x))
                - v.iter().fold(f64::INFINITY, |a, &x| a.min(x));
            (mean, spread / mean.abs())
        };
        let (period, dp) = drift(&spacings);
        let (amp, da) = drift(&amps);
        if dp < DRIFT_TOL && da < DRIFT_TOL && rep.sign_changing {
            rep.kind = AttractorKind::Periodic;
            rep.period = Some(period);
            rep.amplitude = Some(amp);
            rep.residual = dp.max(da);
            return rep;
        }
    }

    // equilibrium: constant over the final quarter
    let c = tr.last_state()[0];
    let tail_start = s_end - 0.25 * (s_end - p.s_transient);
    let dev = tr
        .nodes()
        .filter(|(t, _)| *t >= tail_start)
        .map(|(_, s)| (s[0] - c).abs())
        .fold(0.0_f64, f64::max);
    if dev < 1e-6 * c.abs().max(1.0) {
        rep.kind = AttractorKind::Equilibrium;
        rep.equilibrium_value = Some(c);
        rep.residual = dev;
    }
    rep
}

/// `(min phi, max phi)` over `[a, b]`, from nodes and dense samples.
fn phi_range(tr: &Trajectory<3>, a: f64, b: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (t, s) in tr.nodes() {
        if t >= a && t <= b {
            lo = lo.min(s[0]);
            hi = hi.max(s[0]);
        }
    }
    // extrema are event points: include them exactly
    for e in tr.events_with_id(EV_MAX) {
        if e.t >= a && e.t <= b {
            hi = hi.max(e.state[0]);
        }
    }
    const SAMPLES: usize = 32;
    for i in 0..=SAMPLES {
        let t = a + (b - a) * i as f64 / SAMPLES as f64;
        if let Ok(s) = tr.dense_eval(t) {
            lo = lo.min(s[0]);
            hi = hi.max(s[0]);
        }
    }
    (lo, hi)
}

/// Classification with up to three retries at doubled observation length
/// while the result is Indeterminate.
pub fn classify_with_retries(p: &OscProblem, cfg: &IntegratorConfig) -> Result<AttractorReport, OscError> {
    let mut q = *p;
    let mut rep = classify_attractor(&q, cfg)?;
    for _ in 0..3 {
        if rep.kind != AttractorKind::Indeterminate {
            break;
        }
        q.s_observe *= 2.0;
        rep = classify_attractor(&q, cfg)?;
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NhEstimate {
    pub n_h: f64,
    /// Final bracket: Periodic at `lo`, non-periodic at `hi`.
    pub lo: f64,
    pub hi: f64,
    /// Set when the bisection ended on a persistently indeterminate midpoint.
    pub ended_on_indeterminate: bool,
    pub reports: Vec<AttractorReport>,
}

/// Bisection in `n` for the boundary between Periodic attractors and
/// non-periodic ones (Equilibrium or Escape).
pub fn find_nh(
    n_lo: f64,
    n_hi: f64,
    n_tol: f64,
    template: &OscProblem,
    cfg: &IntegratorConfig,
) -> Result<NhEstimate, OscError> {
    if !(n_lo < n_hi) || !(n_tol > 0.0) {
        return Err(OscError::BracketInvalid {
            n_lo,
            n_hi,
            reason: "need n_lo < n_hi and n_tol > 0".into(),
        });
    }
    let at = |n: f64| classify_with_retries(&OscProblem { n, ..*template }, cfg);
    let r_lo = at(n_lo)?;
    let r_hi = at(n_hi)?;
    for r in [&r_lo, &r_hi] {
        if r.kind == AttractorKind::Indeterminate {
            return Err(OscError::PersistentIndeterminate { n: r.n });
        }
    }
    let periodic = |r: &AttractorReport| r.kind == AttractorKind::Periodic;
    if periodic(&r_lo) == periodic(&r_hi) {
        return Err(OscError::BracketInvalid {
            n_lo,
            n_hi,
            reason: format!("both ends classify as {} / {}", r_lo.kind.label(), r_hi.kind.label()),
        });
    }
    let lo_periodic = periodic(&r_lo);
    let (mut lo, mut hi) = (n_lo, n_hi);
    let mut reports = vec![r_lo, r_hi];
    while hi - lo > n_tol {
        let mid = 0.5 * (lo + hi);
        let r = at(mid)?;
        let kind = r.kind;
        reports.push(r);
        if kind == AttractorKind::Indeterminate {
            return Ok(NhEstimate {
                n_h: mid,
                lo,
                hi,
                ended_on_indeterminate: true,
                reports,
            });
        }
        if (kind == AttractorKind::Periodic) == lo_periodic {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(NhEstimate {
        n_h: 0.5 * (lo + hi),
        lo,
        hi,
        ended_on_indeterminate: false,
        reports,
    })
}

/// One period of the stable periodic orbit, tabulated with dense output and
/// evaluated periodically.
#[derive(Debug, Clone)]
pub struct TabulatedOrbit {
    pub n: f64,
    pub period: f64,
    traj: Trajectory<3>,
}

impl TabulatedOrbit {
    /// `(phi, phi', phi'')` at phase `s` (any real).
    pub fn eval(&self, s: f64) -> [f64; 3] {
        let r = s.rem_euclid(self.period).min(self.traj.t_last());
        self.traj.dense_eval(r).expect("phase reduced into the tabulated span")
    }

    pub fn trajectory(&self) -> &Trajectory<3> {
        &self.traj
    }
}

/// Converges onto the periodic orbit and tabulates one period starting at a
/// maximum of `phi`.
pub fn periodic_orbit(p: &OscProblem, cfg: &IntegratorConfig) -> Result<TabulatedOrbit, OscError> {
    let tr = run_osc(p, p.default_init(), cfg)?;
    let rep = classify_trajectory(p, &tr);
    let period = match (rep.kind, rep.period) {
        (AttractorKind::Periodic, Some(t)) => t,
        _ => return Err(OscError::NotPeriodic { n: p.n, kind: rep.kind }),
    };
    let maxima: Vec<_> = tr.events_with_id(EV_MAX).collect();
    let last = maxima[maxima.len() - 1];
    let prev = maxima[maxima.len() - 2];
    let period = if (last.t - prev.t - period).abs() < DRIFT_TOL * period {
        last.t - prev.t
    } else {
        period
    };
    let pp = *p;
    let one = ivp::integrate(move |_, s: &[f64; 3]| osc_rhs(&pp, s), 0.0, prev.state, period, &with_floor(cfg))?;
    Ok(TabulatedOrbit {
        n: p.n,
        period,
        traj: one,
    })
}
