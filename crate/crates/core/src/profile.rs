//! Forward shooting for the similarity profile.
//!
//! The profile solves `|f|^n f''' = k y f` on `y > 0` with `f(0) = 1`,
//! `f'(0) = 0`, `f''(0) = mu`, where `|f|^n` is regularized as
//! `(eps^2 + f^2)^(n/2)`. With [`ProfileScale::Similarity`] the constant is
//! `k = 1/(4+n)`, the scale in which mass-preserving source solutions
//! `t^(-1/(4+n)) f(x t^(-1/(4+n)))` are written; [`ProfileScale::Unit`] uses
//! `k = 1`. The two are related by `f_s(y) = f_u(c y)`, `c^4 = k`.
//!
//! A shot is an *Overshoot* when `f` turns back up (local minimum, blow-up or
//! slope cap) and an *Undershoot* when it falls through `-eta`. The critical
//! `mu*` separates the two.

use crate::ivp::{self, Direction, EventSpec, IntegratorConfig, IvpError, Stop, Trajectory};
use crate::{reg_quotient, DEFAULT_EPS};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("invalid profile problem: {0}")]
    InvalidProblem(String),
    #[error("bracket [{mu_lo}, {mu_hi}] is invalid: both ends classify as {outcome:?}")]
    BracketInvalid { mu_lo: f64, mu_hi: f64, outcome: Outcome },
    #[error("bisection stalled on an indeterminate shot at mu = {mu}")]
    ToleranceStall { mu: f64 },
    #[error(transparent)]
    Integration(#[from] IvpError),
}

/// Normalization of the similarity ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProfileScale {
    /// `k = 1/(4+n)`.
    #[default]
    Similarity,
    /// `k = 1`.
    Unit,
}

impl ProfileScale {
    pub fn k(self, n: f64) -> f64 {
        match self {
            ProfileScale::Similarity => 1.0 / (4.0 + n),
            ProfileScale::Unit => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProfileScale::Similarity => "similarity",
            ProfileScale::Unit => "unit",
        }
    }
}

impl std::str::FromStr for ProfileScale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "similarity" => Ok(Self::Similarity),
            "unit" => Ok(Self::Unit),
            other => Err(format!("unknown scale '{other}' (expected similarity or unit)")),
        }
    }
}

/// `y` and `mu` conversion factors from `from` to `to`: returns `(cy, cmu)`
/// with `y_to = cy * y_from` and `mu_to = cmu * mu_from`.
pub fn scale_factors(n: f64, from: ProfileScale, to: ProfileScale) -> (f64, f64) {
    // f_from(y) = f_to(c y) with c^4 = k_from / k_to
    let c = (from.k(n) / to.k(n)).powf(0.25);
    (c, 1.0 / (c * c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileProblem {
    pub n: f64,
    pub eps: f64,
    pub y_max: f64,
    pub blowup_f: f64,
    /// `eta`: an Undershoot is declared once `f` falls through `-eta`.
    pub undershoot_margin: f64,
    pub slope_cap: f64,
    pub zero_resolution: f64,
    pub scale: ProfileScale,
}

impl ProfileProblem {
    pub fn new(n: f64) -> Self {
        Self {
            n,
            eps: DEFAULT_EPS,
            y_max: 6.0,
            blowup_f: 1e3,
            undershoot_margin: 1e-9,
            slope_cap: 1e3,
            zero_resolution: 1e-10,
            scale: ProfileScale::Similarity,
        }
    }

    pub fn with_scale(mut self, scale: ProfileScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn k(&self) -> f64 {
        self.scale.k(self.n)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let bad = |msg: &str| Err(ProfileError::InvalidProblem(msg.to_string()));
        if !(self.n > 0.0 && self.n.is_finite()) {
            return bad("n must be positive");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(self.y_max > 0.0 && self.y_max.is_finite()) {
            return bad("y_max must be positive");
        }
        if !(self.blowup_f > 1.0) {
            return bad("blowup_f must exceed 1");
        }
        if !(self.undershoot_margin > 0.0) {
            return bad("undershoot margin must be positive");
        }
        if !(self.slope_cap > 0.0) {
            return bad("slope_cap must be positive");
        }
        if !(self.zero_resolution > 0.0) {
            return bad("zero_resolution must be positive");
        }
        Ok(())
    }

    pub fn initial_state(&self, mu: f64) -> [f64; 3] {
        [1.0, 0.0, mu]
    }
}

/// Right-hand side `(f', f'', k y f (eps^2+f^2)^(-n/2))`.
#[inline]
pub fn profile_rhs(n: f64, eps: f64, k: f64, y: f64, s: &[f64; 3]) -> [f64; 3] {
    [s[1], s[2], k * y * reg_quotient(s[0], n, eps)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Overshoot,
    Undershoot,
    Indeterminate,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::Overshoot => "overshoot",
            Outcome::Undershoot => "undershoot",
            Outcome::Indeterminate => "indeterminate",
        }
    }
}

/// What stopped a shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalReason {
    BlowUp,
    SlopeCap,
    /// `f'` rose through zero: `f` has a local minimum and turns back up.
    LocalMinimum,
    /// `f` regrew through the observation level after approaching zero.
    Regrowth,
    /// `f` fell through `-eta`.
    NegativeExcursion,
    /// Horizon `y_max` reached.
    Horizon,
    /// The integrator stopped at a singularity (step underflow or overflow).
    Singular,
}

impl TerminalReason {
    pub fn label(self) -> &'static str {
        match self {
            TerminalReason::BlowUp => "blowup",
            TerminalReason::SlopeCap => "slope_cap",
            TerminalReason::LocalMinimum => "local_min",
            TerminalReason::Regrowth => "regrowth",
            TerminalReason::NegativeExcursion => "negative_excursion",
            TerminalReason::Horizon => "horizon",
            TerminalReason::Singular => "singular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approach {
    pub y: f64,
    pub abs_f: f64,
}

#[derive(Debug, Clone)]
pub struct ShootResult {
    pub n: f64,
    pub mu: f64,
    pub outcome: Outcome,
    pub terminal: TerminalReason,
    pub traj: Trajectory<3>,
    /// Positions where `f` changes sign, increasing.
    pub zeros: Vec<f64>,
    pub closest_approach: Approach,
    pub interface_estimate: Option<f64>,
}

impl ShootResult {
    pub fn y_end(&self) -> f64 {
        self.traj.t_last()
    }

    pub fn min_f(&self) -> f64 {
        self.traj.states().iter().map(|s| s[0]).fold(f64::INFINITY, f64::min)
    }

    /// Integrator steps taken.
    pub fn steps(&self) -> usize {
        self.traj.stats.accepted
    }
}

pub const EV_ZERO: usize = 0;
pub const EV_BLOWUP: usize = 1;
pub const EV_UNDER: usize = 2;
pub const EV_SLOPE: usize = 3;
pub const EV_LOCALMIN: usize = 4;
pub const EV_REGROW: usize = 5;

/// Name of a shot event id.
pub fn event_label(id: usize) -> &'static str {
    match id {
        EV_ZERO => "zero",
        EV_BLOWUP => "blowup",
        EV_UNDER => "undershoot",
        EV_SLOPE => "slope_cap",
        EV_LOCALMIN => "local_min",
        EV_REGROW => "regrowth",
        _ => "event",
    }
}

/// Observation margin used by [`microscope`].
pub const MICROSCOPE_MARGIN: f64 = 1e-3;
/// Level through which a regrowing microscope shot is stopped.
pub const MICROSCOPE_REGROW: f64 = 0.1;

#[derive(Clone, Copy)]
struct EventPlan {
    margin: f64,
    guard_min_positive: bool,
    regrow_level: Option<f64>,
}

fn run_shot(
    p: &ProfileProblem,
    mu: f64,
    y_start: f64,
    s0: [f64; 3],
    plan: EventPlan,
    cfg: &IntegratorConfig,
) -> Result<ShootResult, ProfileError> {
    p.validate()?;
    let (n, eps, k) = (p.n, p.eps, p.k());
    let blowup = p.blowup_f * s0[0].abs().max(1.0);
    let cap = p.slope_cap;
    let margin = plan.margin;
    let mut events = vec![
        EventSpec::new(|_, s: &[f64; 3]| s[0], Direction::Any, false),
        EventSpec::new(move |_, s: &[f64; 3]| s[0] - blowup, Direction::Rising, true),
        EventSpec::new(move |_, s: &[f64; 3]| s[0] + margin, Direction::Falling, true),
        EventSpec::new(move |_, s: &[f64; 3]| s[1] - cap, Direction::Rising, true).with_guard(|_, s| s[0] > 1.0),
    ];
    let min_ev = EventSpec::new(|_, s: &[f64; 3]| s[1], Direction::Rising, true);
    events.push(if plan.guard_min_positive {
        min_ev.with_guard(|_, s| s[0] > 0.0)
    } else {
        min_ev
    });
    if let Some(level) = plan.regrow_level {
        events.push(EventSpec::new(move |_, s: &[f64; 3]| s[0] - level, Direction::Rising, true));
    }

    let (traj, err) = ivp::integrate_partial(
        |y, s: &[f64; 3]| profile_rhs(n, eps, k, y, s),
        y_start,
        s0,
        p.y_max,
        &events,
        cfg,
    );
    let terminal = match (err, traj.stop) {
        (Some(IvpError::StepUnderflow { .. }), _) | (Some(IvpError::NonFinite { .. }), _) => TerminalReason::Singular,
        (Some(e), _) => return Err(e.into()),
        (None, Stop::Completed) => TerminalReason::Horizon,
        (None, Stop::Event(id)) => match id {
            EV_BLOWUP => TerminalReason::BlowUp,
            EV_UNDER => TerminalReason::NegativeExcursion,
            EV_SLOPE => TerminalReason::SlopeCap,
            EV_LOCALMIN => TerminalReason::LocalMinimum,
            EV_REGROW => TerminalReason::Regrowth,
            _ => unreachable!("event {id} is not terminal"),
        },
    };
    let zeros: Vec<f64> = traj.events_with_id(EV_ZERO).map(|e| e.t).collect();
    let closest_approach = if terminal == TerminalReason::LocalMinimum {
        Approach {
            y: traj.t_last(),
            abs_f: traj.last_state()[0].abs(),
        }
    } else {
        let mut best = Approach {
            y: traj.t_start(),
            abs_f: s0[0].abs(),
        };
        let zero_states = traj.events_with_id(EV_ZERO).map(|e| (e.t, &e.state));
        for (y, s) in traj.nodes().chain(zero_states) {
            if s[0].abs() < best.abs_f {
                best = Approach { y, abs_f: s[0].abs() };
            }
        }
        best
    };
    let interface_estimate = (closest_approach.abs_f < 1e-3 * s0[0].abs()).then_some(closest_approach.y);
    let mut res = ShootResult {
        n,
        mu,
        outcome: Outcome::Indeterminate,
        terminal,
        traj,
        zeros,
        closest_approach,
        interface_estimate,
    };
    res.outcome = classify(&res);
    Ok(res)
}

/// Shoots from `y = 0` with `(f, f', f'') = (1, 0, mu)`.
pub fn shoot(p: &ProfileProblem, mu: f64, cfg: &IntegratorConfig) -> Result<ShootResult, ProfileError> {
    shoot_from(p, 0.0, p.initial_state(mu), cfg)
}

/// Shoots from an arbitrary start; `mu` is recorded as `state[2]`.
pub fn shoot_from(
    p: &ProfileProblem,
    y_start: f64,
    state: [f64; 3],
    cfg: &IntegratorConfig,
) -> Result<ShootResult, ProfileError> {
    let plan = EventPlan {
        margin: p.undershoot_margin,
        guard_min_positive: false,
        regrow_level: None,
    };
    run_shot(p, state[2], y_start, state, plan, cfg)
}

/// Re-shoots at `mu` with a wide observation margin so that small negative
/// humps near the interface, and their return, are visible. Local minima only
/// stop the run where `f > 0`; a return through `f = 0.1` counts as regrowth.
pub fn microscope(p: &ProfileProblem, mu: f64, cfg: &IntegratorConfig) -> Result<ShootResult, ProfileError> {
    let plan = EventPlan {
        margin: MICROSCOPE_MARGIN.max(p.undershoot_margin),
        guard_min_positive: true,
        regrow_level: Some(MICROSCOPE_REGROW),
    };
    run_shot(p, mu, 0.0, p.initial_state(mu), plan, cfg)
}

/// Below this `|f|` a singular stop is classified by the sign of `f'`.
pub const SINGULAR_LAYER: f64 = 1e-6;

/// Outcome from the terminal reason; a horizon stop counts as Overshoot only
/// if `f`, `f'` and `f''` are all positive there. A singular stop goes by the
/// sign of `f`, or of `f'` when `f` is already within [`SINGULAR_LAYER`] of 0.
pub fn classify(r: &ShootResult) -> Outcome {
    match r.terminal {
        TerminalReason::BlowUp | TerminalReason::SlopeCap | TerminalReason::LocalMinimum | TerminalReason::Regrowth => {
            Outcome::Overshoot
        }
        TerminalReason::NegativeExcursion => Outcome::Undershoot,
        TerminalReason::Horizon => {
            let s = r.traj.last_state();
            if s.iter().all(|&v| v > 0.0) {
                Outcome::Overshoot
            } else {
                Outcome::Indeterminate
            }
        }
        TerminalReason::Singular => {
            // inside the regularization layer the sign of f' tells where f is heading
            let [f0, f1, _] = r.traj.last_state();
            let f = if f0.abs() < SINGULAR_LAYER { f1 } else { f0 };
            if f > 0.0 {
                Outcome::Overshoot
            } else if f < 0.0 {
                Outcome::Undershoot
            } else {
                Outcome::Indeterminate
            }
        }
    }
}

/// Default `mu` bracket for the similarity scale; converted for other scales.
pub fn default_mu_bracket(n: f64, scale: ProfileScale) -> (f64, f64) {
    let lo = if n <= 2.2 { -1.0 } else { -10.0 };
    let (_, cmu) = scale_factors(n, ProfileScale::Similarity, scale);
    (lo * cmu, 0.0)
}

#[derive(Debug, Clone)]
pub struct CriticalShoot {
    pub mu_star: f64,
    pub bracket_width: f64,
    pub y0: f64,
    pub zeros_near_interface: Vec<f64>,
    pub result_low: ShootResult,
    pub result_high: ShootResult,
    /// Wide-margin re-shot at the Overshoot end of the final bracket.
    pub microscope: ShootResult,
    pub iterations: usize,
}

impl CriticalShoot {
    /// The bracketing shot on the Overshoot side.
    pub fn overshoot_side(&self) -> &ShootResult {
        if self.result_low.outcome == Outcome::Overshoot {
            &self.result_low
        } else {
            &self.result_high
        }
    }

    pub fn undershoot_side(&self) -> &ShootResult {
        if self.result_low.outcome == Outcome::Undershoot {
            &self.result_low
        } else {
            &self.result_high
        }
    }
}

/// Default half-width of the microscopy window around `y0`.
pub const DEFAULT_WINDOW: f64 = 0.05;

/// Bisection on `mu` for the Overshoot/Undershoot boundary.
pub fn find_mu(
    p: &ProfileProblem,
    mu_lo: f64,
    mu_hi: f64,
    mu_tol: f64,
    cfg: &IntegratorConfig,
) -> Result<CriticalShoot, ProfileError> {
    if !(mu_tol > 0.0) || !(mu_lo < mu_hi) {
        return Err(ProfileError::InvalidProblem("need mu_lo < mu_hi and mu_tol > 0".into()));
    }
    let mut lo = shoot(p, mu_lo, cfg)?;
    let mut hi = shoot(p, mu_hi, cfg)?;
    for r in [&lo, &hi] {
        if r.outcome == Outcome::Indeterminate {
            return Err(ProfileError::ToleranceStall { mu: r.mu });
        }
    }
    if lo.outcome == hi.outcome {
        return Err(ProfileError::BracketInvalid {
            mu_lo,
            mu_hi,
            outcome: lo.outcome,
        });
    }
    let mut iterations = 0;
    while hi.mu - lo.mu > mu_tol {
        let mid = 0.5 * (lo.mu + hi.mu);
        if mid <= lo.mu || mid >= hi.mu {
            break;
        }
        let r = shoot(p, mid, cfg)?;
        iterations += 1;
        match r.outcome {
            Outcome::Indeterminate => return Err(ProfileError::ToleranceStall { mu: mid }),
            o if o == lo.outcome => lo = r,
            _ => hi = r,
        }
    }
    let over = if lo.outcome == Outcome::Overshoot { &lo } else { &hi };
    let y0 = over.closest_approach.y;
    let micro = microscope(p, over.mu, cfg)?;
    let zeros_near_interface = sign_changes_around(&micro, y0, DEFAULT_WINDOW, p.zero_resolution);
    Ok(CriticalShoot {
        mu_star: 0.5 * (lo.mu + hi.mu),
        bracket_width: hi.mu - lo.mu,
        y0,
        zeros_near_interface,
        result_low: lo,
        result_high: hi,
        microscope: micro,
        iterations,
    })
}

/// Zeros of `r` within `window` of its interface estimate that separate two
/// arcs on which `|f|` exceeds `resolution`. The arc after the last zero of a
/// run that ends by falling through the margin is a one-way escape, not an
/// oscillation, so that zero is never counted.
pub fn sign_changes_near_interface(r: &ShootResult, window: f64, resolution: f64) -> Vec<f64> {
    match r.interface_estimate {
        Some(y0) => sign_changes_around(r, y0, window, resolution),
        None => Vec::new(),
    }
}

/// As [`sign_changes_near_interface`] with an explicit centre.
pub fn sign_changes_around(r: &ShootResult, y0: f64, window: f64, resolution: f64) -> Vec<f64> {
    if r.zeros.is_empty() {
        return Vec::new();
    }
    let mut bounds = Vec::with_capacity(r.zeros.len() + 2);
    bounds.push(r.traj.t_start());
    bounds.extend_from_slice(&r.zeros);
    bounds.push(r.traj.t_last());
    let arcs: Vec<f64> = bounds.windows(2).map(|w| arc_peak(&r.traj, w[0], w[1])).collect();
    let escape_last = r.terminal == TerminalReason::NegativeExcursion;
    let n_arcs = arcs.len();
    r.zeros
        .iter()
        .enumerate()
        .filter(|&(i, &z)| {
            let right_is_escape = escape_last && i + 1 == n_arcs - 1;
            (z - y0).abs() <= window && !right_is_escape && arcs[i] > resolution && arcs[i + 1] > resolution
        })
        .map(|(_, &z)| z)
        .collect()
}

/// Max `|f|` on `[a, b]` from the nodes inside plus dense samples.
fn arc_peak(traj: &Trajectory<3>, a: f64, b: f64) -> f64 {
    let mut peak = 0.0_f64;
    for (t, s) in traj.nodes() {
        if t > a && t < b {
            peak = peak.max(s[0].abs());
        }
    }
    const SAMPLES: usize = 64;
    for i in 1..SAMPLES {
        let t = a + (b - a) * i as f64 / SAMPLES as f64;
        if let Ok(s) = traj.dense_eval(t) {
            peak = peak.max(s[0].abs());
        }
    }
    peak
}
