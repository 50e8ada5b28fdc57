//! Adaptive Dormand-Prince 5(4) integration with dense output and event location.
//!
//! Every ODE in this crate is pushed through [`integrate_with_events`]. The
//! method is the classic seven-stage FSAL pair with Hairer's 4th-order
//! continuous extension, a PI step-size controller, and sign-change event
//! detection refined by bisection on the dense interpolant.
//!
//! Step rejection never hides a failure: a non-finite stage aborts with
//! [`IvpError::NonFinite`], and a step request below `h_min` aborts with
//! [`IvpError::StepUnderflow`], which callers treat as "singularity reached".

use thiserror::Error;

/// Errors raised by the integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IvpError {
    #[error("required step size fell below h_min at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    BudgetExceeded { t: f64, max_steps: usize },
    #[error("right-hand side produced a non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("event {id} bracket collapsed without a sign change near t = {t}")]
    RootRefinementFailed { t: f64, id: usize },
    #[error("t = {t} lies outside the trajectory span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
}

/// Tolerances and step limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; estimated from the problem when `None`.
    pub h_init: Option<f64>,
    /// Step floor; defaults to `1e-14 * |t_end - t0|`.
    pub h_min: Option<f64>,
    /// Upper bound on attempted (accepted + rejected) steps.
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            h_init: None,
            h_min: None,
            max_steps: 20_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), IvpError> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(IvpError::InvalidConfig("rtol and atol must be positive".into()));
        }
        if let Some(h) = self.h_min {
            if !(h > 0.0) {
                return Err(IvpError::InvalidConfig("h_min must be positive".into()));
            }
        }
        if let Some(h) = self.h_init {
            if !(h > 0.0) {
                return Err(IvpError::InvalidConfig("h_init must be positive".into()));
            }
        }
        if self.max_steps == 0 {
            return Err(IvpError::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Crossing direction of an event function, measured along the direction of
/// integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    Rising,
    Falling,
    #[default]
    Any,
}

impl Direction {
    fn accepts(self, before: f64, after: f64) -> bool {
        match self {
            Direction::Rising => before < 0.0 && after >= 0.0,
            Direction::Falling => before > 0.0 && after <= 0.0,
            Direction::Any => (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0),
        }
    }
}

type EventFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>;
type GuardFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> bool + 'a>;

/// A scalar function whose zero crossings are located during integration.
pub struct EventSpec<'a, const N: usize> {
    func: EventFn<'a, N>,
    pub direction: Direction,
    pub terminal: bool,
    guard: Option<GuardFn<'a, N>>,
}

impl<'a, const N: usize> EventSpec<'a, N> {
    pub fn new(func: impl Fn(f64, &[f64; N]) -> f64 + 'a, direction: Direction, terminal: bool) -> Self {
        Self {
            func: Box::new(func),
            direction,
            terminal,
            guard: None,
        }
    }

    /// Only crossings where `guard(t*, y*)` holds are reported; the others are
    /// skipped silently.
    pub fn with_guard(mut self, guard: impl Fn(f64, &[f64; N]) -> bool + 'a) -> Self {
        self.guard = Some(Box::new(guard));
        self
    }

    pub fn eval(&self, t: f64, y: &[f64; N]) -> f64 {
        (self.func)(t, y)
    }
}

/// A located event: crossing time, state there, and index into the event list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord<const N: usize> {
    pub t: f64,
    pub state: [f64; N],
    pub id: usize,
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy)]
struct DenseSegment<const N: usize> {
    t0: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        std::array::from_fn(|i| r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i]))))
    }
}

/// Why an integration run stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// Reached `t_end`.
    Completed,
    /// A terminal event fired; holds the event id.
    Event(usize),
}

/// Step statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Accepted nodes, per-step dense data and located events of one run.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    t: Vec<f64>,
    y: Vec<[f64; N]>,
    dense: Vec<DenseSegment<N>>,
    pub events: Vec<EventRecord<N>>,
    pub stop: Stop,
    pub stats: Stats,
}

impl<const N: usize> Trajectory<N> {
    fn start(t0: f64, y0: [f64; N]) -> Self {
        Self {
            t: vec![t0],
            y: vec![y0],
            dense: Vec::new(),
            events: Vec::new(),
            stop: Stop::Completed,
            stats: Stats::default(),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn states(&self) -> &[[f64; N]] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_last(&self) -> f64 {
        *self.t.last().expect("trajectory has at least one node")
    }

    pub fn last_state(&self) -> [f64; N] {
        *self.y.last().expect("trajectory has at least one node")
    }

    /// Iterator over `(t, state)` nodes.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[f64; N])> + '_ {
        self.t.iter().copied().zip(self.y.iter())
    }

    fn forward(&self) -> bool {
        self.t_last() >= self.t_start()
    }

    /// Dense evaluation. Node times return the stored node state exactly.
    pub fn dense_eval(&self, t: f64) -> Result<[f64; N], IvpError> {
        let (lo, hi) = if self.forward() {
            (self.t_start(), self.t_last())
        } else {
            (self.t_last(), self.t_start())
        };
        if !(t >= lo && t <= hi) {
            return Err(IvpError::OutOfSpan {
                t,
                start: self.t_start(),
                end: self.t_last(),
            });
        }
        if self.dense.is_empty() {
            return Ok(self.y[0]);
        }
        // index of the first node strictly past t along the integration direction
        let idx = if self.forward() {
            self.t.partition_point(|&s| s <= t)
        } else {
            self.t.partition_point(|&s| s >= t)
        };
        if idx > 0 && self.t[idx - 1] == t {
            return Ok(self.y[idx - 1]);
        }
        let seg = idx.clamp(1, self.dense.len()) - 1;
        Ok(self.dense[seg].eval(t))
    }

    /// Events with the given id, in order of occurrence.
    pub fn events_with_id(&self, id: usize) -> impl Iterator<Item = &EventRecord<N>> + '_ {
        self.events.iter().filter(move |e| e.id == id)
    }

    /// Uniform resampling of the dense output at `count` points spanning the run.
    pub fn resample(&self, count: usize) -> Vec<(f64, [f64; N])> {
        let (a, b) = (self.t_start(), self.t_last());
        if count < 2 {
            return vec![(a, self.y[0])];
        }
        (0..count)
            .map(|i| {
                let t = if i + 1 == count {
                    b
                } else {
                    a + (b - a) * (i as f64) / ((count - 1) as f64)
                };
                (t, self.dense_eval(t).expect("resample point inside span"))
            })
            .collect()
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller (Hairer's DOPRI5 defaults, growth clamp [0.2, 5]).
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

const MAX_BISECTIONS: usize = 200;

fn finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

fn initial_step<const N: usize, F>(
    rhs: &F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    span: f64,
    cfg: &IntegratorConfig,
    stats: &mut Stats,
) -> Result<f64, IvpError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let sk: [f64; N] = std::array::from_fn(|i| cfg.atol + cfg.rtol * y0[i].abs());
    let dnf: f64 = (0..N).map(|i| (f0[i] / sk[i]).powi(2)).sum::<f64>() / N as f64;
    let dny: f64 = (0..N).map(|i| (y0[i] / sk[i]).powi(2)).sum::<f64>() / N as f64;
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(span);
    let y1: [f64; N] = std::array::from_fn(|i| y0[i] + dir * h * f0[i]);
    let f1 = rhs(t0 + dir * h, &y1);
    stats.rhs_evals += 1;
    if !finite(&f1) {
        return Err(IvpError::NonFinite { t: t0 });
    }
    let der2 = ((0..N).map(|i| ((f1[i] - f0[i]) / sk[i]).powi(2)).sum::<f64>() / N as f64).sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    Ok((100.0 * h).min(h1).min(span))
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end`.
pub fn integrate<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<N>, IvpError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    integrate_with_events(rhs, t0, y0, t_end, &[], cfg)
}

/// Integrates with event location; located events are stored in
/// [`Trajectory::events`].
pub fn integrate_with_events<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    events: &[EventSpec<'_, N>],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<N>, IvpError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let (traj, err) = integrate_partial(rhs, t0, y0, t_end, events, cfg);
    match err {
        Some(e) => Err(e),
        None => Ok(traj),
    }
}

/// Like [`integrate_with_events`] but always hands back the trajectory
/// computed so far, together with the error that stopped it (if any).
pub fn integrate_partial<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    events: &[EventSpec<'_, N>],
    cfg: &IntegratorConfig,
) -> (Trajectory<N>, Option<IvpError>)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut traj = Trajectory::start(t0, y0);
    let err = run(&rhs, t0, y0, t_end, events, cfg, &mut traj).err();
    (traj, err)
}

fn run<const N: usize, F>(
    rhs: &F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    events: &[EventSpec<'_, N>],
    cfg: &IntegratorConfig,
    traj: &mut Trajectory<N>,
) -> Result<(), IvpError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    cfg.validate()?;
    if !(t_end != t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(IvpError::InvalidConfig("t_end must differ from t0".into()));
    }
    if !finite(&y0) {
        return Err(IvpError::NonFinite { t: t0 });
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let h_min = cfg.h_min.unwrap_or(1e-14 * span);

    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    stats.rhs_evals += 1;
    if !finite(&k1) {
        return Err(IvpError::NonFinite { t });
    }
    let mut h = match cfg.h_init {
        Some(h) => h.min(span),
        None => initial_step(rhs, t, &y, &k1, dir, span, cfg, &mut stats)?,
    };

    // last non-zero value of every event function
    let mut g_prev: Vec<f64> = events.iter().map(|e| e.eval(t, &y)).collect();
    let mut facold = 1e-4_f64;
    let mut reject = false;
    let mut attempts = 0usize;

    loop {
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        if attempts >= cfg.max_steps {
            traj.stats = stats;
            return Err(IvpError::BudgetExceeded {
                t,
                max_steps: cfg.max_steps,
            });
        }
        attempts += 1;
        if h < h_min && h < remaining {
            traj.stats = stats;
            return Err(IvpError::StepUnderflow { t, h });
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = dir * h;

        let k2 = rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            t + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let ysti = axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = rhs(t + hs, &ysti);
        let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t_end } else { t + hs };
        let k7 = rhs(t_new, &y_new);
        stats.rhs_evals += 6;

        if !(finite(&k2) && finite(&k3) && finite(&k4) && finite(&k5) && finite(&k6) && finite(&k7) && finite(&y_new)) {
            traj.stats = stats;
            return Err(IvpError::NonFinite { t });
        }

        let mut err = 0.0_f64;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sk).abs());
        }

        if err <= 1.0 {
            stats.accepted += 1;
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| hs * k1[i] - ydiff[i]);
            let r4: [f64; N] = std::array::from_fn(|i| ydiff[i] - hs * k7[i] - bspl[i]);
            let r5: [f64; N] = std::array::from_fn(|i| {
                hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            });
            let seg = DenseSegment {
                t0: t,
                h: hs,
                rcont: [y, ydiff, bspl, r4, r5],
            };

            if let Some(stop_at) = locate_events(events, &seg, t, &y, t_new, &y_new, &mut g_prev, traj)? {
                let (t_stop, y_stop, id) = stop_at;
                traj.t.push(t_stop);
                traj.y.push(y_stop);
                traj.dense.push(seg);
                traj.stop = Stop::Event(id);
                traj.stats = stats;
                return Ok(());
            }

            traj.t.push(t_new);
            traj.y.push(y_new);
            traj.dense.push(seg);

            let fac11 = err.powf(EXPO1);
            let mut fac = fac11 / facold.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            facold = err.max(1e-4);
            if reject {
                h_new = h_new.min(h);
            }
            reject = false;
            t = t_new;
            y = y_new;
            k1 = k7;
            h = h_new;
            if last {
                break;
            }
        } else {
            stats.rejected += 1;
            let fac11 = err.powf(EXPO1);
            let fac = (fac11 / SAFETY).min(1.0 / FAC_MIN);
            h /= fac;
            reject = true;
        }
    }
    traj.stop = Stop::Completed;
    traj.stats = stats;
    Ok(())
}

type StopPoint<const N: usize> = (f64, [f64; N], usize);

#[allow(clippy::too_many_arguments)]
fn locate_events<const N: usize>(
    events: &[EventSpec<'_, N>],
    seg: &DenseSegment<N>,
    t_a: f64,
    y_a: &[f64; N],
    t_b: f64,
    y_b: &[f64; N],
    g_prev: &mut [f64],
    traj: &mut Trajectory<N>,
) -> Result<Option<StopPoint<N>>, IvpError> {
    if events.is_empty() {
        return Ok(None);
    }
    let eval_at = |t: f64| -> [f64; N] {
        if t == t_a {
            *y_a
        } else if t == t_b {
            *y_b
        } else {
            seg.eval(t)
        }
    };
    let mut found: Vec<EventRecord<N>> = Vec::new();
    for (id, ev) in events.iter().enumerate() {
        let g_b = ev.eval(t_b, y_b);
        if g_b.is_nan() {
            return Err(IvpError::RootRefinementFailed { t: t_b, id });
        }
        let before = g_prev[id];
        if before != 0.0 && ev.direction.accepts(before, g_b) {
            // bisection on the interpolant; `a` keeps the sign of `before`
            let (mut a, mut b) = (t_a, t_b);
            let mut iters = 0;
            loop {
                let mid = 0.5 * (a + b);
                if mid == a || mid == b || iters >= MAX_BISECTIONS {
                    break;
                }
                let gm = ev.eval(mid, &eval_at(mid));
                if gm.is_nan() {
                    return Err(IvpError::RootRefinementFailed { t: mid, id });
                }
                if gm == 0.0 || gm.signum() != before.signum() {
                    b = mid;
                } else {
                    a = mid;
                }
                iters += 1;
            }
            let state = eval_at(b);
            let g_star = ev.eval(b, &state);
            if g_star.signum() == before.signum() && g_star != 0.0 {
                return Err(IvpError::RootRefinementFailed { t: b, id });
            }
            let keep = ev.guard.as_ref().is_none_or(|gd| gd(b, &state));
            if keep {
                found.push(EventRecord { t: b, state, id });
            }
        }
        if g_b != 0.0 {
            g_prev[id] = g_b;
        }
    }
    let fwd = t_b >= t_a;
    found.sort_by(|p, q| {
        let ord = p.t.partial_cmp(&q.t).expect("event times are finite");
        if fwd {
            ord
        } else {
            ord.reverse()
        }
    });
    let first_terminal = found.iter().position(|r| events[r.id].terminal);
    match first_terminal {
        Some(pos) => {
            let stop = found[pos];
            traj.events.extend(found.into_iter().take(pos + 1));
            Ok(Some((stop.t, stop.state, stop.id)))
        }
        None => {
            traj.events.extend(found);
            Ok(None)
        }
    }
}
