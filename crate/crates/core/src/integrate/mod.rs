//! Adaptive Dormand–Prince 5(4) integration with event localization, plus
//! outcome classification and parameter scans built on top of it.

mod classify;
mod cycle;
mod scan;

pub use classify::{
    classify_outcome, classify_saturated, Classification, ClassifyConfig, Excursion, ExitRegion, Outcome,
    OutcomeTag, Side,
};
pub use cycle::{detect_limit_cycle, CycleDetector, CycleInfo, Section};
pub use scan::{scan_parameter, Bracket, ScanPoint, ScanReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig<T> {
    pub rtol: T,
    pub atol: T,
    pub max_step: T,
    /// Final time τ_max.
    pub horizon: T,
    /// |g| at a localized event.
    pub event_tol: T,
    /// Stop when any |yᵢ| exceeds this.
    pub divergence_radius: T,
    pub initial_step: Option<T>,
    /// Take steps of exactly this size (no error control); for order tests.
    pub fixed_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        let c = |x: f64| T::from(x).unwrap();
        let eps = T::epsilon();
        IntegratorConfig {
            rtol: c(1e-10).max(eps * c(100.0)),
            atol: c(1e-12).max(eps * c(10.0)),
            max_step: c(1.0),
            horizon: c(1e4),
            event_tol: c(1e-12).max(eps * c(10.0)),
            divergence_radius: c(1e3),
            initial_step: None,
            fixed_step: None,
            max_steps: 50_000_000,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.rtol, self.atol, self.max_step, self.horizon, self.event_tol, self.divergence_radius];
        if pos.iter().any(|x| !(*x > T::zero()) || !x.is_finite()) {
            return Err(Error::invalid("integrator tolerances, step, horizon and radius must be positive"));
        }
        if self.fixed_step.map_or(false, |h| !(h > T::zero())) {
            return Err(Error::invalid("fixed step must be positive"));
        }
        Ok(())
    }
}

/// Scalar event function g(t, y); events fire where g changes sign.
pub struct EventFn<'a, T> {
    pub name: String,
    pub g: Box<dyn Fn(T, &[T]) -> T + Send + Sync + 'a>,
    /// Stop integrating at the first occurrence.
    pub terminal: bool,
}

impl<'a, T> EventFn<'a, T> {
    pub fn new(name: impl Into<String>, g: impl Fn(T, &[T]) -> T + Send + Sync + 'a) -> Self {
        EventFn { name: name.into(), g: Box::new(g), terminal: false }
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord<T> {
    pub event: usize,
    pub name: String,
    pub t: T,
    pub state: Vec<T>,
    /// +1 when g increased through zero, −1 when it decreased.
    pub direction: i8,
    /// Index into [`Trajectory::times`] of the event state.
    pub sample: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    TerminalEvent,
    Observer,
    Divergence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    /// Right-hand side at each stored state.
    pub rates: Vec<Vec<T>>,
    /// Accepted step sizes; `steps[k]` leads from sample k to k+1.
    pub steps: Vec<T>,
    pub events: Vec<EventRecord<T>>,
    pub stop: StopReason,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[T] {
        self.states.last().map(|s| s.as_slice()).unwrap_or(&[])
    }

    pub fn last_time(&self) -> T {
        *self.times.last().unwrap_or(&T::zero())
    }

    /// Applies `f` to every state and rate (rates transformed by `df(y, ẏ)`).
    pub fn map_states(
        &self,
        f: impl Fn(&[T]) -> Vec<T>,
        df: impl Fn(&[T], &[T]) -> Vec<T>,
    ) -> Trajectory<T> {
        Trajectory {
            times: self.times.clone(),
            states: self.states.iter().map(|s| f(s)).collect(),
            rates: self.states.iter().zip(&self.rates).map(|(s, r)| df(s, r)).collect(),
            steps: self.steps.clone(),
            events: self
                .events
                .iter()
                .map(|e| EventRecord { state: f(&e.state), ..e.clone() })
                .collect(),
            stop: self.stop,
        }
    }
}

/// Information handed to an observer after each accepted step.
pub struct StepView<'t, T> {
    pub trajectory: &'t Trajectory<T>,
    /// Events localized at the end of this step.
    pub new_events: &'t [EventRecord<T>],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// b − b̂ for the embedded error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct StepResult<T> {
    y: Vec<T>,
    f: Vec<T>,
    err: T,
}

fn weighted_rms<T: Real>(e: &[T], y0: &[T], y1: &[T], cfg: &IntegratorConfig<T>) -> T {
    let n = T::from(e.len()).unwrap();
    let s = e.iter().zip(y0).zip(y1).fold(T::zero(), |acc, ((ei, a), b)| {
        let sc = cfg.atol + cfg.rtol * a.abs().max(b.abs());
        let r = *ei / sc;
        acc + r * r
    });
    (s / n).sqrt()
}

fn dopri_step<T: Real, F>(rhs: &F, t: T, y: &[T], f0: &[T], h: T, cfg: &IntegratorConfig<T>) -> StepResult<T>
where
    F: Fn(T, &[T], &mut [T]),
{
    let n = y.len();
    let c = |x: f64| T::from(x).unwrap();
    let mut k: Vec<Vec<T>> = vec![f0.to_vec()];
    let mut tmp = vec![T::zero(); n];
    for s in 1..7 {
        for i in 0..n {
            let mut acc = T::zero();
            for (j, kj) in k.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    acc = acc + c(a) * kj[i];
                }
            }
            tmp[i] = y[i] + h * acc;
        }
        let mut out = vec![T::zero(); n];
        rhs(t + c(C[s]) * h, &tmp, &mut out);
        k.push(out);
    }
    // Stage 7 was evaluated at y_{n+1} (first-same-as-last).
    let y1 = tmp;
    let f1 = k[6].clone();
    let e: Vec<T> = (0..n)
        .map(|i| h * k.iter().zip(E.iter()).fold(T::zero(), |acc, (kj, ej)| acc + c(*ej) * kj[i]))
        .collect();
    let mut err = weighted_rms(&e, y, &y1, cfg);
    if y1.iter().chain(f1.iter()).any(|x| !x.is_finite()) {
        err = T::infinity();
    }
    StepResult { y: y1, f: f1, err }
}

fn initial_step<T: Real, F>(rhs: &F, t: T, y: &[T], f0: &[T], cfg: &IntegratorConfig<T>) -> T
where
    F: Fn(T, &[T], &mut [T]),
{
    let c = |x: f64| T::from(x).unwrap();
    let sc: Vec<T> = y.iter().map(|v| cfg.atol + cfg.rtol * v.abs()).collect();
    let norm = |v: &[T]| {
        let n = T::from(v.len()).unwrap();
        (v.iter().zip(&sc).fold(T::zero(), |a, (x, s)| a + (*x / *s) * (*x / *s)) / n).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < c(1e-5) || d1 < c(1e-5) { c(1e-6) } else { c(0.01) * d0 / d1 };
    let y1: Vec<T> = y.iter().zip(f0).map(|(a, b)| *a + h0 * *b).collect();
    let mut f1 = vec![T::zero(); y.len()];
    rhs(t + h0, &y1, &mut f1);
    let diff: Vec<T> = f1.iter().zip(f0).map(|(a, b)| *a - *b).collect();
    let d2 = norm(&diff) / h0;
    let m = d1.max(d2);
    let h1 = if m <= c(1e-15) { (h0 * c(1e-3)).max(c(1e-6)) } else { (c(0.01) / m).powf(c(0.2)) };
    (c(100.0) * h0).min(h1).min(cfg.max_step)
}

fn crossed<T: Real>(g0: T, g1: T) -> bool {
    g0 != T::zero() && (g1 == T::zero() || (g0 < T::zero()) != (g1 < T::zero()))
}

/// Integrates `y' = rhs(t, y)` from `t0` to `cfg.horizon`.
pub fn integrate_adaptive<T: Real, F>(
    rhs: F,
    t0: T,
    y0: &[T],
    cfg: &IntegratorConfig<T>,
    events: &[EventFn<'_, T>],
) -> Result<Trajectory<T>>
where
    F: Fn(T, &[T], &mut [T]),
{
    integrate_observed(rhs, t0, y0, cfg, events, |_| Control::Continue)
}

/// As [`integrate_adaptive`], calling `observer` after every accepted step.
pub fn integrate_observed<T: Real, F, O>(
    rhs: F,
    t0: T,
    y0: &[T],
    cfg: &IntegratorConfig<T>,
    events: &[EventFn<'_, T>],
    mut observer: O,
) -> Result<Trajectory<T>>
where
    F: Fn(T, &[T], &mut [T]),
    O: FnMut(StepView<'_, T>) -> Control,
{
    cfg.validate()?;
    let c = |x: f64| T::from(x).unwrap();
    let n = y0.len();
    let mut f0 = vec![T::zero(); n];
    rhs(t0, y0, &mut f0);
    if f0.iter().chain(y0.iter()).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { t: Scalar::to_f64(&t0), state: to_f64s(y0) });
    }
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0.to_vec()],
        rates: vec![f0.clone()],
        steps: vec![],
        events: vec![],
        stop: StopReason::Horizon,
    };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f = f0;
    let mut g: Vec<T> = events.iter().map(|e| (e.g)(t, &y)).collect();
    let mut h = cfg.fixed_step.or(cfg.initial_step).unwrap_or_else(|| initial_step(&rhs, t, &y, &f, cfg));
    let mut facold = c(1e-4);
    let mut last_rejected = false;
    let mut n_steps = 0usize;

    while t < cfg.horizon {
        n_steps += 1;
        if n_steps > cfg.max_steps {
            return Err(Error::StepUnderflow { t: Scalar::to_f64(&t), h: Scalar::to_f64(&h), state: to_f64s(&y) });
        }
        let remaining = cfg.horizon - t;
        let mut h_try = h.min(cfg.max_step);
        if cfg.fixed_step.is_some() {
            h_try = h;
        }
        let hit_end = h_try >= remaining;
        if hit_end {
            h_try = remaining;
        }
        let min_step = c(16.0) * T::epsilon() * t.abs().max(T::one());
        if h_try < min_step && !hit_end {
            return Err(Error::StepUnderflow { t: Scalar::to_f64(&t), h: Scalar::to_f64(&h_try), state: to_f64s(&y) });
        }
        let mut step = dopri_step(&rhs, t, &y, &f, h_try, cfg);
        let mut h_next;
        if cfg.fixed_step.is_some() {
            if !step.err.is_finite() {
                return Err(Error::NonFinite { t: Scalar::to_f64(&t), state: to_f64s(&y) });
            }
            h_next = h;
        } else {
            let err = step.err;
            if !(err <= T::one()) {
                let fac11 = if err.is_finite() { err.powf(c(0.17)) } else { c(10.0) };
                h = h_try / (fac11 / c(0.9)).min(c(10.0)).max(T::one());
                if !err.is_finite() {
                    h = h_try * c(0.1);
                }
                last_rejected = true;
                if h < min_step {
                    return Err(if err.is_finite() {
                        Error::StepUnderflow { t: Scalar::to_f64(&t), h: Scalar::to_f64(&h), state: to_f64s(&y) }
                    } else {
                        Error::NonFinite { t: Scalar::to_f64(&t), state: to_f64s(&y) }
                    });
                }
                continue;
            }
            let fac11 = err.max(c(1e-16)).powf(c(0.17));
            let mut fac = fac11 / facold.powf(c(0.04));
            fac = (fac / c(0.9)).max(c(0.1)).min(c(5.0));
            h_next = h_try / fac;
            if last_rejected {
                h_next = h_next.min(h_try);
            }
            facold = err.max(c(1e-4));
            last_rejected = false;
        }

        // Event localization: shrink the step to the earliest sign change.
        let mut h_used = h_try;
        let mut g_new: Vec<T> = events.iter().map(|e| (e.g)(t + h_used, &step.y)).collect();
        let any_cross = |gn: &[T]| g.iter().zip(gn).any(|(a, b)| crossed(*a, *b));
        let mut fired: Vec<usize> = vec![];
        if any_cross(&g_new) {
            let (mut lo, mut hi) = (T::zero(), h_try);
            let mut hi_step = step;
            let mut hi_g = g_new;
            for _ in 0..200 {
                let done = g
                    .iter()
                    .zip(&hi_g)
                    .filter(|(a, b)| crossed(**a, **b))
                    .all(|(_, b)| b.abs() <= cfg.event_tol);
                if done || hi - lo <= c(4.0) * T::epsilon() * (t.abs() + hi) {
                    break;
                }
                let mid = c(0.5) * (lo + hi);
                let s = dopri_step(&rhs, t, &y, &f, mid, cfg);
                let gm: Vec<T> = events.iter().map(|e| (e.g)(t + mid, &s.y)).collect();
                if any_cross(&gm) {
                    hi = mid;
                    hi_step = s;
                    hi_g = gm;
                } else {
                    lo = mid;
                }
            }
            h_used = hi;
            step = hi_step;
            g_new = hi_g;
            fired = (0..events.len()).filter(|&k| crossed(g[k], g_new[k])).collect();
            if cfg.fixed_step.is_none() {
                h_next = h_next.max(h_used);
            }
        }

        t = if hit_end && fired.is_empty() { cfg.horizon } else { t + h_used };
        y = step.y;
        f = step.f;
        traj.times.push(t);
        traj.states.push(y.clone());
        traj.rates.push(f.clone());
        traj.steps.push(h_used);
        let first_new = traj.events.len();
        for &k in &fired {
            traj.events.push(EventRecord {
                event: k,
                name: events[k].name.clone(),
                t,
                state: y.clone(),
                direction: if g_new[k] > g[k] { 1 } else { -1 },
                sample: traj.times.len() - 1,
            });
        }
        g = g_new;
        h = h_next;

        if y.iter().any(|v| v.abs() > cfg.divergence_radius) {
            traj.stop = StopReason::Divergence;
            return Ok(traj);
        }
        let terminal = fired.iter().any(|&k| events[k].terminal);
        let new_events = traj.events[first_new..].to_vec();
        let ctl = observer(StepView { trajectory: &traj, new_events: &new_events });
        if terminal {
            traj.stop = StopReason::TerminalEvent;
            return Ok(traj);
        }
        if ctl == Control::Stop {
            traj.stop = StopReason::Observer;
            return Ok(traj);
        }
    }
    traj.stop = StopReason::Horizon;
    Ok(traj)
}

fn to_f64s<T: Real>(y: &[T]) -> Vec<f64> {
    y.iter().map(Scalar::to_f64).collect()
}
