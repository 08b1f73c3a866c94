//! Long-time outcome of a hidden-dynamics trajectory: equilibrium, limit
//! cycle, exit from the box, or none of these within the horizon.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::cycle::{CycleDetector, Section};
use super::{integrate_observed, Control, EventFn, IntegratorConfig, StopReason, Trajectory};
use crate::error::{Error, Result};
use crate::hidden::{bilinear_intersections, HiddenMode, HiddenSystem, Intersections};
use crate::scalar::Real;
use crate::switching::HiddenFactor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Low,
    Inside,
    High,
}

impl Side {
    fn symbol(self) -> char {
        match self {
            Side::Low => '-',
            Side::Inside => '0',
            Side::High => '+',
        }
    }
}

/// Where a trajectory leaves the box: per coordinate, below, within or above [−1, 1].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExitRegion {
    pub sides: Vec<Side>,
}

impl ExitRegion {
    pub fn new(sides: Vec<Side>) -> Self {
        ExitRegion { sides }
    }

    /// e.g. `++` for the corner (1, 1), `0+-` for u at threshold, v above, w below.
    pub fn label(&self) -> String {
        self.sides.iter().map(|s| s.symbol()).collect()
    }

    pub fn is_corner(&self) -> bool {
        self.sides.iter().all(|s| *s != Side::Inside)
    }
}

impl fmt::Display for ExitRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R^{{{}}}", self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Outcome<T> {
    Equilibrium { point: Vec<T> },
    LimitCycle { period: T, amplitude: T, section_points: Vec<Vec<T>>, leaves_box: bool },
    Exit { region: ExitRegion, state: Vec<T> },
    /// Horizon reached after leaving and re-entering the box at least once.
    SlidingReentry { reentries: usize },
    Divergence { time: T, state: Vec<T> },
    Undecided { horizon: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeTag {
    Equilibrium,
    LimitCycle,
    Exit,
    SlidingReentry,
    Divergence,
    Undecided,
}

impl fmt::Display for OutcomeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OutcomeTag::Equilibrium => "equilibrium",
            OutcomeTag::LimitCycle => "limit_cycle",
            OutcomeTag::Exit => "exit",
            OutcomeTag::SlidingReentry => "sliding_reentry",
            OutcomeTag::Divergence => "divergence",
            OutcomeTag::Undecided => "undecided",
        };
        f.write_str(s)
    }
}

impl<T> Outcome<T> {
    pub fn tag(&self) -> OutcomeTag {
        match self {
            Outcome::Equilibrium { .. } => OutcomeTag::Equilibrium,
            Outcome::LimitCycle { .. } => OutcomeTag::LimitCycle,
            Outcome::Exit { .. } => OutcomeTag::Exit,
            Outcome::SlidingReentry { .. } => OutcomeTag::SlidingReentry,
            Outcome::Divergence { .. } => OutcomeTag::Divergence,
            Outcome::Undecided { .. } => OutcomeTag::Undecided,
        }
    }

    pub fn exit_region(&self) -> Option<&ExitRegion> {
        match self {
            Outcome::Exit { region, .. } => Some(region),
            _ => None,
        }
    }
}

/// One departure from the box and, if it happened, the return.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Excursion<T> {
    pub axis: usize,
    pub side: Side,
    pub exit_time: T,
    pub reentry_time: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig<T> {
    pub integrator: IntegratorConfig<T>,
    /// Max-norm of the right-hand side regarded as rest.
    pub eq_tol: T,
    /// Time the rest condition has to persist.
    pub eq_window: T,
    /// Crossing-state change relative to the amplitude.
    pub cycle_tol: T,
    pub period_tol: T,
    pub cycle_confirmations: usize,
    /// Distance to a boundary fixed point at which a factor-mode exit is declared.
    pub exit_tol: T,
    /// Inward shift of factor-mode entries lying on an edge.
    pub entry_offset: T,
    /// Point the Poincaré section passes through; the interior fixed point when absent.
    pub section: Option<Vec<T>>,
}

impl<T: Real> Default for ClassifyConfig<T> {
    fn default() -> Self {
        let c = |x: f64| T::from(x).unwrap();
        ClassifyConfig {
            integrator: IntegratorConfig::default(),
            eq_tol: c(1e-8).max(T::epsilon().sqrt()),
            eq_window: c(10.0),
            cycle_tol: c(1e-4).max(T::epsilon().sqrt() * c(10.0)),
            period_tol: c(0.01),
            cycle_confirmations: 3,
            exit_tol: c(1e-6),
            entry_offset: c(1e-6),
            section: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification<T> {
    pub outcome: Outcome<T>,
    /// In the system's own coordinates (u, v[, w]).
    pub trajectory: Trajectory<T>,
    pub excursions: Vec<Excursion<T>>,
}

impl<T: Real> Classification<T> {
    pub fn reentries(&self) -> usize {
        self.excursions.iter().filter(|e| e.reentry_time.is_some()).count()
    }
}

type ExitCheck<'a, T> = Box<dyn Fn(&[T], &[T]) -> Option<(ExitRegion, Option<Vec<T>>)> + 'a>;

struct Setup<'a, T> {
    rhs: Box<dyn Fn(&[T], &mut [T]) + 'a>,
    to_phys: Box<dyn Fn(&[T]) -> Vec<T> + 'a>,
    phys_rate: Box<dyn Fn(&[T], &[T]) -> Vec<T> + 'a>,
    events: Vec<EventFn<'a, T>>,
    box_events: Vec<Option<(usize, Side)>>,
    section_event: Option<usize>,
    exit_check: ExitCheck<'a, T>,
    can_leave_box: bool,
}

const AXES: [&str; 3] = ["u", "v", "w"];

fn axis_name(i: usize) -> String {
    AXES.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("y{i}"))
}

fn box_events<'a, T: Real>(dim: usize) -> (Vec<EventFn<'a, T>>, Vec<Option<(usize, Side)>>) {
    let mut ev = vec![];
    let mut tags = vec![];
    for i in 0..dim {
        ev.push(EventFn::new(format!("{}=+1", axis_name(i)), move |_, y: &[T]| y[i] - T::one()));
        tags.push(Some((i, Side::High)));
        ev.push(EventFn::new(format!("{}=-1", axis_name(i)), move |_, y: &[T]| y[i] + T::one()));
        tags.push(Some((i, Side::Low)));
    }
    (ev, tags)
}

/// Saturated-region exit rule: every saturated coordinate moves outward and the
/// unsaturated ones are at rest. Outside the box the field no longer depends on
/// saturated coordinates, so this state persists.
fn saturated_exit<T: Real>(y: &[T], f: &[T], eq_tol: T) -> Option<ExitRegion> {
    let sides: Vec<Side> = y
        .iter()
        .map(|v| {
            if *v > T::one() {
                Side::High
            } else if *v < -T::one() {
                Side::Low
            } else {
                Side::Inside
            }
        })
        .collect();
    if sides.iter().all(|s| *s == Side::Inside) {
        return None;
    }
    let ok = sides.iter().zip(f).all(|(s, r)| match s {
        Side::High => *r > T::zero(),
        Side::Low => *r < T::zero(),
        Side::Inside => r.abs() < eq_tol,
    });
    ok.then(|| ExitRegion::new(sides))
}

fn run<T: Real>(setup: Setup<'_, T>, y0: &[T], cfg: &ClassifyConfig<T>) -> Result<Classification<T>> {
    let mut detector = CycleDetector::new(cfg.cycle_tol, cfg.period_tol, cfg.cycle_confirmations);
    let mut eq_since: Option<T> = None;
    let mut excursions: Vec<Excursion<T>> = vec![];
    let mut last_exit_state: Option<Vec<T>> = None;
    let mut outcome: Option<Outcome<T>> = None;
    let mut rate_buf = vec![T::zero(); y0.len()];
    let t0 = T::zero();
    detector.push_sample(&(setup.to_phys)(y0));

    let traj = integrate_observed(
        |_, y: &[T], d: &mut [T]| (setup.rhs)(y, d),
        t0,
        y0,
        &cfg.integrator,
        &setup.events,
        |view| {
            let tr = view.trajectory;
            let t = tr.last_time();
            let y = tr.last_state();
            let phys = (setup.to_phys)(y);
            for e in view.new_events {
                if let Some((axis, side)) = setup.box_events[e.event] {
                    let leaving = (side == Side::High) == (e.direction > 0);
                    if leaving {
                        excursions.push(Excursion { axis, side, exit_time: e.t, reentry_time: None });
                        last_exit_state = Some((setup.to_phys)(&e.state));
                    } else {
                        match excursions.iter_mut().rev().find(|x| x.axis == axis && x.reentry_time.is_none()) {
                            Some(x) => x.reentry_time = Some(e.t),
                            None => excursions.push(Excursion { axis, side, exit_time: t0, reentry_time: Some(e.t) }),
                        }
                    }
                }
            }
            (setup.rhs)(y, &mut rate_buf);
            let rate_norm = rate_buf.iter().fold(T::zero(), |a, r| a.max(r.abs()));
            if rate_norm < cfg.eq_tol {
                let since = *eq_since.get_or_insert(t);
                if t - since >= cfg.eq_window {
                    outcome = Some(Outcome::Equilibrium { point: phys });
                    return Control::Stop;
                }
            } else {
                eq_since = None;
            }
            if let Some((region, state)) = (setup.exit_check)(y, &rate_buf) {
                let state = state.or_else(|| last_exit_state.clone()).unwrap_or_else(|| phys.clone());
                outcome = Some(Outcome::Exit { region, state });
                return Control::Stop;
            }
            let crossing = view
                .new_events
                .iter()
                .find(|e| Some(e.event) == setup.section_event && e.direction > 0);
            if let Some(e) = crossing {
                if let Some(info) = detector.push_crossing(e.t, &(setup.to_phys)(&e.state)) {
                    let eps = T::from(1e-9).unwrap();
                    let leaves_box = setup.can_leave_box
                        && info.min.iter().chain(info.max.iter()).any(|v| v.abs() > T::one() + eps);
                    outcome = Some(Outcome::LimitCycle {
                        period: info.period,
                        amplitude: info.amplitude,
                        section_points: info.section_points.clone(),
                        leaves_box,
                    });
                    return Control::Stop;
                }
            } else {
                detector.push_sample(&phys);
            }
            Control::Continue
        },
    )?;

    let outcome = match outcome {
        Some(o) => o,
        None if traj.stop == StopReason::Divergence => {
            Outcome::Divergence { time: traj.last_time(), state: (setup.to_phys)(traj.last_state()) }
        }
        None => {
            let reentries = excursions.iter().filter(|e| e.reentry_time.is_some()).count();
            if reentries > 0 {
                Outcome::SlidingReentry { reentries }
            } else {
                Outcome::Undecided { horizon: cfg.integrator.horizon }
            }
        }
    };
    let trajectory = traj.map_states(|y| (setup.to_phys)(y), |y, f| (setup.phys_rate)(y, f));
    Ok(Classification { outcome, trajectory, excursions })
}

/// Interior fixed points of a hidden system in floating point.
fn interior_fixed_points<T: Real>(sys: &HiddenSystem<T>) -> Vec<(T, T)> {
    match bilinear_intersections(&sys.coeffs.u, &sys.coeffs.v) {
        Ok(Intersections::Points(p)) => p
            .into_iter()
            .filter(|x| x.u.abs() < T::one() && x.v.abs() < T::one())
            .map(|x| (x.u, x.v))
            .collect(),
        _ => vec![],
    }
}

fn section_point<T: Real>(sys: &HiddenSystem<T>, cfg: &ClassifyConfig<T>) -> Option<Vec<T>> {
    cfg.section.clone().or_else(|| interior_fixed_points(sys).first().map(|(u, v)| vec![*u, *v]))
}

/// Integrates from `entry` and classifies the long-time behaviour.
pub fn classify_outcome<T: Real>(sys: &HiddenSystem<T>, entry: (T, T), cfg: &ClassifyConfig<T>) -> Result<Classification<T>> {
    let (u0, v0) = entry;
    let one = T::one();
    if !(u0.abs() <= one && v0.abs() <= one) {
        return Err(Error::invalid("entry must lie on or inside the box"));
    }
    if sys.kappa <= T::zero() {
        return Err(Error::invalid("kappa must be positive"));
    }
    let section = section_point(sys, cfg);
    match &sys.mode {
        HiddenMode::Composition { .. } => {
            let (mut events, mut tags) = box_events::<T>(2);
            let mut section_event = None;
            if let Some(p) = section.clone() {
                let sec = Section::vertical(p);
                section_event = Some(events.len());
                events.push(EventFn::new("section", move |_, y: &[T]| sec.eval(y)));
                tags.push(None);
            }
            let eq_tol = cfg.eq_tol;
            let setup = Setup {
                rhs: Box::new(move |y: &[T], d: &mut [T]| {
                    let (a, b) = sys.rhs(&y[0], &y[1]).expect("composition mode is defined everywhere");
                    d[0] = a;
                    d[1] = b;
                }),
                to_phys: Box::new(|y: &[T]| y.to_vec()),
                phys_rate: Box::new(|_, f: &[T]| f.to_vec()),
                events,
                box_events: tags,
                section_event,
                exit_check: Box::new(move |y, f| saturated_exit(y, f, eq_tol).map(|r| (r, None))),
                can_leave_box: true,
            };
            run(setup, &[u0, v0], cfg)
        }
        HiddenMode::Factor { factor_u, factor_v } => classify_factor(sys, factor_u, factor_v, (u0, v0), section, cfg),
    }
}

// Factor mode: Hill axes are integrated in w = tanh x, where x' = F/(4θ).
fn classify_factor<T: Real>(
    sys: &HiddenSystem<T>,
    fu: &HiddenFactor<T>,
    fv: &HiddenFactor<T>,
    entry: (T, T),
    section: Option<Vec<T>>,
    cfg: &ClassifyConfig<T>,
) -> Result<Classification<T>> {
    let one = T::one();
    let four = T::from(4.0).unwrap();
    let theta = |f: &HiddenFactor<T>| match f {
        HiddenFactor::Unit => None,
        HiddenFactor::Hill { theta } => Some(*theta),
    };
    let th = [theta(fu), theta(fv)];
    let kappa = sys.kappa;
    let coeffs = sys.coeffs.clone();

    let inward = |w: T| {
        if w >= one {
            one - cfg.entry_offset
        } else if w <= -one {
            -one + cfg.entry_offset
        } else {
            w
        }
    };
    let phys0 = [
        if th[0].is_some() { inward(entry.0) } else { entry.0 },
        if th[1].is_some() { inward(entry.1) } else { entry.1 },
    ];
    let to_int = move |i: usize, w: T| if th[i].is_some() { w.atanh() } else { w };
    let y0 = [to_int(0, phys0[0]), to_int(1, phys0[1])];
    let to_phys = move |y: &[T]| -> Vec<T> {
        (0..2).map(|i| if th[i].is_some() { y[i].tanh() } else { y[i] }).collect()
    };

    let rhs_coeffs = coeffs.clone();
    let rhs = move |y: &[T], d: &mut [T]| {
        let u = if th[0].is_some() { y[0].tanh() } else { y[0] };
        let v = if th[1].is_some() { y[1].tanh() } else { y[1] };
        let fu = rhs_coeffs.u.eval(&u, &v);
        let fv = kappa * rhs_coeffs.v.eval(&u, &v);
        d[0] = match th[0] {
            Some(t) => fu / (four * t),
            None => fu,
        };
        d[1] = match th[1] {
            Some(t) => fv / (four * t),
            None => fv,
        };
    };
    let phys_rate = move |y: &[T], f: &[T]| -> Vec<T> {
        (0..2)
            .map(|i| {
                if th[i].is_some() {
                    let w = y[i].tanh();
                    (one - w * w) * f[i]
                } else {
                    f[i]
                }
            })
            .collect()
    };

    let mut events: Vec<EventFn<'_, T>> = vec![];
    let mut tags = vec![];
    let mut section_event = None;
    if let Some(p) = section {
        let x_star = to_int(0, p[0]);
        section_event = Some(0);
        events.push(EventFn::new("section", move |_, y: &[T]| y[0] - x_star));
        tags.push(None);
    }

    // Attracting boundary fixed points with outward classical continuation.
    let mut targets: Vec<(Vec<T>, ExitRegion)> = vec![];
    let c = &coeffs;
    let side = |s: T| if s > T::zero() { Side::High } else { Side::Low };
    if th[0].is_some() && th[1].is_some() {
        for su in [one, -one] {
            for sv in [one, -one] {
                if su * c.u.eval(&su, &sv) > T::zero() && sv * c.v.eval(&su, &sv) > T::zero() {
                    targets.push((vec![su, sv], ExitRegion::new(vec![side(su), side(sv)])));
                }
            }
        }
    }
    if th[0].is_some() {
        for s in [one, -one] {
            let slope = c.v.a * s + c.v.c;
            if slope < T::zero() {
                let v = -(c.v.b * s + c.v.d) / slope;
                if v.abs() < one && s * c.u.eval(&s, &v) > T::zero() {
                    targets.push((vec![s, v], ExitRegion::new(vec![side(s), Side::Inside])));
                }
            }
        }
    }
    if th[1].is_some() {
        for s in [one, -one] {
            let slope = c.u.a * s + c.u.b;
            if slope < T::zero() {
                let u = -(c.u.c * s + c.u.d) / slope;
                if u.abs() < one && s * c.v.eval(&u, &s) > T::zero() {
                    targets.push((vec![u, s], ExitRegion::new(vec![Side::Inside, side(s)])));
                }
            }
        }
    }
    let exit_tol = cfg.exit_tol;
    let two = one + one;
    let exit_check = move |y: &[T], _f: &[T]| -> Option<(ExitRegion, Option<Vec<T>>)> {
        let w: Vec<T> = (0..2).map(|i| if th[i].is_some() { y[i].tanh() } else { y[i] }).collect();
        // 1 − |tanh x| without cancellation.
        let edge = |x: T| two / (one + (two * x.abs()).exp());
        targets.iter().find_map(|(p, region)| {
            let near = region.sides.iter().enumerate().all(|(i, s)| match s {
                Side::Inside => (w[i] - p[i]).abs() < exit_tol,
                Side::High => y[i] > T::zero() && edge(y[i]) < exit_tol,
                Side::Low => y[i] < T::zero() && edge(y[i]) < exit_tol,
            });
            near.then(|| (region.clone(), Some(p.clone())))
        })
    };

    let setup = Setup {
        rhs: Box::new(rhs),
        to_phys: Box::new(to_phys),
        phys_rate: Box::new(phys_rate),
        events,
        box_events: tags,
        section_event,
        exit_check: Box::new(exit_check),
        can_leave_box: false,
    };
    run(setup, &y0, cfg)
}

/// Classification for an n-dimensional system whose coordinates saturate
/// outside [−1, 1] (ramp regularization with ε = 1, thresholds at 0).
pub fn classify_saturated<'a, T: Real>(
    rhs: impl Fn(&[T]) -> Vec<T> + 'a,
    y0: &[T],
    cfg: &ClassifyConfig<T>,
) -> Result<Classification<T>> {
    let dim = y0.len();
    let (mut events, mut tags) = box_events::<T>(dim);
    let mut section_event = None;
    if let Some(p) = cfg.section.clone() {
        if p.len() != dim {
            return Err(Error::invalid("section point dimension mismatch"));
        }
        let sec = Section::vertical(p);
        section_event = Some(events.len());
        events.push(EventFn::new("section", move |_, y: &[T]| sec.eval(y)));
        tags.push(None);
    }
    let eq_tol = cfg.eq_tol;
    let setup = Setup {
        rhs: Box::new(move |y: &[T], d: &mut [T]| d.copy_from_slice(&rhs(y))),
        to_phys: Box::new(|y: &[T]| y.to_vec()),
        phys_rate: Box::new(|_, f: &[T]| f.to_vec()),
        events,
        box_events: tags,
        section_event,
        exit_check: Box::new(move |y, f| saturated_exit(y, f, eq_tol).map(|r| (r, None))),
        can_leave_box: true,
    };
    run(setup, y0, cfg)
}
