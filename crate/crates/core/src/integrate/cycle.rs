use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::scalar::Real;

/// Hyperplane n·(y − p) = 0; crossings are counted where n·(y − p) increases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Section<T> {
    pub point: Vec<T>,
    pub normal: Vec<T>,
}

impl<T: Real> Section<T> {
    /// The line u = u* through `point` (first coordinate).
    pub fn vertical(point: Vec<T>) -> Self {
        let mut normal = vec![T::zero(); point.len()];
        normal[0] = T::one();
        Section { point, normal }
    }

    pub fn eval(&self, y: &[T]) -> T {
        self.normal.iter().zip(y).zip(&self.point).fold(T::zero(), |a, ((n, y), p)| a + *n * (*y - *p))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleInfo<T> {
    pub period: T,
    /// Largest half-range of any coordinate over the last period.
    pub amplitude: T,
    pub section_points: Vec<Vec<T>>,
    /// Component-wise extent over the last period.
    pub min: Vec<T>,
    pub max: Vec<T>,
}

/// Incremental detector fed with samples and same-direction section crossings.
#[derive(Clone, Debug)]
pub struct CycleDetector<T> {
    pub cycle_tol: T,
    pub period_tol: T,
    pub confirmations: usize,
    crossings: Vec<(T, Vec<T>)>,
    cur_min: Vec<T>,
    cur_max: Vec<T>,
    last_extent: Option<(Vec<T>, Vec<T>)>,
    streak: usize,
    info: Option<CycleInfo<T>>,
}

impl<T: Real> CycleDetector<T> {
    pub fn new(cycle_tol: T, period_tol: T, confirmations: usize) -> Self {
        CycleDetector {
            cycle_tol,
            period_tol,
            confirmations: confirmations.max(1),
            crossings: vec![],
            cur_min: vec![],
            cur_max: vec![],
            last_extent: None,
            streak: 0,
            info: None,
        }
    }

    pub fn push_sample(&mut self, y: &[T]) {
        if self.cur_min.is_empty() {
            self.cur_min = y.to_vec();
            self.cur_max = y.to_vec();
            return;
        }
        for ((lo, hi), v) in self.cur_min.iter_mut().zip(self.cur_max.iter_mut()).zip(y) {
            *lo = lo.min(*v);
            *hi = hi.max(*v);
        }
    }

    /// Registers a crossing; returns the cycle once the criteria have held
    /// for `confirmations` consecutive crossings.
    pub fn push_crossing(&mut self, t: T, y: &[T]) -> Option<&CycleInfo<T>> {
        self.push_sample(y);
        let extent = (std::mem::replace(&mut self.cur_min, y.to_vec()), std::mem::replace(&mut self.cur_max, y.to_vec()));
        self.crossings.push((t, y.to_vec()));
        let have_period = self.crossings.len() >= 2;
        if have_period {
            self.last_extent = Some(extent);
        }
        let n = self.crossings.len();
        if n < 3 {
            return None;
        }
        let (t2, c2) = &self.crossings[n - 1];
        let (t1, c1) = &self.crossings[n - 2];
        let (t0, _) = &self.crossings[n - 3];
        let p1 = *t2 - *t1;
        let p0 = *t1 - *t0;
        let (lo, hi) = self.last_extent.clone().expect("extent after two crossings");
        let two = T::one() + T::one();
        let amplitude = lo.iter().zip(&hi).fold(T::zero(), |a, (l, h)| a.max((*h - *l) / two));
        let delta = c1.iter().zip(c2).fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()));
        let ok = amplitude > T::zero() && delta <= self.cycle_tol * amplitude && (p1 - p0).abs() <= self.period_tol * p1;
        self.streak = if ok { self.streak + 1 } else { 0 };
        if self.streak >= self.confirmations {
            self.info = Some(CycleInfo {
                period: p1,
                amplitude,
                section_points: self.crossings[n.saturating_sub(self.confirmations + 2)..].iter().map(|c| c.1.clone()).collect(),
                min: lo,
                max: hi,
            });
            self.info.as_ref()
        } else {
            self.info = None;
            None
        }
    }

    pub fn crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn status(&self) -> Option<&CycleInfo<T>> {
        self.info.as_ref()
    }
}

fn hermite<T: Real>(y0: &[T], f0: &[T], y1: &[T], f1: &[T], h: T, s: T) -> Vec<T> {
    let one = T::one();
    let two = one + one;
    let three = two + one;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = two * s3 - three * s2 + one;
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    (0..y0.len()).map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]).collect()
}

/// Post-hoc limit-cycle detection on a recorded trajectory.
///
/// Crossings are located by cubic Hermite interpolation between stored samples.
pub fn detect_limit_cycle<T: Real>(traj: &Trajectory<T>, section: &Section<T>, cycle_tol: T) -> Option<CycleInfo<T>> {
    if traj.len() < 2 {
        return None;
    }
    let mut det = CycleDetector::new(cycle_tol, T::from(0.01).unwrap(), 2);
    det.push_sample(&traj.states[0]);
    for k in 1..traj.len() {
        let (y0, y1) = (&traj.states[k - 1], &traj.states[k]);
        let (g0, g1) = (section.eval(y0), section.eval(y1));
        if g0 < T::zero() && g1 >= T::zero() {
            let h = traj.times[k] - traj.times[k - 1];
            let (f0, f1) = (&traj.rates[k - 1], &traj.rates[k]);
            let (mut lo, mut hi) = (T::zero(), T::one());
            for _ in 0..60 {
                let mid = (lo + hi) / (T::one() + T::one());
                if section.eval(&hermite(y0, f0, y1, f1, h, mid)) < T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let yc = hermite(y0, f0, y1, f1, h, hi);
            det.push_crossing(traj.times[k - 1] + hi * h, &yc);
        }
        det.push_sample(y1);
    }
    det.status().cloned()
}
