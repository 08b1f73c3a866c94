use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{classify_outcome, ClassifyConfig, Outcome, OutcomeTag};
use crate::error::{Error, Result};
use crate::hidden::HiddenSystem;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint<T> {
    pub parameter: T,
    pub outcome: Outcome<T>,
}

/// Parameter interval across which the outcome tag changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub tag_lo: OutcomeTag,
    pub tag_hi: OutcomeTag,
}

impl<T: Real> Bracket<T> {
    pub fn width(&self) -> T {
        self.hi - self.lo
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport<T> {
    /// Grid points and bisection points, sorted by parameter.
    pub points: Vec<ScanPoint<T>>,
    pub brackets: Vec<Bracket<T>>,
}

/// Classifies outcomes on a uniform grid of `n` points over `range` and bisects
/// every tag change down to width `tol`. Grid points run in parallel.
pub fn scan_parameter<T, F>(
    family: F,
    range: (T, T),
    n: usize,
    entry: (T, T),
    cfg: &ClassifyConfig<T>,
    tol: T,
) -> Result<ScanReport<T>>
where
    T: Real,
    F: Fn(T) -> HiddenSystem<T> + Sync,
{
    let (a, b) = range;
    if !(b > a) || n < 2 {
        return Err(Error::invalid("scan needs a nonempty range and at least two grid points"));
    }
    let denom = T::from(n - 1).unwrap();
    let grid: Vec<T> = (0..n).map(|k| a + (b - a) * T::from(k).unwrap() / denom).collect();
    let classify = |p: T| -> Result<ScanPoint<T>> {
        let sys = family(p);
        let c = classify_outcome(&sys, entry, cfg)?;
        Ok(ScanPoint { parameter: p, outcome: c.outcome })
    };
    let mut points: Vec<ScanPoint<T>> = grid.par_iter().map(|p| classify(*p)).collect::<Result<_>>()?;

    let mut brackets = vec![];
    let n_grid = points.len();
    for k in 1..n_grid {
        let (l, r) = (&points[k - 1], &points[k]);
        if l.outcome.tag() == r.outcome.tag() {
            continue;
        }
        let (mut lo, mut hi) = (l.parameter, r.parameter);
        let (tag_lo, mut tag_hi) = (l.outcome.tag(), r.outcome.tag());
        let mut extra = vec![];
        while hi - lo > tol {
            let mid = (lo + hi) / (T::one() + T::one());
            let pt = classify(mid)?;
            let tag = pt.outcome.tag();
            extra.push(pt);
            if tag == tag_lo {
                lo = mid;
            } else {
                hi = mid;
                tag_hi = tag;
            }
        }
        brackets.push(Bracket { lo, hi, tag_lo, tag_hi });
        points.extend(extra);
    }
    points.sort_by(|x, y| x.parameter.partial_cmp(&y.parameter).unwrap());
    Ok(ScanReport { points, brackets })
}
