//! Invariant region below a chain of six line segments for the Hill-factor
//! example u' = ¼(1−u²)(uv−u+v), v' = ¼(1−v²)(a₂uv−2u+v) at κ = 1.
//!
//! Every segment is crossed by the flow from left to right only; the chain
//! starts at the saddle (−½, −1) along its unstable eigenvector and ends on u = 1.
//! For rational a₂ every point and slope is rational, so the chain and the
//! quartic conditions are exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{cubic_real_roots, Poly1};
use crate::scalar::Scalar;

/// Line α·u + β·v = γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintLine<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub label: String,
}

impl<T: Scalar> ConstraintLine<T> {
    fn new(alpha: i64, beta: i64, gamma: i64, label: &str) -> Self {
        ConstraintLine { alpha: T::from_int(alpha), beta: T::from_int(beta), gamma: T::from_int(gamma), label: label.into() }
    }
}

/// v=−1, v=u, v=0, v=−u, u=0, v=2u, u=1.
pub fn constraint_lines<T: Scalar>() -> Vec<ConstraintLine<T>> {
    vec![
        ConstraintLine::new(0, 1, -1, "v=-1"),
        ConstraintLine::new(-1, 1, 0, "v=u"),
        ConstraintLine::new(0, 1, 0, "v=0"),
        ConstraintLine::new(1, 1, 0, "v=-u"),
        ConstraintLine::new(1, 0, 0, "u=0"),
        ConstraintLine::new(-2, 1, 0, "v=2u"),
        ConstraintLine::new(1, 0, 1, "u=1"),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentChain<T> {
    pub a2: T,
    /// Seven endpoints (u_i, v_i).
    pub points: Vec<(T, T)>,
    /// Six slopes; segment i is v = m_i (u − u_i) + v_i on [u_i, u_{i+1}].
    pub slopes: Vec<T>,
}

impl<T: Scalar> SegmentChain<T> {
    /// Height of the chain at `u`, or `None` outside [u₀, u₆].
    pub fn height_at(&self, u: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.points.iter().map(|(a, b)| (a.to_f64(), b.to_f64())).collect();
        if u < pts[0].0 || u > pts[pts.len() - 1].0 {
            return None;
        }
        let i = pts.windows(2).position(|w| u <= w[1].0).unwrap_or(pts.len() - 2);
        Some(self.slopes[i].to_f64() * (u - pts[i].0) + pts[i].1)
    }

    pub fn v6(&self) -> &T {
        &self.points[6].1
    }
}

fn u_rate<T: Scalar>(u: &T, v: &T) -> T {
    let one = T::one();
    (one - u.clone() * u.clone()) * (u.clone() * v.clone() - u.clone() + v.clone()) / T::from_int(4)
}

fn v_rate<T: Scalar>(a2: &T, u: &T, v: &T) -> T {
    let one = T::one();
    (one - v.clone() * v.clone()) * (a2.clone() * u.clone() * v.clone() - T::from_int(2) * u.clone() + v.clone())
        / T::from_int(4)
}

/// Slope of the unstable eigenvector of the saddle at (−½, −1).
fn saddle_slope<T: Scalar>(a2: &T) -> Result<T> {
    let (u, v) = (T::from_ratio(-1, 2), -T::one());
    let one = T::one();
    let four = T::from_int(4);
    let h_u = (one.clone() - u.clone() * u.clone()) / four.clone();
    let p = h_u.clone() * (v.clone() - one.clone());
    let q = h_u * (u.clone() + one.clone());
    // The v-row vanishes in v' except through dh(v)/dv, which leaves s alone.
    let r = T::zero();
    let s = -T::from_int(2) * v.clone() / four * (a2.clone() * u.clone() * v.clone() - T::from_int(2) * u + v);
    let tr = p.clone() + s.clone();
    let det = p.clone() * s - q.clone() * r;
    let disc = tr.clone() * tr.clone() - T::from_int(4) * det;
    let root = disc
        .sqrt()
        .ok_or_else(|| Error::NotRepresentable("saddle eigenvalue is not representable".into()))?;
    let lambda = (tr + root) / T::from_int(2);
    if lambda <= T::zero() {
        return Err(Error::Construction("start point is not a saddle".into()));
    }
    Ok((lambda - p) / q)
}

/// Builds the chain: each endpoint lies on its constraint line and each slope is
/// the field direction dv/du at the segment's left end.
pub fn build_segments<T: Scalar>(a2: &T) -> Result<SegmentChain<T>> {
    if *a2 <= T::one() || a2.to_f64() >= std::f64::consts::SQRT_2 {
        return Err(Error::invalid("a2 must lie in (1, sqrt 2)"));
    }
    let lines = constraint_lines::<T>();
    let mut points = vec![(T::from_ratio(-1, 2), -T::one())];
    let mut slopes = vec![saddle_slope(a2)?];
    for (i, line) in lines.iter().enumerate().skip(1) {
        let (ui, vi) = points[i - 1].clone();
        let m = slopes[i - 1].clone();
        let den = line.alpha.clone() + line.beta.clone() * m.clone();
        if den.is_zero() {
            return Err(Error::Construction(format!("segment {} is parallel to {}", i - 1, line.label)));
        }
        let u = (line.gamma.clone() - line.beta.clone() * (vi.clone() - m.clone() * ui.clone())) / den;
        let v = m * (u.clone() - ui.clone()) + vi;
        if u <= ui {
            return Err(Error::Construction(format!("u_{i} = {} does not increase", u.to_f64())));
        }
        if u.abs() > T::one() || v.abs() > T::one() {
            return Err(Error::Construction(format!("point {i} = ({}, {}) leaves the box", u.to_f64(), v.to_f64())));
        }
        if i < 6 {
            let du = u_rate(&u, &v);
            if du.is_zero() {
                return Err(Error::Construction(format!("vertical field at point {i}")));
            }
            slopes.push(v_rate(a2, &u, &v) / du);
        }
        points.push((u, v));
    }
    Ok(SegmentChain { a2: a2.clone(), points, slopes })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentVerdict {
    pub index: usize,
    /// Ascending coefficients of the quartic condition.
    pub quartic: Vec<f64>,
    /// Ascending coefficients of the cubic left after removing u = u_i.
    pub cubic: Vec<f64>,
    pub deflation_residual: f64,
    pub roots: Vec<f64>,
    pub roots_inside: Vec<f64>,
    pub midpoint_value: f64,
    /// uv − u + v > 0 at sample points along the segment.
    pub above_u_nullcline: bool,
    pub pass: bool,
}

/// The quartic (1−L²)((a₂u+1)L−2u) − m(1−u²)((u+1)L−u) with L = m(u−u_i)+v_i.
pub fn segment_quartic<T: Scalar>(chain: &SegmentChain<T>, i: usize) -> Poly1<T> {
    let (ui, vi) = chain.points[i].clone();
    let m = chain.slopes[i].clone();
    let one = T::one();
    let l = Poly1::linear(vi - m.clone() * ui, m.clone());
    let x = Poly1::linear(T::zero(), one.clone());
    let c1 = Poly1::constant(one.clone());
    let left = c1.sub(&l.mul(&l)).mul(
        &Poly1::linear(one.clone(), chain.a2.clone()).mul(&l).sub(&x.scale(&T::from_int(2))),
    );
    let right = c1
        .sub(&x.mul(&x))
        .mul(&Poly1::linear(one.clone(), one).mul(&l).sub(&x))
        .scale(&m);
    left.sub(&right)
}

pub fn verify_segment<T: Scalar>(chain: &SegmentChain<T>, i: usize) -> Result<SegmentVerdict> {
    if i >= chain.slopes.len() {
        return Err(Error::invalid(format!("segment index {i} out of range")));
    }
    let quartic = segment_quartic(chain, i);
    let (ui, vi) = chain.points[i].clone();
    let uj = chain.points[i + 1].0.clone();
    let (cubic, rem) = quartic.deflate(&ui);
    let scale = quartic.coeffs.iter().fold(1.0f64, |m, c| m.max(c.to_f64().abs()));
    let residual = rem.to_f64().abs();
    if residual > 1e-9 * scale {
        return Err(Error::Construction(format!("u_{i} is not a root of the quartic (residual {residual:e})")));
    }
    let c = cubic.to_f64();
    let get = |k: usize| c.coeffs.get(k).copied().unwrap_or(0.0);
    let roots = cubic_real_roots(get(3), get(2), get(1), get(0));
    let (a, b) = (ui.to_f64(), uj.to_f64());
    let edge = 1e-12 * (1.0 + a.abs().max(b.abs()));
    let roots_inside: Vec<f64> = roots.iter().copied().filter(|r| *r > a + edge && *r < b - edge).collect();
    let mid = (ui.clone() + uj.clone()) / T::from_int(2);
    let midpoint_value = quartic.eval(&mid).to_f64();
    let m = chain.slopes[i].clone();
    let above_u_nullcline = (1..64).all(|k| {
        let u = ui.clone() + (uj.clone() - ui.clone()) * T::from_ratio(k, 64);
        let v = m.clone() * (u.clone() - ui.clone()) + vi.clone();
        u.clone() * v.clone() - u + v > T::zero()
    });
    let pass = roots_inside.is_empty() && midpoint_value < 0.0 && above_u_nullcline;
    Ok(SegmentVerdict {
        index: i,
        quartic: quartic.to_f64().coeffs,
        cubic: c.coeffs,
        deflation_residual: residual,
        roots,
        roots_inside,
        midpoint_value,
        above_u_nullcline,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport<T> {
    pub chain: SegmentChain<T>,
    pub segments: Vec<SegmentVerdict>,
    pub v6: f64,
    /// 2/(a₂+1): the fixed point on u = 1.
    pub top_bound: f64,
    pub v6_below_top: bool,
    /// u' > 0 on u = −½ for v in (−1, top].
    pub left_wall_rightward: bool,
    pub pass: bool,
}

pub fn verify_invariant_region<T: Scalar>(a2: &T) -> Result<InvariantReport<T>> {
    let chain = build_segments(a2)?;
    let segments = (0..chain.slopes.len()).map(|i| verify_segment(&chain, i)).collect::<Result<Vec<_>>>()?;
    let top = T::from_int(2) / (a2.clone() + T::one());
    let v6_below_top = *chain.v6() < top;
    // u'(−½, v) is affine in v, so its sign on (−1, top] follows from the ends.
    let left = T::from_ratio(-1, 2);
    let left_wall_rightward = u_rate(&left, &-T::one()) >= T::zero() && u_rate(&left, &top) > T::zero();
    let pass = segments.iter().all(|s| s.pass) && v6_below_top && left_wall_rightward;
    Ok(InvariantReport {
        v6: chain.v6().to_f64(),
        top_bound: top.to_f64(),
        chain,
        segments,
        v6_below_top,
        left_wall_rightward,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    #[test]
    fn saddle_slope_matches_eigenvector() {
        let m0 = saddle_slope(&q(11, 10)).unwrap();
        assert_eq!(m0, q(104, 15));
    }

    #[test]
    fn chain_points_lie_on_their_lines() {
        let chain = build_segments(&q(11, 10)).unwrap();
        for (p, line) in chain.points.iter().zip(constraint_lines::<Rational>()) {
            assert_eq!(line.alpha * p.0.clone() + line.beta * p.1.clone(), line.gamma);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(build_segments(&q(1, 1)).is_err());
        assert!(build_segments(&1.5f64).is_err());
    }

    #[test]
    fn quartic_vanishes_at_left_end() {
        let chain = build_segments(&q(11, 10)).unwrap();
        for i in 0..6 {
            assert_eq!(segment_quartic(&chain, i).eval(&chain.points[i].0), q(0, 1));
        }
    }
}
