//! The planar hidden-dynamics system in bilinear form.
//!
//! `u' = a₁uv + b₁u + c₁v + d₁`, `v' = κ(a₂uv + b₂u + c₂v + d₂)`, evaluated either
//! through switching profiles (composition mode) or premultiplied by Hill
//! factors (factor mode).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psys::CornerFields;
use crate::scalar::Scalar;
use crate::switching::{eval_switch, eval_switch_deriv, HiddenFactor, SwitchingProfile};

/// `a·uv + b·u + c·v + d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearForm<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> BilinearForm<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        BilinearForm { a, b, c, d }
    }

    pub fn eval(&self, u: &T, v: &T) -> T {
        self.a.clone() * u.clone() * v.clone() + self.b.clone() * u.clone() + self.c.clone() * v.clone() + self.d.clone()
    }

    /// ∂/∂u = a·v + b.
    pub fn du(&self, v: &T) -> T {
        self.a.clone() * v.clone() + self.b.clone()
    }

    /// ∂/∂v = a·u + c.
    pub fn dv(&self, u: &T) -> T {
        self.a.clone() * u.clone() + self.c.clone()
    }

    pub fn scaled(&self, k: &T) -> Self {
        BilinearForm {
            a: self.a.clone() * k.clone(),
            b: self.b.clone() * k.clone(),
            c: self.c.clone() * k.clone(),
            d: self.d.clone() * k.clone(),
        }
    }

    /// Values at the corners (++, +−, −+, −−).
    pub fn corners(&self) -> [T; 4] {
        let (p, m) = (T::one(), -T::one());
        [self.eval(&p, &p), self.eval(&p, &m), self.eval(&m, &p), self.eval(&m, &m)]
    }

    /// Bilinear interpolant through corner values (++, +−, −+, −−).
    pub fn from_corners(f: &[T; 4]) -> Self {
        let [pp, pm, mp, mm] = f.clone();
        let four = T::from_int(4);
        BilinearForm {
            a: (pp.clone() - pm.clone() - mp.clone() + mm.clone()) / four.clone(),
            b: (pp.clone() + pm.clone() - mp.clone() - mm.clone()) / four.clone(),
            c: (pp.clone() - pm.clone() + mp.clone() - mm.clone()) / four.clone(),
            d: (pp + pm + mp + mm) / four,
        }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> BilinearForm<U> {
        BilinearForm { a: f(&self.a), b: f(&self.b), c: f(&self.c), d: f(&self.d) }
    }

    fn max_abs(&self) -> f64 {
        [&self.a, &self.b, &self.c, &self.d].iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
    }
}

/// Coefficients of the u- and v-equations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultilinearCoeffs<T> {
    pub u: BilinearForm<T>,
    pub v: BilinearForm<T>,
}

impl<T: Scalar> MultilinearCoeffs<T> {
    pub fn new(u: [T; 4], v: [T; 4]) -> Self {
        let [a1, b1, c1, d1] = u;
        let [a2, b2, c2, d2] = v;
        MultilinearCoeffs { u: BilinearForm::new(a1, b1, c1, d1), v: BilinearForm::new(a2, b2, c2, d2) }
    }

    pub fn corner_fields(&self) -> CornerFields<T> {
        CornerFields { alpha: self.u.corners(), beta: self.v.corners() }
    }

    pub fn eval(&self, u: &T, v: &T) -> (T, T) {
        (self.u.eval(u, v), self.v.eval(u, v))
    }

    /// v-row multiplied by κ.
    pub fn with_kappa(&self, kappa: &T) -> Self {
        MultilinearCoeffs { u: self.u.clone(), v: self.v.scaled(kappa) }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U + Copy) -> MultilinearCoeffs<U> {
        MultilinearCoeffs { u: self.u.map(f), v: self.v.map(f) }
    }
}

/// Inverts the bilinear interpolation through the corner values.
pub fn multilinear_from_corners<T: Scalar>(cf: &CornerFields<T>) -> MultilinearCoeffs<T> {
    MultilinearCoeffs { u: BilinearForm::from_corners(&cf.alpha), v: BilinearForm::from_corners(&cf.beta) }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum HiddenMode<T> {
    Composition { pi_u: SwitchingProfile<T>, pi_v: SwitchingProfile<T> },
    Factor { factor_u: HiddenFactor<T>, factor_v: HiddenFactor<T> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenSystem<T> {
    pub coeffs: MultilinearCoeffs<T>,
    pub kappa: T,
    pub mode: HiddenMode<T>,
}

impl<T: Scalar> HiddenSystem<T> {
    /// Composition mode; κ is the steepness ratio of the two profiles.
    pub fn composition(coeffs: MultilinearCoeffs<T>, pi_u: SwitchingProfile<T>, pi_v: SwitchingProfile<T>) -> Self {
        let kappa = pi_v.steepness.clone() / pi_u.steepness.clone();
        HiddenSystem { coeffs, kappa, mode: HiddenMode::Composition { pi_u, pi_v } }
    }

    /// Composition mode with ramp profiles.
    pub fn ramp(coeffs: MultilinearCoeffs<T>, kappa: T) -> Self {
        HiddenSystem {
            coeffs,
            kappa,
            mode: HiddenMode::Composition { pi_u: SwitchingProfile::ramp(), pi_v: SwitchingProfile::ramp() },
        }
    }

    /// Factor mode with Hill factors on both components.
    pub fn hill(coeffs: MultilinearCoeffs<T>, kappa: T) -> Self {
        HiddenSystem {
            coeffs,
            kappa,
            mode: HiddenMode::Factor { factor_u: HiddenFactor::hill(), factor_v: HiddenFactor::hill() },
        }
    }

    pub fn with_kappa(mut self, kappa: T) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn is_factor_mode(&self) -> bool {
        matches!(self.mode, HiddenMode::Factor { .. })
    }

    /// (u', v').
    pub fn rhs(&self, u: &T, v: &T) -> Result<(T, T)> {
        let c = &self.coeffs;
        match &self.mode {
            HiddenMode::Composition { pi_u, pi_v } => {
                let rho = eval_switch(pi_u, u);
                let sigma = eval_switch(pi_v, v);
                Ok((c.u.eval(&rho, &sigma), self.kappa.clone() * c.v.eval(&rho, &sigma)))
            }
            HiddenMode::Factor { factor_u, factor_v } => {
                let one = T::one();
                if u.abs() > one || v.abs() > one {
                    return Err(Error::invalid(format!(
                        "factor mode is defined on the closed square, got ({}, {})",
                        u.to_f64(),
                        v.to_f64()
                    )));
                }
                let hu = factor_u.eval(u)?;
                let hv = factor_v.eval(v)?;
                Ok((hu * c.u.eval(u, v), self.kappa.clone() * hv * c.v.eval(u, v)))
            }
        }
    }
}

/// See [`HiddenSystem::rhs`].
pub fn hidden_rhs<T: Scalar>(sys: &HiddenSystem<T>, u: &T, v: &T) -> Result<(T, T)> {
    sys.rhs(u, v)
}

/// Entry into the box through the wall v = −1: the attracting codim-1 sliding
/// equilibrium on Σα seen from below, in hidden coordinates.
pub fn wall_entry_point<T: Scalar>(coeffs: &MultilinearCoeffs<T>) -> Result<(T, T)> {
    let cf = coeffs.corner_fields();
    let s = crate::psys::filippov_codim1(&cf.alpha[1], &cf.alpha[3])?;
    if !s.attractive || !s.exists {
        return Err(Error::NoSliding("lower wall is not an attracting sliding wall".into()));
    }
    Ok((s.lambda, -T::one()))
}

/// Derivatives used by Jacobians in composition mode: (π_u'(u), π_v'(v)).
pub(crate) fn composition_slopes<T: Scalar>(sys: &HiddenSystem<T>, u: &T, v: &T) -> Option<(T, T)> {
    match &sys.mode {
        HiddenMode::Composition { pi_u, pi_v } => Some((eval_switch_deriv(pi_u, u), eval_switch_deriv(pi_v, v))),
        HiddenMode::Factor { .. } => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Intersection<T> {
    pub u: T,
    pub v: T,
    /// Set when the eliminated quadratic has a (near) double root.
    pub tangency: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Intersections<T> {
    Points(Vec<Intersection<T>>),
    /// The zero sets share a curve.
    Continuum,
}

enum LinearRoots<T> {
    None,
    All,
    One(T),
}

fn linear_root<T: Scalar>(b: &T, d: &T, tol: f64) -> LinearRoots<T> {
    if !b.near_zero(tol) {
        LinearRoots::One(-d.clone() / b.clone())
    } else if d.near_zero(tol) {
        LinearRoots::All
    } else {
        LinearRoots::None
    }
}

/// All real common zeros of two bilinear forms, by elimination of v.
pub fn bilinear_intersections<T: Scalar>(r1: &BilinearForm<T>, r2: &BilinearForm<T>) -> Result<Intersections<T>> {
    let scale = r1.max_abs().max(r2.max_abs()).max(1e-300);
    let tol = 1e-14 * scale;
    let tol2 = 1e-14 * scale * scale;
    let v_free = |r: &BilinearForm<T>| r.a.near_zero(tol) && r.c.near_zero(tol);

    // v from whichever row has the better-conditioned denominator at u.
    let solve_v = |u: &T| -> Option<Option<T>> {
        let den1 = r1.dv(u);
        let den2 = r2.dv(u);
        let (num, den) = if den1.abs() >= den2.abs() {
            (r1.b.clone() * u.clone() + r1.d.clone(), den1)
        } else {
            (r2.b.clone() * u.clone() + r2.d.clone(), den2)
        };
        if den.near_zero(tol) {
            let n1 = r1.b.clone() * u.clone() + r1.d.clone();
            let n2 = r2.b.clone() * u.clone() + r2.d.clone();
            // Both rows vanish along the whole line u = const.
            if n1.near_zero(tol) && n2.near_zero(tol) {
                return None;
            }
            return Some(None);
        }
        Some(Some(-num / den))
    };

    let mut us: Vec<(T, bool)> = Vec::new();
    match (v_free(r1), v_free(r2)) {
        (true, true) => {
            return Ok(match (linear_root(&r1.b, &r1.d, tol), linear_root(&r2.b, &r2.d, tol)) {
                (LinearRoots::None, _) | (_, LinearRoots::None) => Intersections::Points(vec![]),
                (LinearRoots::One(x), LinearRoots::One(y)) if !(x.clone() - y.clone()).near_zero(tol) => {
                    Intersections::Points(vec![])
                }
                _ => Intersections::Continuum,
            })
        }
        (true, false) | (false, true) => {
            let (free, other) = if v_free(r1) { (r1, r2) } else { (r2, r1) };
            match linear_root(&free.b, &free.d, tol) {
                LinearRoots::None => return Ok(Intersections::Points(vec![])),
                LinearRoots::All => return Ok(Intersections::Continuum),
                LinearRoots::One(u) => {
                    let den = other.dv(&u);
                    let num = other.b.clone() * u.clone() + other.d.clone();
                    if den.near_zero(tol) {
                        return Ok(if num.near_zero(tol) {
                            Intersections::Continuum
                        } else {
                            Intersections::Points(vec![])
                        });
                    }
                    return Ok(Intersections::Points(vec![Intersection { u, v: -num / den, tangency: false }]));
                }
            }
        }
        (false, false) => {
            let qa = r1.b.clone() * r2.a.clone() - r2.b.clone() * r1.a.clone();
            let qb = r1.b.clone() * r2.c.clone() + r1.d.clone() * r2.a.clone()
                - r2.b.clone() * r1.c.clone()
                - r2.d.clone() * r1.a.clone();
            let qc = r1.d.clone() * r2.c.clone() - r2.d.clone() * r1.c.clone();
            if qa.near_zero(tol2) && qb.near_zero(tol2) && qc.near_zero(tol2) {
                return Ok(Intersections::Continuum);
            }
            if qa.near_zero(tol2) {
                if !qb.near_zero(tol2) {
                    us.push((-qc / qb, false));
                }
            } else {
                let disc = qb.clone() * qb.clone() - T::from_int(4) * qa.clone() * qc.clone();
                if disc.near_zero(1e-12) {
                    us.push((-qb / (T::from_int(2) * qa), true));
                } else if disc > T::zero() {
                    let root = disc
                        .sqrt()
                        .ok_or_else(|| Error::NotRepresentable(format!("sqrt of discriminant {disc:?}")))?;
                    let signed = if qb < T::zero() { -root } else { root };
                    let qq = -(qb + signed) / T::from_int(2);
                    us.push((qq.clone() / qa, false));
                    us.push((qc / qq, false));
                }
            }
        }
    }

    let mut out = Vec::new();
    for (u, tangency) in us {
        match solve_v(&u) {
            None => return Ok(Intersections::Continuum),
            Some(None) => {}
            Some(Some(v)) => {
                let (u, v) = if T::is_exact() { (u, v) } else { newton_polish(r1, r2, u, v) };
                out.push(Intersection { u, v, tangency });
            }
        }
    }
    Ok(Intersections::Points(out))
}

fn newton_polish<T: Scalar>(r1: &BilinearForm<T>, r2: &BilinearForm<T>, mut u: T, mut v: T) -> (T, T) {
    for _ in 0..3 {
        let g1 = r1.eval(&u, &v);
        let g2 = r2.eval(&u, &v);
        let (j11, j12, j21, j22) = (r1.du(&v), r1.dv(&u), r2.du(&v), r2.dv(&u));
        let det = j11.clone() * j22.clone() - j12.clone() * j21.clone();
        if det.near_zero(1e-300) {
            break;
        }
        let du = (j22 * g1.clone() - j12 * g2.clone()) / det.clone();
        let dv = (j11 * g2 - j21 * g1) / det;
        u = u - du;
        v = v - dv;
    }
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    fn ex1(a2: Rational) -> MultilinearCoeffs<Rational> {
        MultilinearCoeffs::new([q(1, 1), q(-1, 1), q(1, 1), q(0, 1)], [a2, q(-2, 1), q(1, 1), q(0, 1)])
    }

    #[test]
    fn corners_of_example_rows() {
        let c = ex1(q(11, 10));
        assert_eq!(c.u.corners(), [q(1, 1), q(-3, 1), q(1, 1), q(1, 1)]);
        assert_eq!(c.v.corners(), [q(1, 10), q(-41, 10), q(19, 10), q(21, 10)]);
        assert_eq!(multilinear_from_corners(&c.corner_fields()), c);
        let ones = BilinearForm::from_corners(&[q(1, 1), q(1, 1), q(1, 1), q(1, 1)]);
        assert_eq!(ones, BilinearForm::new(q(0, 1), q(0, 1), q(0, 1), q(1, 1)));
    }

    #[test]
    fn rhs_examples() {
        let c = ex1(q(11, 10)).map(|x| crate::scalar::Scalar::to_f64(x));
        let h = HiddenSystem::hill(c.clone(), 1.0);
        assert_eq!(h.rhs(&0.0, &0.0).unwrap(), (0.0, 0.0));
        assert!((h.rhs(&0.5, &0.0).unwrap().0 + 0.09375).abs() < 1e-15);
        assert!(h.rhs(&1.2, &0.0).is_err());
        let r = HiddenSystem::ramp(c, 1.0);
        let (du, dv) = r.rhs(&0.5, &-1.0).unwrap();
        assert!((du + 2.0).abs() < 1e-15);
        assert!((dv + 2.55).abs() < 1e-12);
    }

    #[test]
    fn entry_point_ex1() {
        assert_eq!(wall_entry_point(&ex1(q(11, 10))).unwrap(), (q(-1, 2), q(-1, 1)));
    }

    #[test]
    fn intersections_degenerate_cases() {
        let zero = BilinearForm::new(0.0, 0.0, 0.0, 0.0);
        let line = BilinearForm::new(0.0, 1.0, 0.0, -0.5);
        assert_eq!(bilinear_intersections(&zero, &line).unwrap(), Intersections::Continuum);
        let other = BilinearForm::new(0.0, 1.0, 0.0, -0.3);
        assert_eq!(bilinear_intersections(&line, &other).unwrap(), Intersections::Points(vec![]));
        let hyper = BilinearForm::new(1.0, 0.0, 0.0, -0.25);
        match bilinear_intersections(&line, &hyper).unwrap() {
            Intersections::Points(p) => {
                assert_eq!(p.len(), 1);
                assert!((p[0].v - 0.5).abs() < 1e-15);
            }
            Intersections::Continuum => panic!(),
        }
    }
}
