//! Fixed points, Jacobians and Hopf analysis of hidden systems.

mod lyapunov;
mod stability;

pub use lyapunov::{
    lyapunov_coefficient, lyapunov_coefficient_exact, lyapunov_with_eigenvector_scale, poly_system, LyapunovReport,
    Partials,
};
pub use stability::{stability_change_analysis, Branch, StabilityInput, StabilityReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hidden::{bilinear_intersections, composition_slopes, HiddenMode, HiddenSystem, Intersections, MultilinearCoeffs};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedPoints<T> {
    Points { points: Vec<(T, T)> },
    NullclinesCoincide,
}

impl<T: Clone> FixedPoints<T> {
    pub fn points(&self) -> Vec<(T, T)> {
        match self {
            FixedPoints::Points { points } => points.clone(),
            FixedPoints::NullclinesCoincide => vec![],
        }
    }
}

/// Nullcline intersections strictly inside the square, ordered by u.
pub fn fixed_points<T: Scalar>(coeffs: &MultilinearCoeffs<T>) -> Result<FixedPoints<T>> {
    match bilinear_intersections(&coeffs.u, &coeffs.v)? {
        Intersections::Continuum => Ok(FixedPoints::NullclinesCoincide),
        Intersections::Points(p) => {
            let one = T::one();
            let mut points: Vec<(T, T)> = p
                .into_iter()
                .filter(|x| x.u.abs() < one && x.v.abs() < one)
                .map(|x| (x.u, x.v))
                .collect();
            points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            Ok(FixedPoints::Points { points })
        }
    }
}

/// Entries of the Jacobian [[p, q], [r, s]].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianPQRS<T> {
    pub p: T,
    pub q: T,
    pub r: T,
    pub s: T,
}

impl<T: Scalar> JacobianPQRS<T> {
    pub fn trace(&self) -> T {
        self.p.clone() + self.s.clone()
    }

    pub fn det(&self) -> T {
        self.p.clone() * self.s.clone() - self.q.clone() * self.r.clone()
    }

    /// √det when det > 0 and the root is representable.
    pub fn omega(&self) -> Option<T> {
        let d = self.det();
        if d > T::zero() {
            d.sqrt()
        } else {
            None
        }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> JacobianPQRS<U> {
        JacobianPQRS { p: f(&self.p), q: f(&self.q), r: f(&self.r), s: f(&self.s) }
    }
}

/// Jacobian of the raw bilinear system (κ = 1, no switching) at `point`.
pub fn jacobian_multilinear<T: Scalar>(coeffs: &MultilinearCoeffs<T>, point: &(T, T)) -> JacobianPQRS<T> {
    let (u, v) = point;
    JacobianPQRS { p: coeffs.u.du(v), q: coeffs.u.dv(u), r: coeffs.v.du(v), s: coeffs.v.dv(u) }
}

/// Jacobian of the hidden system at `point`, including κ, switching slopes or Hill factors.
pub fn jacobian_pqrs<T: Scalar>(sys: &HiddenSystem<T>, point: &(T, T)) -> Result<JacobianPQRS<T>> {
    let (u, v) = point;
    let c = &sys.coeffs;
    let k = sys.kappa.clone();
    match &sys.mode {
        HiddenMode::Composition { pi_u, pi_v } => {
            let (du, dv) = composition_slopes(sys, u, v).expect("composition mode");
            let rho = crate::switching::eval_switch(pi_u, u);
            let sigma = crate::switching::eval_switch(pi_v, v);
            Ok(JacobianPQRS {
                p: c.u.du(&sigma) * du.clone(),
                q: c.u.dv(&rho) * dv.clone(),
                r: k.clone() * c.v.du(&sigma) * du,
                s: k * c.v.dv(&rho) * dv,
            })
        }
        HiddenMode::Factor { factor_u, factor_v } => {
            let hu = factor_u.eval(u)?;
            let hv = factor_v.eval(v)?;
            let (fu, fv) = c.eval(u, v);
            Ok(JacobianPQRS {
                p: factor_u.deriv(u) * fu + hu.clone() * c.u.du(v),
                q: hu * c.u.dv(u),
                r: k.clone() * hv.clone() * c.v.du(v),
                s: k * (factor_v.deriv(v) * fv + hv * c.v.dv(u)),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint<T> {
    pub parameter: T,
    pub jacobian: JacobianPQRS<T>,
    pub det: T,
    /// Absent when √det is not representable in the scalar type.
    pub omega: Option<T>,
    /// d = ½ · d(trace)/d(parameter).
    pub transversality: T,
}

/// Locates trace = 0 along a one-parameter family by regula falsi (Illinois).
///
/// `jac_at` returns the Jacobian at the tracked fixed point. Traces that are
/// affine in the parameter are solved in one step, exactly for exact types.
pub fn hopf_detect<T: Scalar>(
    jac_at: impl Fn(&T) -> Result<JacobianPQRS<T>>,
    range: (T, T),
    tol: f64,
) -> Result<HopfPoint<T>> {
    let (lo, hi) = (range.0.clone(), range.1.clone());
    let (mut a, mut b) = range;
    let mut ta = jac_at(&a)?.trace();
    let mut tb = jac_at(&b)?.trace();
    let root = if ta.near_zero(tol) {
        a.clone()
    } else if tb.near_zero(tol) {
        b.clone()
    } else {
        if ta.signum_i8() == tb.signum_i8() {
            return Err(Error::invalid("trace does not change sign over the range"));
        }
        let max_iter = if T::is_exact() { 8 } else { 200 };
        let mut side = 0i8;
        let mut found = None;
        for _ in 0..max_iter {
            let x = (a.clone() * tb.clone() - b.clone() * ta.clone()) / (tb.clone() - ta.clone());
            let tx = jac_at(&x)?.trace();
            if tx.near_zero(tol) {
                found = Some(x);
                break;
            }
            if tx.signum_i8() == ta.signum_i8() {
                a = x;
                ta = tx;
                if side == -1 {
                    tb = tb / T::from_int(2);
                }
                side = -1;
            } else {
                b = x;
                tb = tx;
                if side == 1 {
                    ta = ta / T::from_int(2);
                }
                side = 1;
            }
        }
        found.ok_or_else(|| Error::NotRepresentable("trace root not reached".into()))?
    };
    let jac = jac_at(&root)?;
    let det = jac.det();
    if det <= T::zero() {
        return Err(Error::NotHopfPoint(format!("det = {} <= 0 at the trace zero", det.to_f64())));
    }
    let span = hi - lo;
    let h = span.abs() * T::from_ratio(1, 1 << 20);
    let dt = (jac_at(&(root.clone() + h.clone()))?.trace() - jac_at(&(root.clone() - h.clone()))?.trace())
        / (T::from_int(2) * h);
    Ok(HopfPoint { parameter: root, omega: jac.omega(), jacobian: jac, det, transversality: dt / T::from_int(2) })
}

/// Hopf point of the κ-family `v' = κ F_v` in ramp form, where trace(κ) = p₀ + κ s₀.
pub fn hopf_detect_kappa<T: Scalar>(coeffs: &MultilinearCoeffs<T>, point: &(T, T)) -> Result<HopfPoint<T>> {
    let j0 = jacobian_multilinear(coeffs, point);
    if j0.s.is_zero() {
        return Err(Error::NotHopfPoint("trace does not depend on kappa".into()));
    }
    let kappa = -j0.p.clone() / j0.s.clone();
    if kappa <= T::zero() {
        return Err(Error::NotHopfPoint("trace vanishes only for non-positive kappa".into()));
    }
    let jac = jacobian_multilinear(&coeffs.with_kappa(&kappa), point);
    let det = jac.det();
    if det <= T::zero() {
        return Err(Error::NotHopfPoint(format!("det = {} <= 0", det.to_f64())));
    }
    Ok(HopfPoint {
        parameter: kappa,
        omega: jac.omega(),
        jacobian: jac,
        det,
        transversality: j0.s / T::from_int(2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Supercritical,
    Subcritical,
    Degenerate,
}

impl Criticality {
    /// Supercritical iff a < −tol, subcritical iff a > tol; `tol` is relative to `scale`.
    pub fn from_coefficient<T: Scalar>(a: &T, scale: f64, rel_tol: f64) -> Self {
        let tol = rel_tol * scale.abs().max(f64::MIN_POSITIVE);
        if T::is_exact() {
            match a.signum_i8() {
                -1 => Criticality::Supercritical,
                1 => Criticality::Subcritical,
                _ => Criticality::Degenerate,
            }
        } else if a.to_f64() < -tol {
            Criticality::Supercritical
        } else if a.to_f64() > tol {
            Criticality::Subcritical
        } else {
            Criticality::Degenerate
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupercriticalityReport<T> {
    pub jacobian: JacobianPQRS<T>,
    /// pq(r a₁² + q a₂²); positive means supercritical.
    pub pq_form: T,
    /// (b₁c₁ − a₁d₁)/p · [a₁²(a₂d₂ − b₂c₂) + a₂²(b₁c₁ − a₁d₁)]; absent when p = 0.
    pub parameter_form: Option<T>,
    /// First Lyapunov coefficient of the bilinear system: −pq(r a₁² + q a₂²)/(8 det).
    pub lyapunov: T,
    pub supercritical: bool,
    pub forms_agree: Option<bool>,
    /// pq = b₁c₁ − a₁d₁ and rs = b₂c₂ − a₂d₂ at the point.
    pub fixed_point_identities: bool,
}

/// Closed-form supercriticality test for a bilinear system at a Hopf point.
/// The κ factor, if any, must already be folded into the v-row.
pub fn supercritical_multilinear<T: Scalar>(coeffs: &MultilinearCoeffs<T>, point: &(T, T)) -> Result<SupercriticalityReport<T>> {
    let j = jacobian_multilinear(coeffs, point);
    let tr = j.trace();
    let det = j.det();
    if !tr.near_zero(1e-9) || det <= T::zero() {
        return Err(Error::NotHopfPoint(format!("trace {} det {}", tr.to_f64(), det.to_f64())));
    }
    let (u, v) = (&coeffs.u, &coeffs.v);
    let sq = |x: &T| x.clone() * x.clone();
    let pq = j.p.clone() * j.q.clone();
    let pq_form = pq.clone() * (j.r.clone() * sq(&u.a) + j.q.clone() * sq(&v.a));
    let e1 = u.b.clone() * u.c.clone() - u.a.clone() * u.d.clone();
    let e2 = v.a.clone() * v.d.clone() - v.b.clone() * v.c.clone();
    let parameter_form = (!j.p.is_zero())
        .then(|| e1.clone() / j.p.clone() * (sq(&u.a) * e2.clone() + sq(&v.a) * e1.clone()));
    let lyapunov = -pq_form.clone() / (T::from_int(8) * det);
    let supercritical = pq_form > T::zero();
    let forms_agree = parameter_form.as_ref().map(|x| x.signum_i8() == pq_form.signum_i8());
    let rs = j.r.clone() * j.s.clone();
    let fixed_point_identities = (pq - e1).near_zero(1e-12) && (rs + e2).near_zero(1e-12);
    Ok(SupercriticalityReport {
        jacobian: j,
        pq_form,
        parameter_form,
        lyapunov,
        supercritical,
        forms_agree,
        fixed_point_identities,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A4Class {
    A4,
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A4Report<T> {
    pub jacobian: JacobianPQRS<T>,
    /// u-nullcline slope (a₁d₁ − b₁c₁)/q².
    pub slope_u: T,
    /// v-nullcline slope (a₂d₂ − b₂c₂)/s².
    pub slope_v: T,
    pub slopes_ordered: bool,
    /// r/s < p/q < 0.
    pub ratio_condition: bool,
    pub qr_negative: bool,
    /// sign p = sign r = −sign q = −sign s.
    pub sign_pattern: bool,
    /// The v-nullcline branch through the point reaches u = 1 inside the box.
    pub v_branch_reaches_right_edge: bool,
    /// F_u(1, 1) > 0.
    pub corner_pp_positive: bool,
    pub class: A4Class,
}

pub fn a4_classify<T: Scalar>(coeffs: &MultilinearCoeffs<T>, point: &(T, T)) -> Result<A4Report<T>> {
    let j = jacobian_multilinear(coeffs, point);
    if j.q.is_zero() || j.s.is_zero() {
        return Err(Error::Undefined("q = 0 or s = 0: nullcline ordering undefined".into()));
    }
    let (u, v) = (&coeffs.u, &coeffs.v);
    let sq = |x: &T| x.clone() * x.clone();
    let zero = T::zero();
    let one = T::one();
    let slope_u = (u.a.clone() * u.d.clone() - u.b.clone() * u.c.clone()) / sq(&j.q);
    let slope_v = (v.a.clone() * v.d.clone() - v.b.clone() * v.c.clone()) / sq(&j.s);
    let slopes_ordered = slope_v > slope_u && slope_u > zero;
    let pq = j.p.clone() / j.q.clone();
    let rs = j.r.clone() / j.s.clone();
    let ratio_condition = rs < pq && pq < zero;
    let qr_negative = j.q.clone() * j.r.clone() < zero;
    let sgn = |x: &T| x.signum_i8();
    let sign_pattern = sgn(&j.p) != 0 && sgn(&j.p) == sgn(&j.r) && sgn(&j.p) == -sgn(&j.q) && sgn(&j.p) == -sgn(&j.s);
    let den_at = |x: &T| v.a.clone() * x.clone() + v.c.clone();
    let (d0, d1) = (den_at(&point.0), den_at(&one));
    let v_branch_reaches_right_edge = d0.signum_i8() != 0
        && d0.signum_i8() == d1.signum_i8()
        && (-(v.b.clone() + v.d.clone()) / d1).abs() <= one;
    let corner_pp_positive = u.eval(&one, &one) > zero;
    let holds = slopes_ordered
        && ratio_condition
        && qr_negative
        && sign_pattern
        && v_branch_reaches_right_edge
        && corner_pp_positive;
    Ok(A4Report {
        jacobian: j,
        slope_u,
        slope_v,
        slopes_ordered,
        ratio_condition,
        qr_negative,
        sign_pattern,
        v_branch_reaches_right_edge,
        corner_pp_positive,
        class: if holds { A4Class::A4 } else { A4Class::Unclassified },
    })
}
