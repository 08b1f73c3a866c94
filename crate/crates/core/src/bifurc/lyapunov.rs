use serde::{Deserialize, Serialize};

use super::JacobianPQRS;
use crate::error::{Error, Result};
use crate::hidden::{BilinearForm, HiddenMode, HiddenSystem};
use crate::poly::{Poly2, PolySystem2D};
use crate::scalar::{Rational, Scalar, Surd};
use crate::switching::{HiddenFactor, SwitchKind, SwitchingProfile};

/// Partial derivatives of the normal-form coordinates at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partials<T> {
    pub f_xx: T,
    pub f_xy: T,
    pub f_yy: T,
    pub f_xxx: T,
    pub f_xyy: T,
    pub g_xx: T,
    pub g_xy: T,
    pub g_yy: T,
    pub g_xxy: T,
    pub g_yyy: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport<T> {
    /// First Lyapunov coefficient; negative means supercritical.
    pub a: T,
    pub omega: T,
    pub jacobian: JacobianPQRS<T>,
    pub partials: Partials<T>,
}

fn bilinear_poly<T: Scalar>(b: &BilinearForm<T>, x: &Poly2<T>, y: &Poly2<T>) -> Poly2<T> {
    let xy = x * y;
    let mut out = xy.scale(&b.a);
    out = &out + &x.scale(&b.b);
    out = &out + &y.scale(&b.c);
    &out + &Poly2::constant(b.d.clone())
}

fn profile_poly<T: Scalar>(p: &SwitchingProfile<T>, var: Poly2<T>) -> Result<Poly2<T>> {
    let lin = var.scale(&p.steepness);
    match &p.kind {
        SwitchKind::Ramp => Ok(lin),
        SwitchKind::SmoothCubic => {
            let cube = lin.pow(3);
            let half = T::from_ratio(1, 2);
            Ok(&lin.scale(&(T::from_int(3) * half.clone())) - &cube.scale(&half))
        }
        SwitchKind::Tabulated { .. } => Err(Error::invalid("tabulated profiles are not polynomial")),
    }
}

fn factor_poly<T: Scalar>(h: &HiddenFactor<T>, var: &Poly2<T>) -> Poly2<T> {
    match h {
        HiddenFactor::Unit => Poly2::constant(T::one()),
        HiddenFactor::Hill { theta } => {
            let k = T::one() / (T::from_int(4) * theta.clone());
            (&Poly2::constant(T::one()) - &var.pow(2)).scale(&k)
        }
    }
}

/// The hidden system inside the open square as a polynomial vector field.
///
/// Steepness only rescales u and v, so the profile is taken with the
/// unit-steepness argument and κ carries the ratio.
pub fn poly_system<T: Scalar>(sys: &HiddenSystem<T>) -> Result<PolySystem2D<T>> {
    let (u, v) = (Poly2::u(), Poly2::v());
    let c = &sys.coeffs;
    let k = &sys.kappa;
    match &sys.mode {
        HiddenMode::Composition { pi_u, pi_v } => {
            let unit = |p: &SwitchingProfile<T>| SwitchingProfile { kind: p.kind.clone(), steepness: T::one() };
            let rho = profile_poly(&unit(pi_u), u)?;
            let sigma = profile_poly(&unit(pi_v), v)?;
            Ok(PolySystem2D::new(bilinear_poly(&c.u, &rho, &sigma), bilinear_poly(&c.v, &rho, &sigma).scale(k)))
        }
        HiddenMode::Factor { factor_u, factor_v } => {
            let f = &factor_poly(factor_u, &u) * &bilinear_poly(&c.u, &u, &v);
            let g = &factor_poly(factor_v, &v) * &bilinear_poly(&c.v, &u, &v);
            Ok(PolySystem2D::new(f, g.scale(k)))
        }
    }
}

/// First Lyapunov coefficient at a Hopf point, using the eigenvector matrix
/// T = [[q, 0], [−p, −ω]].
pub fn lyapunov_coefficient<T: Scalar>(sys: &PolySystem2D<T>, point: &(T, T)) -> Result<LyapunovReport<T>> {
    lyapunov_with_eigenvector_scale(sys, point, &T::one())
}

/// As [`lyapunov_coefficient`] with T scaled by `c`. The coefficient picks up a factor c².
pub fn lyapunov_with_eigenvector_scale<T: Scalar>(
    sys: &PolySystem2D<T>,
    point: &(T, T),
    c: &T,
) -> Result<LyapunovReport<T>> {
    let (x, y) = (Poly2::u(), Poly2::v());
    let sx = &x + &Poly2::constant(point.0.clone());
    let sy = &y + &Poly2::constant(point.1.clone());
    let f = sys.f.compose(&sx, &sy);
    let g = sys.g.compose(&sx, &sy);
    let jac = JacobianPQRS {
        p: f.partial_at_origin(1, 0),
        q: f.partial_at_origin(0, 1),
        r: g.partial_at_origin(1, 0),
        s: g.partial_at_origin(0, 1),
    };
    let scale = [&jac.p, &jac.q, &jac.r, &jac.s].iter().fold(0.0f64, |m, v| m.max(v.to_f64().abs())).max(1.0);
    if !jac.trace().near_zero(1e-10 * scale) {
        return Err(Error::NotHopfPoint(format!("trace = {} at the point", jac.trace().to_f64())));
    }
    if jac.det() <= T::zero() {
        return Err(Error::NotHopfPoint(format!("det = {} <= 0", jac.det().to_f64())));
    }
    if jac.q.is_zero() {
        return Err(Error::Undefined("q = 0: eigenvector matrix is singular".into()));
    }
    let omega = jac
        .omega()
        .ok_or_else(|| Error::NotRepresentable("sqrt(det) is not representable in this scalar type".into()))?;
    let (p, q) = (jac.p.clone(), jac.q.clone());

    // (x, y) = T (X, Y)
    let tx = x.scale(&(c.clone() * q.clone()));
    let ty = &x.scale(&(-c.clone() * p.clone())) - &y.scale(&(c.clone() * omega.clone()));
    let fx = f.compose(&tx, &ty);
    let gx = g.compose(&tx, &ty);
    // T⁻¹ = [[1/(cq), 0], [−p/(cqω), −1/(cω)]]
    let cq = c.clone() * q.clone();
    let cw = c.clone() * omega.clone();
    let nf = fx.scale(&(T::one() / cq.clone()));
    let ng = &fx.scale(&(-p / (cq * omega.clone()))) - &gx.scale(&(T::one() / cw));

    let d = |poly: &Poly2<T>, i, j| poly.partial_at_origin(i, j);
    let pt = Partials {
        f_xx: d(&nf, 2, 0),
        f_xy: d(&nf, 1, 1),
        f_yy: d(&nf, 0, 2),
        f_xxx: d(&nf, 3, 0),
        f_xyy: d(&nf, 1, 2),
        g_xx: d(&ng, 2, 0),
        g_xy: d(&ng, 1, 1),
        g_yy: d(&ng, 0, 2),
        g_xxy: d(&ng, 2, 1),
        g_yyy: d(&ng, 0, 3),
    };
    let sixteen = T::from_int(16);
    let cubic = (pt.f_xxx.clone() + pt.f_xyy.clone() + pt.g_xxy.clone() + pt.g_yyy.clone()) / sixteen.clone();
    let quad = pt.f_xy.clone() * (pt.f_xx.clone() + pt.f_yy.clone())
        - pt.g_xy.clone() * (pt.g_xx.clone() + pt.g_yy.clone())
        - pt.f_xx.clone() * pt.g_xx.clone()
        + pt.f_yy.clone() * pt.g_yy.clone();
    let a = cubic + quad / (sixteen * omega.clone());
    Ok(LyapunovReport { a, omega, jacobian: jac, partials: pt })
}

/// Exact coefficient for rational systems, working in Q(√det) when ω is irrational.
pub fn lyapunov_coefficient_exact(sys: &PolySystem2D<Rational>, point: &(Rational, Rational)) -> Result<Rational> {
    let lifted = sys.map(|x| Surd::rational(x.clone()));
    let pt = (Surd::rational(point.0.clone()), Surd::rational(point.1.clone()));
    let rep = lyapunov_coefficient(&lifted, &pt)?;
    rep.a
        .as_rational()
        .ok_or_else(|| Error::NotRepresentable(format!("coefficient {} is irrational", rep.a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hidden::MultilinearCoeffs;
    use crate::scalar::q;

    #[test]
    fn normal_form_oscillator_with_cubic_damping() {
        // x' = −y − x³, y' = x: a = (−6)/16 = −3/8.
        let f = &Poly2::v().scale(&q(-1, 1)) - &Poly2::u().pow(3);
        let g = Poly2::u();
        // q = −1 here, so T flips orientation; the sign of a is unchanged.
        let a = lyapunov_coefficient_exact(&PolySystem2D::new(f, g), &(q(0, 1), q(0, 1))).unwrap();
        assert_eq!(a, q(-3, 8));
    }

    #[test]
    fn ex1_ramp_multilinear() {
        let a2 = q(3, 1);
        let c = MultilinearCoeffs::new([q(1, 1), q(-1, 1), q(1, 1), q(0, 1)], [a2.clone(), q(-2, 1), q(1, 1), q(0, 1)]);
        let sys = poly_system(&HiddenSystem::ramp(c, q(1, 1))).unwrap();
        let a = lyapunov_coefficient_exact(&sys, &(q(0, 1), q(0, 1))).unwrap();
        assert_eq!(a, (a2.clone() * a2 - q(2, 1)) / q(8, 1));
    }

    #[test]
    fn scale_enters_quadratically() {
        let c = MultilinearCoeffs::new([q(1, 1), q(-1, 1), q(1, 1), q(0, 1)], [q(2, 1), q(-2, 1), q(1, 1), q(0, 1)]);
        let sys = poly_system(&HiddenSystem::ramp(c, q(1, 1))).unwrap();
        let o = (q(0, 1), q(0, 1));
        let a1 = lyapunov_coefficient(&sys, &o).unwrap().a;
        let a3 = lyapunov_with_eigenvector_scale(&sys, &o, &q(3, 1)).unwrap().a;
        assert_eq!(a3, a1 * q(9, 1));
    }

    #[test]
    fn rejects_nonzero_trace() {
        let sys = PolySystem2D::new(Poly2::u(), Poly2::v());
        assert!(matches!(lyapunov_coefficient(&sys, &(q(0, 1), q(0, 1))), Err(Error::NotHopfPoint(_))));
    }
}
