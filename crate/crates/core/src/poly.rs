//! Small polynomial toolkit: bivariate polynomials with exact coefficients
//! (for the Lyapunov transform), univariate polynomials (for the invariant
//! region quartic) and closed-form real roots of cubics.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Σ c_ij uⁱ vʲ.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2<T> {
    terms: BTreeMap<(u32, u32), T>,
}

impl<T: Scalar> Poly2<T> {
    pub fn zero() -> Self {
        Poly2 { terms: BTreeMap::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: T, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn u() -> Self {
        Self::monomial(T::one(), 1, 0)
    }

    pub fn v() -> Self {
        Self::monomial(T::one(), 0, 1)
    }

    fn add_term(&mut self, i: u32, j: u32, c: T) {
        let e = self.terms.entry((i, j)).or_insert_with(T::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> T {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn scale(&self, k: &T) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in &self.terms {
            p.add_term(*i, *j, c.clone() * k.clone());
        }
        p
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(T::one()), |acc, _| &acc * self)
    }

    pub fn eval(&self, u: &T, v: &T) -> T {
        self.terms.iter().fold(T::zero(), |acc, ((i, j), c)| {
            let mut t = c.clone();
            for _ in 0..*i {
                t = t * u.clone();
            }
            for _ in 0..*j {
                t = t * v.clone();
            }
            acc + t
        })
    }

    pub fn deriv_u(&self) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in &self.terms {
            if *i > 0 {
                p.add_term(i - 1, *j, c.clone() * T::from_int(*i as i64));
            }
        }
        p
    }

    pub fn deriv_v(&self) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in &self.terms {
            if *j > 0 {
                p.add_term(*i, j - 1, c.clone() * T::from_int(*j as i64));
            }
        }
        p
    }

    /// Substitute u ← U(x, y), v ← V(x, y).
    pub fn compose(&self, big_u: &Poly2<T>, big_v: &Poly2<T>) -> Self {
        let deg_u = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let deg_v = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let pu: Vec<Poly2<T>> = (0..=deg_u).map(|n| big_u.pow(n)).collect();
        let pv: Vec<Poly2<T>> = (0..=deg_v).map(|n| big_v.pow(n)).collect();
        self.terms.iter().fold(Self::zero(), |acc, ((i, j), c)| {
            &acc + &(&pu[*i as usize] * &pv[*j as usize]).scale(c)
        })
    }

    /// ∂ⁱ⁺ʲ/∂uⁱ∂vʲ at the origin.
    pub fn partial_at_origin(&self, i: u32, j: u32) -> T {
        let fact = |n: u32| (1..=n as i64).product::<i64>();
        self.coeff(i, j) * T::from_int(fact(i) * fact(j))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly2<U> {
        let mut p = Poly2::zero();
        for ((i, j), c) in &self.terms {
            p.add_term(*i, *j, f(c));
        }
        p
    }
}

impl<T: Scalar> Add for &Poly2<T> {
    type Output = Poly2<T>;
    fn add(self, o: &Poly2<T>) -> Poly2<T> {
        let mut p = self.clone();
        for ((i, j), c) in &o.terms {
            p.add_term(*i, *j, c.clone());
        }
        p
    }
}

impl<T: Scalar> Sub for &Poly2<T> {
    type Output = Poly2<T>;
    fn sub(self, o: &Poly2<T>) -> Poly2<T> {
        self + &(-o)
    }
}

impl<T: Scalar> Neg for &Poly2<T> {
    type Output = Poly2<T>;
    fn neg(self) -> Poly2<T> {
        self.scale(&-T::one())
    }
}

impl<T: Scalar> Mul for &Poly2<T> {
    type Output = Poly2<T>;
    fn mul(self, o: &Poly2<T>) -> Poly2<T> {
        let mut p = Poly2::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &o.terms {
                p.add_term(i1 + i2, j1 + j2, c1.clone() * c2.clone());
            }
        }
        p
    }
}

/// Planar polynomial vector field (u', v').
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem2D<T> {
    pub f: Poly2<T>,
    pub g: Poly2<T>,
}

impl<T: Scalar> PolySystem2D<T> {
    pub fn new(f: Poly2<T>, g: Poly2<T>) -> Self {
        PolySystem2D { f, g }
    }

    pub fn eval(&self, u: &T, v: &T) -> (T, T) {
        (self.f.eval(u, v), self.g.eval(u, v))
    }

    pub fn max_degree(&self) -> u32 {
        self.f.total_degree().max(self.g.total_degree())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U + Copy) -> PolySystem2D<U> {
        PolySystem2D { f: self.f.map(f), g: self.g.map(f) }
    }
}

/// Coefficients in ascending order: c₀ + c₁x + c₂x² + ….
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly1<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Poly1<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly1 { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// a + b·x.
    pub fn linear(a: T, b: T) -> Self {
        Self::new(vec![a, b])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let get = |p: &Self, i: usize| p.coeffs.get(i).cloned().unwrap_or_else(T::zero);
        Self::new((0..n).map(|i| get(self, i) + get(o, i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-T::one()))
    }

    pub fn scale(&self, k: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * k.clone()).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    /// Synthetic division by (x − r): (quotient, remainder).
    pub fn deflate(&self, r: &T) -> (Self, T) {
        let n = self.coeffs.len();
        if n < 2 {
            return (Self::constant(T::zero()), self.coeffs[0].clone());
        }
        let mut q = vec![T::zero(); n - 1];
        let mut acc = T::zero();
        for k in (0..n).rev() {
            acc = acc * r.clone() + self.coeffs[k].clone();
            if k > 0 {
                q[k - 1] = acc.clone();
            }
        }
        (Self::new(q), acc)
    }

    pub fn to_f64(&self) -> Poly1<f64> {
        Poly1::new(self.coeffs.iter().map(Scalar::to_f64).collect())
    }
}

/// Real roots of c₃x³ + c₂x² + c₁x + c₀, in closed form, ascending.
///
/// Falls back to the quadratic or linear formula when leading coefficients
/// vanish. Each root receives two Newton corrections.
pub fn cubic_real_roots<F: Float>(c3: F, c2: F, c1: F, c0: F) -> Vec<F> {
    let scale = c3.abs().max(c2.abs()).max(c1.abs()).max(c0.abs());
    if scale == F::zero() {
        return vec![];
    }
    let tiny = F::epsilon() * F::from(16.0).unwrap() * scale;
    let mut roots = if c3.abs() <= tiny {
        quadratic_real_roots(c2, c1, c0)
    } else {
        let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
        let three = F::from(3.0).unwrap();
        let two = F::from(2.0).unwrap();
        let twenty_seven = F::from(27.0).unwrap();
        // x = t − a/3, t³ + p t + q = 0.
        let p = b - a * a / three;
        let q = two * a * a * a / twenty_seven - a * b / three + c;
        let shift = a / three;
        let disc = q * q / F::from(4.0).unwrap() + p * p * p / twenty_seven;
        let eps = F::epsilon() * F::from(64.0).unwrap() * (F::one() + a.abs() + b.abs() + c.abs()).powi(3);
        if disc.abs() <= eps && p.abs() <= eps.sqrt() {
            vec![-shift]
        } else if disc > eps {
            let s = disc.sqrt();
            let u = (-q / two + s).cbrt();
            let v = (-q / two - s).cbrt();
            vec![u + v - shift]
        } else if disc.abs() <= eps {
            let u = (-q / two).cbrt();
            vec![two * u - shift, -u - shift]
        } else {
            let r = (-p / three).sqrt();
            let arg = (three * q / (two * p) * (-three / p).sqrt()).max(-F::one()).min(F::one());
            let phi = arg.acos() / three;
            let tau = two * F::from(std::f64::consts::PI).unwrap() / three;
            (0..3).map(|k| two * r * (phi - tau * F::from(k).unwrap()).cos() - shift).collect()
        }
    };
    for x in roots.iter_mut() {
        for _ in 0..2 {
            let f = ((c3 * *x + c2) * *x + c1) * *x + c0;
            let df = (F::from(3.0).unwrap() * c3 * *x + F::from(2.0).unwrap() * c2) * *x + c1;
            if df != F::zero() {
                let step = f / df;
                if step.is_finite() {
                    *x = *x - step;
                }
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Real roots of a x² + b x + c in numerically stable form.
pub fn quadratic_real_roots<F: Float>(a: F, b: F, c: F) -> Vec<F> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == F::zero() {
        return vec![];
    }
    let tiny = F::epsilon() * F::from(16.0).unwrap() * scale;
    if a.abs() <= tiny {
        return if b.abs() <= tiny { vec![] } else { vec![-c / b] };
    }
    let two = F::from(2.0).unwrap();
    let disc = b * b - F::from(4.0).unwrap() * a * c;
    if disc < F::zero() {
        if disc.abs() <= tiny * scale {
            return vec![-b / (two * a)];
        }
        return vec![];
    }
    let s = disc.sqrt();
    let qq = -(b + if b < F::zero() { -s } else { s }) / two;
    if qq == F::zero() {
        return vec![F::zero()];
    }
    let mut r = vec![qq / a, c / qq];
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    #[test]
    fn poly2_compose_and_partials() {
        // f = u²v; u = x + y, v = 2y  ⇒ f = 2y(x+y)² = 2x²y + 4xy² + 2y³
        let f = &(&Poly2::<Rational>::u() * &Poly2::u()) * &Poly2::v();
        let u = &Poly2::u() + &Poly2::v();
        let v = Poly2::v().scale(&q(2, 1));
        let g = f.compose(&u, &v);
        assert_eq!(g.coeff(2, 1), q(2, 1));
        assert_eq!(g.coeff(1, 2), q(4, 1));
        assert_eq!(g.coeff(0, 3), q(2, 1));
        assert_eq!(g.partial_at_origin(0, 3), q(12, 1));
        assert_eq!(g.deriv_u().coeff(1, 1), q(4, 1));
    }

    #[test]
    fn deflation() {
        // (x − 2)(x² + 1) = x³ − 2x² + x − 2
        let p = Poly1::new(vec![q(-2, 1), q(1, 1), q(-2, 1), q(1, 1)]);
        let (quot, rem) = p.deflate(&q(2, 1));
        assert_eq!(rem, q(0, 1));
        assert_eq!(quot.coeffs, vec![q(1, 1), q(0, 1), q(1, 1)]);
    }

    #[test]
    fn cubic_root_cases() {
        let r = cubic_real_roots(1.0, -6.0, 11.0, -6.0);
        assert_eq!(r.len(), 3);
        for (x, e) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        let r = cubic_real_roots(1.0, 0.0, 1.0, -2.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-12);
        let r = cubic_real_roots(0.0, 1.0, -3.0, 2.0);
        assert_eq!(r.len(), 2);
        let r = cubic_real_roots(1.0, -3.0, 3.0, -1.0);
        assert!(r.iter().all(|x| (x - 1.0).abs() < 1e-5));
    }
}
