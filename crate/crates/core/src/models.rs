//! Ready-made systems: the two planar (a4) examples, the √17 stability-change
//! example, the modified Del Buono oscillator and the codimension-3 embedding.

use crate::error::Result;
use crate::hidden::MultilinearCoeffs;
use crate::psys::PiecewiseSystem;
use crate::scalar::{Rational, Scalar, Surd};

fn r<T: Scalar>(n: i64, d: i64) -> T {
    T::from_ratio(n, d)
}

/// u' = uv − u + v, v' = a₂uv − 2u + v (before κ).
pub fn example1<T: Scalar>(a2: T) -> MultilinearCoeffs<T> {
    MultilinearCoeffs::new([r(1, 1), r(-1, 1), r(1, 1), r(0, 1)], [a2, r(-2, 1), r(1, 1), r(0, 1)])
}

/// u' = 11/2·uv − u + 5v, v' = a₂uv − ½u + v (before κ).
pub fn example2<T: Scalar>(a2: T) -> MultilinearCoeffs<T> {
    MultilinearCoeffs::new([r(11, 2), r(-1, 1), r(5, 1), r(0, 1)], [a2, r(-1, 2), r(1, 1), r(0, 1)])
}

/// u' = ¼(uv − u + v + 3) − ½, v' = 5/2·uv + 5/16.
///
/// Its interior fixed point is irrational; see [`sec31_fixed_point`].
pub fn sec31<T: Scalar>() -> MultilinearCoeffs<T> {
    MultilinearCoeffs::new([r(1, 4), r(-1, 4), r(1, 4), r(1, 4)], [r(5, 2), r(0, 1), r(0, 1), r(5, 16)])
}

/// ((7 − √17)/16, −(7 + √17)/16), the root of 8u² − 7u + 1 = 0 inside the square.
pub fn sec31_fixed_point() -> (Surd, Surd) {
    let s17 = |b: i64| Surd::new(Rational::from_integer(0.into()), Rational::new(b.into(), 16.into()), Rational::from_integer(17.into()));
    let seven = Surd::rational(Rational::new(7.into(), 16.into()));
    (seven.clone() + s17(-1), -seven + s17(-1))
}

/// Entry point on the lower wall: u = 1 − 2φ₁ with φ₁ = ½.
pub fn sec31_entry<T: Scalar>() -> (T, T) {
    (T::zero(), -T::one())
}

/// Modified Del Buono oscillator in its original coordinates:
/// Z₁' = −2Z₁ − Z₂ + 23/10 + δ(Z₁ − 9/10)(Z₂ − ½), Z₂' = 8Z₁ + μ(Z₂ − ½) − 36/5.
/// Fixed point (9/10, ½); Hopf at μ = 2.
pub fn del_buono<T: Scalar>(delta: T, mu: T) -> MultilinearCoeffs<T> {
    let d = delta;
    MultilinearCoeffs::new(
        [
            d.clone(),
            r::<T>(-2, 1) - d.clone() * r(1, 2),
            r::<T>(-1, 1) - d.clone() * r(9, 10),
            r::<T>(23, 10) + d * r(9, 20),
        ],
        [r(0, 1), r(8, 1), mu.clone(), -(mu * r(1, 2)) - r(36, 5)],
    )
}

pub fn del_buono_fixed_point<T: Scalar>() -> (T, T) {
    (r(9, 10), r(1, 2))
}

/// Ramp form of the Del Buono system used for the codimension-3 embedding, with
/// δ = ½ written in (u, v) and v-equation divided by κ so that κ can be set separately.
pub fn del_buono_ramp<T: Scalar>(mu: T, kappa: T) -> MultilinearCoeffs<T> {
    MultilinearCoeffs::new(
        [r(1, 2), r(-2, 1), r(-7, 5), r(8, 5)],
        [r(0, 1), r(8, 1), mu / kappa, r(-32, 5)],
    )
}

/// Parameters of the three-switch system.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Codim3Params {
    pub mu: f64,
    pub kappa: f64,
    pub p: f64,
}

impl Default for Codim3Params {
    fn default() -> Self {
        Codim3Params { mu: 2.005, kappa: 3.3, p: 2.1 }
    }
}

/// Rates at saturated switch values (ρ, σ, ω) ∈ [−1, 1]³:
/// u' = −2ρ − σ + 8/5 + σ/2·(ρ − 4/5) + (1 + ω)/4,
/// v' = κ[8ρ + (μ/κ)σ − 32/5 + pσ(1 + ω)/2],
/// w' = 2/3 + ρσ/2.
pub fn codim3_rates(par: &Codim3Params, s: [f64; 3]) -> [f64; 3] {
    let [u, v, w] = s;
    let wf = (1.0 + w) / 2.0;
    [
        -2.0 * u - v + 1.6 + v / 2.0 * (u - 0.8) + 0.5 * wf,
        par.kappa * (8.0 * u + par.mu / par.kappa * v - 6.4 + par.p * v * wf),
        2.0 / 3.0 + u * v / 2.0,
    ]
}

/// Ramp-saturated field on ℝ³; equal to the ε = 1 regularization of [`codim3_system`].
pub fn codim3_field(par: Codim3Params) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone {
    move |y: &[f64]| {
        let sat = |x: f64| x.clamp(-1.0, 1.0);
        codim3_rates(&par, [sat(y[0]), sat(y[1]), sat(y[2])]).to_vec()
    }
}

/// Eight constant orthant fields on the switching surfaces u = v = w = 0.
pub fn codim3_system(par: &Codim3Params) -> Result<PiecewiseSystem<f64>> {
    let values = (0..8usize)
        .map(|orth| {
            let sign = |i: usize| if orth & (1 << (2 - i)) != 0 { -1.0 } else { 1.0 };
            codim3_rates(par, [sign(0), sign(1), sign(2)]).to_vec()
        })
        .collect();
    PiecewiseSystem::constant(vec![0.0; 3], values)
}

/// Logistic form of the Hill switch, 1/(1 + exp((ln θ − ln x)/ε)), safe for small ε.
pub fn hill_logistic(x: f64, theta: f64, eps: f64) -> f64 {
    let z = (theta.ln() - x.ln()) / eps;
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Full singularly perturbed Hill system near the threshold (1, 1), in fast time.
///
/// The slow states x = (x₁, x₂) obey ẋ = ½(F_u, κF_v)(u, v) with u = 2Z(x₁) − 1 and
/// v = 2Z(x₂) − 1. Writing xᵢ = exp(ε sᵢ), the fast-time equations are
/// s' = ½ e^{−εs}(F_u, κF_v) and u = tanh(s₁/2). At ε = 0 this is exactly the
/// factor-mode hidden system u' = ¼(1 − u²)F_u.
pub fn hill_full_rhs(coeffs: MultilinearCoeffs<f64>, kappa: f64, eps: f64) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone {
    move |s: &[f64]| {
        let (u, v) = ((s[0] / 2.0).tanh(), (s[1] / 2.0).tanh());
        let (fu, fv) = coeffs.eval(&u, &v);
        vec![0.5 * (-eps * s[0]).exp() * fu, 0.5 * kappa * (-eps * s[1]).exp() * fv]
    }
}

/// Hidden coordinates of a fast-time state of [`hill_full_rhs`].
pub fn hill_full_to_uv(s: &[f64]) -> (f64, f64) {
    ((s[0] / 2.0).tanh(), (s[1] / 2.0).tanh())
}

/// Inverse of [`hill_full_to_uv`] on the open square.
pub fn hill_full_from_uv(u: f64, v: f64) -> Vec<f64> {
    vec![2.0 * u.atanh(), 2.0 * v.atanh()]
}
