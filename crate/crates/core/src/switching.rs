//! Switching profiles π and the multiplicative Hill factor h.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SwitchKind<T> {
    Ramp,
    /// ½(3u − u³) on [−1, 1].
    SmoothCubic,
    /// Piecewise-linear through `(u, π(u))` knots spanning [−1, 1].
    Tabulated { knots: Vec<(T, T)> },
}

/// A switching function together with its steepness ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchingProfile<T> {
    pub kind: SwitchKind<T>,
    pub steepness: T,
}

impl<T: Scalar> SwitchingProfile<T> {
    pub fn ramp() -> Self {
        SwitchingProfile { kind: SwitchKind::Ramp, steepness: T::one() }
    }

    pub fn smooth_cubic() -> Self {
        SwitchingProfile { kind: SwitchKind::SmoothCubic, steepness: T::one() }
    }

    /// Knots must have strictly increasing abscissae, start at u = −1 and end at u = 1.
    /// Monotonicity of the values is not enforced here; [`is_class_s`] reports it.
    pub fn tabulated(knots: Vec<(T, T)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid("tabulated profile needs at least two knots"));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("tabulated knots must have strictly increasing u"));
        }
        if knots[0].0 != -T::one() || knots[knots.len() - 1].0 != T::one() {
            return Err(Error::invalid("tabulated knots must span exactly [-1, 1]"));
        }
        Ok(SwitchingProfile { kind: SwitchKind::Tabulated { knots }, steepness: T::one() })
    }

    pub fn with_steepness(mut self, steepness: T) -> Result<Self> {
        if steepness <= T::zero() {
            return Err(Error::invalid("steepness must be positive"));
        }
        self.steepness = steepness;
        Ok(self)
    }
}

/// π(u), saturating to ±1 outside [−1, 1].
pub fn eval_switch<T: Scalar>(profile: &SwitchingProfile<T>, u: &T) -> T {
    let one = T::one();
    if *u >= one {
        return one;
    }
    if *u <= -one.clone() {
        return -one;
    }
    match &profile.kind {
        SwitchKind::Ramp => u.clone(),
        SwitchKind::SmoothCubic => {
            let u2 = u.clone() * u.clone();
            T::from_ratio(1, 2) * u.clone() * (T::from_int(3) - u2)
        }
        SwitchKind::Tabulated { knots } => {
            let k = segment(knots, u);
            let (u0, p0) = &knots[k];
            let (u1, p1) = &knots[k + 1];
            p0.clone() + (p1.clone() - p0.clone()) * (u.clone() - u0.clone()) / (u1.clone() - u0.clone())
        }
    }
}

/// π'(u). Outside (−1, 1), including the corners, the outside limit 0 is used.
pub fn eval_switch_deriv<T: Scalar>(profile: &SwitchingProfile<T>, u: &T) -> T {
    let one = T::one();
    if *u >= one || *u <= -one.clone() {
        return T::zero();
    }
    match &profile.kind {
        SwitchKind::Ramp => one,
        SwitchKind::SmoothCubic => T::from_ratio(3, 2) * (one - u.clone() * u.clone()),
        SwitchKind::Tabulated { knots } => {
            let k = segment(knots, u);
            let (u0, p0) = &knots[k];
            let (u1, p1) = &knots[k + 1];
            (p1.clone() - p0.clone()) / (u1.clone() - u0.clone())
        }
    }
}

// Index of the segment [u_k, u_{k+1}) containing u.
fn segment<T: Scalar>(knots: &[(T, T)], u: &T) -> usize {
    let n = knots.len();
    knots[1..n - 1].iter().take_while(|(x, _)| x <= u).count()
}

/// Which factor multiplies a hidden-dynamics component in factor mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HiddenFactor<T> {
    Unit,
    /// h(w) = (1 − w²)/(4θ); θ = 1 by default.
    Hill { theta: T },
}

impl<T: Scalar> HiddenFactor<T> {
    pub fn hill() -> Self {
        HiddenFactor::Hill { theta: T::one() }
    }

    pub fn eval(&self, w: &T) -> Result<T> {
        match self {
            HiddenFactor::Unit => Ok(T::one()),
            HiddenFactor::Hill { theta } => Ok(hill_factor(w)? / theta.clone()),
        }
    }

    /// dh/dw.
    pub fn deriv(&self, w: &T) -> T {
        match self {
            HiddenFactor::Unit => T::zero(),
            HiddenFactor::Hill { theta } => -w.clone() / (T::from_int(2) * theta.clone()),
        }
    }

    pub fn is_hill(&self) -> bool {
        matches!(self, HiddenFactor::Hill { .. })
    }
}

/// h(w) = (1 − w²)/4 on [−1, 1].
pub fn hill_factor<T: Scalar>(w: &T) -> Result<T> {
    if w.abs() > T::one() {
        return Err(Error::invalid(format!("Hill factor needs |w| <= 1, got {}", w.to_f64())));
    }
    Ok((T::one() - w.clone() * w.clone()) / T::from_int(4))
}

/// Slope of the logistic Hill switch expressed through its output ρ: (1 − ρ²)/2.
///
/// In log coordinates the Hill function is ρ = tanh(u/2), so this is π'(u) at π(u) = ρ.
pub fn hill_switch_slope<T: Scalar>(rho: &T) -> T {
    (T::one() - rho.clone() * rho.clone()) / T::from_int(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSProperty {
    Odd,
    PositiveSlope,
    Concave,
    Saturating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSReport {
    pub failures: Vec<ClassSProperty>,
}

impl ClassSReport {
    pub fn passes(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Sampled check of the four class-𝒮 properties (tolerance 1e−12).
pub fn is_class_s<T: Scalar>(profile: &SwitchingProfile<T>, grid: usize) -> Result<ClassSReport> {
    if grid < 64 {
        return Err(Error::invalid("class-S check needs at least 64 grid points"));
    }
    let tol = 1e-12;
    let n = grid as i64;
    let mut failures = Vec::new();
    let interior = |k: i64| T::from_ratio(2 * k - n - 1, n + 1); // strictly inside (−1, 1)

    if (1..=n).any(|k| {
        let u = interior(k);
        !(eval_switch(profile, &-u.clone()) + eval_switch(profile, &u)).near_zero(tol)
    }) {
        failures.push(ClassSProperty::Odd);
    }
    if (1..=n).any(|k| eval_switch_deriv(profile, &interior(k)) <= T::zero()) {
        failures.push(ClassSProperty::PositiveSlope);
    }
    // Second differences on (0, 1).
    let h = T::from_ratio(1, n + 1);
    let tol_t = T::from_f64(tol);
    if (1..n).any(|k| {
        let u = T::from_ratio(k, n + 1);
        let d2 = eval_switch(profile, &(u.clone() + h.clone())) - T::from_int(2) * eval_switch(profile, &u)
            + eval_switch(profile, &(u - h.clone()));
        d2 > tol_t
    }) {
        failures.push(ClassSProperty::Concave);
    }
    if (0..=n).any(|k| {
        let u = T::one() + T::from_ratio(2 * k, n);
        !(eval_switch(profile, &u) - T::one()).near_zero(tol)
            || !(eval_switch(profile, &-u) + T::one()).near_zero(tol)
    }) {
        failures.push(ClassSProperty::Saturating);
    }
    Ok(ClassSReport { failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_values() {
        let r = SwitchingProfile::<f64>::ramp();
        assert_eq!(eval_switch(&r, &0.0), 0.0);
        assert_eq!(eval_switch(&r, &2.0), 1.0);
        assert_eq!(eval_switch_deriv(&r, &0.3), 1.0);
        assert_eq!(eval_switch_deriv(&r, &1.5), 0.0);
        assert_eq!(eval_switch_deriv(&r, &1.0), 0.0);
    }

    #[test]
    fn cubic_values() {
        let c = SwitchingProfile::<f64>::smooth_cubic();
        assert_eq!(eval_switch(&c, &0.5), 0.6875);
        assert_eq!(eval_switch_deriv(&c, &0.0), 1.5);
    }

    #[test]
    fn hill_factor_values() {
        assert_eq!(hill_factor(&0.0).unwrap(), 0.25);
        assert_eq!(hill_factor(&1.0).unwrap(), 0.0);
        assert_eq!(hill_factor(&-1.0).unwrap(), 0.0);
        assert_eq!(hill_factor(&0.5).unwrap(), 0.1875);
        assert!(hill_factor(&1.5).is_err());
    }

    #[test]
    fn class_s_examples() {
        assert!(is_class_s(&SwitchingProfile::<f64>::ramp(), 64).unwrap().passes());
        assert!(is_class_s(&SwitchingProfile::<f64>::smooth_cubic(), 128).unwrap().passes());
        let stair = SwitchingProfile::tabulated(vec![
            (-1.0, -1.0),
            (-0.5, 0.0),
            (0.5, 0.0),
            (1.0, 1.0),
        ])
        .unwrap();
        let rep = is_class_s(&stair, 64).unwrap();
        assert!(rep.failures.contains(&ClassSProperty::PositiveSlope));
        assert!(is_class_s(&SwitchingProfile::<f64>::ramp(), 10).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_rejects_bad_grids() {
        let t = SwitchingProfile::tabulated(vec![(-1.0, -1.0), (0.0, 0.0), (0.5, 0.8), (1.0, 1.0)]).unwrap();
        assert!((eval_switch(&t, &0.25) - 0.4).abs() < 1e-15);
        assert!((eval_switch_deriv(&t, &0.75) - 0.4).abs() < 1e-15);
        assert!(SwitchingProfile::tabulated(vec![(-1.0, -1.0), (0.5, 0.0)]).is_err());
        assert!(SwitchingProfile::tabulated(vec![(-1.0, -1.0), (0.5, 0.0), (0.2, 0.1), (1.0, 1.0)]).is_err());
    }
}
