//! Piecewise-smooth systems near an intersection of coordinate switching
//! surfaces: regularized field, codim-1 sliding and codim-2 blending.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hidden::{bilinear_intersections, multilinear_from_corners, Intersections};
use crate::scalar::Scalar;
use crate::switching::{eval_switch, SwitchingProfile};

pub type VectorField<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// Fields are indexed by orthant: bit `k - 1 - i` is set when switching
/// coordinate `i` is on its negative side. For two surfaces the order is
/// ++, +−, −+, −−.
#[derive(Clone)]
pub struct PiecewiseSystem<T> {
    dim: usize,
    switch_idx: Vec<usize>,
    thresholds: Vec<T>,
    fields: Vec<VectorField<T>>,
    base: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for PiecewiseSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseSystem")
            .field("dim", &self.dim)
            .field("switch_idx", &self.switch_idx)
            .field("thresholds", &self.thresholds)
            .field("fields", &self.fields.len())
            .finish()
    }
}

impl<T: Scalar> PiecewiseSystem<T> {
    /// Switching surfaces y⁽ⁱ⁾ = θᵢ on the first `thresholds.len()` coordinates.
    pub fn new(dim: usize, thresholds: Vec<T>, fields: Vec<VectorField<T>>) -> Result<Self> {
        let k = thresholds.len();
        if !(1..=3).contains(&k) || k > dim {
            return Err(Error::invalid("one to three switching coordinates, at most the dimension"));
        }
        if fields.len() != 1 << k {
            return Err(Error::invalid(format!("{} switching surfaces need {} fields", k, 1 << k)));
        }
        let mut base = vec![T::zero(); dim];
        base[..k].clone_from_slice(&thresholds);
        Ok(PiecewiseSystem { dim, switch_idx: (0..k).collect(), thresholds, fields, base })
    }

    /// Constant orthant fields, e.g. corner values of a hidden system.
    pub fn constant(thresholds: Vec<T>, values: Vec<Vec<T>>) -> Result<Self> {
        let dim = thresholds.len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::invalid("constant fields must match the dimension"));
        }
        let fields = values
            .into_iter()
            .map(|v| Arc::new(move |_: &[T]| v.clone()) as VectorField<T>)
            .collect();
        Self::new(dim, thresholds, fields)
    }

    /// Values of the non-switching coordinates used when evaluating at the intersection.
    pub fn with_base_point(mut self, base: Vec<T>) -> Result<Self> {
        if base.len() != self.dim {
            return Err(Error::invalid("base point dimension mismatch"));
        }
        self.base = base;
        for (i, th) in self.switch_idx.iter().zip(&self.thresholds) {
            self.base[*i] = th.clone();
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn switching_count(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    pub fn field(&self, orthant: usize, y: &[T]) -> Vec<T> {
        (self.fields[orthant])(y)
    }
}

/// Orthant index for a sign pattern (`true` = positive side).
pub fn orthant_index(positive: &[bool]) -> usize {
    let k = positive.len();
    positive.iter().enumerate().fold(0, |acc, (i, p)| if *p { acc } else { acc | 1 << (k - 1 - i) })
}

/// Projections of the four region fields onto the switching normals at y₀.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerFields<T> {
    /// f_α at ++, +−, −+, −−.
    pub alpha: [T; 4],
    /// f_β at ++, +−, −+, −−.
    pub beta: [T; 4],
}

pub fn corner_fields<T: Scalar>(sys: &PiecewiseSystem<T>) -> Result<CornerFields<T>> {
    if sys.switching_count() != 2 {
        return Err(Error::invalid("corner fields need exactly two switching surfaces"));
    }
    let mut alpha = Vec::with_capacity(4);
    let mut beta = Vec::with_capacity(4);
    for k in 0..4 {
        let f = sys.field(k, &sys.base);
        let (fa, fb) = (f[sys.switch_idx[0]].clone(), f[sys.switch_idx[1]].clone());
        if !fa.to_f64().is_finite() || !fb.to_f64().is_finite() {
            return Err(Error::invalid(format!("non-finite field value in orthant {k}")));
        }
        alpha.push(fa);
        beta.push(fb);
    }
    let arr = |v: Vec<T>| -> [T; 4] { v.try_into().unwrap_or_else(|_| unreachable!()) };
    Ok(CornerFields { alpha: arr(alpha), beta: arr(beta) })
}

/// Orthant weights Πᵢ (1 ± πᵢ)/2 in orthant order.
pub fn regularization_weights<T: Scalar>(pis: &[T]) -> Vec<T> {
    let k = pis.len();
    let half = T::from_ratio(1, 2);
    (0..1usize << k)
        .map(|orth| {
            pis.iter().enumerate().fold(T::one(), |w, (i, p)| {
                let negative = orth & (1 << (k - 1 - i)) != 0;
                let f = if negative { T::one() - p.clone() } else { T::one() + p.clone() };
                w * f * half.clone()
            })
        })
        .collect()
}

/// Convex combination of the region fields with weights from π(α/ε), π(β/ε), ….
pub fn regularized_rhs<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    y: &[T],
    eps: &T,
    profiles: &[SwitchingProfile<T>],
) -> Result<Vec<T>> {
    if *eps <= T::zero() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if profiles.len() != sys.switching_count() || y.len() != sys.dim {
        return Err(Error::invalid("profile count or state dimension mismatch"));
    }
    let pis: Vec<T> = sys
        .switch_idx
        .iter()
        .zip(&sys.thresholds)
        .zip(profiles)
        .map(|((i, th), p)| eval_switch(p, &((y[*i].clone() - th.clone()) / eps.clone())))
        .collect();
    let weights = regularization_weights(&pis);
    let mut out = vec![T::zero(); sys.dim];
    for (k, w) in weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for (o, f) in out.iter_mut().zip(sys.field(k, y)) {
            *o = o.clone() + w.clone() * f;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilippovSliding<T> {
    pub lambda: T,
    /// f₋ > 0 > f₊: both sides push towards the surface.
    pub attractive: bool,
    /// λ ∈ [−1, 1].
    pub exists: bool,
}

/// λ solving (1+λ)f₊ + (1−λ)f₋ = 0.
pub fn filippov_codim1<T: Scalar>(f_plus: &T, f_minus: &T) -> Result<FilippovSliding<T>> {
    let den = f_minus.clone() - f_plus.clone();
    if den.is_zero() {
        return Err(Error::NoSliding(if f_plus.is_zero() {
            "both side fields vanish".into()
        } else {
            "equal nonzero side fields".into()
        }));
    }
    let lambda = (f_plus.clone() + f_minus.clone()) / den;
    let one = T::one();
    let exists = lambda >= -one.clone() && lambda <= one;
    let attractive = *f_minus > T::zero() && *f_plus < T::zero();
    Ok(FilippovSliding { lambda, attractive, exists })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSolution<T> {
    pub lambda_alpha: T,
    pub lambda_beta: T,
    pub tangency: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlendOutcome<T> {
    Solutions { solutions: Vec<LambdaSolution<T>> },
    Continuum,
}

impl<T> BlendOutcome<T> {
    pub fn count(&self) -> Option<usize> {
        match self {
            BlendOutcome::Solutions { solutions } => Some(solutions.len()),
            BlendOutcome::Continuum => None,
        }
    }
}

/// Blending solutions in the closed square [−1, 1]².
pub fn blend_codim2_solutions<T: Scalar>(cf: &CornerFields<T>) -> Result<BlendOutcome<T>> {
    let m = multilinear_from_corners(cf);
    let pts = match bilinear_intersections(&m.u, &m.v)? {
        Intersections::Continuum => return Ok(BlendOutcome::Continuum),
        Intersections::Points(p) => p,
    };
    let edge = T::from_f64(1e-12);
    let lim = T::one() + if T::is_exact() { T::zero() } else { edge };
    let clamp = |x: T| {
        if x > T::one() {
            T::one()
        } else if x < -T::one() {
            -T::one()
        } else {
            x
        }
    };
    let mut solutions: Vec<LambdaSolution<T>> = Vec::new();
    for p in pts {
        if p.u.abs() > lim || p.v.abs() > lim {
            continue;
        }
        let (la, lb) = (clamp(p.u), clamp(p.v));
        let (g1, g2) = m.eval(&la, &lb);
        if !g1.near_zero(1e-10) || !g2.near_zero(1e-10) {
            return Err(Error::Construction(format!(
                "blending residual too large: ({}, {})",
                g1.to_f64(),
                g2.to_f64()
            )));
        }
        if solutions.iter().any(|s| s.lambda_alpha == la && s.lambda_beta == lb) {
            continue;
        }
        solutions.push(LambdaSolution { lambda_alpha: la, lambda_beta: lb, tangency: p.tangency });
    }
    Ok(BlendOutcome::Solutions { solutions })
}
