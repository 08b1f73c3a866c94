use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Jacobian of F(ρ, σ) = (f, g) in the switch outputs, at a fixed point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityInput<T> {
    /// [[∂ρf, ∂σf], [∂ρg, ∂σg]].
    pub j: [[T; 2]; 2],
    pub rho: T,
    pub sigma: T,
    /// (π'_u, π'_v) at the point, when a concrete switch is given.
    pub slopes: Option<(T, T)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// ∂ρf/∂σg < −1, needs |ρ| > |σ|.
    RatioBelowMinusOne,
    /// −1 < ∂ρf/∂σg < 0, needs |ρ| < |σ|.
    RatioAboveMinusOne,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport<T> {
    pub trace_ramp: T,
    pub det: T,
    pub trace_pi: Option<T>,
    /// Ramp and π traces have opposite signs.
    pub change: Option<bool>,
    /// ∂ρf/∂σg.
    pub ratio: Option<T>,
    /// Open ratio interval where the slopes produce a change; `None` when it is empty.
    pub interval: Option<(T, T)>,
    /// Whether some π in S can flip stability relative to the ramp.
    pub achievable: bool,
    pub branch: Option<Branch>,
}

/// Compares the stability of a fixed point under the ramp with that under a switch π.
///
/// Scaling columns by the slopes keeps the sign of det, so only the trace can change.
pub fn stability_change_analysis<T: Scalar>(input: &StabilityInput<T>) -> Result<StabilityReport<T>> {
    let [[fr, fs], [gr, gs]] = input.j.clone();
    let trace_ramp = fr.clone() + gs.clone();
    let det = fr.clone() * gs.clone() - fs * gr;
    let zero = T::zero();
    let ratio = (!gs.is_zero()).then(|| fr.clone() / gs.clone());

    let (trace_pi, change, interval) = match &input.slopes {
        Some((pu, pv)) => {
            if *pu <= zero || *pv <= zero {
                return Err(Error::invalid("switch slopes must be positive"));
            }
            let tp = pu.clone() * fr.clone() + pv.clone() * gs.clone();
            let change = tp.signum_i8() * trace_ramp.signum_i8() < 0;
            let k = pv.clone() / pu.clone();
            let m1 = -T::one();
            let mk = -k;
            let interval = match mk.partial_cmp(&m1) {
                Some(std::cmp::Ordering::Less) => Some((mk, m1)),
                Some(std::cmp::Ordering::Greater) => Some((m1, mk)),
                _ => None,
            };
            (Some(tp), Some(change), interval)
        }
        None => (None, None, None),
    };

    let branch = match &ratio {
        Some(x) if *x < -T::one() => Some(Branch::RatioBelowMinusOne),
        Some(x) if *x > -T::one() && *x < zero => Some(Branch::RatioAboveMinusOne),
        _ => None,
    };
    let (ra, sa) = (input.rho.abs(), input.sigma.abs());
    let achievable = det > zero
        && match branch {
            Some(Branch::RatioBelowMinusOne) => ra > sa,
            Some(Branch::RatioAboveMinusOne) => ra < sa,
            None => false,
        };
    Ok(StabilityReport { trace_ramp, det, trace_pi, change, ratio, interval, achievable, branch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    #[test]
    fn ratio_minus_one_never_changes() {
        let inp = StabilityInput {
            j: [[q(-1, 1), q(1, 1)], [q(-2, 1), q(1, 1)]],
            rho: q(1, 2),
            sigma: q(1, 4),
            slopes: Some((q(1, 3), q(1, 2))),
        };
        let r = stability_change_analysis(&inp).unwrap();
        assert_eq!(r.ratio, Some(q(-1, 1)));
        assert!(!r.achievable);
        assert_eq!(r.change, Some(false));
    }

    #[test]
    fn equal_slopes_give_empty_interval() {
        let inp = StabilityInput {
            j: [[q(-3, 1), q(1, 1)], [q(-5, 1), q(1, 1)]],
            rho: q(1, 2),
            sigma: q(1, 4),
            slopes: Some((q(1, 2), q(1, 2))),
        };
        assert_eq!(stability_change_analysis(&inp).unwrap().interval, None);
    }
}
