mod common;

use hidden_dynamics::bifurc::{
    jacobian_multilinear, lyapunov_coefficient, lyapunov_with_eigenvector_scale, poly_system, supercritical_multilinear,
    Criticality,
};
use hidden_dynamics::hidden::{multilinear_from_corners, HiddenSystem, MultilinearCoeffs};
use hidden_dynamics::integrate::{integrate_adaptive, EventFn, IntegratorConfig};
use hidden_dynamics::poly::cubic_real_roots;
use hidden_dynamics::psys::{filippov_codim1, regularization_weights, CornerFields};
use hidden_dynamics::switching::{eval_switch, eval_switch_deriv, hill_factor, SwitchingProfile};
use hidden_dynamics::{q, Rational};
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rational> {
    (-60i64..60, 1i64..25).prop_map(|(n, d)| q(n, d))
}

fn rat4() -> impl Strategy<Value = [Rational; 4]> {
    [rat(), rat(), rat(), rat()]
}

fn coeffs_f64() -> impl Strategy<Value = MultilinearCoeffs<f64>> {
    (prop::array::uniform4(-3.0f64..3.0), prop::array::uniform4(-3.0f64..3.0)).prop_map(|(u, v)| MultilinearCoeffs::new(u, v))
}

proptest! {
    #[test]
    fn switches_are_odd_and_saturate(u in -3.0f64..3.0) {
        for p in [SwitchingProfile::ramp(), SwitchingProfile::smooth_cubic()] {
            prop_assert!((eval_switch(&p, &u) + eval_switch(&p, &-u)).abs() < 1e-15);
            if u.abs() >= 1.0 {
                prop_assert_eq!(eval_switch(&p, &u), u.signum());
            }
        }
    }

    #[test]
    fn switch_derivative_matches_difference(u in -0.99f64..0.99) {
        let p = SwitchingProfile::smooth_cubic();
        let h = 1e-6;
        let fd = (eval_switch(&p, &(u + h)) - eval_switch(&p, &(u - h))) / (2.0 * h);
        prop_assert!((fd - eval_switch_deriv(&p, &u)).abs() < 1e-8);
    }

    #[test]
    fn hill_factor_positive_inside(w in -0.999f64..0.999) {
        prop_assert!(hill_factor(&w).unwrap() > 0.0);
    }

    #[test]
    fn corner_round_trip_exact(a in rat4(), b in rat4()) {
        let cf = CornerFields { alpha: a, beta: b };
        prop_assert_eq!(multilinear_from_corners(&cf).corner_fields(), cf);
    }

    #[test]
    fn kappa_scales_v_row_only(a in rat4(), b in rat4(), k in 1i64..40, u in rat(), v in rat()) {
        let m = MultilinearCoeffs::new(a, b);
        let k = q(k, 7);
        let (u, v) = (u / q(60, 1), v / q(60, 1));
        let base = HiddenSystem::ramp(m.clone(), q(1, 1)).rhs(&u, &v).unwrap();
        let scaled = HiddenSystem::ramp(m, k.clone()).rhs(&u, &v).unwrap();
        prop_assert_eq!(scaled, (base.0, base.1 * k));
    }

    #[test]
    fn slope_scaling_keeps_det_sign(j in prop::array::uniform4(-5.0f64..5.0), pu in 0.01f64..4.0, pv in 0.01f64..4.0) {
        let det = j[0] * j[3] - j[1] * j[2];
        let det_pi = (pu * j[0]) * (pv * j[3]) - (pv * j[1]) * (pu * j[2]);
        prop_assert!((det_pi - pu * pv * det).abs() <= 1e-12 * (1.0 + det.abs()) * pu * pv);
    }

    #[test]
    fn regularization_weights_convex(p in prop::collection::vec(-1.0f64..1.0, 1..4)) {
        let w = regularization_weights(&p);
        prop_assert_eq!(w.len(), 1 << p.len());
        prop_assert!(w.iter().all(|x| *x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn filippov_lambda_solves_blend(fp in rat(), fm in rat()) {
        prop_assume!(fp != fm);
        let s = filippov_codim1(&fp, &fm).unwrap();
        let one = q(1, 1);
        prop_assert_eq!((one.clone() + s.lambda.clone()) * fp.clone() + (one - s.lambda) * fm.clone(), q(0, 1));
        prop_assert_eq!(s.attractive, fm > q(0, 1) && fp < q(0, 1));
    }

    #[test]
    fn cubic_roots_are_roots(c in prop::array::uniform4(-10.0f64..10.0)) {
        prop_assume!(c[0].abs() > 1e-2);
        let roots = cubic_real_roots(c[0], c[1], c[2], c[3]);
        prop_assert!(!roots.is_empty());
        let scale = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for r in &roots {
            let val = ((c[0] * r + c[1]) * r + c[2]) * r + c[3];
            let mag = scale * (1.0 + r.abs()).powi(3);
            prop_assert!(val.abs() <= 1e-9 * mag, "root {} residual {}", r, val);
        }
        // every sign change on a fine grid is accounted for
        let f = |x: f64| ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
        let bound = 1.0 + scale / c[0].abs();
        let n = 4000;
        for k in 0..n {
            let (a, b) = (-bound + 2.0 * bound * k as f64 / n as f64, -bound + 2.0 * bound * (k + 1) as f64 / n as f64);
            if f(a) * f(b) < 0.0 {
                prop_assert!(roots.iter().any(|r| *r >= a - 1e-9 && *r <= b + 1e-9), "missing root in ({}, {})", a, b);
            }
        }
    }

    #[test]
    fn pq_rs_identities_and_forms_agree(a1 in 1i64..30, a2 in 1i64..30, p in -20i64..-1, qq in 1i64..20, r in -20i64..-1) {
        // build a bilinear system with Jacobian (p, q, r, s = −p) at the origin
        let m = MultilinearCoeffs::new(
            [q(a1, 10), q(p, 1), q(qq, 1), q(0, 1)],
            [q(a2, 10), q(r, 1), q(-p, 1), q(0, 1)],
        );
        let o = (q(0, 1), q(0, 1));
        let j = jacobian_multilinear(&m, &o);
        prop_assume!(j.det() > q(0, 1));
        let rep = supercritical_multilinear(&m, &o).unwrap();
        prop_assert!(rep.fixed_point_identities);
        prop_assert_eq!(rep.forms_agree, Some(true));
        let exact = hidden_dynamics::bifurc::lyapunov_coefficient_exact(&poly_system(&HiddenSystem::ramp(m, q(1, 1))).unwrap(), &o).unwrap();
        prop_assert_eq!(exact, rep.lyapunov);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn event_states_satisfy_condition(c in 0.05f64..0.45, y0 in 0.5f64..2.0) {
        let cfg = IntegratorConfig { horizon: 20.0, ..Default::default() };
        let ev = [EventFn::new("level", move |_, y: &[f64]| y[0] - c)];
        let tr = integrate_adaptive(|_, y: &[f64], d: &mut [f64]| { d[0] = y[1]; d[1] = -y[0]; }, 0.0, &[y0, 0.0], &cfg, &ev).unwrap();
        prop_assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(!tr.events.is_empty());
        for e in &tr.events {
            prop_assert!((e.state[0] - c).abs() <= 1e-10);
        }
    }

    #[test]
    fn factor_mode_stays_in_square(cf in coeffs_f64(), k in 0.2f64..3.0, u0 in -0.99f64..0.99, v0 in -0.99f64..0.99) {
        use hidden_dynamics::integrate::{classify_outcome, ClassifyConfig};
        let sys = HiddenSystem::hill(cf, k);
        let mut cfg = ClassifyConfig::default();
        cfg.integrator.horizon = 200.0;
        let c = classify_outcome(&sys, (u0, v0), &cfg).unwrap();
        prop_assert!(c.trajectory.states.iter().all(|s| s[0].abs() <= 1.0 && s[1].abs() <= 1.0));
    }

    #[test]
    fn lyapunov_scales_quadratically_with_eigenvector(a2 in 0.5f64..1.9, c in 0.2f64..5.0) {
        let sys = poly_system(&HiddenSystem::ramp(MultilinearCoeffs::new([1.0, -1.0, 1.0, 0.0], [a2, -2.0, 1.0, 0.0]), 1.0)).unwrap();
        let a = lyapunov_coefficient(&sys, &(0.0, 0.0)).unwrap().a;
        let ac = lyapunov_with_eigenvector_scale(&sys, &(0.0, 0.0), &c).unwrap().a;
        prop_assert!((ac - c * c * a).abs() <= 1e-12 * (1.0 + a.abs()) * c * c);
        prop_assert_eq!(
            Criticality::from_coefficient(&a, 1.0, 1e-12),
            Criticality::from_coefficient(&ac, 1.0, 1e-12)
        );
    }
}

#[test]
fn integration_is_deterministic() {
    let sys = HiddenSystem::hill(MultilinearCoeffs::new([1.0, -1.0, 1.0, 0.0], [1.1, -2.0, 1.0, 0.0]), 1.3);
    let run = || {
        integrate_adaptive(
            |_, y: &[f64], d: &mut [f64]| {
                let (a, b) = sys.rhs(&y[0], &y[1]).unwrap();
                d[0] = a;
                d[1] = b;
            },
            0.0,
            &[-0.5, -0.9],
            &IntegratorConfig { horizon: 100.0, ..Default::default() },
            &[],
        )
        .unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn blending_matches_grid_oracle() {
    use hidden_dynamics::psys::{blend_codim2_solutions, BlendOutcome};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..40 {
        let cf = common::random_blend_instance(&mut rng, 1e-3);
        let oracle = common::blend_grid_oracle(&cf, 1e-2);
        let BlendOutcome::Solutions { solutions } = blend_codim2_solutions(&cf).unwrap() else { panic!("continuum") };
        assert_eq!(solutions.len(), oracle.len());
        for (x, y) in oracle {
            assert!(solutions.iter().any(|s| (s.lambda_alpha - x).abs() < 1e-6 && (s.lambda_beta - y).abs() < 1e-6));
        }
    }
}

#[test]
fn hopf_amplitude_follows_square_root_law() {
    // Ramp example 1: amplitude of the stable cycle near κ_H against √(−d δκ / a).
    use hidden_dynamics::integrate::{classify_outcome, ClassifyConfig, Outcome};
    let a2 = 1.1f64;
    let a = (a2 * a2 - 2.0) / 8.0;
    let d = 0.5;
    for dk in [2e-3, 4e-3] {
        let sys = HiddenSystem::ramp(MultilinearCoeffs::new([1.0, -1.0, 1.0, 0.0], [a2, -2.0, 1.0, 0.0]), 1.0 + dk);
        let cfg = ClassifyConfig { section: Some(vec![0.0, 0.0]), ..Default::default() };
        let c = classify_outcome(&sys, (0.01, 0.0), &cfg).unwrap();
        let Outcome::LimitCycle { amplitude, .. } = c.outcome else { panic!("no cycle at dk = {dk}: {:?}", c.outcome.tag()) };
        // (u, v) = (x, x − y) for p = −1, q = ω = 1, so the largest half-extent is √2·r
        let predicted = 2f64.sqrt() * (-d * dk / a).sqrt();
        let rel = (amplitude - predicted).abs() / predicted;
        assert!(rel < 0.25, "dk = {dk}: amplitude {amplitude} vs {predicted}");
    }
}
