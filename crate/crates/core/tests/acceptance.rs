//! Acceptance harness: one PASS/FAIL line per criterion, sub-checks indented below.
//! Runs without the libtest harness; exits nonzero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use hidden_dynamics::bifurc::{
    a4_classify, fixed_points, hopf_detect, hopf_detect_kappa, jacobian_multilinear, jacobian_pqrs,
    lyapunov_coefficient, lyapunov_coefficient_exact, poly_system, supercritical_multilinear, A4Class,
};
use hidden_dynamics::hidden::{multilinear_from_corners, wall_entry_point, HiddenSystem, MultilinearCoeffs};
use hidden_dynamics::integrate::{
    classify_outcome, classify_saturated, integrate_adaptive, scan_parameter, ClassifyConfig, EventFn,
    IntegratorConfig, Outcome, OutcomeTag,
};
use hidden_dynamics::invariant::verify_invariant_region;
use hidden_dynamics::models::{
    codim3_field, del_buono, del_buono_fixed_point, example1, example2, sec31, sec31_entry, sec31_fixed_point,
    Codim3Params,
};
use hidden_dynamics::psys::{blend_codim2_solutions, BlendOutcome, CornerFields};
use hidden_dynamics::{q, Rational, Scalar, Surd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Criterion {
    checks: Vec<(String, bool)>,
    start: Instant,
}

impl Criterion {
    fn new() -> Self {
        Criterion { checks: vec![], start: Instant::now() }
    }

    fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.checks.push((name.into(), ok));
    }

    fn runtime(&mut self, limit: Duration) {
        let t = self.start.elapsed();
        self.check(format!("runtime {:.2?} < {:?}", t, limit), t < limit);
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn surd(a: (i64, i64), b: (i64, i64), d: i64) -> Surd {
    Surd::new(q(a.0, a.1), q(b.0, b.1), q(d, 1))
}

fn exact_check<T: Scalar + std::fmt::Display>(c: &mut Criterion, label: &str, got: &T, want: &T) {
    c.check(format!("{label}: computed {got}, expected {want}"), got == want);
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::new();
    let fp = fixed_points(&sec31::<f64>()).unwrap().points();
    let z1 = (23.0 - 17f64.sqrt()) / 32.0;
    let z2 = (9.0 - 17f64.sqrt()) / 32.0;
    let zs: Vec<(f64, f64)> = fp.iter().map(|(u, v)| ((1.0 + u) / 2.0, (1.0 + v) / 2.0)).collect();
    c.check(format!("interior fixed points in Z: {zs:.6?}"), !zs.is_empty());
    match zs.iter().find(|z| rel(z.0, z1) < 1e-6) {
        Some(&(gz1, gz2)) => {
            c.check(format!("Z1* = {gz1:.12} vs (23-sqrt17)/32, rel 1e-10"), rel(gz1, z1) < 1e-10);
            c.check(format!("Z2* = {gz2:.12} vs (9-sqrt17)/32, rel 1e-10"), rel(gz2, z2) < 1e-10);
            c.check(
                format!("Z* approx (0.5899, 0.4100): computed ({gz1:.4}, {gz2:.4})"),
                (gz1 - 0.5899).abs() < 5e-5 && (gz2 - 0.4100).abs() < 5e-5,
            );
        }
        None => c.check("fixed point with Z1* = (23-sqrt17)/32", false),
    }

    let (u, v) = sec31_fixed_point();
    let coeffs = sec31::<Rational>().map(|x| Surd::rational(x.clone()));
    let jr = jacobian_multilinear(&coeffs, &(u.clone(), v.clone()));
    let jh = jacobian_pqrs(&HiddenSystem::hill(coeffs.clone(), Surd::rational(q(1, 1))), &(u, v)).unwrap();
    exact_check(&mut c, "tr(J_r)", &jr.trace(), &surd((47, 16), (-11, 16), 17));
    exact_check(&mut c, "det(J_r)", &jr.det(), &surd((0, 1), (5, 16), 17));
    exact_check(&mut c, "tr(J_H)", &jh.trace(), &surd((173, 512), (-53, 512), 17));
    let zero = Surd::rational(q(0, 1));
    c.check("tr(J_r) > 0 > tr(J_H)", jr.trace() > zero && jh.trace() < zero);
    c.check("det(J_r) > 0", jr.det() > zero);
    c.runtime(Duration::from_secs(1));
    c
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::new();
    let cfg = ClassifyConfig::default();
    let entry = sec31_entry::<f64>();
    let ramp = classify_outcome(&HiddenSystem::ramp(sec31(), 1.0), entry, &cfg).unwrap();
    let region = ramp.outcome.exit_region().map(|r| r.label());
    c.check(format!("ramp from (0,-1): {} {:?}", ramp.outcome.tag(), region), region.as_deref() == Some("++"));
    let hill = classify_outcome(&HiddenSystem::hill(sec31(), 1.0), entry, &cfg).unwrap();
    let (fu, fv) = sec31_fixed_point();
    let want = [Scalar::to_f64(&fu), Scalar::to_f64(&fv)];
    let ok = match &hill.outcome {
        Outcome::Equilibrium { point } => point.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-6),
        _ => false,
    };
    c.check(format!("Hill from (0,-1): {} at the fixed point", hill.outcome.tag()), ok);
    c.runtime(Duration::from_secs(5));
    c
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::new();
    for (dn, dd) in [(1, 4), (1, 2), (1, 1)] {
        let delta = dn as f64 / dd as f64;
        let p = del_buono_fixed_point::<f64>();
        let h = hopf_detect(|mu: &f64| Ok(jacobian_multilinear(&del_buono(delta, *mu), &p)), (1.0, 3.0), 1e-13).unwrap();
        c.check(format!("delta={delta}: mu_H = {:.12} within 1e-8 of 2", h.parameter), (h.parameter - 2.0).abs() < 1e-8);
        c.check(format!("delta={delta}: d = {:.12} within 1e-8 of 1/2", h.transversality), (h.transversality - 0.5).abs() < 1e-8);
        let dq = q(dn, dd);
        let sys = poly_system(&HiddenSystem::ramp(del_buono(dq.clone(), q(2, 1)), q(1, 1))).unwrap();
        let a = lyapunov_coefficient_exact(&sys, &del_buono_fixed_point()).unwrap();
        let want = -dq.clone() * dq / q(2, 1);
        exact_check(&mut c, &format!("delta={delta}: a"), &a, &want);
        let sys_f = poly_system(&HiddenSystem::ramp(del_buono(delta, 2.0), 1.0)).unwrap();
        let af = lyapunov_coefficient(&sys_f, &p).unwrap().a;
        c.check(format!("delta={delta}: f64 a = {af:.15e}, rel 1e-9"), rel(af, -delta * delta / 2.0) < 1e-9);
    }
    c
}

fn criterion_4() -> Criterion {
    let mut c = Criterion::new();
    let o = (q(0, 1), q(0, 1));
    let coeffs = example1(q(11, 10));
    let h = hopf_detect_kappa(&coeffs, &o).unwrap();
    exact_check(&mut c, "kappa_H", &h.parameter, &q(1, 1));
    let j = jacobian_multilinear(&coeffs, &o);
    c.check(
        format!("(p,q,r,s) = ({},{},{},{})", j.p, j.q, j.r, j.s),
        (j.p.clone(), j.q.clone(), j.r.clone(), j.s.clone()) == (q(-1, 1), q(1, 1), q(-2, 1), q(1, 1)),
    );
    exact_check(&mut c, "det", &h.det, &q(1, 1));
    for a2 in [q(1, 2), q(1, 1), q(11, 10), q(7, 5), q(71, 50), q(3, 2), q(2, 1)] {
        let rep = supercritical_multilinear(&example1(a2.clone()), &o).unwrap();
        let want = (q(2, 1) - a2.clone() * a2.clone()).signum_i8();
        c.check(
            format!("a2={a2}: sign(pq-form) = {} = sign(2 - a2^2)", rep.pq_form.signum_i8()),
            rep.pq_form.signum_i8() == want && rep.supercritical == (want > 0),
        );
    }
    let a4 = a4_classify(&coeffs, &o).unwrap();
    c.check(
        format!("(a4): r/s = {} < p/q = {} < 0", a4.jacobian.r.clone() / a4.jacobian.s.clone(), a4.jacobian.p.clone() / a4.jacobian.q.clone()),
        a4.class == A4Class::A4 && a4.ratio_condition,
    );
    c.runtime(Duration::from_secs(1));
    c
}

fn criterion_5() -> Criterion {
    let mut c = Criterion::new();
    let cfg = ClassifyConfig::default();
    let entry = (-0.5, -1.0);
    let run = |k: f64| classify_outcome(&HiddenSystem::ramp(example1(1.1), k), entry, &cfg).unwrap();
    let r = run(1.001);
    c.check(format!("kappa=1.001: {}", r.outcome.tag()), r.outcome.tag() == OutcomeTag::LimitCycle);
    let r = run(1.05);
    c.check(
        format!("kappa=1.05: {} with {} re-entries", r.outcome.tag(), r.reentries()),
        r.outcome.tag() == OutcomeTag::LimitCycle && r.reentries() > 0,
    );
    let r = run(1.2);
    let region = r.outcome.exit_region().map(|x| x.label());
    c.check(format!("kappa=1.2: {} {:?}", r.outcome.tag(), region), region.as_deref() == Some("++"));
    let scan = scan_parameter(|k| HiddenSystem::ramp(example1(1.1), k), (1.1, 1.2), 5, entry, &cfg, 1e-3).unwrap();
    let ok = scan.brackets.len() == 1 && {
        let b = &scan.brackets[0];
        b.lo > 1.1 && b.hi < 1.2 && b.width() <= 1e-3 && b.tag_lo == OutcomeTag::LimitCycle && b.tag_hi == OutcomeTag::Exit
    };
    let desc: Vec<String> = scan.brackets.iter().map(|b| format!("({:.5}, {:.5}) {}->{}", b.lo, b.hi, b.tag_lo, b.tag_hi)).collect();
    c.check(format!("kappa* bracket {:?}", desc), ok);
    c.runtime(Duration::from_secs(60));
    c
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::new();
    for a2 in [q(11, 10), q(6, 5), q(13, 10)] {
        let sys = poly_system(&HiddenSystem::hill(example1(a2.clone()), q(1, 1))).unwrap();
        let a = lyapunov_coefficient_exact(&sys, &(q(0, 1), q(0, 1))).unwrap();
        let stated = (a2.clone() * a2.clone() - q(2, 1)) / q(512, 1);
        let ok = rel(Scalar::to_f64(&a), Scalar::to_f64(&stated)) < 1e-9;
        c.check(format!("a2={a2}: a = {a} vs (a2^2-2)/512 = {stated}, rel 1e-9"), ok);
    }
    let cfg = ClassifyConfig::default();
    let entry = (-0.5, -1.0);
    let run = |k: f64| classify_outcome(&HiddenSystem::hill(example1(1.1), k), entry, &cfg).unwrap();
    let r = run(1.66);
    c.check(format!("kappa=1.66: {}", r.outcome.tag()), r.outcome.tag() == OutcomeTag::LimitCycle);
    let r = run(1.68);
    let region = r.outcome.exit_region().map(|x| x.label());
    c.check(format!("kappa=1.68: {} {:?}", r.outcome.tag(), region), region.as_deref() == Some("++"));
    let scan = scan_parameter(|k| HiddenSystem::hill(example1(1.1), k), (1.66, 1.68), 3, entry, &cfg, 1e-3).unwrap();
    let ok = scan.brackets.len() == 1 && {
        let b = &scan.brackets[0];
        b.lo > 1.66 && b.hi < 1.68 && b.width() <= 1e-3
    };
    let desc: Vec<String> = scan.brackets.iter().map(|b| format!("({:.5}, {:.5}) {}->{}", b.lo, b.hi, b.tag_lo, b.tag_hi)).collect();
    c.check(format!("kappa* bracket {:?}", desc), ok);
    c.runtime(Duration::from_secs(120));
    c
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::new();
    let o = (q(0, 1), q(0, 1));
    let a2 = q(8, 5);
    let coeffs = example2(a2.clone());
    let h = hopf_detect_kappa(&coeffs, &o).unwrap();
    exact_check(&mut c, "kappa_H", &h.parameter, &q(1, 1));
    exact_check(&mut c, "det", &h.det, &q(3, 2));
    let rep = supercritical_multilinear(&coeffs, &o).unwrap();
    let margin = q(121, 8) - q(5, 1) * a2.clone() * a2;
    c.check(
        format!("supercritical: pq-form {} > 0, 121/8 - 5 a2^2 = {} > 0", rep.pq_form, margin),
        rep.supercritical && margin > q(0, 1) && rep.forms_agree == Some(true),
    );
    let sys = poly_system(&HiddenSystem::hill(coeffs.clone(), q(1, 1))).unwrap();
    let a = lyapunov_coefficient_exact(&sys, &o).unwrap();
    exact_check(&mut c, "Hill a", &a, &q(59, 2048));
    c.check("Hill verdict subcritical (a > 0)", a > q(0, 1));
    let sysf = poly_system(&HiddenSystem::hill(example2(1.6), 1.0)).unwrap();
    let af = lyapunov_coefficient(&sysf, &(0.0, 0.0)).unwrap().a;
    c.check(format!("Hill a (f64) = {af:.15e}, rel 1e-9"), rel(af, 59.0 / 2048.0) < 1e-9);
    let e = wall_entry_point(&coeffs).unwrap();
    exact_check(&mut c, "entry u0", &e.0, &q(-10, 13));
    let ef = wall_entry_point(&example2(1.6)).unwrap();
    c.check(format!("entry (f64) = ({:.15}, {})", ef.0, ef.1), (ef.0 + 10.0 / 13.0).abs() < 1e-12 && ef.1 == -1.0);
    c
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::new();
    let cfg = ClassifyConfig::default();
    let labels: Vec<String> = [-199.4, -199.8, -200.2, -200.6]
        .iter()
        .map(|w0| {
            let r = classify_saturated(codim3_field(Codim3Params::default()), &[0.8, 0.9, *w0], &cfg).unwrap();
            r.outcome.exit_region().map(|x| x.label()).unwrap_or_else(|| r.outcome.tag().to_string())
        })
        .collect();
    c.check(format!("classes (a)..(d) = {:?}", labels), true);
    c.check("(a) = (c)", labels[0] == labels[2]);
    c.check("(b) = (d)", labels[1] == labels[3]);
    c.check("(a) != (b)", labels[0] != labels[1]);
    c.check("(a),(c): u at threshold, v and w up (0++)", labels[0] == "0++");
    c.check("(b),(d): u up, v down, w up (+-+)", labels[1] == "+-+");
    c.runtime(Duration::from_secs(60));
    c
}

fn criterion_9() -> Criterion {
    let mut c = Criterion::new();
    let rep = verify_invariant_region(&q(11, 10)).unwrap();
    for s in &rep.segments {
        c.check(
            format!("segment {}: cubic roots {:?}, none inside, midpoint value {:.3e}", s.index, s.roots, s.midpoint_value),
            s.pass,
        );
    }
    c.check(format!("v6 = {:.6} within 1e-4 of 0.93432", rep.v6), (rep.v6 - 0.93432).abs() < 1e-4);
    c.check(format!("v6 < 20/21 = {:.5}", rep.top_bound), rep.v6_below_top);

    let chain = rep.chain.clone();
    let (ulo, uhi) = (Scalar::to_f64(&chain.points[0].0), Scalar::to_f64(&chain.points[6].0));
    let height = move |u: f64| chain.height_at(u.clamp(ulo, uhi)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = IntegratorConfig { horizon: 200.0, ..Default::default() };
    let mut crossings = 0;
    for _ in 0..200 {
        let (u0, v0) = loop {
            let u = rng.gen_range(ulo..uhi - 1e-3);
            let v = height(u) - 1e-4;
            if v > -1.0 + 1e-6 {
                break (u, v);
            }
        };
        let h = height.clone();
        let ev = [EventFn::new("chain", move |_, y: &[f64]| y[1] - h(y[0]))];
        let tr = integrate_adaptive(
            |_, y: &[f64], d: &mut [f64]| {
                d[0] = 0.25 * (1.0 - y[0] * y[0]) * (y[0] * y[1] - y[0] + y[1]);
                d[1] = 0.25 * (1.0 - y[1] * y[1]) * (1.1 * y[0] * y[1] - 2.0 * y[0] + y[1]);
            },
            0.0,
            &[u0, v0],
            &cfg,
            &ev,
        )
        .unwrap();
        crossings += tr.events.iter().filter(|e| e.direction > 0).count();
    }
    c.check(format!("200 starts 1e-4 below the chain: {crossings} upward crossings"), crossings == 0);
    c.runtime(Duration::from_secs(30));
    c
}

fn criterion_10() -> Criterion {
    let mut c = Criterion::new();

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut agree, mut counts) = (0, [0usize; 3]);
    for _ in 0..100 {
        let cf = common::random_blend_instance(&mut rng, 1e-3);
        let oracle = common::blend_grid_oracle(&cf, 1e-2);
        let got = match blend_codim2_solutions(&cf).unwrap() {
            BlendOutcome::Solutions { solutions } => solutions,
            BlendOutcome::Continuum => vec![],
        };
        let same = got.len() == oracle.len()
            && oracle.iter().all(|(x, y)| got.iter().any(|s| (s.lambda_alpha - x).abs() < 1e-6 && (s.lambda_beta - y).abs() < 1e-6));
        agree += same as usize;
        if got.len() < 3 {
            counts[got.len()] += 1;
        }
    }
    c.check(format!("blending vs grid oracle: {agree}/100 agree (0/1/2 solutions: {counts:?})"), agree == 100);

    let order = common::fixed_step_order();
    c.check(format!("fixed-step order {order:.3} >= 4"), order >= 4.0);

    let mut worst: f64 = 0.0;
    for (coeffs, kappa) in [(example1(1.1), 1.0), (example2(1.6), 1.0), (example1(1.3), 1.0)] {
        let hs = HiddenSystem::hill(coeffs, kappa);
        let rep = lyapunov_coefficient(&poly_system(&hs).unwrap(), &(0.0, 0.0)).unwrap();
        let (p, qq, w) = (rep.jacobian.p, rep.jacobian.q, rep.omega);
        // (X, Y) -> T (X, Y) -> field -> T^{-1}
        let field = move |x: f64, y: f64| {
            let (u, v) = (qq * x, -p * x - w * y);
            let (fu, fv) = hs.rhs(&u, &v).unwrap();
            (fu / qq, -p * fu / (qq * w) - fv / w)
        };
        let f = |x: f64, y: f64| field(x, y).0;
        let g = |x: f64, y: f64| field(x, y).1;
        let pt = &rep.partials;
        let pairs = [
            (pt.f_xx, common::fd_partial(&f, 2, 0, 1e-4)),
            (pt.f_xy, common::fd_partial(&f, 1, 1, 1e-4)),
            (pt.f_yy, common::fd_partial(&f, 0, 2, 1e-4)),
            (pt.g_xx, common::fd_partial(&g, 2, 0, 1e-4)),
            (pt.g_xy, common::fd_partial(&g, 1, 1, 1e-4)),
            (pt.g_yy, common::fd_partial(&g, 0, 2, 1e-4)),
            (pt.f_xxx, common::fd_partial(&f, 3, 0, 1e-2)),
            (pt.f_xyy, common::fd_partial(&f, 1, 2, 1e-2)),
            (pt.g_xxy, common::fd_partial(&g, 2, 1, 1e-2)),
            (pt.g_yyy, common::fd_partial(&g, 0, 3, 1e-2)),
        ];
        for (exact, fd) in pairs {
            let scale = exact.abs().max(1e-3);
            worst = worst.max((exact - fd).abs() / scale);
        }
    }
    c.check(format!("Lyapunov partials vs finite differences: worst rel {worst:.2e} <= 1e-6"), worst <= 1e-6);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut exact_ok = true;
    for _ in 0..100 {
        let mut r = || q(rng.gen_range(-50..50), rng.gen_range(1..20));
        let cf = CornerFields { alpha: [r(), r(), r(), r()], beta: [r(), r(), r(), r()] };
        let m = multilinear_from_corners(&cf);
        exact_ok &= m.corner_fields() == cf;
        let k = r().abs() + q(1, 7);
        let (u, v) = (r() / q(50, 1), r() / q(50, 1));
        let base = HiddenSystem::ramp(m.clone(), q(1, 1)).rhs(&u, &v).unwrap();
        let scaled = HiddenSystem::ramp(m.clone(), k.clone()).rhs(&u, &v).unwrap();
        exact_ok &= scaled == (base.0.clone(), base.1 * k.clone());
        let back = MultilinearCoeffs::new(
            [m.u.a.clone(), m.u.b.clone(), m.u.c.clone(), m.u.d.clone()],
            [m.v.a.clone(), m.v.b.clone(), m.v.c.clone(), m.v.d.clone()],
        );
        exact_ok &= multilinear_from_corners(&back.corner_fields()) == back;
    }
    c.check("kappa scaling and corner round trips exact on 100 rational instances", exact_ok);
    c
}

fn main() {
    let criteria: [(&str, fn() -> Criterion); 10] = [
        ("1 sqrt17 exact values", criterion_1),
        ("2 sqrt17 dynamics", criterion_2),
        ("3 modified Del Buono Hopf", criterion_3),
        ("4 example 1 exact Hopf data", criterion_4),
        ("5 example 1 ramp scan", criterion_5),
        ("6 example 1 Hill", criterion_6),
        ("7 example 2", criterion_7),
        ("8 codim-3 sensitivity", criterion_8),
        ("9 invariant region", criterion_9),
        ("10 property suites", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let c = f();
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {name}");
        for (check, ok) in &c.checks {
            println!("    [{}] {check}", if *ok { "ok" } else { "FAIL" });
        }
        failed += !c.passed() as usize;
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
