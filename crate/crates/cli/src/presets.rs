//! Named experiments. Each preset resolves its defaults into the config (so the
//! echoed config reproduces the run), computes, and attaches annotations.

use hidden_dynamics::bifurc::{
    a4_classify, hopf_detect, hopf_detect_kappa, jacobian_multilinear, jacobian_pqrs,
    lyapunov_coefficient_exact, poly_system, stability_change_analysis, supercritical_multilinear, A4Class,
    StabilityInput,
};
use hidden_dynamics::hidden::{wall_entry_point, HiddenSystem, MultilinearCoeffs};
use hidden_dynamics::integrate::{
    classify_outcome, classify_saturated, integrate_adaptive, scan_parameter, Classification, Outcome as RunOutcome,
    OutcomeTag, ScanReport,
};
use hidden_dynamics::invariant::{verify_invariant_region, SegmentChain};
use hidden_dynamics::models::{
    codim3_field, del_buono, del_buono_fixed_point, example1, example2, hill_full_from_uv, hill_full_rhs,
    hill_full_to_uv, sec31, sec31_fixed_point, Codim3Params,
};
use hidden_dynamics::psys::{blend_codim2_solutions, BlendOutcome, CornerFields};
use hidden_dynamics::scalar::rational_string;
use hidden_dynamics::switching::hill_switch_slope;
use hidden_dynamics::{q, Rational, Scalar, Surd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{decimal_rational, resolve, RunConfig, ScanSection};
use crate::error::{CliError, Result};
use crate::report::{Annotation, Outcome, PresetOutput, TrajectoryTable};
use crate::svg::{LineStyle, PhasePlot, Series};

pub const PRESETS: [&str; 10] = [
    "sec31-stability",
    "delbuono-hopf",
    "codim3-sensitivity",
    "ex1-ramp-scan",
    "ex1-hill-scan",
    "ex2-ramp",
    "ex2-hill",
    "invariant-region",
    "blend-solutions",
    "eps-comparison",
];

pub fn run_preset(name: &str, cfg: &mut RunConfig) -> Result<PresetOutput> {
    match name {
        "sec31-stability" => sec31_stability(cfg),
        "delbuono-hopf" => delbuono_hopf(cfg),
        "codim3-sensitivity" => codim3_sensitivity(cfg),
        "ex1-ramp-scan" => ex1_scan(cfg, false),
        "ex1-hill-scan" => ex1_scan(cfg, true),
        "ex2-ramp" => ex2(cfg, false),
        "ex2-hill" => ex2(cfg, true),
        "invariant-region" => invariant_region(cfg),
        "blend-solutions" => blend_solutions(cfg),
        "eps-comparison" => eps_comparison(cfg),
        other => Err(CliError::usage(format!("unknown preset '{other}'; available: {}", PRESETS.join(", ")))),
    }
}

fn same(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * y.abs().max(1.0)
}

fn build(coeffs: MultilinearCoeffs<f64>, kappa: f64, hill: bool) -> HiddenSystem<f64> {
    if hill {
        HiddenSystem::hill(coeffs, kappa)
    } else {
        HiddenSystem::ramp(coeffs, kappa)
    }
}

fn tag_label(o: &RunOutcome<f64>) -> String {
    match o.exit_region() {
        Some(r) => format!("exit {}", r.label()),
        None => o.tag().to_string(),
    }
}

fn describe(label: String, c: &Classification<f64>) -> Outcome {
    let details = match &c.outcome {
        RunOutcome::Equilibrium { point } => json!({ "point": point }),
        RunOutcome::LimitCycle { period, amplitude, leaves_box, .. } => {
            json!({ "period": period, "amplitude": amplitude, "leaves_box": leaves_box })
        }
        RunOutcome::Exit { region, state } => json!({ "region": region.label(), "state": state }),
        RunOutcome::SlidingReentry { reentries } => json!({ "reentries": reentries }),
        RunOutcome::Divergence { time, state } => json!({ "time": time, "state": state }),
        RunOutcome::Undecided { horizon } => json!({ "horizon": horizon }),
    };
    let mut details = details;
    details["reentries"] = json!(c.reentries());
    details["final_time"] = json!(c.trajectory.last_time());
    Outcome::new(label, tag_label(&c.outcome), details)
}

fn table(name: String, names: &[&str], c: &Classification<f64>) -> TrajectoryTable {
    TrajectoryTable::new(name, names, &c.trajectory.times, &c.trajectory.states)
}

fn bounds(points: impl Iterator<Item = (f64, f64)>) -> ((f64, f64), (f64, f64)) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = |a: f64, b: f64| {
        let p = 0.05 * (b - a).max(1e-6);
        (a - p, b + p)
    };
    (pad(x0, x1), pad(y0, y1))
}

const SQUARE: ((f64, f64), (f64, f64)) = ((-1.1, 1.1), (-1.1, 1.1));

fn sec31_stability(cfg: &mut RunConfig) -> Result<PresetOutput> {
    let kappa = resolve(&mut cfg.system.kappa, 1.0);
    let entry = resolve(&mut cfg.experiment.entry, [0.0, -1.0]);
    let defaults = same(kappa, 1.0) && entry == [0.0, -1.0];
    let mut out = PresetOutput::default();

    let (u, v) = sec31_fixed_point();
    let coeffs = sec31::<Rational>().map(|x| Surd::rational(x.clone()));
    let jr = jacobian_multilinear(&coeffs, &(u.clone(), v.clone()));
    let jh = jacobian_pqrs(&HiddenSystem::hill(coeffs, Surd::rational(q(1, 1))), &(u.clone(), v.clone()))?;
    let zero = Surd::rational(q(0, 1));
    let (uf, vf) = (Scalar::to_f64(&u), Scalar::to_f64(&v));
    let stab = stability_change_analysis(&StabilityInput {
        j: [[Scalar::to_f64(&jr.p), Scalar::to_f64(&jr.q)], [Scalar::to_f64(&jr.r), Scalar::to_f64(&jr.s)]],
        rho: uf,
        sigma: vf,
        slopes: Some((hill_switch_slope(&uf), hill_switch_slope(&vf))),
    })?;
    out.outcomes.push(Outcome::new(
        "fixed point",
        "exact",
        json!({
            "u": u.to_string(), "v": v.to_string(),
            "z1": ((Surd::rational(q(1, 1)) + u.clone()) * Surd::rational(q(1, 2))).to_string(),
            "z2": ((Surd::rational(q(1, 1)) + v.clone()) * Surd::rational(q(1, 2))).to_string(),
            "trace_ramp": jr.trace().to_string(), "det_ramp": jr.det().to_string(),
            "trace_hill": jh.trace().to_string(), "det_hill": jh.det().to_string(),
            "switch_analysis": stab,
        }),
    ));
    out.annotations.push(Annotation::check("ramp trace", "> 0", jr.trace().to_string(), jr.trace() > zero));
    out.annotations.push(Annotation::check("Hill trace", "< 0", jh.trace().to_string(), jh.trace() < zero));
    out.annotations.push(Annotation::check("determinant", "> 0", jr.det().to_string(), jr.det() > zero));
    out.annotations.push(Annotation::check(
        "stability change through the switch slopes",
        "true",
        format!("{:?}", stab.change),
        stab.change == Some(true),
    ));

    let ccfg = cfg.integrator.classify();
    let mut plot = PhasePlot::new("sqrt(17) example: ramp vs Hill", SQUARE.0, SQUARE.1).with_nullclines(&sec31());
    for (k, hill) in [false, true].into_iter().enumerate() {
        let name = if hill { "hill" } else { "ramp" };
        let c = classify_outcome(&build(sec31(), kappa, hill), (entry[0], entry[1]), &ccfg)?;
        let ok = if hill {
            matches!(&c.outcome, RunOutcome::Equilibrium { point } if (point[0] - uf).abs() < 1e-6 && (point[1] - vf).abs() < 1e-6)
        } else {
            tag_label(&c.outcome) == "exit ++"
        };
        let expected = if hill { "equilibrium at the fixed point" } else { "exit ++" };
        out.annotations.push(Annotation::when(defaults, &format!("{name} outcome"), expected, tag_label(&c.outcome), ok));
        out.outcomes.push(describe(name.into(), &c));
        let t = table(name.into(), &["u", "v"], &c);
        plot.series.push(Series::trajectory(name, t.xy(1, 2), k));
        out.trajectories.push(t);
    }
    plot.markers.push(("fixed point".into(), (uf, vf)));
    out.figures.push(("sec31".into(), plot));
    Ok(out)
}

fn delbuono_hopf(cfg: &mut RunConfig) -> Result<PresetOutput> {
    let delta = resolve(&mut cfg.system.delta, 0.5);
    let mu = resolve(&mut cfg.system.mu, 2.02);
    let mut out = PresetOutput::default();
    let p = del_buono_fixed_point::<f64>();
    let h = hopf_detect(|m: &f64| Ok(jacobian_multilinear(&del_buono(delta, *m), &p)), (1.0, 3.0), 1e-13)?;
    let dq = decimal_rational(delta)?;
    let sys = poly_system(&HiddenSystem::ramp(del_buono(dq.clone(), q(2, 1)), q(1, 1)))?;
    let a = lyapunov_coefficient_exact(&sys, &del_buono_fixed_point())?;
    let want = -dq.clone() * dq / q(2, 1);
    out.outcomes.push(Outcome::new(
        "hopf",
        "hopf",
        json!({ "mu_h": h.parameter, "transversality": h.transversality, "omega": h.omega, "lyapunov": rational_string(&a) }),
    ));
    out.annotations.push(Annotation::check("mu_H", "2 to 1e-8", format!("{:.12}", h.parameter), (h.parameter - 2.0).abs() < 1e-8));
    out.annotations.push(Annotation::check("d", "1/2 to 1e-8", format!("{:.12}", h.transversality), (h.transversality - 0.5).abs() < 1e-8));
    out.annotations.push(Annotation::check("Lyapunov coefficient", rational_string(&want), rational_string(&a), a == want));

    let field = del_buono(delta, mu);
    let icfg = cfg.integrator.integrator();
    let icfg = hidden_dynamics::integrate::IntegratorConfig { horizon: icfg.horizon.min(400.0), ..icfg };
    let tr = integrate_adaptive(
        |_, y: &[f64], d: &mut [f64]| {
            let (a, b) = field.eval(&y[0], &y[1]);
            d[0] = a;
            d[1] = b;
        },
        0.0,
        &[p.0 + 0.02, p.1],
        &icfg,
        &[],
    )?;
    let t = TrajectoryTable::new("delbuono", &["z1", "z2"], &tr.times, &tr.states);
    let pts = t.xy(1, 2);
    let (xr, yr) = bounds(pts.iter().copied());
    let mut plot = PhasePlot::new(format!("Del Buono oscillator, delta = {delta}, mu = {mu}"), xr, yr);
    plot.x_label = "Z1".into();
    plot.y_label = "Z2".into();
    plot.unit_box = false;
    plot.series.push(Series::trajectory(format!("mu = {mu}"), pts, 0));
    plot.markers.push(("fixed point".into(), p));
    out.trajectories.push(t);
    out.figures.push(("delbuono".into(), plot));
    Ok(out)
}

fn codim3_sensitivity(cfg: &mut RunConfig) -> Result<PresetOutput> {
    let d = Codim3Params::default();
    let par = Codim3Params {
        mu: resolve(&mut cfg.system.mu, d.mu),
        kappa: resolve(&mut cfg.system.kappa, d.kappa),
        p: resolve(&mut cfg.system.p, d.p),
    };
    let default_states: Vec<[f64; 3]> = [-199.4, -199.8, -200.2, -200.6].iter().map(|w| [0.8, 0.9, *w]).collect();
    let states = resolve(&mut cfg.experiment.initial_states, default_states.clone());
    let defaults = par == d && states == default_states;
    let ccfg = cfg.integrator.classify();
    let mut out = PresetOutput::default();
    let mut labels = vec![];
    let mut series = vec![];
    for (k, s) in states.iter().enumerate() {
        let c = classify_saturated(codim3_field(par.clone()), s, &ccfg)?;
        let label = c.outcome.exit_region().map(|r| r.label()).unwrap_or_else(|| c.outcome.tag().to_string());
        let name = format!("{}", (b'a' + k as u8) as char);
        out.outcomes.push(describe(format!("({name}) w0 = {}", s[2]), &c));
        let t = table(format!("codim3_{name}"), &["u", "v", "w"], &c);
        series.push(Series::trajectory(format!("({name}) {label}"), t.xy(1, 2), k));
        out.trajectories.push(t);
        labels.push(label);
    }
    if labels.len() == 4 {
        let l = &labels;
        out.annotations.push(Annotation::when(defaults, "(a) and (c) agree", "equal", format!("{} / {}", l[0], l[2]), l[0] == l[2]));
        out.annotations.push(Annotation::when(defaults, "(b) and (d) agree", "equal", format!("{} / {}", l[1], l[3]), l[1] == l[3]));
        out.annotations.push(Annotation::when(defaults, "(a) and (b) differ", "different", format!("{} / {}", l[0], l[1]), l[0] != l[1]));
        out.annotations.push(Annotation::when(defaults, "(a) class", "0++", l[0].clone(), l[0] == "0++"));
        out.annotations.push(Annotation::when(defaults, "(b) class", "+-+", l[1].clone(), l[1] == "+-+"));
    }
    let (xr, yr) = bounds(series.iter().flat_map(|s| s.points.iter().copied()));
    let mut plot = PhasePlot::new("three switches: sensitivity to w(0)", xr, yr);
    plot.series = series;
    out.figures.push(("codim3".into(), plot));
    Ok(out)
}

fn scan_annotation(out: &mut PresetOutput, scan: &ScanReport<f64>, s: &ScanSection, applies: bool) {
    let desc: Vec<String> = scan.brackets.iter().map(|b| format!("({:.6}, {:.6}) {}->{}", b.lo, b.hi, b.tag_lo, b.tag_hi)).collect();
    let ok = scan.brackets.len() == 1
        && scan.brackets[0].lo > s.lo
        && scan.brackets[0].hi < s.hi
        && scan.brackets[0].width() <= s.tol
        && scan.brackets[0].tag_lo == OutcomeTag::LimitCycle
        && scan.brackets[0].tag_hi == OutcomeTag::Exit;
    out.annotations.push(Annotation::when(
        applies,
        "kappa* bracket",
        format!("one limit_cycle->exit bracket inside ({}, {}) of width <= {}", s.lo, s.hi, s.tol),
        desc.join("; "),
        ok,
    ));
    out.outcomes.push(Outcome::new(
        "scan",
        if scan.brackets.is_empty() { "no_transition" } else { "bracketed" },
        json!({ "brackets": scan.brackets, "points": scan.points.iter().map(|p| json!({"kappa": p.parameter, "tag": tag_label(&p.outcome)})).collect::<Vec<_>>() }),
    ));
}

fn ex1_scan(cfg: &mut RunConfig, hill: bool) -> Result<PresetOutput> {
    let a2 = resolve(&mut cfg.system.a2, 1.1);
    let entry = resolve(&mut cfg.experiment.entry, [-0.5, -1.0]);
    let (grid_default, scan_default) = if hill {
        (vec![1.01, 1.25, 1.66, 1.68], ScanSection { lo: 1.66, hi: 1.68, points: 3, tol: 1e-3 })
    } else {
        (vec![0.9, 1.001, 1.05, 1.1, 1.2], ScanSection { lo: 1.1, hi: 1.2, points: 5, tol: 1e-3 })
    };
    let (grid, scan) = match cfg.system.kappa {
        Some(k) => (vec![k], None),
        None => (
            resolve(&mut cfg.experiment.kappa_grid, grid_default.clone()),
            Some(resolve(&mut cfg.experiment.scan, scan_default.clone())),
        ),
    };
    let base = same(a2, 1.1) && entry == [-0.5, -1.0];
    let mut out = PresetOutput::default();

    let aq = decimal_rational(a2)?;
    let o = (q(0, 1), q(0, 1));
    let coeffs = example1(aq.clone());
    let hopf = hopf_detect_kappa(&coeffs, &o)?;
    let sup = supercritical_multilinear(&coeffs, &o)?;
    let a4 = a4_classify(&coeffs, &o)?;
    let sq = aq.clone() * aq.clone();
    out.annotations.push(Annotation::check("kappa_H", "1", rational_string(&hopf.parameter), hopf.parameter == q(1, 1)));
    out.annotations.push(Annotation::check("det at kappa_H", "1", rational_string(&hopf.det), hopf.det == q(1, 1)));
    out.annotations.push(Annotation::check("(a4) class", "a4", format!("{:?}", a4.class), a4.class == A4Class::A4));
    let mut exact = json!({
        "kappa_h": rational_string(&hopf.parameter),
        "jacobian": [rational_string(&hopf.jacobian.p), rational_string(&hopf.jacobian.q), rational_string(&hopf.jacobian.r), rational_string(&hopf.jacobian.s)],
        "pq_form": rational_string(&sup.pq_form),
        "ramp_lyapunov": rational_string(&sup.lyapunov),
        "a4": a4.class,
    });
    if hill {
        let sys = poly_system(&HiddenSystem::hill(coeffs.clone(), q(1, 1)))?;
        let a = lyapunov_coefficient_exact(&sys, &o)?;
        let want = (sq.clone() - q(3, 1)) / q(512, 1);
        exact["hill_lyapunov"] = json!(rational_string(&a));
        out.annotations.push(Annotation::check("Hill Lyapunov coefficient", "(a2^2 - 3)/512", rational_string(&a), a == want));
    } else {
        let want = (sq.clone() - q(2, 1)) / q(8, 1);
        out.annotations.push(Annotation::check("ramp Lyapunov coefficient", "(a2^2 - 2)/8", rational_string(&sup.lyapunov), sup.lyapunov == want));
        out.annotations.push(Annotation::check(
            "supercritical iff a2^2 < 2",
            format!("{}", sq < q(2, 1)),
            format!("{}", sup.supercritical),
            sup.supercritical == (sq < q(2, 1)),
        ));
    }
    out.outcomes.push(Outcome::new("hopf", "exact", exact));

    let ccfg = cfg.integrator.classify();
    let coeffs_f = example1(a2);
    let mut plot = PhasePlot::new(format!("example 1, {} switch, a2 = {a2}", if hill { "Hill" } else { "ramp" }), SQUARE.0, SQUARE.1)
        .with_nullclines(&coeffs_f);
    for (k, kappa) in grid.iter().enumerate() {
        let c = classify_outcome(&build(coeffs_f.clone(), *kappa, hill), (entry[0], entry[1]), &ccfg)?;
        let tag = tag_label(&c.outcome);
        let expect = if hill {
            match kappa {
                x if same(*x, 1.66) => Some(("limit_cycle", tag == "limit_cycle")),
                x if same(*x, 1.68) => Some(("exit ++", tag == "exit ++")),
                _ => None,
            }
        } else {
            match kappa {
                x if same(*x, 1.001) => Some(("limit_cycle", tag == "limit_cycle")),
                x if same(*x, 1.05) => Some(("limit_cycle with a re-entry", tag == "limit_cycle" && c.reentries() > 0)),
                x if same(*x, 1.2) => Some(("exit ++", tag == "exit ++")),
                _ => None,
            }
        };
        if let Some((e, ok)) = expect {
            out.annotations.push(Annotation::when(base, &format!("kappa = {kappa}"), e, format!("{tag}, {} re-entries", c.reentries()), ok));
        }
        out.outcomes.push(describe(format!("kappa = {kappa}"), &c));
        let t = table(format!("kappa_{kappa}"), &["u", "v"], &c);
        plot.series.push(Series::trajectory(format!("kappa = {kappa}: {tag}"), t.xy(1, 2), k));
        out.trajectories.push(t);
    }
    out.figures.push((if hill { "ex1_hill" } else { "ex1_ramp" }.into(), plot));

    if let Some(s) = scan {
        if !(s.hi > s.lo) || s.points < 2 || !(s.tol > 0.0) {
            return Err(CliError::usage("experiment.scan needs lo < hi, points >= 2 and tol > 0"));
        }
        let r = scan_parameter(|k| build(coeffs_f.clone(), k, hill), (s.lo, s.hi), s.points, (entry[0], entry[1]), &ccfg, s.tol)?;
        scan_annotation(&mut out, &r, &s, base && s == scan_default);
    }
    Ok(out)
}

fn ex2(cfg: &mut RunConfig, hill: bool) -> Result<PresetOutput> {
    let a2 = resolve(&mut cfg.system.a2, 1.6);
    let grid = match cfg.system.kappa {
        Some(k) => vec![k],
        None => resolve(&mut cfg.experiment.kappa_grid, if hill { vec![0.99, 1.01] } else { vec![1.001] }),
    };
    let aq = decimal_rational(a2)?;
    let o = (q(0, 1), q(0, 1));
    let coeffs = example2(aq.clone());
    let mut out = PresetOutput::default();

    let entry = wall_entry_point(&coeffs)?;
    out.annotations.push(Annotation::check("wall entry u0", "-10/13", rational_string(&entry.0), entry.0 == q(-10, 13)));
    let hopf = hopf_detect_kappa(&coeffs, &o)?;
    out.annotations.push(Annotation::check("kappa_H", "1", rational_string(&hopf.parameter), hopf.parameter == q(1, 1)));
    out.annotations.push(Annotation::check("det at kappa_H", "3/2", rational_string(&hopf.det), hopf.det == q(3, 2)));
    let mut exact = json!({ "entry": [rational_string(&entry.0), rational_string(&entry.1)], "kappa_h": rational_string(&hopf.parameter) });
    if hill {
        let sys = poly_system(&HiddenSystem::hill(coeffs.clone(), q(1, 1)))?;
        let a = lyapunov_coefficient_exact(&sys, &o)?;
        exact["hill_lyapunov"] = json!(rational_string(&a));
        let applies = aq == q(8, 5);
        out.annotations.push(Annotation::when(applies, "Hill Lyapunov coefficient", "59/2048", rational_string(&a), a == q(59, 2048)));
        out.annotations.push(Annotation::when(applies, "Hill Hopf subcritical", "a > 0", rational_string(&a), a > q(0, 1)));
    } else {
        let sup = supercritical_multilinear(&coeffs, &o)?;
        let margin = q(121, 8) - q(5, 1) * aq.clone() * aq.clone();
        exact["pq_form"] = json!(rational_string(&sup.pq_form));
        exact["margin"] = json!(rational_string(&margin));
        out.annotations.push(Annotation::check(
            "supercritical iff 121/8 - 5 a2^2 > 0",
            format!("{}", margin > q(0, 1)),
            format!("{}", sup.supercritical),
            sup.supercritical == (margin > q(0, 1)),
        ));
    }
    out.outcomes.push(Outcome::new("hopf", "exact", exact));

    let ccfg = cfg.integrator.classify();
    let coeffs_f = example2(a2);
    let start = (Scalar::to_f64(&entry.0), -1.0);
    let mut plot = PhasePlot::new(format!("example 2, {} switch, a2 = {a2}", if hill { "Hill" } else { "ramp" }), SQUARE.0, SQUARE.1)
        .with_nullclines(&coeffs_f);
    for (k, kappa) in grid.iter().enumerate() {
        let c = classify_outcome(&build(coeffs_f.clone(), *kappa, hill), start, &ccfg)?;
        let tag = tag_label(&c.outcome);
        if !hill && same(*kappa, 1.001) {
            out.annotations.push(Annotation::when(same(a2, 1.6), "kappa = 1.001", "limit_cycle", tag.clone(), tag == "limit_cycle"));
        }
        out.outcomes.push(describe(format!("kappa = {kappa}"), &c));
        let t = table(format!("kappa_{kappa}"), &["u", "v"], &c);
        plot.series.push(Series::trajectory(format!("kappa = {kappa}: {tag}"), t.xy(1, 2), k));
        out.trajectories.push(t);
    }
    out.figures.push((if hill { "ex2_hill" } else { "ex2_ramp" }.into(), plot));
    Ok(out)
}

/// Hill-factor field of example 1 in tanh coordinates, u = tanh x.
fn ex1_hill_tanh(a2: f64, kappa: f64) -> impl Fn(f64, &[f64], &mut [f64]) {
    move |_, x, d| {
        let (u, v) = (x[0].tanh(), x[1].tanh());
        d[0] = (u * v - u + v) / 4.0;
        d[1] = kappa * (a2 * u * v - 2.0 * u + v) / 4.0;
    }
}

fn chain_series(chain: &SegmentChain<Rational>) -> Vec<(f64, f64)> {
    chain.points.iter().map(|(u, v)| (Scalar::to_f64(u), Scalar::to_f64(v))).collect()
}

fn invariant_region(cfg: &mut RunConfig) -> Result<PresetOutput> {
    let a2 = resolve(&mut cfg.system.a2, 1.1);
    let seed = resolve(&mut cfg.experiment.seed, 9);
    let samples = resolve(&mut cfg.experiment.samples, 200);
    let applies = same(a2, 1.1);
    let mut out = PresetOutput::default();
    let rep = match verify_invariant_region(&decimal_rational(a2)?) {
        Ok(r) => r,
        Err(hidden_dynamics::Error::Construction(m)) => {
            out.outcomes.push(Outcome::new("chain", "construction_failed", json!({ "reason": m })));
            out.annotations.push(Annotation::when(applies, "chain construction", "succeeds", m, false));
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    out.outcomes.push(Outcome::new(
        "chain",
        if rep.pass { "verified" } else { "not_verified" },
        json!({
            "points": rep.chain.points.iter().map(|(u, v)| [rational_string(u), rational_string(v)]).collect::<Vec<_>>(),
            "slopes": rep.chain.slopes.iter().map(rational_string).collect::<Vec<_>>(),
            "segments": rep.segments, "v6": rep.v6, "top_bound": rep.top_bound,
            "left_wall_rightward": rep.left_wall_rightward,
        }),
    ));
    let passed = rep.segments.iter().filter(|s| s.pass).count();
    out.annotations.push(Annotation::when(applies, "segments verified", "6 of 6", format!("{passed} of 6"), passed == 6));
    out.annotations.push(Annotation::when(applies, "v6", "0.93432 to 1e-4", format!("{:.6}", rep.v6), (rep.v6 - 0.93432).abs() < 1e-4));
    out.annotations.push(Annotation::when(applies, "v6 below 2/(a2+1)", format!("< {:.5}", rep.top_bound), format!("{:.6}", rep.v6), rep.v6_below_top));

    let chain = rep.chain.clone();
    let pts = chain_series(&chain);
    let (ulo, uhi) = (pts[0].0, pts[6].0);
    let height = |u: f64| chain.height_at(u.clamp(ulo, uhi)).unwrap_or(1.0);
    let field = ex1_hill_tanh(a2, 1.0);
    let icfg = cfg.integrator.integrator();
    let short = hidden_dynamics::integrate::IntegratorConfig { horizon: icfg.horizon.min(200.0), ..icfg.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut crossings = 0usize;
    let mut plot = PhasePlot::new(format!("invariant region, a2 = {a2}"), SQUARE.0, SQUARE.1).with_nullclines(&example1(a2));
    plot.series.push(Series { label: "chain".into(), points: pts.clone(), style: LineStyle::Dashed, color: None });
    plot.series.push(Series { label: "left edge".into(), points: vec![(-0.5, -1.0), (-0.5, rep.top_bound)], style: LineStyle::Dashed, color: None });
    for k in 0..samples {
        let (u0, v0) = loop {
            let u = rng.gen_range(ulo..uhi - 1e-3);
            let v = height(u) - 1e-4;
            if v > -1.0 + 1e-6 {
                break (u, v);
            }
        };
        let ev = [hidden_dynamics::integrate::EventFn::new("chain", |_, x: &[f64]| x[1].tanh() - height(x[0].tanh()))];
        let tr = integrate_adaptive(&field, 0.0, &[u0.atanh(), v0.atanh()], &short, &ev)?;
        crossings += tr.events.iter().filter(|e| e.direction > 0).count();
        if k < 5 {
            let states: Vec<Vec<f64>> = tr.states.iter().map(|s| vec![s[0].tanh(), s[1].tanh()]).collect();
            let t = TrajectoryTable::new(format!("start_{k}"), &["u", "v"], &tr.times, &states);
            plot.series.push(Series::trajectory(format!("start {k}"), t.xy(1, 2), k + 1));
            out.trajectories.push(t);
        }
    }
    out.annotations.push(Annotation::when(applies, "starts below the chain", "0 upward crossings", format!("{crossings} in {samples} runs"), crossings == 0));

    let tr = integrate_adaptive(&field, 0.0, &[(-0.5f64).atanh(), (-1.0f64 + 1e-6).atanh()], &icfg, &[])?;
    let states: Vec<Vec<f64>> = tr.states.iter().map(|s| vec![s[0].tanh(), s[1].tanh()]).collect();
    // the start lies on the left edge 1e-6 above the chain's first point
    let worst = states.iter().map(|s| s[1] - height(s[0])).fold(f64::MIN, f64::max);
    let inside = states.iter().all(|s| s[0] >= -0.5 - 1e-9) && worst <= 1e-5;
    out.annotations.push(Annotation::when(
        applies,
        "entry trajectory stays in the region",
        format!("up to t = {}", icfg.horizon),
        format!("t = {:.1}, max height above chain {worst:.2e}", tr.last_time()),
        inside && tr.last_time() >= icfg.horizon,
    ));
    let t = TrajectoryTable::new("entry", &["u", "v"], &tr.times, &states);
    plot.series.push(Series::trajectory("entry", t.xy(1, 2), 0));
    out.trajectories.push(t);
    out.figures.push(("invariant".into(), plot));
    Ok(out)
}

fn blend_solutions(cfg: &mut RunConfig) -> Result<PresetOutput> {
    let seed = resolve(&mut cfg.experiment.seed, 10);
    let samples = resolve(&mut cfg.experiment.samples, 100);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = PresetOutput::default();
    let mut counts = [0usize; 3];
    let mut continua = 0;
    let mut worst: f64 = 0.0;
    let mut plot = PhasePlot::new("blending solutions", SQUARE.0, SQUARE.1);
    plot.x_label = "lambda_alpha".into();
    plot.y_label = "lambda_beta".into();
    for k in 0..samples {
        let mut r = || rng.gen_range(-2.0..2.0);
        let cf = CornerFields { alpha: [r(), r(), r(), r()], beta: [r(), r(), r(), r()] };
        let m = hidden_dynamics::hidden::multilinear_from_corners(&cf);
        match blend_codim2_solutions(&cf)? {
            BlendOutcome::Continuum => continua += 1,
            BlendOutcome::Solutions { solutions } => {
                counts[solutions.len().min(2)] += 1;
                for s in &solutions {
                    let (f, g) = m.eval(&s.lambda_alpha, &s.lambda_beta);
                    worst = worst.max(f.abs()).max(g.abs());
                    plot.markers.push((format!("instance {k}"), (s.lambda_alpha, s.lambda_beta)));
                }
            }
        }
    }
    out.outcomes.push(Outcome::new(
        "instances",
        "solved",
        json!({ "samples": samples, "no_solution": counts[0], "one_solution": counts[1], "two_solutions": counts[2], "continuum": continua, "max_residual": worst }),
    ));
    out.annotations.push(Annotation::check("blending residuals", "<= 1e-10", format!("{worst:.2e}"), worst <= 1e-10));
    out.figures.push(("blend".into(), plot));
    Ok(out)
}

fn eps_comparison(cfg: &mut RunConfig) -> Result<PresetOutput> {
    let a2 = resolve(&mut cfg.system.a2, 1.1);
    let kappa = resolve(&mut cfg.system.kappa, 1.25);
    let eps = resolve(&mut cfg.switching.eps, 1e-2);
    let entry = resolve(&mut cfg.experiment.entry, [-0.5, -0.99]);
    let applies = same(a2, 1.1) && same(kappa, 1.25) && eps <= 1e-2 && entry == [-0.5, -0.99];
    let mut out = PresetOutput::default();
    let ccfg = cfg.integrator.classify();
    let hidden = classify_outcome(&HiddenSystem::hill(example1(a2), kappa), (entry[0], entry[1]), &ccfg)?;
    out.outcomes.push(describe("hidden (eps = 0)".into(), &hidden));

    let f = hill_full_rhs(example1(a2), kappa, eps);
    let icfg = cfg.integrator.integrator();
    let icfg = hidden_dynamics::integrate::IntegratorConfig { horizon: icfg.horizon.min(3000.0), ..icfg };
    if !(entry[0].abs() < 1.0 && entry[1].abs() < 1.0) {
        return Err(CliError::usage("eps-comparison needs an entry inside the open square"));
    }
    let tr = integrate_adaptive(|_, s: &[f64], d: &mut [f64]| d.copy_from_slice(&f(s)), 0.0, &hill_full_from_uv(entry[0], entry[1]), &icfg, &[])?;
    let states: Vec<Vec<f64>> = tr.states.iter().map(|s| {
        let (u, v) = hill_full_to_uv(s);
        vec![u, v]
    }).collect();
    let tail = &states[states.len() / 2..];
    let half = |k: usize| {
        let (lo, hi) = tail.iter().fold((f64::MAX, f64::MIN), |(l, h), s| (l.min(s[k]), h.max(s[k])));
        (hi - lo) / 2.0
    };
    let full_amp = half(0).max(half(1));
    out.outcomes.push(Outcome::new(format!("full system (eps = {eps})"), "integrated", json!({ "late_amplitude": full_amp, "final_time": tr.last_time() })));
    match hidden.outcome {
        RunOutcome::LimitCycle { amplitude, .. } => {
            let rel = (full_amp - amplitude).abs() / amplitude;
            out.annotations.push(Annotation::when(applies, "amplitude agreement", "within 10%", format!("{full_amp:.4} vs {amplitude:.4} ({:.1}%)", 100.0 * rel), rel < 0.1));
        }
        ref other => out.annotations.push(Annotation::when(applies, "hidden outcome", "limit_cycle", tag_label(other), false)),
    }
    let ht = table("hidden".into(), &["u", "v"], &hidden);
    let ft = TrajectoryTable::new("full", &["u", "v"], &tr.times, &states);
    let mut plot = PhasePlot::new(format!("eps = {eps} against eps = 0, kappa = {kappa}"), SQUARE.0, SQUARE.1).with_nullclines(&example1(a2));
    plot.series.push(Series::trajectory("eps = 0 (hidden)", ht.xy(1, 2), 0));
    plot.series.push(Series::trajectory(format!("eps = {eps}"), ft.xy(1, 2), 1));
    out.trajectories.push(ht);
    out.trajectories.push(ft);
    out.figures.push(("eps".into(), plot));
    Ok(out)
}
