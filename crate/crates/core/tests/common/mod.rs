//! Independent oracles shared by the acceptance harness and the property tests.
#![allow(dead_code)]

use hidden_dynamics::integrate::{integrate_adaptive, IntegratorConfig};
use hidden_dynamics::psys::CornerFields;
use rand::Rng;

/// Coefficients (a, b, c, d) of A xy + B x + C y + D from corners ++, +−, −+, −−,
/// written out directly rather than through the library.
fn bilinear(c: &[f64; 4]) -> [f64; 4] {
    let [pp, pm, mp, mm] = *c;
    [(pp - pm - mp + mm) / 4.0, (pp + pm - mp - mm) / 4.0, (pp - pm + mp - mm) / 4.0, (pp + pm + mp + mm) / 4.0]
}

fn eval(k: &[f64; 4], x: f64, y: f64) -> f64 {
    k[0] * x * y + k[1] * x + k[2] * y + k[3]
}

/// Common zeros of the two blending residuals in [−1, 1]², found by scanning a
/// grid of cells with spacing `h`, keeping cells where both residuals change
/// sign over the corners and confirming each candidate by Newton iteration.
pub fn blend_grid_oracle(cf: &CornerFields<f64>, h: f64) -> Vec<(f64, f64)> {
    let (ka, kb) = (bilinear(&cf.alpha), bilinear(&cf.beta));
    let n = (2.0 / h).round() as usize;
    let at = |i: usize| -1.0 + 2.0 * i as f64 / n as f64;
    let mut found: Vec<(f64, f64)> = vec![];
    for i in 0..n {
        for j in 0..n {
            let (x0, x1, y0, y1) = (at(i), at(i + 1), at(j), at(j + 1));
            let brackets = |k: &[f64; 4]| {
                let v = [eval(k, x0, y0), eval(k, x1, y0), eval(k, x0, y1), eval(k, x1, y1)];
                let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            if !(brackets(&ka) && brackets(&kb)) {
                continue;
            }
            let (mut x, mut y) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            for _ in 0..60 {
                let (f, g) = (eval(&ka, x, y), eval(&kb, x, y));
                let (fx, fy) = (ka[0] * y + ka[1], ka[0] * x + ka[2]);
                let (gx, gy) = (kb[0] * y + kb[1], kb[0] * x + kb[2]);
                let det = fx * gy - fy * gx;
                if det.abs() < 1e-300 {
                    break;
                }
                x -= (f * gy - fy * g) / det;
                y -= (fx * g - f * gx) / det;
            }
            let inside_cell = x >= x0 - 2.0 * h && x <= x1 + 2.0 * h && y >= y0 - 2.0 * h && y <= y1 + 2.0 * h;
            let ok = eval(&ka, x, y).abs() < 1e-11 && eval(&kb, x, y).abs() < 1e-11;
            let in_square = x.abs() <= 1.0 + 1e-9 && y.abs() <= 1.0 + 1e-9;
            if inside_cell && ok && in_square && !found.iter().any(|p| (p.0 - x).abs() < 1e-7 && (p.1 - y).abs() < 1e-7) {
                found.push((x, y));
            }
        }
    }
    found
}

/// Random corner data with every common zero at least `margin` from the square's
/// edges and the two residual curves not tangent, so the oracle is unambiguous.
pub fn random_blend_instance<R: Rng>(rng: &mut R, margin: f64) -> CornerFields<f64> {
    loop {
        let mut draw = || -> [f64; 4] { std::array::from_fn(|_| rng.gen_range(-3.0..3.0)) };
        let cf = CornerFields { alpha: draw(), beta: draw() };
        let roots = blend_grid_oracle_all(&cf);
        let clear = roots.iter().all(|(x, y)| {
            let d = (1.0 - x.abs()).abs().min((1.0 - y.abs()).abs());
            d > margin
        });
        let (ka, kb) = (bilinear(&cf.alpha), bilinear(&cf.beta));
        let transversal = roots.iter().all(|(x, y)| {
            let j = (ka[0] * y + ka[1]) * (kb[0] * x + kb[2]) - (ka[0] * x + ka[2]) * (kb[0] * y + kb[1]);
            j.abs() > 1e-3
        });
        if clear && transversal {
            return cf;
        }
    }
}

/// All real common zeros (anywhere in the plane) by elimination, used only to
/// screen random instances for edge cases.
fn blend_grid_oracle_all(cf: &CornerFields<f64>) -> Vec<(f64, f64)> {
    let (ka, kb) = (bilinear(&cf.alpha), bilinear(&cf.beta));
    // From the first equation y = −(B x + D)/(A x + C); substitute into the second.
    let (a1, b1, c1, d1) = (ka[0], ka[1], ka[2], ka[3]);
    let (a2, b2, c2, d2) = (kb[0], kb[1], kb[2], kb[3]);
    let qa = b1 * a2 - b2 * a1;
    let qb = b1 * c2 + d1 * a2 - b2 * c1 - d2 * a1;
    let qc = d1 * c2 - d2 * c1;
    let mut xs = vec![];
    if qa.abs() > 1e-14 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            xs.push((-qb + disc.sqrt()) / (2.0 * qa));
            xs.push((-qb - disc.sqrt()) / (2.0 * qa));
        }
    } else if qb.abs() > 1e-14 {
        xs.push(-qc / qb);
    }
    xs.into_iter()
        .filter_map(|x| {
            let den = a1 * x + c1;
            (den.abs() > 1e-12).then(|| (x, -(b1 * x + d1) / den))
        })
        .collect()
}

/// Observed convergence order of the fixed-step integrator on a smooth problem:
/// y₁' = y₂, y₂' = −sin y₁ (pendulum) to t = 2, comparing steps h, h/2, h/4.
pub fn fixed_step_order() -> f64 {
    let run = |h: f64| {
        let cfg = IntegratorConfig { horizon: 2.0, fixed_step: Some(h), max_step: h, ..Default::default() };
        let tr = integrate_adaptive(|_, y: &[f64], d: &mut [f64]| {
            d[0] = y[1];
            d[1] = -y[0].sin();
        }, 0.0, &[1.0, 0.0], &cfg, &[])
        .unwrap();
        tr.last_state().to_vec()
    };
    let (a, b, c) = (run(0.1), run(0.05), run(0.025));
    let e1 = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let e2 = ((b[0] - c[0]).powi(2) + (b[1] - c[1]).powi(2)).sqrt();
    (e1 / e2).log2()
}

/// Central finite-difference partial ∂^{i+j} f/∂x^i ∂y^j at the origin, with one
/// Richardson step.
pub fn fd_partial(f: &dyn Fn(f64, f64) -> f64, i: u32, j: u32, h: f64) -> f64 {
    let once = |h: f64| -> f64 {
        let mut acc = 0.0;
        // Product of central difference stencils in x (order i) and y (order j).
        let st = |k: u32| -> Vec<(f64, f64)> {
            match k {
                0 => vec![(0.0, 1.0)],
                1 => vec![(-1.0, -0.5), (1.0, 0.5)],
                2 => vec![(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
                3 => vec![(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
                _ => unreachable!(),
            }
        };
        for (dx, wx) in st(i) {
            for (dy, wy) in st(j) {
                acc += wx * wy * f(dx * h, dy * h);
            }
        }
        acc / h.powi((i + j) as i32)
    };
    let (a, b) = (once(h), once(h / 2.0));
    (4.0 * b - a) / 3.0
}
