//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use peskin::constants::{constants, energy_certificate, k_curve, k_threshold};
use peskin::evolution::{
    linearization_study, loglog_slope, mode_decay_rates, rhs, run, run_batch, step, velocity_on_curve, RunOptions,
    Scheme, SimulationState, StepperConfig,
};
use peskin::exec::Exec;
use peskin::force::{solve_force, ForceDensity, PhysicsParams, SolverOptions};
use peskin::kernels::log_convolve;
use peskin::multiplier::{
    integral_s1_closed, integral_sn, integral_sn_exact, lemma_batch, random_queries,
};
use peskin::spectral::{
    area, circle_decompose, from_y, grid_point, perturbed_circle, rotation, to_y, FourierCurve, LinearSymbol,
};
use peskin::{CVec2, Vec2, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn params(a_mu: f64) -> PhysicsParams {
    PhysicsParams::from_reduced(a_mu, 1.0).unwrap()
}

fn max_dist(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn steady_circle() -> Outcome {
    let start = Instant::now();
    let (m, n) = (64, 256);
    let x = FourierCurve::unit_circle(m, n).unwrap();
    let mut worst_u: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for a_mu in [-0.5, 0.0, 0.5] {
        let p = params(a_mu);
        let f = solve_force(&x, &p).unwrap();
        let expect: Vec<Vec2> = x
            .derivative(2)
            .synthesize()
            .iter()
            .map(|v| v * (2.0 * p.a_e() / (1.0 - a_mu)))
            .collect();
        worst_f = worst_f.max(max_dist(f.samples(), &expect));
        let u = velocity_on_curve(&x, &f).unwrap();
        worst_u = worst_u.max(u.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let elapsed = start.elapsed();
    outcome(
        worst_u <= 1e-10 && worst_f <= 1e-10 && elapsed < Duration::from_secs(5),
        format!("max |u| = {worst_u:.2e}, max |F - F0| = {worst_f:.2e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn force_linearization() -> Outcome {
    let start = Instant::now();
    let eps = [1e-2, 1e-3, 1e-4];
    let pts = linearization_study(&eps, &params(0.5), 11, 12, 48, &SolverOptions::default()).unwrap();
    let slope = loglog_slope(&pts.iter().map(|p| (p.eps, p.force_remainder)).collect::<Vec<_>>()).unwrap();
    let elapsed = start.elapsed();
    outcome(
        (1.9..=2.1).contains(&slope) && elapsed < Duration::from_secs(30),
        format!("slope = {slope:.4}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn with_y_mode(m: usize, n: usize, k: i64, v: CVec2) -> FourierCurve {
    let mut y = to_y(&FourierCurve::unit_circle(m, n).unwrap());
    y.set_mode(k, y.coeff(k) + v);
    from_y(&y)
}

fn linear_spectrum() -> Outcome {
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for a_mu in [-0.5, 0.0, 0.5] {
        let p = params(a_mu);
        for k in [2i64, 3, 5, 10] {
            let x = with_y_mode(16, 64, k, CVec2::new(C64::new(eps, 0.0), C64::new(0.0, eps)));
            let u = to_y(&rhs(&x, &p, &SolverOptions::default()).unwrap().velocity).coeff(k);
            let y = to_y(&x).coeff(k);
            let d = LinearSymbol::new(k).d();
            for (c, (uc, yc)) in [(u.x, y.x), (u.y, y.y)].into_iter().enumerate() {
                let expect = yc * (-0.5 * p.a_e() * d[c]);
                worst = worst.max((uc - expect).norm() / expect.norm());
            }
        }
    }
    outcome(worst <= 1e-3, format!("max relative error = {worst:.2e}"))
}

fn decay_rates() -> Outcome {
    let eps = 1e-3;
    let x = with_y_mode(8, 32, 2, CVec2::new(C64::new(eps, 0.0), C64::new(eps, 0.0)));
    let p = params(0.0);
    let mut cfg = StepperConfig::new(1e-2, 5.0, Scheme::Etdrk2);
    cfg.output_every = 5;
    let out = run(&x, &p, &cfg, &RunOptions::default()).unwrap();
    let [r1, r2] = mode_decay_rates(&out.modes, 2, 1e-14);
    let (r1, r2) = (r1.unwrap_or(f64::NAN), r2.unwrap_or(f64::NAN));
    let (e1, e2) = (0.5 * p.a_e() * 3.0, 0.5 * p.a_e() * 1.0);
    let monotone = out.record.rows.windows(2).all(|w| w[1].norm_f11 <= w[0].norm_f11);
    outcome(
        (r1 / e1 - 1.0).abs() <= 0.05 && (r2 / e2 - 1.0).abs() <= 0.05 && monotone && out.record.failure.is_none(),
        format!("rates = ({r1:.5}, {r2:.5}) vs ({e1}, {e2}), F11 nonincreasing: {monotone}"),
    )
}

/// Unit circle plus a deviation of `F^{1,1}` size `target`, rescaled to
/// enclose area `pi`.
fn medium_data(shape: &FourierCurve, target: f64) -> FourierCurve {
    let (_, dev) = circle_decompose(shape);
    let dev = dev.scale(target / dev.norm_f11());
    let x = FourierCurve::unit_circle(shape.max_mode(), shape.grid_size()).unwrap().add(&dev);
    x.scale((PI / area(&x)).sqrt())
}

struct EnergyRuns {
    energy: Outcome,
    area: Outcome,
}

fn energy_runs() -> EnergyRuns {
    let (m, n) = (8, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random_shape = perturbed_circle(&mut rng, 1.0, 2, 5, m, n).unwrap();
    let single_shape = with_y_mode(m, n, 3, CVec2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.5)));
    let mut jobs = Vec::new();
    for a_mu in [-0.5, 0.0, 0.5] {
        let k = k_threshold(a_mu).k;
        jobs.push((medium_data(&random_shape, 0.5 * k), params(a_mu)));
        jobs.push((medium_data(&single_shape, 0.8 * k), params(a_mu)));
    }
    let mut cfg = StepperConfig::new(1e-3, 10.0, Scheme::ExpEuler);
    cfg.output_every = 10;
    let results = run_batch(&jobs, &cfg, &RunOptions::default(), Exec::default());

    let mut energy_ok = true;
    let mut notes = Vec::new();
    let mut worst_area: f64 = 0.0;
    for ((_, p), r) in jobs.iter().zip(&results) {
        let out = match r {
            Ok(o) => o,
            Err(e) => {
                energy_ok = false;
                notes.push(format!("run failed: {e}"));
                continue;
            }
        };
        let k = k_threshold(p.a_mu()).k;
        let cert = energy_certificate(&out.record, p, out.x0_norm, 0.0, 0.01).unwrap();
        let ok = out.x0_norm < k && out.record.failure.is_none() && cert.passed();
        energy_ok &= ok;
        notes.push(format!(
            "A_mu={} x0/k={:.2} C={:.3} margins=({:.1e},{:.1e})",
            p.a_mu(),
            out.x0_norm / k,
            cert.script_c,
            cert.energy.worst_margin,
            cert.decay.worst_margin
        ));
        for row in &out.record.rows {
            worst_area = worst_area.max((row.area - PI).abs());
        }
    }
    EnergyRuns {
        energy: outcome(energy_ok, notes.join("; ")),
        area: outcome(
            worst_area <= 1e-4 * PI && results.iter().all(|r| r.is_ok()),
            format!("max |area - pi| = {worst_area:.2e} over {} runs", results.len()),
        ),
    }
}

fn multiplier_lemma() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let queries = random_queries(&mut rng, 1000, 3, 20);
    let rows = lemma_batch(&queries, Exec::default()).unwrap();
    let bound_ok = rows.iter().all(|r| r.bound_margin >= -2.0 * PI * 1e-8);
    let worst_exact = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    let mut worst_closed: f64 = 0.0;
    for k1 in -30..=30i64 {
        for k2 in -30..=30i64 {
            if k1 == k2 {
                continue;
            }
            let closed = integral_s1_closed(k1, k2);
            worst_closed = worst_closed
                .max((closed - integral_sn_exact(&[k1, k2]).unwrap()).abs())
                .max((closed - integral_sn(&[k1, k2]).unwrap()).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        bound_ok && worst_exact <= 1e-8 && worst_closed <= 1e-8 && elapsed < Duration::from_secs(60),
        format!(
            "bound held: {bound_ok}, max |exact - quadrature| = {worst_exact:.1e}, n = 1 closed form error = {worst_closed:.1e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn threshold_curve() -> Outcome {
    let rows = k_curve(-0.95, 0.95, 50, Exec::default()).unwrap();
    let below: Vec<&_> = rows.iter().filter(|r| r.k < r.lower_bound).collect();
    let residual = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    let k0 = k_threshold(0.0);
    let ok = below.is_empty() && (0.5e-3..=2e-3).contains(&k0.k) && residual <= 1e-9 && k0.residual.abs() <= 1e-9;
    let worst = rows.iter().map(|r| r.k / r.lower_bound).fold(f64::INFINITY, f64::min);
    outcome(
        ok,
        format!(
            "k(0) = {:.4e}, closed form at 0 = {:.4e}, k below closed form on {}/{} rows (min ratio {worst:.4}), max residual = {residual:.1e}",
            k0.k,
            k0.lower_bound,
            below.len(),
            rows.len()
        ),
    )
}

/// Largest `x` in `[0, 1]` where every constant is defined, to `1e-12`.
fn regime_boundary(a_mu: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if constants(mid, a_mu, 0.0).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn constants_ledger() -> Outcome {
    let origin = constants(0.0, 0.0, 0.0).unwrap();
    let unit = origin.entries().iter().filter(|(k, _)| k.starts_with('C') || k.starts_with('D')).all(|(_, v)| (v - 1.0).abs() <= 1e-12);
    let mut violations = Vec::new();
    let mut boundaries = Vec::new();
    for a_mu in [-0.5, 0.0, 0.5] {
        let b = regime_boundary(a_mu);
        boundaries.push(format!("{b:.4}"));
        let grid: Vec<f64> = (0..100).map(|i| b * i as f64 / 100.0).collect();
        let reports: Vec<_> = grid.iter().map(|&x| constants(x, a_mu, 0.0).unwrap()).collect();
        for w in reports.windows(2) {
            for ((name, a), (_, b)) in w[0].entries().iter().zip(w[1].entries().iter()) {
                if (name.starts_with('C') || name.starts_with('D')) && b < a {
                    violations.push(format!("{name} at A_mu={a_mu}, x={:.4}", w[1].x_norm));
                }
            }
        }
    }
    violations.dedup_by(|a, b| a.split(' ').next() == b.split(' ').next());
    outcome(
        unit && violations.is_empty(),
        format!(
            "unit at origin: {unit}, regime boundaries [{}], decreasing: [{}]",
            boundaries.join(", "),
            violations.join("; ")
        ),
    )
}

/// `\int -(1/4pi) log|2 sin((theta - eta)/2)| F(eta) d eta` by a midpoint
/// rule in `u = theta - eta` after a septic map flattening both ends.
fn log_quadrature(f: &FourierCurve, theta: f64, nodes: usize) -> Vec2 {
    let mut acc = Vec2::zeros();
    for i in 0..nodes {
        let s = (i as f64 + 0.5) / nodes as f64;
        let s2 = s * s;
        let u = 2.0 * PI * s2 * s2 * (35.0 - 84.0 * s + 70.0 * s2 - 20.0 * s2 * s);
        let du = 2.0 * PI * 140.0 * s2 * s * (1.0 - s).powi(3);
        let w = -(2.0 * (0.5 * u).sin()).abs().ln() * du / (4.0 * PI);
        acc += f.eval(theta - u) * w;
    }
    acc / nodes as f64
}

fn log_multiplier() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (m, n) = (8, 32);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = FourierCurve::from_modes(m, n, |_| {
            let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            CVec2::new(c(), c())
        })
        .unwrap();
        let spectral = log_convolve(&ForceDensity::from_curve(&f));
        for j in (0..n).step_by(4) {
            let q = log_quadrature(&f, grid_point(j, n), 20_000);
            worst = worst.max((spectral[j] - q).norm());
        }
    }
    outcome(worst <= 1e-8, format!("max difference = {worst:.2e} over 20 densities"))
}

fn invariances() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = perturbed_circle(&mut rng, 0.03, 2, 5, 8, 32).unwrap();
    let p = params(0.4);
    let shift = Vec2::new(0.7, -1.3);
    let phi = 0.9;
    let f = solve_force(&x, &p).unwrap();
    let u = velocity_on_curve(&x, &f).unwrap();

    let xt = x.translate(shift);
    let ft = solve_force(&xt, &p).unwrap();
    let ut = velocity_on_curve(&xt, &ft).unwrap();
    let trans = max_dist(f.samples(), ft.samples()).max(max_dist(&u, &ut));

    let r = rotation(phi);
    let xr = x.rotate(phi);
    let fr = solve_force(&xr, &p).unwrap();
    let ur = velocity_on_curve(&xr, &fr).unwrap();
    let rf: Vec<Vec2> = f.samples().iter().map(|v| r * v).collect();
    let ru: Vec<Vec2> = u.iter().map(|v| r * v).collect();
    let rot = max_dist(fr.samples(), &rf).max(max_dist(&ur, &ru));

    // center motion against the zero mode of the nonlinear term, integrated
    // by the trapezoid rule along an ETDRK2 trajectory
    let cfg = StepperConfig::new(1e-2, 2.0, Scheme::Etdrk2);
    let opts = SolverOptions::default();
    let mut state = SimulationState::new(x.clone(), p);
    let zero_mode = |s: &SimulationState| {
        let r = rhs(&s.curve, &p, &opts).unwrap();
        let v = r.nonlinear.coeff(0);
        (Vec2::new(v.x.re, v.y.re), (r.velocity.coeff(0) - v).map(|z| z.norm()).max())
    };
    let c0 = x.coeff(0);
    let (mut prev, mut split) = zero_mode(&state);
    let mut predicted = Vec2::zeros();
    for _ in 0..cfg.steps() {
        state = step(&state, &cfg, &opts).unwrap();
        let (next, s) = zero_mode(&state);
        split = split.max(s);
        predicted += (prev + next) * (0.5 * cfg.dt);
        prev = next;
    }
    let c = state.curve.coeff(0) - c0;
    let moved = Vec2::new(c.x.re, c.y.re);
    let center_err = (moved - predicted).norm();
    let center_ok = center_err <= 1e-3 * moved.norm() + 1e-12 && split <= 1e-12;
    outcome(
        trans <= 1e-12 && rot <= 1e-10 && center_ok,
        format!(
            "translation {trans:.1e}, rotation {rot:.1e}, center drift {:.2e} vs integral error {center_err:.1e}, |u(0) - N(0)| = {split:.1e}",
            moved.norm()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let energy = energy_runs();
    let results = vec![
        ("1 steady circle", steady_circle()),
        ("2 force linearization order", force_linearization()),
        ("3 linear spectrum", linear_spectrum()),
        ("4 decay rates", decay_rates()),
        ("5 energy inequality", energy.energy),
        ("6 area conservation", energy.area),
        ("7 multiplier integral bounds", multiplier_lemma()),
        ("8 threshold curve", threshold_curve()),
        ("9 constants ledger", constants_ledger()),
        ("10 log multiplier identity", log_multiplier()),
        ("11 invariances", invariances()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag} ({})", o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
