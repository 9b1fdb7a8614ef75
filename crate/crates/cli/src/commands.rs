use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::{info, warn};
use peskin::constants::{constants_with_ae, energy_certificate, k_curve, CertificateReport};
use peskin::evolution::{dominant_mode, linearization_study, loglog_slope, mode_decay_rates, run, RunOptions};
use peskin::exec::Exec;
use peskin::force::{PhysicsParams, SolverOptions};
use peskin::io::{constants_to_toml, write_kcurve, write_lemma_rows, write_trajectory, FinalState};
use peskin::multiplier::{lemma_batch, random_queries};
use peskin::spectral::circle_decompose;
use peskin::PeskinError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DEGENERATE: u8 = 2;
pub const EXIT_CHECK_FAILED: u8 = 3;

const DEFAULT_SEED: u64 = 7;
const CERTIFICATE_SLACK: f64 = 0.01;
const SLOPE_RANGE: (f64, f64) = (1.9, 2.1);

pub struct Context {
    pub out: PathBuf,
    pub seed: Option<u64>,
}

impl Context {
    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out.join(p)
        }
    }

    fn create(&self, p: &Path) -> Result<(PathBuf, BufWriter<File>), u8> {
        let path = self.path(p);
        match File::create(&path) {
            Ok(f) => Ok((path, BufWriter::new(f))),
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                Err(EXIT_USAGE)
            }
        }
    }
}

fn write_text(ctx: &Context, name: &str, text: &str) -> Result<PathBuf, u8> {
    let path = ctx.path(Path::new(name));
    std::fs::write(&path, text).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_USAGE
    })?;
    Ok(path)
}

fn runtime_code(e: &PeskinError) -> u8 {
    match e {
        PeskinError::InvalidParameter(_)
        | PeskinError::InvalidCurve(_)
        | PeskinError::Aliasing { .. }
        | PeskinError::OutOfRegime { .. } => EXIT_USAGE,
        _ => EXIT_DEGENERATE,
    }
}

#[derive(Serialize)]
struct SimulationSummary {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    t_end: f64,
    rows: usize,
    warnings: Vec<String>,
    deviation: DeviationSummary,
    decay: DecaySummary,
    certificate: CertificateSummary,
    final_curve: FinalSummary,
}

#[derive(Serialize)]
struct DeviationSummary {
    initial_norm_f11: f64,
    final_norm_f11: f64,
    final_max_coefficient: f64,
}

#[derive(Serialize)]
struct DecaySummary {
    mode: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_y1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_y2: Option<f64>,
    predicted_y1: f64,
    predicted_y2: f64,
}

#[derive(Serialize)]
struct CertificateSummary {
    applicable: bool,
    passed: bool,
    script_c: f64,
    tilde_c: f64,
    energy_margin: f64,
    decay_margin: f64,
    center_margin: f64,
}

impl From<&CertificateReport> for CertificateSummary {
    fn from(r: &CertificateReport) -> Self {
        Self {
            applicable: r.applicable,
            passed: r.passed(),
            script_c: r.script_c,
            tilde_c: r.tilde_c,
            energy_margin: r.energy.worst_margin,
            decay_margin: r.decay.worst_margin,
            center_margin: r.center.worst_margin,
        }
    }
}

#[derive(Serialize)]
struct FinalSummary {
    radius: f64,
    center_x: f64,
    center_y: f64,
    area: f64,
}

pub fn simulate(ctx: &Context, config: &Path) -> u8 {
    let cfg = match RunConfig::load(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_USAGE;
        }
    };
    let (params, initial) = match (cfg.params(), cfg.initial_curve()) {
        (Ok(p), Ok(x)) => (p, x),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("config error: {e}");
            return EXIT_USAGE;
        }
    };
    let stepper = cfg.stepper();
    info!("simulating {} steps of dt = {}", stepper.steps(), stepper.dt);

    let out = match run(&initial, &params, &stepper, &RunOptions::default()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return runtime_code(&e);
        }
    };
    for w in &out.warnings {
        println!("warning: {w}");
    }

    let Ok((traj_path, w)) = ctx.create(&cfg.output.trajectory) else { return EXIT_USAGE };
    if let Err(e) = write_trajectory(&out.record, w) {
        eprintln!("error: writing {}: {e}", traj_path.display());
        return EXIT_USAGE;
    }
    let fs = FinalState::new(out.final_state.t, &out.final_state.curve, &params);
    match fs.to_toml() {
        Ok(text) => {
            if let Err(code) = write_text(ctx, &cfg.output.final_state.to_string_lossy(), &text) {
                return code;
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }

    let cert = match energy_certificate(&out.record, &params, out.x0_norm, cfg.nu_m, CERTIFICATE_SLACK) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: certificate: {e}");
            return EXIT_DEGENERATE;
        }
    };
    let mode = dominant_mode(&initial);
    let [rate_y1, rate_y2] = mode_decay_rates(&out.modes, mode, 1e-14);
    let a_e = params.a_e();
    let (_, dev) = circle_decompose(&out.final_state.curve);
    let last = out.record.rows.last().expect("run records the initial row");
    let summary = SimulationSummary {
        status: if out.record.failure.is_some() { "degenerate" } else { "ok" },
        failure: out.record.failure.clone(),
        seed: ctx.seed.or(cfg.seed),
        t_end: last.t,
        rows: out.record.rows.len(),
        warnings: out.warnings.clone(),
        deviation: DeviationSummary {
            initial_norm_f11: out.x0_norm,
            final_norm_f11: dev.norm_f11(),
            final_max_coefficient: dev.max_abs(),
        },
        decay: DecaySummary {
            mode,
            rate_y1,
            rate_y2,
            predicted_y1: 0.5 * a_e * (mode as f64 + 1.0),
            predicted_y2: 0.5 * a_e * (mode as f64 - 1.0),
        },
        certificate: CertificateSummary::from(&cert),
        final_curve: FinalSummary {
            radius: last.radius,
            center_x: last.center_x,
            center_y: last.center_y,
            area: last.area,
        },
    };
    let text = match toml::to_string(&summary) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(code) = write_text(ctx, &cfg.output.summary.to_string_lossy(), &text) {
        return code;
    }
    print!("{text}");

    if out.record.failure.is_some() {
        EXIT_DEGENERATE
    } else if cert.applicable && !cert.passed() {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    }
}

pub fn kcurve(ctx: &Context, a_min: f64, a_max: f64, steps: usize) -> u8 {
    if !(a_min > -1.0 && a_max < 1.0 && a_min <= a_max) || steps == 0 {
        eprintln!("error: need -1 < a_mu_min <= a_mu_max < 1 and steps >= 1");
        return EXIT_USAGE;
    }
    let rows = match k_curve(a_min, a_max, steps, Exec::default()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return runtime_code(&e);
        }
    };
    let Ok((path, w)) = ctx.create(Path::new("kcurve.csv")) else { return EXIT_USAGE };
    if let Err(e) = write_kcurve(&rows, w) {
        eprintln!("error: writing {}: {e}", path.display());
        return EXIT_USAGE;
    }
    let below = rows.iter().filter(|r| r.k < r.lower_bound).count();
    let worst_residual = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    println!("rows = {}", rows.len());
    println!("max_residual = {worst_residual:e}");
    println!("rows_below_closed_form = {below}");
    if below > 0 {
        println!("bound_check = \"FAIL\"");
        warn!("k is below the closed-form bound on {below} of {} rows", rows.len());
        EXIT_CHECK_FAILED
    } else {
        println!("bound_check = \"PASS\"");
        EXIT_OK
    }
}

pub fn lemma_check(ctx: &Context, count: usize, max_n: usize, max_k: i64) -> u8 {
    if count == 0 || !(1..=4).contains(&max_n) || max_k < 1 {
        eprintln!("error: need count >= 1, 1 <= max_n <= 4, max_k >= 1");
        return EXIT_USAGE;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.unwrap_or(DEFAULT_SEED));
    let queries = random_queries(&mut rng, count, max_n, max_k);
    let rows = match lemma_batch(&queries, Exec::default()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    let Ok((path, w)) = ctx.create(Path::new("lemma.csv")) else { return EXIT_USAGE };
    if let Err(e) = write_lemma_rows(&rows, w) {
        eprintln!("error: writing {}: {e}", path.display());
        return EXIT_USAGE;
    }
    let tol = 2.0 * std::f64::consts::PI * 1e-8;
    let bound_fail = rows.iter().filter(|r| r.bound_margin < -tol).count();
    let exact_fail = rows.iter().filter(|r| !(r.abs_err <= 1e-8)).count();
    let worst_err = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    let min_margin = rows.iter().map(|r| r.bound_margin).fold(f64::INFINITY, f64::min);
    println!("tuples = {}", rows.len());
    println!("max_abs_err = {worst_err:e}");
    println!("min_bound_margin = {min_margin:e}");
    println!("bound_failures = {bound_fail}");
    println!("exact_failures = {exact_fail}");
    if bound_fail + exact_fail == 0 {
        println!("status = \"PASS\"");
        EXIT_OK
    } else {
        println!("status = \"FAIL\"");
        EXIT_CHECK_FAILED
    }
}

pub fn constants(ctx: &Context, x_norm: f64, a_mu: f64, nu_m: f64, a_e: f64) -> u8 {
    if !(x_norm >= 0.0 && a_mu > -1.0 && a_mu < 1.0 && nu_m >= 0.0 && a_e > 0.0) {
        eprintln!("error: need x_norm >= 0, -1 < a_mu < 1, nu_m >= 0, a_e > 0");
        return EXIT_USAGE;
    }
    let report = match constants_with_ae(x_norm, a_mu, nu_m, a_e) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return runtime_code(&e);
        }
    };
    let text = match constants_to_toml(&report) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(code) = write_text(ctx, "constants.toml", &text) {
        return code;
    }
    print!("{text}");
    EXIT_OK
}

pub fn verify_linear(ctx: &Context, eps: &[f64], a_mu: f64, a_e: f64, max_mode: usize) -> u8 {
    if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) || max_mode < 5 {
        eprintln!("error: need at least two positive eps values and max_mode >= 5");
        return EXIT_USAGE;
    }
    let params = match PhysicsParams::from_reduced(a_mu, a_e) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let seed = ctx.seed.unwrap_or(DEFAULT_SEED);
    let pts = match linearization_study(eps, &params, seed, max_mode, 4 * max_mode, &SolverOptions::default()) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return runtime_code(&e);
        }
    };
    let Ok((path, w)) = ctx.create(Path::new("linearization.csv")) else { return EXIT_USAGE };
    let mut csv = csv::Writer::from_writer(w);
    for p in &pts {
        if let Err(e) = csv.serialize(p) {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    if let Err(e) = csv.flush() {
        eprintln!("error: writing {}: {e}", path.display());
        return EXIT_USAGE;
    }
    let slope_n = loglog_slope(&pts.iter().map(|p| (p.eps, p.nonlinear)).collect::<Vec<_>>()).unwrap_or(f64::NAN);
    let slope_f =
        loglog_slope(&pts.iter().map(|p| (p.eps, p.force_remainder)).collect::<Vec<_>>()).unwrap_or(f64::NAN);
    let ok = |s: f64| s >= SLOPE_RANGE.0 && s <= SLOPE_RANGE.1;
    println!("slope_nonlinear = {slope_n}");
    println!("slope_force_remainder = {slope_f}");
    if ok(slope_n) && ok(slope_f) {
        println!("status = \"PASS\"");
        EXIT_OK
    } else {
        println!("status = \"FAIL\"");
        EXIT_CHECK_FAILED
    }
}
