//! Explicit constants of the medium-size decay estimate.
//!
//! `C_1 .. C_17` and `D_1 .. D_5` are closed-form functions of the deviation
//! size `x = ||X||_{F^{1,1}_nu}`, the viscosity contrast `A_mu` and the
//! analyticity rate `nu_m`. They all equal 1 at `(0, 0, 0)`. The threshold
//! `k(A_mu)` is the root of `1 - 676 sqrt(2) D_5(x) x / (1 - A_mu)`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::evolution::TrajectoryRecord;
use crate::exec::Exec;
use crate::force::PhysicsParams;
use crate::{PeskinError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub c: [f64; 17],
    pub d: [f64; 5],
    pub script_c: f64,
    pub tilde_c: f64,
    pub x_norm: f64,
    pub a_mu: f64,
    pub nu_m: f64,
    pub a_e: f64,
}

impl ConstantsReport {
    /// `C_i`, 1-based.
    pub fn c(&self, i: usize) -> f64 {
        self.c[i - 1]
    }

    /// `D_i`, 1-based.
    pub fn d(&self, i: usize) -> f64 {
        self.d[i - 1]
    }

    /// `(name, value)` pairs in dump order.
    pub fn entries(&self) -> Vec<(String, f64)> {
        let mut v: Vec<(String, f64)> = (1..=17).map(|i| (format!("C{i}"), self.c(i))).collect();
        v.extend((1..=5).map(|i| (format!("D{i}"), self.d(i))));
        v.push(("script_C".into(), self.script_c));
        v.push(("tilde_C".into(), self.tilde_c));
        v
    }
}

fn out_of_regime(constant: &'static str, x_norm: f64) -> PeskinError {
    PeskinError::OutOfRegime { constant, x_norm }
}

/// `|A_mu| (1 + |A_mu|) / ((1 - A_mu)(1 + A_mu))`
fn contrast_ratio(a_mu: f64) -> f64 {
    let a = a_mu.abs();
    a * (1.0 + a) / ((1.0 - a_mu) * (1.0 + a_mu))
}

/// `C_1 .. C_17`, `D_1 .. D_5`.
fn chain(x: f64, a_mu: f64, nu_m: f64) -> Result<([f64; 17], [f64; 5])> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(PeskinError::InvalidParameter(format!("x_norm must be finite and nonnegative, got {x}")));
    }
    if !(a_mu.abs() < 1.0) {
        return Err(PeskinError::InvalidParameter(format!("|A_mu| must be below 1, got {a_mu}")));
    }
    if !(nu_m >= 0.0) || !nu_m.is_finite() {
        return Err(PeskinError::InvalidParameter(format!("nu_m must be finite and nonnegative, got {nu_m}")));
    }
    let e = nu_m.exp();
    let (e2, e3, e4, e5) = (e * e, e * e * e, e.powi(4), e.powi(5));
    let x2 = x * x;
    let q = contrast_ratio(a_mu);
    let w = 1.0 - a_mu + a_mu.abs();

    let c1_den = 1.0 - 0.5 * x2;
    if !(c1_den > 0.0) {
        return Err(out_of_regime("C1", x));
    }
    let c1 = 1.0 / c1_den.sqrt();
    let g = 1.0 + c1 * x / (2.0 * SQRT_2 * e);
    let c2_den = 1.0 - 2.0 * SQRT_2 * e * c1 * x * g;
    if !(c2_den > 0.0) {
        return Err(out_of_regime("C2", x));
    }
    let c2 = g / c2_den;
    let c3 = c2 / g;
    let c4 = 2.0 / 9.0 * (4.0 * e2 * c2 + c3 / 2.0);
    let c5 = 1.0 + 2.0 * SQRT_2 * e * c1 * x;
    let c6 = (1.0 + 8.0 * e2 * g * c2) / 9.0;
    let c8 = (1.0 + 0.5 * x2).sqrt();
    let c7 = 16.0 / 17.0 * e2 * c2 * c3 * (1.0 - SQRT_2 * e * x / c8 * (1.0 + x / (2.0 * SQRT_2 * c8 * e)))
        + c3 * c3 / 17.0;
    let c9 = 2.0 / 147.0
        * (4.5 * c4
            + c5
            + 16.0 * e2
            + 18.0 * e2 * c6
            + 34.0 * e2 * c7
            + (SQRT_2 + 18.0 * SQRT_2 * c6 + 34.0 * SQRT_2 * c7) * e * c1 * x
            + (9.0 * c6 + 17.0 * c7) * c1 * c1 * x2);
    let c10 = 4.0 / 9.0 * (0.25 + 2.0 * e2 + 11.0 * SQRT_2 * e3 * c1 * x + 73.5 * c9 * c1 * c1 * x2);
    let c11 = (11.0 * SQRT_2 * e3 + 73.5 * c9 * c1 * x) / (11.0 * SQRT_2);
    let c12 = (11.0 * e2 + 4.0 * SQRT_2 * e * c1 * x + c1 * c1 * x2) / 11.0;
    let c13 = 0.5 * (2.0 * e4 + 6.0 * SQRT_2 * e3 * c1 * x + 11.0 * c12 * c1 * c1 * x2);
    let c14 = (72.0 * c6 + 32.0 * e2 + 144.0 * SQRT_2 * e * c6 * c1 * x + 324.0 * c6 * c6 * c1 * c1 * x2) / 104.0;
    let c15 = (104.0 * c13 * c14 + 8.0 * SQRT_2 * e * (6.0 * SQRT_2 * e3 + 11.0 * c12 * c1 * x) + 22.0 * c12) / 222.0;
    let c16 = (28.0 * SQRT_2 * e5 + 222.0 * c15 * c1 * x) / (28.0 * SQRT_2);
    let c17_den = 1.0 - 56.0 * SQRT_2 * q * c16 * c1 * x;
    if !(c17_den > 0.0) {
        return Err(out_of_regime("C17", x));
    }
    let c17 = 1.0 / c17_den;

    let d1 = c11 * c1;
    let d2 = c9 * c1 * c1;
    let d3 = c10;
    let d4 = c1 * c17 * (112.0 * w * c16 + 888.0 * e * c8 * c1 * c15) / 1000.0;
    let d5 = (22.0 * w * d1 + 147.0 * e * d2 * c8 + 2250.0 * q * d3 * d4) / 169.0;

    Ok((
        [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13, c14, c15, c16, c17],
        [d1, d2, d3, d4, d5],
    ))
}

/// Constants ledger with `A_e = 1` in the dissipation constant.
pub fn constants(x_norm: f64, a_mu: f64, nu_m: f64) -> Result<ConstantsReport> {
    constants_with_ae(x_norm, a_mu, nu_m, 1.0)
}

/// Constants ledger. The dissipation constant
/// `1 - 4 nu'/A_e - 676 sqrt(2) D_5 x / (1 - A_mu)` uses `nu' = nu_m`, its
/// largest value over a run.
pub fn constants_with_ae(x_norm: f64, a_mu: f64, nu_m: f64, a_e: f64) -> Result<ConstantsReport> {
    if !(a_e > 0.0) {
        return Err(PeskinError::InvalidParameter(format!("A_e must be positive, got {a_e}")));
    }
    let (c, d) = chain(x_norm, a_mu, nu_m)?;
    let script_c = 1.0 - 4.0 * nu_m / a_e - 676.0 * SQRT_2 * d[4] * x_norm / (1.0 - a_mu);
    let tilde_c = d[4] / ((1.0 - a_mu) * script_c);
    Ok(ConstantsReport { c, d, script_c, tilde_c, x_norm, a_mu, nu_m, a_e })
}

/// `1 - 676 sqrt(2) D_5(s; A_mu, 0) s / (1 - A_mu)`; regime violations count
/// as negative.
pub fn threshold_condition(s: f64, a_mu: f64) -> f64 {
    match chain(s, a_mu, 0.0) {
        Ok((_, d)) => 1.0 - 676.0 * SQRT_2 * d[4] * s / (1.0 - a_mu),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// `(1 - A_mu) / (676 sqrt(2) D_5(0))`.
pub fn threshold_closed_form(a_mu: f64) -> f64 {
    let q = contrast_ratio(a_mu);
    let w = 1.0 - a_mu + a_mu.abs();
    let d5_0 = (22.0 * w + 147.0 + 2250.0 * q * (112.0 * w + 888.0) / 1000.0) / 169.0;
    (1.0 - a_mu) / (676.0 * SQRT_2 * d5_0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub a_mu: f64,
    /// Root of the defining condition.
    pub k: f64,
    /// Closed form evaluated with `D_5(0)`.
    pub lower_bound: f64,
    /// `|condition(k)|`.
    pub residual: f64,
}

/// Medium-size threshold `k(A_mu)` by bisection, together with the closed
/// form built from `D_5(0)`.
pub fn k_threshold(a_mu: f64) -> Threshold {
    let lower_bound = threshold_closed_form(a_mu);
    let f = |s: f64| threshold_condition(s, a_mu);
    let (mut lo, mut hi) = (0.0, lower_bound);
    while f(hi) > 0.0 && hi < SQRT_2 {
        lo = hi;
        hi = (2.0 * hi).min(SQRT_2);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = if f(hi).abs() < f(lo).abs() { hi } else { lo };
    Threshold { a_mu, k, lower_bound, residual: f(k).abs() }
}

/// `k(A_mu)` on `steps` evenly spaced points of `[a_min, a_max]`.
pub fn k_curve(a_min: f64, a_max: f64, steps: usize, exec: Exec) -> Result<Vec<Threshold>> {
    if !(a_min > -1.0 && a_max < 1.0 && a_min <= a_max) {
        return Err(PeskinError::InvalidParameter(format!(
            "A_mu range must lie strictly inside (-1, 1), got [{a_min}, {a_max}]"
        )));
    }
    if steps == 0 {
        return Err(PeskinError::InvalidParameter("need at least one step".into()));
    }
    let grid: Vec<f64> = if steps == 1 {
        vec![a_min]
    } else {
        (0..steps).map(|i| a_min + (a_max - a_min) * i as f64 / (steps - 1) as f64).collect()
    };
    Ok(exec.map(&grid, |&a| k_threshold(a)))
}

/// Outcome of one certificate over a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    /// Smallest `bound - value` over the rows (negative on failure).
    pub worst_margin: f64,
    pub first_violation: Option<f64>,
}

impl Check {
    fn over(rows: impl Iterator<Item = (f64, f64, f64)>) -> Self {
        let mut worst = f64::INFINITY;
        let mut first = None;
        for (t, value, bound) in rows {
            let m = bound - value;
            if m < worst || m.is_nan() {
                worst = m;
            }
            if first.is_none() && !(m >= 0.0) {
                first = Some(t);
            }
        }
        Self { passed: first.is_none(), worst_margin: worst, first_violation: first }
    }

    fn not_applicable() -> Self {
        Self { passed: false, worst_margin: f64::NAN, first_violation: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    pub script_c: f64,
    pub tilde_c: f64,
    /// Whether the constants are in their admissible regime at `x0_norm`.
    pub applicable: bool,
    pub energy: Check,
    pub decay: Check,
    /// Center drift bound `|c(t)| <= |c(0)| + tilde_C x0^2`. Advisory: it
    /// uses `D_5` in place of the constant of the zero-mode estimate.
    pub center: Check,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.applicable && self.energy.passed && self.decay.passed
    }
}

fn validate_record(record: &TrajectoryRecord) -> Result<()> {
    if record.rows.is_empty() {
        return Err(PeskinError::Trajectory("no rows".into()));
    }
    for w in record.rows.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(PeskinError::Trajectory(format!("time not increasing at t = {}", w[1].t)));
        }
    }
    for r in &record.rows {
        if !(r.t.is_finite() && r.norm_f11.is_finite() && r.norm_f21.is_finite()) {
            return Err(PeskinError::Trajectory(format!("non-finite entry at t = {}", r.t)));
        }
        if r.norm_f11 < 0.0 || r.norm_f21 < 0.0 {
            return Err(PeskinError::Trajectory(format!("negative norm at t = {}", r.t)));
        }
    }
    Ok(())
}

/// Absolute allowance added to every certificate bound, so that a circle
/// (deviation at rounding level) is not failed on noise.
pub const ROUNDOFF: f64 = 1e-12;

/// Audit a trajectory against the energy inequality, the exponential decay
/// bound and the center drift bound, each with relative `slack`.
pub fn energy_certificate(
    record: &TrajectoryRecord,
    params: &PhysicsParams,
    x0_norm: f64,
    nu_m: f64,
    slack: f64,
) -> Result<CertificateReport> {
    validate_record(record)?;
    let a_e = params.a_e();
    let report = match constants_with_ae(x0_norm, params.a_mu(), nu_m, a_e) {
        Ok(r) if r.script_c > 0.0 => r,
        Ok(r) => {
            return Ok(CertificateReport {
                script_c: r.script_c,
                tilde_c: r.tilde_c,
                applicable: false,
                energy: Check::not_applicable(),
                decay: Check::not_applicable(),
                center: Check::not_applicable(),
            })
        }
        Err(_) => {
            return Ok(CertificateReport {
                script_c: f64::NAN,
                tilde_c: f64::NAN,
                applicable: false,
                energy: Check::not_applicable(),
                decay: Check::not_applicable(),
                center: Check::not_applicable(),
            })
        }
    };
    let c = report.script_c;
    let rows = &record.rows;
    let scaled = x0_norm * (1.0 + slack);
    let bound = scaled + ROUNDOFF;

    let mut integral = vec![0.0; rows.len()];
    for i in 1..rows.len() {
        integral[i] = integral[i - 1] + 0.5 * (rows[i].t - rows[i - 1].t) * (rows[i].norm_f21 + rows[i - 1].norm_f21);
    }
    let energy = Check::over(
        rows.iter()
            .zip(&integral)
            .map(|(r, int)| (r.t, r.norm_f11 + 0.25 * a_e * c * int, bound)),
    );
    let t0 = rows[0].t;
    let decay = Check::over(
        rows.iter()
            .map(|r| (r.t, r.norm_f11, scaled * (-0.25 * a_e * c * (r.t - t0)).exp() + ROUNDOFF)),
    );
    let c0 = rows[0].center_x.hypot(rows[0].center_y);
    let center_bound = (c0 + report.tilde_c * x0_norm * x0_norm) * (1.0 + slack) + ROUNDOFF;
    let center = Check::over(rows.iter().map(|r| (r.t, r.center_x.hypot(r.center_y), center_bound)));

    Ok(CertificateReport { script_c: c, tilde_c: report.tilde_c, applicable: true, energy, decay, center })
}
