//! Curve velocity, nonlinear remainder and time stepping.
//!
//! The curve moves with the fluid: `X_t = \int G(X(theta) - X(eta)) F(eta) d eta`.
//! Linearizing around a uniformly parametrized circle gives the multiplier
//! `-(A_e/2) L(k)`, which `P(k)` diagonalizes to `-(A_e/2) D(k)`. Stepping
//! is done in `Y = P^{-1} X` with the linear part integrated exactly and the
//! remainder `N = u + (A_e/2) L X` treated explicitly.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::constants::{constants_with_ae, k_threshold};
use crate::exec::Exec;
use crate::force::{solve_force_with, split_force, CurveNodes, ForceDensity, PhysicsParams, SolverOptions};
use crate::kernels::{log_convolve, regularized_stokeslet};
use crate::spectral::{
    arc_chord, area, circle_decompose, cnorm, from_y, perturbed_circle, to_y, CirclePart, FourierCurve, LinearSymbol,
    NormWeight,
};
use crate::{CVec2, PeskinError, Result, Vec2, C64};

/// Velocity of the curve at its grid nodes for a given force density.
pub fn velocity_on_curve(curve: &FourierCurve, f: &ForceDensity) -> Result<Vec<Vec2>> {
    velocity_on_curve_with(curve, f, &SolverOptions::default())
}

pub fn velocity_on_curve_with(curve: &FourierCurve, f: &ForceDensity, opts: &SolverOptions) -> Result<Vec<Vec2>> {
    if f.grid_size() != curve.grid_size() {
        return Err(PeskinError::InvalidParameter("curve and force grids differ".into()));
    }
    let nodes = CurveNodes::new(curve);
    nodes.check(opts.arc_chord_floor)?;
    let n = nodes.len();
    let h = 2.0 * PI / n as f64;
    let fs = f.samples();
    let singular = log_convolve(f);
    Ok(opts.exec.map_range(n, |i| {
        let mut u = singular[i];
        for j in 0..n {
            let g = if i == j {
                regularized_stokeslet(nodes.dx[i], 0.0)
            } else {
                regularized_stokeslet(nodes.x[i] - nodes.x[j], nodes.theta[i] - nodes.theta[j])
            };
            u += g * fs[j] * h;
        }
        u
    }))
}

/// Velocity coefficients `u(k)` and remainder `N(k) = u(k) + (A_e/2) L(k) X(k)`
/// for `|k| <= M`.
#[derive(Clone, Debug)]
pub struct Rhs {
    pub velocity: FourierCurve,
    pub nonlinear: FourierCurve,
}

pub fn rhs(curve: &FourierCurve, params: &PhysicsParams, opts: &SolverOptions) -> Result<Rhs> {
    let f = solve_force_with(curve, params, opts)?.force;
    let u = velocity_on_curve_with(curve, &f, opts)?;
    let velocity = FourierCurve::analyze(&u, curve.max_mode())?;
    let half = 0.5 * params.a_e();
    let mut nonlinear = velocity.clone();
    for k in 0..=curve.max_mode() as i64 {
        let l = LinearSymbol::new(k).l();
        nonlinear.set_mode(k, velocity.coeff(k) + l * curve.coeff(k) * C64::new(half, 0.0));
    }
    Ok(Rhs { velocity, nonlinear })
}

/// The nonlinear remainder `N` of the velocity.
pub fn rhs_nonlinear(curve: &FourierCurve, params: &PhysicsParams) -> Result<FourierCurve> {
    Ok(rhs(curve, params, &SolverOptions::default())?.nonlinear)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    ExpEuler,
    Etdrk2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    /// Steps between trajectory rows.
    #[serde(default = "default_cadence")]
    pub output_every: usize,
    #[serde(default)]
    pub nu_m: f64,
}

fn default_cadence() -> usize {
    1
}

impl StepperConfig {
    pub fn new(dt: f64, t_final: f64, scheme: Scheme) -> Self {
        Self { dt, t_final, scheme, output_every: 1, nu_m: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(PeskinError::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(PeskinError::InvalidParameter(format!("T must be nonnegative, got {}", self.t_final)));
        }
        if self.output_every == 0 {
            return Err(PeskinError::InvalidParameter("output cadence must be at least 1".into()));
        }
        if !(self.nu_m >= 0.0) {
            return Err(PeskinError::InvalidParameter("nu_m must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// The evolving curve with its cached circle decomposition.
#[derive(Clone, Debug)]
pub struct SimulationState {
    pub t: f64,
    pub curve: FourierCurve,
    pub params: PhysicsParams,
    pub circle: CirclePart,
    pub deviation: FourierCurve,
}

impl SimulationState {
    pub fn new(curve: FourierCurve, params: PhysicsParams) -> Self {
        Self::at(0.0, curve, params)
    }

    fn at(t: f64, curve: FourierCurve, params: PhysicsParams) -> Self {
        let (circle, deviation) = circle_decompose(&curve);
        Self { t, curve, params, circle, deviation }
    }

    pub fn cutoff(&self) -> usize {
        self.curve.max_mode()
    }
}

/// `expm1(z) / z`
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 + z / 2.0 + z * z / 6.0
    } else {
        z.exp_m1() / z
    }
}

/// `(e^z - 1 - z) / z^2`
fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z.powi(4) / 720.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// One exponential step in Y variables for an arbitrary remainder map
/// `X -> N(X)`.
pub fn step_with<F>(y: &FourierCurve, a_e: f64, dt: f64, scheme: Scheme, nonlinear: F) -> Result<FourierCurve>
where
    F: Fn(&FourierCurve) -> Result<FourierCurve>,
{
    let m = y.max_mode() as i64;
    let forcing = |x: &FourierCurve| -> Result<FourierCurve> { Ok(to_y(&nonlinear(x)?)) };
    let rate = |k: i64| LinearSymbol::new(k).d().map(|d| -0.5 * a_e * d * dt);
    let exp_part = |y: &FourierCurve, g: &FourierCurve| {
        let mut out = y.clone();
        for k in 0..=m {
            let z = rate(k);
            let (a, b) = (y.coeff(k), g.coeff(k));
            out.set_mode(
                k,
                CVec2::new(
                    a.x * z[0].exp() + b.x * (dt * phi1(z[0])),
                    a.y * z[1].exp() + b.y * (dt * phi1(z[1])),
                ),
            );
        }
        out
    };
    let g0 = forcing(&from_y(y))?;
    let a = exp_part(y, &g0);
    match scheme {
        Scheme::ExpEuler => Ok(a),
        Scheme::Etdrk2 => {
            let g1 = forcing(&from_y(&a))?;
            let mut out = a.clone();
            for k in 0..=m {
                let z = rate(k);
                let d = g1.coeff(k) - g0.coeff(k);
                out.set_mode(k, a.coeff(k) + CVec2::new(d.x * (dt * phi2(z[0])), d.y * (dt * phi2(z[1]))));
            }
            Ok(out)
        }
    }
}

/// Advance the state by one step of size `cfg.dt`.
pub fn step(state: &SimulationState, cfg: &StepperConfig, opts: &SolverOptions) -> Result<SimulationState> {
    let params = state.params;
    let y = to_y(&state.curve);
    let next = step_with(&y, params.a_e(), cfg.dt, cfg.scheme, |x| Ok(rhs(x, &params, opts)?.nonlinear))?;
    let curve = from_y(&next);
    Ok(SimulationState::at(state.t + cfg.dt, curve, params))
}

/// One row of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub norm_f11: f64,
    pub norm_f21: f64,
    pub radius: f64,
    pub area: f64,
    pub arc_chord: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub energy_lhs: f64,
    pub energy_rhs: f64,
}

/// Rows of a run and, for runs stopped early, the reason.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub rows: Vec<TrajectoryRow>,
    pub failure: Option<String>,
}

/// Moduli `|Y_1(k)|`, `|Y_2(k)|` of the deviation at one output time.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSnapshot {
    pub t: f64,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub record: TrajectoryRecord,
    pub final_state: SimulationState,
    pub modes: Vec<ModeSnapshot>,
    pub warnings: Vec<String>,
    /// `F^{1,1}` norm of the initial deviation.
    pub x0_norm: f64,
    /// Dissipation constant used in the energy column, when available.
    pub script_c: Option<f64>,
}

/// Diagnostics attached to every run.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub solver: SolverOptions,
    /// Floor for the arc-chord constant of recorded rows.
    pub arc_chord_floor: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), arc_chord_floor: 1e-6 }
    }
}

fn y_amplitudes(dev: &FourierCurve) -> Vec<[f64; 2]> {
    let y = to_y(dev);
    (0..=y.max_mode() as i64)
        .map(|k| {
            let v = y.coeff(k);
            [v.x.norm(), v.y.norm()]
        })
        .collect()
}

/// Integrate from `initial` to `cfg.t_final`, recording every
/// `cfg.output_every` steps. Degeneracy mid-run ends the record early with
/// the failure noted.
pub fn run(initial: &FourierCurve, params: &PhysicsParams, cfg: &StepperConfig, opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let mut state = SimulationState::new(initial.clone(), *params);
    let x0_norm = state.deviation.norm_f11();
    let (a_mu, a_e) = (params.a_mu(), params.a_e());

    let threshold = k_threshold(a_mu).k;
    if x0_norm >= threshold {
        let msg = format!(
            "initial deviation norm {x0_norm:.4e} is at or above the threshold k({a_mu}) = {threshold:.4e}; decay is not certified"
        );
        warn!("{msg}");
        warnings.push(msg);
    }
    let script_c = match constants_with_ae(x0_norm, a_mu, cfg.nu_m, a_e) {
        Ok(c) if c.script_c > 0.0 => Some(c.script_c),
        Ok(c) => {
            warnings.push(format!("dissipation constant is not positive ({:.4e})", c.script_c));
            None
        }
        Err(e) => {
            warnings.push(format!("dissipation constant unavailable: {e}"));
            None
        }
    };
    let c_eff = script_c.unwrap_or(0.0);

    let norms = |s: &SimulationState| {
        let w1 = NormWeight::new(1.0, cfg.nu_m, s.t);
        let w2 = NormWeight::new(2.0, cfg.nu_m, s.t);
        (s.deviation.weighted_norm(&w1, false), s.deviation.weighted_norm(&w2, false))
    };

    let mut record = TrajectoryRecord::default();
    let mut modes = Vec::new();
    let mut integral = 0.0;
    let (_, mut prev_f21) = norms(&state);

    let mut push_row = |s: &SimulationState, integral: f64, record: &mut TrajectoryRecord| -> Result<()> {
        let (f11, f21) = norms(s);
        let ac = arc_chord(&s.curve, opts.arc_chord_floor)?;
        let center = s.curve.coeff(0);
        record.rows.push(TrajectoryRow {
            t: s.t,
            norm_f11: f11,
            norm_f21: f21,
            radius: s.circle.radius(),
            area: area(&s.curve),
            arc_chord: ac,
            center_x: center.x.re,
            center_y: center.y.re,
            energy_lhs: f11 + 0.25 * a_e * c_eff * integral,
            energy_rhs: x0_norm,
        });
        modes.push(ModeSnapshot { t: s.t, amplitudes: y_amplitudes(&s.deviation) });
        Ok(())
    };

    if let Err(e) = push_row(&state, 0.0, &mut record) {
        record.failure = Some(format!("t = {}: {e}", state.t));
        return Err(e);
    }
    let t0 = state.t;
    let steps = cfg.steps();
    for n in 1..=steps {
        let next = match step(&state, cfg, &opts.solver) {
            Ok(s) => s,
            Err(e) => {
                let msg = format!("t = {:.6}: {e}", state.t);
                warn!("run stopped: {msg}");
                record.failure = Some(msg);
                break;
            }
        };
        let (_, f21) = norms(&next);
        integral += 0.5 * cfg.dt * (prev_f21 + f21);
        prev_f21 = f21;
        state = next;
        state.t = t0 + n as f64 * cfg.dt;
        if n % cfg.output_every == 0 || n == steps {
            if let Err(e) = push_row(&state, integral, &mut record) {
                let msg = format!("t = {:.6}: {e}", state.t);
                warn!("run stopped: {msg}");
                record.failure = Some(msg);
                break;
            }
        }
    }

    Ok(RunOutput { record, final_state: state, modes, warnings, x0_norm, script_c })
}

/// Independent runs in parallel over shared parameters.
pub fn run_batch(
    initials: &[(FourierCurve, PhysicsParams)],
    cfg: &StepperConfig,
    opts: &RunOptions,
    exec: Exec,
) -> Vec<Result<RunOutput>> {
    let inner = RunOptions { solver: SolverOptions { exec: Exec::Sequential, ..opts.solver }, ..*opts };
    exec.map(initials, |(x, p)| run(x, p, cfg, &inner))
}

fn ls_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (st, sl) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mt, ml) = (st / n, sl / n);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + (p.0 - mt) * (p.1 - ml), acc.1 + (p.0 - mt).powi(2)));
    if den == 0.0 {
        return None;
    }
    Some(num / den)
}

/// Least-squares slope of `log(amplitude)` against time, negated; `None` if
/// fewer than two positive samples.
pub fn fit_decay_rate(samples: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples.iter().filter(|(_, a)| *a > 0.0).map(|(t, a)| (*t, a.ln())).collect();
    ls_slope(&pts).map(|s| -s)
}

/// Fitted decay rates of `(|Y_1(k)|, |Y_2(k)|)` from a mode history,
/// restricted to samples above `floor`.
pub fn mode_decay_rates(modes: &[ModeSnapshot], k: usize, floor: f64) -> [Option<f64>; 2] {
    [0, 1].map(|c| {
        let s: Vec<(f64, f64)> = modes
            .iter()
            .filter_map(|m| m.amplitudes.get(k).map(|a| (m.t, a[c])))
            .filter(|(_, a)| *a > floor)
            .collect();
        fit_decay_rate(&s)
    })
}

/// Least-squares slope of `log y` against `log x` over positive points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    ls_slope(&pts)
}

/// Size of the nonlinear remainders for one perturbation amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearizationPoint {
    pub eps: f64,
    /// `F^{1,1}` seminorm of the nonlinear term of the evolution.
    pub nonlinear: f64,
    /// `F^{0,1}` norm of `F - F_0 - F_L`.
    pub force_remainder: f64,
}

/// Evaluate both remainders on the same random mode-`2..=5` perturbation
/// direction scaled by each `eps`.
pub fn linearization_study(
    eps: &[f64],
    params: &PhysicsParams,
    seed: u64,
    max_mode: usize,
    grid_size: usize,
    opts: &SolverOptions,
) -> Result<Vec<LinearizationPoint>> {
    use rand::SeedableRng;
    eps.iter()
        .map(|&e| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = perturbed_circle(&mut rng, e, 2, 5.min(max_mode), max_mode, grid_size)?;
            let nonlinear = rhs_nonlinear(&x, params)?.norm_f11();
            let force_remainder = split_force(&x, params, opts)?.fn_.norm_f01();
            Ok(LinearizationPoint { eps: e, nonlinear, force_remainder })
        })
        .collect()
}

/// Largest deviation mode, used to pick the mode to fit.
pub fn dominant_mode(curve: &FourierCurve) -> usize {
    let (_, dev) = circle_decompose(curve);
    (1..=dev.max_mode())
        .max_by(|a, b| cnorm(&dev.coeff(*a as i64)).total_cmp(&cnorm(&dev.coeff(*b as i64))))
        .unwrap_or(1)
}
