//! Force density on the interface.
//!
//! The stress jump reduces to the second-kind equation
//! `F = 2 A_mu S(F, X) + 2 A_e X''`, where
//! `S(F)(theta) = (1/pi) \int (X'(theta)^perp . D) (D (x) D) / |D|^4 F(eta) d eta`
//! and `D = X(theta) - X(eta)`. It is discretized with the periodic trapezoid
//! rule on the curve grid (Nyström) and solved densely.

use std::f64::consts::PI;

use log::debug;
use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::spectral::{
    analyze_full, circle_decompose, perp_inverse, perp_matrix, signed_mode, synthesize_full, cnorm, FourierCurve,
};
use crate::{CVec2, PeskinError, Result, Vec2, C64};

/// Viscosities and elasticity, with the reduced parameters
/// `A_mu = (mu2 - mu1) / (mu1 + mu2)` and `A_e = k0 / (mu1 + mu2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub mu1: f64,
    pub mu2: f64,
    pub k0: f64,
}

impl PhysicsParams {
    pub fn new(mu1: f64, mu2: f64, k0: f64) -> Result<Self> {
        if !(mu1 > 0.0 && mu2 > 0.0 && k0 > 0.0) || !(mu1 + mu2 + k0).is_finite() {
            return Err(PeskinError::InvalidParameter(format!(
                "viscosities and elasticity must be positive and finite (mu1 = {mu1}, mu2 = {mu2}, k0 = {k0})"
            )));
        }
        Ok(Self { mu1, mu2, k0 })
    }

    /// Parameters with `mu1 + mu2 = 1` realizing the given reduced pair.
    pub fn from_reduced(a_mu: f64, a_e: f64) -> Result<Self> {
        if !(a_mu.abs() < 1.0) || !(a_e > 0.0) || !a_e.is_finite() {
            return Err(PeskinError::InvalidParameter(format!(
                "need |A_mu| < 1 and A_e > 0 (A_mu = {a_mu}, A_e = {a_e})"
            )));
        }
        Self::new((1.0 - a_mu) / 2.0, (1.0 + a_mu) / 2.0, a_e)
    }

    pub fn a_mu(&self) -> f64 {
        (self.mu2 - self.mu1) / (self.mu1 + self.mu2)
    }

    pub fn a_e(&self) -> f64 {
        self.k0 / (self.mu1 + self.mu2)
    }
}

/// A real 2-vector function of theta: grid samples together with every
/// Fourier coefficient the grid resolves.
#[derive(Clone, Debug, PartialEq)]
pub struct ForceDensity {
    samples: Vec<Vec2>,
    spectrum: Vec<CVec2>,
}

impl ForceDensity {
    pub fn from_samples(samples: Vec<Vec2>) -> Self {
        let spectrum = analyze_full(&samples);
        Self { samples, spectrum }
    }

    /// Samples of a Fourier curve on its own grid.
    pub fn from_curve(curve: &FourierCurve) -> Self {
        Self::from_samples(curve.synthesize())
    }

    pub fn zeros(grid_size: usize) -> Self {
        Self {
            samples: vec![Vec2::zeros(); grid_size],
            spectrum: vec![CVec2::zeros(); grid_size],
        }
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Vec2] {
        &self.samples
    }

    /// Coefficients in FFT order; index `j` holds mode `signed_mode(j, N)`.
    pub fn spectrum(&self) -> &[CVec2] {
        &self.spectrum
    }

    pub fn coeff(&self, k: i64) -> CVec2 {
        let n = self.grid_size() as i64;
        if 2 * k.abs() > n {
            CVec2::zeros()
        } else {
            self.spectrum[k.rem_euclid(n) as usize]
        }
    }

    /// Rebuild from a spectrum in FFT order.
    pub fn from_spectrum(spectrum: Vec<CVec2>) -> Self {
        Self { samples: synthesize_full(&spectrum), spectrum }
    }

    /// Inhomogeneous Wiener norm `sum_k |F(k)|`.
    pub fn norm_f01(&self) -> f64 {
        self.spectrum.iter().map(cnorm).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.grid_size(), other.grid_size(), "force densities on different grids");
        Self {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
            spectrum: self.spectrum.iter().zip(&other.spectrum).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.sub(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * s).collect(),
            spectrum: self.spectrum.iter().map(|v| v * C64::new(s, 0.0)).collect(),
        }
    }

    /// Rotate every sample by the matrix `a`.
    pub fn map_matrix(&self, a: &Matrix2<f64>) -> Self {
        Self::from_samples(self.samples.iter().map(|v| a * v).collect())
    }

    /// Modes `|k| <= max_mode` as a Fourier curve on the same grid.
    pub fn to_curve(&self, max_mode: usize) -> Result<FourierCurve> {
        FourierCurve::from_modes(max_mode, self.grid_size(), |k| self.coeff(k as i64))
    }

    fn as_vector(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.grid_size(), self.samples.iter().flat_map(|v| [v.x, v.y]))
    }

    fn from_vector(v: &DVector<f64>) -> Self {
        Self::from_samples((0..v.len() / 2).map(|i| Vec2::new(v[2 * i], v[2 * i + 1])).collect())
    }
}

/// Zero order, linear and remainder parts of a force density.
#[derive(Clone, Debug)]
pub struct ForceSplit {
    pub f: ForceDensity,
    pub f0: ForceDensity,
    pub fl: ForceDensity,
    pub fn_: ForceDensity,
}

/// Numerical settings of the force solve.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Lowest admissible grid arc-chord ratio.
    pub arc_chord_floor: f64,
    /// Largest accepted 1-norm condition estimate.
    pub condition_limit: f64,
    /// Required relative residual of the discrete system.
    pub residual_tol: f64,
    pub exec: Exec,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            arc_chord_floor: 1e-6,
            condition_limit: 1e12,
            residual_tol: 1e-12,
            exec: Exec::default(),
        }
    }
}

/// Elastic force `k0 X''`.
pub fn elastic_force(curve: &FourierCurve, params: &PhysicsParams) -> ForceDensity {
    ForceDensity::from_curve(&curve.derivative(2).scale(params.k0))
}

/// Reduced elastic force `X''`.
pub fn elastic_force_reduced(curve: &FourierCurve) -> ForceDensity {
    ForceDensity::from_curve(&curve.derivative(2))
}

/// Grid data shared by the Nyström operators.
pub(crate) struct CurveNodes {
    pub x: Vec<Vec2>,
    pub dx: Vec<Vec2>,
    pub ddx: Vec<Vec2>,
    pub theta: Vec<f64>,
}

impl CurveNodes {
    pub fn new(curve: &FourierCurve) -> Self {
        let n = curve.grid_size();
        Self {
            x: curve.synthesize(),
            dx: curve.derivative(1).synthesize(),
            ddx: curve.derivative(2).synthesize(),
            theta: (0..n).map(|j| crate::spectral::grid_point(j, n)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// Arc-chord ratio restricted to grid pairs, including the tangent limit.
    pub fn grid_arc_chord(&self) -> f64 {
        let n = self.len();
        let h = 2.0 * PI / n as f64;
        let mut best = self.dx.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        for i in 0..n {
            for j in i + 1..n {
                let gap = (j - i).min(n - j + i) as f64 * h;
                best = best.min((self.x[i] - self.x[j]).norm() / gap);
            }
        }
        best
    }

    pub fn check(&self, floor: f64) -> Result<()> {
        let ac = self.grid_arc_chord();
        if !(ac > floor) {
            return Err(PeskinError::DegenerateCurve { arc_chord: ac, floor });
        }
        Ok(())
    }
}

/// Kernel block `K(theta_i, theta_j)` of `S`, already divided by `pi`.
fn s_kernel(nodes: &CurveNodes, i: usize, j: usize) -> Matrix2<f64> {
    let r = perp_matrix();
    let t = nodes.dx[i];
    if i == j {
        let tt = t.norm_squared();
        let curv = -(r * t).dot(&nodes.ddx[i]) / (2.0 * tt);
        return t * t.transpose() * (curv / (tt * PI));
    }
    let d = nodes.x[i] - nodes.x[j];
    let d2 = d.norm_squared();
    d * d.transpose() * ((r * t).dot(&d) / (d2 * d2 * PI))
}

/// Dense `2N x 2N` matrix of the trapezoid discretization of `S`; unknowns
/// are ordered `(F_1(theta_0), F_2(theta_0), F_1(theta_1), ...)`.
pub fn s_matrix(curve: &FourierCurve, opts: &SolverOptions) -> Result<DMatrix<f64>> {
    let nodes = CurveNodes::new(curve);
    nodes.check(opts.arc_chord_floor)?;
    Ok(assemble(&nodes, opts.exec))
}

fn assemble(nodes: &CurveNodes, exec: Exec) -> DMatrix<f64> {
    let n = nodes.len();
    let h = 2.0 * PI / n as f64;
    let rows = exec.map_range(n, |i| {
        let mut row = vec![0.0; 4 * n];
        for j in 0..n {
            let k = s_kernel(nodes, i, j) * h;
            row[2 * j] = k[(0, 0)];
            row[2 * j + 1] = k[(0, 1)];
            row[2 * n + 2 * j] = k[(1, 0)];
            row[2 * n + 2 * j + 1] = k[(1, 1)];
        }
        row
    });
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (i, row) in rows.iter().enumerate() {
        for c in 0..2 * n {
            m[(2 * i, c)] = row[c];
            m[(2 * i + 1, c)] = row[2 * n + c];
        }
    }
    m
}

/// Nyström evaluation of `S(F, X)` at the grid nodes.
pub fn apply_s(curve: &FourierCurve, f: &ForceDensity) -> Result<ForceDensity> {
    apply_s_with(curve, f, &SolverOptions::default())
}

pub fn apply_s_with(curve: &FourierCurve, f: &ForceDensity, opts: &SolverOptions) -> Result<ForceDensity> {
    check_grid(curve, f)?;
    let nodes = CurveNodes::new(curve);
    nodes.check(opts.arc_chord_floor)?;
    let n = nodes.len();
    let h = 2.0 * PI / n as f64;
    let out = opts.exec.map_range(n, |i| {
        (0..n).fold(Vec2::zeros(), |acc, j| acc + s_kernel(&nodes, i, j) * f.samples[j] * h)
    });
    Ok(ForceDensity::from_samples(out))
}

fn check_grid(curve: &FourierCurve, f: &ForceDensity) -> Result<()> {
    if curve.grid_size() != f.grid_size() {
        return Err(PeskinError::InvalidParameter(format!(
            "curve grid {} and force grid {} differ",
            curve.grid_size(),
            f.grid_size()
        )));
    }
    Ok(())
}

/// Outcome of a force solve with its diagnostics.
#[derive(Clone, Debug)]
pub struct ForceSolution {
    pub force: ForceDensity,
    pub condition: f64,
    pub relative_residual: f64,
}

/// Solve `(I - 2 A_mu S) F = 2 A_e X''` directly.
pub fn solve_force(curve: &FourierCurve, params: &PhysicsParams) -> Result<ForceDensity> {
    Ok(solve_force_with(curve, params, &SolverOptions::default())?.force)
}

pub fn solve_force_with(curve: &FourierCurve, params: &PhysicsParams, opts: &SolverOptions) -> Result<ForceSolution> {
    let a_mu = params.a_mu();
    let rhs = elastic_force_reduced(curve).scale(2.0 * params.a_e());
    let nodes = CurveNodes::new(curve);
    nodes.check(opts.arc_chord_floor)?;
    if a_mu == 0.0 {
        return Ok(ForceSolution { force: rhs, condition: 1.0, relative_residual: 0.0 });
    }
    let n2 = 2 * nodes.len();
    let mut a = assemble(&nodes, opts.exec) * (-2.0 * a_mu);
    for i in 0..n2 {
        a[(i, i)] += 1.0;
    }
    let b = rhs.as_vector();
    let lu = a.clone().lu();
    let condition = condition_estimate(&a, &lu);
    if !(condition <= opts.condition_limit) {
        return Err(PeskinError::IllConditioned { condition, limit: opts.condition_limit });
    }
    let mut x = lu
        .solve(&b)
        .ok_or(PeskinError::IllConditioned { condition: f64::INFINITY, limit: opts.condition_limit })?;
    let bnorm = b.amax().max(f64::MIN_POSITIVE);
    let mut residual = (&a * &x - &b).amax() / bnorm;
    if residual > opts.residual_tol {
        // one step of iterative refinement
        if let Some(dx) = lu.solve(&(&b - &a * &x)) {
            x += dx;
            residual = (&a * &x - &b).amax() / bnorm;
        }
    }
    debug!("force solve: N = {}, condition ~ {condition:.3e}, residual {residual:.3e}", nodes.len());
    if residual > opts.residual_tol {
        return Err(PeskinError::IllConditioned { condition, limit: opts.condition_limit });
    }
    Ok(ForceSolution { force: ForceDensity::from_vector(&x), condition, relative_residual: residual })
}

/// Hager's estimate of the 1-norm condition number.
fn condition_estimate(a: &DMatrix<f64>, lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let n = a.nrows();
    let norm_a = (0..n).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let lut = a.transpose().lu();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let Some(y) = lu.solve(&x) else { return f64::INFINITY };
        est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let Some(z) = lut.solve(&xi) else { return f64::INFINITY };
        let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0), |acc, (j, v)| {
            if v.abs() > acc.1 {
                (j, v.abs())
            } else {
                acc
            }
        });
        if zmax <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(n);
        x[jmax] = 1.0;
    }
    norm_a * est
}

/// Fixed-point iteration `F <- 2 A_mu S(F) + 2 A_e X''`; a cross-check for
/// the direct solve that converges only for moderate `|A_mu|`.
pub fn solve_force_picard(
    curve: &FourierCurve,
    params: &PhysicsParams,
    tol: f64,
    max_iter: usize,
) -> Result<(ForceDensity, usize)> {
    let opts = SolverOptions::default();
    let nodes = CurveNodes::new(curve);
    nodes.check(opts.arc_chord_floor)?;
    let s = assemble(&nodes, opts.exec) * (2.0 * params.a_mu());
    let b = elastic_force_reduced(curve).scale(2.0 * params.a_e()).as_vector();
    let mut x = b.clone();
    for it in 1..=max_iter {
        let next = &s * &x + &b;
        let change = (&next - &x).amax();
        x = next;
        if change <= tol * b.amax().max(f64::MIN_POSITIVE) {
            return Ok((ForceDensity::from_vector(&x), it));
        }
    }
    Err(PeskinError::InvalidParameter(format!("Picard iteration did not converge in {max_iter} steps")))
}

/// Zero order part `2 A_e / (1 - A_mu) X_c''` and linear part
/// `2 A_e X'' - 2 A_e A_mu / (1 - A_mu) R^{-1} X'` of the force, from the
/// circle decomposition of the curve.
pub fn force_zero_linear(curve: &FourierCurve, params: &PhysicsParams) -> (ForceDensity, ForceDensity) {
    let (part, dev) = circle_decompose(curve);
    let circle = part
        .to_curve(curve.max_mode(), curve.grid_size())
        .expect("curve grid already validated");
    let (a_mu, a_e) = (params.a_mu(), params.a_e());
    let f0 = ForceDensity::from_curve(&circle.derivative(2).scale(2.0 * a_e / (1.0 - a_mu)));
    let fl = dev
        .derivative(2)
        .scale(2.0 * a_e)
        .sub(&dev.derivative(1).map_matrix(&perp_inverse()).scale(2.0 * a_e * a_mu / (1.0 - a_mu)));
    (f0, ForceDensity::from_curve(&fl))
}

/// `F_N = F - F_0 - F_L`.
pub fn force_split_residual(f: &ForceDensity, f0: &ForceDensity, fl: &ForceDensity) -> ForceDensity {
    f.sub(f0).sub(fl)
}

/// Solve and split in one call.
pub fn split_force(curve: &FourierCurve, params: &PhysicsParams, opts: &SolverOptions) -> Result<ForceSplit> {
    let f = solve_force_with(curve, params, opts)?.force;
    let (f0, fl) = force_zero_linear(curve, params);
    let fn_ = force_split_residual(&f, &f0, &fl);
    Ok(ForceSplit { f, f0, fl, fn_ })
}

/// Mode-wise product of a force spectrum with a scalar symbol.
pub fn map_spectrum(f: &ForceDensity, symbol: impl Fn(i64) -> C64) -> ForceDensity {
    let n = f.grid_size();
    ForceDensity::from_spectrum(
        f.spectrum
            .iter()
            .enumerate()
            .map(|(j, v)| v * symbol(signed_mode(j, n)))
            .collect(),
    )
}
