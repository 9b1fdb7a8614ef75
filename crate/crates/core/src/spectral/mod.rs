//! Fourier representation of closed planar curves.
//!
//! A curve is stored by its coefficients `X(k)`, `|k| <= M`, with respect to
//! `e^{ik theta}` and sampled on the uniform grid
//! `theta_j = -pi + 2 pi j / N`, `j = 0..N`.

mod circle;
mod geometry;
mod symbol;

pub use circle::{circle_decompose, CirclePart};
pub use geometry::{arc_chord, area, geometry_diagnostics, radius_from_constraint, Geometry};
pub use symbol::{from_y, to_y, LinearSymbol};

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix2;
use rustfft::{Fft, FftPlanner};

use crate::{CVec2, PeskinError, Result, Vec2, C64};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Grid node `theta_j`.
pub fn grid_point(j: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / n as f64
}

/// Signed frequency stored at FFT index `j` of an `n`-point spectrum.
pub fn signed_mode(j: usize, n: usize) -> i64 {
    if 2 * j < n {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Every Fourier coefficient resolvable on the grid, in FFT order
/// (index `j` holds mode [`signed_mode`]`(j, n)`).
pub fn analyze_full(samples: &[Vec2]) -> Vec<CVec2> {
    let n = samples.len();
    let mut z: Vec<C64> = samples.iter().map(|p| C64::new(p.x, p.y)).collect();
    plan(n, false).process(&mut z);
    let scale = 1.0 / n as f64;
    let zhat = |j: usize| z[j] * parity(signed_mode(j, n)) * scale;
    (0..n)
        .map(|j| {
            let a = zhat(j);
            let b = zhat((n - j) % n).conj();
            CVec2::new((a + b) * 0.5, (a - b) * C64::new(0.0, -0.5))
        })
        .collect()
}

/// Inverse of [`analyze_full`].
pub fn synthesize_full(spectrum: &[CVec2]) -> Vec<Vec2> {
    let n = spectrum.len();
    let i = C64::i();
    let mut z: Vec<C64> = spectrum
        .iter()
        .enumerate()
        .map(|(j, c)| (c.x + i * c.y) * parity(signed_mode(j, n)))
        .collect();
    plan(n, true).process(&mut z);
    z.iter().map(|w| Vec2::new(w.re, w.im)).collect()
}

/// Fourier multipliers acting mode by mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Multiplier {
    /// `-i sgn(k)`
    Hilbert,
    /// `|k|`
    Lambda,
    /// `ik`
    Derivative,
    /// Keeps `|k| <= M'`, zeroes the rest.
    CutOff(usize),
}

impl Multiplier {
    pub fn symbol(self, k: i64) -> C64 {
        match self {
            Multiplier::Hilbert => C64::new(0.0, -(k.signum() as f64)),
            Multiplier::Lambda => C64::new(k.unsigned_abs() as f64, 0.0),
            Multiplier::Derivative => C64::new(0.0, k as f64),
            Multiplier::CutOff(m) => {
                if k.unsigned_abs() as usize <= m {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        }
    }
}

/// Weight of the Wiener norms: derivative order `s` and the analyticity
/// radius `nu(t) = nu_m t / (1 + t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormWeight {
    pub s: f64,
    pub nu_m: f64,
    pub t: f64,
}

impl NormWeight {
    pub fn new(s: f64, nu_m: f64, t: f64) -> Self {
        Self { s, nu_m, t }
    }

    /// Unweighted `F^{s,1}` norm.
    pub fn plain(s: f64) -> Self {
        Self::new(s, 0.0, 0.0)
    }

    pub fn nu(&self) -> f64 {
        if self.t.is_infinite() {
            self.nu_m
        } else {
            self.nu_m * self.t / (1.0 + self.t)
        }
    }

    /// `nu'(t) = nu_m / (1 + t)^2`.
    pub fn nu_prime(&self) -> f64 {
        if self.t.is_infinite() {
            0.0
        } else {
            self.nu_m / (1.0 + self.t).powi(2)
        }
    }

    fn factor(&self, k: i64) -> f64 {
        let ak = k.unsigned_abs() as f64;
        (self.nu() * ak).exp() * ak.powf(self.s)
    }
}

/// Euclidean length of a complex 2-vector.
pub fn cnorm(v: &CVec2) -> f64 {
    (v.x.norm_sqr() + v.y.norm_sqr()).sqrt()
}

/// Truncated, conjugate-symmetric Fourier series of a closed planar curve.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCurve {
    max_mode: usize,
    grid_size: usize,
    coeffs: Vec<CVec2>,
}

impl FourierCurve {
    /// Zero curve. The grid must hold at least `2M + 1` points.
    pub fn zeros(max_mode: usize, grid_size: usize) -> Result<Self> {
        if max_mode < 1 {
            return Err(PeskinError::InvalidCurve("max_mode must be at least 1".into()));
        }
        if grid_size < 2 * max_mode + 1 {
            return Err(PeskinError::Aliasing { grid_size, max_mode });
        }
        Ok(Self {
            max_mode,
            grid_size,
            coeffs: vec![CVec2::zeros(); 2 * max_mode + 1],
        })
    }

    /// Zero curve on the default grid `N = 4M`.
    pub fn with_default_grid(max_mode: usize) -> Result<Self> {
        Self::zeros(max_mode, 4 * max_mode.max(1))
    }

    /// Build from the nonnegative modes; negative modes follow by conjugation.
    pub fn from_modes<F>(max_mode: usize, grid_size: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize) -> CVec2,
    {
        let mut c = Self::zeros(max_mode, grid_size)?;
        for k in 0..=max_mode {
            c.set_mode(k as i64, f(k));
        }
        Ok(c)
    }

    /// Uniformly parametrized circle
    /// `(a cos - b sin + c, b cos + a sin + d)`.
    pub fn circle(a: f64, b: f64, c: f64, d: f64, max_mode: usize, grid_size: usize) -> Result<Self> {
        let mut x = Self::zeros(max_mode, grid_size)?;
        x.set_mode(0, CVec2::new(C64::new(c, 0.0), C64::new(d, 0.0)));
        x.set_mode(1, CVec2::new(C64::new(a, b), C64::new(b, -a)) * C64::new(0.5, 0.0));
        Ok(x)
    }

    pub fn unit_circle(max_mode: usize, grid_size: usize) -> Result<Self> {
        Self::circle(1.0, 0.0, 0.0, 0.0, max_mode, grid_size)
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Coefficient of `e^{ik theta}`; zero outside `[-M, M]`.
    pub fn coeff(&self, k: i64) -> CVec2 {
        let m = self.max_mode as i64;
        if k.abs() > m {
            CVec2::zeros()
        } else {
            self.coeffs[(k + m) as usize]
        }
    }

    /// Set mode `k` and its conjugate partner `-k`. At `k = 0` only the real
    /// part is kept. Modes beyond `M` are ignored.
    pub fn set_mode(&mut self, k: i64, v: CVec2) {
        let m = self.max_mode as i64;
        if k.abs() > m {
            return;
        }
        if k == 0 {
            self.coeffs[m as usize] = v.map(|z| C64::new(z.re, 0.0));
        } else {
            self.coeffs[(k + m) as usize] = v;
            self.coeffs[(m - k) as usize] = v.map(|z| z.conj());
        }
    }

    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let m = self.max_mode as i64;
        (0..=m).all(|k| cnorm(&(self.coeff(k) - self.coeff(-k).map(|z| z.conj()))) <= tol)
    }

    /// Same coefficients on a different grid.
    pub fn with_grid(&self, grid_size: usize) -> Result<Self> {
        if grid_size < 2 * self.max_mode + 1 {
            return Err(PeskinError::Aliasing { grid_size, max_mode: self.max_mode });
        }
        Ok(Self { grid_size, ..self.clone() })
    }

    /// Resize the mode range, zero-padding or truncating.
    pub fn with_max_mode(&self, max_mode: usize) -> Result<Self> {
        Self::from_modes(max_mode, self.grid_size, |k| self.coeff(k as i64))
    }

    /// Samples on the curve's own grid.
    pub fn synthesize(&self) -> Vec<Vec2> {
        self.synthesize_on(self.grid_size)
            .expect("grid size is validated on construction")
    }

    /// Samples on an `n`-point grid.
    pub fn synthesize_on(&self, n: usize) -> Result<Vec<Vec2>> {
        if n < 2 * self.max_mode + 1 {
            return Err(PeskinError::Aliasing { grid_size: n, max_mode: self.max_mode });
        }
        let mut spec = vec![CVec2::zeros(); n];
        let m = self.max_mode as i64;
        for k in -m..=m {
            spec[k.rem_euclid(n as i64) as usize] = self.coeff(k);
        }
        Ok(synthesize_full(&spec))
    }

    /// Coefficients `|k| <= M` of grid samples; the grid size is taken from
    /// the sample count.
    pub fn analyze(samples: &[Vec2], max_mode: usize) -> Result<Self> {
        let n = samples.len();
        let mut c = Self::zeros(max_mode, n)?;
        let spec = analyze_full(samples);
        for k in 0..=max_mode as i64 {
            c.set_mode(k, spec[k as usize % n]);
        }
        Ok(c)
    }

    /// Direct evaluation of the series at an arbitrary angle.
    pub fn eval(&self, theta: f64) -> Vec2 {
        let mut acc = self.coeff(0).map(|z| z.re);
        for k in 1..=self.max_mode as i64 {
            let e = C64::from_polar(1.0, k as f64 * theta);
            let v = self.coeff(k);
            acc += Vec2::new(2.0 * (v.x * e).re, 2.0 * (v.y * e).re);
        }
        acc
    }

    pub fn apply(&self, m: Multiplier) -> Self {
        let mut out = self.clone();
        let mm = self.max_mode as i64;
        for k in -mm..=mm {
            out.coeffs[(k + mm) as usize] = self.coeff(k) * m.symbol(k);
        }
        out
    }

    /// `order`-th derivative in theta.
    pub fn derivative(&self, order: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..order {
            out = out.apply(Multiplier::Derivative);
        }
        out
    }

    /// Apply a real 2x2 matrix to every coefficient.
    pub fn map_matrix(&self, a: &Matrix2<f64>) -> Self {
        let ac = a.map(|x| C64::new(x, 0.0));
        Self {
            coeffs: self.coeffs.iter().map(|v| ac * v).collect(),
            ..self.clone()
        }
    }

    pub fn translate(&self, v: Vec2) -> Self {
        let mut out = self.clone();
        let c = self.coeff(0);
        out.set_mode(0, c + CVec2::new(C64::new(v.x, 0.0), C64::new(v.y, 0.0)));
        out
    }

    pub fn rotate(&self, phi: f64) -> Self {
        self.map_matrix(&rotation(phi))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|v| v * C64::new(s, 0.0)).collect(),
            ..self.clone()
        }
    }

    /// Sum with another curve; the result keeps the larger mode range and
    /// grid.
    pub fn add(&self, other: &Self) -> Self {
        let m = self.max_mode.max(other.max_mode);
        let n = self.grid_size.max(other.grid_size);
        Self::from_modes(m, n, |k| self.coeff(k as i64) + other.coeff(k as i64))
            .expect("combined grid resolves combined modes")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Homogeneous (`k != 0`) or inhomogeneous weighted Wiener norm.
    pub fn weighted_norm(&self, w: &NormWeight, inhomogeneous: bool) -> f64 {
        let m = self.max_mode as i64;
        let mut sum: f64 = (1..=m)
            .map(|k| w.factor(k) * (cnorm(&self.coeff(k)) + cnorm(&self.coeff(-k))))
            .sum();
        if inhomogeneous {
            sum += cnorm(&self.coeff(0));
        }
        sum
    }

    /// Unweighted `F^{1,1}` seminorm.
    pub fn norm_f11(&self) -> f64 {
        self.weighted_norm(&NormWeight::plain(1.0), false)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(cnorm).fold(0.0, f64::max)
    }
}

/// Unit circle plus uniform random coefficients in `[-eps, eps]` on the
/// modes `lo..=hi` (`lo >= 2`, so the circle part is untouched).
pub fn perturbed_circle<R: rand::Rng>(
    rng: &mut R,
    eps: f64,
    lo: usize,
    hi: usize,
    max_mode: usize,
    grid_size: usize,
) -> Result<FourierCurve> {
    if lo < 2 || hi < lo || hi > max_mode {
        return Err(PeskinError::InvalidParameter(format!(
            "perturbation modes {lo}..={hi} must lie in 2..={max_mode}"
        )));
    }
    let mut x = FourierCurve::unit_circle(max_mode, grid_size)?;
    for k in lo..=hi {
        let mut c = || C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)) * eps;
        x.set_mode(k as i64, CVec2::new(c(), c()));
    }
    Ok(x)
}

/// Counterclockwise rotation by `phi`.
pub fn rotation(phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// The rotation `R` by a quarter turn: `x^perp = R x`.
pub fn perp_matrix() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// `R^{-1}`.
pub fn perp_inverse() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Synthesize a curve from its samples on its own grid and return them, or
/// analyze samples into a curve, depending on direction.
#[derive(Debug)]
pub enum GridData {
    Samples(Vec<Vec2>),
    Curve(FourierCurve),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Analyze,
    Synthesize,
}

/// Move between grid samples and coefficients. Analysis needs `max_mode`.
pub fn grid_transform(direction: Direction, data: GridData, max_mode: usize) -> Result<GridData> {
    match (direction, data) {
        (Direction::Analyze, GridData::Samples(s)) => Ok(GridData::Curve(FourierCurve::analyze(&s, max_mode)?)),
        (Direction::Synthesize, GridData::Curve(c)) => Ok(GridData::Samples(c.synthesize())),
        (Direction::Analyze, GridData::Curve(c)) => Ok(GridData::Curve(c)),
        (Direction::Synthesize, GridData::Samples(s)) => Ok(GridData::Samples(s)),
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn random_curve(seed: u64, max_mode: usize, grid: usize, amp: f64) -> FourierCurve {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FourierCurve::from_modes(max_mode, grid, |_| {
            CVec2::new(
                C64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)),
                C64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)),
            )
        })
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::random_curve;
    use super::*;
    use proptest::prelude::*;

    fn cos_curve(k: usize, m: usize, n: usize) -> FourierCurve {
        let mut c = FourierCurve::zeros(m, n).unwrap();
        c.set_mode(k as i64, CVec2::new(C64::new(0.5, 0.0), C64::new(0.0, 0.0)));
        c
    }

    #[test]
    fn synthesize_cosine() {
        let c = cos_curve(1, 4, 16);
        for (j, p) in c.synthesize().iter().enumerate() {
            let th = grid_point(j, 16);
            assert!((p.x - th.cos()).abs() < 1e-14);
            assert!(p.y.abs() < 1e-14);
        }
    }

    #[test]
    fn analyze_cosine() {
        let s: Vec<Vec2> = (0..32).map(|j| Vec2::new(grid_point(j, 32).cos(), 0.0)).collect();
        let c = FourierCurve::analyze(&s, 8).unwrap();
        for k in -8..=8i64 {
            let expect = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((c.coeff(k).x - C64::new(expect, 0.0)).norm() < 1e-14);
            assert!(c.coeff(k).y.norm() < 1e-14);
        }
    }

    #[test]
    fn round_trip() {
        let c = random_curve(3, 16, 64, 1.0);
        let back = FourierCurve::analyze(&c.synthesize(), 16).unwrap();
        for k in -16..=16 {
            assert!(cnorm(&(back.coeff(k) - c.coeff(k))) <= 1e-13);
        }
    }

    #[test]
    fn aliasing_rejected() {
        assert!(matches!(FourierCurve::zeros(8, 16), Err(PeskinError::Aliasing { .. })));
        let c = FourierCurve::zeros(8, 17).unwrap();
        assert!(c.synthesize_on(10).is_err());
        assert!(FourierCurve::analyze(&[Vec2::zeros(); 10], 8).is_err());
    }

    #[test]
    fn hilbert_of_cosine_is_sine() {
        let h = cos_curve(1, 4, 16).apply(Multiplier::Hilbert);
        for (j, p) in h.synthesize().iter().enumerate() {
            assert!((p.x - grid_point(j, 16).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn lambda_scales_mode() {
        let c = cos_curve(3, 5, 20);
        let l = c.apply(Multiplier::Lambda);
        assert!(cnorm(&(l.coeff(3) - c.coeff(3) * C64::new(3.0, 0.0))) < 1e-15);
        let cut = c.apply(Multiplier::CutOff(2));
        assert_eq!(cut.max_abs(), 0.0);
    }

    #[test]
    fn norms_of_cosines() {
        assert!((cos_curve(1, 4, 16).weighted_norm(&NormWeight::plain(1.0), false) - 1.0).abs() < 1e-15);
        assert!((cos_curve(2, 4, 16).weighted_norm(&NormWeight::plain(2.0), false) - 4.0).abs() < 1e-15);
        let w = NormWeight::new(1.0, 0.1, f64::INFINITY);
        let v = cos_curve(2, 4, 16).weighted_norm(&w, false);
        assert!((v - 2.0 * 0.2f64.exp()).abs() < 1e-14);
        assert!((v - 2.4428).abs() < 1e-4);
    }

    #[test]
    fn nu_weight_properties() {
        let w = |t| NormWeight::new(1.0, 0.3, t);
        assert_eq!(w(0.0).nu(), 0.0);
        let mut prev = 0.0;
        for i in 0..100 {
            let v = w(i as f64 * 0.37).nu();
            assert!(v >= prev && v <= 0.3);
            prev = v;
        }
    }

    #[test]
    fn eval_matches_grid() {
        let c = random_curve(11, 6, 24, 0.5);
        for (j, p) in c.synthesize().iter().enumerate() {
            assert!((c.eval(grid_point(j, 24)) - p).norm() < 1e-13);
        }
    }

    #[test]
    fn circle_samples() {
        let c = FourierCurve::circle(0.6, 0.8, 0.3, -0.2, 4, 16).unwrap();
        for (j, p) in c.synthesize().iter().enumerate() {
            let th = grid_point(j, 16);
            let x = 0.6 * th.cos() - 0.8 * th.sin() + 0.3;
            let y = 0.8 * th.cos() + 0.6 * th.sin() - 0.2;
            assert!((p - Vec2::new(x, y)).norm() < 1e-14);
        }
    }

    #[test]
    fn full_spectrum_round_trip() {
        let s: Vec<Vec2> = (0..33).map(|j| Vec2::new((j as f64).sin(), (j as f64 * 0.3).cos())).collect();
        let back = synthesize_full(&analyze_full(&s));
        for (a, b) in s.iter().zip(&back) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn hilbert_derivative_is_lambda(seed in 0u64..1000) {
            let c = random_curve(seed, 10, 40, 1.0);
            let a = c.apply(Multiplier::Derivative).apply(Multiplier::Hilbert);
            let b = c.apply(Multiplier::Lambda);
            for k in -10..=10 {
                prop_assert!(cnorm(&(a.coeff(k) - b.coeff(k))) <= 1e-13);
            }
        }

        #[test]
        fn operations_keep_conjugate_symmetry(seed in 0u64..1000, phi in -3.0f64..3.0) {
            let c = random_curve(seed, 8, 32, 1.0);
            for m in [Multiplier::Hilbert, Multiplier::Lambda, Multiplier::Derivative, Multiplier::CutOff(3)] {
                prop_assert!(c.apply(m).is_conjugate_symmetric(1e-15));
            }
            prop_assert!(c.rotate(phi).is_conjugate_symmetric(1e-15));
            prop_assert!(to_y(&c).is_conjugate_symmetric(1e-15));
            prop_assert!(from_y(&to_y(&c)).is_conjugate_symmetric(1e-15));
            let back = FourierCurve::analyze(&c.synthesize(), 8).unwrap();
            prop_assert!(back.is_conjugate_symmetric(1e-14));
        }
    }
}
