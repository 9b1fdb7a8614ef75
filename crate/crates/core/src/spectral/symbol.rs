use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix2;

use super::FourierCurve;
use crate::C64;

type CMat2 = Matrix2<C64>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Symbol of the linearized velocity at mode `k`, with its diagonalization
/// `L(k) = P(k) D(k) P(k)^{-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSymbol {
    pub k: i64,
}

impl LinearSymbol {
    pub fn new(k: i64) -> Self {
        Self { k }
    }

    /// `[[|k|, -i sgn k], [i sgn k, |k|]]`
    pub fn l(&self) -> CMat2 {
        let a = self.k.unsigned_abs() as f64;
        let s = self.k.signum() as f64;
        CMat2::new(c(a, 0.0), c(0.0, -s), c(0.0, s), c(a, 0.0))
    }

    pub fn p(&self) -> CMat2 {
        let s = self.k.signum() as f64;
        CMat2::new(c(0.0, -s), c(1.0, 0.0), c(1.0, 0.0), c(0.0, -s)) * c(FRAC_1_SQRT_2, 0.0)
    }

    /// `P(k)^{-1}`; the conjugate of `P(k)` for `k != 0`.
    pub fn p_inv(&self) -> CMat2 {
        if self.k == 0 {
            CMat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)) * c(2f64.sqrt(), 0.0)
        } else {
            self.p().map(|z| z.conj())
        }
    }

    /// Diagonal of `D(k) = diag(|k| + 1, |k| - 1)`, zero at `k = 0`.
    pub fn d(&self) -> [f64; 2] {
        if self.k == 0 {
            [0.0, 0.0]
        } else {
            let a = self.k.unsigned_abs() as f64;
            [a + 1.0, a - 1.0]
        }
    }
}

fn map_modes(x: &FourierCurve, f: impl Fn(LinearSymbol) -> CMat2) -> FourierCurve {
    let mut out = x.clone();
    for k in 0..=x.max_mode() as i64 {
        out.set_mode(k, f(LinearSymbol::new(k)) * x.coeff(k));
    }
    out
}

/// `Y(k) = P(k)^{-1} X(k)` mode by mode.
pub fn to_y(x: &FourierCurve) -> FourierCurve {
    map_modes(x, |s| s.p_inv())
}

/// Inverse of [`to_y`].
pub fn from_y(y: &FourierCurve) -> FourierCurve {
    map_modes(y, |s| s.p())
}
