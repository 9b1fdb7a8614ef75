use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::{to_y, FourierCurve};
use crate::{CVec2, C64};

/// Parameters of the uniformly parametrized circle
/// `(a cos - b sin + c, b cos + a sin + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirclePart {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CirclePart {
    pub fn radius(&self) -> f64 {
        self.a.hypot(self.b)
    }

    pub fn to_curve(&self, max_mode: usize, grid_size: usize) -> crate::Result<FourierCurve> {
        FourierCurve::circle(self.a, self.b, self.c, self.d, max_mode, grid_size)
    }

    /// Coefficient `X_c(1)`.
    pub fn mode_one(&self) -> CVec2 {
        CVec2::new(C64::new(self.a, self.b), C64::new(self.b, -self.a)) * C64::new(0.5, 0.0)
    }
}

/// Split a curve into its circle content (all of `Y(0)` and `Y_2(1)`) and
/// the remaining deviation.
pub fn circle_decompose(curve: &FourierCurve) -> (CirclePart, FourierCurve) {
    let y1 = to_y(curve).coeff(1).y * SQRT_2;
    let center = curve.coeff(0);
    let part = CirclePart { a: y1.re, b: y1.im, c: center.x.re, d: center.y.re };
    let circle = part
        .to_curve(curve.max_mode(), curve.grid_size())
        .expect("curve grid already validated");
    (part, curve.sub(&circle))
}
