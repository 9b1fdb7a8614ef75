//! Stokes kernels and the spectral log convolution.

use std::f64::consts::PI;

use nalgebra::Matrix2;

use crate::force::{map_spectrum, ForceDensity};
use crate::spectral::FourierCurve;
use crate::{PeskinError, Result, Vec2, C64};

/// Stokeslet `G(x) = (1/4pi)(-log|x| I + x x^T / |x|^2)`.
pub fn stokeslet(x: Vec2) -> Result<Matrix2<f64>> {
    let r2 = x.norm_squared();
    if r2 == 0.0 {
        return Err(PeskinError::SingularEvaluation);
    }
    Ok((Matrix2::identity() * (-0.5 * r2.ln()) + x * x.transpose() / r2) / (4.0 * PI))
}

/// Stress tensor `T_ijk = -(1/pi) x_i x_j x_k / |x|^4`.
pub fn stress_kernel(x: Vec2) -> Result<[[[f64; 2]; 2]; 2]> {
    let r2 = x.norm_squared();
    if r2 == 0.0 {
        return Err(PeskinError::SingularEvaluation);
    }
    let c = -1.0 / (PI * r2 * r2);
    // entries depend only on how many indices are 1
    let by_count = [
        c * x[0] * x[0] * x[0],
        c * x[0] * x[0] * x[1],
        c * x[0] * x[1] * x[1],
        c * x[1] * x[1] * x[1],
    ];
    let mut t = [[[0.0; 2]; 2]; 2];
    for (i, ti) in t.iter_mut().enumerate() {
        for (j, tij) in ti.iter_mut().enumerate() {
            for (k, v) in tij.iter_mut().enumerate() {
                *v = by_count[i + j + k];
            }
        }
    }
    Ok(t)
}

/// Stokeslet with the log singularity of the curve parametrization removed:
/// `G(D) + (1/4pi) log|2 sin(u/2)| I`, where `u` is the parameter gap.
/// For `u = 0` pass the tangent as `d` and the limit is returned.
pub fn regularized_stokeslet(d: Vec2, u: f64) -> Matrix2<f64> {
    let r2 = d.norm_squared();
    let log_ratio = if u == 0.0 {
        0.5 * r2.ln()
    } else {
        0.5 * r2.ln() - (2.0 * (0.5 * u).sin()).abs().ln()
    };
    (Matrix2::identity() * (-log_ratio) + d * d.transpose() / r2) / (4.0 * PI)
}

/// `\int -(1/4pi) log|2 sin((theta - eta)/2)| F(eta) d eta`, evaluated
/// through its multiplier `1 / (4|k|)` (zero at `k = 0`).
pub fn log_convolve(f: &ForceDensity) -> Vec<Vec2> {
    map_spectrum(f, |k| {
        if k == 0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.25 / k.unsigned_abs() as f64, 0.0)
        }
    })
    .samples()
    .to_vec()
}

/// Off-curve velocity, or a flagged value when the point is too close to
/// the curve for the trapezoid rule to be trusted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldValue {
    Ok(Vec2),
    NearCurve { value: Vec2, distance: f64 },
}

impl FieldValue {
    pub fn value(&self) -> Vec2 {
        match *self {
            FieldValue::Ok(v) | FieldValue::NearCurve { value: v, .. } => v,
        }
    }
}

/// Single layer velocity `\int G(x - X(eta)) F(eta) d eta` by the trapezoid
/// rule on the force grid.
pub fn eval_velocity_field(x: Vec2, curve: &FourierCurve, f: &ForceDensity, clearance: f64) -> Result<FieldValue> {
    let n = f.grid_size();
    let nodes = curve.synthesize_on(n)?;
    let h = 2.0 * PI / n as f64;
    let fine = curve.synthesize_on(4 * n)?;
    let distance = fine.iter().map(|p| (x - p).norm()).fold(f64::INFINITY, f64::min);
    let mut u = Vec2::zeros();
    for (p, fj) in nodes.iter().zip(f.samples()) {
        u += stokeslet(x - p)? * fj * h;
    }
    Ok(if distance < clearance {
        FieldValue::NearCurve { value: u, distance }
    } else {
        FieldValue::Ok(u)
    })
}
