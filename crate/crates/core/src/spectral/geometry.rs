use std::f64::consts::PI;

use super::{circle_decompose, to_y, FourierCurve};
use crate::{PeskinError, Result};

/// Area, arc-chord constant and the radius implied by the area constraint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    pub area: f64,
    pub arc_chord: f64,
    pub radius_from_constraint: f64,
}

/// Signed enclosed area `(1/2) \oint X ^ X'`, evaluated on the coefficients.
pub fn area(curve: &FourierCurve) -> f64 {
    4.0 * PI
        * (1..=curve.max_mode() as i64)
            .map(|k| {
                let v = curve.coeff(k);
                k as f64 * (v.x * v.y.conj()).im
            })
            .sum::<f64>()
}

/// Radius of the circle part implied by an enclosed area of `pi`:
/// `R^2 = 1 - 2 sum_{k>=1} k (|Y_2(k)|^2 - |Y_1(k)|^2)` over the deviation.
pub fn radius_from_constraint(curve: &FourierCurve) -> f64 {
    radius_for_area(curve, PI)
}

/// As [`radius_from_constraint`] for an arbitrary enclosed area.
pub fn radius_for_area(curve: &FourierCurve, enclosed: f64) -> f64 {
    let (_, dev) = circle_decompose(curve);
    let y = to_y(&dev);
    let s: f64 = (1..=y.max_mode() as i64)
        .map(|k| {
            let v = y.coeff(k);
            k as f64 * (v.y.norm_sqr() - v.x.norm_sqr())
        })
        .sum();
    (enclosed / PI - 2.0 * s).sqrt()
}

fn periodic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn chord_ratio(curve: &FourierCurve, t: f64, e: f64) -> f64 {
    let u = periodic_distance(t, e);
    if u < 1e-12 {
        return f64::INFINITY;
    }
    (curve.eval(t) - curve.eval(e)).norm() / u
}

/// `min |X(theta) - X(eta)| / |theta - eta|` with `|theta - eta|` the periodic
/// distance. Brute force on a `4N x 4N` pair grid followed by one Newton step.
pub fn arc_chord(curve: &FourierCurve, floor: f64) -> Result<f64> {
    let n = 4 * curve.grid_size();
    let pts = curve.synthesize_on(n)?;
    let der = curve.derivative(1).synthesize_on(n)?;
    let h = 2.0 * PI / n as f64;

    let mut best = f64::INFINITY;
    let mut at = (0usize, 0usize);
    for (i, d) in der.iter().enumerate() {
        let v = d.norm();
        if v < best {
            best = v;
            at = (i, i);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let gap = (j - i).min(n - j + i);
            let v = (pts[i] - pts[j]).norm() / (gap as f64 * h);
            if v < best {
                best = v;
                at = (i, j);
            }
        }
    }

    let t0 = super::grid_point(at.0, n);
    let refined = if at.0 == at.1 {
        newton_1d(|t| curve.derivative(1).eval(t).norm(), t0, h)
    } else {
        newton_2d(|t, e| chord_ratio(curve, t, e), t0, super::grid_point(at.1, n), h)
    };
    let value = best.min(refined);

    if !(value > floor) {
        return Err(PeskinError::DegenerateCurve { arc_chord: value, floor });
    }
    Ok(value)
}

fn newton_1d(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    let d = h * 1e-2;
    let (fm, f0, fp) = (f(t - d), f(t), f(t + d));
    let g = (fp - fm) / (2.0 * d);
    let c = (fp - 2.0 * f0 + fm) / (d * d);
    if c > 0.0 {
        let step = (-g / c).clamp(-h, h);
        f(t + step).min(f0)
    } else {
        f0
    }
}

fn newton_2d(f: impl Fn(f64, f64) -> f64, t: f64, e: f64, h: f64) -> f64 {
    let d = h * 1e-2;
    let f0 = f(t, e);
    let gt = (f(t + d, e) - f(t - d, e)) / (2.0 * d);
    let ge = (f(t, e + d) - f(t, e - d)) / (2.0 * d);
    let htt = (f(t + d, e) - 2.0 * f0 + f(t - d, e)) / (d * d);
    let hee = (f(t, e + d) - 2.0 * f0 + f(t, e - d)) / (d * d);
    let hte = (f(t + d, e + d) - f(t + d, e - d) - f(t - d, e + d) + f(t - d, e - d)) / (4.0 * d * d);
    let det = htt * hee - hte * hte;
    if !(det > 0.0 && htt > 0.0) || !f0.is_finite() {
        return f0;
    }
    let st = (-(hee * gt - hte * ge) / det).clamp(-h, h);
    let se = (-(htt * ge - hte * gt) / det).clamp(-h, h);
    f(t + st, e + se).min(f0)
}

/// Area, arc-chord and constraint radius in one pass.
pub fn geometry_diagnostics(curve: &FourierCurve, floor: f64) -> Result<Geometry> {
    Ok(Geometry {
        area: area(curve),
        arc_chord: arc_chord(curve, floor)?,
        radius_from_constraint: radius_from_constraint(curve),
    })
}
