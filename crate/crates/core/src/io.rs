//! File formats: trajectory and report CSVs, final state and constants as
//! TOML.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::constants::{ConstantsReport, Threshold};
use crate::evolution::{TrajectoryRecord, TrajectoryRow};
use crate::force::PhysicsParams;
use crate::multiplier::LemmaRow;
use crate::spectral::FourierCurve;
use crate::{CVec2, PeskinError, Result, C64};

pub const TRAJECTORY_HEADER: &str = "t,norm_f11,norm_f21,radius,area,arc_chord,center_x,center_y,energy_lhs,energy_rhs";

/// Write rows under the fixed header; a failed run ends with a `#` comment
/// line naming the failure.
pub fn write_trajectory<W: Write>(record: &TrajectoryRecord, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    if record.rows.is_empty() {
        w.write_record(TRAJECTORY_HEADER.split(','))?;
    }
    for r in &record.rows {
        w.serialize(r)?;
    }
    let mut out = w.into_inner().map_err(|e| PeskinError::Serialize(e.to_string()))?;
    if let Some(f) = &record.failure {
        writeln!(out, "# failure: {}", f.replace('\n', " "))?;
    }
    Ok(())
}

pub fn read_trajectory<R: Read>(input: R) -> Result<TrajectoryRecord> {
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text)?;
    let failure = text
        .lines()
        .filter_map(|l| l.strip_prefix("# failure:"))
        .map(|s| s.trim().to_string())
        .next_back();
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != TRAJECTORY_HEADER {
        return Err(PeskinError::Trajectory(format!("unexpected header: {}", header.join(","))));
    }
    let rows = r
        .deserialize::<TrajectoryRow>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| PeskinError::Trajectory(e.to_string()))?;
    Ok(TrajectoryRecord { rows, failure })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub k: i64,
    pub re1: f64,
    pub im1: f64,
    pub re2: f64,
    pub im2: f64,
}

/// Final curve with the parameters it was computed under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub t: f64,
    pub max_mode: usize,
    pub grid_size: usize,
    pub params: ReducedParams,
    pub coefficients: Vec<CoefficientRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub mu1: f64,
    pub mu2: f64,
    pub k0: f64,
    pub a_mu: f64,
    pub a_e: f64,
}

impl FinalState {
    pub fn new(t: f64, curve: &FourierCurve, params: &PhysicsParams) -> Self {
        let m = curve.max_mode() as i64;
        Self {
            t,
            max_mode: curve.max_mode(),
            grid_size: curve.grid_size(),
            params: ReducedParams {
                mu1: params.mu1,
                mu2: params.mu2,
                k0: params.k0,
                a_mu: params.a_mu(),
                a_e: params.a_e(),
            },
            coefficients: (-m..=m)
                .map(|k| {
                    let v = curve.coeff(k);
                    CoefficientRow { k, re1: v.x.re, im1: v.x.im, re2: v.y.re, im2: v.y.im }
                })
                .collect(),
        }
    }

    pub fn curve(&self) -> Result<FourierCurve> {
        let mut c = FourierCurve::zeros(self.max_mode, self.grid_size)?;
        for r in self.coefficients.iter().filter(|r| r.k >= 0) {
            c.set_mode(r.k, CVec2::new(C64::new(r.re1, r.im1), C64::new(r.re2, r.im2)));
        }
        Ok(c)
    }

    pub fn params(&self) -> Result<PhysicsParams> {
        PhysicsParams::new(self.params.mu1, self.params.mu2, self.params.k0)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| PeskinError::Serialize(e.to_string()))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| PeskinError::Serialize(e.to_string()))
    }
}

/// `C1 .. C17, D1 .. D5, script_C, tilde_C` keyed TOML with the inputs in
/// an `[inputs]` table.
pub fn constants_to_toml(r: &ConstantsReport) -> Result<String> {
    let mut out = String::from("[inputs]\n");
    for (k, v) in [("x_norm", r.x_norm), ("a_mu", r.a_mu), ("nu_m", r.nu_m), ("a_e", r.a_e)] {
        out.push_str(&format!("{k} = {}\n", toml_float(v)));
    }
    out.push_str("\n[constants]\n");
    for (k, v) in r.entries() {
        out.push_str(&format!("{k} = {}\n", toml_float(v)));
    }
    Ok(out)
}

fn toml_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

/// Parse a constants dump back into `(name, value)` pairs.
pub fn constants_from_toml(s: &str) -> Result<BTreeMap<String, f64>> {
    let v: toml::Table = toml::from_str(s).map_err(|e| PeskinError::Serialize(e.to_string()))?;
    let t = v
        .get("constants")
        .and_then(|c| c.as_table())
        .ok_or_else(|| PeskinError::Serialize("missing [constants] table".into()))?;
    t.iter()
        .map(|(k, v)| {
            v.as_float()
                .map(|f| (k.clone(), f))
                .ok_or_else(|| PeskinError::Serialize(format!("{k} is not a float")))
        })
        .collect()
}

pub fn write_kcurve<W: Write>(rows: &[Threshold], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a_mu", "k", "k_lower_bound"])?;
    for r in rows {
        w.write_record(&[r.a_mu.to_string(), r.k.to_string(), r.lower_bound.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_lemma_rows<W: Write>(rows: &[LemmaRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
