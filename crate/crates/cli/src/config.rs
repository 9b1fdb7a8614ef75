//! Run configuration read from TOML.

use std::path::{Path, PathBuf};

use peskin::evolution::{Scheme, StepperConfig};
use peskin::force::PhysicsParams;
use peskin::spectral::FourierCurve;
use peskin::{CVec2, PeskinError, C64};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physics: PhysicsConfig,
    pub discretization: Discretization,
    pub initial: InitialConfig,
    #[serde(default)]
    pub nu_m: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either the raw `(mu1, mu2, k0)` or the reduced `(a_mu, a_e)`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub k0: Option<f64>,
    pub a_mu: Option<f64>,
    pub a_e: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub max_mode: usize,
    /// Defaults to `4 * max_mode`.
    pub grid_size: Option<usize>,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "one")]
    pub output_every: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub circle: Option<CircleSpec>,
    pub modes: Option<Vec<ModeSpec>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSpec {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub d: f64,
}

/// Coefficient `X(k) = (x1, x2)` added to the unit circle; each component is
/// `[re, im]`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: usize,
    pub x1: [f64; 2],
    pub x2: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_trajectory")]
    pub trajectory: PathBuf,
    #[serde(default = "default_final_state")]
    pub final_state: PathBuf,
    #[serde(default = "default_summary")]
    pub summary: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { trajectory: default_trajectory(), final_state: default_final_state(), summary: default_summary() }
    }
}

fn default_trajectory() -> PathBuf {
    "trajectory.csv".into()
}

fn default_final_state() -> PathBuf {
    "final_state.toml".into()
}

fn default_summary() -> PathBuf {
    "summary.toml".into()
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl From<PeskinError> for ConfigError {
    fn from(e: PeskinError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params()?;
        self.stepper().validate()?;
        self.initial_curve()?;
        Ok(())
    }

    pub fn params(&self) -> Result<PhysicsParams, ConfigError> {
        let p = &self.physics;
        let raw = [p.mu1, p.mu2, p.k0];
        let reduced = [p.a_mu, p.a_e];
        let any_raw = raw.iter().any(Option::is_some);
        let any_reduced = reduced.iter().any(Option::is_some);
        match (any_raw, any_reduced) {
            (true, true) => Err(ConfigError::Invalid(
                "physics: give either (mu1, mu2, k0) or (a_mu, a_e), not both".into(),
            )),
            (false, false) => Err(ConfigError::Invalid("physics: missing (mu1, mu2, k0) or (a_mu, a_e)".into())),
            (true, false) => match raw {
                [Some(mu1), Some(mu2), Some(k0)] => Ok(PhysicsParams::new(mu1, mu2, k0)?),
                _ => Err(ConfigError::Invalid("physics: mu1, mu2 and k0 must all be given".into())),
            },
            (false, true) => match reduced {
                [Some(a_mu), Some(a_e)] => Ok(PhysicsParams::from_reduced(a_mu, a_e)?),
                _ => Err(ConfigError::Invalid("physics: a_mu and a_e must both be given".into())),
            },
        }
    }

    pub fn stepper(&self) -> StepperConfig {
        let d = &self.discretization;
        StepperConfig { dt: d.dt, t_final: d.t_final, scheme: d.scheme, output_every: d.output_every, nu_m: self.nu_m }
    }

    pub fn grid_size(&self) -> usize {
        self.discretization.grid_size.unwrap_or(4 * self.discretization.max_mode)
    }

    pub fn initial_curve(&self) -> Result<FourierCurve, ConfigError> {
        let m = self.discretization.max_mode;
        let n = self.grid_size();
        match (&self.initial.circle, &self.initial.modes) {
            (Some(_), Some(_)) => Err(ConfigError::Invalid("initial: give either circle or modes, not both".into())),
            (None, None) => Err(ConfigError::Invalid("initial: missing circle or modes".into())),
            (Some(c), None) => Ok(FourierCurve::circle(c.a, c.b, c.c, c.d, m, n)?),
            (None, Some(modes)) => {
                let mut x = FourierCurve::unit_circle(m, n)?;
                for s in modes {
                    if s.k > m {
                        return Err(ConfigError::Invalid(format!(
                            "initial.modes: k = {} exceeds max_mode = {m}",
                            s.k
                        )));
                    }
                    let k = s.k as i64;
                    let add = CVec2::new(C64::new(s.x1[0], s.x1[1]), C64::new(s.x2[0], s.x2[1]));
                    x.set_mode(k, x.coeff(k) + add);
                }
                Ok(x)
            }
        }
    }
}
