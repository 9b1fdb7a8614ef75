use thiserror::Error;

pub type Result<T> = std::result::Result<T, PeskinError>;

#[derive(Debug, Error)]
pub enum PeskinError {
    #[error("grid of {grid_size} points cannot resolve modes up to {max_mode} (need at least {})", 2 * max_mode + 1)]
    Aliasing { grid_size: usize, max_mode: usize },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("kernel evaluated at the origin")]
    SingularEvaluation,

    #[error("degenerate curve: arc-chord constant {arc_chord:.3e} is below the floor {floor:.3e}")]
    DegenerateCurve { arc_chord: f64, floor: f64 },

    #[error("force system is ill-conditioned (condition estimate {condition:.3e}, limit {limit:.3e})")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("outside the admissible regime: {constant} has a non-positive denominator at x_norm = {x_norm}")]
    OutOfRegime { constant: &'static str, x_norm: f64 },

    #[error("quadrature did not converge: last two estimates differ by {difference:.3e} after {nodes} nodes")]
    QuadratureAccuracy { difference: f64, nodes: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed trajectory: {0}")]
    Trajectory(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("serialization failed: {0}")]
    Serialize(String),
}
