//! Spectral boundary-integral toolkit for the two-dimensional Peskin problem
//! with viscosity contrast.
//!
//! A closed elastic filament sits in two-phase Stokes flow. Its position is
//! stored as a truncated Fourier series, the force it exerts on the fluid is
//! obtained from a second-kind Nyström solve, and the curve is advanced with
//! an exponential integrator in the coordinates that diagonalize the
//! linearized dynamics. The crate also evaluates the explicit constants that
//! bound the admissible size of the initial deviation from a circle, audits
//! trajectories against the resulting energy and decay certificates, and
//! checks the oscillatory multiplier integrals that those bounds rely on.
//!
//! Module map:
//!
//! * [`spectral`]: Fourier curves, multipliers, weighted Wiener norms, the
//!   change of variables to diagonal coordinates, circle decomposition and
//!   geometric diagnostics.
//! * [`kernels`]: Stokeslet, stress kernel, spectral log convolution and
//!   off-curve velocity evaluation.
//! * [`force`]: the elastic force, the Nyström discretization of the stress
//!   jump operator and the force solve.
//! * [`evolution`]: curve velocity, nonlinear remainder, time stepping and
//!   trajectory recording.
//! * [`constants`]: the closed-form constants ledger, the medium-size
//!   threshold and trajectory certificates.
//! * [`multiplier`]: the multiplier `m(k, eta)` and the integrals `I_n`,
//!   `I'_n`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
pub mod constants;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod force;
pub mod io;
pub mod kernels;
pub mod multiplier;
pub mod spectral;

pub use error::{PeskinError, Result};

use nalgebra::Vector2;
use num_complex::Complex64;

/// Complex scalar used for Fourier coefficients.
pub type C64 = Complex64;
/// Real planar vector.
pub type Vec2 = Vector2<f64>;
/// Complex 2-vector: one Fourier coefficient of a planar curve.
pub type CVec2 = Vector2<C64>;
