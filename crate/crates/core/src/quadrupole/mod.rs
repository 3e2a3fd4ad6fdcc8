//! Seven-parameter 2D quadrupole model of the microwave field near its
//! minimum: evaluation, least-squares fitting and the residual-field bound.

mod bound;
mod experiment;
mod fit;
mod io;
mod model;

pub use bound::{bound_residual_field, ProbeDrive};
pub use experiment::{monte_carlo, MonteCarloSummary, ShiftExperiment};
pub use fit::{fit_quadrupole, FitOptions, FitReport, Samples, ShiftChannel, ShiftSample};
pub use io::{samples_from_csv, samples_to_csv};
pub use model::{eval_quadrupole, field_norm, wrap_deg, Field2, QuadrupoleParams, PARAM_NAMES};
