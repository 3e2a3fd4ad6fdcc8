use num_complex::Complex64;

use super::fit::ShiftChannel;
use super::model::QuadrupoleParams;
use crate::atom::{HyperfineModel, TransitionSpec};
use crate::error::{invalid, Error, Result};

/// Probe drive for a shift measurement: frequency and power relative to the
/// power the quadrupole fit refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeDrive {
    pub frequency_hz: f64,
    pub power_db: f64,
}

/// Largest residual field B (T, at the fit's reference power) consistent with
/// the smallest measured shift, taking the shift to sit at the field minimum
/// with α = 0.
pub fn bound_residual_field(
    min_shift_hz: f64,
    transition: &TransitionSpec,
    drive: &ProbeDrive,
    fit: &QuadrupoleParams,
    model: &HyperfineModel,
) -> Result<f64> {
    if !(min_shift_hz >= 0.0) {
        return Err(invalid("min_shift", "must be non-negative"));
    }
    if min_shift_hz == 0.0 {
        return Ok(0.0);
    }
    let ch = ShiftChannel::new(model, *transition, drive.frequency_hz, drive.power_db)?;
    let e = Complex64::from_polar(1.0, fit.psi.to_radians());
    // shift per T² of residual field
    let k = ch.shift(&[e, Complex64::new(0.0, 0.0)]).abs();
    let b = (min_shift_hz / k).sqrt();
    if !(k > 1e-3) || !b.is_finite() {
        return Err(Error::NoiseFloor(k));
    }
    Ok(b)
}
