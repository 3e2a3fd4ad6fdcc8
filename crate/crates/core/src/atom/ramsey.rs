use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{invalid, Result};

/// Excited-state probability after a Ramsey sequence with ideal π/2 pulses,
/// a frequency shift `shift_hz` during `t` and second-pulse phase `phase`.
pub fn simulate_ramsey(shift_hz: f64, t: f64, phase: f64) -> f64 {
    0.5 * (1.0 + (2.0 * PI * shift_hz * t - phase).cos())
}

/// Recovers the shift from a scan of the second-pulse phase by a linear
/// sinusoid fit. Unambiguous for |shift·t| < 1/2.
pub fn fit_ramsey_phase_scan(phases: &[f64], probs: &[f64], t: f64) -> Result<f64> {
    if phases.len() != probs.len() || phases.len() < 3 {
        return Err(invalid("phase scan", "need at least 3 (phase, probability) pairs"));
    }
    if t <= 0.0 {
        return Err(invalid("t", "probe time must be positive"));
    }
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for (&p, &y) in phases.iter().zip(probs) {
        let row = Vector3::new(1.0, p.cos(), p.sin());
        ata += row * row.transpose();
        atb += row * y;
    }
    let c = ata.lu().solve(&atb).ok_or_else(|| invalid("phase scan", "phases do not span a full sinusoid"))?;
    Ok(c[2].atan2(c[1]) / (2.0 * PI * t))
}
