//! Inductive pickup on neighbouring microwave conductors and the effect of a
//! backreflected current on the quadrupole minimum.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::{discretize_conductor, DiscretizeOptions, FilamentSet, ReferenceTrap};
use crate::magnetostatics::{find_field_minimum, DriveSpec, FieldSource, MinimumReport, Sum};

/// Power coupled into a victim conductor (W).
pub fn coupled_power(s21_db: f64, input_power: f64) -> Result<f64> {
    if !(input_power > 0.0) {
        return Err(invalid("input_power", "must be positive"));
    }
    Ok(input_power * 10f64.powf(s21_db / 10.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec {
    /// Transmission from the meander into the victim (dB, ≤ 0).
    pub s21_db: f64,
    /// Power fed to the meander (W).
    pub input_power: f64,
    /// Amplitude fraction of the coupled current that is reflected back.
    pub fraction: f64,
    pub r0: f64,
}

impl CouplingSpec {
    pub fn new(s21_db: f64, input_power: f64, fraction: f64) -> Result<Self> {
        if !(s21_db <= 0.0) {
            return Err(invalid("s21_db", format!("must be ≤ 0 dB, got {s21_db}")));
        }
        if !(input_power > 0.0) {
            return Err(invalid("input_power", "must be positive"));
        }
        if !(0.0..=1.0).contains(&fraction) {
            return Err(invalid("fraction", format!("must lie in [0, 1], got {fraction}")));
        }
        Ok(Self { s21_db, input_power, fraction, r0: DriveSpec::DEFAULT_R0 })
    }

    /// −27.8 dB at 1 W with a single perfect backreflection.
    pub fn reference() -> Self {
        Self { s21_db: -27.8, input_power: 1.0, fraction: 1.0, r0: DriveSpec::DEFAULT_R0 }
    }

    /// Peak victim current (A) before the reflection phase.
    pub fn victim_current(&self) -> f64 {
        let pc = self.input_power * 10f64.powf(self.s21_db / 10.0);
        (2.0 * pc / self.r0).sqrt() * self.fraction
    }
}

/// Outcome of re-minimizing the field at one reflection phase.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseOutcome {
    Shifted {
        dx: f64,
        dz: f64,
        residual: f64,
        gradient: f64,
    },
    /// The perturbation destroyed the quadrupole minimum.
    Lost(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub phase_deg: f64,
    pub outcome: PhaseOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackreflectionSweep {
    pub unperturbed: MinimumReport,
    pub points: Vec<PhasePoint>,
}

impl BackreflectionSweep {
    /// Largest |(dx, dz)| over the phases that kept a minimum (µm).
    pub fn max_displacement(&self) -> f64 {
        self.shifted().map(|(_, dx, dz, _)| dx.hypot(dz)).fold(0.0, f64::max)
    }

    /// Fraction of surviving phases whose residual exceeds the unperturbed one.
    pub fn fraction_increased(&self) -> f64 {
        let all: Vec<_> = self.shifted().collect();
        if all.is_empty() {
            return 0.0;
        }
        all.iter().filter(|p| p.3 > self.unperturbed.residual).count() as f64 / all.len() as f64
    }

    /// (phase, dx, dz, residual) of every surviving phase.
    pub fn shifted(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.points.iter().filter_map(|p| match p.outcome {
            PhaseOutcome::Shifted { dx, dz, residual, .. } => Some((p.phase_deg, dx, dz, residual)),
            PhaseOutcome::Lost(_) => None,
        })
    }

    /// `phase_deg,dx_um,dz_um,residual_uT`; lost phases are written as NaN.
    pub fn to_csv_rows(&self) -> String {
        let mut s = String::from("phase_deg,dx_um,dz_um,residual_uT\n");
        for p in &self.points {
            match p.outcome {
                PhaseOutcome::Shifted { dx, dz, residual, .. } => {
                    s.push_str(&format!("{},{:.6e},{:.6e},{:.6e}\n", p.phase_deg, dx, dz, residual * 1e6))
                }
                PhaseOutcome::Lost(_) => s.push_str(&format!("{},NaN,NaN,NaN\n", p.phase_deg)),
            }
        }
        s
    }
}

/// Superposes victim currents sqrt(2P_c/R0)·fraction·e^{iφ} on the driven
/// meander and re-minimizes |B| for each phase. Victim sets are given per
/// ampere of drive; all victims carry the same reflected current.
pub fn backreflection_sweep(
    base: &FilamentSet,
    victims: &[FilamentSet],
    spec: &CouplingSpec,
    phases: &[f64],
    seed: (f64, f64),
) -> Result<BackreflectionSweep> {
    if phases.is_empty() {
        return Err(invalid("phases", "no phases given"));
    }
    if victims.is_empty() {
        return Err(invalid("victims", "no victim conductor given"));
    }
    let unperturbed = find_field_minimum(base, seed, 0.0)?;
    let amplitude = spec.victim_current();
    let points = phases
        .par_iter()
        .map(|&phase_deg| {
            let phi = phase_deg.rem_euclid(360.0).to_radians();
            let victim = victims
                .iter()
                .map(|v| v.scaled(Complex64::from_polar(amplitude / v.drive.norm(), phi)))
                .reduce(|a, b| a.merged(&b))
                .expect("at least one victim");
            let total = Sum(base as &dyn FieldSource, &victim);
            let outcome = match find_field_minimum(&total, (unperturbed.x0, unperturbed.z0), 0.0) {
                Ok(m) => PhaseOutcome::Shifted {
                    dx: m.x0 - unperturbed.x0,
                    dz: m.z0 - unperturbed.z0,
                    residual: m.residual,
                    gradient: m.gradient,
                },
                Err(e) => PhaseOutcome::Lost(e.to_string()),
            };
            PhasePoint { phase_deg, outcome }
        })
        .collect();
    Ok(BackreflectionSweep { unperturbed, points })
}

/// MWC2 of the reference trap as a unit-drive filament set.
pub fn reference_victim(trap: &ReferenceTrap, opts: &DiscretizeOptions) -> Result<FilamentSet> {
    discretize_conductor(&trap.mwc2_path()?, opts, Complex64::new(1.0, 0.0))
}
