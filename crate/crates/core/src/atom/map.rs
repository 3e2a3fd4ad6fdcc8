use rayon::prelude::*;

use super::hyperfine::{HyperfineModel, TransitionSpec};
use super::shift::{ShiftKernel, ShiftOptions};
use crate::error::{Error, Result};
use crate::magnetostatics::{DriveSpec, FieldMap, GridSpec};

/// Power step between the two probe settings of a mapping run (dB).
pub const POWER_STEP_DB: f64 = 3.0;

/// |AC Zeeman shift| on a field-map grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMap {
    pub grid: GridSpec,
    pub shift_hz: Vec<f64>,
    pub drive: DriveSpec,
    pub probe_hz: f64,
    pub transition: String,
    pub power_step_db: f64,
}

pub fn zeeman_shift_map(model: &HyperfineModel, t: &TransitionSpec, map: &FieldMap, drive_hz: f64) -> Result<ShiftMap> {
    if let Some(i) = map.samples.iter().position(|b| b.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())) {
        let p = map.nodes()[i];
        return Err(Error::BadPoint { point: [p.x, p.y, p.z], reason: "carrying a non-finite field".into() });
    }
    let k = ShiftKernel::new(model, t, drive_hz, ShiftOptions::default())?;
    Ok(ShiftMap {
        grid: map.grid,
        shift_hz: map.samples.par_iter().map(|b| k.shift(b).abs()).collect(),
        drive: map.drive,
        probe_hz: drive_hz,
        transition: t.to_string(),
        power_step_db: POWER_STEP_DB,
    })
}

impl ShiftMap {
    /// The same map at the higher probe setting (shift is linear in power).
    pub fn stepped(&self) -> ShiftMap {
        let f = 10f64.powf(self.power_step_db / 10.0);
        ShiftMap {
            shift_hz: self.shift_hz.iter().map(|s| s * f).collect(),
            drive: DriveSpec { power: self.drive.power * f, ..self.drive },
            ..self.clone()
        }
    }

    /// Node index and value of the smallest shift.
    pub fn minimum(&self) -> (usize, f64) {
        self.shift_hz.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap_or((0, f64::NAN))
    }

    pub fn to_csv_rows(&self) -> String {
        let mut s = String::from("x_um,z_um,shift_hz\n");
        for (p, v) in self.grid.nodes().iter().zip(&self.shift_hz) {
            s.push_str(&format!("{},{},{:e}\n", p.x, p.z, v));
        }
        s
    }

    pub fn preamble(&self) -> Vec<String> {
        vec![
            format!("transition = {}", self.transition),
            format!("probe_hz = {}", self.probe_hz),
            format!("power_w = {}", self.drive.power),
            format!("power_step_db = {}", self.power_step_db),
        ]
    }
}
