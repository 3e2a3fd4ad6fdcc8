use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use super::biot_savart::{CVec3, DriveSpec, FieldSource};
use crate::error::{invalid, Result};
use crate::geometry::FilamentSet;

/// Regular x–z grid at fixed y (µm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x: (f64, f64, usize),
    pub z: (f64, f64, usize),
    pub y: f64,
}

impl GridSpec {
    pub fn new(x: (f64, f64, usize), z: (f64, f64, usize), y: f64) -> Result<Self> {
        for (name, (a, b, n)) in [("x", x), ("z", z)] {
            if n == 0 || (n > 1 && !(b > a)) {
                return Err(invalid(name, "grid range must be increasing with at least one step"));
            }
        }
        Ok(Self { x, z, y })
    }

    /// Single node grid.
    pub fn point(x: f64, z: f64, y: f64) -> Self {
        Self { x: (x, x, 1), z: (z, z, 1), y }
    }

    fn axis((a, b, n): (f64, f64, usize), i: usize) -> f64 {
        if n == 1 {
            a
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    }

    pub fn len(&self) -> usize {
        self.x.2 * self.z.2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node positions, x-major (all z for the first x, then the next x).
    pub fn nodes(&self) -> Vec<Vector3<f64>> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.x.2 {
            for k in 0..self.z.2 {
                out.push(Vector3::new(Self::axis(self.x, i), self.y, Self::axis(self.z, k)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub grid: GridSpec,
    pub samples: Vec<CVec3>,
    pub drive: DriveSpec,
}

/// Evaluates any field source on a grid (parallel over nodes).
pub fn sample_source(src: &dyn FieldSource, grid: &GridSpec, drive: DriveSpec) -> Result<FieldMap> {
    if !(drive.power > 0.0) {
        return Err(invalid("power", "must be positive"));
    }
    let samples = grid.nodes().par_iter().map(|p| src.field(p)).collect::<Result<Vec<_>>>()?;
    Ok(FieldMap { grid: *grid, samples, drive })
}

/// Field map of a filament set driven at `drive` (currents rescaled to sqrt(2P/R0)).
pub fn field_map(set: &FilamentSet, grid: &GridSpec, drive: DriveSpec) -> Result<FieldMap> {
    sample_source(&drive.apply(set), grid, drive)
}

impl FieldMap {
    pub fn nodes(&self) -> Vec<Vector3<f64>> {
        self.grid.nodes()
    }

    /// sqrt(Σ|B_c|²) per node (T).
    pub fn magnitudes(&self) -> Vec<f64> {
        self.samples.iter().map(|b| b.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()).collect()
    }

    /// Copy with every sample scaled for a different drive power.
    pub fn at_power(&self, power: f64) -> FieldMap {
        let f = Complex64::new((power / self.drive.power).sqrt(), 0.0);
        FieldMap {
            grid: self.grid,
            samples: self.samples.iter().map(|b| b * f).collect(),
            drive: DriveSpec { power, ..self.drive },
        }
    }

    /// CSV body (no preamble): `x_um,z_um,ReBx,ImBx,ReBy,ImBy,ReBz,ImBz`.
    pub fn to_csv_rows(&self) -> String {
        let mut s = String::from("x_um,z_um,ReBx,ImBx,ReBy,ImBy,ReBz,ImBz\n");
        for (p, b) in self.nodes().iter().zip(&self.samples) {
            s.push_str(&format!(
                "{},{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                p.x, p.z, b.x.re, b.x.im, b.y.re, b.y.im, b.z.re, b.z.im
            ));
        }
        s
    }

    /// Preamble lines describing the drive.
    pub fn preamble(&self) -> Vec<String> {
        vec![
            format!("power_w = {}", self.drive.power),
            format!("frequency_hz = {}", self.drive.frequency),
            format!("r0_ohm = {}", self.drive.r0),
            format!("y_um = {}", self.grid.y),
        ]
    }
}
