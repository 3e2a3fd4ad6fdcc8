use nalgebra::Vector3;
use num_complex::Complex64;

use crate::constants::{MU_0, SIGMA_AU};
use crate::error::{Error, Result};
use crate::geometry::FilamentSet;

pub type CVec3 = Vector3<Complex64>;

/// Closest approach to a filament that is still evaluated (µm).
pub const SINGULAR_RADIUS_UM: f64 = 1e-3;

/// Anything that produces a complex field phasor (T) at a point given in µm.
pub trait FieldSource: Sync {
    fn field(&self, p: &Vector3<f64>) -> Result<CVec3>;
}

impl FieldSource for FilamentSet {
    fn field(&self, p: &Vector3<f64>) -> Result<CVec3> {
        field_at(self, p)
    }
}

/// Wraps a closure as a field source.
pub struct FnSource<F>(pub F);

impl<F: Fn(&Vector3<f64>) -> CVec3 + Sync> FieldSource for FnSource<F> {
    fn field(&self, p: &Vector3<f64>) -> Result<CVec3> {
        Ok((self.0)(p))
    }
}

/// Superposition of two sources.
pub struct Sum<'a>(pub &'a dyn FieldSource, pub &'a dyn FieldSource);

impl FieldSource for Sum<'_> {
    fn field(&self, p: &Vector3<f64>) -> Result<CVec3> {
        Ok(self.0.field(p)? + self.1.field(p)?)
    }
}

/// Biot–Savart sum over finite straight filaments (closed form per segment).
pub fn field_at(set: &FilamentSet, p: &Vector3<f64>) -> Result<CVec3> {
    let mut re = Vector3::zeros();
    let mut im = Vector3::zeros();
    for f in &set.filaments {
        let r1 = p - f.start;
        let r2 = p - f.end;
        let (n1, n2) = (r1.norm(), r2.norm());
        let c = r1.cross(&r2);
        let len = (f.end - f.start).norm();
        if len == 0.0 {
            continue;
        }
        let rho = c.norm() / len;
        let along = r1.dot(&(f.end - f.start)) / len;
        if (rho < SINGULAR_RADIUS_UM && along > -SINGULAR_RADIUS_UM && along < len + SINGULAR_RADIUS_UM)
            || n1 < SINGULAR_RADIUS_UM
            || n2 < SINGULAR_RADIUS_UM
        {
            return Err(Error::BadPoint { point: [p.x, p.y, p.z], reason: "within 1 nm of a filament".into() });
        }
        let denom = n1 * n2 * (n1 * n2 + r1.dot(&r2));
        if denom <= 0.0 {
            // on the extension of the line: no field
            continue;
        }
        let g = c * ((n1 + n2) / denom);
        re += g * f.current.re;
        im += g * f.current.im;
    }
    // µ0/4π with lengths in µm
    let k = MU_0 / (4.0 * std::f64::consts::PI) * 1e6;
    Ok(Vector3::new(Complex64::new(re.x, im.x), Complex64::new(re.y, im.y), Complex64::new(re.z, im.z))
        * Complex64::new(k, 0.0))
}

/// Power-to-current convention: peak current sqrt(2P/R0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    pub power: f64,
    pub frequency: f64,
    /// Reference resistance (Ω).
    pub r0: f64,
}

impl DriveSpec {
    pub const DEFAULT_R0: f64 = 50.0;

    pub fn new(power: f64, frequency: f64) -> Self {
        Self { power, frequency, r0: Self::DEFAULT_R0 }
    }

    pub fn current(&self) -> f64 {
        (2.0 * self.power / self.r0).sqrt()
    }

    /// The set with its drive rescaled to this spec's current (phase kept).
    pub fn apply(&self, set: &FilamentSet) -> FilamentSet {
        let d = set.drive.norm();
        let factor = if d > 0.0 { self.current() / d } else { 0.0 };
        set.scaled(Complex64::new(factor, 0.0))
    }
}

/// Skin depth sqrt(2/(ωµ0σ)) in µm.
pub fn skin_depth_um(frequency: f64, sigma: f64) -> f64 {
    (2.0 / (2.0 * std::f64::consts::PI * frequency * MU_0 * sigma)).sqrt() * 1e6
}

/// Skin depth of gold.
pub fn skin_depth_au_um(frequency: f64) -> f64 {
    skin_depth_um(frequency, SIGMA_AU)
}

/// Complex 3×3 Jacobian ∂B_i/∂x_j (T/m) by central differences with step `h` µm.
pub fn field_jacobian(src: &dyn FieldSource, p: &Vector3<f64>, h: f64) -> Result<[[Complex64; 3]; 3]> {
    let mut j = [[Complex64::new(0.0, 0.0); 3]; 3];
    for c in 0..3 {
        let mut dp = Vector3::zeros();
        dp[c] = h;
        let d = (src.field(&(p + dp))? - src.field(&(p - dp))?) / Complex64::new(2.0 * h * 1e-6, 0.0);
        for (i, row) in j.iter_mut().enumerate() {
            row[c] = d[i];
        }
    }
    Ok(j)
}

/// |∇·B|/|∇B| and |∇×B|/|∇B| at a point (Frobenius norm of the Jacobian).
pub fn field_law_ratios(src: &dyn FieldSource, p: &Vector3<f64>, h: f64) -> Result<(f64, f64)> {
    let j = field_jacobian(src, p, h)?;
    let norm = j.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok((0.0, 0.0));
    }
    let div = (j[0][0] + j[1][1] + j[2][2]).norm();
    let curl =
        ((j[2][1] - j[1][2]).norm_sqr() + (j[0][2] - j[2][0]).norm_sqr() + (j[1][0] - j[0][1]).norm_sqr()).sqrt();
    Ok((div / norm, curl / norm))
}
