use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{Electrode, Layout, Rect, Role};

// Corner term of the solid-angle integral, with the limits for infinite edges.
fn corner(x: f64, y: f64, z: f64) -> f64 {
    match (x.is_infinite(), y.is_infinite()) {
        (false, false) => (x * y).atan2(z * (x * x + y * y + z * z).sqrt()),
        (true, false) => x.signum() * (y / z).atan(),
        (false, true) => y.signum() * (x / z).atan(),
        (true, true) => x.signum() * y.signum() * PI / 2.0,
    }
}

/// Potential of a unit-potential rectangle in an otherwise grounded plane:
/// subtended solid angle / 2π. Coordinates in µm, z > 0.
pub fn rect_potential(r: &Rect, p: &Vector3<f64>) -> f64 {
    let (x0, x1) = (r.x0 - p.x, r.x1 - p.x);
    let (y0, y1) = (r.y0 - p.y, r.y1 - p.y);
    let z = p.z;
    (corner(x1, y1, z) - corner(x0, y1, z) - corner(x1, y0, z) + corner(x0, y0, z)) / (2.0 * PI)
}

fn check_point(p: &Vector3<f64>) -> Result<()> {
    if p.z > 0.0 && p.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::BadPoint { point: [p.x, p.y, p.z], reason: "not above the electrode plane".into() })
    }
}

/// Gapless-plane basis potential of an electrode at `p` (dimensionless).
pub fn electrode_basis_potential(e: &Electrode, p: &Vector3<f64>) -> Result<f64> {
    check_point(p)?;
    Ok(e.rects().iter().map(|r| rect_potential(r, p)).sum())
}

/// Sum of trap-plane electrode potentials weighted by per-electrode volts.
pub(crate) fn weighted_potential(terms: &[(&Electrode, f64)], p: &Vector3<f64>) -> f64 {
    terms.iter().map(|(e, v)| v * e.rects().iter().map(|r| rect_potential(r, p)).sum::<f64>()).sum()
}

/// Finite-difference step for a point at height z (µm): max(10 nm, 1e-4·z).
pub fn fd_step(z: f64) -> f64 {
    (1e-4 * z).max(1e-2)
}

/// Summed basis potential of the trap-plane RF electrodes.
pub struct RfBasis<'a> {
    electrodes: Vec<&'a Electrode>,
}

impl<'a> RfBasis<'a> {
    pub fn new(layout: &'a Layout) -> Self {
        Self { electrodes: layout.surface(Role::RF).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.electrodes.is_empty()
    }

    pub fn potential(&self, p: &Vector3<f64>) -> f64 {
        self.electrodes.iter().map(|e| e.rects().iter().map(|r| rect_potential(r, p)).sum::<f64>()).sum()
    }

    /// ∇φ per µm by central differences.
    pub fn gradient(&self, p: &Vector3<f64>) -> Result<Vector3<f64>> {
        check_point(p)?;
        let h = fd_step(p.z);
        if p.z - h <= 0.0 {
            return Err(Error::BadPoint { point: [p.x, p.y, p.z], reason: "too close to the plane".into() });
        }
        let mut g = Vector3::zeros();
        for k in 0..3 {
            let mut d = Vector3::zeros();
            d[k] = h;
            g[k] = (self.potential(&(p + d)) - self.potential(&(p - d))) / (2.0 * h);
        }
        Ok(g)
    }
}

/// Hessian (per µm²) of a scalar function by central differences.
pub(crate) fn hessian(f: &dyn Fn(&Vector3<f64>) -> f64, p: &Vector3<f64>, h: f64) -> nalgebra::Matrix3<f64> {
    let mut m = nalgebra::Matrix3::zeros();
    let f0 = f(p);
    for i in 0..3 {
        let mut di = Vector3::zeros();
        di[i] = h;
        m[(i, i)] = (f(&(p + di)) - 2.0 * f0 + f(&(p - di))) / (h * h);
        for j in (i + 1)..3 {
            let mut dj = Vector3::zeros();
            dj[j] = h;
            let v = (f(&(p + di + dj)) - f(&(p + di - dj)) - f(&(p - di + dj)) + f(&(p - di - dj))) / (4.0 * h * h);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Gradient (per µm) of a scalar function by central differences.
pub(crate) fn gradient(f: &dyn Fn(&Vector3<f64>) -> f64, p: &Vector3<f64>, h: f64) -> Vector3<f64> {
    let mut g = Vector3::zeros();
    for k in 0..3 {
        let mut d = Vector3::zeros();
        d[k] = h;
        g[k] = (f(&(p + d)) - f(&(p - d))) / (2.0 * h);
    }
    g
}
