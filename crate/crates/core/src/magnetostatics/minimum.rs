use nalgebra::{Matrix2, Matrix3x2, Vector2, Vector3};
use num_complex::Complex64;

use super::biot_savart::{field_jacobian, CVec3, FieldSource};
use crate::error::{Error, Result};

/// Quadrupole minimum of |B| in the x–z plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimumReport {
    /// µm
    pub x0: f64,
    /// µm
    pub z0: f64,
    /// |B| at the minimum (T).
    pub residual: f64,
    /// Largest singular value of the in-phase Jacobian (T/m).
    pub gradient: f64,
    /// Direction of the strongest field change in the x–z plane (deg, (−90, 90]).
    pub angle_deg: f64,
}

fn stack(b: &CVec3) -> [f64; 6] {
    [b.x.re, b.x.im, b.y.re, b.y.im, b.z.re, b.z.im]
}

fn cost(r: &[f64; 6]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes sqrt(Σ|B_c|²) over (x, z) at fixed y by damped Gauss–Newton.
/// The field is close to affine near a quadrupole minimum, so the normal
/// equations converge in a handful of steps.
pub fn find_field_minimum(src: &dyn FieldSource, seed: (f64, f64), y: f64) -> Result<MinimumReport> {
    let at = |x: f64, z: f64| src.field(&Vector3::new(x, y, z)).map(|b| stack(&b));
    let (mut x, mut z) = seed;
    let mut r = at(x, z)?;
    let mut c = cost(&r);
    let mut lambda = 1e-6;
    let h = 1e-3;
    let max_iter = 200;
    let mut converged = false;
    for _ in 0..max_iter {
        let rx = at(x + h, z)?;
        let rxm = at(x - h, z)?;
        let rz = at(x, z + h)?;
        let rzm = at(x, z - h)?;
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        for i in 0..6 {
            let j = Vector2::new((rx[i] - rxm[i]) / (2.0 * h), (rz[i] - rzm[i]) / (2.0 * h));
            jtj += j * j.transpose();
            jtr += j * r[i];
        }
        if jtj.trace() == 0.0 {
            return Err(Error::FlatLandscape(0.0));
        }
        let mut accepted = false;
        for _ in 0..30 {
            let a = jtj + Matrix2::from_diagonal(&jtj.diagonal()) * lambda;
            let step = match a.try_inverse() {
                Some(inv) => -(inv * jtr),
                None => break,
            };
            // keep steps inside a trust region of a few µm
            let n = step.norm();
            let step = if n > 5.0 { step * (5.0 / n) } else { step };
            let (nx, nz) = (x + step.x, z + step.y);
            let nr = at(nx, nz)?;
            let nc = cost(&nr);
            if nc <= c {
                let small = step.norm() < 1e-9 || (c - nc) <= 1e-15 * c;
                x = nx;
                z = nz;
                r = nr;
                c = nc;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if converged || !accepted {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "field minimum".into(), iterations: max_iter });
    }
    let (gradient, angle_deg) = in_phase_gradient(src, &Vector3::new(x, y, z))?;
    if gradient < 0.01 {
        return Err(Error::FlatLandscape(gradient));
    }
    Ok(MinimumReport { x0: x, z0: z, residual: c.sqrt(), gradient, angle_deg })
}

/// Largest singular value (T/m) and principal angle of the x–z Jacobian after
/// removing the global phase that maximizes its real part.
pub fn in_phase_gradient(src: &dyn FieldSource, p: &Vector3<f64>) -> Result<(f64, f64)> {
    let j = field_jacobian(src, p, 1e-2)?;
    let cols = [0usize, 2];
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for row in &j {
        for &k in &cols {
            a += row[k].re * row[k].re;
            b += row[k].im * row[k].im;
            c += row[k].re * row[k].im;
        }
    }
    let phi = 0.5 * (2.0 * c).atan2(a - b);
    let rot = Complex64::from_polar(1.0, -phi);
    let m = Matrix3x2::from_fn(|i, k| (j[i][cols[k]] * rot).re);
    let svd = m.svd(false, true);
    let (idx, s) =
        svd.singular_values.iter().enumerate().fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let v = svd.v_t.expect("requested").row(idx).transpose();
    let mut ang = v[1].atan2(v[0]).to_degrees();
    if ang <= -90.0 {
        ang += 180.0;
    } else if ang > 90.0 {
        ang -= 180.0;
    }
    Ok((s, ang))
}
