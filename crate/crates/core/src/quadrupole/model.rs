use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Complex transverse field (B_x, B_z) in tesla.
pub type Field2 = [Complex64; 2];

/// 2D quadrupole near a field minimum. Angles in degrees, positions in µm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupoleParams {
    /// Residual field magnitude (T).
    pub b: f64,
    /// Gradient (T/m).
    pub b_grad: f64,
    pub alpha: f64,
    pub beta: f64,
    pub psi: f64,
    pub x0: f64,
    pub z0: f64,
    /// 1σ in the same order and units as [`QuadrupoleParams::to_array`].
    pub sigma: Option<[f64; 7]>,
}

pub const PARAM_NAMES: [&str; 7] = ["B", "B'", "alpha", "beta", "psi", "x0", "z0"];

/// Fold an angle into (−180°, 180°].
pub fn wrap_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

impl QuadrupoleParams {
    pub fn new(b: f64, b_grad: f64, alpha: f64, beta: f64, psi: f64, x0: f64, z0: f64) -> Result<Self> {
        if !(b >= 0.0) || !(b_grad > 0.0) {
            return Err(invalid("quadrupole", "need B ≥ 0 and B' > 0"));
        }
        let p =
            Self { b, b_grad, alpha: wrap_deg(alpha), beta: wrap_deg(beta), psi: wrap_deg(psi), x0, z0, sigma: None };
        if p.to_array().iter().any(|v| !v.is_finite()) {
            return Err(invalid("quadrupole", "parameters must be finite"));
        }
        Ok(p)
    }

    /// Simulation column: 1.47 µT, 54.8 T/m, 40.8°, 87.3°, 0.1°, (34.72, 0.73) µm.
    pub fn table_simulation() -> Self {
        Self::new(1.47e-6, 54.8, 40.8, 87.3, 0.1, 34.72, 0.73).unwrap()
    }

    /// Experiment column with B and α at zero.
    pub fn table_experiment() -> Self {
        let mut p = Self::new(0.0, 54.8, 0.0, 86.8, 1.5, 34.62, 0.6).unwrap();
        p.sigma = Some([f64::NAN, 1.2, f64::NAN, 1.7, 7.6, 0.05, 0.7]);
        p
    }

    /// (B, B′, α, β, ψ, x0, z0) in (T, T/m, deg, deg, deg, µm, µm).
    pub fn to_array(&self) -> [f64; 7] {
        [self.b, self.b_grad, self.alpha, self.beta, self.psi, self.x0, self.z0]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self { b: a[0], b_grad: a[1], alpha: a[2], beta: a[3], psi: a[4], x0: a[5], z0: a[6], sigma: None }
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x0, self.z0)
    }

    /// Field at the given B′ scaled by `s` in amplitude (power × s²).
    pub fn scaled(&self, s: f64) -> Self {
        Self { b: self.b * s, b_grad: self.b_grad * s, ..*self }
    }
}

impl fmt::Display for QuadrupoleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals = [self.b * 1e6, self.b_grad, self.alpha, self.beta, self.psi, self.x0, self.z0];
        let units = ["µT", "T/m", "deg", "deg", "deg", "µm", "µm"];
        let sig = self.sigma.map(|s| {
            let mut s = s;
            s[0] *= 1e6;
            s
        });
        writeln!(f, "{:<8} {:>12} {:>10}  unit", "param", "value", "1σ")?;
        for k in 0..7 {
            let s = match sig {
                Some(s) if s[k].is_finite() => format!("{:.4}", s[k]),
                _ => "-".into(),
            };
            writeln!(f, "{:<8} {:>12.4} {:>10}  {}", PARAM_NAMES[k], vals[k], s, units[k])?;
        }
        Ok(())
    }
}

/// Field at (x, z) µm: B′·[e^{−iψ/2}(cβ u + sβ v), e^{iψ/2}(sβ u − cβ v)] + B e^{iψ}(cos α, sin α)
/// with (u, v) = r − r0. At ψ = 0 the gradient part is B′·M(β)(r − r0) with
/// M(β) = [[cos β, sin β], [sin β, −cos β]]; |gradient part| = B′|r − r0| for any ψ.
pub fn eval_quadrupole(p: &QuadrupoleParams, point: (f64, f64)) -> Field2 {
    let (u, v) = ((point.0 - p.x0) * 1e-6, (point.1 - p.z0) * 1e-6);
    let (sb, cb) = p.beta.to_radians().sin_cos();
    let (sa, ca) = p.alpha.to_radians().sin_cos();
    let psi = p.psi.to_radians();
    let e = Complex64::from_polar(1.0, psi);
    let h = Complex64::from_polar(1.0, psi / 2.0);
    let q0 = h.conj() * (p.b_grad * (cb * u + sb * v));
    let q1 = h * (p.b_grad * (sb * u - cb * v));
    [q0 + e * (p.b * ca), q1 + e * (p.b * sa)]
}

pub fn field_norm(f: &Field2) -> f64 {
    (f[0].norm_sqr() + f[1].norm_sqr()).sqrt()
}
