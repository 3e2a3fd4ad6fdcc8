use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2, Vector3};

use super::basis::{electrode_basis_potential, fd_step, gradient, hessian, weighted_potential, RfBasis};
use crate::constants::{be9_ion_mass, E_CHARGE};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Layout, Role};

/// DC range of the voltage supply (V).
pub const DC_LIMIT_V: f64 = 26.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfDrive {
    /// rad/s
    pub omega: f64,
    /// V
    pub amplitude: f64,
}

impl RfDrive {
    pub fn new(omega: f64, amplitude: f64) -> Result<Self> {
        if !(omega > 0.0 && amplitude > 0.0) {
            return Err(invalid("rf drive", "frequency and amplitude must be positive"));
        }
        Ok(Self { omega, amplitude })
    }

    /// 176.5 MHz, 100 V.
    pub fn reference() -> Self {
        Self { omega: 2.0 * std::f64::consts::PI * 176.5e6, amplitude: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub name: String,
    pub mass: f64,
    pub charge: f64,
}

impl IonSpecies {
    pub fn be9() -> Self {
        Self { name: "9Be+".into(), mass: be9_ion_mass(), charge: E_CHARGE }
    }
}

/// Pseudopotential evaluator for one layout, drive and ion.
pub struct Pseudo<'a> {
    basis: RfBasis<'a>,
    /// eV per (1/µm)² of |∇φ|².
    scale: f64,
}

impl<'a> Pseudo<'a> {
    pub fn new(layout: &'a Layout, drive: &RfDrive, ion: &IonSpecies) -> Result<Self> {
        let basis = RfBasis::new(layout);
        if basis.is_empty() {
            return Err(invalid("layout", "no RF electrode in the trap plane"));
        }
        let q = ion.charge;
        let scale = q * q * drive.amplitude.powi(2) / (4.0 * ion.mass * drive.omega.powi(2)) * 1e12 / E_CHARGE;
        Ok(Self { basis, scale })
    }

    /// Pseudopotential energy in eV at `p` (µm).
    pub fn energy(&self, p: &Vector3<f64>) -> Result<f64> {
        Ok(self.basis.gradient(p)?.norm_squared() * self.scale)
    }

    /// ∂φ_RF/∂(x, z) per µm at y = 0 plane point.
    fn field_xz(&self, x: f64, y: f64, z: f64) -> Result<Vector2<f64>> {
        let g = self.basis.gradient(&Vector3::new(x, y, z))?;
        Ok(Vector2::new(g.x, g.z))
    }
}

/// q²|∇Φ_RF|²V²/(4mΩ²) in eV; gradient by central differences with step max(10 nm, 1e-4·z).
pub fn rf_pseudopotential(layout: &Layout, drive: &RfDrive, ion: &IonSpecies, p: &Vector3<f64>) -> Result<f64> {
    Pseudo::new(layout, drive, ion)?.energy(p)
}

fn nelder_mead(f: &dyn Fn(Vector2<f64>) -> f64, start: Vector2<f64>, step: f64, iters: usize) -> Vector2<f64> {
    let mut s = [start, start + Vector2::new(step, 0.0), start + Vector2::new(0.0, step)];
    let mut v = s.map(f);
    for _ in 0..iters {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        s = idx.map(|i| s[i]);
        v = idx.map(|i| v[i]);
        if (s[2] - s[0]).norm() < 1e-6 {
            break;
        }
        let c = (s[0] + s[1]) / 2.0;
        let r = c + (c - s[2]);
        let fr = f(r);
        if fr < v[0] {
            let e = c + (c - s[2]) * 2.0;
            let fe = f(e);
            if fe < fr {
                s[2] = e;
                v[2] = fe;
            } else {
                s[2] = r;
                v[2] = fr;
            }
        } else if fr < v[1] {
            s[2] = r;
            v[2] = fr;
        } else {
            let k = c + (s[2] - c) * 0.5;
            let fk = f(k);
            if fk < v[2] {
                s[2] = k;
                v[2] = fk;
            } else {
                for i in 1..3 {
                    s[i] = s[0] + (s[i] - s[0]) * 0.5;
                    v[i] = f(s[i]);
                }
            }
        }
    }
    s[0]
}

/// RF null (x1, z1) in µm at y = 0: Nelder–Mead on the pseudopotential seeded at
/// (0, height_guess), polished by Newton steps on the RF field.
pub fn find_rf_null(layout: &Layout, drive: &RfDrive, ion: &IonSpecies, height_guess: f64) -> Result<(f64, f64)> {
    if !(height_guess > 0.0) {
        return Err(invalid("height_guess", "must be positive"));
    }
    let pseudo = Pseudo::new(layout, drive, ion)?;
    let cost = |v: Vector2<f64>| {
        if v.y <= 0.1 {
            return f64::INFINITY;
        }
        pseudo.energy(&Vector3::new(v.x, 0.0, v.y)).unwrap_or(f64::INFINITY)
    };
    let mut p = nelder_mead(&cost, Vector2::new(0.0, height_guess), 0.1 * height_guess, 2000);
    let max_newton = 50;
    let mut done = false;
    for _ in 0..max_newton {
        let e = pseudo.field_xz(p.x, 0.0, p.y)?;
        let h = 1e-3 * p.y.max(1.0);
        let jx = (pseudo.field_xz(p.x + h, 0.0, p.y)? - pseudo.field_xz(p.x - h, 0.0, p.y)?) / (2.0 * h);
        let jz = (pseudo.field_xz(p.x, 0.0, p.y + h)? - pseudo.field_xz(p.x, 0.0, p.y - h)?) / (2.0 * h);
        let j = Matrix2::from_columns(&[jx, jz]);
        let step = j.try_inverse().map(|inv| -(inv * e)).unwrap_or_else(Vector2::zeros);
        p += step;
        if step.norm() < 1e-10 * p.y.max(1.0) {
            done = true;
            break;
        }
    }
    if !done || p.y <= 0.0 {
        return Err(Error::NoConvergence { what: "RF null".into(), iterations: max_newton });
    }
    let e0 = pseudo.field_xz(p.x, 0.0, p.y)?.norm();
    let e1 = pseudo.field_xz(p.x, 0.0, p.y + 1.0)?.norm();
    if e0 > 1e-4 * e1 {
        return Err(Error::NoConvergence { what: "RF null residual".into(), iterations: max_newton });
    }
    // a saddle of |E|² has a pseudopotential Hessian that is not positive
    let hs = hessian(&|q| pseudo.energy(q).unwrap_or(f64::INFINITY), &Vector3::new(p.x, 0.0, p.y), 0.05);
    if hs[(0, 0)] <= 0.0 || hs[(2, 2)] <= 0.0 || hs[(0, 0)] * hs[(2, 2)] - hs[(0, 2)].powi(2) <= 0.0 {
        return Err(Error::NotMinimum(format!("RF field zero at ({:.3}, {:.3}) µm is a saddle", p.x, p.y)));
    }
    Ok((p.x, p.y))
}

/// Per-electrode DC voltages (V).
pub type Voltages = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct TrapCharacterization {
    /// (x1, z1) µm
    pub rf_null: (f64, f64),
    /// Position of the total-potential minimum (µm).
    pub minimum: Vector3<f64>,
    /// (ω_ax, ω_LF, ω_HF) rad/s
    pub frequencies: [f64; 3],
    /// HF mode direction vs the x-axis in the x–z plane (deg, (−90, 90]).
    pub hf_angle_deg: f64,
    pub lf_angle_deg: f64,
    /// RF-only pseudopotential depth (eV).
    pub depth: f64,
    pub warnings: Vec<String>,
}

fn dc_terms<'a>(layout: &'a Layout, v: &Voltages) -> Result<Vec<(&'a crate::geometry::Electrode, f64)>> {
    let mut terms = Vec::new();
    for (id, &volts) in v {
        let e = layout.electrode(id).ok_or_else(|| invalid("dc voltages", format!("unknown electrode `{id}`")))?;
        if e.role == Role::RF {
            return Err(invalid("dc voltages", format!("`{id}` is an RF electrode")));
        }
        if e.layer == layout.top_layer() {
            terms.push((e, volts));
        }
    }
    Ok(terms)
}

fn fold_angle(mut a: f64) -> f64 {
    while a <= -90.0 {
        a += 180.0;
    }
    while a > 90.0 {
        a -= 180.0;
    }
    a
}

/// Total potential energy in eV: pseudopotential plus q·Σ V_i φ_i.
pub struct TotalPotential<'a> {
    pseudo: Pseudo<'a>,
    dc: Vec<(&'a crate::geometry::Electrode, f64)>,
    charge_e: f64,
}

impl<'a> TotalPotential<'a> {
    pub fn new(layout: &'a Layout, drive: &RfDrive, dc: &Voltages, ion: &IonSpecies) -> Result<Self> {
        Ok(Self {
            pseudo: Pseudo::new(layout, drive, ion)?,
            dc: dc_terms(layout, dc)?,
            charge_e: ion.charge / E_CHARGE,
        })
    }

    pub fn energy(&self, p: &Vector3<f64>) -> f64 {
        self.pseudo.energy(p).unwrap_or(f64::INFINITY) + self.charge_e * weighted_potential(&self.dc, p)
    }
}

/// Secular frequencies and mode directions from the Hessian of the total
/// potential at its minimum next to the RF null.
pub fn secular_analysis(
    layout: &Layout,
    drive: &RfDrive,
    dc: &Voltages,
    ion: &IonSpecies,
) -> Result<TrapCharacterization> {
    let null = find_rf_null(layout, drive, ion, 35.0)?;
    secular_analysis_at(layout, drive, dc, ion, null)
}

/// As [`secular_analysis`] with a known RF null.
pub fn secular_analysis_at(
    layout: &Layout,
    drive: &RfDrive,
    dc: &Voltages,
    ion: &IonSpecies,
    null: (f64, f64),
) -> Result<TrapCharacterization> {
    let total = TotalPotential::new(layout, drive, dc, ion)?;
    let f = |p: &Vector3<f64>| total.energy(p);
    let mut p = Vector3::new(null.0, 0.0, null.1);
    let h = 10.0 * fd_step(null.1);
    for _ in 0..50 {
        let g = gradient(&f, &p, h);
        let hs = hessian(&f, &p, h);
        let step = hs.try_inverse().map(|inv| -(inv * g)).unwrap_or_else(Vector3::zeros);
        let n = step.norm();
        p += if n > 2.0 { step * (2.0 / n) } else { step };
        if n < 1e-9 {
            break;
        }
    }
    let hs: Matrix3<f64> = hessian(&f, &p, h);
    // eV/µm² → J/m²
    let k = hs * (E_CHARGE * 1e12);
    let eig = k.symmetric_eigen();
    let axial =
        (0..3).max_by(|&a, &b| eig.eigenvectors[(1, a)].abs().total_cmp(&eig.eigenvectors[(1, b)].abs())).unwrap();
    for i in 0..3 {
        if eig.eigenvalues[i] <= 0.0 {
            let v = eig.eigenvectors.column(i);
            let axis = if i == axial {
                "axial".to_string()
            } else {
                format!("radial ({:.2}, {:.2}, {:.2})", v[0], v[1], v[2])
            };
            return Err(Error::Unstable { axis, curvature: eig.eigenvalues[i] });
        }
    }
    let mut radial: Vec<usize> = (0..3).filter(|&i| i != axial).collect();
    radial.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let omega = |i: usize| (eig.eigenvalues[i] / ion.mass).sqrt();
    let angle = |i: usize| fold_angle(eig.eigenvectors[(2, i)].atan2(eig.eigenvectors[(0, i)]).to_degrees());
    let mut warnings = Vec::new();
    for (id, v) in dc {
        if v.abs() > DC_LIMIT_V {
            warnings.push(format!("{id} at {v:.2} V exceeds ±{DC_LIMIT_V} V"));
        }
    }
    let depth = trap_depth_at(layout, drive, ion, null)?;
    if depth.lower_bound {
        warnings.push("trap depth is a lower bound (escape path reached the search boundary)".into());
    }
    Ok(TrapCharacterization {
        rf_null: null,
        minimum: p,
        frequencies: [omega(axial), omega(radial[0]), omega(radial[1])],
        hf_angle_deg: angle(radial[1]),
        lf_angle_deg: angle(radial[0]),
        depth: depth.depth,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthReport {
    /// eV
    pub depth: f64,
    /// Saddle position (x, z) µm.
    pub saddle: (f64, f64),
    /// The escape path left the search domain before an interior saddle was found.
    pub lower_bound: bool,
}

/// Search domain and resolution for the escape-saddle search (µm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthSearch {
    pub half_width: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub resolution: f64,
}

impl DepthSearch {
    pub fn around(null: (f64, f64)) -> Self {
        Self { half_width: 4.0 * null.1, z_min: 0.15 * null.1, z_max: 6.0 * null.1, resolution: null.1 / 70.0 }
    }
}

/// Trap depth as the lowest barrier between the null and the domain boundary,
/// found by flooding the pseudopotential on an x–z grid from the null.
pub fn trap_depth(layout: &Layout, drive: &RfDrive, ion: &IonSpecies) -> Result<DepthReport> {
    let null = find_rf_null(layout, drive, ion, 35.0)?;
    trap_depth_at(layout, drive, ion, null)
}

pub fn trap_depth_at(layout: &Layout, drive: &RfDrive, ion: &IonSpecies, null: (f64, f64)) -> Result<DepthReport> {
    trap_depth_with(layout, drive, ion, null, &DepthSearch::around(null))
}

pub fn trap_depth_with(
    layout: &Layout,
    drive: &RfDrive,
    ion: &IonSpecies,
    null: (f64, f64),
    s: &DepthSearch,
) -> Result<DepthReport> {
    use rayon::prelude::*;
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let pseudo = Pseudo::new(layout, drive, ion)?;
    let nx = (2.0 * s.half_width / s.resolution).round() as usize + 1;
    let nz = ((s.z_max - s.z_min) / s.resolution).round() as usize + 1;
    let xs: Vec<f64> = (0..nx).map(|i| null.0 - s.half_width + i as f64 * s.resolution).collect();
    let zs: Vec<f64> = (0..nz).map(|k| s.z_min + k as f64 * s.resolution).collect();
    let u: Vec<f64> = (0..nx * nz)
        .into_par_iter()
        .map(|idx| pseudo.energy(&Vector3::new(xs[idx / nz], 0.0, zs[idx % nz])).unwrap_or(f64::INFINITY))
        .collect();
    let u0 = pseudo.energy(&Vector3::new(null.0, 0.0, null.1))?;
    let start = {
        let i = ((null.0 - xs[0]) / s.resolution).round() as usize;
        let k = ((null.1 - zs[0]) / s.resolution).round() as usize;
        i.min(nx - 1) * nz + k.min(nz - 1)
    };
    // key: energies are non-negative, so their bit patterns order like the values
    let mut heap = BinaryHeap::new();
    let mut seen = vec![false; nx * nz];
    heap.push(Reverse((u[start].to_bits(), start)));
    seen[start] = true;
    let (mut level, mut level_at) = (u[start], start);
    while let Some(Reverse((bits, idx))) = heap.pop() {
        let e = f64::from_bits(bits);
        if e > level {
            level = e;
            level_at = idx;
        }
        let (i, k) = (idx / nz, idx % nz);
        if i == 0 || k == 0 || i == nx - 1 || k == nz - 1 {
            let (si, sk) = (level_at / nz, level_at % nz);
            let on_edge = si == 0 || sk == 0 || si == nx - 1 || sk == nz - 1;
            return Ok(DepthReport { depth: level - u0, saddle: (xs[si], zs[sk]), lower_bound: on_edge });
        }
        for (di, dk) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
            let j = ((i as i64 + di) as usize) * nz + (k as i64 + dk) as usize;
            if !seen[j] {
                seen[j] = true;
                heap.push(Reverse((u[j].to_bits(), j)));
            }
        }
    }
    Err(Error::NoConvergence { what: "escape saddle".into(), iterations: nx * nz })
}

/// Target secular frequencies (Hz) and HF mode angle (deg).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularTargets {
    pub f_ax: f64,
    pub f_lf: f64,
    pub f_hf: f64,
    pub hf_angle_deg: f64,
}

impl SecularTargets {
    /// 4.12, 5.6 and 9.33 MHz with the HF mode at −5.9°.
    pub fn reference() -> Self {
        Self { f_ax: 4.12e6, f_lf: 5.6e6, f_hf: 9.33e6, hf_angle_deg: -5.9 }
    }
}

/// DC voltage set that keeps the total minimum on the RF null and sets the
/// axial curvature and the radial splitting and tilt. The radial sum is fixed
/// by the RF curvature and Laplace's equation. Position conditions are held
/// with a large weight; the curvature conditions are traded against the
/// voltage norm until every |V| fits within `max_voltage`.
pub fn calibrate_dc(
    layout: &Layout,
    drive: &RfDrive,
    ion: &IonSpecies,
    null: (f64, f64),
    targets: &SecularTargets,
    max_voltage: f64,
) -> Result<Voltages> {
    if !(max_voltage > 0.0) {
        return Err(invalid("max_voltage", "must be positive"));
    }
    let p = Vector3::new(null.0, 0.0, null.1);
    let h = 10.0 * fd_step(null.1);
    let pseudo = Pseudo::new(layout, drive, ion)?;
    let krf = hessian(&|q| pseudo.energy(q).unwrap_or(f64::INFINITY), &p, h);
    let dcs: Vec<_> = layout.surface(Role::DC).collect();
    if dcs.is_empty() {
        return Err(invalid("layout", "no DC electrodes"));
    }
    let q = ion.charge / E_CHARGE;
    // curvatures in eV/µm²
    let to_ev = |f: f64| ion.mass * (2.0 * std::f64::consts::PI * f).powi(2) / (E_CHARGE * 1e12);
    let (kax, dk) = (to_ev(targets.f_ax), to_ev(targets.f_hf) - to_ev(targets.f_lf));
    let th = targets.hf_angle_deg.to_radians();
    let want_diff = dk * (2.0 * th).cos() - (krf[(0, 0)] - krf[(2, 2)]);
    let want_xz = 0.5 * dk * (2.0 * th).sin() - krf[(0, 2)];
    let n = dcs.len();
    let mut a = DMatrix::zeros(8, n);
    for (c, e) in dcs.iter().enumerate() {
        let f = |x: &Vector3<f64>| electrode_basis_potential(e, x).unwrap_or(0.0) * q;
        let g = gradient(&f, &p, h);
        let hs = hessian(&f, &p, h);
        let col = [g.x, g.y, g.z, hs[(0, 1)], hs[(1, 2)], hs[(1, 1)], hs[(0, 0)] - hs[(2, 2)], hs[(0, 2)]];
        for (r, v) in col.iter().enumerate() {
            a[(r, c)] = *v;
        }
    }
    let mut b = DVector::from_column_slice(&[0.0, 0.0, 0.0, 0.0, 0.0, kax, want_diff, want_xz]);
    // position rows: unit-normalised and heavily weighted; curvature rows relative to kax
    for r in 0..8 {
        let w = if r < 5 { 1e3 / a.row(r).norm().max(1e-300) } else { 1.0 / kax };
        a.row_mut(r).scale_mut(w);
        b[r] *= w;
    }
    let svd = a.svd(true, true);
    let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let smax = svd.singular_values.max();
    let ub = u.transpose() * &b;
    // Tikhonov filter on the SVD; lambda = 0 gives the minimum-norm solution
    let solve = |lambda: f64| -> DVector<f64> {
        let mut v = DVector::zeros(n);
        for (i, &sv) in svd.singular_values.iter().enumerate() {
            if sv > 1e-12 * smax {
                v += vt.row(i).transpose() * (ub[i] * sv / (sv * sv + lambda));
            }
        }
        v
    };
    let peak = |v: &DVector<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut v = solve(0.0);
    if peak(&v) > max_voltage {
        let (mut lo, mut hi) = (1e-16 * smax * smax, 1e3 * smax * smax);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if peak(&solve(mid)) > max_voltage {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo < 1.0 + 1e-9 {
                break;
            }
        }
        v = solve(hi);
    }
    Ok(dcs.iter().zip(v.iter()).map(|(e, &x)| (e.id.clone(), x)).collect())
}
