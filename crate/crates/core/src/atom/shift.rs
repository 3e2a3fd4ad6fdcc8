use nalgebra::{SMatrix, Vector3};
use num_complex::Complex64;

use super::hyperfine::{breit_rabi_levels, moment_operator, HyperfineModel, Levels, Polarization, TransitionSpec};
use crate::constants::H;
use crate::error::{Error, Result};

pub type CMat8 = SMatrix<Complex64, 8, 8>;

/// Drives closer than this to a coupled resonance are rejected (Hz).
pub const GUARD_BAND_HZ: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftOptions {
    pub counter_rotating: bool,
    pub guard_band_hz: f64,
}

impl Default for ShiftOptions {
    fn default() -> Self {
        Self { counter_rotating: true, guard_band_hz: GUARD_BAND_HZ }
    }
}

/// Field phasor decomposed along B0: (B_π, B_+, B_-) with B_± = B_x' ± i B_y'.
pub fn spherical_components(model: &HyperfineModel, field: &Vector3<Complex64>) -> (Complex64, Complex64, Complex64) {
    let z = model.b0_dir;
    let seed = if z.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let x = (seed - z * seed.dot(&z)).normalize();
    let y = z.cross(&x);
    let proj = |u: &Vector3<f64>| field.x * u.x + field.y * u.y + field.z * u.z;
    let (bx, by, bz) = (proj(&x), proj(&y), proj(&z));
    let i = Complex64::i();
    (bz, bx + i * by, bx - i * by)
}

/// Coupling phasor Ṽ/h (Hz) in the uncoupled basis for H(t) = ½(Ṽe^{-iωt} + h.c.).
pub fn coupling_operator(model: &HyperfineModel, field: &Vector3<Complex64>) -> CMat8 {
    let (bpi, bplus, bminus) = spherical_components(model, field);
    let c = |m: SMatrix<f64, 8, 8>| m.map(|x| Complex64::new(x / H, 0.0));
    let mz = c(moment_operator(model, Polarization::Pi));
    let mp = c(moment_operator(model, Polarization::SigmaPlus));
    let mm = c(moment_operator(model, Polarization::SigmaMinus));
    // µ·B = M_z B_z + ½(M_+ B_- + M_- B_+); the ½ is already inside M_±.
    mz * bpi + mp * bminus + mm * bplus
}

fn to_eigenbasis(levels: &Levels, op: &CMat8) -> CMat8 {
    let u = levels.states.map(|x| Complex64::new(x, 0.0));
    u.transpose() * op * u
}

/// Second-order shift (Hz) of every level, ordered as `levels.labels`.
pub fn level_shifts(
    model: &HyperfineModel,
    levels: &Levels,
    field: &Vector3<Complex64>,
    drive_hz: f64,
    opts: ShiftOptions,
) -> Result<Vec<f64>> {
    let v = to_eigenbasis(levels, &coupling_operator(model, field));
    (0..8).map(|a| shift_of(levels, &v, a, drive_hz, opts)).collect()
}

fn shift_of(levels: &Levels, v: &CMat8, a: usize, drive_hz: f64, opts: ShiftOptions) -> Result<f64> {
    let mut s = 0.0;
    for b in 0..8 {
        if a == b {
            continue;
        }
        let co = v[(b, a)].norm_sqr();
        // ⟨b|Ṽ†|a⟩ = conj⟨a|Ṽ|b⟩
        let counter = v[(a, b)].norm_sqr();
        if co == 0.0 && counter == 0.0 {
            continue;
        }
        let f_ba = levels.energies_hz[b] - levels.energies_hz[a];
        if (f_ba.abs() - drive_hz).abs() < opts.guard_band_hz {
            return Err(Error::Resonance {
                transition: if f_ba > 0.0 {
                    format!("{}↔{}", levels.labels[a], levels.labels[b])
                } else {
                    format!("{}↔{}", levels.labels[b], levels.labels[a])
                },
                drive_hz,
                resonance_hz: f_ba.abs(),
            });
        }
        let t1 = co / (f_ba - drive_hz);
        let t2 = counter / (f_ba + drive_hz);
        s += if opts.counter_rotating {
            t1 + t2
        } else if f_ba > 0.0 {
            t1
        } else {
            t2
        };
    }
    Ok(-0.25 * s)
}

/// AC Zeeman shift of a transition (upper minus lower level shift), Hz.
pub fn ac_zeeman_shift(
    model: &HyperfineModel,
    t: &TransitionSpec,
    field: &Vector3<Complex64>,
    drive_hz: f64,
) -> Result<f64> {
    ac_zeeman_shift_with(model, t, field, drive_hz, ShiftOptions::default())
}

pub fn ac_zeeman_shift_with(
    model: &HyperfineModel,
    t: &TransitionSpec,
    field: &Vector3<Complex64>,
    drive_hz: f64,
    opts: ShiftOptions,
) -> Result<f64> {
    let levels = breit_rabi_levels(model);
    transition_shift(model, &levels, t, field, drive_hz, opts)
}

pub(crate) fn transition_shift(
    model: &HyperfineModel,
    levels: &Levels,
    t: &TransitionSpec,
    field: &Vector3<Complex64>,
    drive_hz: f64,
    opts: ShiftOptions,
) -> Result<f64> {
    let v = to_eigenbasis(levels, &coupling_operator(model, field));
    let up = shift_of(levels, &v, levels.index(t.upper).unwrap(), drive_hz, opts)?;
    let lo = shift_of(levels, &v, levels.index(t.lower).unwrap(), drive_hz, opts)?;
    Ok(up - lo)
}

/// Precomputed shift evaluator for repeated calls at fixed B0 and drive.
/// The shift is a Hermitian quadratic form in the 3 field components, so it
/// is stored as a 3×3 matrix K with shift = b† K b.
#[derive(Debug, Clone)]
pub struct ShiftKernel {
    k: SMatrix<Complex64, 3, 3>,
}

impl ShiftKernel {
    pub fn new(model: &HyperfineModel, t: &TransitionSpec, drive_hz: f64, opts: ShiftOptions) -> Result<Self> {
        let levels = breit_rabi_levels(model);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        let basis = |c: usize, w: Complex64| {
            let mut v = Vector3::from_element(Complex64::new(0.0, 0.0));
            v[c] = w;
            v
        };
        let mut diag = [0.0; 3];
        for (c, d) in diag.iter_mut().enumerate() {
            *d = transition_shift(model, &levels, t, &basis(c, one), drive_hz, opts)?;
        }
        let mut k = SMatrix::<Complex64, 3, 3>::zeros();
        for c in 0..3 {
            k[(c, c)] = Complex64::new(diag[c], 0.0);
        }
        // polarization identity for the off-diagonal entries
        for a in 0..3 {
            for b in (a + 1)..3 {
                let mut re = basis(a, one);
                re[b] = one;
                let mut im = basis(a, one);
                im[b] = i;
                let sr = transition_shift(model, &levels, t, &re, drive_hz, opts)?;
                let si = transition_shift(model, &levels, t, &im, drive_hz, opts)?;
                let x = 0.5 * (sr - diag[a] - diag[b]);
                let y = 0.5 * (si - diag[a] - diag[b]);
                // b = e_a + w e_b gives b†Kb = K_aa + K_bb + 2 Re(w K_ab)
                k[(a, b)] = Complex64::new(x, -y);
                k[(b, a)] = Complex64::new(x, y);
            }
        }
        Ok(Self { k })
    }

    pub fn shift(&self, field: &Vector3<Complex64>) -> f64 {
        (field.adjoint() * self.k * field)[(0, 0)].re
    }
}
