//! Brute-force Floquet reference for the perturbative AC Zeeman shift.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

use super::hyperfine::{breit_rabi_levels, HyperfineModel};
use super::shift::coupling_operator;

/// Quasi-energy offset (Hz) of each level under H0 + ½(Ṽe^{-iωt} + h.c.),
/// from a Floquet matrix truncated to |n| ≤ `harmonics` photon sectors.
pub fn floquet_level_shifts(
    model: &HyperfineModel,
    field: &Vector3<Complex64>,
    drive_hz: f64,
    harmonics: usize,
) -> Vec<f64> {
    let lv = breit_rabi_levels(model);
    let u = lv.states.map(|x| Complex64::new(x, 0.0));
    let v = u.transpose() * coupling_operator(model, field) * u;
    let sectors = 2 * harmonics + 1;
    let dim = 8 * sectors;
    let mut hf = DMatrix::<Complex64>::zeros(dim, dim);
    let half = Complex64::new(0.5, 0.0);
    for s in 0..sectors {
        let n = s as f64 - harmonics as f64;
        for a in 0..8 {
            hf[(8 * s + a, 8 * s + a)] = Complex64::new(lv.energies_hz[a] - n * drive_hz, 0.0);
        }
        if s + 1 < sectors {
            for a in 0..8 {
                for b in 0..8 {
                    hf[(8 * (s + 1) + b, 8 * s + a)] = v[(b, a)] * half;
                    hf[(8 * s + a, 8 * (s + 1) + b)] = v[(b, a)].conj() * half;
                }
            }
        }
    }
    let eig = hf.symmetric_eigen();
    let centre = 8 * harmonics;
    (0..8)
        .map(|a| {
            let row = centre + a;
            let k = (0..dim)
                .max_by(|&i, &j| {
                    eig.eigenvectors[(row, i)].norm_sqr().total_cmp(&eig.eigenvectors[(row, j)].norm_sqr())
                })
                .unwrap();
            eig.eigenvalues[k] - lv.energies_hz[a]
        })
        .collect()
}
