//! Physical constants (CODATA 2018) and ⁹Be⁺ ground-state parameters.

pub const H: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = H / (2.0 * std::f64::consts::PI);
pub const MU_B: f64 = 9.274_010_078_3e-24;
pub const MU_0: f64 = 1.256_637_062_12e-6;
pub const E_CHARGE: f64 = 1.602_176_634e-19;
pub const AMU: f64 = 1.660_539_066_60e-27;
pub const M_ELECTRON: f64 = 9.109_383_701_5e-31;

/// Magnetic-dipole hyperfine constant of the ²S₁/₂ ground state (Hz).
/// Wineland, Bollinger, Itano, PRL 50, 628 (1983).
pub const BE9_A_HZ: f64 = -625.008_837_048e6;
/// Electron g-factor of Be⁺ ²S₁/₂, same source.
pub const BE9_G_J: f64 = 2.002_262_06;
/// Nuclear g-factor in units of µ_B, sign such that H_Z = µ_B·B·(g_J·J_z + g_I·I_z).
/// Same source (quoted there as g_I' = +2.134779853e-4 with the opposite sign convention).
pub const BE9_G_I: f64 = -2.134_779_853e-4;
pub const BE9_NUCLEAR_SPIN: f64 = 1.5;
/// Atomic mass of ⁹Be (AME2020).
pub const BE9_ATOMIC_MASS_U: f64 = 9.012_183_06;

/// Mass of the singly charged ⁹Be⁺ ion (kg).
pub fn be9_ion_mass() -> f64 {
    BE9_ATOMIC_MASS_U * AMU - M_ELECTRON
}

/// Gold electrical conductivity used for skin depth and Joule heating (S/m).
pub const SIGMA_AU: f64 = 4.1e7;
