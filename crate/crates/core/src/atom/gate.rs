use super::hyperfine::{dipole_matrix_element, HyperfineModel, Polarization, TransitionSpec};
use crate::constants::HBAR;
use crate::error::{invalid, Result};

/// Motional mode of a single ion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Ion mass (kg).
    pub mass: f64,
}

impl ModeSpec {
    /// Ground-state wavepacket size sqrt(ħ/(2mω)) in metres.
    pub fn x_wp(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.omega)).sqrt()
    }
}

/// How the gate time follows from the sideband Rabi frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MsConvention {
    /// τ = π/Ω_SB (single phase-space loop, K = 1).
    #[default]
    PiOverOmega,
    /// τ = 2π/Ω_SB.
    TwoPiOverOmega,
}

/// Transition moment driving the transition: the polarization with Δm_F of the pair.
pub fn transition_moment(model: &HyperfineModel, t: &TransitionSpec) -> f64 {
    let pol = match t.upper.m_f - t.lower.m_f {
        0 => Polarization::Pi,
        1 => Polarization::SigmaPlus,
        _ => Polarization::SigmaMinus,
    };
    dipole_matrix_element(model, t, pol)
}

/// Sideband Rabi frequency Ω_SB = µ_t·B′·x_wp/ħ (rad/s).
pub fn sideband_rabi(gradient: f64, mode: &ModeSpec, model: &HyperfineModel, t: &TransitionSpec) -> Result<f64> {
    if gradient <= 0.0 {
        return Err(invalid("gradient", "must be positive"));
    }
    let mu = transition_moment(model, t);
    if mu == 0.0 {
        return Err(invalid("transition", format!("{t} has a vanishing transition moment")));
    }
    Ok(mu * gradient * mode.x_wp() / HBAR)
}

/// Mølmer-Sørensen gate duration (s).
pub fn ms_gate_time(
    gradient: f64,
    mode: &ModeSpec,
    model: &HyperfineModel,
    t: &TransitionSpec,
    conv: MsConvention,
) -> Result<f64> {
    let omega = sideband_rabi(gradient, mode, model, t)?;
    Ok(match conv {
        MsConvention::PiOverOmega => std::f64::consts::PI / omega,
        MsConvention::TwoPiOverOmega => 2.0 * std::f64::consts::PI / omega,
    })
}
