//! ⁹Be⁺ ground-state hyperfine structure and microwave interactions.

mod floquet;
mod gate;
mod hyperfine;
mod map;
mod ramsey;
mod shift;

pub use floquet::floquet_level_shifts;
pub use gate::{ms_gate_time, sideband_rabi, transition_moment, ModeSpec, MsConvention};
pub use hyperfine::{
    breit_rabi_levels, dipole_matrix_element, hamiltonian, moment_operator, HyperfineModel, Level, Levels,
    Polarization, SpinOps, TransitionSpec,
};
pub use map::{zeeman_shift_map, ShiftMap, POWER_STEP_DB};
pub use ramsey::{fit_ramsey_phase_scan, simulate_ramsey};
pub use shift::{
    ac_zeeman_shift, ac_zeeman_shift_with, coupling_operator, level_shifts, spherical_components, ShiftKernel,
    ShiftOptions, GUARD_BAND_HZ,
};
