//! Gapless-plane electrostatics: basis potentials, pseudopotential, RF null,
//! secular frequencies and trap depth.

mod basis;
mod trap;

pub use basis::{electrode_basis_potential, fd_step, rect_potential, RfBasis};
pub use trap::{
    calibrate_dc, find_rf_null, rf_pseudopotential, secular_analysis, secular_analysis_at, trap_depth, trap_depth_at,
    trap_depth_with, DepthReport, DepthSearch, IonSpecies, Pseudo, RfDrive, SecularTargets, TotalPotential,
    TrapCharacterization, Voltages, DC_LIMIT_V,
};
