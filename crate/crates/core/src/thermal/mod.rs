//! Reduced transient heat model of the meander cross-section under DC load.

mod mesh;
mod model;

pub use mesh::{lateral_axis, stack_axis, Axis};
pub use model::{
    build_thermal_model, simulate_heating, steady_state, steady_state_rise, sweep_csv_rows, thermal_sweep, Material,
    MeshOptions, Region, Section, SteadyState, StepPolicy, SweepRow, ThermalMaterials, ThermalModelSpec, ThermalTrace,
};
