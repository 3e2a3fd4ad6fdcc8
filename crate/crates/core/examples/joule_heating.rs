//! DC heating of the meander at 10 W with and without pockets.
use forge::geometry::MeanderParams;
use forge::thermal::{build_thermal_model, simulate_heating, steady_state, MeshOptions, StepPolicy, ThermalMaterials};

fn main() -> forge::Result<()> {
    for l_th in [0.0, 200.0] {
        let p = MeanderParams { l_th, ..Default::default() };
        let model = build_thermal_model(&p, &ThermalMaterials::default(), &MeshOptions::default())?;
        let trace = simulate_heating(&model, 10.0, 2e-3, &StepPolicy::default())?;
        let ss = steady_state(&model, 10.0)?;
        println!(
            "l_th {l_th:>3.0} um: dT {:.2} K, steady after {:?} s, hottest in {} section, backside {:.3} W",
            ss.rise, trace.steady_at, ss.hottest.0, ss.boundary_flux
        );
    }
    Ok(())
}
