//! RF null, DC calibration and secular analysis of the reference trap.
use std::f64::consts::PI;

use forge::electrostatics::{
    calibrate_dc, find_rf_null, secular_analysis, IonSpecies, RfDrive, SecularTargets, DC_LIMIT_V,
};
use forge::geometry::ReferenceTrap;

fn main() -> forge::Result<()> {
    let layout = ReferenceTrap::default().layout()?;
    let ion = IonSpecies::be9();
    let drive = RfDrive::new(2.0 * PI * 176.5e6, 100.0)?;
    let null = find_rf_null(&layout, &drive, &ion, 35.0)?;
    println!("rf null at ({:.3}, {:.3}) um", null.0, null.1);

    let v = calibrate_dc(&layout, &drive, &ion, null, &SecularTargets::reference(), DC_LIMIT_V)?;
    let c = secular_analysis(&layout, &drive, &v, &ion)?;
    for (name, w) in ["axial", "low", "high"].iter().zip(c.frequencies) {
        println!("{name:>5}: {:.3} MHz", w / (2.0 * PI) * 1e-6);
    }
    println!("depth {:.2} meV, high mode at {:.1} deg", c.depth * 1e3, c.hf_angle_deg);
    Ok(())
}
