//! Minimum displacement when the current coupled into MWC2 is reflected back.
use forge::coupling::{backreflection_sweep, reference_victim, CouplingSpec};
use forge::geometry::{DiscretizeOptions, ReferenceTrap};
use forge::magnetostatics::MagneticModel;

fn main() -> forge::Result<()> {
    let trap = ReferenceTrap::default();
    let model = MagneticModel::default();
    let base = model.filaments(&trap.meander)?;
    let victim = reference_victim(&trap, &DiscretizeOptions::uniform(4))?;
    let phases: Vec<f64> = (0..12).map(|k| 30.0 * k as f64).collect();
    for db in [-40.0, -27.8] {
        let s = backreflection_sweep(
            &base,
            std::slice::from_ref(&victim),
            &CouplingSpec::new(db, 1.0, 1.0)?,
            &phases,
            model.seed,
        )?;
        println!("S21 {db} dB: max shift {:.3} um", s.max_displacement());
        for (phi, dx, dz, res) in s.shifted() {
            println!("  {phi:>5.0} deg  dx {dx:+.3}  dz {dz:+.3} um  B {:.2} uT", res * 1e6);
        }
    }
    Ok(())
}
