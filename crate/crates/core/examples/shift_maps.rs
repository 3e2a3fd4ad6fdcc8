//! AC Zeeman shift maps of the qubit and |2,0>-|1,0> lines around the field minimum.
use forge::atom::{breit_rabi_levels, zeeman_shift_map, HyperfineModel, TransitionSpec};
use forge::geometry::MeanderParams;
use forge::magnetostatics::{sample_source, GridSpec, MagneticModel};

fn main() -> forge::Result<()> {
    let model = MagneticModel::default();
    let meander = MeanderParams::default();
    let m = model.minimum(&meander)?;
    let grid = GridSpec::new((m.x0 - 3.0, m.x0 + 3.0, 7), (m.z0 - 3.0, m.z0 + 3.0, 7), 0.0)?;
    let fmap = sample_source(&model.filaments(&meander)?, &grid, model.drive)?;

    let atom = HyperfineModel::be9_reference();
    let fq = breit_rabi_levels(&atom).frequency(&TransitionSpec::qubit());
    let qubit = zeeman_shift_map(&atom, &TransitionSpec::qubit(), &fmap, fq + 20e6)?;
    let clock = zeeman_shift_map(&atom, &TransitionSpec::clock_20_10(), &fmap, fq)?.stepped();

    println!("    x      z   qubit(Hz)  clock+3dB(Hz)");
    for ((p, a), b) in fmap.nodes().iter().zip(&qubit.shift_hz).zip(&clock.shift_hz) {
        println!("{:6.2} {:6.2} {:10.2} {:12.2}", p.x, p.z, a, b);
    }
    Ok(())
}
