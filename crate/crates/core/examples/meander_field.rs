//! Field of the driven meander: minimum, gradient and a small map.
use forge::geometry::MeanderParams;
use forge::magnetostatics::{field_law_ratios, sample_source, GridSpec, MagneticModel};

fn main() -> forge::Result<()> {
    let model = MagneticModel::default();
    let meander = MeanderParams::default();
    let set = model.filaments(&meander)?;
    let m = model.minimum(&meander)?;
    println!("minimum ({:.3}, {:.3}) um, B = {:.3} uT, B' = {:.2} T/m", m.x0, m.z0, m.residual * 1e6, m.gradient);

    let grid = GridSpec::new((m.x0 - 2.0, m.x0 + 2.0, 5), (m.z0 - 2.0, m.z0 + 2.0, 5), 0.0)?;
    let map = sample_source(&set, &grid, model.drive)?;
    for (p, b) in map.nodes().iter().zip(map.magnitudes()) {
        let (div, curl) = field_law_ratios(&set, p, 1e-2)?;
        println!("{:7.2} {:7.2}  |B| {:8.3} uT  div {:.1e} curl {:.1e}", p.x, p.z, b * 1e6, div, curl);
    }
    Ok(())
}
