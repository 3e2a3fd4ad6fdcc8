use forge::workflow::{compare_sparams, Touchstone};

fn main() -> forge::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let sim = Touchstone::read(format!("{dir}/s11_simulated.s1p").as_ref())?;
    let meas = Touchstone::read(format!("{dir}/s11_measured.s1p").as_ref())?;
    println!("simulated {:?} Hz, measured {:?} Hz", sim.range(), meas.range());
    for band in [None, Some((1.0e9, 1.2e9))] {
        let d = compare_sparams(&sim, &meas, band)?;
        println!("{:?}: {} points, max |dRe| {:.4}, max |dIm| {:.4}", d.band, d.points, d.max_re, d.max_im);
    }
    Ok(())
}
