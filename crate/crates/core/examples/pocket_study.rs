//! Residual field against pocket length at 1 W.
use forge::geometry::MeanderParams;
use forge::magnetostatics::{pocket_study, MagneticModel};

fn main() -> forge::Result<()> {
    let l_th: Vec<f64> = (0..7).map(|k| 50.0 * k as f64).collect();
    let study = pocket_study(&MeanderParams::default(), &l_th, &MagneticModel::default())?;
    for r in &study.rows {
        println!("l_th {:>5.0} um  B {:6.3} uT  B' {:6.2} T/m", r.l_th, r.minimum.residual * 1e6, r.minimum.gradient);
    }
    println!("monotone: {}", study.monotone);
    Ok(())
}
