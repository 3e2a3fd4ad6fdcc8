use std::f64::consts::PI;

use forge::atom::{ms_gate_time, sideband_rabi, HyperfineModel, ModeSpec, MsConvention, TransitionSpec};
use forge::constants::be9_ion_mass;

fn main() -> forge::Result<()> {
    let model = HyperfineModel::be9_reference();
    let mode = ModeSpec { omega: 2.0 * PI * 9.33e6, mass: be9_ion_mass() };
    let t = TransitionSpec::qubit();
    println!("x_wp = {:.3} nm", mode.x_wp() * 1e9);
    for g in [20.0, 54.8, 100.0] {
        let rabi = sideband_rabi(g, &mode, &model, &t)?;
        let tau = ms_gate_time(g, &mode, &model, &t, MsConvention::PiOverOmega)?;
        println!("B' {g:>5.1} T/m: Omega_sb {:8.0} rad/s, tau {:6.1} us", rabi, tau * 1e6);
    }
    Ok(())
}
