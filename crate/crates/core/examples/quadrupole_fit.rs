//! Fit a noisy synthetic shift map, then bound the residual field.
use forge::atom::{breit_rabi_levels, HyperfineModel, TransitionSpec};
use forge::quadrupole::{
    bound_residual_field, fit_quadrupole, FitOptions, ProbeDrive, QuadrupoleParams, ShiftExperiment, PARAM_NAMES,
};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn main() -> forge::Result<()> {
    let truth = QuadrupoleParams::table_experiment();
    let exp = ShiftExperiment::default().calibrated(&truth, 1.2)?;
    let data = exp.noisy(&truth, &mut StdRng::seed_from_u64(7))?;
    let r = fit_quadrupole(&data, &FitOptions { fix_b: true, fix_alpha: true, ..Default::default() })?;
    let sigma = r.params.sigma.unwrap_or([f64::NAN; 7]);
    for (k, (v, t)) in r.params.to_array().iter().zip(truth.to_array()).enumerate() {
        println!("{:>6} {:>12.4e} +- {:<10.2e} (true {:.4e})", PARAM_NAMES[k], v, sigma[k], t);
    }
    println!("chi2/dof = {:.3}", r.chi2 / r.dof as f64);

    let model = HyperfineModel::be9_reference();
    let fq = breit_rabi_levels(&model).frequency(&TransitionSpec::qubit());
    let drive = ProbeDrive { frequency_hz: fq, power_db: 3.0 };
    let b = bound_residual_field(551.0, &TransitionSpec::clock_20_10(), &drive, &r.params, &model)?;
    println!("551 Hz smallest shift -> B <= {:.1} uT", b * 1e6);
    Ok(())
}
