//! Data sets behind the reference figures and tables, written into
//! `<out>/<name>/` with a manifest of file hashes.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::ValueEnum;
use rand::rngs::StdRng;
use rand::SeedableRng;

use super::commands::{coupling_csv, fit_table, gate_table, pocket_table, shift_map_csv, sigma_cell, thermal_run_csv};
use super::{say, sha256_hex, MapArgs, Session, Span, VERSION};
use crate::atom::{breit_rabi_levels, HyperfineModel, MsConvention, TransitionSpec};
use crate::error::Result;
use crate::quadrupole::{
    bound_residual_field, fit_quadrupole, samples_to_csv, FitOptions, ProbeDrive, QuadrupoleParams, Samples,
    ShiftExperiment, PARAM_NAMES,
};
use crate::thermal::{sweep_csv_rows, thermal_sweep, MeshOptions, StepPolicy, ThermalMaterials};

/// Smallest |2,0⟩↔|1,0⟩ shift observed in the measured map (Hz).
const REFERENCE_MIN_SHIFT_HZ: f64 = 551.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproName {
    /// Quadrupole fit of a synthetic shift map against the simulated parameters.
    Table1,
    /// Joule heating transient and pocket-length sweep.
    Fig5,
    /// Qubit and clock shift maps.
    Fig6,
    /// Backreflection phase sweep.
    Fig7,
    /// Residual field and gradient against pocket length.
    Fig9,
    /// Motional gate time.
    GateTime,
}

impl ReproName {
    pub fn dir_name(self) -> &'static str {
        match self {
            ReproName::Table1 => "table1",
            ReproName::Fig5 => "fig5",
            ReproName::Fig6 => "fig6",
            ReproName::Fig7 => "fig7",
            ReproName::Fig9 => "fig9",
            ReproName::GateTime => "gate-time",
        }
    }
}

fn table1(s: &Session, files: &mut Vec<(String, Vec<String>, String)>) -> Result<Vec<String>> {
    let truth = QuadrupoleParams::table_experiment();
    let exp = ShiftExperiment::default().calibrated(&truth, 1.2)?;
    let data = exp.noisy(&truth, &mut StdRng::seed_from_u64(s.seed))?;
    let fit = fit_quadrupole(&data, &FitOptions { fix_b: true, fix_alpha: true, ..Default::default() })?;
    let sim = QuadrupoleParams::table_simulation().to_array();
    let got = fit.params.to_array();
    let sig = fit.params.sigma.unwrap_or([f64::NAN; 7]);
    let mut t = String::from("parameter,simulation,fit,sigma\n");
    for k in 0..7 {
        writeln!(t, "{},{:.6e},{:.6e},{}", PARAM_NAMES[k], sim[k], got[k], sigma_cell(sig[k])).unwrap();
    }
    // smallest |shift| of the clock row bounds the residual field
    let min_shift = match &data {
        Samples::Shift { samples, .. } => {
            samples.iter().filter(|x| x.channel == 1).map(|x| x.shift_hz.abs()).fold(f64::INFINITY, f64::min)
        }
        _ => unreachable!(),
    };
    let model = HyperfineModel::be9_reference();
    let fq = breit_rabi_levels(&model).frequency(&TransitionSpec::qubit());
    let drive = ProbeDrive { frequency_hz: fq, power_db: exp.clock_power_db };
    let bound = |shift: f64| bound_residual_field(shift, &TransitionSpec::clock_20_10(), &drive, &fit.params, &model);
    let pre = vec![
        format!("chi2 = {:.6}", fit.chi2),
        format!("dof = {}", fit.dof),
        format!("min_clock_shift_hz = {min_shift:.3}"),
        format!("residual_bound_uT = {:.3}", bound(min_shift)? * 1e6),
        format!("reference_min_shift_hz = {REFERENCE_MIN_SHIFT_HZ}"),
        format!("reference_bound_uT = {:.3}", bound(REFERENCE_MIN_SHIFT_HZ)? * 1e6),
    ];
    files.push(("shift_data.csv".into(), vec![format!("seed = {}", s.seed)], samples_to_csv(&data)));
    files.push(("table1.csv".into(), pre, t));
    files.push(("fit_report.csv".into(), vec![], fit_table(&fit)));
    Ok(vec!["residual_bound_rel = 0.15".into(), "gradient_rel = 0.05".into()])
}

fn fig5(s: &Session, files: &mut Vec<(String, Vec<String>, String)>) -> Result<Vec<String>> {
    let (body, pre) = thermal_run_csv(s, 10.0, Some(200.0), 2e-3)?;
    files.push(("transient.csv".into(), pre, body));
    let l_th: Vec<f64> = (0..6).map(|k| 50.0 * k as f64).collect();
    let rows = thermal_sweep(
        &s.trap.meander,
        &ThermalMaterials::default(),
        &MeshOptions::default(),
        &l_th,
        10.0,
        2e-3,
        &StepPolicy::default(),
    )?;
    files.push(("pocket_sweep.csv".into(), vec!["power_w = 10".into()], sweep_csv_rows(&rows)));
    Ok(vec!["rise_abs_K = 2".into(), "steady_rel = 0.2".into()])
}

fn fig6(s: &Session, files: &mut Vec<(String, Vec<String>, String)>) -> Result<Vec<String>> {
    let map = MapArgs { x: Span(-3.0, 3.0, 25), z: Span(-3.0, 3.0, 25), power: None, l_th: None };
    let (body, pre) = shift_map_csv(s, &map, TransitionSpec::qubit(), 20e6, false)?;
    files.push(("qubit_shift.csv".into(), pre, body));
    let (body, pre) = shift_map_csv(s, &map, TransitionSpec::clock_20_10(), 0.0, true)?;
    files.push(("clock_shift.csv".into(), pre, body));
    Ok(vec!["shift_rel = 0.05".into()])
}

fn fig7(s: &Session, files: &mut Vec<(String, Vec<String>, String)>) -> Result<Vec<String>> {
    let (body, pre) = coupling_csv(s, -27.8, 1.0, 1.0, 5.0)?;
    files.push(("backreflection.csv".into(), pre, body));
    Ok(vec!["periodicity_abs_um = 1e-6".into()])
}

fn fig9(s: &Session, files: &mut Vec<(String, Vec<String>, String)>) -> Result<Vec<String>> {
    let l_th: Vec<f64> = (0..7).map(|k| 50.0 * k as f64).collect();
    let (body, pre) = pocket_table(s, &l_th)?;
    files.push(("pocket_study.csv".into(), pre, body));
    Ok(vec!["monotone = true".into()])
}

fn gate(files: &mut Vec<(String, Vec<String>, String)>) -> Result<Vec<String>> {
    for (name, conv) in
        [("gate_time_pi.csv", MsConvention::PiOverOmega), ("gate_time_2pi.csv", MsConvention::TwoPiOverOmega)]
    {
        files.push((name.into(), vec![], gate_table(54.8, 9.33e6, conv)?));
    }
    Ok(vec!["x_wp_rel = 0.01".into()])
}

/// Writes the data set and its manifest; returns every path written.
pub fn repro_suite(name: ReproName, s: &Session) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let tolerances = match name {
        ReproName::Table1 => table1(s, &mut files)?,
        ReproName::Fig5 => fig5(s, &mut files)?,
        ReproName::Fig6 => fig6(s, &mut files)?,
        ReproName::Fig7 => fig7(s, &mut files)?,
        ReproName::Fig9 => fig9(s, &mut files)?,
        ReproName::GateTime => gate(&mut files)?,
    };
    let out = s.out.subdir(name.dir_name());
    let mut manifest =
        format!("name = \"{}\"\nversion = \"{VERSION}\"\nseed = {}\n\n[tolerances]\n", name.dir_name(), s.seed);
    for t in &tolerances {
        manifest.push_str(t);
        manifest.push('\n');
    }
    manifest.push_str("\n[files]\n");
    let mut paths = Vec::new();
    for (file, pre, body) in &files {
        let p = out.write(file, pre, body)?;
        let bytes = std::fs::read(&p)?;
        writeln!(manifest, "\"{file}\" = \"{}\"", sha256_hex(&bytes)).unwrap();
        say(format!("wrote {}\n", p.display()));
        paths.push(p);
    }
    let p = out.write("manifest.toml", &[], &manifest)?;
    say(format!("wrote {}\n", p.display()));
    paths.push(p);
    Ok(paths)
}
