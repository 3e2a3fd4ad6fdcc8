use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use super::*;
use crate::atom::{
    breit_rabi_levels, ms_gate_time, sideband_rabi, zeeman_shift_map, HyperfineModel, Level, ModeSpec, MsConvention,
    TransitionSpec,
};
use crate::constants::be9_ion_mass;
use crate::coupling::{backreflection_sweep, reference_victim, CouplingSpec};
use crate::electrostatics::{
    calibrate_dc, find_rf_null, secular_analysis, IonSpecies, RfDrive, SecularTargets, Voltages,
};
use crate::geometry::{load_layout, DiscretizeOptions, Layout};
use crate::magnetostatics::{pocket_study, sample_source, DriveSpec, GridSpec, MagneticModel, MinimumReport};
use crate::quadrupole::{fit_quadrupole, samples_from_csv, FitOptions, FitReport, PARAM_NAMES};
use crate::thermal::{
    build_thermal_model, simulate_heating, steady_state, sweep_csv_rows, thermal_sweep, MeshOptions, StepPolicy,
    ThermalMaterials,
};
use crate::workflow::{compare_sparams, run_design, DesignConfig, Touchstone};

pub(crate) const DESIGN_TOML: &str = include_str!("../../data/design.toml");

impl Span {
    pub fn values(&self) -> Result<Vec<f64>> {
        let Span(a, b, n) = *self;
        if n == 0 || !a.is_finite() || !b.is_finite() {
            return Err(invalid("span", format!("{a}:{b}:{n} is empty")));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
    }
}

pub(crate) fn magnetic_model(power: f64) -> Result<MagneticModel> {
    if !(power > 0.0) {
        return Err(invalid("power", "must be positive"));
    }
    let mut m = MagneticModel::default();
    m.drive = DriveSpec::new(power, m.drive.frequency);
    Ok(m)
}

pub fn dispatch(cmd: &Command, s: &Session) -> Result<()> {
    match cmd {
        Command::Geometry(c) => geometry(c, s),
        Command::Trap(TrapCmd::Analyze(a)) => trap_analyze(a, s),
        Command::Field(c) => field(c, s),
        Command::Fit(FitCmd::Quad { data, fix_b, fix_alpha }) => fit_quad(data, *fix_b, *fix_alpha, s),
        Command::Atom(c) => atom(c, s),
        Command::Coupling(CouplingCmd::Sweep { s21_db, power, fraction, step }) => {
            coupling(*s21_db, *power, *fraction, *step, s)
        }
        Command::Thermal(c) => thermal(c, s),
        Command::Design(DesignCmd::Run { spec }) => design(spec.as_deref(), s),
        Command::Sparams(SparamsCmd::Compare { a, b, band }) => sparams(a, b, *band, s),
        Command::Repro { name } => repro_suite(*name, s).map(|_| ()),
    }
}

fn report(path: &Path) {
    say(format!("wrote {}\n", path.display()));
}

fn geometry(c: &GeometryCmd, s: &Session) -> Result<()> {
    match c {
        GeometryCmd::Inventory { layout } => {
            let l = match layout {
                Some(p) => load_layout(&read_text(p)?)?,
                None => s.trap.layout()?,
            };
            let mut body = String::from("id,role,layer,area_um2\n");
            for e in &l.electrodes {
                writeln!(body, "{},{:?},{},{}", e.id, e.role, e.layer, e.area()).unwrap();
            }
            say(&body);
            report(&s.out.write("geometry_inventory.csv", &[], &body)?);
        }
        GeometryCmd::Export => report(&s.out.write("reference_layout.toml", &[], &s.trap.layout()?.to_text())?),
    }
    Ok(())
}

pub(crate) fn trap_table(
    layout: &Layout,
    drive: &RfDrive,
    v: Option<Voltages>,
    max_v: f64,
) -> Result<(String, String)> {
    let ion = IonSpecies::be9();
    let null = find_rf_null(layout, drive, &ion, 35.0)?;
    let v = match v {
        Some(v) => v,
        None => calibrate_dc(layout, drive, &ion, null, &SecularTargets::reference(), max_v)?,
    };
    let c = secular_analysis(layout, drive, &v, &ion)?;
    let mut t = String::from("quantity,value,unit\n");
    let rows = [
        ("rf_null_x", c.rf_null.0, "um"),
        ("rf_null_z", c.rf_null.1, "um"),
        ("minimum_x", c.minimum.x, "um"),
        ("minimum_z", c.minimum.z, "um"),
        ("f_axial", c.frequencies[0] / (2.0 * PI), "Hz"),
        ("f_low", c.frequencies[1] / (2.0 * PI), "Hz"),
        ("f_high", c.frequencies[2] / (2.0 * PI), "Hz"),
        ("hf_angle", c.hf_angle_deg, "deg"),
        ("lf_angle", c.lf_angle_deg, "deg"),
        ("depth", c.depth * 1e3, "meV"),
    ];
    for (k, val, u) in rows {
        writeln!(t, "{k},{val:.6},{u}").unwrap();
    }
    for w in &c.warnings {
        writeln!(t, "warning,\"{w}\",").unwrap();
    }
    let mut vs = String::from("electrode,volts\n");
    for (k, val) in &v {
        writeln!(vs, "{k},{val}").unwrap();
    }
    Ok((t, vs))
}

fn trap_analyze(a: &TrapArgs, s: &Session) -> Result<()> {
    let layout = match &a.layout {
        Some(p) => load_layout(&read_text(p)?)?,
        None => s.trap.layout()?,
    };
    let drive = RfDrive::new(2.0 * PI * a.rf_freq, a.rf_amplitude)?;
    let v = match &a.voltages {
        Some(p) => {
            Some(toml::from_str::<BTreeMap<String, f64>>(&read_text(p)?).map_err(|e| Error::Schema(e.to_string()))?)
        }
        None => None,
    };
    let (t, vs) = trap_table(&layout, &drive, v, a.max_voltage)?;
    say(&t);
    report(&s.out.write("trap_analysis.csv", &[], &t)?);
    report(&s.out.write("dc_voltages.csv", &[], &vs)?);
    Ok(())
}

fn minimum_lines(m: &MinimumReport) -> Vec<String> {
    vec![
        format!("minimum_um = [{:.6}, {:.6}]", m.x0, m.z0),
        format!("residual_T = {:.6e}", m.residual),
        format!("gradient_T_per_m = {:.6}", m.gradient),
    ]
}

fn grid_around(m: &MinimumReport, x: Span, z: Span) -> Result<GridSpec> {
    GridSpec::new((m.x0 + x.0, m.x0 + x.1, x.2), (m.z0 + z.0, m.z0 + z.1, z.2), 0.0)
}

fn meander_for(s: &Session, l_th: Option<f64>) -> Result<crate::geometry::MeanderParams> {
    match l_th {
        Some(l) => s.trap.meander.with("l_th", l),
        None => Ok(s.trap.meander),
    }
}

fn field(c: &FieldCmd, s: &Session) -> Result<()> {
    match c {
        FieldCmd::Map(a) => {
            let model = magnetic_model(a.power.unwrap_or(s.power))?;
            let meander = meander_for(s, a.l_th)?;
            let set = model.filaments(&meander)?;
            let m = model.minimum(&meander)?;
            let map = sample_source(&set, &grid_around(&m, a.x, a.z)?, model.drive)?;
            let mut pre = map.preamble();
            pre.extend(minimum_lines(&m));
            report(&s.out.write("field_map.csv", &pre, &map.to_csv_rows())?);
        }
        FieldCmd::Minimum { power, l_th } => {
            let model = magnetic_model(power.unwrap_or(s.power))?;
            let m = model.minimum(&meander_for(s, *l_th)?)?;
            let body = minimum_lines(&m).join("\n") + "\n";
            say(&body);
        }
        FieldCmd::Pocket { l_th } => {
            let (body, pre) = pocket_table(s, &l_th.values()?)?;
            say(&body);
            report(&s.out.write("pocket_study.csv", &pre, &body)?);
        }
    }
    Ok(())
}

pub(crate) fn pocket_table(s: &Session, l_th: &[f64]) -> Result<(String, Vec<String>)> {
    let model = magnetic_model(s.power)?;
    let study = pocket_study(&s.trap.meander, l_th, &model)?;
    let mut body = String::from("l_th_um,residual_uT,gradient_T_per_m,x0_um,z0_um\n");
    for r in &study.rows {
        let m = &r.minimum;
        writeln!(body, "{},{:.6},{:.6},{:.6},{:.6}", r.l_th, m.residual * 1e6, m.gradient, m.x0, m.z0).unwrap();
    }
    Ok((body, vec![format!("power_w = {}", s.power), format!("monotone = {}", study.monotone)]))
}

pub(crate) fn fit_table(r: &FitReport) -> String {
    let units = ["T", "T/m", "deg", "deg", "deg", "um", "um"];
    let v = r.params.to_array();
    let sig = r.params.sigma.unwrap_or([f64::NAN; 7]);
    let mut t = String::from("parameter,value,sigma,unit\n");
    for k in 0..7 {
        writeln!(t, "{},{:.6e},{},{}", PARAM_NAMES[k], v[k], sigma_cell(sig[k]), units[k]).unwrap();
    }
    t
}

/// `fixed` for parameters held out of the fit.
pub(crate) fn sigma_cell(s: f64) -> String {
    if s.is_finite() {
        format!("{s:.3e}")
    } else {
        "fixed".into()
    }
}

fn fit_quad(data: &Path, fix_b: bool, fix_alpha: bool, s: &Session) -> Result<()> {
    let samples = samples_from_csv(&read_text(data)?, &data.display().to_string(), &HyperfineModel::be9_reference())?;
    let r = fit_quadrupole(&samples, &FitOptions { fix_b, fix_alpha, ..Default::default() })?;
    let t = fit_table(&r);
    say(&t);
    let pre = vec![
        format!("samples = {}", samples.len()),
        format!("chi2 = {:.6}", r.chi2),
        format!("dof = {}", r.dof),
        format!("fix_b = {fix_b}"),
        format!("fix_alpha = {fix_alpha}"),
    ];
    report(&s.out.write("fit_report.csv", &pre, &t)?);
    Ok(())
}

/// Transitions of the ground manifold between F = 2 and F = 1 with |Δm_F| ≤ 1.
fn all_transitions() -> Vec<TransitionSpec> {
    let mut out = Vec::new();
    for m2 in -2..=2 {
        for m1 in -1..=1 {
            if let Ok(t) = TransitionSpec::new(Level::new(2, m2), Level::new(1, m1)) {
                out.push(t);
            }
        }
    }
    out
}

pub(crate) fn levels_tables(b0: f64) -> Result<(String, String)> {
    if !(b0 >= 0.0) {
        return Err(invalid("b0", "must be non-negative"));
    }
    let model = HyperfineModel::be9_z(b0);
    let lv = breit_rabi_levels(&model);
    let mut a = String::from("f,m_f,energy_hz\n");
    for (l, e) in lv.labels.iter().zip(&lv.energies_hz) {
        writeln!(a, "{},{},{:.3}", l.f, l.m_f, e).unwrap();
    }
    let h = 1e-6;
    let up = breit_rabi_levels(&model.with_b0(b0 + h));
    let dn = breit_rabi_levels(&model.with_b0((b0 - h).max(0.0)));
    let span = b0 + h - (b0 - h).max(0.0);
    let mut b = String::from("lower,upper,frequency_hz,dfdb_hz_per_mT\n");
    for t in all_transitions() {
        let slope = (up.frequency(&t) - dn.frequency(&t)) / span * 1e-3;
        writeln!(b, "{}:{},{}:{},{:.3},{:.3}", t.lower.f, t.lower.m_f, t.upper.f, t.upper.m_f, lv.frequency(&t), slope)
            .unwrap();
    }
    Ok((a, b))
}

pub(crate) fn gate_table(gradient: f64, mode_freq: f64, conv: MsConvention) -> Result<String> {
    if !(mode_freq > 0.0) {
        return Err(invalid("mode_freq", "must be positive"));
    }
    let model = HyperfineModel::be9_reference();
    let mode = ModeSpec { omega: 2.0 * PI * mode_freq, mass: be9_ion_mass() };
    let t = TransitionSpec::qubit();
    let rabi = sideband_rabi(gradient, &mode, &model, &t)?;
    let tau = ms_gate_time(gradient, &mode, &model, &t, conv)?;
    let mut out = String::from("quantity,value,unit\n");
    writeln!(out, "gradient,{gradient},T/m").unwrap();
    writeln!(out, "mode_frequency,{mode_freq},Hz").unwrap();
    writeln!(out, "x_wp,{:.4},nm", mode.x_wp() * 1e9).unwrap();
    writeln!(out, "sideband_rabi,{:.3},rad/s", rabi).unwrap();
    writeln!(out, "gate_time,{:.3},us", tau * 1e6).unwrap();
    writeln!(out, "convention,{conv:?},").unwrap();
    Ok(out)
}

pub(crate) fn shift_map_csv(
    s: &Session,
    map_args: &MapArgs,
    transition: TransitionSpec,
    detuning: f64,
    step: bool,
) -> Result<(String, Vec<String>)> {
    let model = magnetic_model(map_args.power.unwrap_or(s.power))?;
    let meander = meander_for(s, map_args.l_th)?;
    let m = model.minimum(&meander)?;
    let fmap = sample_source(&model.filaments(&meander)?, &grid_around(&m, map_args.x, map_args.z)?, model.drive)?;
    let atom = HyperfineModel::be9_reference();
    let fq = breit_rabi_levels(&atom).frequency(&TransitionSpec::qubit());
    let mut sm = zeeman_shift_map(&atom, &transition, &fmap, fq + detuning)?;
    if step {
        sm = sm.stepped();
    }
    let mut pre = sm.preamble();
    pre.extend(minimum_lines(&m));
    Ok((sm.to_csv_rows(), pre))
}

fn atom(c: &AtomCmd, s: &Session) -> Result<()> {
    match c {
        AtomCmd::Levels { b0 } => {
            let (a, b) = levels_tables(*b0)?;
            let lv = breit_rabi_levels(&HyperfineModel::be9_z(*b0));
            say(format!("qubit 2:1 -> 1:1 = {:.6} MHz\n", lv.frequency(&TransitionSpec::qubit()) * 1e-6));
            say(&b);
            let pre = [format!("b0_T = {b0}")];
            report(&s.out.write("levels.csv", &pre, &a)?);
            report(&s.out.write("transitions.csv", &pre, &b)?);
        }
        AtomCmd::ShiftMap { map, transition, detuning, step } => {
            let t = match transition {
                TransitionArg::Qubit => TransitionSpec::qubit(),
                TransitionArg::Clock => TransitionSpec::clock_20_10(),
            };
            let (body, pre) = shift_map_csv(s, map, t, *detuning, *step)?;
            report(&s.out.write("shift_map.csv", &pre, &body)?);
        }
        AtomCmd::GateTime { gradient, mode_freq, convention } => {
            let conv = match convention {
                ConventionArg::Pi => MsConvention::PiOverOmega,
                ConventionArg::TwoPi => MsConvention::TwoPiOverOmega,
            };
            let t = gate_table(*gradient, *mode_freq, conv)?;
            say(&t);
            report(&s.out.write("gate_time.csv", &[], &t)?);
        }
    }
    Ok(())
}

pub(crate) fn coupling_csv(
    s: &Session,
    s21_db: f64,
    power: f64,
    fraction: f64,
    step: f64,
) -> Result<(String, Vec<String>)> {
    if !(step > 0.0 && step <= 360.0) {
        return Err(invalid("step", "must lie in (0, 360]"));
    }
    let spec = CouplingSpec::new(s21_db, power, fraction)?;
    let model = magnetic_model(power)?;
    let base = model.filaments(&s.trap.meander)?;
    let victim = reference_victim(&s.trap, &DiscretizeOptions::uniform(4))?;
    let n = (360.0 / step).round() as usize;
    let phases: Vec<f64> = (0..n).map(|k| k as f64 * step).collect();
    let sweep = backreflection_sweep(&base, &[victim], &spec, &phases, model.seed)?;
    let u = &sweep.unperturbed;
    let pre = vec![
        format!("s21_db = {s21_db}"),
        format!("input_power_w = {power}"),
        format!("reflected_fraction = {fraction}"),
        format!("unperturbed_um = [{:.6}, {:.6}]", u.x0, u.z0),
        format!("unperturbed_residual_uT = {:.6}", u.residual * 1e6),
        format!("max_displacement_um = {:.6}", sweep.max_displacement()),
        format!("fraction_increased = {:.4}", sweep.fraction_increased()),
    ];
    Ok((sweep.to_csv_rows(), pre))
}

fn coupling(s21_db: f64, power: f64, fraction: f64, step: f64, s: &Session) -> Result<()> {
    let (body, pre) = coupling_csv(s, s21_db, power, fraction, step)?;
    for l in &pre[3..] {
        say(format!("{l}\n"));
    }
    report(&s.out.write("coupling_sweep.csv", &pre, &body)?);
    Ok(())
}

pub(crate) fn thermal_run_csv(
    s: &Session,
    power: f64,
    l_th: Option<f64>,
    duration: f64,
) -> Result<(String, Vec<String>)> {
    let meander = meander_for(s, l_th)?;
    let model = build_thermal_model(&meander, &ThermalMaterials::default(), &MeshOptions::default())?;
    let trace = simulate_heating(&model, power, duration, &StepPolicy::default())?;
    let st = steady_state(&model, power)?;
    let steady = trace.steady_at.map_or("none".to_string(), |t| format!("{t:.6e}"));
    let pre = vec![
        format!("power_w = {power}"),
        format!("l_th_um = {}", meander.l_th),
        format!("cells = {}", model.cells()),
        format!("steady_flag_s = {steady}"),
        format!("steady_rise_K = {:.6}", st.rise),
        format!("backside_flux_W = {:.6}", st.boundary_flux),
    ];
    Ok((trace.to_csv_rows(), pre))
}

fn thermal(c: &ThermalCmd, s: &Session) -> Result<()> {
    match c {
        ThermalCmd::Run { power, l_th, duration } => {
            let (body, pre) = thermal_run_csv(s, *power, *l_th, *duration)?;
            for l in &pre {
                say(format!("{l}\n"));
            }
            report(&s.out.write("thermal_trace.csv", &pre, &body)?);
        }
        ThermalCmd::Sweep { power, l_th, duration } => {
            let rows = thermal_sweep(
                &s.trap.meander,
                &ThermalMaterials::default(),
                &MeshOptions::default(),
                &l_th.values()?,
                *power,
                *duration,
                &StepPolicy::default(),
            )?;
            let body = sweep_csv_rows(&rows);
            say(&body);
            report(&s.out.write("thermal_sweep.csv", &[format!("power_w = {power}")], &body)?);
        }
    }
    Ok(())
}

fn design(spec: Option<&Path>, s: &Session) -> Result<()> {
    let text = match spec {
        Some(p) => read_text(p)?,
        None => DESIGN_TOML.to_string(),
    };
    let mut config = DesignConfig::from_toml(&text)?;
    if let Some(seed) = s.explicit_seed {
        config.seed = seed;
    }
    let r = run_design(&config)?;
    let text = r.to_text();
    say(&text);
    let pre = [format!("design_sha256 = {}", sha256_hex(text.as_bytes()))];
    report(&s.out.write("design_report.toml", &[], &text)?);
    report(&s.out.write("design_stages.csv", &pre, &r.stage_log_csv())?);
    Ok(())
}

fn sparams(a: &Path, b: &Path, band: Option<(f64, f64)>, s: &Session) -> Result<()> {
    let d = compare_sparams(&Touchstone::read(a)?, &Touchstone::read(b)?, band)?;
    let mut t = String::from("metric,value\n");
    for (k, v) in [
        ("band_lo_hz", d.band.0),
        ("band_hi_hz", d.band.1),
        ("points", d.points as f64),
        ("max_re", d.max_re),
        ("rms_re", d.rms_re),
        ("max_im", d.max_im),
        ("rms_im", d.rms_im),
    ] {
        writeln!(t, "{k},{v:.6e}").unwrap();
    }
    say(&t);
    let pre = [format!("a = {}", a.display()), format!("b = {}", b.display())];
    report(&s.out.write("sparams_compare.csv", &pre, &t)?);
    Ok(())
}
