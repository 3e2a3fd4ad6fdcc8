use std::f64::consts::PI;

use forge::atom::*;
use forge::constants::{be9_ion_mass, BE9_A_HZ, BE9_G_I, BE9_G_J, H, MU_B};
use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Closed-form Breit-Rabi energies for J = 1/2, I = 3/2, in Hz, sorted.
fn breit_rabi_closed_form(b: f64) -> Vec<f64> {
    let de = BE9_A_HZ * 2.0;
    let x = (BE9_G_J - BE9_G_I) * MU_B * b / (H * de);
    let zi = BE9_G_I * MU_B * b / H;
    let mut e = Vec::new();
    for m in [-1.0, 0.0, 1.0] {
        let root = (1.0 + m * x + x * x).sqrt();
        for sgn in [1.0, -1.0] {
            e.push(-de / 8.0 + zi * m + sgn * de / 2.0 * root);
        }
    }
    let stretched = BE9_A_HZ * 0.75;
    let zee = MU_B * b / H * (BE9_G_J / 2.0 + 1.5 * BE9_G_I);
    e.push(stretched + zee);
    e.push(stretched - zee);
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn zero_field_manifolds() {
    let lv = breit_rabi_levels(&HyperfineModel::be9_z(0.0));
    let f2: Vec<f64> = lv.labels.iter().zip(&lv.energies_hz).filter(|(l, _)| l.f == 2).map(|(_, e)| *e).collect();
    let f1: Vec<f64> = lv.labels.iter().zip(&lv.energies_hz).filter(|(l, _)| l.f == 1).map(|(_, e)| *e).collect();
    assert_eq!((f2.len(), f1.len()), (5, 3));
    for e in &f2 {
        assert!((e - 0.75 * BE9_A_HZ).abs() < 1e-3);
    }
    for e in &f1 {
        assert!((e + 1.25 * BE9_A_HZ).abs() < 1e-3);
    }
    let split = f1[0] - f2[0];
    assert!((split - 1.250_017_674e9).abs() < 1e3, "{split}");
}

#[test]
fn qubit_frequency_and_field_insensitivity() {
    let m = HyperfineModel::be9_z(22.3e-3);
    let f = breit_rabi_levels(&m).frequency(&TransitionSpec::qubit());
    assert!((f - 1082.55e6).abs() < 0.1e6, "{f}");
    let fq = |b: f64| breit_rabi_levels(&m.with_b0(b)).frequency(&TransitionSpec::qubit());
    let d = 1e-6;
    let slope = |b: f64| (fq(b + d) - fq(b - d)) / (2.0 * d);
    // Hz/T -> kHz/mT is the same number divided by 1e6
    assert!(slope(22.3e-3).abs() / 1e6 < 10.0);
    // the turning point lies within ±0.2 mT
    assert!(slope(22.1e-3) * slope(22.5e-3) < 0.0);
}

#[test]
fn sigma_asymptote_in_decoupled_limit() {
    let m = HyperfineModel::be9_z(1000.0);
    let t = TransitionSpec::new(Level::new(2, 1), Level::new(2, 2)).unwrap();
    let el = dipole_matrix_element(&m, &t, Polarization::SigmaPlus);
    assert!((el / (MU_B * BE9_G_J / 2.0) - 1.0).abs() < 1e-3, "{el}");
}

#[test]
fn delta_m_two_is_forbidden() {
    assert!(TransitionSpec::new(Level::new(2, -1), Level::new(1, 1)).is_err());
    let m = HyperfineModel::be9_z(22.3e-3);
    let t = TransitionSpec { lower: Level::new(2, -1), upper: Level::new(1, 1) };
    for p in [Polarization::Pi, Polarization::SigmaPlus, Polarization::SigmaMinus] {
        assert_eq!(dipole_matrix_element(&m, &t, p), 0.0);
    }
}

#[test]
fn qubit_pi_element_from_eigenvector_rotation() {
    // ⟨u|∂H/∂B|l⟩ = (E_l - E_u)·⟨u|∂_B l⟩, with ∂_B l by central differences
    let b = 22.3e-3;
    let d = 1e-7;
    let m = HyperfineModel::be9_z(b);
    let t = TransitionSpec::qubit();
    let lv = breit_rabi_levels(&m);
    let lp = breit_rabi_levels(&m.with_b0(b + d));
    let lm = breit_rabi_levels(&m.with_b0(b - d));
    let u = lv.states.column(lv.index(t.upper).unwrap());
    let dl = (lp.states.column(lp.index(t.lower).unwrap()) - lm.states.column(lm.index(t.lower).unwrap())) / (2.0 * d);
    let oracle = H * (lv.energy(t.lower) - lv.energy(t.upper)).abs() * u.dot(&dl).abs();
    let el = dipole_matrix_element(&m, &t, Polarization::Pi);
    assert!((el / oracle - 1.0).abs() < 1e-6, "{el} vs {oracle}");
}

#[test]
fn zero_field_gives_zero_shift() {
    let m = HyperfineModel::be9_z(22.3e-3);
    let z = Vector3::from_element(c(0.0));
    let s = ac_zeeman_shift(&m, &TransitionSpec::qubit(), &z, 1.0e9).unwrap();
    assert_eq!(s, 0.0);
}

#[test]
fn detuning_scaling_for_pi_field() {
    let m = HyperfineModel::be9_z(22.3e-3);
    let q = TransitionSpec::qubit();
    let f0 = breit_rabi_levels(&m).frequency(&q);
    let field = Vector3::new(c(0.0), c(0.0), c(1e-6));
    let s1 = ac_zeeman_shift(&m, &q, &field, f0 + 1e6).unwrap();
    let s2 = ac_zeeman_shift(&m, &q, &field, f0 + 2e6).unwrap();
    assert!((s1 / s2 - 2.0).abs() < 0.02, "{s1} {s2}");
}

#[test]
fn sigma_only_field_shifts_both_transitions() {
    let m = HyperfineModel::be9_z(22.3e-3);
    let f0 = breit_rabi_levels(&m).frequency(&TransitionSpec::qubit());
    let sigma = Vector3::new(c(30e-6), c(0.0), c(0.0));
    let q = ac_zeeman_shift(&m, &TransitionSpec::qubit(), &sigma, f0 * 1.01).unwrap();
    let k = ac_zeeman_shift(&m, &TransitionSpec::clock_20_10(), &sigma, f0).unwrap();
    assert!(q.abs() > 1.0 && k.abs() > 1.0, "{q} {k}");
    // the σ-driven shift of |2,0⟩↔|1,0⟩ is comparable to the π-driven one
    let pi = Vector3::new(c(0.0), c(0.0), c(30e-6));
    let kp = ac_zeeman_shift(&m, &TransitionSpec::clock_20_10(), &pi, f0).unwrap();
    let r = k.abs() / kp.abs();
    assert!(r > 0.5 && r < 2.0, "{r}");
}

#[test]
fn guard_band_names_the_resonance() {
    let m = HyperfineModel::be9_z(22.3e-3);
    let q = TransitionSpec::qubit();
    let f0 = breit_rabi_levels(&m).frequency(&q);
    let field = Vector3::new(c(0.0), c(0.0), c(1e-6));
    let err = ac_zeeman_shift(&m, &q, &field, f0 + 10.0).unwrap_err().to_string();
    assert!(err.contains("|2,1⟩↔|1,1⟩"), "{err}");
}

#[test]
fn rotating_wave_toggle_changes_shift_slightly() {
    let m = HyperfineModel::be9_z(22.3e-3);
    let t = TransitionSpec::clock_20_10();
    let f = Vector3::new(c(20e-6), c(5e-6), c(10e-6));
    let full = ac_zeeman_shift(&m, &t, &f, 1.0826e9).unwrap();
    let rwa =
        ac_zeeman_shift_with(&m, &t, &f, 1.0826e9, ShiftOptions { counter_rotating: false, ..Default::default() })
            .unwrap();
    assert!(full != rwa && (full / rwa - 1.0).abs() < 0.5);
}

#[test]
fn ramsey_fixed_points() {
    assert_eq!(simulate_ramsey(0.0, 1e-3, 0.0), 1.0);
    assert!(simulate_ramsey(500.0, 1e-3, 0.0).abs() < 1e-15);
}

#[test]
fn ramsey_phase_scan_roundtrip() {
    let t = 0.3 / 551.0;
    let phases: Vec<f64> = (0..24).map(|k| k as f64 * 2.0 * PI / 24.0).collect();
    let probs: Vec<f64> = phases.iter().map(|&p| simulate_ramsey(551.0, t, p)).collect();
    let s = fit_ramsey_phase_scan(&phases, &probs, t).unwrap();
    assert!((s - 551.0).abs() < 1.0, "{s}");
}

#[test]
fn wavepacket_size() {
    let mode = ModeSpec { omega: 2.0 * PI * 9.33e6, mass: be9_ion_mass() };
    assert!((mode.x_wp() - 7.75e-9).abs() < 0.1e-9, "{}", mode.x_wp());
}

#[test]
fn gate_time_window_and_scaling() {
    let m = HyperfineModel::be9_z(22.3e-3);
    let mode = ModeSpec { omega: 2.0 * PI * 9.33e6, mass: be9_ion_mass() };
    let q = TransitionSpec::qubit();
    let t1 = ms_gate_time(54.8, &mode, &m, &q, MsConvention::PiOverOmega).unwrap();
    let t2 = ms_gate_time(109.6, &mode, &m, &q, MsConvention::PiOverOmega).unwrap();
    assert!((60e-6..=240e-6).contains(&t1), "{t1}");
    assert!((t1 / t2 - 2.0).abs() < 1e-12);
    let t3 = ms_gate_time(54.8, &mode, &m, &q, MsConvention::TwoPiOverOmega).unwrap();
    assert!((t3 / t1 - 2.0).abs() < 1e-12);
    assert!(ms_gate_time(0.0, &mode, &m, &q, MsConvention::PiOverOmega).is_err());
}

fn uniform_map(b: Vector3<Complex64>, power: f64) -> forge::magnetostatics::FieldMap {
    use forge::magnetostatics::*;
    let grid = GridSpec::new((-2.0, 2.0, 3), (30.0, 34.0, 3), 0.0).unwrap();
    sample_source(&FnSource(move |_: &Vector3<f64>| b), &grid, DriveSpec::new(power, 1.08e9)).unwrap()
}

fn qubit_probe(m: &HyperfineModel) -> f64 {
    breit_rabi_levels(m).frequency(&TransitionSpec::qubit()) + 20e6
}

#[test]
fn uniform_map_gives_uniform_shift() {
    let m = HyperfineModel::be9_reference();
    let map = uniform_map(Vector3::new(c(3e-6), c(0.0), c(5e-6)), 1.0);
    let s = zeeman_shift_map(&m, &TransitionSpec::qubit(), &map, qubit_probe(&m)).unwrap();
    assert!(s.shift_hz.iter().all(|v| (v - s.shift_hz[0]).abs() <= 1e-12 * s.shift_hz[0]));
    assert!(s.shift_hz[0] > 0.0);
    let direct = ac_zeeman_shift(&m, &TransitionSpec::qubit(), &map.samples[0], qubit_probe(&m)).unwrap();
    assert!((s.shift_hz[0] - direct.abs()).abs() < 1e-9 * direct.abs());
}

#[test]
fn three_db_step_doubles_shift() {
    let m = HyperfineModel::be9_reference();
    let map = uniform_map(Vector3::new(c(3e-6), c(1e-6), c(5e-6)), 1.0);
    let t = TransitionSpec::qubit();
    let a = zeeman_shift_map(&m, &t, &map, qubit_probe(&m)).unwrap();
    let b = zeeman_shift_map(&m, &t, &map.at_power(10f64.powf(0.3)), qubit_probe(&m)).unwrap();
    for ((x, y), z) in a.shift_hz.iter().zip(&b.shift_hz).zip(&a.stepped().shift_hz) {
        assert!((y / x - 2.0).abs() < 0.01);
        assert!((y - z).abs() < 1e-9 * y);
    }
    assert_eq!(a.power_step_db, 3.0);
}

#[test]
fn non_finite_node_rejected() {
    let m = HyperfineModel::be9_reference();
    let mut map = uniform_map(Vector3::new(c(1e-6), c(0.0), c(0.0)), 1.0);
    map.samples[4].x = Complex64::new(f64::NAN, 0.0);
    assert!(zeeman_shift_map(&m, &TransitionSpec::qubit(), &map, qubit_probe(&m)).is_err());
}

#[test]
fn meander_shift_map_has_single_minimum_at_quadrupole_centre() {
    use forge::geometry::MeanderParams;
    use forge::magnetostatics::*;
    let model = MagneticModel::default();
    let meander = MeanderParams::default();
    let set = model.filaments(&meander).unwrap();
    let min = model.minimum(&meander).unwrap();
    let n = 21;
    let grid = GridSpec::new((min.x0 - 10.0, min.x0 + 10.0, n), (min.z0 - 10.0, min.z0 + 10.0, n), 0.0).unwrap();
    let map = sample_source(&set, &grid, model.drive).unwrap();
    let m = HyperfineModel::be9_reference();
    let s = zeeman_shift_map(&m, &TransitionSpec::qubit(), &map, qubit_probe(&m)).unwrap();
    let (i, v) = s.minimum();
    let p = grid.nodes()[i];
    assert!((p.x - min.x0).abs() <= 1.0 && (p.z - min.z0).abs() <= 1.0, "{p:?} vs {min:?}");
    // one basin: every node's shift grows moving away from the minimum along its row and column
    let at = |ix: usize, iz: usize| s.shift_hz[ix * n + iz];
    let (ix, iz) = (i / n, i % n);
    assert!((1..n).all(|k| k > ix || at(ix - k, iz) >= at(ix - k + 1, iz)));
    assert!((ix + 1..n).all(|k| at(k, iz) >= at(k - 1, iz)));
    assert!((iz + 1..n).all(|k| at(ix, k) >= at(ix, k - 1)));
    assert!(v < 1e-2 * s.shift_hz.iter().cloned().fold(0.0, f64::max));
}

fn field_strategy() -> impl Strategy<Value = Vector3<Complex64>> {
    proptest::array::uniform6(-40e-6..40e-6f64)
        .prop_map(|a| Vector3::new(Complex64::new(a[0], a[1]), Complex64::new(a[2], a[3]), Complex64::new(a[4], a[5])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energies_match_closed_form(b in 0.0..0.2f64) {
        let lv = breit_rabi_levels(&HyperfineModel::be9_z(b));
        let mut e = lv.energies_hz.clone();
        e.sort_by(f64::total_cmp);
        for (x, y) in e.iter().zip(breit_rabi_closed_form(b)) {
            prop_assert!((x - y).abs() < 1e-6 * (1.0 + y.abs()) );
        }
    }

    #[test]
    fn energy_trace_is_field_independent(b in 0.0..1.0f64) {
        let lv = breit_rabi_levels(&HyperfineModel::be9_z(b));
        let tr: f64 = lv.energies_hz.iter().sum();
        prop_assert!(tr.abs() < 1e-10 * BE9_A_HZ.abs() * 8.0);
    }

    #[test]
    fn eigenbasis_is_orthonormal(b in 0.0..1.0f64) {
        let lv = breit_rabi_levels(&HyperfineModel::be9_z(b));
        let g = lv.states.transpose() * lv.states;
        prop_assert!((g - nalgebra::SMatrix::<f64, 8, 8>::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn moment_completeness(b in 0.0..0.1f64, lvl in 0usize..8) {
        // Σ_b |⟨b|M_c|a⟩|² = ⟨a|M_c† M_c|a⟩ for each spherical component
        let m = HyperfineModel::be9_z(b);
        let lv = breit_rabi_levels(&m);
        for p in [Polarization::Pi, Polarization::SigmaPlus, Polarization::SigmaMinus] {
            let op = moment_operator(&m, p) / MU_B;
            let a = lv.states.column(lvl);
            let sum: f64 = (0..8).map(|k| lv.states.column(k).dot(&(op * a)).powi(2)).sum();
            let norm = (op * a).norm_squared();
            prop_assert!((sum - norm).abs() < 1e-10 * norm.max(1.0));
        }
    }

    #[test]
    fn shift_invariant_under_global_phase(f in field_strategy(), phi in 0.0..std::f64::consts::TAU) {
        let m = HyperfineModel::be9(22.3e-3, Vector3::new(0.5, 0.0, 0.866));
        let t = TransitionSpec::clock_20_10();
        let a = ac_zeeman_shift(&m, &t, &f, 1.0825e9).unwrap();
        let b = ac_zeeman_shift(&m, &t, &(f * Complex64::from_polar(1.0, phi)), 1.0825e9).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn kernel_matches_direct_evaluation(f in field_strategy()) {
        let m = HyperfineModel::be9(22.3e-3, Vector3::new(0.5, 0.0, 0.866));
        let t = TransitionSpec::clock_20_10();
        let k = ShiftKernel::new(&m, &t, 1.0825e9, ShiftOptions::default()).unwrap();
        let a = ac_zeeman_shift(&m, &t, &f, 1.0825e9).unwrap();
        prop_assert!((k.shift(&f) - a).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn ramsey_probability_is_bounded(s in -1e4..1e4f64, t in 0.0..1e-2f64, p in -10.0..10.0f64) {
        let x = simulate_ramsey(s, t, p);
        prop_assert!((0.0..=1.0).contains(&x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn perturbative_shift_matches_floquet(f in field_strategy()) {
        let m = HyperfineModel::be9(22.3e-3, Vector3::new(0.5, 0.0, 0.866));
        let lv = breit_rabi_levels(&m);
        let t = TransitionSpec::clock_20_10();
        let drive = lv.frequency(&TransitionSpec::qubit());
        let pert = ac_zeeman_shift(&m, &t, &f, drive).unwrap();
        let fl = floquet_level_shifts(&m, &f, drive, 3);
        let brute = fl[lv.index(t.upper).unwrap()] - fl[lv.index(t.lower).unwrap()];
        prop_assume!(pert.abs() > 1.0);
        prop_assert!((pert / brute - 1.0).abs() < 0.05, "{} vs {}", pert, brute);
    }
}
