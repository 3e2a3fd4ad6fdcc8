use forge::coupling::*;
use forge::geometry::{DiscretizeOptions, FilamentSet, ReferenceTrap};
use forge::magnetostatics::{find_field_minimum, MagneticModel};
use std::sync::OnceLock;

struct Setup {
    base: FilamentSet,
    victim: FilamentSet,
    seed: (f64, f64),
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let model = MagneticModel::default();
        let trap = ReferenceTrap::default();
        Setup {
            base: model.filaments(&trap.meander).unwrap(),
            victim: reference_victim(&trap, &DiscretizeOptions::uniform(4)).unwrap(),
            seed: model.seed,
        }
    })
}

fn sweep(spec: &CouplingSpec, phases: &[f64]) -> BackreflectionSweep {
    let s = setup();
    backreflection_sweep(&s.base, std::slice::from_ref(&s.victim), spec, phases, s.seed).unwrap()
}

fn phases(step: f64) -> Vec<f64> {
    (0..(360.0 / step) as usize).map(|k| k as f64 * step).collect()
}

fn shifts(s: &BackreflectionSweep) -> Vec<(f64, f64)> {
    s.shifted().map(|(_, dx, dz, _)| (dx, dz)).collect()
}

#[test]
fn coupled_power_values() {
    assert!((coupled_power(-27.8, 1.0).unwrap() - 1.66e-3).abs() < 0.01e-3);
    assert_eq!(coupled_power(0.0, 0.7).unwrap(), 0.7);
    assert!((coupled_power(-9.0, 1.0).unwrap() - 0.126).abs() < 1e-3);
    assert!(coupled_power(-3.0, 0.0).is_err());
}

#[test]
fn spec_validation() {
    assert!(CouplingSpec::new(1.0, 1.0, 1.0).is_err());
    assert!(CouplingSpec::new(-3.0, 1.0, 1.5).is_err());
    assert!(CouplingSpec::new(-3.0, -1.0, 0.5).is_err());
    let s = CouplingSpec::new(-27.8, 1.0, 1.0).unwrap();
    assert_eq!(s, CouplingSpec::reference());
    // sqrt(2·1.66 mW/50 Ω)
    assert!((s.victim_current() - 8.15e-3).abs() < 0.02e-3);
}

#[test]
fn no_reflection_reproduces_the_minimum() {
    let s = setup();
    let spec = CouplingSpec::new(-27.8, 1.0, 0.0).unwrap();
    let r = sweep(&spec, &[0.0, 90.0, 200.0]);
    let m = find_field_minimum(&s.base, s.seed, 0.0).unwrap();
    assert_eq!(r.unperturbed, m);
    for (_, dx, dz, res) in r.shifted() {
        assert!(dx.abs() < 1e-9 && dz.abs() < 1e-9);
        assert!((res - m.residual).abs() < 1e-6 * m.residual);
    }
    assert_eq!(r.shifted().count(), 3);
}

#[test]
fn opposite_phases_give_opposite_shifts() {
    let spec = CouplingSpec::new(-27.8, 1.0, 0.05).unwrap();
    let r = sweep(&spec, &[20.0, 200.0, 75.0, 255.0]);
    let d = shifts(&r);
    for pair in d.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        let scale = a.0.hypot(a.1);
        assert!(scale > 0.0);
        assert!((a.0 + b.0).abs() < 0.05 * scale && (a.1 + b.1).abs() < 0.05 * scale, "{a:?} {b:?}");
    }
}

#[test]
fn reference_sweep_pattern() {
    let r = sweep(&CouplingSpec::reference(), &phases(5.0));
    assert_eq!(r.shifted().count(), 72);
    // far below the few µm of a −9 dB neighbour
    assert!(r.max_displacement() < 3.0, "{}", r.max_displacement());
    assert!(r.fraction_increased() > 0.5);
    assert!(r.fraction_increased() < 1.0, "some phases must reduce the residual");
    let csv = r.to_csv_rows();
    assert!(csv.starts_with("phase_deg,dx_um,dz_um,residual_uT\n"));
    assert_eq!(csv.lines().count(), 73);
}

#[test]
fn sweep_is_periodic_bit_for_bit() {
    let spec = CouplingSpec::reference();
    let a = sweep(&spec, &[5.0, 130.0, 275.0]);
    let b = sweep(&spec, &[365.0, 490.0, -85.0]);
    for (p, q) in a.points.iter().zip(&b.points) {
        assert_eq!(p.outcome, q.outcome);
    }
}

#[test]
fn displacement_scales_with_root_power() {
    let grid = phases(15.0);
    let d: Vec<f64> = [-40.0, -34.0, -28.0]
        .iter()
        .map(|&db| sweep(&CouplingSpec::new(db, 1.0, 1.0).unwrap(), &grid).max_displacement())
        .collect();
    let step = 10f64.powf(6.0 / 20.0);
    for w in d.windows(2) {
        assert!((w[1] / w[0] / step - 1.0).abs() < 0.1, "{d:?}");
    }
}

#[test]
fn empty_inputs_rejected() {
    let s = setup();
    let spec = CouplingSpec::reference();
    assert!(backreflection_sweep(&s.base, std::slice::from_ref(&s.victim), &spec, &[], s.seed).is_err());
    assert!(backreflection_sweep(&s.base, &[], &spec, &[0.0], s.seed).is_err());
}

#[test]
fn two_victims_superpose() {
    let s = setup();
    let spec = CouplingSpec::new(-34.0, 1.0, 1.0).unwrap();
    let one = backreflection_sweep(&s.base, std::slice::from_ref(&s.victim), &spec, &[40.0], s.seed).unwrap();
    let two = backreflection_sweep(&s.base, &[s.victim.clone(), s.victim.clone()], &spec, &[40.0], s.seed).unwrap();
    let (a, b) = (shifts(&one)[0], shifts(&two)[0]);
    // the same conductor twice doubles the perturbation; linear to a few percent
    assert!((b.0 / a.0 - 2.0).abs() < 0.1 && (b.1 / a.1 - 2.0).abs() < 0.1, "{a:?} {b:?}");
}
