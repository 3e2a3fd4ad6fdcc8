use std::f64::consts::PI;

use forge::constants::MU_0;
use forge::geometry::{FilamentSet, MeanderParams};
use forge::magnetostatics::*;
use forge::Error;
use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn wire(x: f64, z: f64, current: Complex64) -> (Vector3<f64>, Vector3<f64>, Complex64) {
    (Vector3::new(x, -5e5, z), Vector3::new(x, 5e5, z), current)
}

/// Ideal 2D quadrupole B = G·(u, 0, −v) plus a uniform offset, u, v in m.
fn analytic_quadrupole(g: f64, x0: f64, z0: f64, offset: Vector3<f64>) -> impl Fn(&Vector3<f64>) -> CVec3 + Sync {
    move |p: &Vector3<f64>| {
        let (u, v) = ((p.x - x0) * 1e-6, (p.z - z0) * 1e-6);
        Vector3::new(c(g * u + offset.x), c(offset.y), c(-g * v + offset.z))
    }
}

#[test]
fn long_wire_matches_infinite_line() {
    let set = FilamentSet::from_segments(&[wire(0.0, 0.0, c(1.0))]);
    let b = field_at(&set, &Vector3::new(0.0, 0.0, 35.0)).unwrap();
    let want = MU_0 / (2.0 * PI * 35e-6);
    assert!((b.norm() / want - 1.0).abs() < 1e-6, "{}", b.norm());
    assert!((want - 5.71e-3).abs() < 1e-5);
    // current along +y, point above: field along +x
    assert!(b.x.re > 0.0 && b.y.norm() < 1e-20 && b.z.norm() < 1e-12 * want);
}

#[test]
fn finite_segment_matches_closed_form() {
    // B = µ0 I/(4π ρ)·(sin θ2 − sin θ1) on the perpendicular through the segment
    let set = FilamentSet::from_segments(&[(Vector3::new(0.0, -30.0, 0.0), Vector3::new(0.0, 70.0, 0.0), c(2.0))]);
    let rho = 25.0;
    let b = field_at(&set, &Vector3::new(rho, 0.0, 0.0)).unwrap();
    let s = |l: f64| l / (l * l + rho * rho).sqrt();
    let want = MU_0 * 2.0 / (4.0 * PI * rho * 1e-6) * (s(70.0) + s(30.0));
    assert!((b.norm() / want - 1.0).abs() < 1e-12);
}

#[test]
fn antiparallel_pair_is_vertical_on_midplane() {
    let set = FilamentSet::from_segments(&[wire(-10.0, 0.0, c(1.0)), wire(10.0, 0.0, c(-1.0))]);
    for z in [5.0, 20.0, 60.0] {
        let b = field_at(&set, &Vector3::new(0.0, 0.0, z)).unwrap();
        assert!(b.norm() > 0.0);
        assert!(b.x.norm() < 1e-12 * b.norm() && b.y.norm() < 1e-12 * b.norm());
    }
}

#[test]
fn reversed_currents_flip_field() {
    let set = FilamentSet::from_segments(&[wire(-10.0, 0.0, Complex64::new(1.0, 0.3)), wire(7.0, -2.0, c(0.4))]);
    let p = Vector3::new(3.0, 1.0, 30.0);
    let a = field_at(&set, &p).unwrap();
    let b = field_at(&set.scaled(c(-1.0)), &p).unwrap();
    assert!((a + b).norm() < 1e-20);
}

#[test]
fn point_on_filament_rejected() {
    let set = FilamentSet::from_segments(&[wire(0.0, 0.0, c(1.0))]);
    let r = field_at(&set, &Vector3::new(0.0, 3.0, 0.0005));
    assert!(matches!(r, Err(Error::BadPoint { .. })));
    assert!(field_at(&set, &Vector3::new(0.0, 3.0, 0.01)).is_ok());
}

#[test]
fn one_node_map_equals_field_at() {
    let set = FilamentSet::from_segments(&[wire(0.0, 0.0, c(1.0))]);
    let drive = DriveSpec::new(1.0, 1e9);
    let map = field_map(&set, &GridSpec::point(2.0, 30.0, 0.0), drive).unwrap();
    let direct = field_at(&set.scaled(c(drive.current())), &Vector3::new(2.0, 0.0, 30.0)).unwrap();
    assert_eq!(map.samples.len(), 1);
    assert!((map.samples[0] - direct).norm() < 1e-20);
    assert!((drive.current() - 0.2).abs() < 1e-15);
}

#[test]
fn doubling_power_scales_by_sqrt_two() {
    let set = FilamentSet::from_segments(&[wire(-5.0, 0.0, c(1.0)), wire(5.0, 0.0, c(-0.5))]);
    let grid = GridSpec::new((-10.0, 10.0, 5), (20.0, 40.0, 4), 0.0).unwrap();
    let a = field_map(&set, &grid, DriveSpec::new(1.0, 1e9)).unwrap();
    let b = field_map(&set, &grid, DriveSpec::new(2.0, 1e9)).unwrap();
    assert_eq!(a.samples.len(), 20);
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert!((y - x * c(2f64.sqrt())).norm() < 1e-15 * y.norm());
    }
    let csv = a.to_csv_rows();
    assert!(csv.starts_with("x_um,z_um,ReBx,ImBx,ReBy,ImBy,ReBz,ImBz\n"));
    assert_eq!(csv.lines().count(), 21);
    assert!(field_map(&set, &grid, DriveSpec::new(0.0, 1e9)).is_err());
}

#[test]
fn grid_must_be_increasing() {
    assert!(GridSpec::new((1.0, 0.0, 3), (0.0, 1.0, 3), 0.0).is_err());
    assert!(GridSpec::new((0.0, 1.0, 0), (0.0, 1.0, 3), 0.0).is_err());
}

#[test]
fn analytic_quadrupole_recovered_exactly() {
    let src = FnSource(analytic_quadrupole(28.0, 0.75, 34.55, Vector3::zeros()));
    let m = find_field_minimum(&src, (3.0, 30.0), 0.0).unwrap();
    assert!((m.x0 - 0.75).abs() < 1e-9 && (m.z0 - 34.55).abs() < 1e-9, "{m:?}");
    assert!((m.gradient - 28.0).abs() < 1e-9 * 28.0);
    assert!(m.residual < 1e-12);
}

#[test]
fn residual_offset_reported() {
    let off = Vector3::new(0.0, 2e-6, 0.0);
    let src = FnSource(analytic_quadrupole(28.0, 1.0, 30.0, off));
    let m = find_field_minimum(&src, (0.0, 31.0), 0.0).unwrap();
    assert!((m.residual - 2e-6).abs() < 1e-12);
}

#[test]
fn flat_field_rejected() {
    let src = FnSource(|_: &Vector3<f64>| Vector3::new(c(1e-6), c(0.0), c(0.0)));
    assert!(matches!(find_field_minimum(&src, (0.0, 30.0), 0.0), Err(Error::FlatLandscape(_))));
}

#[test]
fn meander_minimum_near_ion_height() {
    let model = MagneticModel::default();
    let m = model.minimum(&MeanderParams::default()).unwrap();
    assert!(m.x0.abs() < 1.0 && (m.z0 - 34.55).abs() < 1.5, "{m:?}");
    assert!(m.gradient > 14.0 && m.gradient < 56.0);
}

#[test]
fn pocket_suppresses_residual_and_saturates() {
    let model = MagneticModel::default();
    let l: Vec<f64> = (0..=6).map(|k| 50.0 * k as f64).collect();
    let study = pocket_study(&MeanderParams::default(), &l, &model).unwrap();
    let b = |lth: f64| study.rows.iter().find(|r| r.l_th == lth).unwrap().minimum;
    let (solid, pocket) = (b(0.0), b(200.0));
    assert!(solid.residual > 3.5e-6 && solid.residual < 14e-6, "{}", solid.residual);
    assert!(pocket.residual > 0.4e-6 && pocket.residual < 1.6e-6, "{}", pocket.residual);
    assert!(solid.residual / pocket.residual >= 5.0);
    assert!(study.monotone);
    assert!((b(200.0).residual - b(250.0).residual).abs() / b(200.0).residual < 0.05);
    let g0 = solid.gradient;
    assert!(study.rows.iter().all(|r| (r.minimum.gradient / g0 - 1.0).abs() < 0.02));
    assert!(pocket_study(&MeanderParams::default(), &[1000.0], &model).is_err());
    assert!(pocket_study(&MeanderParams::default(), &[], &model).is_err());
}

#[test]
fn meander_field_is_divergence_and_curl_free() {
    let model = MagneticModel::default();
    let set = model.filaments(&MeanderParams::default()).unwrap();
    for (x, z) in [(-20.0, 25.0), (0.0, 35.0), (15.0, 50.0), (40.0, 30.0)] {
        let (div, curl) = field_law_ratios(&set, &Vector3::new(x, 0.0, z), 1e-2).unwrap();
        assert!(div < 1e-2 && curl < 1e-2, "({x}, {z}): {div} {curl}");
    }
}

#[test]
fn skin_depth_of_gold_near_one_gigahertz() {
    let d = skin_depth_au_um(1.0826e9);
    assert!((d - 2.39).abs() < 0.05, "{d}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phase_shift_multiplies_map(phi in 0.0f64..std::f64::consts::TAU) {
        let set = FilamentSet::from_segments(&[wire(-8.0, 0.0, Complex64::new(1.0, 0.2)), wire(8.0, 0.0, c(-0.7))]);
        let grid = GridSpec::new((-10.0, 10.0, 3), (20.0, 40.0, 3), 0.0).unwrap();
        let e = Complex64::from_polar(1.0, phi);
        let a = sample_source(&set, &grid, DriveSpec::new(1.0, 1e9)).unwrap();
        let b = sample_source(&set.scaled(e), &grid, DriveSpec::new(1.0, 1e9)).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            prop_assert!((y - x * e).norm() <= 1e-14 * x.norm());
        }
    }

    #[test]
    fn minimum_independent_of_power(scale in 0.01f64..100.0, g in 5.0f64..80.0, x0 in -3.0f64..3.0, z0 in 25.0f64..45.0) {
        let f = analytic_quadrupole(g, x0, z0, Vector3::new(1e-7, 0.0, 0.0));
        let src = FnSource(&f);
        let scaled = FnSource(|p: &Vector3<f64>| f(p) * c(scale));
        let a = find_field_minimum(&src, (x0 + 1.0, z0 - 1.0), 0.0).unwrap();
        let b = find_field_minimum(&scaled, (x0 + 1.0, z0 - 1.0), 0.0).unwrap();
        prop_assert!((a.x0 - b.x0).abs() < 1e-6 && (a.z0 - b.z0).abs() < 1e-6);
        prop_assert!((b.gradient / a.gradient - scale).abs() < 1e-6 * scale);
    }

    #[test]
    fn closed_loop_is_divergence_and_curl_free(x in -30.0f64..30.0, z in 5.0f64..60.0) {
        // an open segment is not a magnetostatic source, so close the circuit
        let v = |x: f64, y: f64| Vector3::new(x, y, 0.0);
        let corners = [v(-40.0, -200.0), v(40.0, -200.0), v(40.0, 200.0), v(-40.0, 200.0)];
        let segs: Vec<_> = (0..4).map(|k| (corners[k], corners[(k + 1) % 4], c(1.0))).collect();
        let set = FilamentSet::from_segments(&segs);
        let (div, curl) = field_law_ratios(&set, &Vector3::new(x, 0.0, z), 1e-2).unwrap();
        prop_assert!(div < 1e-2 && curl < 1e-2);
    }
}
