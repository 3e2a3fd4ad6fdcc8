use forge::atom::{breit_rabi_levels, HyperfineModel, TransitionSpec};
use forge::quadrupole::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(p: &QuadrupoleParams, half: f64, n: usize) -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for i in 0..n {
        for k in 0..n {
            let t = |j: usize| -half + 2.0 * half * j as f64 / (n - 1) as f64;
            v.push((p.x0 + t(i), p.z0 + t(k)));
        }
    }
    v
}

fn vector_samples(p: &QuadrupoleParams, half: f64, n: usize) -> Samples {
    Samples::Vector(grid(p, half, n).into_iter().map(|pt| (pt, eval_quadrupole(p, pt))).collect())
}

fn assert_params_close(a: &QuadrupoleParams, b: &QuadrupoleParams, rel: f64) {
    for (k, (x, y)) in a.to_array().iter().zip(b.to_array()).enumerate() {
        let tol = rel * y.abs().max(if k >= 2 { 1.0 } else { 0.0 });
        assert!((x - y).abs() <= tol, "{}: {x} vs {y}", PARAM_NAMES[k]);
    }
}

fn qubit_hz(m: &HyperfineModel) -> f64 {
    breit_rabi_levels(m).frequency(&TransitionSpec::qubit())
}

#[test]
fn value_at_centre_is_residual() {
    let p = QuadrupoleParams::table_simulation();
    let f = eval_quadrupole(&p, (p.x0, p.z0));
    let e = Complex64::from_polar(p.b, p.psi.to_radians());
    let a = p.alpha.to_radians();
    assert!((f[0] - e * a.cos()).norm() < 1e-20);
    assert!((f[1] - e * a.sin()).norm() < 1e-20);
}

#[test]
fn table_simulation_one_micron_out() {
    let p = QuadrupoleParams::table_simulation();
    for ang in [0.0f64, 1.0, 2.5, 4.0] {
        let pt = (p.x0 + ang.cos(), p.z0 + ang.sin());
        let f = eval_quadrupole(&p, pt);
        let mag = field_norm(&f);
        assert!((mag - 54.8e-6).abs() <= p.b + 1e-15, "{mag}");
        // independent evaluation with explicit matrices
        let (sb, cb) = p.beta.to_radians().sin_cos();
        let h = Complex64::from_polar(1.0, p.psi.to_radians() / 2.0);
        let (u, v) = (ang.cos() * 1e-6, ang.sin() * 1e-6);
        let g = [h.conj() * (cb * u + sb * v) * p.b_grad, h * (sb * u - cb * v) * p.b_grad];
        let r = eval_quadrupole(&p, (p.x0, p.z0));
        assert!((f[0] - g[0] - r[0]).norm() < 1e-18 && (f[1] - g[1] - r[1]).norm() < 1e-18);
    }
}

#[test]
fn noiseless_vector_roundtrip() {
    let p = QuadrupoleParams::table_simulation();
    let r = fit_quadrupole(&vector_samples(&p, 3.0, 7), &FitOptions::default()).unwrap();
    assert_params_close(&r.params, &p, 1e-6);
}

#[test]
fn noiseless_shift_roundtrip_with_fixed_residual() {
    let p = QuadrupoleParams::table_experiment();
    let exp = ShiftExperiment::default();
    let s = exp.clean(&p).unwrap();
    let r = fit_quadrupole(&s, &FitOptions { fix_b: true, fix_alpha: true, ..Default::default() }).unwrap();
    assert_params_close(&r.params, &QuadrupoleParams { sigma: None, ..p }, 1e-6);
    assert_eq!(r.params.b, 0.0);
    assert_eq!(r.params.alpha, 0.0);
}

#[test]
fn scalar_fit_returns_folded_beta() {
    // β and β − 180° give the same shift data when B = 0
    let truth = QuadrupoleParams::new(0.0, 54.8, 0.0, 86.8 - 180.0, 1.5, 34.62, 0.6).unwrap();
    let s = ShiftExperiment::default().clean(&truth).unwrap();
    let r = fit_quadrupole(&s, &FitOptions { fix_b: true, fix_alpha: true, ..Default::default() }).unwrap();
    assert!((r.params.beta - 86.8).abs() < 1e-6, "{}", r.params.beta);
    assert!(r.params.b_grad > 0.0);
}

#[test]
fn beta_half_turn_flips_sign_only() {
    let p = QuadrupoleParams::table_simulation();
    let q = QuadrupoleParams { beta: p.beta - 180.0, alpha: p.alpha - 180.0, ..p };
    for pt in grid(&p, 2.0, 4) {
        let (a, b) = (eval_quadrupole(&p, pt), eval_quadrupole(&q, pt));
        assert!((a[0] + b[0]).norm() < 1e-18 && (a[1] + b[1]).norm() < 1e-18);
    }
}

#[test]
fn collinear_samples_are_rank_deficient() {
    let p = QuadrupoleParams::table_experiment();
    let s: Vec<_> = (0..15)
        .map(|i| {
            let t = -3.0 + 6.0 * i as f64 / 14.0;
            let pt = (p.x0 + 0.6 * t, p.z0 + 0.8 * t);
            (pt, field_norm(&eval_quadrupole(&p, pt)))
        })
        .collect();
    let r = fit_quadrupole(&Samples::Magnitude(s), &FitOptions { fix_b: true, fix_alpha: true, ..Default::default() });
    assert!(matches!(r, Err(forge::Error::RankDeficient(_))), "{r:?}");
}

#[test]
fn too_few_samples_rejected() {
    let p = QuadrupoleParams::table_simulation();
    let s: Vec<_> = grid(&p, 1.0, 2).into_iter().map(|pt| (pt, field_norm(&eval_quadrupole(&p, pt)))).collect();
    assert!(fit_quadrupole(&Samples::Magnitude(s), &FitOptions::default()).is_err());
}

#[test]
fn centre_invariant_under_uniform_scaling() {
    let p = QuadrupoleParams::table_simulation();
    let pts = grid(&p, 3.0, 7);
    let fit = |scale: f64| {
        let s = pts
            .iter()
            .map(|&pt| {
                let f = eval_quadrupole(&p, pt);
                (pt, [f[0] * scale, f[1] * scale])
            })
            .collect();
        fit_quadrupole(&Samples::Vector(s), &FitOptions::default()).unwrap().params
    };
    let (a, b) = (fit(1.0), fit(3.0));
    assert!((a.x0 - b.x0).abs() < 1e-6 && (a.z0 - b.z0).abs() < 1e-6);
    assert!((b.b_grad / a.b_grad - 3.0).abs() < 1e-6);
}

#[test]
fn magnitude_of_pure_quadrupole_hides_orientation() {
    let p = QuadrupoleParams::table_experiment();
    let s = grid(&p, 3.0, 7).into_iter().map(|pt| (pt, field_norm(&eval_quadrupole(&p, pt)))).collect();
    let r = fit_quadrupole(&Samples::Magnitude(s), &FitOptions { fix_b: true, fix_alpha: true, ..Default::default() });
    assert!(matches!(r, Err(forge::Error::RankDeficient(_))), "{:?}", r.map(|r| r.params));
}

#[test]
fn chi2_decreases_monotonically() {
    let truth = QuadrupoleParams::table_experiment();
    let exp = ShiftExperiment::default().calibrated(&truth, 1.2).unwrap();
    let mut rng = <rand::rngs::StdRng as rand::SeedableRng>::seed_from_u64(3);
    let s = exp.noisy(&truth, &mut rng).unwrap();
    let r = fit_quadrupole(&s, &FitOptions { fix_b: true, fix_alpha: true, ..Default::default() }).unwrap();
    assert!(r.chi2_history.len() > 2);
    assert!(r.chi2_history.windows(2).all(|w| w[1] < w[0]));
    // χ² per degree of freedom near one when the noise model is right
    assert!((r.chi2 / r.dof as f64 - 1.0).abs() < 0.5, "{}", r.chi2 / r.dof as f64);
}

#[test]
fn small_monte_carlo_gradient_spread() {
    let truth = QuadrupoleParams::table_experiment();
    let exp = ShiftExperiment::default().calibrated(&truth, 1.2).unwrap();
    let mc = monte_carlo(&truth, &exp, 40, 11).unwrap();
    assert_eq!(mc.failures, 0);
    assert!((mc.spread[1] / 1.2 - 1.0).abs() < 0.5, "{}", mc.spread[1]);
    assert!((mc.mean[1] - 54.8).abs() < 1.0);
}

#[test]
fn bound_matches_quoted_value() {
    let m = HyperfineModel::be9_reference();
    let fit = QuadrupoleParams::table_experiment();
    let drive = ProbeDrive { frequency_hz: qubit_hz(&m), power_db: 3.0 };
    let b = bound_residual_field(551.0, &TransitionSpec::clock_20_10(), &drive, &fit, &m).unwrap();
    assert!((b / 33.6e-6 - 1.0).abs() < 0.15, "{b}");
}

#[test]
fn bound_zero_and_sqrt_scaling() {
    let m = HyperfineModel::be9_reference();
    let fit = QuadrupoleParams::table_experiment();
    let drive = ProbeDrive { frequency_hz: qubit_hz(&m), power_db: 0.0 };
    let t = TransitionSpec::clock_20_10();
    assert_eq!(bound_residual_field(0.0, &t, &drive, &fit, &m).unwrap(), 0.0);
    let a = bound_residual_field(100.0, &t, &drive, &fit, &m).unwrap();
    let b = bound_residual_field(400.0, &t, &drive, &fit, &m).unwrap();
    assert!((b / a - 2.0).abs() < 1e-12);
    assert!(bound_residual_field(-1.0, &t, &drive, &fit, &m).is_err());
    // +3 dB on the probe lowers the bound referred to the fit power by √2
    let up = ProbeDrive { power_db: 3.0, ..drive };
    let c = bound_residual_field(100.0, &t, &up, &fit, &m).unwrap();
    assert!((a / c - 10f64.powf(0.15)).abs() < 1e-12);
}

#[test]
fn bound_minimised_at_alpha_zero() {
    // the residual direction along x couples least to |2,0⟩↔|1,0⟩ for this B0
    let m = HyperfineModel::be9_reference();
    let ch = ShiftChannel::new(&m, TransitionSpec::clock_20_10(), qubit_hz(&m), 0.0).unwrap();
    let at = |deg: f64| {
        let p = QuadrupoleParams::new(30e-6, 1.0, deg, 0.0, 0.0, 0.0, 0.0).unwrap();
        ch.shift(&eval_quadrupole(&p, (0.0, 0.0))).abs()
    };
    let s0 = at(0.0);
    assert!((1..36).all(|k| at(k as f64 * 5.0) >= s0 - 1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pure_quadrupole_is_isotropic(g in 1.0f64..100.0, beta in -180.0f64..180.0, psi in -180.0f64..180.0,
                                    dx in -5.0f64..5.0, dz in -5.0f64..5.0) {
        let p = QuadrupoleParams::new(0.0, g, 0.0, beta, psi, 1.0, 2.0).unwrap();
        let f = eval_quadrupole(&p, (1.0 + dx, 2.0 + dz));
        let want = g * (dx * dx + dz * dz).sqrt() * 1e-6;
        prop_assert!((field_norm(&f) - want).abs() <= 1e-12 * want.max(1e-12));
    }

    #[test]
    fn vector_roundtrip(b in 0.5e-6f64..20e-6, g in 1.0f64..100.0, alpha in -170.0f64..170.0,
                        beta in -170.0f64..170.0, psi in 5.0f64..60.0, x0 in -5.0f64..5.0, z0 in 20.0f64..50.0) {
        let p = QuadrupoleParams::new(b, g, alpha, beta, psi, x0, z0).unwrap();
        let r = fit_quadrupole(&vector_samples(&p, 3.0, 6), &FitOptions::default()).unwrap();
        let (a, t) = (r.params.to_array(), p.to_array());
        for k in 0..7 {
            let d = if (2..5).contains(&k) { wrap_deg(a[k] - t[k]) } else { a[k] - t[k] };
            prop_assert!(d.abs() <= 1e-6 * t[k].abs().max(1.0), "{} {} vs {}", PARAM_NAMES[k], a[k], t[k]);
        }
    }
}
