use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;

use super::model::{eval_quadrupole, field_norm, wrap_deg, Field2, QuadrupoleParams};
use crate::atom::{HyperfineModel, ShiftKernel, ShiftOptions, TransitionSpec};
use crate::error::{invalid, Error, Result};

/// One shift data set: a transition, a drive frequency and a power level
/// relative to the power the fitted B′ refers to.
#[derive(Debug, Clone)]
pub struct ShiftChannel {
    pub transition: TransitionSpec,
    pub drive_hz: f64,
    pub power_db: f64,
    kernel: ShiftKernel,
}

impl ShiftChannel {
    pub fn new(model: &HyperfineModel, transition: TransitionSpec, drive_hz: f64, power_db: f64) -> Result<Self> {
        let kernel = ShiftKernel::new(model, &transition, drive_hz, ShiftOptions::default())?;
        Ok(Self { transition, drive_hz, power_db, kernel })
    }

    /// Shift (Hz) for a transverse field at the reference power.
    pub fn shift(&self, f: &Field2) -> f64 {
        let s = 10f64.powf(self.power_db / 20.0);
        let z = Complex64::new(0.0, 0.0);
        self.kernel.shift(&Vector3::new(f[0] * s, z, f[1] * s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftSample {
    pub point: (f64, f64),
    pub channel: usize,
    pub shift_hz: f64,
    /// Per-point 1σ (Hz); overrides the global noise level when set.
    pub sigma_hz: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum Samples {
    /// Complex field vectors (T).
    Vector(Vec<((f64, f64), Field2)>),
    /// Field magnitudes (T).
    Magnitude(Vec<((f64, f64), f64)>),
    /// AC Zeeman shifts (Hz), composed with the atomic shift map.
    Shift { channels: Vec<ShiftChannel>, samples: Vec<ShiftSample> },
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Vector(s) => s.len(),
            Samples::Magnitude(s) => s.len(),
            Samples::Shift { samples, .. } => samples.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn points(&self) -> Vec<(f64, f64)> {
        match self {
            Samples::Vector(s) => s.iter().map(|x| x.0).collect(),
            Samples::Magnitude(s) => s.iter().map(|x| x.0).collect(),
            Samples::Shift { samples, .. } => samples.iter().map(|x| x.point).collect(),
        }
    }

    /// Residual scale of one sample value: |B| in T or |shift| in Hz.
    fn sizes(&self) -> Vec<f64> {
        match self {
            Samples::Vector(s) => s.iter().map(|x| field_norm(&x.1)).collect(),
            Samples::Magnitude(s) => s.iter().map(|x| x.1.abs()).collect(),
            Samples::Shift { samples, .. } => samples.iter().map(|x| x.shift_hz.abs()).collect(),
        }
    }

    fn is_scalar(&self) -> bool {
        !matches!(self, Samples::Vector(_))
    }

    /// Model values in residual units (µT or Hz), same layout as [`Samples::data`].
    fn model(&self, p: &QuadrupoleParams, out: &mut Vec<f64>) {
        out.clear();
        match self {
            Samples::Vector(s) => {
                for (pt, _) in s {
                    let f = eval_quadrupole(p, *pt);
                    out.extend([f[0].re * 1e6, f[0].im * 1e6, f[1].re * 1e6, f[1].im * 1e6]);
                }
            }
            Samples::Magnitude(s) => out.extend(s.iter().map(|(pt, _)| field_norm(&eval_quadrupole(p, *pt)) * 1e6)),
            Samples::Shift { channels, samples } => {
                out.extend(samples.iter().map(|x| channels[x.channel].shift(&eval_quadrupole(p, x.point))))
            }
        }
    }

    fn data(&self) -> Vec<f64> {
        match self {
            Samples::Vector(s) => {
                s.iter().flat_map(|(_, f)| [f[0].re * 1e6, f[0].im * 1e6, f[1].re * 1e6, f[1].im * 1e6]).collect()
            }
            Samples::Magnitude(s) => s.iter().map(|x| x.1 * 1e6).collect(),
            Samples::Shift { samples, .. } => samples.iter().map(|x| x.shift_hz).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Hold B at 0.
    pub fix_b: bool,
    /// Hold α at 0.
    pub fix_alpha: bool,
    pub max_iter: usize,
    /// Known 1σ of each data value (T for fields, Hz for shifts). When absent
    /// it is estimated from the residuals.
    pub noise: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { fix_b: false, fix_alpha: false, max_iter: 400, noise: None }
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub params: QuadrupoleParams,
    pub chi2: f64,
    pub dof: usize,
    pub iterations: usize,
    /// χ² after each accepted step, starting with the initial guess.
    pub chi2_history: Vec<f64>,
}

// internal vector: B (µT), B′ (T/m), α, β, ψ (rad), x0, z0 (µm)
fn from_internal(t: &[f64; 7]) -> QuadrupoleParams {
    QuadrupoleParams::from_array([
        t[0] * 1e-6,
        t[1],
        t[2].to_degrees(),
        t[3].to_degrees(),
        t[4].to_degrees(),
        t[5],
        t[6],
    ])
}

struct Problem<'a> {
    samples: &'a Samples,
    data: Vec<f64>,
    free: Vec<usize>,
    base: [f64; 7],
    weights: Vec<f64>,
}

impl Problem<'_> {
    fn full(&self, x: &[f64]) -> [f64; 7] {
        let mut t = self.base;
        for (k, &i) in self.free.iter().enumerate() {
            t[i] = x[k];
        }
        t
    }

    fn residuals(&self, x: &[f64]) -> DVector<f64> {
        let mut m = Vec::with_capacity(self.data.len());
        self.samples.model(&from_internal(&self.full(x)), &mut m);
        DVector::from_iterator(m.len(), m.iter().zip(&self.data).zip(&self.weights).map(|((a, b), w)| (a - b) * w))
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.data.len();
        let mut j = DMatrix::zeros(n, x.len());
        for k in 0..x.len() {
            let h = 1e-6 * x[k].abs().max(1e-2);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            let d = (self.residuals(&xp) - self.residuals(&xm)) / (2.0 * h);
            j.set_column(k, &d);
        }
        j
    }
}

struct Solution {
    x: Vec<f64>,
    chi2: f64,
    iterations: usize,
    history: Vec<f64>,
}

fn levenberg_marquardt(prob: &Problem, x0: Vec<f64>, max_iter: usize) -> Solution {
    let mut x = x0;
    let mut r = prob.residuals(&x);
    let mut chi2 = r.norm_squared();
    let mut history = vec![chi2];
    let mut lambda = 1e-3;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let j = prob.jacobian(&x);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..x.len() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rn = prob.residuals(&xn);
            let c = rn.norm_squared();
            if c.is_finite() && c < chi2 {
                let small = step.iter().zip(&xn).all(|(d, v)| d.abs() <= 1e-12 * v.abs().max(1e-2));
                let gain = (chi2 - c) / chi2.max(1e-300);
                x = xn;
                r = rn;
                chi2 = c;
                history.push(chi2);
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if small || gain < 1e-15 {
                    return Solution { x, chi2, iterations: it, history };
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    Solution { x, chi2, iterations: it, history }
}

/// Least-squares fit of the 7-parameter quadrupole. Multi-start over
/// β ∈ {0°, 45°, 90°, 135°} and ψ ∈ {0°, ±30°}; uncertainties from the Jacobian at the optimum.
pub fn fit_quadrupole(samples: &Samples, opts: &FitOptions) -> Result<FitReport> {
    let mut free: Vec<usize> = vec![1, 3, 4, 5, 6];
    if !opts.fix_b {
        free.push(0);
    }
    if !opts.fix_alpha {
        free.push(2);
    }
    free.sort_unstable();
    let per = if matches!(samples, Samples::Vector(_)) { 4 } else { 1 };
    if samples.len() < free.len() || samples.len() * per <= free.len() {
        return Err(invalid("samples", format!("{} samples for {} free parameters", samples.len(), free.len())));
    }
    if let Some(n) = opts.noise {
        if !(n > 0.0) {
            return Err(invalid("noise", "must be positive"));
        }
    }
    let weight = match (opts.noise, samples) {
        (Some(n), Samples::Shift { .. }) => 1.0 / n,
        (Some(n), _) => 1.0 / (n * 1e6),
        (None, _) => 1.0,
    };
    let data = samples.data();
    let mut weights = vec![weight; data.len()];
    let mut per_point = false;
    if let Samples::Shift { samples: s, .. } = samples {
        for (w, x) in weights.iter_mut().zip(s) {
            if let Some(sig) = x.sigma_hz {
                if !(sig > 0.0) {
                    return Err(invalid("sigma_hz", "must be positive"));
                }
                *w = 1.0 / sig;
                per_point = true;
            }
        }
    }
    let points = samples.points();
    let sizes = samples.sizes();
    let imin = (0..sizes.len()).min_by(|&a, &b| sizes[a].total_cmp(&sizes[b])).unwrap();
    let (cx, cz) = points[imin];

    let mut best: Option<(Solution, Problem)> = None;
    // At ψ = 0 the offset and a centre shift are parallel and vector fits can
    // walk off with both growing together, hence the extra ψ = ±30° starts.
    let starts = [0.0f64, 45.0, 90.0, 135.0].into_iter().flat_map(|b| [(b, 0.0f64), (b, 30.0), (b, -30.0)]);
    for (beta0, psi0) in starts {
        let mut t = [0.0, 1.0, 0.0, beta0.to_radians(), psi0.to_radians(), cx, cz];
        // scale B′ to the data at unit gradient
        let mut m = Vec::new();
        samples.model(&from_internal(&t), &mut m);
        let (num, den) = m.iter().zip(&data).fold((0.0, 0.0), |(n, d), (a, b)| (n + a * b, d + a * a));
        let s = if den > 0.0 { num / den } else { 1.0 };
        t[1] = match samples {
            Samples::Shift { .. } => s.abs().sqrt(),
            _ => s.abs(),
        }
        .max(1e-6);
        if !opts.fix_b {
            t[0] = 0.01 * t[1];
        }
        let prob = Problem { samples, data: data.clone(), free: free.clone(), base: t, weights: weights.clone() };
        let x0: Vec<f64> = free.iter().map(|&i| t[i]).collect();
        let sol = levenberg_marquardt(&prob, x0, opts.max_iter);
        if best.as_ref().is_none_or(|(b, _)| sol.chi2 < b.chi2) {
            best = Some((sol, prob));
        }
    }
    let (sol, prob) = best.unwrap();
    let j = prob.jacobian(&sol.x);
    let jtj = j.transpose() * &j;
    let d: Vec<f64> = (0..jtj.nrows()).map(|k| jtj[(k, k)].sqrt()).collect();
    // Move each parameter by 1% of a natural scale and see whether the data
    // change at all. A stationary parameter still shows at second order, while
    // an exact invariance leaves only roundoff, which a Jacobian column alone
    // cannot tell apart once the diagonal scaling below is applied.
    let full = prob.full(&sol.x);
    let extent = sample_extent(&points);
    let natural = |i: usize| match i {
        0 => full[1].abs() * extent,
        1 => full[1].abs(),
        2..=4 => 1.0,
        _ => extent,
    };
    let size = data.iter().zip(&weights).map(|(a, w)| (a * w).powi(2)).sum::<f64>().sqrt();
    let r0 = prob.residuals(&sol.x);
    let moved = |k: usize, step: f64| {
        let mut x = sol.x.clone();
        x[k] += step;
        (prob.residuals(&x) - &r0).norm()
    };
    let inert = |k: usize, i: usize| {
        let step = 0.01 * natural(i);
        !(d[k] > 0.0) || !(moved(k, step).max(moved(k, -step)) > 1e-12 * size)
    };
    if free.iter().enumerate().any(|(k, &i)| inert(k, i)) {
        return Err(Error::RankDeficient("a parameter does not affect the data".into()));
    }
    let scaled = DMatrix::from_fn(jtj.nrows(), jtj.ncols(), |a, b| jtj[(a, b)] / (d[a] * d[b]));
    let eig = scaled.clone().symmetric_eigen();
    let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    if lo <= 1e-12 * hi {
        return Err(Error::RankDeficient(format!(
            "sample geometry does not determine all parameters (cond {:.1e})",
            hi / lo.max(1e-300)
        )));
    }
    let inv = scaled.try_inverse().ok_or_else(|| Error::RankDeficient("singular normal matrix".into()))?;
    let dof = data.len() - free.len();
    let s2 = if opts.noise.is_some() || per_point { 1.0 } else { sol.chi2 / dof.max(1) as f64 };

    let mut t = prob.full(&sol.x);
    let mut sig_int = [f64::NAN; 7];
    for (k, &i) in free.iter().enumerate() {
        sig_int[i] = (inv[(k, k)] * s2).sqrt() / d[k];
    }
    normalize(&mut t, samples.is_scalar());
    let mut params = from_internal(&t);
    params.sigma = Some([
        sig_int[0] * 1e-6,
        sig_int[1],
        sig_int[2].to_degrees(),
        sig_int[3].to_degrees(),
        sig_int[4].to_degrees(),
        sig_int[5],
        sig_int[6],
    ]);
    Ok(FitReport { params, chi2: sol.chi2, dof, iterations: sol.iterations, chi2_history: sol.history })
}

fn sample_extent(points: &[(f64, f64)]) -> f64 {
    let span = |f: fn(&(f64, f64)) -> f64| {
        let (lo, hi) = points.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        hi - lo
    };
    span(|p| p.0).max(span(|p| p.1)).max(1e-3)
}

// B ≥ 0, B′ > 0 and angles in (−180°, 180°]. For scalar data the field's global
// sign is invisible, so β is folded into (−90°, 90°] together with α; with
// B = 0 the data are also unchanged by ψ → 180° − ψ, so ψ is folded into [−90°, 90°].
fn normalize(t: &mut [f64; 7], scalar: bool) {
    use std::f64::consts::PI;
    if t[0] < 0.0 {
        t[0] = -t[0];
        t[2] += PI;
    }
    if t[1] < 0.0 {
        t[1] = -t[1];
        t[3] += PI;
    }
    // the gradient term carries e^{±iψ/2}, so a full turn of ψ flips its sign
    // just as β → β + 180° does
    let turns = ((t[4].to_degrees() - wrap_deg(t[4].to_degrees())) / 360.0).round();
    if turns.rem_euclid(2.0) == 1.0 {
        t[3] += PI;
    }
    if scalar {
        let b = wrap_deg(t[3].to_degrees());
        if b > 90.0 || b <= -90.0 {
            t[3] -= PI;
            t[2] += PI;
        }
    }
    for a in &mut t[2..5] {
        *a = wrap_deg(a.to_degrees()).to_radians();
    }
    if t[0] == 0.0 {
        t[2] = 0.0;
        if scalar && t[4].abs() > PI / 2.0 {
            t[4] = t[4].signum() * PI - t[4];
        }
    }
}
