use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::fit::{fit_quadrupole, FitOptions, Samples, ShiftChannel, ShiftSample};
use super::model::{eval_quadrupole, wrap_deg, QuadrupoleParams};
use crate::atom::{breit_rabi_levels, HyperfineModel, TransitionSpec};
use crate::error::{invalid, Result};

/// Synthetic Ramsey shift mapping: a qubit data set at the reference power and
/// a |2,0⟩↔|1,0⟩ data set at a higher power, on a rectangular grid around the
/// quadrupole centre. Point noise is `noise_scale·(|shift| + floor·max|shift|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftExperiment {
    pub model: HyperfineModel,
    /// Qubit-row drive offset from the qubit resonance (Hz).
    pub qubit_detuning_hz: f64,
    /// Drive of the |2,0⟩↔|1,0⟩ row; defaults to the qubit frequency.
    pub clock_drive_hz: f64,
    pub clock_power_db: f64,
    /// Half extents of the scan in x and z (µm).
    pub half_widths: (f64, f64),
    pub points_per_axis: usize,
    pub noise_scale: f64,
    pub noise_floor: f64,
}

impl Default for ShiftExperiment {
    fn default() -> Self {
        let model = HyperfineModel::be9_reference();
        let fq = breit_rabi_levels(&model).frequency(&TransitionSpec::qubit());
        Self {
            model,
            qubit_detuning_hz: 20e6,
            clock_drive_hz: fq,
            clock_power_db: 3.0,
            half_widths: (3.0, 3.0),
            points_per_axis: 9,
            noise_scale: 0.4,
            noise_floor: 0.1,
        }
    }
}

impl ShiftExperiment {
    pub fn channels(&self) -> Result<Vec<ShiftChannel>> {
        let fq = breit_rabi_levels(&self.model).frequency(&TransitionSpec::qubit());
        Ok(vec![
            ShiftChannel::new(&self.model, TransitionSpec::qubit(), fq + self.qubit_detuning_hz, 0.0)?,
            ShiftChannel::new(&self.model, TransitionSpec::clock_20_10(), self.clock_drive_hz, self.clock_power_db)?,
        ])
    }

    /// Noise-free samples with their 1σ attached.
    pub fn clean(&self, p: &QuadrupoleParams) -> Result<Samples> {
        if self.points_per_axis < 3 || !(self.noise_scale > 0.0) {
            return Err(invalid("shift experiment", "need ≥ 3 points per axis and positive noise"));
        }
        let channels = self.channels()?;
        let n = self.points_per_axis;
        let (hx, hz) = self.half_widths;
        let mut samples = Vec::with_capacity(2 * n * n);
        for (c, ch) in channels.iter().enumerate() {
            for i in 0..n {
                for k in 0..n {
                    let t = |j: usize| -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                    let point = (p.x0 + hx * t(i), p.z0 + hz * t(k));
                    let shift_hz = ch.shift(&eval_quadrupole(p, point));
                    samples.push(ShiftSample { point, channel: c, shift_hz, sigma_hz: None });
                }
            }
        }
        let peak = samples.iter().map(|s| s.shift_hz.abs()).fold(0.0, f64::max);
        for s in &mut samples {
            s.sigma_hz = Some(self.noise_scale * (s.shift_hz.abs() + self.noise_floor * peak));
        }
        Ok(Samples::Shift { channels, samples })
    }

    /// One noisy realisation.
    pub fn noisy(&self, p: &QuadrupoleParams, rng: &mut StdRng) -> Result<Samples> {
        let mut s = self.clean(p)?;
        if let Samples::Shift { samples, .. } = &mut s {
            for x in samples {
                let sig = x.sigma_hz.unwrap_or(0.0);
                x.shift_hz += Normal::new(0.0, sig).map_err(|e| invalid("noise", e.to_string()))?.sample(rng);
            }
        }
        Ok(s)
    }

    /// Scale the noise so the predicted 1σ of B′ equals `sigma_grad` (T/m).
    pub fn calibrated(&self, p: &QuadrupoleParams, sigma_grad: f64) -> Result<Self> {
        let r = fit_quadrupole(&self.clean(p)?, &FitOptions { fix_b: true, fix_alpha: true, ..Default::default() })?;
        let now = r.params.sigma.map(|s| s[1]).unwrap_or(f64::NAN);
        Ok(Self { noise_scale: self.noise_scale * sigma_grad / now, ..self.clone() })
    }
}

/// Spread of repeated fits to noisy data.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub failures: usize,
    /// Mean fitted value per parameter.
    pub mean: [f64; 7],
    /// Standard deviation of the fitted values.
    pub spread: [f64; 7],
    /// Mean of the fitter's own 1σ.
    pub mean_sigma: [f64; 7],
}

/// Repeat a fixed-B, fixed-α fit over `trials` noisy realisations; trial i
/// draws from a generator seeded with `seed + i`.
pub fn monte_carlo(
    truth: &QuadrupoleParams,
    exp: &ShiftExperiment,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloSummary> {
    let opts = FitOptions { fix_b: true, fix_alpha: true, ..Default::default() };
    let fits: Vec<Option<QuadrupoleParams>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = StdRng::seed_from_u64(seed.wrapping_add(i as u64));
            let s = exp.noisy(truth, &mut rng).ok()?;
            fit_quadrupole(&s, &opts).ok().map(|r| r.params)
        })
        .collect();
    let ok: Vec<&QuadrupoleParams> = fits.iter().flatten().collect();
    if ok.len() < 2 {
        return Err(invalid("monte carlo", "fewer than two successful fits"));
    }
    let t = truth.to_array();
    // angles as offsets from the truth so wrap-around does not split the cloud
    let dev = |p: &QuadrupoleParams| {
        let a = p.to_array();
        let mut d = [0.0; 7];
        for k in 0..7 {
            d[k] = match k {
                2 => wrap_deg(a[k] - t[k]),
                3 | 4 => {
                    let x = wrap_deg(a[k] - t[k]);
                    if x > 90.0 {
                        x - 180.0
                    } else if x < -90.0 {
                        x + 180.0
                    } else {
                        x
                    }
                }
                _ => a[k] - t[k],
            };
        }
        d
    };
    let n = ok.len() as f64;
    let mut mean = [0.0; 7];
    let mut sq = [0.0; 7];
    let mut msig = [0.0; 7];
    for p in &ok {
        let d = dev(p);
        let s = p.sigma.unwrap_or([f64::NAN; 7]);
        for k in 0..7 {
            mean[k] += d[k] / n;
            sq[k] += d[k] * d[k] / n;
            msig[k] += s[k] / n;
        }
    }
    let mut spread = [0.0; 7];
    for k in 0..7 {
        spread[k] = ((sq[k] - mean[k] * mean[k]) * n / (n - 1.0)).max(0.0).sqrt();
        mean[k] += t[k];
    }
    Ok(MonteCarloSummary { trials, failures: trials - ok.len(), mean, spread, mean_sigma: msig })
}
