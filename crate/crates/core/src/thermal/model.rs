use rayon::prelude::*;

use super::mesh::{lateral_axis, stack_axis, Axis};
use crate::error::{invalid, Error, Result};
use crate::geometry::{build_meander, MeanderParams, SegmentRole};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// W/(m·K)
    pub k: f64,
    /// kg/m³
    pub rho: f64,
    /// J/(kg·K)
    pub cp: f64,
}

impl Material {
    fn volumetric_heat(&self) -> f64 {
        self.rho * self.cp
    }
}

/// Material library and the parts of the stack not described by the meander.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalMaterials {
    pub gold: Material,
    /// Electrical conductivity of the conductor (S/m).
    pub gold_sigma: f64,
    pub silicon: Material,
    pub nitride: Material,
    /// Fill of the pockets; the metal layers are otherwise open.
    pub dielectric: Material,
    /// µm
    pub nitride_thickness: f64,
    /// Effective depth of the heat sink (µm); stands in for 3D spreading and is not published.
    pub substrate_thickness: f64,
    /// Lateral chip size (µm).
    pub footprint: f64,
    /// Backside temperature (K).
    pub t0: f64,
}

impl Default for ThermalMaterials {
    fn default() -> Self {
        Self {
            gold: Material { k: 317.0, rho: 19300.0, cp: 129.0 },
            gold_sigma: 45.6e6,
            silicon: Material { k: 130.0, rho: 2329.0, cp: 700.0 },
            nitride: Material { k: 20.0, rho: 3100.0, cp: 700.0 },
            dielectric: Material { k: 0.15, rho: 1420.0, cp: 1090.0 },
            nitride_thickness: 2.0,
            substrate_thickness: 50.0,
            footprint: 1500.0,
            t0: 293.15,
        }
    }
}

impl ThermalMaterials {
    fn validate(&self) -> Result<()> {
        for (name, m) in
            [("gold", self.gold), ("silicon", self.silicon), ("nitride", self.nitride), ("dielectric", self.dielectric)]
        {
            if !(m.k > 0.0 && m.rho > 0.0 && m.cp > 0.0) {
                return Err(invalid(name, "material properties must be positive"));
            }
        }
        for (name, v) in [
            ("gold_sigma", self.gold_sigma),
            ("nitride_thickness", self.nitride_thickness),
            ("substrate_thickness", self.substrate_thickness),
            ("footprint", self.footprint),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive"));
            }
        }
        Ok(())
    }
}

/// Cell sizes (µm) of the cross-section mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    pub fine: f64,
    pub growth: f64,
    pub coarse: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { fine: 1.0, growth: 1.25, coarse: 50.0 }
    }
}

impl MeshOptions {
    pub fn refined(&self) -> Self {
        Self { fine: self.fine / 2.0, growth: self.growth.sqrt(), coarse: self.coarse / 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Open space in the metal layers, excluded from the network.
    Void,
    Gold,
    Dielectric,
    Nitride,
    Silicon,
}

/// One x–z cross-section extruded over `length` µm along y.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: &'static str,
    pub length: f64,
    /// Row-major (z outer, x inner), z index 0 at the backside.
    pub regions: Vec<Region>,
    /// Heat (W) injected per cell for 1 W total.
    pub source: Vec<f64>,
}

/// Two coupled cross-sections: the solid meander and, when l_th > 0, the
/// pocket centre. Conduction along y between them is lumped into one
/// conductance per cell pair, 8k/l_th per unit cross-section area, which
/// reproduces the peak of a uniformly heated strip held at its ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalModelSpec {
    pub meander: MeanderParams,
    pub materials: ThermalMaterials,
    pub x: Axis,
    pub z: Axis,
    /// Layer name and its (first, end) z cell range.
    pub layers: Vec<(String, (usize, usize))>,
    pub sections: Vec<Section>,
    /// Joule power outside the long segments, spread over the nitride surface (fraction of total).
    pub remote_fraction: f64,
    /// DC resistance of the meander (Ω).
    pub resistance: f64,
    pub monitor: (usize, usize),
}

impl ThermalModelSpec {
    pub fn cells(&self) -> usize {
        self.x.len() * self.z.len()
    }

    pub fn has_pocket(&self) -> bool {
        self.sections.len() > 1
    }

    fn material(&self, r: Region) -> Material {
        let m = &self.materials;
        match r {
            Region::Void => Material { k: 0.0, rho: 0.0, cp: 0.0 },
            Region::Gold => m.gold,
            Region::Dielectric => m.dielectric,
            Region::Nitride => m.nitride,
            Region::Silicon => m.silicon,
        }
    }

    /// Total injected power per watt of drive (should be 1).
    pub fn injected_fraction(&self) -> f64 {
        self.sections.iter().flat_map(|s| &s.source).sum()
    }
}

pub fn build_thermal_model(
    meander: &MeanderParams,
    materials: &ThermalMaterials,
    mesh: &MeshOptions,
) -> Result<ThermalModelSpec> {
    meander.validate()?;
    materials.validate()?;
    if !(mesh.fine > 0.0 && mesh.growth >= 1.0 && mesh.coarse >= mesh.fine) {
        return Err(invalid("mesh", "need fine > 0, growth ≥ 1 and coarse ≥ fine"));
    }
    let p = meander;
    let path = build_meander(p)?;
    let resistance = path.resistance_factor() * 1e6 / materials.gold_sigma;

    let xs = p.segment_x();
    let widths = [p.w_mwm_outer, p.w_mwm, p.w_mwm_outer];
    let spans: Vec<(f64, f64)> = (0..3).map(|k| (xs[k] - widths[k] / 2.0, xs[k] + widths[k] / 2.0)).collect();
    let breaks: Vec<f64> = spans.iter().flat_map(|s| [s.0, s.1]).chain([0.0]).collect();
    let band = (spans[0].0 - 4.0 * p.w_gap, spans[2].1 + 4.0 * p.w_gap);
    let half = materials.footprint / 2.0;
    if band.0 <= -half || band.1 >= half {
        return Err(invalid("footprint", "meander does not fit on the chip"));
    }
    let x = lateral_axis(half, band, &breaks, mesh.fine, mesh.growth, mesh.coarse);
    let names = ["L2", "V1", "L1", "SiN", "Si"];
    let (z, zspans) = stack_axis(
        &[
            (names[0], p.h3),
            (names[1], p.h2),
            (names[2], p.h1),
            (names[3], materials.nitride_thickness),
            (names[4], materials.substrate_thickness),
        ],
        mesh.fine,
        mesh.growth,
        mesh.coarse,
    )?;
    let layer_of = |j: usize| zspans.iter().position(|&(a, b)| j >= a && j < b).expect("cell in a layer");
    let segment_of = |xc: f64| spans.iter().position(|&(a, b)| xc > a && xc < b);

    let (nx, nz) = (x.len(), z.len());
    let i2 = 1.0 / resistance;
    let vol = |i: usize, j: usize, len: f64| x.width(i) * z.width(j) * len * 1e-18;
    let build = |pocket: bool, length: f64| -> Section {
        let mut regions = Vec::with_capacity(nx * nz);
        let mut source = Vec::with_capacity(nx * nz);
        for j in 0..nz {
            let layer = layer_of(j);
            for i in 0..nx {
                let seg = segment_of(x.centre(i));
                let r = match (layer, seg) {
                    (0 | 2, Some(_)) => Region::Gold,
                    (1, Some(_)) if pocket => Region::Dielectric,
                    (1, Some(_)) => Region::Gold,
                    (0..=2, None) => Region::Void,
                    (3, _) => Region::Nitride,
                    _ => Region::Silicon,
                };
                let q = match (r, seg) {
                    (Region::Gold, Some(k)) => {
                        let area = widths[k] * if pocket { p.h1 + p.h3 } else { p.stack_height() } * 1e-12;
                        i2 / (area * area) / materials.gold_sigma * vol(i, j, length)
                    }
                    _ => 0.0,
                };
                regions.push(r);
                source.push(q);
            }
        }
        Section { name: if pocket { "pocket" } else { "solid" }, length, regions, source }
    };
    let mut sections = vec![build(false, p.l_m - p.l_th)];
    if p.l_th > 0.0 {
        sections.push(build(true, p.l_th));
    }
    let segments: f64 = sections.iter().flat_map(|s| &s.source).sum();
    let remote_fraction = 1.0 - segments;
    if remote_fraction < -1e-9 {
        return Err(Error::Thermal(format!("segment heat exceeds the total: {segments}")));
    }
    // remote heat into the top row of the nitride, weighted by cell width
    let top_nitride = zspans[3].1 - 1;
    let total_w: f64 = (0..nx).map(|i| x.width(i)).sum();
    for i in 0..nx {
        sections[0].source[top_nitride * nx + i] += remote_fraction.max(0.0) * x.width(i) / total_w;
    }
    debug_assert!(path.segments.iter().any(|s| matches!(s.role, SegmentRole::Long(_))));
    let monitor = (sections.len() - 1, (nz - 1) * nx + x.locate(0.0));
    Ok(ThermalModelSpec {
        meander: *p,
        materials: *materials,
        x,
        z,
        layers: names.iter().map(|n| n.to_string()).zip(zspans).collect(),
        sections,
        remote_fraction,
        resistance,
        monitor,
    })
}

/// Symmetric conductance network (W/K) with heat capacities (J/K).
struct Network {
    diag: Vec<f64>,
    links: Vec<Vec<(usize, f64)>>,
    capacity: Vec<f64>,
    source: Vec<f64>,
    /// Conductance of each unknown to the backside.
    sink: Vec<f64>,
}

impl Network {
    fn new(m: &ThermalModelSpec) -> Self {
        let (nx, nz) = (m.x.len(), m.z.len());
        let n = nx * nz;
        let total = n * m.sections.len();
        let mut net = Network {
            diag: vec![0.0; total],
            links: vec![Vec::new(); total],
            capacity: vec![0.0; total],
            source: vec![0.0; total],
            sink: vec![0.0; total],
        };
        let um = 1e-6;
        for (s, sec) in m.sections.iter().enumerate() {
            let len = sec.length * um;
            let off = s * n;
            let k = |c: usize| m.material(sec.regions[c]).k;
            let void = |c: usize| sec.regions[c] == Region::Void;
            for j in 0..nz {
                for i in 0..nx {
                    let c = j * nx + i;
                    let (dx, dz) = (m.x.width(i) * um, m.z.width(j) * um);
                    net.capacity[off + c] = m.material(sec.regions[c]).volumetric_heat() * dx * dz * len;
                    net.source[off + c] = sec.source[c];
                    if void(c) {
                        // decoupled unknown pinned at zero
                        net.diag[off + c] += 1.0;
                        continue;
                    }
                    if i + 1 < nx && !void(c + 1) {
                        let dx2 = m.x.width(i + 1) * um;
                        let g = len * dz / (dx / (2.0 * k(c)) + dx2 / (2.0 * k(c + 1)));
                        net.connect(off + c, off + c + 1, g);
                    }
                    if j + 1 < nz && !void(c + nx) {
                        let dz2 = m.z.width(j + 1) * um;
                        let g = len * dx / (dz / (2.0 * k(c)) + dz2 / (2.0 * k(c + nx)));
                        net.connect(off + c, off + c + nx, g);
                    }
                    if j == 0 {
                        let g = len * dx / (dz / (2.0 * k(c)));
                        net.sink[off + c] = g;
                        net.diag[off + c] += g;
                    }
                }
            }
        }
        if m.has_pocket() {
            let l = m.sections[1].length * um;
            for j in 0..nz {
                for i in 0..nx {
                    let c = j * nx + i;
                    if m.sections[1].regions[c] == Region::Void {
                        continue;
                    }
                    let kp = m.material(m.sections[1].regions[c]).k;
                    let g = 8.0 * kp * m.x.width(i) * m.z.width(j) * um * um / l;
                    net.connect(c, n + c, g);
                }
            }
        }
        net
    }

    fn connect(&mut self, a: usize, b: usize, g: f64) {
        self.diag[a] += g;
        self.diag[b] += g;
        self.links[a].push((b, g));
        self.links[b].push((a, g));
    }

    /// y = (shift·C + K) x
    fn apply(&self, shift: f64, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(a, ya)| {
            let mut v = (self.diag[a] + shift * self.capacity[a]) * x[a];
            for &(b, g) in &self.links[a] {
                v -= g * x[b];
            }
            *ya = v;
        });
    }

    /// Jacobi-preconditioned conjugate gradients for (shift·C + K) x = rhs.
    fn solve(&self, shift: f64, rhs: &[f64], x: &mut [f64]) -> Result<usize> {
        let n = rhs.len();
        let pre: Vec<f64> = (0..n).map(|a| 1.0 / (self.diag[a] + shift * self.capacity[a])).collect();
        let mut r = vec![0.0; n];
        self.apply(shift, x, &mut r);
        for a in 0..n {
            r[a] = rhs[a] - r[a];
        }
        let norm_b = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_b == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return Ok(0);
        }
        let mut zv: Vec<f64> = r.iter().zip(&pre).map(|(a, b)| a * b).collect();
        let mut p = zv.clone();
        let mut rz: f64 = r.iter().zip(&zv).map(|(a, b)| a * b).sum();
        let mut ap = vec![0.0; n];
        let max_iter = 20 * n;
        for it in 0..max_iter {
            if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-11 * norm_b {
                return Ok(it);
            }
            self.apply(shift, &p, &mut ap);
            let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
            for a in 0..n {
                x[a] += alpha * p[a];
                r[a] -= alpha * ap[a];
            }
            for a in 0..n {
                zv[a] = r[a] * pre[a];
            }
            let rz_new: f64 = r.iter().zip(&zv).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for a in 0..n {
                p[a] = zv[a] + beta * p[a];
            }
        }
        Err(Error::NoConvergence { what: "thermal conjugate gradients".into(), iterations: max_iter })
    }
}

/// Steady temperature rise field and derived checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub power: f64,
    /// Rise at the monitor point (K).
    pub rise: f64,
    /// ΔT per cell, sections concatenated.
    pub field: Vec<f64>,
    /// Heat leaving through the backside (W).
    pub boundary_flux: f64,
    /// Section name and (x, z) µm of the hottest cell.
    pub hottest: (&'static str, f64, f64),
}

impl SteadyState {
    pub fn absolute(&self, t0: f64) -> Vec<f64> {
        self.field.iter().map(|d| t0 + d).collect()
    }
}

pub fn steady_state(model: &ThermalModelSpec, power: f64) -> Result<SteadyState> {
    if !(power >= 0.0 && power.is_finite()) {
        return Err(invalid("power", "must be non-negative"));
    }
    let net = Network::new(model);
    let rhs: Vec<f64> = net.source.iter().map(|q| q * power).collect();
    let mut t = vec![0.0; rhs.len()];
    net.solve(0.0, &rhs, &mut t)?;
    let n = model.cells();
    let (s, c) = model.monitor;
    let boundary_flux = t.iter().zip(&net.sink).map(|(a, g)| a * g).sum();
    let hot = (0..t.len()).max_by(|&a, &b| t[a].total_cmp(&t[b])).unwrap_or(0);
    let nx = model.x.len();
    let hottest = (model.sections[hot / n].name, model.x.centre(hot % n % nx), model.z.centre(hot % n / nx));
    Ok(SteadyState { power, rise: t[s * n + c], field: t, boundary_flux, hottest })
}

pub fn steady_state_rise(model: &ThermalModelSpec, power: f64) -> Result<f64> {
    steady_state(model, power).map(|s| s.rise)
}

/// Adaptive implicit-Euler step control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub dt0: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Local error bound relative to the stored heat.
    pub energy_tol: f64,
    /// dΔT/dt below this flags steady state (K/s).
    pub steady_rate: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { dt0: 1e-8, dt_min: 1e-13, dt_max: 2e-5, energy_tol: 0.01, steady_rate: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalTrace {
    pub power: f64,
    pub t: Vec<f64>,
    pub dt_k: Vec<f64>,
    /// First time with dΔT/dt below the policy threshold.
    pub steady_at: Option<f64>,
}

impl ThermalTrace {
    pub fn last(&self) -> f64 {
        self.dt_k.last().copied().unwrap_or(0.0)
    }

    pub fn to_csv_rows(&self) -> String {
        let mut s = String::from("t_s,dT_K\n");
        for (t, d) in self.t.iter().zip(&self.dt_k) {
            s.push_str(&format!("{t:.6e},{d:.6e}\n"));
        }
        s
    }
}

pub fn simulate_heating(
    model: &ThermalModelSpec,
    power: f64,
    duration: f64,
    policy: &StepPolicy,
) -> Result<ThermalTrace> {
    if !(duration > 0.0) {
        return Err(invalid("duration", "must be positive"));
    }
    if !(power >= 0.0 && power.is_finite()) {
        return Err(invalid("power", "must be non-negative"));
    }
    let net = Network::new(model);
    let n = net.source.len();
    let mon = model.monitor.0 * model.cells() + model.monitor.1;
    let q: Vec<f64> = net.source.iter().map(|v| v * power).collect();
    let mut temp = vec![0.0; n];
    let mut rate_prev: Option<Vec<f64>> = None;
    let mut trace = ThermalTrace { power, t: vec![0.0], dt_k: vec![0.0], steady_at: None };
    let (mut t, mut dt) = (0.0, policy.dt0);
    let mut next = vec![0.0; n];
    while t < duration * (1.0 - 1e-12) {
        let step = dt.min(duration - t);
        let rhs: Vec<f64> = (0..n).map(|a| net.capacity[a] / step * temp[a] + q[a]).collect();
        next.copy_from_slice(&temp);
        net.solve(1.0 / step, &rhs, &mut next)?;
        let rate: Vec<f64> = next.iter().zip(&temp).map(|(a, b)| (a - b) / step).collect();
        let stored: f64 = next.iter().zip(&net.capacity).map(|(a, c)| a * c).sum();
        let err = match &rate_prev {
            Some(rp) => {
                0.5 * step * rate.iter().zip(rp).zip(&net.capacity).map(|((a, b), c)| c * (a - b).abs()).sum::<f64>()
            }
            None => 0.0,
        };
        if err > policy.energy_tol * stored && step > policy.dt_min {
            dt = (step * 0.5).max(policy.dt_min);
            if dt <= policy.dt_min {
                return Err(Error::Thermal(format!("time step floor {:e} s reached at t = {t:e} s", policy.dt_min)));
            }
            continue;
        }
        t += step;
        let dmon = (next[mon] - temp[mon]) / step;
        std::mem::swap(&mut temp, &mut next);
        trace.t.push(t);
        trace.dt_k.push(temp[mon]);
        if trace.steady_at.is_none() && power > 0.0 && temp[mon] > 0.0 && dmon.abs() < policy.steady_rate {
            trace.steady_at = Some(t);
        }
        let grow = if err > 0.0 { (policy.energy_tol * stored / err).sqrt().clamp(0.5, 1.5) } else { 1.5 };
        dt = (step * grow).clamp(policy.dt_min, policy.dt_max);
        rate_prev = Some(rate);
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub l_th: f64,
    pub dt_steady: f64,
    pub t_steady: Option<f64>,
}

/// Steady rise and time to steady state for each pocket length (parallel).
pub fn thermal_sweep(
    meander: &MeanderParams,
    materials: &ThermalMaterials,
    mesh: &MeshOptions,
    l_th: &[f64],
    power: f64,
    duration: f64,
    policy: &StepPolicy,
) -> Result<Vec<SweepRow>> {
    l_th.par_iter()
        .map(|&l| {
            let m = build_thermal_model(&meander.with("l_th", l)?, materials, mesh)?;
            let trace = simulate_heating(&m, power, duration, policy)?;
            Ok(SweepRow { l_th: l, dt_steady: steady_state_rise(&m, power)?, t_steady: trace.steady_at })
        })
        .collect()
}

pub fn sweep_csv_rows(rows: &[SweepRow]) -> String {
    let mut s = String::from("l_th_um,dT_steady_K,t_steady_s\n");
    for r in rows {
        let t = r.t_steady.map_or("NaN".to_string(), |v| format!("{v:.6e}"));
        s.push_str(&format!("{},{:.6e},{}\n", r.l_th, r.dt_steady, t));
    }
    s
}
