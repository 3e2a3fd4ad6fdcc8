//! Three-stage geometry optimization: coarse overlap search, fine residual
//! minimization under a mismatch cap, and secant correction of the mismatch.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{Matrix2, Vector2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::electrostatics::{find_rf_null, IonSpecies, RfDrive};
use crate::error::{invalid, Error, Result};
use crate::geometry::ReferenceTrap;
use crate::magnetostatics::{find_field_minimum, MagneticModel, MinimumReport};

const TRAP_DIMS: [&str; 3] = ["rf_length", "w_mwc", "dc_width"];

fn dim(trap: &ReferenceTrap, name: &str) -> Option<f64> {
    match name {
        "rf_length" => Some(trap.rf_length),
        "w_mwc" => Some(trap.w_mwc),
        "dc_width" => Some(trap.dc_width),
        _ => trap.meander.get(name),
    }
}

/// Copy of `trap` with one named dimension replaced.
pub fn with_dim(trap: &ReferenceTrap, name: &str, value: f64) -> Result<ReferenceTrap> {
    let mut t = *trap;
    match name {
        "rf_length" => t.rf_length = value,
        "w_mwc" => t.w_mwc = value,
        "dc_width" => t.dc_width = value,
        _ => t.meander = trap.meander.with(name, value)?,
    }
    Ok(t)
}

fn check_name(trap: &ReferenceTrap, name: &str) -> Result<()> {
    if dim(trap, name).is_none() {
        return Err(invalid(name, "not a geometry parameter"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Start,
    Coarse,
    Fine,
    Correct,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Start => "start",
            Stage::Coarse => "coarse",
            Stage::Fine => "fine",
            Stage::Correct => "correct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Objective {
    /// Distance between RF null and field minimum.
    #[default]
    Overlap,
    /// Residual field at the minimum.
    Residual,
    /// mismatch (µm) + weight · residual (µT).
    Composite { weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParam {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepParam {
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n).map(|k| self.min + (self.max - self.min) * k as f64 / (n - 1) as f64).collect()
    }
}

/// Rectangular grid over named geometry dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub params: Vec<SweepParam>,
    pub objective: Objective,
    pub stage: Stage,
    /// Largest admissible number of grid points.
    pub budget: usize,
}

impl SweepSpec {
    pub fn new(params: Vec<SweepParam>, objective: Objective) -> Self {
        Self { params, objective, stage: Stage::Coarse, budget: 400 }
    }

    pub fn validate(&self, base: &ReferenceTrap) -> Result<()> {
        if self.params.is_empty() {
            return Err(invalid("sweep", "no parameters"));
        }
        for p in &self.params {
            check_name(base, &p.name)?;
            if p.steps < 2 {
                return Err(invalid(&p.name, format!("needs at least 2 steps, got {}", p.steps)));
            }
            if !(p.min < p.max) || !p.min.is_finite() || !p.max.is_finite() {
                return Err(invalid(&p.name, format!("empty range [{}, {}]", p.min, p.max)));
            }
        }
        let n = self.size();
        if n > self.budget {
            return Err(invalid("sweep", format!("{n} grid points exceed the budget of {}", self.budget)));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.params.iter().map(|p| p.steps).product()
    }

    /// Grid points in row-major order, last parameter fastest.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self.params.iter().map(SweepParam::values).collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            out = out.iter().flat_map(|head| axis.iter().map(move |&v| [head.as_slice(), &[v]].concat())).collect();
        }
        out
    }
}

/// Models shared by all stages.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignContext {
    pub drive: RfDrive,
    pub ion: IonSpecies,
    pub model: MagneticModel,
    /// Starting height (µm) for the RF null search.
    pub null_guess: f64,
}

impl Default for DesignContext {
    fn default() -> Self {
        Self { drive: RfDrive::reference(), ion: IonSpecies::be9(), model: MagneticModel::default(), null_guess: 35.0 }
    }
}

/// RF null and field minimum of one geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub trap: ReferenceTrap,
    /// (x1, z1) µm
    pub null: (f64, f64),
    pub minimum: MinimumReport,
}

impl Evaluation {
    /// Null minus minimum (µm).
    pub fn offset(&self) -> Vector2<f64> {
        Vector2::new(self.null.0 - self.minimum.x0, self.null.1 - self.minimum.z0)
    }

    pub fn mismatch_um(&self) -> f64 {
        self.offset().norm()
    }

    pub fn score(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Overlap => self.mismatch_um(),
            Objective::Residual => self.minimum.residual,
            Objective::Composite { weight } => self.mismatch_um() + weight * self.minimum.residual * 1e6,
        }
    }
}

/// Gapless-plane RF null and magnetostatic minimum, seeded at the null.
pub fn evaluate(trap: &ReferenceTrap, ctx: &DesignContext) -> Result<Evaluation> {
    let layout = trap.layout()?;
    let null = find_rf_null(&layout, &ctx.drive, &ctx.ion, ctx.null_guess)?;
    let set = ctx.model.filaments(&trap.meander)?;
    let minimum = find_field_minimum(&set, null, 0.0)?;
    Ok(Evaluation { trap: *trap, null, minimum })
}

/// One row of the stage log.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub stage: Stage,
    pub step: usize,
    pub eval: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseOutcome {
    /// Successful grid points, best first.
    pub ranked: Vec<Evaluation>,
    /// Grid points without a stable null or a field minimum.
    pub rejected: usize,
}

/// Evaluates every grid point around `base` and ranks them by the objective.
pub fn coarse_search(base: &ReferenceTrap, spec: &SweepSpec, ctx: &DesignContext) -> Result<CoarseOutcome> {
    spec.validate(base)?;
    let grid = spec.grid();
    let evals: Vec<Option<Evaluation>> = grid
        .par_iter()
        .map(|point| {
            let mut t = *base;
            for (p, &v) in spec.params.iter().zip(point) {
                t = with_dim(&t, &p.name, v).ok()?;
            }
            evaluate(&t, ctx).ok()
        })
        .collect();
    let rejected = evals.iter().filter(|e| e.is_none()).count();
    let mut ranked: Vec<Evaluation> = evals.into_iter().flatten().collect();
    if ranked.is_empty() {
        return Err(Error::Workflow(format!(
            "none of {} grid points has both a stable RF null and a field minimum",
            grid.len()
        )));
    }
    // stable sort keeps grid order among ties
    ranked.sort_by(|a, b| a.score(spec.objective).total_cmp(&b.score(spec.objective)));
    Ok(CoarseOutcome { ranked, rejected })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FineParam {
    pub name: String,
    pub step: f64,
    pub min: f64,
    pub max: f64,
}

/// Compass search on the residual field.
#[derive(Debug, Clone, PartialEq)]
pub struct FineSpec {
    pub params: Vec<FineParam>,
    /// Largest mismatch tolerated while trading overlap for field (µm).
    pub max_mismatch_um: f64,
    /// Smallest relative residual reduction that counts as an improvement.
    pub min_gain: f64,
    /// Step halvings after the first level stalls.
    pub refinements: usize,
    pub max_evals: usize,
}

impl Default for FineSpec {
    fn default() -> Self {
        Self {
            params: vec![FineParam { name: "l_th".into(), step: 25.0, min: 0.0, max: 400.0 }],
            max_mismatch_um: 2.0,
            min_gain: 0.01,
            refinements: 1,
            max_evals: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FineOutcome {
    pub best: Evaluation,
    /// The final poll rejected an improving move for exceeding the mismatch cap.
    pub binding: bool,
    pub history: Vec<Evaluation>,
}

/// Lowers the residual field of `candidate` while the mismatch stays within
/// the cap. The residual never increases.
pub fn fine_minimize(candidate: &Evaluation, spec: &FineSpec, ctx: &DesignContext, seed: u64) -> Result<FineOutcome> {
    if candidate.mismatch_um() > spec.max_mismatch_um {
        return Err(Error::Workflow(format!(
            "constraint infeasible: candidate mismatch {:.3} µm exceeds {} µm",
            candidate.mismatch_um(),
            spec.max_mismatch_um
        )));
    }
    if !(spec.min_gain >= 0.0 && spec.min_gain < 1.0) {
        return Err(invalid("min_gain", "must lie in [0, 1)"));
    }
    for p in &spec.params {
        check_name(&candidate.trap, &p.name)?;
        if !(p.step > 0.0) || !(p.min <= p.max) {
            return Err(invalid(&p.name, "needs a positive step and min ≤ max"));
        }
    }
    let mut order: Vec<usize> = (0..spec.params.len()).collect();
    order.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
    let mut steps: Vec<f64> = spec.params.iter().map(|p| p.step).collect();
    let mut cur = *candidate;
    let mut history = Vec::new();
    let mut evals = 0;
    let mut binding = false;
    'levels: for level in 0..=spec.refinements {
        if level > 0 {
            steps.iter_mut().for_each(|s| *s /= 2.0);
        }
        loop {
            let mut moved = false;
            binding = false;
            for &i in &order {
                let p = &spec.params[i];
                let v = dim(&cur.trap, &p.name).unwrap();
                let trials: Vec<f64> = [v + steps[i], v - steps[i]]
                    .into_iter()
                    .map(|t| t.clamp(p.min, p.max))
                    .filter(|t| (t - v).abs() > 1e-12)
                    .collect();
                if evals + trials.len() > spec.max_evals {
                    break 'levels;
                }
                evals += trials.len();
                let results: Vec<Evaluation> = trials
                    .par_iter()
                    .filter_map(|&t| with_dim(&cur.trap, &p.name, t).ok().and_then(|tr| evaluate(&tr, ctx).ok()))
                    .collect();
                let threshold = cur.minimum.residual * (1.0 - spec.min_gain);
                let improving = results.iter().filter(|e| e.minimum.residual <= threshold);
                let (ok, blocked): (Vec<&Evaluation>, Vec<&Evaluation>) =
                    improving.partition(|e| e.mismatch_um() <= spec.max_mismatch_um);
                binding |= !blocked.is_empty();
                if let Some(best) = ok.into_iter().min_by(|a, b| a.minimum.residual.total_cmp(&b.minimum.residual)) {
                    cur = *best;
                    history.push(cur);
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }
    Ok(FineOutcome { best: cur, binding, history })
}

/// Secant correction of the two mismatch components.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectSpec {
    /// Two geometry dimensions adjusted jointly.
    pub knobs: [String; 2],
    /// Finite-difference probes for the initial Jacobian (µm).
    pub probe: [f64; 2],
    /// Largest change of a knob in one iteration (µm).
    pub max_step: f64,
    pub tol_nm: f64,
    pub max_iter: usize,
    /// Largest admissible residual relative to the stage input.
    pub residual_guard: f64,
    /// Entry condition (µm).
    pub max_mismatch_um: f64,
}

impl Default for CorrectSpec {
    fn default() -> Self {
        Self {
            knobs: ["w_rf2".into(), "h1".into()],
            probe: [0.25, 0.25],
            max_step: 2.0,
            tol_nm: 100.0,
            max_iter: 20,
            residual_guard: 1.5,
            max_mismatch_um: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectOutcome {
    pub best: Evaluation,
    pub converged: bool,
    pub history: Vec<Evaluation>,
}

/// Broyden iterations on (x1 − x0, z1 − z0) over the two knobs. Returns the
/// best geometry found; `converged` is false when the budget runs out or the
/// iteration stalls.
pub fn correct_mismatch(start: &Evaluation, spec: &CorrectSpec, ctx: &DesignContext) -> Result<CorrectOutcome> {
    for k in &spec.knobs {
        check_name(&start.trap, k)?;
    }
    if spec.knobs[0] == spec.knobs[1] {
        return Err(invalid("knobs", "must name two different dimensions"));
    }
    let tol = spec.tol_nm * 1e-3;
    if start.mismatch_um() < tol {
        return Ok(CorrectOutcome { best: *start, converged: true, history: Vec::new() });
    }
    if start.mismatch_um() > spec.max_mismatch_um {
        return Err(Error::Workflow(format!(
            "mismatch {:.3} µm is above the {} µm entry limit of the correction stage",
            start.mismatch_um(),
            spec.max_mismatch_um
        )));
    }
    let knob =
        |e: &Evaluation| Vector2::new(dim(&e.trap, &spec.knobs[0]).unwrap(), dim(&e.trap, &spec.knobs[1]).unwrap());
    let at = |base: &ReferenceTrap, u: Vector2<f64>| -> Option<Evaluation> {
        let t = with_dim(base, &spec.knobs[0], u.x).ok()?;
        let t = with_dim(&t, &spec.knobs[1], u.y).ok()?;
        evaluate(&t, ctx).ok()
    };
    let guard = spec.residual_guard * start.minimum.residual;
    let u0 = knob(start);
    let probes: Vec<Option<Evaluation>> = (0..2)
        .into_par_iter()
        .map(|k| {
            let mut u = u0;
            u[k] += spec.probe[k];
            at(&start.trap, u)
        })
        .collect();
    let mut jac = Matrix2::zeros();
    for (k, p) in probes.iter().enumerate() {
        let p = p.ok_or_else(|| Error::Workflow(format!("sensitivity probe of {} failed", spec.knobs[k])))?;
        jac.set_column(k, &((p.offset() - start.offset()) / spec.probe[k]));
    }
    let mut cur = *start;
    let mut history = Vec::new();
    for _ in 0..spec.max_iter {
        let m = cur.offset();
        let Some(inv) = jac.try_inverse() else {
            return Err(Error::Workflow(format!(
                "{} and {} do not independently move the mismatch",
                spec.knobs[0], spec.knobs[1]
            )));
        };
        let mut du = -(inv * m);
        let big = du.amax();
        if big > spec.max_step {
            du *= spec.max_step / big;
        }
        let u = knob(&cur);
        let mut next = None;
        for alpha in [1.0, 0.5, 0.25, 0.125] {
            if let Some(e) = at(&cur.trap, u + du * alpha) {
                if e.mismatch_um() < cur.mismatch_um() && e.minimum.residual <= guard {
                    next = Some((e, du * alpha));
                    break;
                }
            }
        }
        let Some((e, s)) = next else { break };
        let dm = e.offset() - m;
        jac += (dm - jac * s) * s.transpose() / s.norm_squared();
        cur = e;
        history.push(cur);
        if cur.mismatch_um() < tol {
            return Ok(CorrectOutcome { best: cur, converged: true, history });
        }
    }
    Ok(CorrectOutcome { best: cur, converged: false, history })
}

/// Full pipeline input.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub start: ReferenceTrap,
    pub coarse: SweepSpec,
    pub fine: FineSpec,
    pub correct: CorrectSpec,
    pub context: DesignContext,
    pub seed: u64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        let mut start = ReferenceTrap::default();
        start.meander.l_th = 0.0;
        Self {
            start,
            coarse: SweepSpec::new(
                vec![
                    SweepParam { name: "w_mwm".into(), min: 40.0, max: 60.0, steps: 5 },
                    SweepParam { name: "w_gap".into(), min: 4.0, max: 6.0, steps: 5 },
                ],
                Objective::Overlap,
            ),
            fine: FineSpec::default(),
            correct: CorrectSpec::default(),
            context: DesignContext::default(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub best: ReferenceTrap,
    pub null: (f64, f64),
    pub minimum: MinimumReport,
    pub mismatch_nm: f64,
    /// Mismatch went below the correction tolerance.
    pub converged: bool,
    /// Mismatch cap was active at the end of the fine stage.
    pub binding: bool,
    pub seed: u64,
    pub rejected: usize,
    /// Ordered by stage.
    pub history: Vec<StageRecord>,
    /// Dimensions reported in the stage log.
    pub tracked: Vec<String>,
}

impl DesignReport {
    fn assemble(
        start: Evaluation,
        coarse: &CoarseOutcome,
        fine: &FineOutcome,
        corr: &CorrectOutcome,
        config: &DesignConfig,
    ) -> Self {
        let mut history = vec![StageRecord { stage: Stage::Start, step: 0, eval: start }];
        history.push(StageRecord { stage: Stage::Coarse, step: 0, eval: coarse.ranked[0] });
        for (stage, evals) in [(Stage::Fine, &fine.history), (Stage::Correct, &corr.history)] {
            history.extend(evals.iter().enumerate().map(|(k, e)| StageRecord { stage, step: k + 1, eval: *e }));
        }
        let mut tracked: Vec<String> = config.coarse.params.iter().map(|p| p.name.clone()).collect();
        tracked.extend(config.fine.params.iter().map(|p| p.name.clone()));
        tracked.extend(config.correct.knobs.iter().cloned());
        let mut seen = std::collections::HashSet::new();
        tracked.retain(|n| seen.insert(n.clone()));
        let best = corr.best;
        Self {
            best: best.trap,
            null: best.null,
            minimum: best.minimum,
            mismatch_nm: best.mismatch_um() * 1e3,
            converged: corr.converged,
            binding: fine.binding,
            seed: config.seed,
            rejected: coarse.rejected,
            history,
            tracked,
        }
    }

    /// Stage log: one row per accepted geometry.
    pub fn stage_log_csv(&self) -> String {
        let mut s = String::from("stage,step");
        for n in &self.tracked {
            write!(s, ",{n}_um").unwrap();
        }
        s.push_str(",x1_um,z1_um,x0_um,z0_um,mismatch_nm,residual_T,gradient_T_per_m\n");
        for r in &self.history {
            write!(s, "{},{}", r.stage.name(), r.step).unwrap();
            for n in &self.tracked {
                write!(s, ",{:.6}", dim(&r.eval.trap, n).unwrap()).unwrap();
            }
            let e = &r.eval;
            writeln!(
                s,
                ",{:.6},{:.6},{:.6},{:.6},{:.3},{:.6e},{:.6}",
                e.null.0,
                e.null.1,
                e.minimum.x0,
                e.minimum.z0,
                e.mismatch_um() * 1e3,
                e.minimum.residual,
                e.minimum.gradient
            )
            .unwrap();
        }
        s
    }

    /// Structured-text summary.
    pub fn to_text(&self) -> String {
        let m = &self.best.meander;
        let mut s = String::new();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "converged = {}", self.converged).unwrap();
        writeln!(s, "mismatch_cap_binding = {}", self.binding).unwrap();
        writeln!(s, "mismatch_nm = {:.3}", self.mismatch_nm).unwrap();
        writeln!(s, "rf_null_um = [{:.6}, {:.6}]", self.null.0, self.null.1).unwrap();
        writeln!(s, "field_minimum_um = [{:.6}, {:.6}]", self.minimum.x0, self.minimum.z0).unwrap();
        writeln!(s, "residual_T = {:.6e}", self.minimum.residual).unwrap();
        writeln!(s, "gradient_T_per_m = {:.6}", self.minimum.gradient).unwrap();
        writeln!(s, "rejected_grid_points = {}", self.rejected).unwrap();
        writeln!(s, "\n[geometry]").unwrap();
        for n in GEOMETRY_KEYS {
            writeln!(s, "{n} = {}", m.get(n).unwrap()).unwrap();
        }
        writeln!(s, "symmetric = {}", m.symmetric).unwrap();
        for n in TRAP_DIMS {
            writeln!(s, "{n} = {}", dim(&self.best, n).unwrap()).unwrap();
        }
        s
    }
}

const GEOMETRY_KEYS: [&str; 14] = [
    "l_m",
    "w_mwm",
    "w_mwm_outer",
    "l_th",
    "w_rf1",
    "w_rf2",
    "w_mws",
    "w_gap",
    "h1",
    "h2",
    "h3",
    "turn_offset",
    "w_turn",
    "feed_length",
];

/// Coarse search, fine minimization of the best candidate, then correction.
pub fn run_design(config: &DesignConfig) -> Result<DesignReport> {
    let ctx = &config.context;
    let start = evaluate(&config.start, ctx)?;
    let coarse = coarse_search(&config.start, &config.coarse, ctx)?;
    let fine = fine_minimize(&coarse.ranked[0], &config.fine, ctx, config.seed)?;
    let corr = correct_mismatch(&fine.best, &config.correct, ctx)?;
    Ok(DesignReport::assemble(start, &coarse, &fine, &corr, config))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(default)]
    objective: Objective,
    #[serde(default = "default_budget")]
    budget: usize,
    param: Vec<SweepParam>,
}

fn default_budget() -> usize {
    400
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFine {
    param: Option<Vec<FineParam>>,
    max_mismatch_um: Option<f64>,
    min_gain: Option<f64>,
    refinements: Option<usize>,
    max_evals: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorrect {
    knobs: Option<[String; 2]>,
    probe: Option<[f64; 2]>,
    max_step: Option<f64>,
    tol_nm: Option<f64>,
    max_iter: Option<usize>,
    residual_guard: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    seed: Option<u64>,
    symmetric: Option<bool>,
    #[serde(default)]
    start: BTreeMap<String, f64>,
    coarse: Option<RawSweep>,
    fine: Option<RawFine>,
    correct: Option<RawCorrect>,
}

impl DesignConfig {
    /// Reads a design file. Missing sections keep the bundled defaults;
    /// `[start]` overrides individual dimensions of the starting geometry.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawDesign = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        let mut c = DesignConfig::default();
        if let Some(s) = raw.seed {
            c.seed = s;
        }
        if let Some(s) = raw.symmetric {
            c.start.meander.symmetric = s;
        }
        for (k, v) in &raw.start {
            c.start = with_dim(&c.start, k, *v)?;
        }
        if let Some(s) = raw.coarse {
            c.coarse = SweepSpec { params: s.param, objective: s.objective, stage: Stage::Coarse, budget: s.budget };
        }
        if let Some(f) = raw.fine {
            let d = &mut c.fine;
            if let Some(p) = f.param {
                d.params = p;
            }
            d.max_mismatch_um = f.max_mismatch_um.unwrap_or(d.max_mismatch_um);
            d.min_gain = f.min_gain.unwrap_or(d.min_gain);
            d.refinements = f.refinements.unwrap_or(d.refinements);
            d.max_evals = f.max_evals.unwrap_or(d.max_evals);
        }
        if let Some(r) = raw.correct {
            let d = &mut c.correct;
            if let Some(k) = r.knobs {
                d.knobs = k;
            }
            d.probe = r.probe.unwrap_or(d.probe);
            d.max_step = r.max_step.unwrap_or(d.max_step);
            d.tol_nm = r.tol_nm.unwrap_or(d.tol_nm);
            d.max_iter = r.max_iter.unwrap_or(d.max_iter);
            d.residual_guard = r.residual_guard.unwrap_or(d.residual_guard);
        }
        c.start.meander.validate()?;
        c.coarse.validate(&c.start)?;
        Ok(c)
    }
}
