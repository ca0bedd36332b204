//! Temperature sweeps of the Dirichlet-form scenarios.

use std::time::Instant;

use metastable_core::dirichlet::{
    capacity_integral, critical_split, error_trend_ok, metastable_measure, premetastable_density, GibbsQuadrature,
    SaddleGeometry,
};
use metastable_core::landscape::{
    classify, graph_from_potential, AnalysisParams, Bounds, CriticalKind, CriticalPoint, LandscapeGraph, Potential,
};
use metastable_core::tree::build_hierarchy;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

const MORSE_TOL: f64 = 1e-8;

/// Height tolerance for deciding which minima sit at the ground level.
const GROUND_TOL: f64 = 1e-9;

/// One sweep cell. These fields are the CSV columns, in order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: &'static str,
    pub eps: f64,
    pub value: f64,
    pub target: f64,
    pub rel_err: f64,
    pub grid_n: usize,
    pub runtime_ms: u64,
}

/// Rows in input order plus per-cell extras and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub details: Vec<Value>,
    pub trend_ok: bool,
    pub final_rel_err: f64,
    pub tolerance: f64,
    /// Extra scenario-specific conditions on the last cell.
    pub extra_ok: bool,
    pub passed: bool,
}

impl SweepReport {
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::argument(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::argument(e.to_string()))
    }
}

/// The scenario of a sweep with its scenario-specific inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Premeta { x0: Vec<f64> },
    Critical { point: Vec<f64>, delta_exp: f64 },
    Capacity { saddle: Vec<f64> },
    Metastable { level: usize, class: usize, omega: Option<Vec<f64>> },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Premeta { .. } => "premeta",
            Scenario::Critical { .. } => "critical",
            Scenario::Capacity { .. } => "capacity",
            Scenario::Metastable { .. } => "metastable",
        }
    }

    pub fn default_eps(&self) -> Vec<f64> {
        match self {
            Scenario::Premeta { .. } => vec![0.01, 0.005, 0.0025],
            Scenario::Critical { .. } => vec![0.02, 0.01, 0.005],
            Scenario::Capacity { .. } | Scenario::Metastable { .. } => vec![0.1, 0.07, 0.05, 0.035],
        }
    }

    pub fn default_grid_n(&self, dim: usize) -> usize {
        match (self, dim) {
            (Scenario::Premeta { .. }, _) => 4001,
            (Scenario::Critical { .. }, _) => 801,
            (_, 1) => 2001,
            _ => 201,
        }
    }

    pub fn default_tol(&self) -> f64 {
        match self {
            Scenario::Premeta { .. } => 0.05,
            Scenario::Critical { .. } | Scenario::Capacity { .. } => 0.10,
            Scenario::Metastable { .. } => 0.15,
        }
    }
}

/// Fully resolved sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub scenario: Scenario,
    pub potential: Potential,
    pub eps_list: Vec<f64>,
    pub grid_n: usize,
    pub tol: f64,
    pub timing: bool,
}

impl SweepPlan {
    pub fn new(
        scenario: Scenario,
        potential: Potential,
        eps_list: Option<Vec<f64>>,
        grid_n: Option<usize>,
        tol: Option<f64>,
        timing: bool,
    ) -> Result<Self, CliError> {
        let eps_list = eps_list.unwrap_or_else(|| scenario.default_eps());
        if eps_list.is_empty() || eps_list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(CliError::argument("--eps-list needs positive finite temperatures"));
        }
        if eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(CliError::argument("--eps-list must be strictly decreasing"));
        }
        let grid_n = grid_n.unwrap_or_else(|| scenario.default_grid_n(potential.dim()));
        if grid_n < 3 {
            return Err(CliError::argument("--grid-n must be at least 3"));
        }
        let tol = tol.unwrap_or_else(|| scenario.default_tol());
        if !(tol > 0.0) {
            return Err(CliError::argument("--tol must be positive"));
        }
        Ok(Self { scenario, potential, eps_list, grid_n, tol, timing })
    }

    /// Resolved settings for the manifest.
    pub fn settings(&self) -> Value {
        let scenario = match &self.scenario {
            Scenario::Premeta { x0 } => json!({ "name": "premeta", "x0": x0 }),
            Scenario::Critical { point, delta_exp } => {
                json!({ "name": "critical", "point": point, "delta_exp": delta_exp })
            }
            Scenario::Capacity { saddle } => json!({ "name": "capacity", "saddle": saddle }),
            Scenario::Metastable { level, class, omega } => {
                json!({ "name": "metastable", "level": level, "class": class, "omega": omega })
            }
        };
        json!({
            "scenario": scenario,
            "box": self.potential.bounds().axes(),
            "eps_list": self.eps_list,
            "grid_n": self.grid_n,
            "tol": self.tol,
        })
    }
}

/// Parses `lo:hi[,lo:hi]` into a box.
pub fn parse_box(text: &str) -> Result<Bounds, CliError> {
    let axes = text
        .split(',')
        .map(|axis| {
            let (lo, hi) =
                axis.split_once(':').ok_or_else(|| CliError::argument(format!("box axis {axis:?} is not lo:hi")))?;
            let parse =
                |s: &str| s.trim().parse::<f64>().map_err(|_| CliError::argument(format!("bad box bound {s:?}")));
            Ok((parse(lo)?, parse(hi)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Bounds::new(axes)?)
}

fn rel_err(value: f64, target: f64) -> f64 {
    if target == 0.0 {
        value.abs()
    } else {
        (value - target).abs() / target.abs()
    }
}

fn point_of_kind(
    u: &Potential,
    x: &[f64],
    want: &str,
    ok: impl Fn(&CriticalKind) -> bool,
) -> Result<CriticalPoint, CliError> {
    if x.len() != u.dim() {
        return Err(CliError::argument(format!(
            "point has {} coordinates, potential has dimension {}",
            x.len(),
            u.dim()
        )));
    }
    let cp = classify(u, x, MORSE_TOL)?;
    let grad = u.gradient(x).iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if grad > 1e-6 || !ok(&cp.kind) {
        return Err(CliError::argument(format!("{x:?} is not a {want} (|∇U| = {grad:e}, kind {:?})", cp.kind)));
    }
    Ok(cp)
}

fn ground_mass(graph: &LandscapeGraph) -> f64 {
    let ground = graph.ground_height();
    graph.minima().iter().filter(|m| (m.height - ground).abs() <= GROUND_TOL).map(|m| m.nu).sum()
}

type Cell = Result<(f64, f64, Value), CliError>;

/// Runs every cell of the sweep in parallel; rows keep the input order.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepReport, CliError> {
    let u = &plan.potential;
    let n = plan.grid_n;
    let eval: Box<dyn Fn(f64) -> Cell + Sync> = match &plan.scenario {
        Scenario::Premeta { x0 } => {
            if x0.len() != u.dim() || !u.bounds().contains(x0) {
                return Err(CliError::argument("--x0 must be a point of the box"));
            }
            let x0 = x0.clone();
            Box::new(move |eps| {
                let q = GibbsQuadrature::new(u, eps, n)?;
                let pm = premetastable_density(&q, &x0)?;
                Ok((pm.value, pm.limit, json!({ "exact": pm.exact, "core_radius": pm.core_radius })))
            })
        }
        Scenario::Critical { point, delta_exp } => {
            let cp = point_of_kind(u, point, "nondegenerate critical point", |_| true)?;
            let delta_exp = *delta_exp;
            Box::new(move |eps| {
                let s = critical_split(u, &cp, eps, delta_exp, n)?;
                Ok((s.phi1, s.zeta, json!({ "delta": s.delta, "phi1": s.phi1, "phi2": s.phi2, "phi3": s.phi3 })))
            })
        }
        Scenario::Capacity { saddle } => {
            let cp = point_of_kind(u, saddle, "saddle", |k| *k == CriticalKind::Saddle)?;
            let a = graph_from_potential(u, &AnalysisParams::default())?;
            let omega = metastable_core::landscape::ek_weight(&cp)?;
            let target = omega / ground_mass(&a.graph);
            let raise = cp.value - a.graph.ground_height();
            Box::new(move |eps| {
                let q = GibbsQuadrature::new(u, eps, n)?;
                let g = SaddleGeometry::new(&cp, eps)?;
                let value = capacity_integral(&q, &g, raise / eps, 0.0)?;
                Ok((value, target, json!({ "delta": g.delta, "omega": omega })))
            })
        }
        Scenario::Metastable { level, class, omega } => {
            let a = graph_from_potential(u, &AnalysisParams::default())?;
            let h = build_hierarchy(&a.graph)?;
            let lvl =
                h.level(*level).ok_or_else(|| CliError::argument(format!("level {level} exceeds q = {}", h.q())))?;
            let size = lvl
                .classes
                .classes
                .get(*class)
                .ok_or_else(|| CliError::argument(format!("level {level} has {} classes", lvl.classes.classes.len())))?
                .states
                .len();
            let omega = omega.clone().unwrap_or_else(|| (0..size).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect());
            let (level, class) = (*level, *class);
            Box::new(move |eps| {
                let q = GibbsQuadrature::new(u, eps, n)?;
                let m = metastable_measure(&a, &h, level, class, &omega, &q)?;
                let masses: Vec<Value> =
                    m.well_masses.iter().map(|w| json!({ "mass": w.mass, "expected": w.expected })).collect();
                Ok((m.value, m.algebra.target, json!({ "absorbing": m.functions.absorbing, "well_masses": masses })))
            })
        }
    };
    let cells: Vec<(f64, f64, Value, u64)> = plan
        .eps_list
        .par_iter()
        .map(|&eps| {
            let start = Instant::now();
            let (value, target, detail) = eval(eps)?;
            let ms = if plan.timing { start.elapsed().as_millis() as u64 } else { 0 };
            Ok((value, target, detail, ms))
        })
        .collect::<Result<_, CliError>>()?;
    let name = plan.scenario.name();
    let mut rows = Vec::with_capacity(cells.len());
    let mut details = Vec::with_capacity(cells.len());
    for (&eps, (value, target, detail, runtime_ms)) in plan.eps_list.iter().zip(cells) {
        rows.push(SweepRow {
            scenario: name,
            eps,
            value,
            target,
            rel_err: rel_err(value, target),
            grid_n: n,
            runtime_ms,
        });
        details.push(detail);
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.rel_err).collect();
    let trend_ok = error_trend_ok(&errors);
    let final_rel_err = *errors.last().expect("eps list is nonempty");
    let extra_ok = match (&plan.scenario, details.last()) {
        (Scenario::Critical { .. }, Some(d)) => {
            let last = rows.last().expect("eps list is nonempty");
            d["phi2"].as_f64().is_some_and(|p| p <= 0.1 * last.target)
        }
        _ => true,
    };
    let passed = trend_ok && final_rel_err <= plan.tol && extra_ok;
    Ok(SweepReport { rows, details, trend_ok, final_rel_err, tolerance: plan.tol, extra_ok, passed })
}
