//! Approximate equilibrium potentials of a class of metastable sets and the
//! measures built from them, for the orders `p ≥ 1`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::critical::bump;
use super::{saddle_profile, DensityKind, DirichletError, GibbsQuadrature, SaddleGeometry, TestDensity};
use crate::chain::{communicating_classes, dv_rate, hitting_probabilities, DvMethod, StateMeasure};
use crate::grid::Grid;
use crate::landscape::{distance, AnalyticLandscape};
use crate::tree::{Hierarchy, TreeLevel};

/// Relative tolerance for a saddle to sit at the class's barrier level.
const LEVEL_TOL: f64 = 1e-6;

/// Test functions `h_M`, one per metastable set `M` of a class.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctions {
    pub level: usize,
    /// Indices of the class's sets among the level's metastable sets.
    pub class_states: Vec<usize>,
    /// Common height of the class's minima.
    pub height: f64,
    /// Height of the global minima, which carry the mass of `π_ε`.
    pub ground: f64,
    pub depth: f64,
    /// The class is a single set without outgoing rates.
    pub absorbing: bool,
    /// Nodal values of `h_M` for every set of the class.
    pub values: Vec<Vec<f64>>,
    /// Catalog indices of the boxed saddles.
    pub saddles: Vec<usize>,
    /// Width of the smoothing kernel.
    pub mollifier_width: f64,
    /// The kernel width was raised from `ε²` to twice the grid spacing.
    pub width_at_grid_scale: bool,
    /// Locations of the minima in every set of the class.
    pub minima: Vec<Vec<Vec<f64>>>,
}

impl TestFunctions {
    /// `e^{(H − U⋆)/ε}θ_ε ε∫|∇h_M|²dπ_ε` for the `k`-th set of the class.
    pub fn energy(&self, q: &GibbsQuadrature, k: usize) -> f64 {
        q.scaled_dirichlet_form(&self.values[k], (self.height - self.ground + self.depth) / q.eps())
    }

    /// The limit of [`TestFunctions::energy`]: `ν(M)/ν⋆ · Σ r(M, ·)`.
    pub fn energy_target(&self, h: &Hierarchy, k: usize) -> f64 {
        let level = h.level(self.level).expect("level exists");
        let s = self.class_states[k];
        h.graph.nu_sum(level.metastable[s].members()) / h.graph.nu_star() * level.chain.out_rate(s)
    }
}

/// Nodes in the union of the components of `{U < U(m) + r0}` containing the
/// given minima.
pub fn valley_mask(q: &GibbsQuadrature, minima: &[Vec<f64>], r0: f64) -> Vec<bool> {
    let grid = q.grid();
    let mut out = vec![false; grid.len()];
    for m in minima {
        let Some(seed) = grid.nearest(m) else { continue };
        let level = q.potential().value(m) + r0;
        let below: Vec<bool> = q.u().iter().map(|&u| u < level).collect();
        for (o, c) in out.iter_mut().zip(grid.component_of(&below, seed)) {
            *o |= c;
        }
    }
    out
}

/// `e^{(H − U⋆)/ε}∫_{outside E(M)} h_M² dπ_ε`, with `U⋆` the ground level and `E(M)` the valleys of depth
/// `r0` around the minima of `M`.
pub fn test_function_tail(tf: &TestFunctions, q: &GibbsQuadrature, k: usize, r0: f64) -> f64 {
    let outside: Vec<bool> = valley_mask(q, &tf.minima[k], r0).iter().map(|v| !v).collect();
    let squares: Vec<f64> = tf.values[k].iter().map(|v| v * v).collect();
    q.scaled_integral(&squares, (tf.height - tf.ground) / q.eps(), Some(&outside))
}

fn class_of(level: &TreeLevel, class: usize) -> Result<Vec<usize>, DirichletError> {
    level
        .classes
        .classes
        .get(class)
        .map(|c| c.states.clone())
        .ok_or_else(|| DirichletError::InvalidInput(format!("level {} has no class {class}", level.p)))
}

/// `exp(−1/(1 − r²))` on the unit ball.
fn kernel(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        libm::exp(-1.0 / (1.0 - r * r))
    }
}

/// Discrete convolution with a radial bump of radius `width`, renormalized
/// near the box faces.
fn mollify(grid: &Grid, values: &[f64], width: f64) -> Vec<f64> {
    let d = grid.dim();
    let reach: Vec<isize> = (0..d).map(|k| (width / grid.spacing(k)) as isize).collect();
    if reach.iter().all(|&r| r == 0) {
        return values.to_vec();
    }
    let mut offsets = Vec::new();
    let extent_y = if d == 2 { reach[1] } else { 0 };
    for oy in -extent_y..=extent_y {
        for ox in -reach[0]..=reach[0] {
            let dx = ox as f64 * grid.spacing(0);
            let dy = if d == 2 { oy as f64 * grid.spacing(1) } else { 0.0 };
            let w = kernel(libm::sqrt(dx * dx + dy * dy) / width);
            if w > 0.0 {
                offsets.push((ox, oy, w));
            }
        }
    }
    let shape = grid.shape();
    (0..grid.len())
        .map(|i| {
            let idx = grid.multi_index(i);
            let (mut acc, mut norm) = (0.0, 0.0);
            for &(ox, oy, w) in &offsets {
                let x = idx[0] as isize + ox;
                let y = if d == 2 { idx[1] as isize + oy } else { 0 };
                if x < 0 || x >= shape[0] as isize || (d == 2 && (y < 0 || y >= shape[1] as isize)) {
                    continue;
                }
                let j = x as usize + if d == 2 { y as usize * grid.stride(1) } else { 0 };
                acc += w * values[j];
                norm += w;
            }
            acc / norm
        })
        .collect()
}

/// Smooth cutoff that is one below `lo`, zero above `hi`.
fn level_cutoff(u: f64, lo: f64, hi: f64) -> f64 {
    bump(super::BUMP_PLATEAU + (1.0 - super::BUMP_PLATEAU) * ((u - lo) / (hi - lo)).clamp(0.0, 1.0))
}

/// Builds the test functions of the `class`-th communicating class of the
/// level-`p` chain.
///
/// Wells are constant at the hitting probabilities of the reduced chain,
/// saddle boxes interpolate with the error-function profile, and the result
/// is smoothed at scale `max(ε², 2h)`. A class consisting of one set with no
/// outgoing rates instead gets a smooth cutoff of the potential around its
/// valley.
pub fn metastable_test_functions(
    landscape: &AnalyticLandscape,
    h: &Hierarchy,
    p: usize,
    class: usize,
    q: &GibbsQuadrature,
) -> Result<TestFunctions, DirichletError> {
    let level = h.level(p).ok_or_else(|| DirichletError::InvalidInput(format!("no level {p}")))?;
    let class_states = class_of(level, class)?;
    let graph = &h.graph;
    let grid = q.grid();
    let eps = q.eps();
    let minima: Vec<Vec<Vec<f64>>> = class_states
        .iter()
        .map(|&s| level.metastable[s].members().iter().map(|&m| landscape.minimum_location(m).to_vec()).collect())
        .collect();
    let height = class_states
        .iter()
        .flat_map(|&s| level.metastable[s].members().iter().map(|&m| graph.minimum(m).height))
        .fold(f64::INFINITY, f64::min);
    let depth = level.depth;
    let barrier = height + depth;
    let absorbing = class_states.len() == 1 && level.chain.out_rate(class_states[0]) == 0.0;
    let seeds: Vec<usize> = minima
        .iter()
        .flatten()
        .map(|m| grid.nearest(m).ok_or_else(|| DirichletError::InvalidInput(format!("minimum {m:?} outside the grid"))))
        .collect::<Result<_, _>>()?;

    if absorbing {
        let s = class_states[0];
        let xi = level.xi[s].finite().map_or(f64::INFINITY, |x| x - depth);
        let gap = landscape
            .catalog
            .points
            .iter()
            .map(|c| c.value - barrier)
            .filter(|&g| g > LEVEL_TOL * barrier.abs().max(1.0))
            .fold(f64::INFINITY, f64::min);
        let a = xi.min(gap);
        let a = if a.is_finite() { a / 5.0 } else { 0.2 };
        let below: Vec<bool> = q.u().iter().map(|&u| u < barrier + 4.0 * a).collect();
        let mut region = vec![false; grid.len()];
        for &seed in &seeds {
            for (r, c) in region.iter_mut().zip(grid.component_of(&below, seed)) {
                *r |= c;
            }
        }
        let values = (0..grid.len())
            .map(|i| if region[i] { level_cutoff(q.u()[i], barrier + 2.0 * a, barrier + 4.0 * a) } else { 0.0 })
            .collect();
        return Ok(TestFunctions {
            level: p,
            class_states,
            height,
            ground: graph.ground_height(),
            depth,
            absorbing,
            values: vec![values],
            saddles: Vec::new(),
            mollifier_width: 0.0,
            width_at_grid_scale: false,
            minima,
        });
    }

    let dim = grid.dim();
    let delta = libm::sqrt(eps * libm::log(1.0 / eps));
    let j = libm::ceil(libm::sqrt(dim as f64 + 11.0));
    let below: Vec<bool> = q.u().iter().map(|&u| u < barrier + j * j * delta * delta).collect();
    let mut k_eps = vec![false; grid.len()];
    for &seed in &seeds {
        for (r, c) in k_eps.iter_mut().zip(grid.component_of(&below, seed)) {
            *r |= c;
        }
    }

    // Boxes around the saddles at the barrier level inside the region.
    let tol = LEVEL_TOL * barrier.abs().max(1.0);
    let mut boxes = Vec::new();
    for s in graph.saddle_ids() {
        if (graph.saddle(s).height - barrier).abs() > tol {
            continue;
        }
        let idx = landscape.saddle_points[s.0];
        let point = &landscape.catalog.points[idx];
        if grid.nearest(&point.location).is_none_or(|n| !k_eps[n]) {
            continue;
        }
        boxes.push((idx, SaddleGeometry::new(point, eps)?));
    }
    let in_box: Vec<Option<usize>> = (0..grid.len())
        .map(|i| {
            if !k_eps[i] {
                return None;
            }
            let x = grid.point(i);
            boxes.iter().position(|(_, g)| g.contains(&x))
        })
        .collect();
    let open: Vec<bool> = (0..grid.len()).map(|i| k_eps[i] && in_box[i].is_none()).collect();
    let (labels, count) = grid.components(&open);

    // Each region is labelled by the minimum nearest to its lowest node, which
    // stays meaningful when a box swallows the minimum itself.
    let mut lowest: Vec<Option<(f64, usize)>> = vec![None; count];
    for (i, label) in labels.iter().enumerate() {
        let Some(c) = *label else { continue };
        if lowest[c].is_none_or(|(best, _)| q.u()[i] < best) {
            lowest[c] = Some((q.u()[i], i));
        }
    }
    let region_minimum: Vec<Option<usize>> = lowest
        .iter()
        .map(|low| {
            let x = grid.point((*low)?.1);
            graph
                .min_ids()
                .map(|m| (distance(landscape.minimum_location(m), &x), m.0))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, m)| m)
        })
        .collect();
    let state_of_min = |m: usize| level.states().position(|set| set.members().iter().any(|x| x.0 == m));
    let nv = level.metastable.len();
    let targets: Vec<usize> = (0..nv).collect();
    let hitting = hitting_probabilities(&level.hat_chain, &targets)?;
    let hat_classes = communicating_classes(&level.hat_chain);
    let hat_class = hat_classes.class_of[class_states[0]];
    let region_values: Vec<Vec<f64>> = (0..count)
        .map(|c| {
            let state = region_minimum[c].and_then(state_of_min);
            class_states
                .iter()
                .map(|&target| match state {
                    Some(st) if hat_classes.class_of[st] == hat_class => hitting.prob(st, target),
                    _ => 0.0,
                })
                .collect()
        })
        .collect();

    // Region labels just beyond each box face along the unstable direction.
    let sides: Vec<[Option<usize>; 2]> = boxes
        .iter()
        .map(|(_, g)| {
            let side = |sign: f64| {
                let l = g.half_widths[0] + 2.0 * grid.max_spacing();
                let x: Vec<f64> =
                    g.center.iter().zip(g.frame.column(0).iter()).map(|(c, e)| c + sign * l * e).collect();
                grid.nearest(&x).and_then(|n| labels[n])
            };
            [side(1.0), side(-1.0)]
        })
        .collect();

    let width_target = eps * eps;
    let grid_floor = 2.0 * grid.max_spacing();
    let mollifier_width = width_target.max(grid_floor);
    let values = (0..class_states.len())
        .map(|k| {
            let region_value = |c: Option<usize>| c.map_or(0.0, |c| region_values[c][k]);
            let raw: Vec<f64> = (0..grid.len())
                .map(|i| match (labels[i], in_box[i]) {
                    (Some(c), _) => region_values[c][k],
                    (None, Some(b)) => {
                        let (plus, minus) = (region_value(sides[b][0]), region_value(sides[b][1]));
                        minus + (plus - minus) * saddle_profile(&boxes[b].1, &grid.point(i))
                    }
                    (None, None) => 0.0,
                })
                .collect();
            mollify(grid, &raw, mollifier_width)
        })
        .collect();
    Ok(TestFunctions {
        level: p,
        class_states,
        height,
        ground: graph.ground_height(),
        depth,
        absorbing,
        values,
        saddles: boxes.iter().map(|(i, _)| *i).collect(),
        mollifier_width,
        width_at_grid_scale: grid_floor > width_target,
        minima,
    })
}

/// The exact small-temperature value of the measure's rescaled energy from
/// the rate table: `(A₁ − A₂)/ν⋆` with
/// `A₁ = Σ_M g(M)²ν(M)Σ r(M, ·)` and `A₂ = Σ_{M≠M'} g(M)g(M')ν(M)r(M, M')`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimsupAlgebra {
    pub a1: f64,
    pub a2: f64,
    pub nu_star: f64,
    /// `(A₁ − A₂)/ν⋆`.
    pub value: f64,
    /// The order-`p` rate of `ω` from the reduced chain.
    pub target: f64,
}

/// Evaluates [`LimsupAlgebra`] for weights `omega` on the class's sets.
pub fn limsup_algebra(
    h: &Hierarchy,
    p: usize,
    class_states: &[usize],
    omega: &[f64],
) -> Result<LimsupAlgebra, DirichletError> {
    let level = h.level(p).ok_or_else(|| DirichletError::InvalidInput(format!("no level {p}")))?;
    if omega.len() != class_states.len() {
        return Err(DirichletError::InvalidInput(format!("{} weights for {} sets", omega.len(), class_states.len())));
    }
    let graph = &h.graph;
    let nu_star = graph.nu_star();
    let nu: Vec<f64> = class_states.iter().map(|&s| graph.nu_sum(level.metastable[s].members())).collect();
    let g: Vec<f64> = omega.iter().zip(&nu).map(|(w, n)| libm::sqrt(nu_star * w / n)).collect();
    let chain = &level.chain;
    let mut a1 = 0.0;
    let mut a2 = 0.0;
    for (i, &si) in class_states.iter().enumerate() {
        a1 += g[i] * g[i] * nu[i] * chain.out_rate(si);
        for (j, &sj) in class_states.iter().enumerate() {
            if i != j {
                a2 += g[i] * g[j] * nu[i] * chain.rate(si, sj);
            }
        }
    }
    let mut weights = vec![0.0; level.metastable.len()];
    for (&s, &w) in class_states.iter().zip(omega) {
        weights[s] = w;
    }
    let target = dv_rate(chain, &StateMeasure::normalized(weights)?, DvMethod::Decomposed)?;
    Ok(LimsupAlgebra { a1, a2, nu_star, value: (a1 - a2) / nu_star, target })
}

/// Mass of a ball around one minimum against its limiting weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WellMass {
    pub minimum: usize,
    pub radius: f64,
    pub mass: f64,
    /// `π_M(m)·ω(M)`.
    pub expected: f64,
}

/// The measure `F_ε²dπ_ε` with `F_ε ∝ Σ_M g(M)h_M` and its rescaled energy.
#[derive(Debug, Clone, PartialEq)]
pub struct MetastableMeasure {
    pub functions: TestFunctions,
    pub density: TestDensity,
    /// `θ_ε I_ε(μ_ε)`.
    pub value: f64,
    pub algebra: LimsupAlgebra,
    pub well_masses: Vec<WellMass>,
}

/// Builds the measure for weights `omega` on the class's sets.
pub fn metastable_measure(
    landscape: &AnalyticLandscape,
    h: &Hierarchy,
    p: usize,
    class: usize,
    omega: &[f64],
    q: &GibbsQuadrature,
) -> Result<MetastableMeasure, DirichletError> {
    let functions = metastable_test_functions(landscape, h, p, class, q)?;
    let algebra = limsup_algebra(h, p, &functions.class_states, omega)?;
    let level = h.level(p).expect("level checked above");
    let graph = &h.graph;
    let nu_star = graph.nu_star();
    let eps = q.eps();
    let coef: Vec<f64> = functions
        .class_states
        .iter()
        .zip(omega)
        .map(|(&s, w)| libm::sqrt(nu_star * w / graph.nu_sum(level.metastable[s].members())))
        .collect();
    let log_psi = (0..q.grid().len())
        .map(|i| {
            let g: f64 = coef.iter().zip(&functions.values).map(|(c, v)| c * v[i]).sum();
            libm::log(g) - q.u()[i] / (2.0 * eps)
        })
        .collect();
    let density = TestDensity::from_log_psi(q, DensityKind::Metastable, log_psi)?;
    let value = libm::exp(functions.depth / eps) * density.dirichlet_form(q);

    let mut well_masses = Vec::new();
    for (k, &s) in functions.class_states.iter().enumerate() {
        let set = &level.metastable[s];
        let nu_set = graph.nu_sum(set.members());
        for &m in set.members() {
            let loc = landscape.minimum_location(m);
            let radius = 0.5
                * landscape
                    .catalog
                    .points
                    .iter()
                    .map(|c| distance(&c.location, loc))
                    .filter(|&r| r > 0.0)
                    .fold(f64::INFINITY, f64::min);
            let mask: Vec<bool> = (0..q.grid().len()).map(|i| distance(&q.grid().point(i), loc) < radius).collect();
            well_masses.push(WellMass {
                minimum: m.0,
                radius,
                mass: density.mass(q, Some(&mask)),
                expected: graph.minimum(m).nu / nu_set * omega[k],
            });
        }
    }
    Ok(MetastableMeasure { functions, density, value, algebra, well_masses })
}
