//! JSON file schemas and their conversion to core types.

use std::path::Path;

use metastable_core::chain::{ClassDecomposition, Ctmc, StateMeasure};
use metastable_core::gamma::{GammaMeasure, PointMeasure};
use metastable_core::landscape::{
    Bounds, LandscapeGraph, MinId, MinimumNode, Monomial, Polynomial, Potential, SaddleNode, GRAPH_HEIGHT_TOL,
};
use metastable_core::tree::{Hierarchy, MinSet, TreeLevel};
use metastable_core::Height;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Reads and parses a JSON file, returning the raw bytes for the manifest.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(T, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let value =
        serde_json::from_slice(&bytes).map_err(|source| CliError::Schema { path: path.to_path_buf(), source })?;
    Ok((value, bytes))
}

/// `{"kind":"builtin","name":…}` or `{"kind":"polynomial","dim":…,"coeffs":…}`
/// with an optional (builtin) or required (polynomial) `"box"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Builtin {
        name: String,
        #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
        bounds: Option<Vec<[f64; 2]>>,
    },
    Polynomial {
        dim: usize,
        /// Ascending coefficients of a univariate polynomial.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeffs: Option<Vec<f64>>,
        /// Monomials `coef · Π x_k^{powers_k}` for any dimension.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<Vec<TermSpec>>,
        #[serde(rename = "box")]
        bounds: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Names accepted by builtin potential specs.
pub const BUILTINS: [&str; 6] =
    ["double_well", "double_well_2d", "quadratic", "quadratic_2d", "tilted_double_well", "triple_well"];

fn builtin(name: &str) -> Result<Potential, CliError> {
    Ok(match name {
        "double_well" => Potential::double_well(),
        "double_well_2d" => Potential::double_well_2d(),
        "quadratic" => Potential::quadratic(1, 3.0)?,
        "quadratic_2d" => Potential::quadratic(2, 3.0)?,
        "tilted_double_well" => Potential::multiwell(&[-1.0, 1.0], 1.0, 0.2)?,
        "triple_well" => Potential::multiwell(&[-1.5, 0.0, 1.5], 0.3, 0.05)?,
        other => {
            return Err(CliError::argument(format!(
                "unknown builtin potential {other:?}; known: {}",
                BUILTINS.join(", ")
            )))
        }
    })
}

fn bounds_of(axes: &[[f64; 2]]) -> Result<Bounds, CliError> {
    Ok(Bounds::new(axes.iter().map(|a| (a[0], a[1])).collect())?)
}

impl PotentialSpec {
    pub fn builtin(name: &str) -> Self {
        PotentialSpec::Builtin { name: name.to_string(), bounds: None }
    }

    pub fn build(&self) -> Result<Potential, CliError> {
        match self {
            PotentialSpec::Builtin { name, bounds } => {
                let u = builtin(name)?;
                match bounds {
                    Some(b) => Ok(u.with_bounds(bounds_of(b)?)?),
                    None => Ok(u),
                }
            }
            PotentialSpec::Polynomial { dim, coeffs, terms, bounds } => {
                let poly = match (coeffs, terms) {
                    (Some(c), None) if *dim == 1 => Polynomial::univariate(c)?,
                    (Some(_), None) => {
                        return Err(CliError::argument("\"coeffs\" describes univariate polynomials; use \"terms\""))
                    }
                    (None, Some(t)) => Polynomial::new(
                        *dim,
                        t.iter().map(|m| Monomial { coef: m.coef, powers: m.powers.clone() }).collect(),
                    )?,
                    _ => return Err(CliError::argument("a polynomial needs exactly one of \"coeffs\" and \"terms\"")),
                };
                Ok(Potential::new("polynomial", poly, bounds_of(bounds)?)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimumSpec {
    pub id: String,
    pub height: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaddleSpec {
    pub id: String,
    pub height: f64,
    pub omega: f64,
    pub connects: [String; 2],
}

/// Landscape graph file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub minima: Vec<MinimumSpec>,
    pub saddles: Vec<SaddleSpec>,
}

impl GraphFile {
    pub fn from_graph(g: &LandscapeGraph) -> Self {
        let minima = g.minima().iter().map(|m| MinimumSpec { id: m.id.clone(), height: m.height, nu: m.nu }).collect();
        let saddles = g
            .saddles()
            .iter()
            .map(|s| SaddleSpec {
                id: s.id.clone(),
                height: s.height,
                omega: s.omega,
                connects: s.connects.map(|m| g.minimum(m).id.clone()),
            })
            .collect();
        Self { minima, saddles }
    }

    pub fn build(&self) -> Result<LandscapeGraph, CliError> {
        let minima: Vec<MinimumNode> =
            self.minima.iter().map(|m| MinimumNode { id: m.id.clone(), height: m.height, nu: m.nu }).collect();
        let find = |id: &str| {
            minima
                .iter()
                .position(|m| m.id == id)
                .map(MinId)
                .ok_or_else(|| CliError::argument(format!("saddle endpoint {id:?} is not a minimum")))
        };
        let saddles = self
            .saddles
            .iter()
            .map(|s| {
                Ok(SaddleNode {
                    id: s.id.clone(),
                    height: s.height,
                    omega: s.omega,
                    connects: [find(&s.connects[0])?, find(&s.connects[1])?],
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(LandscapeGraph::new(minima, saddles, GRAPH_HEIGHT_TOL)?)
    }
}

/// Chain file: state names and a square rate table with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub states: Vec<String>,
    pub rates: Vec<Vec<f64>>,
}

impl ChainFile {
    pub fn build(&self) -> Result<Ctmc, CliError> {
        if self.rates.len() != self.states.len() {
            return Err(CliError::argument(format!("{} states but {} rate rows", self.states.len(), self.rates.len())));
        }
        Ok(Ctmc::from_rows(&self.rates)?)
    }

    /// Resolves a state given by name or index.
    pub fn state(&self, key: &str) -> Result<usize, CliError> {
        self.states
            .iter()
            .position(|s| s == key)
            .or_else(|| key.parse::<usize>().ok().filter(|&i| i < self.states.len()))
            .ok_or_else(|| CliError::argument(format!("unknown state {key:?}")))
    }
}

/// Weights on the states of a chain: a bare array or `{"weights": […]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsFile {
    Bare(Vec<f64>),
    Named { weights: Vec<f64> },
}

impl WeightsFile {
    pub fn weights(&self) -> &[f64] {
        match self {
            WeightsFile::Bare(w) | WeightsFile::Named { weights: w } => w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointAtom {
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimumAtom {
    pub min: String,
    pub weight: f64,
}

/// Measure file: atoms in space or weights on named minima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureFile {
    Points { atoms: Vec<PointAtom> },
    Minima { atoms_by_id: Vec<MinimumAtom> },
}

impl MeasureFile {
    pub fn build(&self, graph: &LandscapeGraph) -> Result<GammaMeasure, CliError> {
        match self {
            MeasureFile::Points { atoms } => Ok(GammaMeasure::Points(PointMeasure::new(
                atoms.iter().map(|a| (a.point.clone(), a.weight)).collect(),
            )?)),
            MeasureFile::Minima { atoms_by_id } => {
                let mut weights = vec![0.0; graph.min_count()];
                for atom in atoms_by_id {
                    let m = graph
                        .find_minimum(&atom.min)
                        .ok_or_else(|| CliError::argument(format!("unknown minimum {:?}", atom.min)))?;
                    weights[m.0] += atom.weight;
                }
                Ok(GammaMeasure::Minima(StateMeasure::normalized(weights)?))
            }
        }
    }
}

/// `null` encodes `+∞`.
fn height_json(h: Height) -> Option<f64> {
    h.finite()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFile {
    pub states: Vec<usize>,
    pub recurrent: bool,
}

/// One level of the hierarchy file. Sets are lists of minimum ids; `V`
/// holds the metastable sets, `N` the absorbed ones, and `Xi` the depth of
/// each set in that order (`null` for infinite).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
#[serde(deny_unknown_fields)]
pub struct LevelFile {
    pub p: usize,
    pub d: f64,
    pub V: Vec<Vec<String>>,
    pub N: Vec<Vec<String>>,
    pub merged_from: Vec<Vec<usize>>,
    pub hat_rates: Vec<Vec<f64>>,
    pub rates: Vec<Vec<f64>>,
    pub classes: Vec<ClassFile>,
    pub Xi: Vec<Option<f64>>,
}

/// Hierarchy file, self-contained so that it can be checked later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyFile {
    pub q: usize,
    pub graph: GraphFile,
    pub levels: Vec<LevelFile>,
}

impl HierarchyFile {
    pub fn from_hierarchy(h: &Hierarchy) -> Self {
        let g = &h.graph;
        let levels = h
            .levels
            .iter()
            .map(|l| LevelFile {
                p: l.p,
                d: l.depth,
                V: l.metastable.iter().map(|s| s.labels(g)).collect(),
                N: l.absorbed.iter().map(|s| s.labels(g)).collect(),
                merged_from: l.merged_from.clone(),
                hat_rates: l.hat_chain.rows(),
                rates: l.chain.rows(),
                classes: l
                    .classes
                    .classes
                    .iter()
                    .map(|c| ClassFile { states: c.states.clone(), recurrent: c.recurrent })
                    .collect(),
                Xi: l.xi.iter().map(|&x| height_json(x)).collect(),
            })
            .collect();
        Self { q: h.q(), graph: GraphFile::from_graph(g), levels }
    }

    /// Rebuilds the in-memory hierarchy exactly as stored, without
    /// recomputing anything, so that checks see tampered values.
    pub fn build(&self) -> Result<Hierarchy, CliError> {
        let graph = self.graph.build()?;
        let set = |labels: &Vec<String>| {
            labels
                .iter()
                .map(|id| graph.find_minimum(id).ok_or_else(|| CliError::argument(format!("unknown minimum {id:?}"))))
                .collect::<Result<Vec<_>, _>>()
                .map(MinSet::new)
        };
        let levels = self
            .levels
            .iter()
            .map(|l| {
                let (nv, total) = (l.V.len(), l.V.len() + l.N.len());
                if l.rates.len() != nv || l.hat_rates.len() != total || l.Xi.len() != total {
                    return Err(CliError::argument(format!(
                        "level {}: {nv} metastable and {total} total sets, but {} rate rows, {} extended rows, {} depths",
                        l.p,
                        l.rates.len(),
                        l.hat_rates.len(),
                        l.Xi.len()
                    )));
                }
                let classes = ClassDecomposition::from_classes(
                    l.classes.iter().map(|c| (c.states.clone(), c.recurrent)).collect(),
                    l.rates.len(),
                )?;
                Ok(TreeLevel {
                    p: l.p,
                    depth: l.d,
                    metastable: l.V.iter().map(set).collect::<Result<_, _>>()?,
                    absorbed: l.N.iter().map(set).collect::<Result<_, _>>()?,
                    merged_from: l.merged_from.clone(),
                    hat_chain: Ctmc::from_rows(&l.hat_rates)?,
                    chain: Ctmc::from_rows(&l.rates)?,
                    classes,
                    xi: l.Xi.iter().map(|x| x.map_or(Height::Infinite, Height::Finite)).collect(),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        if levels.len() != self.q {
            return Err(CliError::argument(format!("q = {} but {} levels are stored", self.q, levels.len())));
        }
        Ok(Hierarchy { graph, levels })
    }
}
