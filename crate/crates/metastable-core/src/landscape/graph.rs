//! Landscape graphs: minima joined by saddles, communication heights and gates.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use petgraph::unionfind::UnionFind;

use super::LandscapeError;
use crate::Height;

/// Absolute tolerance for equality of user-declared heights.
pub const GRAPH_HEIGHT_TOL: f64 = 1e-12;

/// Index of a local minimum in a [`LandscapeGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MinId(pub usize);

/// Index of a saddle in a [`LandscapeGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SaddleId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct MinimumNode {
    pub id: String,
    pub height: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleNode {
    pub id: String,
    pub height: f64,
    pub omega: f64,
    /// The two minima reached by the saddle's heteroclinic orbits.
    pub connects: [MinId; 2],
}

/// Minima and index-one saddles with heights, weights and heteroclinic links.
///
/// Construction validates the data and precomputes all pairwise
/// communication heights; the value is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeGraph {
    minima: Vec<MinimumNode>,
    saddles: Vec<SaddleNode>,
    height_tol: f64,
    theta: Vec<Height>,
}

impl LandscapeGraph {
    pub fn new(minima: Vec<MinimumNode>, saddles: Vec<SaddleNode>, height_tol: f64) -> Result<Self, LandscapeError> {
        let mut ids = BTreeSet::new();
        for m in &minima {
            if !ids.insert(m.id.as_str()) {
                return Err(LandscapeError::InvalidGraph(alloc::format!("duplicate id {}", m.id)));
            }
            if !m.height.is_finite() || !(m.nu.is_finite() && m.nu > 0.0) {
                return Err(LandscapeError::InvalidGraph(alloc::format!(
                    "minimum {} needs a finite height and a positive weight",
                    m.id
                )));
            }
        }
        for s in &saddles {
            if !ids.insert(s.id.as_str()) {
                return Err(LandscapeError::InvalidGraph(alloc::format!("duplicate id {}", s.id)));
            }
            if !s.height.is_finite() || !(s.omega.is_finite() && s.omega > 0.0) {
                return Err(LandscapeError::InvalidGraph(alloc::format!(
                    "saddle {} needs a finite height and a positive weight",
                    s.id
                )));
            }
            for end in s.connects {
                let m = minima.get(end.0).ok_or_else(|| {
                    LandscapeError::InvalidGraph(alloc::format!("saddle {} connects an unknown minimum", s.id))
                })?;
                if s.height <= m.height + height_tol {
                    return Err(LandscapeError::InvalidGraph(alloc::format!(
                        "saddle {} (height {}) is not above its endpoint {} (height {})",
                        s.id,
                        s.height,
                        m.id,
                        m.height
                    )));
                }
            }
        }
        let theta = all_pairs_theta(&minima, &saddles);
        Ok(Self { minima, saddles, height_tol, theta })
    }

    pub fn minima(&self) -> &[MinimumNode] {
        &self.minima
    }

    pub fn saddles(&self) -> &[SaddleNode] {
        &self.saddles
    }

    pub fn minimum(&self, m: MinId) -> &MinimumNode {
        &self.minima[m.0]
    }

    pub fn saddle(&self, s: SaddleId) -> &SaddleNode {
        &self.saddles[s.0]
    }

    pub fn height_tol(&self) -> f64 {
        self.height_tol
    }

    pub fn min_count(&self) -> usize {
        self.minima.len()
    }

    pub fn min_ids(&self) -> impl Iterator<Item = MinId> {
        (0..self.minima.len()).map(MinId)
    }

    pub fn saddle_ids(&self) -> impl Iterator<Item = SaddleId> {
        (0..self.saddles.len()).map(SaddleId)
    }

    pub fn find_minimum(&self, id: &str) -> Option<MinId> {
        self.minima.iter().position(|m| m.id == id).map(MinId)
    }

    pub fn find_saddle(&self, id: &str) -> Option<SaddleId> {
        self.saddles.iter().position(|s| s.id == id).map(SaddleId)
    }

    /// Communication height `Θ(a, b)`; `Θ(a, a) = U(a)`.
    pub fn theta(&self, a: MinId, b: MinId) -> Height {
        self.theta[a.0 * self.minima.len() + b.0]
    }

    /// `min Θ(a, b)` over `a ∈ from`, `b ∈ to`; `+∞` when `to` is empty.
    pub fn theta_sets(&self, from: &[MinId], to: &[MinId]) -> Height {
        let mut best = Height::Infinite;
        for &a in from {
            for &b in to {
                best = best.min(self.theta(a, b));
            }
        }
        best
    }

    pub fn nu_sum(&self, set: &[MinId]) -> f64 {
        set.iter().map(|m| self.minima[m.0].nu).sum()
    }

    pub fn omega_sum(&self, saddles: &[SaddleId]) -> f64 {
        saddles.iter().map(|s| self.saddles[s.0].omega).sum()
    }

    /// Height of the global minima.
    pub fn ground_height(&self) -> f64 {
        self.minima.iter().map(|m| m.height).fold(f64::INFINITY, f64::min)
    }

    /// The global minima `M⋆`.
    pub fn global_minima(&self) -> Vec<MinId> {
        let low = self.ground_height();
        self.min_ids().filter(|m| self.minimum(*m).height <= low + self.height_tol).collect()
    }

    /// `ν⋆ = ν(M⋆)`.
    pub fn nu_star(&self) -> f64 {
        self.nu_sum(&self.global_minima())
    }

    /// Common height of a simple set, or `None` if members differ by more
    /// than the height tolerance.
    pub fn simple_height(&self, set: &[MinId]) -> Option<f64> {
        let first = self.minima[set.first()?.0].height;
        set.iter().all(|m| (self.minima[m.0].height - first).abs() <= self.height_tol).then_some(first)
    }

    /// `M̃`: minima outside `set` no higher than the set.
    pub fn lower_competitors(&self, set: &[MinId], set_height: f64) -> Vec<MinId> {
        self.min_ids().filter(|m| !set.contains(m) && self.minimum(*m).height <= set_height + self.height_tol).collect()
    }

    /// Depth `Ξ(M) = Θ(M, M̃) − U(M)` of a simple set.
    pub fn depth(&self, set: &[MinId]) -> Result<Height, LandscapeError> {
        let h = self.simple_height(set).ok_or(LandscapeError::NotSimple)?;
        let competitors = self.lower_competitors(set, h);
        Ok(self.theta_sets(set, &competitors).minus(h))
    }

    /// The `⇝` relation: minima reachable from `σ` through its direct targets
    /// and chains of saddles strictly below `U(σ)`.
    pub fn reachable_below(&self, s: SaddleId) -> Vec<MinId> {
        let sigma = &self.saddles[s.0];
        let mut uf = UnionFind::new(self.minima.len());
        for other in &self.saddles {
            if other.height < sigma.height - self.height_tol {
                uf.union(other.connects[0].0, other.connects[1].0);
            }
        }
        let roots: Vec<usize> = sigma.connects.iter().map(|m| uf.find(m.0)).collect();
        self.min_ids().filter(|m| roots.contains(&uf.find(m.0))).collect()
    }

    /// Gate saddles `S(M, M')`: saddles at height `Θ(M, M̃) = Θ(M, M')` with a
    /// direct heteroclinic link to `M'` that reach `M` through lower saddles.
    pub fn gate_saddles(&self, from: &[MinId], to: &[MinId]) -> Result<Vec<SaddleId>, LandscapeError> {
        let h = self.simple_height(from).ok_or(LandscapeError::NotSimple)?;
        if from.iter().any(|m| to.contains(m)) {
            return Err(LandscapeError::NotDisjoint);
        }
        let competitors = self.lower_competitors(from, h);
        if competitors.is_empty() {
            return Ok(Vec::new());
        }
        let barrier = self.theta_sets(from, &competitors);
        let level = match barrier {
            Height::Finite(v) => v,
            Height::Infinite => return Ok(Vec::new()),
        };
        if !barrier.approx_eq(self.theta_sets(from, to), self.height_tol) {
            return Ok(Vec::new());
        }
        Ok(self
            .saddle_ids()
            .filter(|&s| {
                let sigma = self.saddle(s);
                (sigma.height - level).abs() <= self.height_tol
                    && sigma.connects.iter().any(|m| to.contains(m))
                    && self.reachable_below(s).iter().any(|m| from.contains(m))
            })
            .collect())
    }

    /// Saddles at height `level` directly linked to both `a` and `b`.
    pub fn direct_saddles(&self, a: MinId, b: MinId, level: f64) -> Vec<SaddleId> {
        self.saddle_ids()
            .filter(|&s| {
                let sigma = self.saddle(s);
                (sigma.height - level).abs() <= self.height_tol
                    && sigma.connects.contains(&a)
                    && sigma.connects.contains(&b)
            })
            .collect()
    }

    /// A copy with minima and saddles reordered by the given permutations
    /// (`perm[new] = old`).
    pub fn permuted(&self, min_perm: &[usize], saddle_perm: &[usize]) -> Result<Self, LandscapeError> {
        let mut inverse = vec![0usize; self.minima.len()];
        for (new, &old) in min_perm.iter().enumerate() {
            inverse[old] = new;
        }
        let minima = min_perm.iter().map(|&old| self.minima[old].clone()).collect();
        let saddles = saddle_perm
            .iter()
            .map(|&old| {
                let mut s = self.saddles[old].clone();
                s.connects = [MinId(inverse[s.connects[0].0]), MinId(inverse[s.connects[1].0])];
                s
            })
            .collect();
        Self::new(minima, saddles, self.height_tol)
    }
}

/// Kruskal sweep: saddles in ascending height merge components; the height of
/// the merge is the communication height of every pair it joins.
fn all_pairs_theta(minima: &[MinimumNode], saddles: &[SaddleNode]) -> Vec<Height> {
    let n = minima.len();
    let mut theta = vec![Height::Infinite; n * n];
    for (i, m) in minima.iter().enumerate() {
        theta[i * n + i] = Height::Finite(m.height);
    }
    let mut order: Vec<usize> = (0..saddles.len()).collect();
    order.sort_by(|&a, &b| saddles[a].height.total_cmp(&saddles[b].height));
    let mut uf = UnionFind::new(n);
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for s in order {
        let [a, b] = saddles[s].connects;
        let (ra, rb) = (uf.find(a.0), uf.find(b.0));
        if ra == rb {
            continue;
        }
        let h = Height::Finite(saddles[s].height);
        for &x in &members[ra] {
            for &y in &members[rb] {
                theta[x * n + y] = h;
                theta[y * n + x] = h;
            }
        }
        uf.union(ra, rb);
        let root = uf.find(ra);
        let (keep, drop) = if root == ra { (ra, rb) } else { (rb, ra) };
        let moved = core::mem::take(&mut members[drop]);
        members[keep].extend(moved);
    }
    theta
}
