//! Brute-force ground truth: exact min cut (max-flow and subset scan) and
//! exhaustive enumeration of extreme, γ-extreme, boundary-sparse and local
//! cuts. Test oracles only; sizes are capped by [`OracleLimits`].

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Cut, DynamicGraph, VertexSet};

#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub max_subset_vertices: usize,
    pub max_enumeration_volume: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_subset_vertices: 20, max_enumeration_volume: u64::MAX }
    }
}

/// Per-subset cut data over a vertex set `within` of at most ~20 vertices.
/// Bit i of a mask stands for `ids[i]`.
struct Table {
    ids: Vec<usize>,
    row: Vec<Vec<u32>>,
    /// w(S, within∖S)
    inner: Vec<u32>,
    /// w(S, V∖within)
    ext: Vec<u32>,
    vol: Vec<u32>,
}

impl Table {
    fn build(g: &DynamicGraph, within: &VertexSet, limits: &OracleLimits) -> Result<Self> {
        let t = within.len();
        if t > limits.max_subset_vertices {
            return Err(Error::OracleLimit { size: t, limit: limits.max_subset_vertices });
        }
        let ids: Vec<usize> = within.iter().copied().collect();
        let mut row = vec![vec![0u32; t]; t];
        let mut ext1 = vec![0u32; t];
        let mut deg = vec![0u32; t];
        for (i, &v) in ids.iter().enumerate() {
            deg[i] = g.degree(v) as u32;
            for (u, c) in g.neighbors(v) {
                match within.position(u) {
                    Some(j) => row[i][j] = c,
                    None => ext1[i] += c,
                }
            }
        }
        let win: Vec<u32> = row.iter().map(|r| r.iter().sum()).collect();
        let size = 1usize << t;
        let mut inner = vec![0u32; size];
        let mut ext = vec![0u32; size];
        let mut vol = vec![0u32; size];
        for mask in 1..size {
            let b = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let mut to_rest = 0u32;
            let mut r = rest;
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                to_rest += row[b][j];
                r &= r - 1;
            }
            inner[mask] = inner[rest] + win[b] - 2 * to_rest;
            ext[mask] = ext[rest] + ext1[b];
            vol[mask] = vol[rest] + deg[b];
        }
        Ok(Self { ids, row, inner, ext, vol })
    }

    fn full(&self) -> usize {
        (1usize << self.ids.len()) - 1
    }

    fn boundary(&self, mask: usize) -> u32 {
        self.inner[mask] + self.ext[mask]
    }

    fn side(&self, mask: usize) -> VertexSet {
        (0..self.ids.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.ids[i]).collect()
    }

    fn cut(&self, mask: usize) -> Cut {
        Cut { side: self.side(mask), boundary: self.boundary(mask) as u64, volume: self.vol[mask] as u64 }
    }

    /// For every mask, the minimum boundary over its nonempty strict submasks.
    fn strict_sub_min(&self) -> Vec<u32> {
        let size = self.full() + 1;
        let mut sub = vec![u32::MAX; size];
        let mut strict = vec![u32::MAX; size];
        for mask in 1..size {
            let mut best = u32::MAX;
            let mut r = mask;
            while r != 0 {
                let i = r.trailing_zeros();
                best = best.min(sub[mask ^ (1 << i)]);
                r &= r - 1;
            }
            strict[mask] = best;
            sub[mask] = best.min(self.boundary(mask));
        }
        strict
    }

    fn connected(&self, mask: usize) -> bool {
        let start = mask.trailing_zeros() as usize;
        let mut seen = 1usize << start;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let mut r = mask & !seen;
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                r &= r - 1;
                if self.row[i][j] > 0 {
                    seen |= 1 << j;
                    stack.push(j);
                }
            }
        }
        seen == mask
    }
}

/// Lexicographic order on sorted vertex lists, used for every tie-break.
fn lex_less(a: &VertexSet, b: &VertexSet) -> bool {
    a.as_slice() < b.as_slice()
}

/// Exact global min cut by n−1 max-flow computations from vertex 0. A
/// disconnected graph yields a boundary-0 cut.
pub fn exact_min_cut(g: &DynamicGraph) -> Result<Cut> {
    let n = g.n();
    if n < 2 {
        return Err(Error::TooSmall);
    }
    let mut best: Option<Cut> = None;
    for t in 1..n {
        let (value, side) = max_flow_min_cut(g, 0, t);
        if best.as_ref().is_none_or(|b| value < b.boundary) {
            best = Some(Cut { volume: g.volume(&side), side, boundary: value });
        }
    }
    Ok(best.expect("n >= 2"))
}

/// Edmonds–Karp on the undirected multigraph; returns the flow value and
/// the source side of a minimum s–t cut.
pub fn max_flow_min_cut(g: &DynamicGraph, s: usize, t: usize) -> (u64, VertexSet) {
    let n = g.n();
    let mut flow: Vec<std::collections::BTreeMap<usize, i64>> = vec![Default::default(); n];
    let residual = |flow: &Vec<std::collections::BTreeMap<usize, i64>>, u: usize, v: usize, c: u32| {
        c as i64 - flow[u].get(&v).copied().unwrap_or(0)
    };
    let mut total = 0u64;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for (v, c) in g.neighbors(u) {
                if parent[v] == usize::MAX && residual(&flow, u, v, c) > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            let side = (0..n).filter(|&v| parent[v] != usize::MAX).collect();
            return (total, side);
        }
        let mut aug = i64::MAX;
        let mut v = t;
        while v != s {
            let u = parent[v];
            aug = aug.min(residual(&flow, u, v, g.multiplicity(u, v)));
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            *flow[u].entry(v).or_insert(0) += aug;
            *flow[v].entry(u).or_insert(0) -= aug;
            v = u;
        }
        total += aug as u64;
    }
}

/// Exact global min cut by scanning every subset; ties go to the
/// lexicographically smallest side.
pub fn min_cut_scan(g: &DynamicGraph, limits: &OracleLimits) -> Result<Cut> {
    if g.n() < 2 {
        return Err(Error::TooSmall);
    }
    let tab = Table::build(g, &VertexSet::range(g.n()), limits)?;
    let mut best: Option<Cut> = None;
    for mask in 1..tab.full() {
        let b = tab.boundary(mask) as u64;
        if best.as_ref().is_none_or(|c| b <= c.boundary) {
            let cut = tab.cut(mask);
            if best.as_ref().is_none_or(|c| b < c.boundary || lex_less(&cut.side, &c.side)) {
                best = Some(cut);
            }
        }
    }
    Ok(best.expect("n >= 2"))
}

/// All extreme sets S (every nonempty strict subset has larger boundary)
/// with ∂S ≤ k and Vol(S) ≤ ν.
pub fn enumerate_extreme_sets(g: &DynamicGraph, k: f64, nu: f64, limits: &OracleLimits) -> Result<Vec<Cut>> {
    Ok(enumerate_gamma_extreme(g, 1.0, k, nu, limits)?.into_iter().map(|x| x.cut).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaExtreme {
    pub cut: Cut,
    /// G[S] connected.
    pub connected: bool,
}

/// All γ-extreme sets S (every nonempty strict subset T has ∂T > γ·∂S) with
/// ∂S ≤ k and Vol(S) ≤ ν, sorted lexicographically.
pub fn enumerate_gamma_extreme(
    g: &DynamicGraph,
    gamma: f64,
    k: f64,
    nu: f64,
    limits: &OracleLimits,
) -> Result<Vec<GammaExtreme>> {
    let tab = Table::build(g, &VertexSet::range(g.n()), limits)?;
    let strict = tab.strict_sub_min();
    let mut out = Vec::new();
    for mask in 1..tab.full() {
        let b = tab.boundary(mask);
        if b as f64 > k || tab.vol[mask] as f64 > nu {
            continue;
        }
        if strict[mask] == u32::MAX || strict[mask] as f64 > gamma * b as f64 {
            out.push(GammaExtreme { cut: tab.cut(mask), connected: tab.connected(mask) });
        }
    }
    out.sort_by(|a, b| a.cut.side.cmp(&b.cut.side));
    Ok(out)
}

/// All U ⊊ C, U ≠ ∅, with w(U, C∖U) ≤ k, Vol_G(U) ≤ ν and
/// w(U, C∖U) < (1−ε)·min{w(U, V∖C), w(C∖U, V∖C)}.
pub fn enumerate_boundary_sparse(
    g: &DynamicGraph,
    c: &VertexSet,
    eps: f64,
    k: f64,
    nu: f64,
    limits: &OracleLimits,
) -> Result<Vec<Cut>> {
    let tab = Table::build(g, c, limits)?;
    let full = tab.full();
    let total_ext = tab.ext[full];
    let mut out = Vec::new();
    for mask in 1..full {
        let inner = tab.inner[mask];
        if inner as f64 > k || tab.vol[mask] as f64 > nu {
            continue;
        }
        let e = tab.ext[mask];
        let rhs = (1.0 - eps) * e.min(total_ext - e) as f64;
        if (inner as f64) < rhs {
            out.push(tab.cut(mask));
        }
    }
    Ok(out)
}

/// Minimum-boundary S ⊊ `within` with v ∈ S, Vol(S) < `volume_limit` and
/// ∂S ≤ `value_limit`; ties by volume, then lexicographic side.
pub fn min_local_cut_through(
    g: &DynamicGraph,
    within: &VertexSet,
    v: usize,
    volume_limit: f64,
    value_limit: f64,
    limits: &OracleLimits,
) -> Result<Option<Cut>> {
    let tab = Table::build(g, within, limits)?;
    let Some(bit) = within.position(v) else { return Ok(None) };
    let mut best: Option<(u32, u32, usize)> = None;
    let mut best_side: Option<VertexSet> = None;
    for mask in 1..tab.full() {
        if mask >> bit & 1 == 0 {
            continue;
        }
        let b = tab.boundary(mask);
        let vol = tab.vol[mask];
        if vol as f64 >= volume_limit || b as f64 > value_limit {
            continue;
        }
        let better = match best {
            None => true,
            Some((bb, bv, _)) if (b, vol) != (bb, bv) => (b, vol) < (bb, bv),
            Some(_) => {
                let side = tab.side(mask);
                lex_less(&side, best_side.as_ref().expect("set with best"))
            }
        };
        if better {
            best = Some((b, vol, mask));
            best_side = Some(tab.side(mask));
        }
    }
    Ok(best.map(|(_, _, mask)| tab.cut(mask)))
}

/// Whether some S ⊊ `within` has Vol(S) < `volume_limit` and ∂S < `below`.
pub fn exists_local_cut_below(
    g: &DynamicGraph,
    within: &VertexSet,
    volume_limit: f64,
    below: f64,
    limits: &OracleLimits,
) -> Result<bool> {
    let tab = Table::build(g, within, limits)?;
    Ok((1..tab.full()).any(|m| (tab.vol[m] as f64) < volume_limit && (tab.boundary(m) as f64) < below))
}

/// All cuts of `within` with Vol(S) < `volume_limit` and ∂S < `below`.
pub fn local_cuts_below(
    g: &DynamicGraph,
    within: &VertexSet,
    volume_limit: f64,
    below: f64,
    limits: &OracleLimits,
) -> Result<Vec<Cut>> {
    let tab = Table::build(g, within, limits)?;
    Ok((1..tab.full())
        .filter(|&m| (tab.vol[m] as f64) < volume_limit && (tab.boundary(m) as f64) < below)
        .map(|m| tab.cut(m))
        .collect())
}
