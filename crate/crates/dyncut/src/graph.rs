//! Unweighted multigraph over a fixed vertex universe, plus the cut
//! primitives (boundary, volume, cross weight, contraction, padded induced
//! subgraphs, conductance) the rest of the crate is written against.

use crate::error::{Error, Result};

/// Neighbor multiplicities sorted by neighbor id. Degrees are tiny, so a
/// sorted vector beats a tree for the scans that dominate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Adjacency(Vec<(usize, u32)>);

impl Adjacency {
    fn find(&self, v: usize) -> std::result::Result<usize, usize> {
        self.0.binary_search_by_key(&v, |e| e.0)
    }

    fn get(&self, v: usize) -> Option<u32> {
        self.find(v).ok().map(|i| self.0[i].1)
    }

    fn add(&mut self, v: usize, count: u32) {
        match self.find(v) {
            Ok(i) => self.0[i].1 += count,
            Err(i) => self.0.insert(i, (v, count)),
        }
    }

    /// Caller guarantees at least `count` edges to `v`.
    fn sub(&mut self, v: usize, count: u32) {
        let i = self.find(v).expect("symmetric");
        self.0[i].1 -= count;
        if self.0[i].1 == 0 {
            self.0.remove(i);
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DynamicGraph {
    adj: Vec<Adjacency>,
    loops: Vec<u32>,
    deg: Vec<u64>,
    m: u64,
}

impl DynamicGraph {
    pub fn new(n: usize) -> Self {
        Self { adj: vec![Adjacency::default(); n], loops: vec![0; n], deg: vec![0; n], m: 0 }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.insert_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Edge count with multiplicity; each self-loop counts once.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// Degree with multiplicity; each self-loop adds 1.
    #[inline]
    pub fn degree(&self, v: usize) -> u64 {
        self.deg[v]
    }

    pub fn loops(&self, v: usize) -> u32 {
        self.loops[v]
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> u32 {
        self.adj.get(u).and_then(|a| a.get(v)).unwrap_or(0)
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.adj[v].0.iter().copied()
    }

    pub fn neighbor_count(&self, v: usize) -> usize {
        self.adj[v].0.len()
    }

    fn check(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n() })
        } else {
            Ok(())
        }
    }

    pub fn insert_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.insert_edges(u, v, 1)
    }

    pub fn delete_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.delete_edges(u, v, 1)
    }

    pub fn insert_edges(&mut self, u: usize, v: usize, count: u32) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if count == 0 {
            return Ok(());
        }
        self.adj[u].add(v, count);
        self.adj[v].add(u, count);
        self.deg[u] += count as u64;
        self.deg[v] += count as u64;
        self.m += count as u64;
        Ok(())
    }

    pub fn delete_edges(&mut self, u: usize, v: usize, count: u32) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        if count == 0 {
            return Ok(());
        }
        if u == v || self.multiplicity(u, v) < count {
            return Err(Error::MissingEdge(u, v));
        }
        for (a, b) in [(u, v), (v, u)] {
            self.adj[a].sub(b, count);
            self.deg[a] -= count as u64;
        }
        self.m -= count as u64;
        Ok(())
    }

    pub fn add_loops(&mut self, v: usize, count: u32) -> Result<()> {
        self.check(v)?;
        self.loops[v] += count;
        self.deg[v] += count as u64;
        self.m += count as u64;
        Ok(())
    }

    /// All non-loop edges as `(u, v, multiplicity)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for u in 0..self.n() {
            out.extend(self.adj[u].0.iter().filter(|e| e.0 > u).map(|&(v, c)| (u, v, c)));
        }
        out
    }

    /// Edge list with parallel edges repeated.
    pub fn edge_units(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m as usize);
        for (u, v, c) in self.edges() {
            for _ in 0..c {
                out.push((u, v));
            }
        }
        out
    }

    /// Remove every non-loop edge at `v`, returning what was removed.
    pub fn detach(&mut self, v: usize) -> Vec<(usize, u32)> {
        let nbrs: Vec<(usize, u32)> = self.neighbors(v).collect();
        for &(u, c) in &nbrs {
            self.delete_edges(v, u, c).expect("present");
        }
        nbrs
    }

    /// Replace vertex `node` by `node` and a fresh vertex `new`: `moved`
    /// lists `(x, count)` edges re-hung from `node` to `new`, and `between`
    /// edges are added between the two.
    pub fn split_vertex(&mut self, node: usize, new: usize, moved: &[(usize, u32)], between: u32) -> Result<()> {
        self.check(new)?;
        for &(x, c) in moved {
            self.delete_edges(node, x, c)?;
            self.insert_edges(new, x, c)?;
        }
        self.insert_edges(node, new, between)
    }

    pub fn boundary(&self, s: &VertexSet) -> u64 {
        let mut b = 0u64;
        for &v in s.iter() {
            for (u, c) in self.neighbors(v) {
                if !s.contains(u) {
                    b += c as u64;
                }
            }
        }
        b
    }

    pub fn volume(&self, s: &VertexSet) -> u64 {
        s.iter().map(|&v| self.deg[v]).sum()
    }

    pub fn cross_weight(&self, a: &VertexSet, b: &VertexSet) -> Result<u64> {
        if a.iter().any(|&v| b.contains(v)) {
            return Err(Error::Overlap);
        }
        let mut w = 0u64;
        for &v in a.iter() {
            for (u, c) in self.neighbors(v) {
                if b.contains(u) {
                    w += c as u64;
                }
            }
        }
        Ok(w)
    }

    /// Contract each part to one node. Returns the contracted graph and the
    /// map from original vertex to part index.
    pub fn contract(&self, partition: &[VertexSet]) -> Result<(DynamicGraph, Vec<usize>)> {
        let mut map = vec![usize::MAX; self.n()];
        for (i, part) in partition.iter().enumerate() {
            for &v in part.iter() {
                self.check(v)?;
                if map[v] != usize::MAX {
                    return Err(Error::BadPartition);
                }
                map[v] = i;
            }
        }
        if map.contains(&usize::MAX) {
            return Err(Error::BadPartition);
        }
        Ok((self.contract_map(&map, partition.len()), map))
    }

    /// Contract along `map` (`usize::MAX` marks vertices outside the map,
    /// which must be isolated) into a graph on `n_out` nodes. Intra-part
    /// edges are dropped.
    pub fn contract_map(&self, map: &[usize], n_out: usize) -> DynamicGraph {
        let mut h = DynamicGraph::new(n_out);
        for (u, v, c) in self.edges() {
            let (a, b) = (map[u], map[v]);
            debug_assert!(a != usize::MAX && b != usize::MAX, "edge at unmapped vertex");
            if a != b {
                h.insert_edges(a, b, c).expect("in range");
            }
        }
        h
    }

    /// G[U] with ⌈r⌉ self-loops per boundary edge at its U-endpoint. Local
    /// vertex `i` is `U[i]`.
    pub fn induced_with_loops(&self, u: &VertexSet, r: f64) -> Result<(DynamicGraph, Vec<usize>)> {
        if u.is_empty() {
            return Err(Error::EmptySet);
        }
        let ids: Vec<usize> = u.iter().copied().collect();
        let pad = r.ceil().max(0.0) as u32;
        let mut h = DynamicGraph::new(ids.len());
        for (i, &v) in ids.iter().enumerate() {
            h.add_loops(i, self.loops[v])?;
            for (x, c) in self.neighbors(v) {
                match u.position(x) {
                    Some(j) if j > i => h.insert_edges(i, j, c)?,
                    Some(_) => {}
                    None => h.add_loops(i, c * pad)?,
                }
            }
        }
        Ok((h, ids))
    }

    /// w(U, V∖U) / min(Vol U, Vol V∖U); infinity on a zero denominator.
    pub fn conductance(&self, u: &VertexSet) -> f64 {
        let cut = self.boundary(u) as f64;
        let vol_u = self.volume(u);
        let total: u64 = self.deg.iter().sum();
        let den = vol_u.min(total - vol_u);
        if den == 0 {
            f64::INFINITY
        } else {
            cut / den as f64
        }
    }

    /// Connected components restricted to `within`, each sorted.
    pub fn components(&self, within: &VertexSet) -> Vec<Vec<usize>> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for &s in within.iter() {
            if !seen.insert(s) {
                continue;
            }
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for (u, _) in self.neighbors(v) {
                    if within.contains(u) && seen.insert(u) {
                        comp.push(u);
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Sorted, duplicate-free vertex list with a bitmask cache for small ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet {
    members: Vec<usize>,
    mask: Option<u64>,
}

impl VertexSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        let mask = if members.last().is_none_or(|&x| x < 64) {
            Some(members.iter().fold(0u64, |m, &v| m | 1 << v))
        } else {
            None
        };
        Self { members, mask }
    }

    pub fn singleton(v: usize) -> Self {
        Self::new(vec![v])
    }

    pub fn range(n: usize) -> Self {
        Self::new((0..n).collect())
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        match self.mask {
            Some(m) => v < 64 && m >> v & 1 == 1,
            None => self.members.binary_search(&v).is_ok(),
        }
    }

    pub fn position(&self, v: usize) -> Option<usize> {
        self.members.binary_search(&v).ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.members.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.members
    }

    /// Members of `universe` not in `self`.
    pub fn complement_in(&self, universe: &VertexSet) -> VertexSet {
        VertexSet::new(universe.iter().copied().filter(|&v| !self.contains(v)).collect())
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// A vertex set together with its boundary and volume at creation time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub side: VertexSet,
    pub boundary: u64,
    pub volume: u64,
}

impl Cut {
    pub fn of(g: &DynamicGraph, side: VertexSet) -> Self {
        let boundary = g.boundary(&side);
        let volume = g.volume(&side);
        Self { side, boundary, volume }
    }

    /// True if the cached numbers still match the graph.
    pub fn is_valid_in(&self, g: &DynamicGraph) -> bool {
        g.boundary(&self.side) == self.boundary && g.volume(&self.side) == self.volume
    }
}
