//! Local randomized contraction: grow a set from a seed vertex by always
//! swallowing the lowest-priority boundary edge, remembering every prefix
//! whose boundary fits the budget. Also the global contraction procedure,
//! kept as a calibration oracle.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Cut, DynamicGraph, VertexSet};
use crate::rng;

/// Read access LocalKCut needs. `order` is the number of live vertices in
/// the view, used to reject the trivial prefix X = V.
pub trait CutGraph {
    fn order(&self) -> usize;
    /// Upper bound on vertex ids, for scratch sizing.
    fn universe(&self) -> usize;
    fn loops(&self, _v: usize) -> u64 {
        0
    }
    fn for_each_neighbor<F: FnMut(usize, u32)>(&self, v: usize, f: F);
}

impl CutGraph for DynamicGraph {
    fn order(&self) -> usize {
        self.n()
    }
    fn universe(&self) -> usize {
        self.n()
    }
    fn loops(&self, v: usize) -> u64 {
        DynamicGraph::loops(self, v) as u64
    }
    fn for_each_neighbor<F: FnMut(usize, u32)>(&self, v: usize, mut f: F) {
        for (u, c) in self.neighbors(v) {
            f(u, c)
        }
    }
}

/// G[C] where C is the set of vertices whose label equals `id`.
pub struct InducedByLabel<'a> {
    pub graph: &'a DynamicGraph,
    pub label: &'a [usize],
    pub id: usize,
    pub order: usize,
}

impl CutGraph for InducedByLabel<'_> {
    fn order(&self) -> usize {
        self.order
    }
    fn universe(&self) -> usize {
        self.graph.n()
    }
    fn for_each_neighbor<F: FnMut(usize, u32)>(&self, v: usize, mut f: F) {
        for (u, c) in self.graph.neighbors(v) {
            if self.label[u] == self.id {
                f(u, c)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalCutParams {
    pub nu: f64,
    pub k: f64,
    pub trials: usize,
    pub seed: u64,
}

impl LocalCutParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 1.0 && self.k >= 0.0 && self.trials >= 1) {
            return Err(Error::Param(format!("bad local cut params {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    /// Prefix length of the growth order.
    pub len: usize,
    pub boundary: u64,
    pub volume: u64,
}

/// Growth order of one run and the prefixes that met the budget.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NestedCutChain {
    pub order: Vec<usize>,
    pub checkpoints: Vec<Checkpoint>,
    /// Vertices absorbed by the run.
    pub touched: usize,
}

impl NestedCutChain {
    pub fn prefix(&self, cp: &Checkpoint) -> VertexSet {
        VertexSet::new(self.order[..cp.len].to_vec())
    }

    pub fn cuts(&self) -> impl Iterator<Item = Cut> + '_ {
        self.checkpoints.iter().map(|cp| Cut { side: self.prefix(cp), boundary: cp.boundary, volume: cp.volume })
    }
}

/// Reusable per-thread state: generation-stamped membership and the heap.
pub struct Scratch {
    stamp: Vec<u32>,
    gen: u32,
    heap: BinaryHeap<Reverse<(u64, u64, usize)>>,
}

impl Scratch {
    pub fn new(universe: usize) -> Self {
        Self { stamp: vec![0; universe], gen: 0, heap: BinaryHeap::new() }
    }

    fn reset(&mut self, universe: usize) {
        if self.stamp.len() < universe {
            self.stamp.resize(universe, 0);
        }
        self.gen = self.gen.wrapping_add(1);
        if self.gen == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.gen = 1;
        }
        self.heap.clear();
    }

    #[inline]
    fn has(&self, v: usize) -> bool {
        self.stamp[v] == self.gen
    }
}

/// One run of LocalKCut from `v`; `run` selects the priority stream.
pub fn local_k_cut<G: CutGraph>(g: &G, v: usize, params: &LocalCutParams, run: u64) -> NestedCutChain {
    let mut scratch = Scratch::new(g.universe());
    run_with(g, v, params, run, &mut scratch)
}

fn run_with<G: CutGraph>(g: &G, v: usize, params: &LocalCutParams, run: u64, s: &mut Scratch) -> NestedCutChain {
    s.reset(g.universe());
    let order_limit = g.order();
    let mut chain = NestedCutChain::default();
    let mut exposure = 0u64;
    let mut volume = 0u64;
    let mut boundary = 0u64;

    let mut absorb = |x: usize, s: &mut Scratch, chain: &mut NestedCutChain, volume: &mut u64, boundary: &mut u64| {
        s.stamp[x] = s.gen;
        chain.order.push(x);
        chain.touched += 1;
        let mut inside = 0u64;
        let mut deg = g.loops(x);
        g.for_each_neighbor(x, |u, c| {
            deg += c as u64;
            if s.has(u) {
                inside += c as u64;
            } else {
                // Only the lowest of the c unit priorities can ever pop first.
                let mut best = (u64::MAX, u64::MAX);
                for _ in 0..c {
                    best = best.min((rng::hash(&[params.seed, run, exposure]), exposure));
                    exposure += 1;
                }
                s.heap.push(Reverse((best.0, best.1, u)));
            }
        });
        *volume += deg;
        *boundary = *boundary + (deg - g.loops(x)) - 2 * inside;
    };

    let record = |chain: &mut NestedCutChain, volume: u64, boundary: u64| {
        let len = chain.order.len();
        if (boundary as f64) <= params.k && (volume as f64) < params.nu && len < order_limit {
            chain.checkpoints.push(Checkpoint { len, boundary, volume });
        }
    };

    absorb(v, s, &mut chain, &mut volume, &mut boundary);
    record(&mut chain, volume, boundary);
    while (volume as f64) < params.nu {
        let next = loop {
            match s.heap.pop() {
                Some(Reverse((_, _, u))) if !s.has(u) => break Some(u),
                Some(_) => continue,
                None => break None,
            }
        };
        let Some(u) = next else { break };
        absorb(u, s, &mut chain, &mut volume, &mut boundary);
        record(&mut chain, volume, boundary);
    }
    chain
}

#[cfg(feature = "parallel")]
const PAR_CHUNK: usize = 32;

fn chains<G: CutGraph + Sync>(
    g: &G,
    v: usize,
    params: &LocalCutParams,
    runs: std::ops::Range<usize>,
) -> Vec<NestedCutChain> {
    #[cfg(feature = "parallel")]
    {
        if runs.len() > PAR_CHUNK && rayon::current_num_threads() > 1 {
            use rayon::prelude::*;
            return runs
                .into_par_iter()
                .map_init(|| Scratch::new(g.universe()), |s, r| run_with(g, v, params, r as u64, s))
                .collect();
        }
    }
    let mut s = Scratch::new(g.universe());
    runs.map(|r| run_with(g, v, params, r as u64, &mut s)).collect()
}

/// Union of the qualifying prefixes of `params.trials` runs, deduplicated,
/// in (run, chain) order of first appearance.
pub fn batch_local_k_cut<G: CutGraph + Sync>(g: &G, v: usize, params: &LocalCutParams) -> Vec<Cut> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for chain in chains(g, v, params, 0..params.trials) {
        for cut in chain.cuts() {
            if seen.insert(cut.side.clone()) {
                out.push(cut);
            }
        }
    }
    out
}

/// First cut of the batch (in (run, chain) order) satisfying `pred`; runs
/// past the first hit are never executed. `pred` must be pure: a repeated
/// cut gets the same verdict, so duplicates are not filtered.
pub fn first_in_batch<G, P>(g: &G, v: usize, params: &LocalCutParams, mut pred: P) -> Option<Cut>
where
    G: CutGraph + Sync,
    P: FnMut(&Cut) -> bool,
{
    #[cfg(feature = "parallel")]
    {
        let threads = rayon::current_num_threads();
        if threads > 1 {
            let step = PAR_CHUNK * threads;
            let mut start = 0;
            while start < params.trials {
                let end = (start + step).min(params.trials);
                for chain in chains(g, v, params, start..end) {
                    let hit = chain.cuts().find(|c| pred(c));
                    if hit.is_some() {
                        return hit;
                    }
                }
                start = end;
            }
            return None;
        }
    }
    let mut s = Scratch::new(g.universe());
    for r in 0..params.trials {
        let chain = run_with(g, v, params, r as u64, &mut s);
        let hit = chain.cuts().find(|c| pred(c));
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// Repetitions needed so an event of probability ≥ `p_lower` per run is
/// missed with probability ≤ n^{-c}: ⌈c·ln n / p⌉ (at least 1).
pub fn trials_for(p_lower: f64, c: f64, n: f64) -> usize {
    assert!(p_lower > 0.0 && p_lower <= 1.0, "p_lower out of range");
    let t = (c * n.ln() / p_lower).ceil();
    if t.is_finite() {
        (t as usize).max(1)
    } else {
        usize::MAX
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut x = x;
        while self.0[x] != r {
            let next = self.0[x];
            self.0[x] = r;
            x = next;
        }
        r
    }
}

/// Contract uniformly random edges until two super-nodes remain; returns
/// the side holding vertex 0.
pub fn karger_global(g: &DynamicGraph, seed: u64) -> Result<Cut> {
    let n = g.n();
    if n < 2 {
        return Err(Error::TooSmall);
    }
    if g.components(&VertexSet::range(n)).len() > 1 {
        return Err(Error::Disconnected);
    }
    let mut units = g.edge_units();
    units.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut dsu = Dsu((0..n).collect());
    let mut groups = n;
    for (u, v) in units {
        if groups == 2 {
            break;
        }
        let (a, b) = (dsu.find(u), dsu.find(v));
        if a != b {
            dsu.0[a] = b;
            groups -= 1;
        }
    }
    let r0 = dsu.find(0);
    let side: VertexSet = (0..n).filter(|&v| dsu.find(v) == r0).collect();
    Ok(Cut::of(g, side))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dumbbell() -> DynamicGraph {
        DynamicGraph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap()
    }

    fn params(nu: f64, k: f64, trials: usize, seed: u64) -> LocalCutParams {
        LocalCutParams { nu, k, trials, seed }
    }

    #[test]
    fn parallel_pair_records_start() {
        let mut g = DynamicGraph::new(2);
        g.insert_edges(0, 1, 3).unwrap();
        let chain = local_k_cut(&g, 0, &params(10.0, 3.0, 1, 1), 0);
        let cuts: Vec<Cut> = chain.cuts().collect();
        assert_eq!(cuts.len(), 1);
        assert_eq!((cuts[0].side.as_slice(), cuts[0].boundary), (&[0usize][..], 3));
    }

    #[test]
    fn star_with_zero_budget_is_empty() {
        let g = DynamicGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert!(local_k_cut(&g, 0, &params(100.0, 0.0, 1, 3), 0).checkpoints.is_empty());
    }

    #[test]
    fn isolated_component_stops_on_empty_frontier() {
        let g = DynamicGraph::from_edges(4, &[(1, 2), (2, 3)]).unwrap();
        let chain = local_k_cut(&g, 0, &params(10.0, 5.0, 1, 3), 0);
        assert_eq!(chain.order, vec![0]);
        assert_eq!(chain.checkpoints.len(), 1);
        assert_eq!(chain.checkpoints[0].boundary, 0);
    }

    #[test]
    fn chain_is_nested_and_exact() {
        let g = dumbbell();
        for run in 0..50 {
            let chain = local_k_cut(&g, 0, &params(14.0, 3.0, 1, 9), run);
            let mut last = 0;
            for cp in &chain.checkpoints {
                assert!(cp.len > last);
                last = cp.len;
                let side = chain.prefix(cp);
                assert_eq!(g.boundary(&side), cp.boundary);
                assert_eq!(g.volume(&side), cp.volume);
                assert!(cp.volume < 14);
            }
            assert!(chain.touched as f64 <= 14.0);
        }
    }

    #[test]
    fn whole_budget_returns_start_singleton() {
        let g = dumbbell();
        let cuts = batch_local_k_cut(&g, 2, &params(100.0, g.m() as f64, 5, 4));
        assert!(cuts.iter().any(|c| c.side.as_slice() == [2]));
    }

    #[test]
    fn dumbbell_triangle_found_by_batches() {
        let g = dumbbell();
        let tri = VertexSet::new(vec![0, 1, 2]);
        let hits = (0..100u64)
            .filter(|&rep| batch_local_k_cut(&g, 0, &params(8.0, 1.0, 200, rep)).iter().any(|c| c.side == tri))
            .count();
        assert!(hits >= 99, "hits {hits}");
    }

    #[test]
    fn deterministic_per_seed() {
        let g = dumbbell();
        let p = params(12.0, 3.0, 1, 77);
        assert_eq!(local_k_cut(&g, 1, &p, 5), local_k_cut(&g, 1, &p, 5));
    }

    #[test]
    fn first_in_batch_matches_batch_order() {
        let g = dumbbell();
        let p = params(12.0, 3.0, 40, 5);
        let all = batch_local_k_cut(&g, 0, &p);
        let first = first_in_batch(&g, 0, &p, |c| c.boundary == 1);
        assert_eq!(first, all.into_iter().find(|c| c.boundary == 1));
    }

    #[test]
    fn trials_arithmetic() {
        assert_eq!(trials_for(1.0, 1.0, std::f64::consts::E), 1);
        assert_eq!(trials_for(0.25, 2.0, std::f64::consts::E.powi(2)), 16);
        assert_eq!(trials_for(1.0 / 9.0, 10.0, 16.0), 250);
    }

    #[test]
    fn karger_small_cases() {
        let mut g = DynamicGraph::new(2);
        g.insert_edges(0, 1, 3).unwrap();
        assert_eq!(karger_global(&g, 1).unwrap().boundary, 3);
        let tri = DynamicGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let c = karger_global(&tri, 2).unwrap();
        assert_eq!((c.boundary, c.side.len().min(3 - c.side.len())), (2, 1));
        let split = DynamicGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(karger_global(&split, 0).unwrap_err(), Error::Disconnected);
    }
}
