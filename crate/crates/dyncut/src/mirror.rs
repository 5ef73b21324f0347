//! Per-cluster engines. A mirror graph is G/(V∖C): the cluster's members
//! plus one `outside` vertex standing for everything else. The buffer
//! holds back updates while a local cut below λmin exists, and the store
//! keeps, for each vertex, the cheapest local cut through it with value at
//! most λmax.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Cut, DynamicGraph, VertexSet};
use crate::localkcut::{batch_local_k_cut, first_in_batch, CutGraph, LocalCutParams};
use crate::params::Params;
use crate::rng;

/// An update to a mirror graph, in level vertex ids (`outside` = n).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MirrorOp {
    Insert(usize, usize),
    Delete(usize, usize),
    /// `new` joins the mirror carved out of `node`; see `DynamicGraph::split_vertex`.
    SplitVertex {
        node: usize,
        new: usize,
        moved: Vec<(usize, u32)>,
        between: u32,
    },
    /// Set deletion: `removed` leaves the cluster and is merged into outside.
    Shrink {
        removed: Vec<usize>,
    },
}

impl MirrorOp {
    fn is_insert(&self) -> bool {
        matches!(self, MirrorOp::Insert(..))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MirrorGraph {
    graph: DynamicGraph,
    alive: Vec<bool>,
    alive_count: usize,
    outside: usize,
}

impl MirrorGraph {
    /// Mirror of `members` inside `level` (universe `level.n() + 1`). The
    /// outside vertex is live only when `members` leave some of `live`
    /// uncovered.
    pub fn build(level: &DynamicGraph, members: &VertexSet, outside_active: bool) -> Self {
        let n = level.n();
        let mut graph = DynamicGraph::new(n + 1);
        let mut alive = vec![false; n + 1];
        for &v in members.iter() {
            alive[v] = true;
            for (x, c) in level.neighbors(v) {
                if members.contains(x) {
                    if v < x {
                        graph.insert_edges(v, x, c).expect("in range");
                    }
                } else {
                    graph.insert_edges(v, n, c).expect("in range");
                }
            }
        }
        alive[n] = outside_active;
        let alive_count = alive.iter().filter(|&&a| a).count();
        Self { graph, alive, alive_count, outside: n }
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn outside(&self) -> usize {
        self.outside
    }

    pub fn outside_active(&self) -> bool {
        self.alive[self.outside]
    }

    pub fn is_alive(&self, v: usize) -> bool {
        self.alive.get(v).copied().unwrap_or(false)
    }

    pub fn alive(&self) -> VertexSet {
        (0..self.alive.len()).filter(|&v| self.alive[v]).collect()
    }

    /// Live vertices other than outside.
    pub fn members(&self) -> VertexSet {
        (0..self.outside).filter(|&v| self.alive[v]).collect()
    }

    pub fn total_volume(&self) -> u64 {
        2 * self.graph.m()
    }

    fn check_alive(&self, v: usize) -> Result<()> {
        if self.is_alive(v) {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.alive.len() })
        }
    }

    /// Apply `op`; returns the vertices whose local cuts it may have
    /// lowered (or, for inserts, the endpoints).
    pub fn apply(&mut self, op: &MirrorOp) -> Result<Vec<usize>> {
        match op {
            MirrorOp::Insert(a, b) => {
                self.check_alive(*a)?;
                self.check_alive(*b)?;
                self.graph.insert_edge(*a, *b)?;
                Ok(vec![*a, *b])
            }
            MirrorOp::Delete(a, b) => {
                self.check_alive(*a)?;
                self.check_alive(*b)?;
                self.graph.delete_edge(*a, *b)?;
                Ok(vec![*a, *b])
            }
            MirrorOp::SplitVertex { node, new, moved, between } => {
                self.check_alive(*node)?;
                if self.is_alive(*new) || *new >= self.outside {
                    return Err(Error::VertexOutOfRange { vertex: *new, n: self.alive.len() });
                }
                for &(x, _) in moved {
                    self.check_alive(x)?;
                }
                self.graph.split_vertex(*node, *new, moved, *between)?;
                self.alive[*new] = true;
                self.alive_count += 1;
                Ok(vec![*node, *new])
            }
            MirrorOp::Shrink { removed } => {
                for &r in removed {
                    if r == self.outside {
                        return Err(Error::Overlap);
                    }
                    self.check_alive(r)?;
                }
                let gone: VertexSet = removed.iter().copied().collect();
                let mut reattach: BTreeMap<usize, u32> = BTreeMap::new();
                for &r in gone.iter() {
                    for (x, c) in self.graph.detach(r) {
                        if !gone.contains(x) && x != self.outside {
                            *reattach.entry(x).or_insert(0) += c;
                        }
                    }
                    self.alive[r] = false;
                    self.alive_count -= 1;
                }
                if !self.alive[self.outside] {
                    self.alive[self.outside] = true;
                    self.alive_count += 1;
                }
                for (&x, &c) in &reattach {
                    self.graph.insert_edges(x, self.outside, c)?;
                }
                let mut touched: Vec<usize> = reattach.into_keys().collect();
                touched.push(self.outside);
                Ok(touched)
            }
        }
    }
}

impl CutGraph for MirrorGraph {
    fn order(&self) -> usize {
        self.alive_count
    }
    fn universe(&self) -> usize {
        self.graph.n()
    }
    fn for_each_neighbor<F: FnMut(usize, u32)>(&self, v: usize, mut f: F) {
        for (u, c) in self.graph.neighbors(v) {
            f(u, c)
        }
    }
}

/// Thresholds and batch sizes an engine runs with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub buffer_nu: f64,
    pub process_nu: f64,
    pub local_bound: f64,
    pub buffer_trials: usize,
    pub process_trials: usize,
    pub seed: u64,
}

impl EngineConfig {
    pub fn from_params(p: &Params, n: usize, seed: u64) -> Self {
        Self {
            lambda_min: p.lambda_min,
            lambda_max: p.lambda_max,
            buffer_nu: p.buffer_nu(),
            process_nu: p.process_nu(),
            local_bound: p.local_cut_bound(),
            buffer_trials: p.buffer_trials(n),
            process_trials: p.find_trials(n),
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BufferState {
    working: MirrorGraph,
    h: MirrorGraph,
    queue: VecDeque<MirrorOp>,
    has_small_cut: bool,
    small_cut: VertexSet,
    small_cut_value: u64,
    marked: BTreeSet<usize>,
    batches: u64,
    cfg: EngineConfig,
    /// Detector batches started.
    pub runs: u64,
}

impl BufferState {
    pub fn new(g: MirrorGraph, cfg: EngineConfig) -> Self {
        Self {
            working: g.clone(),
            h: g,
            queue: VecDeque::new(),
            has_small_cut: false,
            small_cut: VertexSet::default(),
            small_cut_value: 0,
            marked: BTreeSet::new(),
            batches: 0,
            cfg,
            runs: 0,
        }
    }

    /// H ∪ buffer.
    pub fn working(&self) -> &MirrorGraph {
        &self.working
    }

    /// The forwarded graph G′.
    pub fn output(&self) -> &MirrorGraph {
        &self.h
    }

    pub fn has_small_cut(&self) -> bool {
        self.has_small_cut
    }

    pub fn small_cut(&self) -> Option<(&VertexSet, u64)> {
        self.has_small_cut.then_some((&self.small_cut, self.small_cut_value))
    }

    pub fn marked(&self) -> &BTreeSet<usize> {
        &self.marked
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Mark every live vertex and settle.
    pub fn preprocess<S: FnMut(&MirrorGraph, &MirrorOp, &[usize])>(&mut self, sink: S) {
        self.marked = self.working.alive().into_vec().into_iter().collect();
        self.batch_update(sink);
    }

    pub fn handle<S: FnMut(&MirrorGraph, &MirrorOp, &[usize])>(&mut self, op: MirrorOp, sink: S) -> Result<()> {
        let crossing = |cut: &VertexSet, a: usize, b: usize| cut.contains(a) != cut.contains(b);
        if let MirrorOp::Shrink { removed } = &op {
            for r in removed {
                self.marked.remove(r);
            }
        }
        let touched = self.working.apply(&op)?;
        if self.has_small_cut {
            match &op {
                MirrorOp::Insert(a, b) if crossing(&self.small_cut, *a, *b) => self.small_cut_value += 1,
                MirrorOp::Delete(a, b) if crossing(&self.small_cut, *a, *b) => self.small_cut_value -= 1,
                MirrorOp::SplitVertex { node, new, .. } if self.small_cut.contains(*node) => {
                    let mut m = self.small_cut.clone().into_vec();
                    m.push(*new);
                    self.small_cut = VertexSet::new(m);
                }
                MirrorOp::Shrink { removed } => {
                    let keep: VertexSet = self.small_cut.iter().copied().filter(|v| !removed.contains(v)).collect();
                    self.small_cut_value = self.working.graph.boundary(&keep);
                    self.small_cut = keep;
                }
                _ => {}
            }
            debug_assert_eq!(self.small_cut_value, self.working.graph.boundary(&self.small_cut));
            let degenerate = self.small_cut.is_empty() || self.small_cut.len() >= self.working.alive_count;
            if degenerate || self.small_cut_value as f64 >= self.cfg.lambda_min {
                self.has_small_cut = false;
            }
        }
        if !op.is_insert() {
            self.marked.extend(touched);
        }
        self.queue.push_back(op);
        self.batch_update(sink);
        Ok(())
    }

    fn batch_update<S: FnMut(&MirrorGraph, &MirrorOp, &[usize])>(&mut self, sink: S) {
        while !self.has_small_cut {
            let Some(&v) = self.marked.iter().next() else { break };
            if !self.working.is_alive(v) {
                self.marked.remove(&v);
                continue;
            }
            self.batches += 1;
            self.runs += 1;
            let params = LocalCutParams {
                nu: self.cfg.buffer_nu,
                k: self.cfg.lambda_min,
                trials: self.cfg.buffer_trials,
                seed: rng::derive(self.cfg.seed, self.batches),
            };
            let lmin = self.cfg.lambda_min;
            match first_in_batch(&self.working, v, &params, |c| (c.boundary as f64) < lmin) {
                Some(cut) => {
                    self.has_small_cut = true;
                    self.small_cut_value = cut.boundary;
                    self.small_cut = cut.side;
                }
                None => {
                    self.marked.remove(&v);
                }
            }
        }
        if !self.has_small_cut {
            self.flush(sink);
        }
    }

    /// Forward the buffer to H: insertions between vertices H already has
    /// first, then everything else in arrival order.
    fn flush<S: FnMut(&MirrorGraph, &MirrorOp, &[usize])>(&mut self, mut sink: S) {
        let ops: Vec<MirrorOp> = self.queue.drain(..).collect();
        let early: Vec<bool> = ops
            .iter()
            .map(|op| match op {
                MirrorOp::Insert(a, b) => self.h.is_alive(*a) && self.h.is_alive(*b),
                _ => false,
            })
            .collect();
        let order = ops.iter().zip(&early).filter(|(_, &e)| e).chain(ops.iter().zip(&early).filter(|(_, &e)| !e));
        for (op, _) in order {
            let touched = self.h.apply(op).expect("buffered op replays on H");
            sink(&self.h, op, &touched);
        }
        debug_assert_eq!(self.h, self.working);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredCut {
    pub members: VertexSet,
    pub value: u64,
    pub volume: u64,
    /// Vertices this is the mirror cut of.
    pub owners: BTreeSet<usize>,
}

#[derive(Clone, Debug)]
pub struct MirrorCutStore {
    cuts: BTreeMap<usize, StoredCut>,
    by_members: HashMap<VertexSet, usize>,
    mirror_of: Vec<Option<usize>>,
    /// Back-pointers: ids of stored cuts containing each vertex.
    containing: Vec<BTreeSet<usize>>,
    next_id: usize,
    batches: u64,
    cfg: EngineConfig,
    pub runs: u64,
}

impl MirrorCutStore {
    pub fn new(universe: usize, cfg: EngineConfig) -> Self {
        Self {
            cuts: BTreeMap::new(),
            by_members: HashMap::new(),
            mirror_of: vec![None; universe],
            containing: vec![BTreeSet::new(); universe],
            next_id: 0,
            batches: 0,
            cfg,
            runs: 0,
        }
    }

    pub fn preprocess(&mut self, h: &MirrorGraph) {
        for &v in h.alive().iter() {
            self.process(h, v);
        }
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn cuts(&self) -> impl Iterator<Item = (usize, &StoredCut)> {
        self.cuts.iter().map(|(&id, c)| (id, c))
    }

    pub fn get(&self, id: usize) -> Option<&StoredCut> {
        self.cuts.get(&id)
    }

    /// Stored mirror cut of `v` as (handle, value).
    pub fn mirror_cut_of(&self, v: usize) -> Option<(usize, u64)> {
        let id = self.mirror_of.get(v).copied().flatten()?;
        Some((id, self.cuts[&id].value))
    }

    /// Cheapest stored cut; ties go to the lexicographically smallest set.
    pub fn min_mirror_cut(&self) -> Option<Cut> {
        self.cuts.values().min_by(|a, b| (a.value, &a.members).cmp(&(b.value, &b.members))).map(|c| Cut {
            side: c.members.clone(),
            boundary: c.value,
            volume: c.volume,
        })
    }

    fn rank(c: &StoredCut) -> (u64, u64, &VertexSet) {
        (c.value, c.volume, &c.members)
    }

    /// Drop `u` from the referrers of `id`; the record goes with its last
    /// referrer.
    pub fn mirror_delete(&mut self, id: usize, u: usize) -> Result<()> {
        let cut = self.cuts.get_mut(&id).ok_or(Error::NotReferrer { cut: id, vertex: u })?;
        if !cut.owners.remove(&u) {
            return Err(Error::NotReferrer { cut: id, vertex: u });
        }
        if self.mirror_of[u] == Some(id) {
            self.mirror_of[u] = None;
        }
        if cut.owners.is_empty() {
            self.drop_record(id);
        }
        Ok(())
    }

    fn drop_record(&mut self, id: usize) {
        let cut = self.cuts.remove(&id).expect("stored");
        for &v in cut.members.iter() {
            self.containing[v].remove(&id);
        }
        for &o in &cut.owners {
            if self.mirror_of[o] == Some(id) {
                self.mirror_of[o] = None;
            }
        }
        self.by_members.remove(&cut.members);
    }

    /// Remove a cut that no longer qualifies; returns its former owners.
    fn retire(&mut self, id: usize) -> Vec<usize> {
        let owners: Vec<usize> = self.cuts[&id].owners.iter().copied().collect();
        self.drop_record(id);
        owners
    }

    fn install(&mut self, u: usize, cut: &Cut) {
        if let Some(old) = self.mirror_of[u] {
            let cur = &self.cuts[&old];
            if Self::rank(cur) <= (cut.boundary, cut.volume, &cut.side) {
                return;
            }
        }
        let id = match self.by_members.get(&cut.side) {
            Some(&id) => id,
            None => {
                let id = self.next_id;
                self.next_id += 1;
                for &v in cut.side.iter() {
                    self.containing[v].insert(id);
                }
                self.by_members.insert(cut.side.clone(), id);
                self.cuts.insert(
                    id,
                    StoredCut {
                        members: cut.side.clone(),
                        value: cut.boundary,
                        volume: cut.volume,
                        owners: BTreeSet::new(),
                    },
                );
                id
            }
        };
        if let Some(old) = self.mirror_of[u] {
            self.mirror_delete(old, u).expect("owner recorded");
        }
        self.cuts.get_mut(&id).expect("stored").owners.insert(u);
        self.mirror_of[u] = Some(id);
    }

    /// Run a processing batch from `v` and adopt every strictly better cut.
    pub fn process(&mut self, h: &MirrorGraph, v: usize) {
        if !h.is_alive(v) {
            return;
        }
        self.batches += 1;
        let params = LocalCutParams {
            nu: self.cfg.process_nu.min(self.cfg.local_bound + 1.0),
            k: self.cfg.lambda_max,
            trials: self.cfg.process_trials,
            seed: rng::derive(self.cfg.seed ^ 0x5eed, self.batches),
        };
        self.runs += params.trials as u64;
        for cut in batch_local_k_cut(h, v, &params) {
            if cut.volume as f64 > self.cfg.local_bound {
                continue;
            }
            for &u in cut.side.iter() {
                self.install(u, &cut);
            }
        }
    }

    fn qualifies(&self, c: &StoredCut, h: &MirrorGraph) -> bool {
        !c.members.is_empty()
            && c.members.len() < h.order()
            && c.value as f64 <= self.cfg.lambda_max
            && c.volume as f64 <= self.cfg.local_bound
    }

    /// Recompute a cut after a graph change; `None` when it was retired,
    /// with its owners pushed to `redo`.
    fn refresh(&mut self, id: usize, h: &MirrorGraph, redo: &mut BTreeSet<usize>) {
        let (value, volume) = {
            let c = &self.cuts[&id];
            (h.graph.boundary(&c.members), h.graph.volume(&c.members))
        };
        let c = self.cuts.get_mut(&id).expect("stored");
        let increased = value > c.value;
        c.value = value;
        c.volume = volume;
        if !self.qualifies(&self.cuts[&id], h) {
            redo.extend(self.retire(id));
        } else if increased {
            redo.extend(self.cuts[&id].owners.iter().copied());
        }
    }

    /// Bring the store in line with `op`, already applied to `h`.
    pub fn handle_update(&mut self, h: &MirrorGraph, op: &MirrorOp, touched: &[usize]) {
        let mut redo: BTreeSet<usize> = BTreeSet::new();
        match op {
            MirrorOp::Insert(a, b) | MirrorOp::Delete(a, b) => {
                let ids: BTreeSet<usize> = self.containing[*a].union(&self.containing[*b]).copied().collect();
                for id in ids {
                    self.refresh(id, h, &mut redo);
                }
                if matches!(op, MirrorOp::Delete(..)) {
                    redo.extend([*a, *b]);
                }
            }
            MirrorOp::SplitVertex { node, new, .. } => {
                let ids: Vec<usize> = self.containing[*node].iter().copied().collect();
                for id in ids {
                    let c = self.cuts.get_mut(&id).expect("stored");
                    self.by_members.remove(&c.members);
                    let mut m = c.members.clone().into_vec();
                    m.push(*new);
                    c.members = VertexSet::new(m);
                    self.by_members.insert(c.members.clone(), id);
                    self.containing[*new].insert(id);
                    self.refresh(id, h, &mut redo);
                }
                redo.extend([*node, *new]);
            }
            MirrorOp::Shrink { removed } => {
                let gone: VertexSet = removed.iter().copied().collect();
                for &r in gone.iter() {
                    if let Some(id) = self.mirror_of[r] {
                        self.mirror_delete(id, r).expect("owner recorded");
                    }
                }
                let mut ids: BTreeSet<usize> = BTreeSet::new();
                for &v in gone.iter().chain(touched) {
                    ids.extend(self.containing[v].iter().copied());
                }
                for id in ids {
                    if !self.cuts.contains_key(&id) {
                        continue;
                    }
                    let c = self.cuts.get_mut(&id).expect("stored");
                    if c.members.iter().any(|&v| gone.contains(v)) {
                        self.by_members.remove(&c.members);
                        let keep: VertexSet = c.members.iter().copied().filter(|&v| !gone.contains(v)).collect();
                        for &r in c.members.iter().filter(|&&v| gone.contains(v)) {
                            self.containing[r].remove(&id);
                        }
                        c.members = keep.clone();
                        if keep.is_empty() || self.by_members.contains_key(&keep) {
                            redo.extend(self.retire_unindexed(id));
                            continue;
                        }
                        self.by_members.insert(keep, id);
                    }
                    self.refresh(id, h, &mut redo);
                }
                redo.extend(touched.iter().copied());
            }
        }
        for v in redo {
            self.process(h, v);
        }
    }

    /// Retire a cut whose member set is no longer indexed.
    fn retire_unindexed(&mut self, id: usize) -> Vec<usize> {
        let cut = self.cuts.remove(&id).expect("stored");
        for &v in cut.members.iter() {
            self.containing[v].remove(&id);
        }
        for &o in &cut.owners {
            if self.mirror_of[o] == Some(id) {
                self.mirror_of[o] = None;
            }
        }
        cut.owners.into_iter().collect()
    }

    /// Structural self-check: values and volumes match `h`, pointers agree.
    pub fn validate(&self, h: &MirrorGraph) -> bool {
        self.cuts.iter().all(|(&id, c)| {
            c.value == h.graph.boundary(&c.members)
                && c.volume == h.graph.volume(&c.members)
                && !c.owners.is_empty()
                && c.owners.iter().all(|&o| self.mirror_of[o] == Some(id))
                && c.members.iter().all(|&v| self.containing[v].contains(&id))
                && self.by_members.get(&c.members) == Some(&id)
        }) && self.mirror_of.iter().flatten().all(|id| self.cuts.contains_key(id))
    }
}

/// Buffer plus mirror-cut store for one cluster.
#[derive(Clone, Debug)]
pub struct Engine {
    buffer: BufferState,
    store: MirrorCutStore,
    /// False until the first flush when the build found a small cut.
    store_ready: bool,
}

impl Engine {
    pub fn build(g: MirrorGraph, cfg: EngineConfig) -> Self {
        let universe = g.graph.n();
        let mut buffer = BufferState::new(g, cfg);
        let mut store = MirrorCutStore::new(universe, cfg);
        buffer.preprocess(|_, _, _| {});
        if !buffer.has_small_cut() {
            store.preprocess(buffer.output());
        }
        let store_ready = !buffer.has_small_cut();
        Self { buffer, store, store_ready }
    }

    pub fn handle(&mut self, op: MirrorOp) -> Result<()> {
        let store = &mut self.store;
        let ready = self.store_ready;
        self.buffer.handle(op, |h, op, touched| {
            if ready {
                store.handle_update(h, op, touched)
            }
        })?;
        if !self.store_ready && !self.buffer.has_small_cut() {
            self.store.preprocess(self.buffer.output());
            self.store_ready = true;
        }
        Ok(())
    }

    pub fn has_small_cut(&self) -> bool {
        self.buffer.has_small_cut()
    }

    pub fn buffer(&self) -> &BufferState {
        &self.buffer
    }

    pub fn store(&self) -> &MirrorCutStore {
        &self.store
    }

    pub fn min_mirror_cut(&self) -> Option<Cut> {
        self.store.min_mirror_cut()
    }

    pub fn working(&self) -> &MirrorGraph {
        self.buffer.working()
    }

    /// Processing runs plus detector batches spent so far.
    pub fn runs(&self) -> u64 {
        self.store.runs + self.buffer.runs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exists_local_cut_below, min_local_cut_through, OracleLimits};

    fn cfg(lmin: f64, lmax: f64) -> EngineConfig {
        EngineConfig {
            lambda_min: lmin,
            lambda_max: lmax,
            buffer_nu: 100.0,
            process_nu: 100.0,
            local_bound: 100.0,
            buffer_trials: 200,
            process_trials: 200,
            seed: 3,
        }
    }

    /// Triangle {0,1,2} inside a 4-vertex level whose vertex 3 is adjacent
    /// to all three: the mirror is K4-shaped.
    fn k4_mirror() -> MirrorGraph {
        let level = DynamicGraph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)]).unwrap();
        MirrorGraph::build(&level, &VertexSet::new(vec![0, 1, 2]), true)
    }

    #[test]
    fn mirror_build_contracts_outside() {
        let m = k4_mirror();
        assert_eq!(m.outside(), 4);
        assert_eq!(m.graph().degree(4), 3);
        assert_eq!(m.order(), 4);
        let level = DynamicGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let whole = MirrorGraph::build(&level, &VertexSet::range(3), false);
        assert_eq!(whole.order(), 3);
        assert_eq!(whole.graph().degree(3), 0);
    }

    #[test]
    fn k4_shaped_mirror_values() {
        let e = Engine::build(k4_mirror(), cfg(3.0, 3.0));
        assert!(!e.has_small_cut());
        for v in 0..3 {
            assert_eq!(e.store().mirror_cut_of(v).unwrap().1, 3);
        }
        assert_eq!(e.min_mirror_cut().unwrap().boundary, 3);
        assert_eq!(e.min_mirror_cut().unwrap().side, VertexSet::singleton(0));
        assert!(e.store().validate(e.buffer().output()));
    }

    #[test]
    fn nothing_stored_above_lambda_max() {
        let e = Engine::build(k4_mirror(), cfg(2.0, 2.0));
        assert!(e.store().is_empty());
        assert_eq!(e.min_mirror_cut(), None);
    }

    #[test]
    fn reprocessing_is_idempotent() {
        let mut e = Engine::build(k4_mirror(), cfg(3.0, 3.0));
        let before: Vec<_> = e.store().cuts().map(|(i, c)| (i, c.clone())).collect();
        let h = e.buffer.output().clone();
        e.store.process(&h, 1);
        let after: Vec<_> = e.store().cuts().map(|(i, c)| (i, c.clone())).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn mirror_delete_cases() {
        let mut e = Engine::build(k4_mirror(), cfg(3.0, 3.0));
        // Give two owners to one record.
        let h = e.buffer.output().clone();
        let cut = Cut::of(h.graph(), VertexSet::new(vec![0, 1]));
        let mut s = MirrorCutStore::new(5, cfg(3.0, 5.0));
        s.install(0, &cut);
        s.install(1, &cut);
        let id = s.mirror_cut_of(0).unwrap().0;
        s.mirror_delete(id, 0).unwrap();
        assert!(s.get(id).is_some());
        assert_eq!(s.mirror_delete(id, 0), Err(Error::NotReferrer { cut: id, vertex: 0 }));
        s.mirror_delete(id, 1).unwrap();
        assert!(s.get(id).is_none());
        assert!(s.is_empty());
        e.store.process(&h, 0);
        assert!(e.store().validate(&h));
    }

    #[test]
    fn insert_crossing_raises_value_and_replaces() {
        let mut e = Engine::build(k4_mirror(), cfg(3.0, 4.0));
        e.handle(MirrorOp::Insert(0, 4)).unwrap();
        let h = e.buffer.output().clone();
        assert!(e.store().validate(&h));
        // {0} now has value 4; every other vertex still has a 3-cut.
        let (_, v0) = e.store().mirror_cut_of(0).unwrap();
        let want = min_local_cut_through(h.graph(), &h.alive(), 0, 100.0, 4.0, &OracleLimits::default()).unwrap();
        assert_eq!(v0, want.unwrap().boundary);
    }

    #[test]
    fn delete_inside_cut_leaves_value() {
        let level =
            DynamicGraph::from_edges(5, &[(0, 1), (0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3), (2, 4), (3, 4)])
                .unwrap();
        let m = MirrorGraph::build(&level, &VertexSet::new(vec![0, 1, 2, 3, 4]), false);
        let mut e = Engine::build(m, cfg(2.0, 2.4));
        let before = e.min_mirror_cut();
        assert_eq!(before.as_ref().unwrap().boundary, 2);
        e.handle(MirrorOp::Delete(0, 1)).unwrap();
        let s = e.store();
        for (_, c) in s.cuts() {
            assert_eq!(c.value, e.buffer.output().graph().boundary(&c.members));
        }
    }

    #[test]
    fn buffer_detects_and_recovers_small_cut() {
        // Two K4s joined by three edges; λmin = 3.
        let mut edges = vec![];
        for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            edges.push((a, b));
            edges.push((a + 4, b + 4));
        }
        edges.extend([(0, 4), (1, 5), (2, 6)]);
        let level = DynamicGraph::from_edges(8, &edges).unwrap();
        let m = MirrorGraph::build(&level, &VertexSet::range(8), false);
        let mut e = Engine::build(m, cfg(3.0, 3.6));
        assert!(!e.has_small_cut());
        e.handle(MirrorOp::Delete(0, 4)).unwrap();
        assert!(e.has_small_cut());
        let (cut, val) = e.buffer().small_cut().unwrap();
        assert_eq!(val, 2);
        assert_eq!(e.working().graph().boundary(cut), 2);
        assert_eq!(e.buffer().pending(), 1);
        // H still holds the old graph.
        assert_eq!(e.buffer().output().graph().multiplicity(0, 4), 1);
        e.handle(MirrorOp::Insert(3, 7)).unwrap();
        assert!(!e.has_small_cut());
        assert_eq!(e.buffer().pending(), 0);
        assert_eq!(e.buffer().output(), e.working());
        let h = e.buffer().output();
        assert!(!exists_local_cut_below(h.graph(), &h.alive(), 100.0, 3.0, &OracleLimits::default()).unwrap());
    }

    #[test]
    fn shrink_merges_into_outside() {
        let level = DynamicGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let m = MirrorGraph::build(&level, &VertexSet::range(5), false);
        let mut e = Engine::build(m, cfg(1.0, 3.0));
        e.handle(MirrorOp::Shrink { removed: vec![3, 4] }).unwrap();
        let w = e.working();
        assert!(w.outside_active());
        assert_eq!(w.graph().degree(5), 2);
        assert_eq!(w.graph().multiplicity(2, 5), 1);
        assert_eq!(w.graph().multiplicity(0, 5), 1);
        assert_eq!(w.members(), VertexSet::new(vec![0, 1, 2]));
        assert!(e.store().validate(e.buffer().output()));
        for (_, c) in e.store().cuts() {
            assert!(!c.members.contains(3) && !c.members.contains(4));
        }
    }

    #[test]
    fn split_vertex_extends_cuts() {
        let level =
            DynamicGraph::from_edges(6, &[(0, 1), (0, 1), (0, 1), (1, 2), (1, 2), (1, 2), (0, 2), (0, 2), (0, 2)])
                .unwrap();
        let m = MirrorGraph::build(&level, &VertexSet::new(vec![0, 1, 2]), false);
        let mut e = Engine::build(m, cfg(3.0, 6.0));
        e.handle(MirrorOp::SplitVertex { node: 0, new: 3, moved: vec![(1, 2)], between: 2 }).unwrap();
        let h = e.buffer().output();
        assert_eq!(h.order(), 4);
        assert!(e.store().validate(h));
    }
}
