//! Cluster decomposition of one level: a refinement of the expander
//! decomposition in which no unfrozen cluster holds a (1−ε)-boundary-sparse
//! cut of small volume. Each cluster owns a mirror engine; clusters whose
//! engine reports a local cut below λmin are frozen.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::expander::{ExpanderDecomposition, ExpanderReport};
use crate::graph::{Cut, DynamicGraph, VertexSet};
use crate::localkcut::{first_in_batch, InducedByLabel, LocalCutParams};
use crate::mirror::{Engine, EngineConfig, MirrorGraph, MirrorOp};
use crate::ops::LevelOp;
use crate::params::Params;
use crate::rng;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct Cluster {
    pub id: usize,
    pub members: BTreeSet<usize>,
    /// (inside endpoint, outside endpoint) → multiplicity, in list order.
    pub boundary: BTreeMap<(usize, usize), u32>,
    pub boundary_size: u64,
    pub frozen: bool,
    /// Updates that touched the cluster while frozen, oldest first.
    pub pending: Vec<LevelOp>,
    pub unchecked: BTreeSet<usize>,
    pub engine: Engine,
}

impl Cluster {
    pub fn member_set(&self) -> VertexSet {
        self.members.iter().copied().collect()
    }

    /// Φ(C) = max(0, ∂C − 2.1λmax).
    pub fn potential(&self, lambda_max: f64) -> f64 {
        (self.boundary_size as f64 - 2.1 * lambda_max).max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FindOutcome {
    Split {
        kept: usize,
        new: usize,
    },
    Frozen,
    /// No sparse cut through this vertex; it is now checked.
    Checked(usize),
    AllChecked,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterStats {
    pub find_calls: u64,
    pub sparse_splits: u64,
    pub forced_splits: u64,
    /// Work of the lockstep side search, summed over splits.
    pub split_cost: u64,
    pub freezes: u64,
    pub unfreezes: u64,
    /// Splits where both children have boundary ≥ λmin.
    pub boundary_checks: u64,
    /// ... of which the boundary did not drop by ελmin/2.
    pub boundary_violations: u64,
    /// Ops forwarded to the next level.
    pub emitted: u64,
}

/// One CSV row of the cluster dump.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterRow {
    pub id: usize,
    pub size: usize,
    pub boundary_size: u64,
    pub frozen: bool,
    pub unchecked: usize,
    pub potential: f64,
}

#[derive(Clone, Debug)]
pub struct ClusterDecomposition {
    clusters: BTreeMap<usize, Cluster>,
    cluster_of: Vec<usize>,
    next_id: usize,
    params: Params,
    n: usize,
    seed: u64,
    engines_built: u64,
    /// Splits triggered from each starting vertex.
    responsibility: Vec<u64>,
    outbox: Vec<LevelOp>,
    pub stats: ClusterStats,
}

/// w(U, C∖U) < (1−ε)·min{w(U, V∖C), w(C∖U, V∖C)} given the three weights.
pub fn sparse_by_weights(inner: u64, ext_u: u64, boundary_size: u64, eps: f64) -> bool {
    let other = boundary_size - ext_u;
    (inner as f64) < (1.0 - eps) * ext_u.min(other) as f64
}

impl ClusterDecomposition {
    /// Start from the expander parts and run find-and-cut to quiescence.
    pub fn decompose_expanders(
        g: &DynamicGraph,
        ed: &ExpanderDecomposition,
        params: &Params,
        n: usize,
        seed: u64,
    ) -> Self {
        let parts: Vec<BTreeSet<usize>> = ed.parts().map(|(_, p)| p.clone()).filter(|p| !p.is_empty()).collect();
        let mut d = Self::from_parts(g, parts, params, n, seed);
        d.find_and_cut_loop(g);
        d
    }

    /// Clusters = `parts` as given, engines built, no find-and-cut.
    pub fn from_parts(g: &DynamicGraph, parts: Vec<BTreeSet<usize>>, params: &Params, n: usize, seed: u64) -> Self {
        let mut d = Self {
            clusters: BTreeMap::new(),
            cluster_of: vec![NONE; g.n()],
            next_id: 0,
            params: params.clone(),
            n,
            seed,
            engines_built: 0,
            responsibility: vec![0; g.n()],
            outbox: Vec::new(),
            stats: ClusterStats::default(),
        };
        for (id, members) in parts.iter().enumerate() {
            for &v in members {
                d.cluster_of[v] = id;
            }
        }
        let whole = parts.len() <= 1;
        for (id, members) in parts.into_iter().enumerate() {
            let set: VertexSet = members.iter().copied().collect();
            let mut boundary = BTreeMap::new();
            for &v in set.iter() {
                for (x, c) in g.neighbors(v) {
                    if d.cluster_of[x] != id {
                        boundary.insert((v, x), c);
                    }
                }
            }
            let cfg = d.engine_cfg(id);
            let engine = Engine::build(MirrorGraph::build(g, &set, !whole), cfg);
            let frozen = engine.has_small_cut();
            if frozen {
                d.stats.freezes += 1;
            }
            d.clusters.insert(
                id,
                Cluster {
                    id,
                    members,
                    boundary_size: boundary.values().map(|&x| x as u64).sum(),
                    unchecked: boundary.keys().map(|&(v, _)| v).collect(),
                    boundary,
                    frozen,
                    pending: Vec::new(),
                    engine,
                },
            );
            d.next_id = id + 1;
        }
        d
    }

    fn engine_cfg(&mut self, id: usize) -> EngineConfig {
        self.engines_built += 1;
        EngineConfig::from_params(&self.params, self.n, rng::derive(self.seed, (id as u64) << 32 | self.engines_built))
    }

    pub fn cluster(&self, id: usize) -> Option<&Cluster> {
        self.clusters.get(&id)
    }

    pub fn clusters(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.values()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn cluster_of(&self, v: usize) -> Option<usize> {
        self.cluster_of.get(v).copied().filter(|&c| c != NONE)
    }

    pub fn labels(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn any_frozen(&self) -> bool {
        self.clusters.values().any(|c| c.frozen)
    }

    pub fn frozen_count(&self) -> usize {
        self.clusters.values().filter(|c| c.frozen).count()
    }

    pub fn intercluster_edges(&self) -> u64 {
        self.clusters.values().map(|c| c.boundary_size).sum::<u64>() / 2
    }

    pub fn max_responsibility(&self) -> u64 {
        self.responsibility.iter().copied().max().unwrap_or(0)
    }

    pub fn responsibility(&self) -> &[u64] {
        &self.responsibility
    }

    pub fn reset_responsibility(&mut self) {
        self.responsibility.iter_mut().for_each(|r| *r = 0);
    }

    /// Ops for the next level produced since the last call.
    pub fn take_outbox(&mut self) -> Vec<LevelOp> {
        std::mem::take(&mut self.outbox)
    }

    pub fn rows(&self) -> Vec<ClusterRow> {
        self.clusters
            .values()
            .map(|c| ClusterRow {
                id: c.id,
                size: c.members.len(),
                boundary_size: c.boundary_size,
                frozen: c.frozen,
                unchecked: c.unchecked.len(),
                potential: c.potential(self.params.lambda_max),
            })
            .collect()
    }

    /// Cheapest stored mirror cut over unfrozen clusters, with its cluster.
    pub fn min_mirror_cut(&self) -> Option<(usize, Cut)> {
        self.clusters
            .values()
            .filter(|c| !c.frozen)
            .filter_map(|c| c.engine.min_mirror_cut().map(|cut| (c.id, cut)))
            .min_by(|a, b| (a.1.boundary, a.0, &a.1.side).cmp(&(b.1.boundary, b.0, &b.1.side)))
    }

    /// w(U, V∖C) for U inside cluster `id`.
    fn external_weight(&self, g: &DynamicGraph, id: usize, u: &VertexSet) -> u64 {
        let mut w = 0;
        for &v in u.iter() {
            for (x, c) in g.neighbors(v) {
                if self.cluster_of[x] != id {
                    w += c as u64;
                }
            }
        }
        w
    }

    /// Boundary-sparseness of U in cluster `id`, using the cached boundary
    /// size for the complement's external weight.
    pub fn is_boundary_sparse(&self, g: &DynamicGraph, id: usize, u: &VertexSet) -> Result<bool> {
        let c = self.clusters.get(&id).ok_or(Error::BadPartition)?;
        if u.is_empty() || u.len() >= c.members.len() {
            return Err(Error::NotProper);
        }
        if u.iter().any(|v| !c.members.contains(v)) {
            return Err(Error::NotProper);
        }
        let ext = self.external_weight(g, id, u);
        let mut inner = 0;
        for &v in u.iter() {
            for (x, m) in g.neighbors(v) {
                if self.cluster_of[x] == id && !u.contains(x) {
                    inner += m as u64;
                }
            }
        }
        Ok(sparse_by_weights(inner, ext, c.boundary_size, self.params.eps))
    }

    /// One step of find-and-cut on cluster `id`.
    pub fn find_and_cut(&mut self, g: &DynamicGraph, id: usize) -> Result<FindOutcome> {
        let c = self.clusters.get_mut(&id).ok_or(Error::BadPartition)?;
        if c.frozen {
            return Err(Error::Frozen(id));
        }
        let Some(&v) = c.unchecked.iter().next() else { return Ok(FindOutcome::AllChecked) };
        if c.boundary_size == 0 {
            c.unchecked.clear();
            return Ok(FindOutcome::AllChecked);
        }
        let order = c.members.len();
        let boundary_size = c.boundary_size;
        self.stats.find_calls += 1;
        let params = LocalCutParams {
            nu: self.params.find_nu(),
            k: self.params.lambda_max,
            trials: self.params.find_trials(self.n),
            seed: rng::derive(self.seed ^ 0xf1d, self.stats.find_calls),
        };
        let view = InducedByLabel { graph: g, label: &self.cluster_of, id, order };
        let eps = self.params.eps;
        let labels = &self.cluster_of;
        let hit = first_in_batch(&view, v, &params, |cut| {
            let mut ext = 0u64;
            for &u in cut.side.iter() {
                for (x, m) in g.neighbors(u) {
                    if labels[x] != id {
                        ext += m as u64;
                    }
                }
            }
            sparse_by_weights(cut.boundary, ext, boundary_size, eps)
        });
        match hit {
            Some(cut) => {
                self.responsibility[v] += 1;
                self.stats.sparse_splits += 1;
                let (kept, new) = self.split_cluster(g, id, &cut.side, true)?;
                let frozen = self.clusters[&kept].frozen || self.clusters[&new].frozen;
                Ok(if frozen { FindOutcome::Frozen } else { FindOutcome::Split { kept, new } })
            }
            None => {
                self.clusters.get_mut(&id).expect("cluster").unchecked.remove(&v);
                Ok(FindOutcome::Checked(v))
            }
        }
    }

    /// Run find-and-cut until no unfrozen cluster has unchecked vertices.
    pub fn find_and_cut_loop(&mut self, g: &DynamicGraph) {
        while let Some(id) = self.clusters.values().find(|c| !c.frozen && !c.unchecked.is_empty()).map(|c| c.id) {
            self.find_and_cut(g, id).expect("unfrozen cluster");
        }
    }

    /// Split `s` off cluster `id`. The smaller-volume side (found by a
    /// lockstep scan) gets a fresh id and engine; the other keeps the id and
    /// shrinks its engine. Returns (kept id, new id).
    pub fn split_cluster(
        &mut self,
        g: &DynamicGraph,
        id: usize,
        s: &VertexSet,
        sparse: bool,
    ) -> Result<(usize, usize)> {
        let c = self.clusters.get(&id).ok_or(Error::BadPartition)?;
        if s.is_empty() || s.len() >= c.members.len() || s.iter().any(|v| !c.members.contains(v)) {
            return Err(Error::NotProper);
        }
        let rest: Vec<usize> = c.members.iter().copied().filter(|&v| !s.contains(v)).collect();
        let side: Vec<usize> = s.iter().copied().collect();
        let old_boundary = c.boundary_size;

        // Lockstep scan: advance the side with less volume seen so far;
        // a side that runs out while behind is the smaller one.
        let (mut i, mut j, mut vs, mut vr, mut cost) = (0usize, 0usize, 0u64, 0u64, 0u64);
        let small_is_s = loop {
            let s_done = i == side.len();
            let r_done = j == rest.len();
            if s_done && r_done {
                break if vs != vr { vs < vr } else { side[0] < rest[0] };
            }
            if s_done && vs < vr {
                break true;
            }
            if r_done && vr < vs {
                break false;
            }
            if !s_done && (r_done || vs <= vr) {
                vs += g.degree(side[i]);
                cost += g.degree(side[i]) + 1;
                i += 1;
            } else {
                vr += g.degree(rest[j]);
                cost += g.degree(rest[j]) + 1;
                j += 1;
            }
        };
        self.stats.split_cost += cost;
        let t: BTreeSet<usize> = if small_is_s { side.into_iter().collect() } else { rest.into_iter().collect() };

        let new = self.next_id;
        self.next_id += 1;
        for &u in &t {
            self.cluster_of[u] = new;
        }
        let mut t_boundary: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        let mut moved: BTreeMap<usize, u32> = BTreeMap::new();
        let mut between = 0u32;
        let mut newly_cut: Vec<(usize, usize)> = Vec::new();
        {
            let l = self.clusters.get_mut(&id).expect("cluster");
            for &u in &t {
                l.members.remove(&u);
            }
            for &u in &t {
                for (x, m) in g.neighbors(u) {
                    if t.contains(&x) {
                        continue;
                    }
                    t_boundary.insert((u, x), m);
                    if self.cluster_of[x] == id {
                        l.boundary.insert((x, u), m);
                        between += m;
                        newly_cut.push((u, x));
                    } else {
                        l.boundary.remove(&(u, x));
                        *moved.entry(self.cluster_of[x]).or_insert(0) += m;
                    }
                }
            }
            l.boundary_size = l.boundary.values().map(|&m| m as u64).sum();
        }
        let t_size: u64 = t_boundary.values().map(|&m| m as u64).sum();
        let t_members: VertexSet = t.iter().copied().collect();
        let cfg = self.engine_cfg(new);
        let engine = Engine::build(MirrorGraph::build(g, &t_members, true), cfg);

        let (l_size, l_frozen_before, pending, t_unchecked) = {
            let l = self.clusters.get_mut(&id).expect("cluster");
            l.engine.handle(MirrorOp::Shrink { removed: t.iter().copied().collect() })?;
            let t_unchecked: BTreeSet<usize> = l.unchecked.iter().copied().filter(|v| t.contains(v)).collect();
            l.unchecked.retain(|v| !t.contains(v));
            (l.boundary_size, l.frozen, l.pending.clone(), t_unchecked)
        };
        let mut tc = Cluster {
            id: new,
            members: t,
            boundary: t_boundary,
            boundary_size: t_size,
            frozen: false,
            pending: if l_frozen_before { pending } else { Vec::new() },
            unchecked: t_unchecked,
            engine,
        };
        for &(u, x) in &newly_cut {
            tc.unchecked.insert(u);
            self.clusters.get_mut(&id).expect("cluster").unchecked.insert(x);
        }
        tc.frozen = tc.engine.has_small_cut();
        if tc.frozen {
            self.stats.freezes += 1;
        }
        self.clusters.insert(new, tc);
        self.refresh_frozen(id);

        if sparse && l_size as f64 >= self.params.lambda_min && t_size as f64 >= self.params.lambda_min {
            self.stats.boundary_checks += 1;
            let drop = self.params.eps * self.params.lambda_min / 2.0;
            if (old_boundary as f64) < l_size.max(t_size) as f64 + drop {
                self.stats.boundary_violations += 1;
            }
        }
        if !sparse {
            self.stats.forced_splits += 1;
        }
        self.emit(LevelOp::Split { node: id, new_node: new, moved: moved.into_iter().collect(), between });
        Ok((id, new))
    }

    fn emit(&mut self, op: LevelOp) {
        self.stats.emitted += 1;
        self.outbox.push(op);
    }

    /// Re-read the engine's verdict; unfreezing replays queued updates.
    fn refresh_frozen(&mut self, id: usize) {
        let c = self.clusters.get_mut(&id).expect("cluster");
        let small = c.engine.has_small_cut();
        if small && !c.frozen {
            c.frozen = true;
            self.stats.freezes += 1;
        } else if !small && c.frozen {
            self.unfreeze_and_replay(id).expect("no small cut");
        }
    }

    /// Thaw cluster `id` and replay the updates that arrived while frozen.
    pub fn unfreeze_and_replay(&mut self, id: usize) -> Result<()> {
        let c = self.clusters.get_mut(&id).ok_or(Error::BadPartition)?;
        if c.engine.has_small_cut() {
            return Err(Error::StillSmall(id));
        }
        c.frozen = false;
        self.stats.unfreezes += 1;
        let pending = std::mem::take(&mut c.pending);
        for op in &pending {
            let (a, b) = op.endpoints();
            for x in [a, b] {
                if c.members.contains(&x) {
                    c.unchecked.insert(x);
                }
            }
        }
        if !pending.is_empty() {
            self.unchecked_budget_mark(id);
        }
        Ok(())
    }

    /// Mark up to ⌈2λmax⌉ checked boundary endpoints unchecked, in
    /// boundary-list order.
    pub fn unchecked_budget_mark(&mut self, id: usize) -> usize {
        let budget = self.params.budget_marks();
        let Some(c) = self.clusters.get_mut(&id) else { return 0 };
        let mut marked = 0;
        let keys: Vec<usize> = c.boundary.keys().map(|&(v, _)| v).collect();
        for v in keys {
            if marked == budget {
                break;
            }
            if c.unchecked.insert(v) {
                marked += 1;
            }
        }
        marked
    }

    fn touch(&mut self, id: usize, op: &LevelOp, vertices: &[usize]) {
        let c = self.clusters.get_mut(&id).expect("cluster");
        if c.frozen {
            c.pending.push(op.clone());
        } else {
            for &v in vertices {
                c.unchecked.insert(v);
            }
        }
    }

    fn adjust_boundary(&mut self, inside: usize, outside: usize, delta: i64) {
        let id = self.cluster_of[inside];
        let c = self.clusters.get_mut(&id).expect("cluster");
        let e = c.boundary.entry((inside, outside)).or_insert(0);
        *e = (*e as i64 + delta) as u32;
        if *e == 0 {
            c.boundary.remove(&(inside, outside));
        }
        c.boundary_size = (c.boundary_size as i64 + delta) as u64;
    }

    /// Process one level update; `g` and `ed` already reflect it.
    pub fn apply_update(
        &mut self,
        g: &DynamicGraph,
        op: &LevelOp,
        report: &ExpanderReport,
        ed: Option<&ExpanderDecomposition>,
    ) -> Result<()> {
        let mut affected: BTreeSet<usize> = BTreeSet::new();
        match op {
            LevelOp::Insert(u, v) | LevelOp::Delete(u, v) => {
                let (u, v) = (*u, *v);
                let (cu, cv) = (self.cluster_of[u], self.cluster_of[v]);
                let ins = matches!(op, LevelOp::Insert(..));
                if cu == cv {
                    let mop = if ins { MirrorOp::Insert(u, v) } else { MirrorOp::Delete(u, v) };
                    self.clusters.get_mut(&cu).expect("cluster").engine.handle(mop)?;
                    self.touch(cu, op, &[u, v]);
                } else {
                    let d = if ins { 1 } else { -1 };
                    self.adjust_boundary(u, v, d);
                    self.adjust_boundary(v, u, d);
                    for (x, cx) in [(u, cu), (v, cv)] {
                        let c = self.clusters.get_mut(&cx).expect("cluster");
                        let out = c.engine.working().outside();
                        let mop = if ins { MirrorOp::Insert(x, out) } else { MirrorOp::Delete(x, out) };
                        c.engine.handle(mop)?;
                        self.touch(cx, op, &[x]);
                    }
                    self.emit(if ins { LevelOp::Insert(cu, cv) } else { LevelOp::Delete(cu, cv) });
                }
                affected.extend([cu, cv]);
            }
            LevelOp::Split { node, new_node, moved, between } => {
                let (node, new_node) = (*node, *new_node);
                let cid = self.cluster_of[node];
                self.cluster_of[new_node] = cid;
                if self.responsibility.len() <= new_node {
                    self.responsibility.resize(new_node + 1, 0);
                }
                let mut mirror_moved: BTreeMap<usize, u32> = BTreeMap::new();
                let out = self.clusters[&cid].engine.working().outside();
                self.clusters.get_mut(&cid).expect("cluster").members.insert(new_node);
                for &(x, m) in moved {
                    if self.cluster_of[x] == cid {
                        *mirror_moved.entry(x).or_insert(0) += m;
                    } else {
                        *mirror_moved.entry(out).or_insert(0) += m;
                        self.adjust_boundary(node, x, -(m as i64));
                        self.adjust_boundary(new_node, x, m as i64);
                        self.adjust_boundary(x, node, -(m as i64));
                        self.adjust_boundary(x, new_node, m as i64);
                    }
                }
                let c = self.clusters.get_mut(&cid).expect("cluster");
                c.engine.handle(MirrorOp::SplitVertex {
                    node,
                    new: new_node,
                    moved: mirror_moved.into_iter().collect(),
                    between: *between,
                })?;
                self.touch(cid, op, &[node, new_node]);
                affected.insert(cid);
            }
        }

        for split in &report.splits {
            let moved: BTreeSet<usize> = split.moved.iter().copied().collect();
            let hit: BTreeSet<usize> = moved.iter().map(|&v| self.cluster_of[v]).collect();
            for cid in hit {
                let c = &self.clusters[&cid];
                if c.members.iter().all(|v| moved.contains(v)) {
                    continue;
                }
                let s: VertexSet = c.members.iter().copied().filter(|v| moved.contains(v)).collect();
                let (kept, new) = self.split_cluster(g, cid, &s, false)?;
                affected.extend([kept, new]);
            }
        }
        debug_assert!(ed.is_none_or(|ed| self.refines(ed)));

        for &id in &affected {
            if self.clusters.contains_key(&id) {
                self.refresh_frozen(id);
                if !self.clusters[&id].frozen {
                    self.unchecked_budget_mark(id);
                }
            }
        }
        self.find_and_cut_loop(g);
        Ok(())
    }

    /// Every cluster lies inside one expander part.
    pub fn refines(&self, ed: &ExpanderDecomposition) -> bool {
        self.clusters.values().all(|c| {
            let mut parts = c.members.iter().map(|&v| ed.part_of(v));
            let first = parts.next().flatten();
            parts.all(|p| p == first)
        })
    }

    /// Structural self-check against the level graph.
    pub fn validate(&self, g: &DynamicGraph) -> std::result::Result<(), String> {
        let mut seen = 0;
        for c in self.clusters.values() {
            seen += c.members.len();
            if c.members.is_empty() {
                return Err(format!("cluster {} empty", c.id));
            }
            for &v in &c.members {
                if self.cluster_of[v] != c.id {
                    return Err(format!("label of {v} is not {}", c.id));
                }
            }
            let set = c.member_set();
            let mut want = BTreeMap::new();
            for &v in set.iter() {
                for (x, m) in g.neighbors(v) {
                    if !set.contains(x) {
                        want.insert((v, x), m);
                    }
                }
            }
            if want != c.boundary || c.boundary_size != g.boundary(&set) {
                return Err(format!("boundary list of {} stale", c.id));
            }
            if !c.pending.is_empty() && !c.frozen {
                return Err(format!("cluster {} has pending ops but is unfrozen", c.id));
            }
            if c.frozen != c.engine.has_small_cut() {
                return Err(format!("cluster {} frozen flag disagrees with its engine", c.id));
            }
            let w = c.engine.working();
            let expect = MirrorGraph::build(g, &set, w.outside_active());
            if expect.graph() != w.graph() || expect.alive() != w.alive() {
                return Err(format!("mirror of {} out of sync", c.id));
            }
        }
        if seen != self.cluster_of.iter().filter(|&&c| c != NONE).count() {
            return Err("labels cover vertices outside any cluster".into());
        }
        Ok(())
    }
}
