//! One bounded-min-cut instance: a stack of levels, each the contraction
//! of the clusters of the level above, maintained under updates and
//! rebuilt periodically.

use std::collections::BTreeSet;

use crate::clusters::{ClusterDecomposition, ClusterRow};
use crate::error::{Error, Result};
use crate::expander::{ExpanderDecomposition, ExpanderReport};
use crate::graph::{DynamicGraph, VertexSet};
use crate::ops::LevelOp;
use crate::params::Params;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelKind {
    /// At most two nodes; the answer is read off directly.
    Base,
    /// Small or deepest level: one cluster spanning the level.
    Terminal,
    Decomposed,
}

#[derive(Clone, Debug)]
pub struct Level {
    pub depth: usize,
    pub kind: LevelKind,
    /// Universe is the instance's n; live nodes are `alive`.
    pub graph: DynamicGraph,
    pub alive: BTreeSet<usize>,
    pub expander: Option<ExpanderDecomposition>,
    pub decomposition: Option<ClusterDecomposition>,
    pub updates_since_restart: u64,
    pub restart_period: u64,
    /// Ops sent to the next level by the latest update.
    pub last_forwarded: usize,
}

/// Where a reported value came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutHandle {
    pub depth: usize,
    pub cluster: Option<usize>,
    /// Mirror vertex set (may hold the outside id) or, at a base level,
    /// one of the two nodes.
    pub side: VertexSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceAnswer {
    Value(u64, CutHandle),
    AboveMax,
    BelowMin,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HierarchyStats {
    pub updates: u64,
    pub restarts: u64,
    /// Largest per-vertex split responsibility seen in a static build.
    pub static_responsibility: u64,
    /// ... and over dynamic maintenance.
    pub dynamic_responsibility: u64,
    pub split_cost: u64,
    pub boundary_checks: u64,
    pub boundary_violations: u64,
    pub forwarded: u64,
}

/// Per-level CSV row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelRow {
    pub depth: usize,
    pub kind: LevelKind,
    pub nodes: usize,
    pub edges: u64,
    pub clusters: usize,
    pub frozen: usize,
    pub intercluster: u64,
    pub forwarded: usize,
}

#[derive(Clone, Debug)]
pub struct Hierarchy {
    levels: Vec<Level>,
    params: Params,
    n: usize,
    seed: u64,
    builds: u64,
    pub stats: HierarchyStats,
}

impl Hierarchy {
    pub fn static_build(g: &DynamicGraph, params: &Params, seed: u64) -> Self {
        let n = g.n();
        let mut h =
            Self { levels: Vec::new(), params: params.clone(), n, seed, builds: 0, stats: HierarchyStats::default() };
        h.build_from(1, g.clone(), (0..n).collect());
        h
    }

    fn build_from(&mut self, depth: usize, mut graph: DynamicGraph, mut alive: BTreeSet<usize>) {
        for lvl in self.levels.drain(depth - 1..) {
            if let Some(d) = &lvl.decomposition {
                self.stats.dynamic_responsibility = self.stats.dynamic_responsibility.max(d.max_responsibility());
                self.stats.split_cost += d.stats.split_cost;
                self.stats.boundary_checks += d.stats.boundary_checks;
                self.stats.boundary_violations += d.stats.boundary_violations;
            }
        }
        loop {
            let depth = self.levels.len() + 1;
            self.builds += 1;
            let seed = rng::derive(self.seed, (depth as u64) << 40 | self.builds);
            let period = self.params.restart_period(graph.m());
            let mut level = Level {
                depth,
                kind: LevelKind::Base,
                graph,
                alive,
                expander: None,
                decomposition: None,
                updates_since_restart: 0,
                restart_period: period,
                last_forwarded: 0,
            };
            if level.alive.len() <= 2 {
                self.levels.push(level);
                return;
            }
            let members: VertexSet = level.alive.iter().copied().collect();
            let small = (2 * level.graph.m()) as f64 <= self.params.find_nu();
            if small || depth >= self.params.max_depth {
                level.kind = LevelKind::Terminal;
                let d = ClusterDecomposition::from_parts(
                    &level.graph,
                    vec![level.alive.clone()],
                    &self.params,
                    self.n,
                    seed,
                );
                level.decomposition = Some(d);
                self.levels.push(level);
                return;
            }
            level.kind = LevelKind::Decomposed;
            let p = &self.params;
            let ed = ExpanderDecomposition::build(&level.graph, &members, p.alpha, p.phi, p.exhaustive_limit);
            let mut d = ClusterDecomposition::decompose_expanders(&level.graph, &ed, p, self.n, seed);
            d.take_outbox();
            self.stats.static_responsibility = self.stats.static_responsibility.max(d.max_responsibility());
            let next = contract_levels(&level.graph, d.labels(), self.n);
            let next_alive: BTreeSet<usize> = d.clusters().map(|c| c.id).collect();
            // Rebase so later dynamic counts start from zero.
            d.reset_responsibility();
            level.expander = Some(ed);
            level.decomposition = Some(d);
            self.levels.push(level);
            graph = next;
            alive = next_alive;
        }
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.levels[0].graph
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Apply an update to the level-1 graph and settle every level.
    pub fn apply_update(&mut self, op: &LevelOp) -> Result<()> {
        self.stats.updates += 1;
        self.apply_at(0, op)
    }

    fn apply_at(&mut self, idx: usize, op: &LevelOp) -> Result<()> {
        let level = &mut self.levels[idx];
        op.apply(&mut level.graph)?;
        if let LevelOp::Split { new_node, .. } = op {
            level.alive.insert(*new_node);
        }
        level.updates_since_restart += 1;
        level.last_forwarded = 0;
        let depth = level.depth;
        let rebuild = match level.kind {
            LevelKind::Base => level.alive.len() > 2,
            _ => level.updates_since_restart >= level.restart_period,
        };
        if rebuild {
            if level.kind != LevelKind::Base {
                self.stats.restarts += 1;
            }
            let (g, alive) = (level.graph.clone(), level.alive.clone());
            self.build_from(depth, g, alive);
            return Ok(());
        }
        let report = match &mut level.expander {
            Some(ed) => ed.apply_update(&level.graph, op),
            None => ExpanderReport::default(),
        };
        let forwarded = match &mut level.decomposition {
            Some(d) => {
                d.apply_update(&level.graph, op, &report, level.expander.as_ref())?;
                let out = d.take_outbox();
                self.stats.dynamic_responsibility = self.stats.dynamic_responsibility.max(d.max_responsibility());
                out
            }
            None => Vec::new(),
        };
        level.last_forwarded = forwarded.len();
        self.stats.forwarded += forwarded.len() as u64;
        if level.kind == LevelKind::Terminal {
            debug_assert!(forwarded.is_empty());
            return Ok(());
        }
        for f in &forwarded {
            if idx + 1 < self.levels.len() {
                self.apply_at(idx + 1, f)?;
            }
        }
        Ok(())
    }

    /// The instance's verdict on the current graph.
    pub fn query(&self) -> InstanceAnswer {
        let mut best: Option<(u64, CutHandle)> = None;
        for level in &self.levels {
            let found = match level.kind {
                LevelKind::Base => {
                    let nodes: Vec<usize> = level.alive.iter().copied().collect();
                    (nodes.len() == 2).then(|| {
                        let side = VertexSet::singleton(nodes[0]);
                        (
                            level.graph.multiplicity(nodes[0], nodes[1]) as u64,
                            CutHandle { depth: level.depth, cluster: None, side },
                        )
                    })
                }
                _ => {
                    let d = level.decomposition.as_ref().expect("decomposition");
                    if d.any_frozen() {
                        return InstanceAnswer::BelowMin;
                    }
                    d.min_mirror_cut().map(|(cid, cut)| {
                        (cut.boundary, CutHandle { depth: level.depth, cluster: Some(cid), side: cut.side })
                    })
                }
            };
            if let Some((v, h)) = found {
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, h));
                }
            }
        }
        match best {
            Some((v, _)) if (v as f64) < self.params.lambda_min => InstanceAnswer::BelowMin,
            Some((v, h)) if (v as f64) <= self.params.lambda_max => InstanceAnswer::Value(v, h),
            _ => InstanceAnswer::AboveMax,
        }
    }

    /// Level-1 vertex set realising a `Value` answer.
    pub fn extract_cut(&self, answer: &InstanceAnswer) -> Result<VertexSet> {
        let InstanceAnswer::Value(_, handle) = answer else { return Err(Error::NoValue) };
        let level = self.levels.get(handle.depth - 1).ok_or(Error::NoValue)?;
        let mut nodes: BTreeSet<usize> = match handle.cluster {
            None => handle.side.iter().copied().collect(),
            Some(cid) => {
                let d = level.decomposition.as_ref().ok_or(Error::NoValue)?;
                let c = d.cluster(cid).ok_or(Error::NoValue)?;
                if handle.side.contains(self.n) {
                    c.members.iter().copied().filter(|&v| !handle.side.contains(v)).collect()
                } else {
                    handle.side.iter().copied().collect()
                }
            }
        };
        for above in self.levels[..handle.depth - 1].iter().rev() {
            let d = above.decomposition.as_ref().expect("decomposed level");
            let mut down = BTreeSet::new();
            for &x in &nodes {
                down.extend(d.cluster(x).ok_or(Error::NoValue)?.members.iter().copied());
            }
            nodes = down;
        }
        Ok(nodes.into_iter().collect())
    }

    /// Each level equals the contraction of the level above.
    pub fn check_coherence(&self) -> std::result::Result<(), String> {
        for w in self.levels.windows(2) {
            let d = w[0].decomposition.as_ref().ok_or("missing decomposition")?;
            let want = contract_levels(&w[0].graph, d.labels(), self.n);
            if want != w[1].graph {
                return Err(format!("level {} is not the contraction of level {}", w[1].depth, w[0].depth));
            }
            let ids: BTreeSet<usize> = d.clusters().map(|c| c.id).collect();
            if ids != w[1].alive {
                return Err(format!("level {} nodes differ from the clusters above", w[1].depth));
            }
        }
        for l in &self.levels {
            if let Some(d) = &l.decomposition {
                d.validate(&l.graph).map_err(|e| format!("level {}: {e}", l.depth))?;
            }
        }
        Ok(())
    }

    pub fn level_rows(&self) -> Vec<LevelRow> {
        self.levels
            .iter()
            .map(|l| LevelRow {
                depth: l.depth,
                kind: l.kind,
                nodes: l.alive.len(),
                edges: l.graph.m(),
                clusters: l.decomposition.as_ref().map_or(0, |d| d.len()),
                frozen: l.decomposition.as_ref().map_or(0, |d| d.frozen_count()),
                intercluster: l.decomposition.as_ref().map_or(0, |d| d.intercluster_edges()),
                forwarded: l.last_forwarded,
            })
            .collect()
    }

    pub fn cluster_rows(&self) -> Vec<(usize, ClusterRow)> {
        self.levels
            .iter()
            .filter_map(|l| l.decomposition.as_ref().map(|d| (l.depth, d)))
            .flat_map(|(depth, d)| d.rows().into_iter().map(move |r| (depth, r)))
            .collect()
    }

    /// Sum of split work across live and retired decompositions.
    pub fn split_cost(&self) -> u64 {
        self.stats.split_cost
            + self.levels.iter().filter_map(|l| l.decomposition.as_ref()).map(|d| d.stats.split_cost).sum::<u64>()
    }

    /// Boundary-decrease checks and violations across all decompositions.
    pub fn boundary_checks(&self) -> (u64, u64) {
        let live = self.levels.iter().filter_map(|l| l.decomposition.as_ref());
        let (c, v) = live.fold((0, 0), |(c, v), d| (c + d.stats.boundary_checks, v + d.stats.boundary_violations));
        (self.stats.boundary_checks + c, self.stats.boundary_violations + v)
    }
}

/// Contract a level along cluster labels into a graph on the same universe.
pub fn contract_levels(g: &DynamicGraph, labels: &[usize], n: usize) -> DynamicGraph {
    let mut h = DynamicGraph::new(n);
    for (u, v, c) in g.edges() {
        let (a, b) = (labels[u], labels[v]);
        if a != b {
            h.insert_edges(a, b, c).expect("cluster ids below n");
        }
    }
    h
}
