//! Boundary-linked expander decomposition behind a small interface, with a
//! rebuild-and-refine reference implementation: exhaustive conductance
//! checks for small parts, sweep cuts above `exhaustive_limit`. Parts are
//! only ever refined between rebuilds.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{DynamicGraph, VertexSet};
use crate::ops::LevelOp;
use crate::rng;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certificate {
    Exhaustive(bool),
    /// Only sweep and sampled cuts were examined.
    Heuristic(bool),
}

impl Certificate {
    pub fn passed(&self) -> bool {
        matches!(self, Certificate::Exhaustive(true) | Certificate::Heuristic(true))
    }
}

/// Minimum-conductance cut of `h` as (side, cut, denominator); `None` when
/// no cut has a positive denominator. Side excludes the last vertex; ties go
/// to the lexicographically smallest side.
fn exhaustive_min_conductance(h: &DynamicGraph) -> Option<(Vec<usize>, u64, u64)> {
    let t = h.n();
    if t < 2 {
        return None;
    }
    let total: u64 = (0..t).map(|v| h.degree(v)).sum();
    let plain: Vec<u64> = (0..t).map(|v| h.degree(v) - h.loops(v) as u64).collect();
    let mut mask = 0u64;
    let (mut cut, mut vol) = (0u64, 0u64);
    let mut best: Option<(u64, u64, u64)> = None;
    for i in 1u64..(1 << (t - 1)) {
        let b = i.trailing_zeros() as usize;
        let adding = mask >> b & 1 == 0;
        let mut w = 0u64;
        for (u, c) in h.neighbors(b) {
            if mask >> u & 1 == 1 {
                w += c as u64;
            }
        }
        if adding {
            cut = cut + plain[b] - 2 * w;
            vol += h.degree(b);
            mask |= 1 << b;
        } else {
            cut = cut + 2 * w - plain[b];
            vol -= h.degree(b);
            mask &= !(1 << b);
        }
        let den = vol.min(total - vol);
        if den == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((bc, bd, bm)) => {
                let (l, r) = (cut as u128 * bd as u128, bc as u128 * den as u128);
                l < r || (l == r && bits(mask) < bits(bm))
            }
        };
        if better {
            best = Some((cut, den, mask));
        }
    }
    best.map(|(c, d, m)| (bits(m), c, d))
}

fn bits(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Best prefix cut over a few vertex orders plus sampled random cuts.
fn sweep_min_conductance(h: &DynamicGraph, salt: u64) -> Option<(Vec<usize>, u64, u64)> {
    let t = h.n();
    if t < 2 {
        return None;
    }
    let total: u64 = (0..t).map(|v| h.degree(v)).sum();
    let mut orders: Vec<Vec<usize>> = Vec::new();
    let mut by_deg: Vec<usize> = (0..t).collect();
    by_deg.sort_by_key(|&v| (h.degree(v), v));
    orders.push(by_deg.clone());
    let start = by_deg[0];
    let mut seen = vec![false; t];
    let mut bfs = vec![start];
    seen[start] = true;
    let mut head = 0;
    while bfs.len() < t {
        if head == bfs.len() {
            let next = (0..t).find(|&v| !seen[v]).expect("unseen vertex");
            seen[next] = true;
            bfs.push(next);
        }
        let v = bfs[head];
        head += 1;
        for (u, _) in h.neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                bfs.push(u);
            }
        }
    }
    orders.push(bfs);
    let mut best: Option<(Vec<usize>, u64, u64)> = None;
    let consider = |side: &[bool], best: &mut Option<(Vec<usize>, u64, u64)>| {
        let s: VertexSet = (0..t).filter(|&v| side[v]).collect();
        if s.is_empty() || s.len() == t {
            return;
        }
        let cut = h.boundary(&s);
        let vol = h.volume(&s);
        let den = vol.min(total - vol);
        if den == 0 {
            return;
        }
        if best.as_ref().is_none_or(|(_, bc, bd)| (cut as u128) * (*bd as u128) < (*bc as u128) * (den as u128)) {
            *best = Some((s.into_vec(), cut, den));
        }
    };
    for order in &orders {
        let mut side = vec![false; t];
        for &v in &order[..t - 1] {
            side[v] = true;
            consider(&side, &mut best);
        }
    }
    for r in 0..64u64 {
        let side: Vec<bool> = (0..t).map(|v| rng::hash(&[salt, r, v as u64]) & 1 == 1).collect();
        consider(&side, &mut best);
    }
    best
}

/// Whether G[U]^{α/φ} is a φ-expander.
pub fn is_boundary_linked_expander(g: &DynamicGraph, u: &VertexSet, alpha: f64, phi: f64, limit: usize) -> Certificate {
    if u.len() <= 1 {
        return Certificate::Exhaustive(true);
    }
    let (h, _) = g.induced_with_loops(u, alpha / phi).expect("nonempty");
    let exhaustive = u.len() <= limit.min(63);
    let best = if exhaustive { exhaustive_min_conductance(&h) } else { sweep_min_conductance(&h, u.len() as u64) };
    let ok = best.is_none_or(|(_, c, d)| c as f64 >= phi * d as f64);
    if exhaustive {
        Certificate::Exhaustive(ok)
    } else {
        Certificate::Heuristic(ok)
    }
}

/// One inter-expander status change: `delta` copies of (u, v) entered
/// (positive) or left (negative) the inter-expander edge set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recourse {
    pub u: usize,
    pub v: usize,
    pub delta: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartSplit {
    pub part: usize,
    pub new_part: usize,
    pub moved: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpanderReport {
    pub recourse: Vec<Recourse>,
    pub splits: Vec<PartSplit>,
}

#[derive(Clone, Debug)]
pub struct ExpanderDecomposition {
    alpha: f64,
    phi: f64,
    limit: usize,
    part_of: Vec<usize>,
    parts: BTreeMap<usize, BTreeSet<usize>>,
    next_part: usize,
    inter: BTreeMap<(usize, usize), u32>,
    initial_inter: BTreeMap<(usize, usize), u32>,
    pub recourse_log: Vec<Vec<Recourse>>,
    /// Checks that fell back to sweep cuts.
    pub heuristic_checks: u64,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

impl ExpanderDecomposition {
    /// Refine `vertices` until every part passes the check.
    pub fn build(g: &DynamicGraph, vertices: &VertexSet, alpha: f64, phi: f64, limit: usize) -> Self {
        let mut ed = Self {
            alpha,
            phi,
            limit,
            part_of: vec![NONE; g.n()],
            parts: BTreeMap::new(),
            next_part: 0,
            inter: BTreeMap::new(),
            initial_inter: BTreeMap::new(),
            recourse_log: Vec::new(),
            heuristic_checks: 0,
        };
        if !vertices.is_empty() {
            for &v in vertices.iter() {
                ed.part_of[v] = 0;
            }
            ed.parts.insert(0, vertices.iter().copied().collect());
            ed.next_part = 1;
            let mut report = ExpanderReport::default();
            ed.refine(g, 0, &mut report);
        }
        ed.inter.clear();
        for (u, v, c) in g.edges() {
            if ed.part_of[u] != ed.part_of[v] {
                ed.inter.insert((u, v), c);
            }
        }
        ed.initial_inter = ed.inter.clone();
        ed
    }

    pub fn part_of(&self, v: usize) -> Option<usize> {
        self.part_of.get(v).copied().filter(|&p| p != NONE)
    }

    pub fn parts(&self) -> impl Iterator<Item = (usize, &BTreeSet<usize>)> {
        self.parts.iter().map(|(&id, p)| (id, p))
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    /// Inter-expander edges with multiplicity, keyed (min, max).
    pub fn interexpander_edges(&self) -> &BTreeMap<(usize, usize), u32> {
        &self.inter
    }

    pub fn interexpander_count(&self) -> u64 {
        self.inter.values().map(|&c| c as u64).sum()
    }

    /// Re-derive the inter-expander edge set from the build snapshot and the
    /// recourse log.
    pub fn replay_recourse(&self) -> BTreeMap<(usize, usize), u32> {
        let mut m: BTreeMap<(usize, usize), i64> = self.initial_inter.iter().map(|(&k, &c)| (k, c as i64)).collect();
        for r in self.recourse_log.iter().flatten() {
            *m.entry(key(r.u, r.v)).or_insert(0) += r.delta;
        }
        m.into_iter().filter(|&(_, c)| c != 0).map(|(k, c)| (k, c as u32)).collect()
    }

    fn note(&mut self, report: &mut ExpanderReport, u: usize, v: usize, delta: i64) {
        if delta == 0 {
            return;
        }
        let k = key(u, v);
        let e = self.inter.entry(k).or_insert(0);
        *e = (*e as i64 + delta) as u32;
        if *e == 0 {
            self.inter.remove(&k);
        }
        report.recourse.push(Recourse { u: k.0, v: k.1, delta });
    }

    fn check(&mut self, g: &DynamicGraph, part: &BTreeSet<usize>) -> (bool, Option<Vec<usize>>) {
        let u: VertexSet = part.iter().copied().collect();
        if u.len() <= 1 {
            return (true, None);
        }
        let (h, ids) = g.induced_with_loops(&u, self.alpha / self.phi).expect("nonempty");
        let exhaustive = u.len() <= self.limit.min(63);
        if !exhaustive {
            self.heuristic_checks += 1;
        }
        let best = if exhaustive { exhaustive_min_conductance(&h) } else { sweep_min_conductance(&h, u.len() as u64) };
        match best {
            Some((side, c, d)) if (c as f64) < self.phi * d as f64 => {
                (false, Some(side.into_iter().map(|i| ids[i]).collect()))
            }
            _ => (true, None),
        }
    }

    /// Split `start` until every resulting part passes.
    fn refine(&mut self, g: &DynamicGraph, start: usize, report: &mut ExpanderReport) {
        let mut work = vec![start];
        while let Some(p) = work.pop() {
            let part = self.parts[&p].clone();
            let (ok, side) = self.check(g, &part);
            if ok {
                continue;
            }
            let side: BTreeSet<usize> = side.expect("failing cut").into_iter().collect();
            // The side holding the smallest member keeps the old id.
            let first = *part.iter().next().expect("nonempty");
            let moved: BTreeSet<usize> =
                if side.contains(&first) { part.difference(&side).copied().collect() } else { side };
            let id = self.next_part;
            self.next_part += 1;
            for &v in &moved {
                self.part_of[v] = id;
            }
            let rest: BTreeSet<usize> = part.difference(&moved).copied().collect();
            for &v in &moved {
                for (x, c) in g.neighbors(v) {
                    if rest.contains(&x) {
                        self.note(report, v, x, c as i64);
                    }
                }
            }
            self.parts.insert(p, rest);
            self.parts.insert(id, moved.clone());
            report.splits.push(PartSplit { part: p, new_part: id, moved: moved.into_iter().collect() });
            work.push(p);
            work.push(id);
        }
    }

    /// Process one update; `g` already reflects it.
    pub fn apply_update(&mut self, g: &DynamicGraph, op: &LevelOp) -> ExpanderReport {
        let mut report = ExpanderReport::default();
        match *op {
            LevelOp::Insert(u, v) => {
                if self.part_of[u] != self.part_of[v] {
                    self.note(&mut report, u, v, 1);
                }
            }
            LevelOp::Delete(u, v) => {
                if self.part_of[u] != self.part_of[v] {
                    self.note(&mut report, u, v, -1);
                } else {
                    self.refine(g, self.part_of[u], &mut report);
                }
            }
            LevelOp::Split { node, new_node, ref moved, .. } => {
                let p = self.part_of[node];
                self.part_of[new_node] = p;
                self.parts.get_mut(&p).expect("part").insert(new_node);
                for &(x, c) in moved {
                    if self.part_of[x] != p {
                        self.note(&mut report, node, x, -(c as i64));
                        self.note(&mut report, new_node, x, c as i64);
                    }
                }
                self.refine(g, p, &mut report);
            }
        }
        self.recourse_log.push(report.recourse.clone());
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> DynamicGraph {
        let mut g = DynamicGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert_edge(u, v).unwrap();
            }
        }
        g
    }

    fn two_k4_bridge() -> DynamicGraph {
        let mut g = DynamicGraph::new(8);
        for base in [0, 4] {
            for u in 0..4 {
                for v in u + 1..4 {
                    g.insert_edge(base + u, base + v).unwrap();
                }
            }
        }
        g.insert_edge(3, 4).unwrap();
        g
    }

    #[test]
    fn expander_checks() {
        let k4 = complete(4);
        // balanced K4 cut: 4 crossing edges over volume 6
        assert!(is_boundary_linked_expander(&k4, &VertexSet::range(4), 0.5, 2.0 / 3.0, 18).passed());
        assert_eq!(
            is_boundary_linked_expander(&k4, &VertexSet::range(4), 0.5, 0.7, 18),
            Certificate::Exhaustive(false)
        );
        let p4 = DynamicGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(
            is_boundary_linked_expander(&p4, &VertexSet::range(4), 0.5, 0.5, 18),
            Certificate::Exhaustive(false)
        );
        assert!(is_boundary_linked_expander(&p4, &VertexSet::singleton(2), 0.5, 0.5, 18).passed());
    }

    #[test]
    fn builds() {
        let ed = ExpanderDecomposition::build(&complete(6), &VertexSet::range(6), 0.3, 0.3, 18);
        assert_eq!(ed.part_count(), 1);
        let ed = ExpanderDecomposition::build(&two_k4_bridge(), &VertexSet::range(8), 0.4, 0.4, 18);
        assert_eq!(ed.part_count(), 2);
        assert_eq!(ed.interexpander_count(), 1);
        let ed = ExpanderDecomposition::build(&DynamicGraph::new(5), &VertexSet::range(5), 0.3, 0.3, 18);
        assert_eq!(ed.interexpander_count(), 0);
    }

    #[test]
    fn updates_report_recourse() {
        let mut g = two_k4_bridge();
        let mut ed = ExpanderDecomposition::build(&g, &VertexSet::range(8), 0.4, 0.4, 18);
        g.insert_edge(0, 7).unwrap();
        let r = ed.apply_update(&g, &LevelOp::Insert(0, 7));
        assert_eq!(r.recourse, vec![Recourse { u: 0, v: 7, delta: 1 }]);
        g.insert_edge(0, 1).unwrap();
        assert!(ed.apply_update(&g, &LevelOp::Insert(0, 1)).recourse.is_empty());
        g.delete_edge(3, 4).unwrap();
        let r = ed.apply_update(&g, &LevelOp::Delete(3, 4));
        assert_eq!(r.recourse, vec![Recourse { u: 3, v: 4, delta: -1 }]);
        assert_eq!(ed.replay_recourse(), *ed.interexpander_edges());
    }

    #[test]
    fn deletion_inside_part_splits() {
        let mut g = DynamicGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)]).unwrap();
        let mut ed = ExpanderDecomposition::build(&g, &VertexSet::range(4), 0.5, 0.5, 18);
        assert_eq!(ed.part_count(), 1);
        for (u, v) in [(0, 2), (1, 3), (1, 2)] {
            g.delete_edge(u, v).unwrap();
            ed.apply_update(&g, &LevelOp::Delete(u, v));
        }
        assert!(ed.part_count() > 1);
        assert_eq!(ed.replay_recourse(), *ed.interexpander_edges());
        for (_, p) in ed.parts() {
            let u: VertexSet = p.iter().copied().collect();
            assert!(is_boundary_linked_expander(&g, &u, 0.5, 0.5, 18).passed());
        }
    }
}
