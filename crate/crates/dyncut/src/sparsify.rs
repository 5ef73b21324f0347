//! Uniform edge sampling kept consistent under insertions and deletions.
//! Every edge instance carries an identity (u, v, per-pair sequence number)
//! and its fate is a pure function of (seed, identity).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::DynamicGraph;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeOp {
    Insert(usize, usize),
    Delete(usize, usize),
}

impl EdgeOp {
    pub fn endpoints(&self) -> (usize, usize) {
        match *self {
            EdgeOp::Insert(u, v) | EdgeOp::Delete(u, v) => (u, v),
        }
    }

    pub fn apply(&self, g: &mut DynamicGraph) -> Result<()> {
        match *self {
            EdgeOp::Insert(u, v) => g.insert_edge(u, v),
            EdgeOp::Delete(u, v) => g.delete_edge(u, v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId {
    pub u: usize,
    pub v: usize,
    pub seq: u64,
}

#[derive(Clone, Debug)]
pub struct Sparsifier {
    p: f64,
    seed: u64,
    next_seq: HashMap<(usize, usize), u64>,
    /// Live instances per pair, most recent last, with their decisions.
    live: HashMap<(usize, usize), Vec<(u64, bool)>>,
    shadow: DynamicGraph,
}

/// min(1, 54 ln n / (ε² b)).
pub fn probability_for(b: f64, eps: f64, n: f64) -> f64 {
    (54.0 * n.ln() / (eps * eps * b)).min(1.0)
}

impl Sparsifier {
    pub fn new(n: usize, p: f64, seed: u64) -> Self {
        Self {
            p: p.clamp(0.0, 1.0),
            seed,
            next_seq: HashMap::new(),
            live: HashMap::new(),
            shadow: DynamicGraph::new(n),
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn shadow(&self) -> &DynamicGraph {
        &self.shadow
    }

    pub fn sample_decision(&self, id: EdgeId) -> bool {
        if self.p >= 1.0 {
            return true;
        }
        rng::unit(rng::hash(&[self.seed, id.u as u64, id.v as u64, id.seq])) < self.p
    }

    /// Apply a source update; returns the op to forward to the sampled graph.
    pub fn apply_update(&mut self, op: EdgeOp) -> Result<Option<EdgeOp>> {
        let (a, b) = op.endpoints();
        let key = (a.min(b), a.max(b));
        match op {
            EdgeOp::Insert(..) => {
                if a == b {
                    return Err(Error::SelfLoop(a));
                }
                let seq = self.next_seq.entry(key).or_insert(0);
                let id = EdgeId { u: key.0, v: key.1, seq: *seq };
                *seq += 1;
                let keep = self.sample_decision(id);
                if keep {
                    self.shadow.insert_edge(key.0, key.1)?;
                }
                self.live.entry(key).or_default().push((id.seq, keep));
                Ok(keep.then_some(EdgeOp::Insert(key.0, key.1)))
            }
            EdgeOp::Delete(..) => {
                let Some((_, keep)) = self.live.get_mut(&key).and_then(|s| s.pop()) else {
                    return Err(Error::UnknownInstance(a, b));
                };
                if keep {
                    self.shadow.delete_edge(key.0, key.1)?;
                }
                Ok(keep.then_some(EdgeOp::Delete(key.0, key.1)))
            }
        }
    }

    /// Rebuild the shadow from the live instances (consistency check).
    pub fn rebuild_shadow(&self) -> DynamicGraph {
        let mut g = DynamicGraph::new(self.shadow.n());
        for (&(u, v), inst) in &self.live {
            let kept = inst.iter().filter(|&&(seq, _)| self.sample_decision(EdgeId { u, v, seq })).count();
            g.insert_edges(u, v, kept as u32).expect("valid pair");
        }
        g
    }
}
