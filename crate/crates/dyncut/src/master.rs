//! The ladder of sparsified instances. Instance i guesses λ ≈ b_i = 1.1^i,
//! samples edges with probability p_i and runs a bounded-min-cut hierarchy;
//! the smallest index that reports an in-window value answers.

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexSet};
use crate::hierarchy::{Hierarchy, InstanceAnswer};
use crate::ops::LevelOp;
use crate::params::{Mode, Params};
use crate::rng;
use crate::sparsify::{probability_for, EdgeOp, Sparsifier};

#[derive(Clone, Debug)]
pub struct Instance {
    pub index: u32,
    pub b: f64,
    pub p: f64,
    pub sparsifier: Sparsifier,
    pub hierarchy: Hierarchy,
}

impl Instance {
    fn apply(&mut self, op: EdgeOp) -> Result<()> {
        if let Some(fwd) = self.sparsifier.apply_update(op)? {
            self.hierarchy.apply_update(&LevelOp::from(fwd))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    /// v / p_j.
    pub value: f64,
    /// The winning instance's own answer v.
    pub raw: u64,
    /// Ladder index i (1-based).
    pub instance: u32,
    pub p: f64,
}

#[derive(Clone, Debug)]
pub struct MasterState {
    instances: Vec<Instance>,
    source: DynamicGraph,
    params: Params,
    parallel: bool,
}

/// ⌈log_1.1 n²⌉, at least 1.
pub fn ladder_len(n: usize) -> u32 {
    let n2 = (n.max(2) * n.max(2)) as f64;
    (n2.ln() / 1.1f64.ln()).ceil().max(1.0) as u32
}

/// Smallest position whose answer is a value inside [λmin, λmax].
pub fn select(answers: &[InstanceAnswer], lambda_min: f64, lambda_max: f64) -> Option<(usize, u64)> {
    answers.iter().enumerate().find_map(|(pos, a)| match a {
        InstanceAnswer::Value(v, _) if (*v as f64) >= lambda_min && (*v as f64) <= lambda_max => Some((pos, *v)),
        _ => None,
    })
}

impl MasterState {
    /// Build the ladder on `g`. In desk mode every instance uses the given
    /// λmin/λmax; in paper mode they come from n and ε.
    pub fn new(g: &DynamicGraph, params: &Params, seed: u64) -> Result<Self> {
        params.validate()?;
        let n = g.n();
        let ln_base = n.max(2) as f64;
        let edges = g.edge_units();
        let build = |i: u32| -> Result<Instance> {
            let b = 1.1f64.powi(i as i32);
            let p = probability_for(b, params.eps, ln_base);
            let inst_seed = rng::derive(seed, i as u64);
            let mut sparsifier = Sparsifier::new(n, p, rng::derive(inst_seed, 1));
            for &(u, v) in &edges {
                sparsifier.apply_update(EdgeOp::Insert(u, v))?;
            }
            let hierarchy = Hierarchy::static_build(sparsifier.shadow(), params, rng::derive(inst_seed, 2));
            Ok(Instance { index: i, b, p, sparsifier, hierarchy })
        };
        let indices: Vec<u32> = (1..=ladder_len(n)).collect();
        let instances = indices.into_iter().map(build).collect::<Result<Vec<_>>>()?;
        Ok(Self { instances, source: g.clone(), params: params.clone(), parallel: false })
    }

    /// Drive instances from the rayon pool (no effect without the
    /// `parallel` feature).
    pub fn set_parallel(&mut self, on: bool) {
        self.parallel = on;
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn source(&self) -> &DynamicGraph {
        &self.source
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.params.mode
    }

    pub fn apply_update(&mut self, op: EdgeOp) -> Result<()> {
        // Validate on the source first so a bad op leaves every instance untouched.
        op.apply(&mut self.source)?;
        #[cfg(feature = "parallel")]
        if self.parallel {
            use rayon::prelude::*;
            return self.instances.par_iter_mut().try_for_each(|inst| inst.apply(op));
        }
        self.instances.iter_mut().try_for_each(|inst| inst.apply(op))
    }

    pub fn answers(&self) -> Vec<InstanceAnswer> {
        self.instances.iter().map(|i| i.hierarchy.query()).collect()
    }

    pub fn query(&self) -> Option<QueryResult> {
        let (lmin, lmax) = (self.params.lambda_min, self.params.lambda_max);
        for inst in &self.instances {
            if let InstanceAnswer::Value(v, _) = inst.hierarchy.query() {
                if (v as f64) >= lmin && (v as f64) <= lmax {
                    return Some(QueryResult { value: v as f64 / inst.p, raw: v, instance: inst.index, p: inst.p });
                }
            }
        }
        None
    }

    /// The winning instance's cut and its exact boundary in the source graph.
    pub fn extract_cut(&self, q: &QueryResult) -> Result<(VertexSet, u64)> {
        let inst = self.instances.iter().find(|i| i.index == q.instance).ok_or(Error::NoValue)?;
        let side = inst.hierarchy.extract_cut(&inst.hierarchy.query())?;
        let boundary = self.source.boundary(&side);
        Ok((side, boundary))
    }
}
