//! Seeded graph families and update streams for tests, benches and the CLI.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{DynamicGraph, VertexSet};
use crate::io::StreamItem;
use crate::sparsify::EdgeOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Gnp,
    Dumbbell,
    ExpanderPair,
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gnp" => Ok(Family::Gnp),
            "dumbbell" => Ok(Family::Dumbbell),
            "expander-pair" => Ok(Family::ExpanderPair),
            _ => Err(format!("unknown family '{s}' (gnp, dumbbell, expander-pair)")),
        }
    }
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gnp, Family::Dumbbell, Family::ExpanderPair];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Gnp => "gnp",
            Family::Dumbbell => "dumbbell",
            Family::ExpanderPair => "expander-pair",
        }
    }

    /// A member on `n` vertices with at most `m_max` edges.
    pub fn generate(&self, n: usize, m_max: u64, seed: u64) -> DynamicGraph {
        match self {
            Family::Gnp => {
                let p = (m_max as f64 * 0.9 / (n * (n - 1) / 2) as f64).min(1.0);
                gnp_capped(n, p, m_max, seed)
            }
            Family::Dumbbell => dumbbell(n, 4, seed),
            Family::ExpanderPair => expander_pair(n, 2, 4, seed),
        }
    }
}

pub fn gnp(n: usize, p: f64, seed: u64) -> DynamicGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DynamicGraph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                g.insert_edge(u, v).expect("in range");
            }
        }
    }
    g
}

/// G(n, p) resampled until connected with at most `m_max` edges (the last
/// draw is returned after 1000 tries).
pub fn gnp_capped(n: usize, p: f64, m_max: u64, seed: u64) -> DynamicGraph {
    let mut g = gnp(n, p, seed);
    for t in 1..1000u64 {
        if g.m() <= m_max && g.components(&VertexSet::range(n)).len() == 1 {
            break;
        }
        g = gnp(n, p, seed.wrapping_add(t.wrapping_mul(0x9e37_79b9)));
    }
    g
}

/// Two cliques on ⌈n/2⌉ and ⌊n/2⌋ vertices joined by `bridges` random
/// edges.
pub fn dumbbell(n: usize, bridges: usize, seed: u64) -> DynamicGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = n.div_ceil(2);
    let mut g = DynamicGraph::new(n);
    for (lo, hi) in [(0, half), (half, n)] {
        for u in lo..hi {
            for v in u + 1..hi {
                g.insert_edge(u, v).expect("in range");
            }
        }
    }
    for _ in 0..bridges {
        let u = rng.gen_range(0..half);
        let v = rng.gen_range(half..n);
        g.insert_edge(u, v).expect("in range");
    }
    g
}

/// Two halves, each the union of `cycles` random Hamiltonian cycles, joined
/// by `connectors` random edges.
pub fn expander_pair(n: usize, cycles: usize, connectors: usize, seed: u64) -> DynamicGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = n.div_ceil(2);
    let mut g = DynamicGraph::new(n);
    for (lo, hi) in [(0, half), (half, n)] {
        if hi - lo < 2 {
            continue;
        }
        for _ in 0..cycles {
            let mut perm: Vec<usize> = (lo..hi).collect();
            perm.shuffle(&mut rng);
            for i in 0..perm.len() {
                let (a, b) = (perm[i], perm[(i + 1) % perm.len()]);
                if a != b && (perm.len() > 2 || i == 0) {
                    g.insert_edge(a, b).expect("in range");
                }
            }
        }
    }
    for _ in 0..connectors {
        let u = rng.gen_range(0..half);
        let v = rng.gen_range(half..n);
        g.insert_edge(u, v).expect("in range");
    }
    g
}

/// `ops` random updates valid against `g` (deletions pick a uniform edge
/// unit, insertions a uniform pair), with a query after every
/// `query_every` updates.
pub fn random_stream(g: &DynamicGraph, ops: usize, query_every: usize, seed: u64) -> Vec<StreamItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = g.clone();
    let n = g.n();
    let mut out = Vec::new();
    for k in 1..=ops {
        let op = if cur.m() > 0 && rng.gen_bool(0.5) {
            let units = cur.edge_units();
            let (u, v) = units[rng.gen_range(0..units.len())];
            EdgeOp::Delete(u, v)
        } else {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            EdgeOp::Insert(u, v)
        };
        op.apply(&mut cur).expect("valid by construction");
        out.push(StreamItem::Update(op));
        if query_every > 0 && k % query_every == 0 {
            out.push(StreamItem::Query);
        }
    }
    out
}
