//! Acceptance suite. One line per criterion; exits nonzero if any fails.
//! Run with `cargo test -p dyncut --test acceptance`.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dyncut::families::{random_stream, Family};
use dyncut::hierarchy::LevelKind;
use dyncut::io::StreamItem;
use dyncut::localkcut::{first_in_batch, karger_global, local_k_cut, trials_for, LocalCutParams};
use dyncut::mirror::{Engine, EngineConfig, MirrorGraph, MirrorOp};
use dyncut::oracle::{
    enumerate_boundary_sparse, enumerate_gamma_extreme, exact_min_cut, exists_local_cut_below, min_local_cut_through,
    OracleLimits,
};
use dyncut::rng::derive;
use dyncut::sparsify::{probability_for, Sparsifier};
use dyncut::{DynamicGraph, EdgeOp, Hierarchy, InstanceAnswer, MasterState, Params, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const EPS: f64 = 0.1;
const HEIGHT: i32 = 3;
const QUERY_SHARE: f64 = 0.95;
const STATE_SHARE: f64 = 0.99;
const C1_BUDGET: Duration = Duration::from_secs(300);
const C1_TRIPLES_PER_FAMILY: u64 = 17;
const C3_STATES: usize = 1000;
const C4_RUNS: u64 = 10_000;
const C4_BATCHES: u64 = 100;
const C5_MIRRORS: u64 = 200;
const C5_OPS: usize = 50;
const C5_MAX_VOLUME: u64 = 30;
const C6_SEEDS: u64 = 200;
const C7_SPLIT_CONSTANT: f64 = 2.0;
const C8_REPS: u64 = 100;

fn instance_tolerance() -> f64 {
    (1.0 + 2.0 * EPS).powi(HEIGHT)
}

fn master_tolerance() -> f64 {
    instance_tolerance() * (1.0 + EPS).powi(2)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn share(hits: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        hits as f64 / total as f64
    }
}

fn exact(g: &DynamicGraph) -> u64 {
    exact_min_cut(g).expect("oracle").boundary
}

#[derive(Default)]
struct AmortizationTally {
    instances: usize,
    cost_ok: usize,
    resp_ok: usize,
    worst_cost: f64,
    worst_resp: u64,
}

impl AmortizationTally {
    /// Split cost against c(m+U)log(m+U) and responsibility against its
    /// bound for every instance of a finished run.
    fn record(&mut self, m: &MasterState, initial_edges: u64, updates: u64) {
        let bound_resp = m.params().responsibility_bound();
        for inst in m.instances() {
            self.instances += 1;
            let mu = (initial_edges + updates) as f64;
            let bound = C7_SPLIT_CONSTANT * mu * mu.log2();
            let cost = inst.hierarchy.split_cost() as f64;
            self.worst_cost = self.worst_cost.max(cost / bound);
            if cost <= bound {
                self.cost_ok += 1;
            }
            let st = &inst.hierarchy.stats;
            let resp = st.static_responsibility.max(st.dynamic_responsibility);
            self.worst_resp = self.worst_resp.max(resp);
            if resp <= bound_resp {
                self.resp_ok += 1;
            }
        }
    }
}

/// End-to-end approximation through the master ladder.
fn c1_end_to_end(tally: &mut AmortizationTally) -> Outcome {
    let params = Params::desk();
    let start = Instant::now();
    let (mut queries, mut answered, mut in_tol, mut exact_ok) = (0, 0, 0, 0);
    let mut triples = 0;
    for (fi, fam) in Family::ALL.iter().enumerate() {
        for t in 0..C1_TRIPLES_PER_FAMILY {
            triples += 1;
            let seed = derive(0xC1, (fi as u64) << 16 | t);
            let g = fam.generate(14, 50, seed);
            let stream = random_stream(&g, 100, 5, derive(seed, 1));
            let mut m = MasterState::new(&g, &params, derive(seed, 2)).expect("build");
            let mut updates = 0;
            for item in stream {
                match item {
                    StreamItem::Update(op) => {
                        updates += 1;
                        m.apply_update(op).expect("valid stream");
                    }
                    StreamItem::Query => {
                        queries += 1;
                        let Some(q) = m.query() else { continue };
                        answered += 1;
                        let ratio = q.value / exact(m.source()) as f64;
                        if (1.0..=master_tolerance()).contains(&ratio) {
                            in_tol += 1;
                        }
                        let (_, boundary) = m.extract_cut(&q).expect("extract");
                        if boundary == q.raw {
                            exact_ok += 1;
                        }
                    }
                }
            }
            tally.record(&m, g.m(), updates);
        }
    }
    let elapsed = start.elapsed();
    let pass = triples >= 50
        && answered > 0
        && share(in_tol, answered) >= QUERY_SHARE
        && exact_ok == answered
        && elapsed < C1_BUDGET;
    outcome(
        pass,
        format!(
            "{triples} triples, {answered}/{queries} queries answered, {in_tol} within {:.4}, exact boundary {exact_ok}/{answered}, {:.1}s",
            master_tolerance(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Single p = 1 instance against the oracle at every step.
fn c2_bounded_instance() -> Outcome {
    let params = Params::desk();
    let (mut window, mut window_ok, mut above, mut above_ok, mut below) = (0, 0, 0, 0, 0);
    for (fi, fam) in Family::ALL.iter().enumerate() {
        for t in 0..10u64 {
            let seed = derive(0xC2, (fi as u64) << 16 | t);
            let g = fam.generate(12, 40, seed);
            let stream = random_stream(&g, 60, 0, derive(seed, 1));
            let mut cur = g.clone();
            let mut h = Hierarchy::static_build(&g, &params, derive(seed, 2));
            let mut check = |h: &Hierarchy, cur: &DynamicGraph| {
                let lam = exact(cur) as f64;
                let ans = h.query();
                if lam < params.lambda_min {
                    below += 1;
                } else if lam <= params.lambda_max {
                    window += 1;
                    if let InstanceAnswer::Value(v, _) = ans {
                        if v as f64 >= lam && v as f64 <= instance_tolerance() * lam {
                            window_ok += 1;
                        }
                    }
                } else {
                    above += 1;
                    match ans {
                        InstanceAnswer::AboveMax => above_ok += 1,
                        InstanceAnswer::Value(v, _) if v as f64 > params.lambda_max => above_ok += 1,
                        _ => {}
                    }
                }
            };
            check(&h, &cur);
            for item in stream {
                if let StreamItem::Update(op) = item {
                    op.apply(&mut cur).expect("valid stream");
                    h.apply_update(&op.into()).expect("update");
                    check(&h, &cur);
                }
            }
        }
    }
    let pass = window > 0 && share(window_ok, window) >= QUERY_SHARE && above_ok == above;
    outcome(
        pass,
        format!("in window {window_ok}/{window}, above max {above_ok}/{above}, below min {below} (unchecked)"),
    )
}

#[derive(Default)]
struct InvariantTally {
    states: usize,
    clean: usize,
    clusters_checked: usize,
    max_volume: u64,
}

fn check_invariant(h: &Hierarchy, params: &Params, t: &mut InvariantTally) {
    let limits = OracleLimits::default();
    let mut ok = true;
    for level in h.levels() {
        if level.kind != LevelKind::Decomposed {
            continue;
        }
        let d = level.decomposition.as_ref().expect("decomposed level");
        for c in d.clusters().filter(|c| !c.frozen && c.members.len() > 1) {
            let members = c.member_set();
            t.max_volume = t.max_volume.max(level.graph.volume(&members));
            t.clusters_checked += 1;
            let found = enumerate_boundary_sparse(
                &level.graph,
                &members,
                params.eps,
                params.lambda_max,
                params.find_nu(),
                &limits,
            )
            .expect("oracle");
            ok &= found.is_empty();
        }
    }
    t.states += 1;
    if ok {
        t.clean += 1;
    }
}

/// No unfrozen cluster of a decomposed level holds a qualifying
/// boundary-sparse cut.
fn c3_invariant() -> Outcome {
    let params = Params::desk();
    let mut t = InvariantTally::default();
    let mut run = 0u64;
    while t.states < C3_STATES {
        let fam = Family::ALL[(run % 3) as usize];
        let seed = derive(0xC3, run);
        let g = fam.generate(12, 40, seed);
        let mut h = Hierarchy::static_build(&g, &params, derive(seed, 2));
        check_invariant(&h, &params, &mut t);
        for item in random_stream(&g, 100, 0, derive(seed, 1)) {
            if let StreamItem::Update(op) = item {
                h.apply_update(&op.into()).expect("update");
                check_invariant(&h, &params, &mut t);
            }
        }
        run += 1;
    }
    let pass = share(t.clean, t.states) >= STATE_SHARE && t.clusters_checked > 0;
    outcome(
        pass,
        format!(
            "{}/{} states clean, {} unfrozen cluster checks, largest checked volume {}",
            t.clean, t.states, t.clusters_checked, t.max_volume
        ),
    )
}

fn random_connected(n: usize, p: f64, seed: u64) -> DynamicGraph {
    let mut t = 0;
    loop {
        let g = dyncut::families::gnp(n, p, derive(seed, t));
        if g.components(&VertexSet::range(n)).len() == 1 {
            return g;
        }
        t += 1;
    }
}

fn hits(g: &DynamicGraph, s: &VertexSet, boundary: u64, volume: u64, seed: u64) -> u64 {
    let params = LocalCutParams { nu: volume as f64 + 1.0, k: boundary as f64, trials: 1, seed };
    let v = s.as_slice()[0];
    (0..C4_RUNS).filter(|&r| local_k_cut(g, v, &params, r).cuts().any(|c| &c.side == s)).count() as u64
}

/// Single-run hit frequencies of extreme sets and batch detection of
/// 1/3-extreme sets.
fn c4_local_k_cut() -> Outcome {
    let limits = OracleLimits::default();
    let gamma = 1.0 / 3.0;
    let (mut extreme, mut extreme_ok, mut worst) = (0, 0, f64::INFINITY);
    let (mut gsets, mut gfreq_ok, mut batches_total_ok, mut gbatch_sets) = (0, 0, 0, 0);
    let mut all_batches_pass = true;
    for gi in 0..10u64 {
        let n = 6 + (gi % 3) as usize;
        let g = random_connected(n, 0.5, derive(0xC4, gi));
        let extremes = enumerate_gamma_extreme(&g, 1.0, f64::INFINITY, f64::INFINITY, &limits).expect("oracle");
        let extreme_sides: BTreeSet<VertexSet> = extremes.iter().map(|x| x.cut.side.clone()).collect();
        for x in extremes.iter().filter(|x| x.connected && x.cut.side.len() <= 5) {
            extreme += 1;
            let s = &x.cut.side;
            let f = hits(&g, s, x.cut.boundary, x.cut.volume, derive(gi, extreme)) as f64 / C4_RUNS as f64;
            let bound = 0.1 / (s.len() * s.len()) as f64;
            worst = worst.min(f / bound);
            if f >= bound {
                extreme_ok += 1;
            }
        }
        let gammas = enumerate_gamma_extreme(&g, gamma, f64::INFINITY, f64::INFINITY, &limits).expect("oracle");
        for x in gammas.iter().filter(|x| x.connected && x.cut.side.len() <= 5 && !extreme_sides.contains(&x.cut.side))
        {
            gsets += 1;
            let s = &x.cut.side;
            let c = x.cut.boundary;
            let f = hits(&g, s, c, x.cut.volume, derive(gi, 1000 + gsets));
            if f == 0 {
                all_batches_pass = false;
                continue;
            }
            gfreq_ok += 1;
            gbatch_sets += 1;
            let p_lower = (0.1 * (s.len() as f64).powf(-2.0 / gamma) * (c as f64).powf(-2.0 / gamma + 2.0)).min(1.0);
            let trials = trials_for(p_lower, 10.0, n as f64);
            let mut found = 0;
            for b in 0..C4_BATCHES {
                let params = LocalCutParams {
                    nu: x.cut.volume as f64 + 1.0,
                    k: c as f64,
                    trials,
                    seed: derive(derive(gi, 2000 + gsets), b),
                };
                if first_in_batch(&g, s.as_slice()[0], &params, |cut| &cut.side == s).is_some() {
                    found += 1;
                }
            }
            if found >= 99 {
                batches_total_ok += 1;
            } else {
                all_batches_pass = false;
            }
        }
    }
    let pass = extreme > 0 && extreme_ok == extreme && gsets > 0 && gfreq_ok == gsets && all_batches_pass;
    outcome(
        pass,
        format!(
            "extreme sets {extreme_ok}/{extreme} at >= 0.1|S|^-2 (worst ratio {worst:.2}), 1/3-extreme sets seen {gfreq_ok}/{gsets}, batch >= 99/100 for {batches_total_ok}/{gbatch_sets}"
        ),
    )
}

fn random_mirror(rng: &mut ChaCha8Rng) -> (MirrorGraph, usize) {
    loop {
        let n = rng.gen_range(8..=11);
        let mut level = DynamicGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(0.35) {
                    level.insert_edges(u, v, rng.gen_range(1..=2)).expect("in range");
                }
            }
        }
        let k = rng.gen_range(4..=8);
        let mut ids: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            ids.swap(i, j);
        }
        let members = VertexSet::new(ids[..k].to_vec());
        let m = MirrorGraph::build(&level, &members, true);
        if m.total_volume() <= C5_MAX_VOLUME && m.total_volume() >= 12 {
            return (m, n);
        }
    }
}

fn random_mirror_op(m: &MirrorGraph, rng: &mut ChaCha8Rng) -> MirrorOp {
    let alive = m.alive();
    let units: Vec<(usize, usize)> = m.graph().edge_units();
    let roll = rng.gen::<f64>();
    if roll < 0.08 && m.members().len() > 2 {
        let members = m.members();
        return MirrorOp::Shrink { removed: vec![members.as_slice()[rng.gen_range(0..members.len())]] };
    }
    if (roll < 0.54 && m.total_volume() + 2 <= C5_MAX_VOLUME) || units.is_empty() {
        let a = alive.as_slice()[rng.gen_range(0..alive.len())];
        let mut b = a;
        while b == a {
            b = alive.as_slice()[rng.gen_range(0..alive.len())];
        }
        return MirrorOp::Insert(a, b);
    }
    let (a, b) = units[rng.gen_range(0..units.len())];
    MirrorOp::Delete(a, b)
}

/// Buffer detection and mirror-cut store against exhaustive scans.
fn c5_buffer_and_mirror() -> Outcome {
    let limits = OracleLimits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    let (mut states, mut buffer_ok, mut quiescent, mut mirror_ok, mut stored, mut stored_exact) = (0, 0, 0, 0, 0, 0);
    for i in 0..C5_MIRRORS {
        let (m, n) = random_mirror(&mut rng);
        let mut params = Params::desk();
        params.lambda_min = [2.0, 3.0, 4.0][(i % 3) as usize];
        params.lambda_max = 1.2 * params.lambda_min;
        let cfg = EngineConfig::from_params(&params, n, derive(0xC5, i));
        let mut e = Engine::build(m, cfg);
        for _ in 0..=C5_OPS {
            states += 1;
            let w = e.working();
            let truth = exists_local_cut_below(w.graph(), &w.alive(), cfg.local_bound, cfg.lambda_min, &limits)
                .expect("oracle");
            if truth == e.has_small_cut() {
                buffer_ok += 1;
            }
            if !e.has_small_cut() {
                quiescent += 1;
                let h = e.buffer().output();
                let alive = h.alive();
                let want = h
                    .members()
                    .iter()
                    .filter_map(|&v| {
                        min_local_cut_through(h.graph(), &alive, v, cfg.local_bound, cfg.lambda_max, &limits)
                            .expect("oracle")
                            .map(|c| c.boundary)
                    })
                    .min();
                if e.min_mirror_cut().map(|c| c.boundary) == want {
                    mirror_ok += 1;
                }
                for (_, c) in e.store().cuts() {
                    stored += 1;
                    if c.value == h.graph().boundary(&c.members) {
                        stored_exact += 1;
                    }
                }
            }
            let op = random_mirror_op(e.working(), &mut rng);
            e.handle(op).expect("valid op");
        }
    }
    let pass =
        share(buffer_ok, states) >= STATE_SHARE && share(mirror_ok, quiescent) >= STATE_SHARE && stored_exact == stored;
    outcome(
        pass,
        format!(
            "small-cut flag {buffer_ok}/{states}, min mirror cut {mirror_ok}/{quiescent} flushed states, stored values exact {stored_exact}/{stored}"
        ),
    )
}

/// Sampled min cut of a dense multigraph stays within (1 ± ε)pλ.
fn c6_sparsifier() -> Outcome {
    // K12 with every edge doubled 40 times: λ = 440. A simple 12-vertex
    // graph cannot reach p < 1 for any ε < 1.
    let n = 12;
    let mult = 40;
    let eps = 0.75;
    let mut g = DynamicGraph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            g.insert_edges(u, v, mult).expect("in range");
        }
    }
    let lam = exact(&g) as f64;
    let p = probability_for(lam, eps, n as f64);
    let edges = g.edge_units();
    let mut inside = 0;
    for seed in 0..C6_SEEDS {
        let mut s = Sparsifier::new(n, p, derive(0xC6, seed));
        for &(u, v) in &edges {
            s.apply_update(EdgeOp::Insert(u, v)).expect("insert");
        }
        let sampled = exact(s.shadow()) as f64;
        if sampled >= (1.0 - eps) * p * lam && sampled <= (1.0 + eps) * p * lam {
            inside += 1;
        }
    }
    let pass = p < 1.0 && share(inside, C6_SEEDS as usize) >= QUERY_SHARE;
    outcome(pass, format!("λ = {lam}, ε = {eps}, p = {p:.4}, {inside}/{C6_SEEDS} seeds inside"))
}

type Trace = Vec<String>;

fn master_trace(g: &DynamicGraph, stream: &[StreamItem], seed: u64, parallel: bool) -> (Trace, MasterState) {
    let mut m = MasterState::new(g, &Params::desk(), seed).expect("build");
    m.set_parallel(parallel);
    let mut trace = Vec::new();
    for item in stream {
        match item {
            StreamItem::Update(op) => m.apply_update(*op).expect("valid stream"),
            StreamItem::Query => {
                trace.push(format!("{:?}", m.query()));
                for inst in m.instances() {
                    trace.push(format!("{:?} {:?}", inst.hierarchy.query(), inst.hierarchy.level_rows()));
                }
            }
        }
    }
    (trace, m)
}

/// Identical seeds give identical traces; split cost and responsibility
/// (tallied over the end-to-end runs) stay within their bounds.
fn c7_determinism_and_amortization(t: &AmortizationTally) -> Outcome {
    let (mut runs, mut same) = (0, 0);
    for (fi, fam) in Family::ALL.iter().enumerate() {
        let seed = derive(0xC7, fi as u64);
        let g = fam.generate(14, 50, seed);
        let stream = random_stream(&g, 100, 5, derive(seed, 1));
        let (a, _) = master_trace(&g, &stream, derive(seed, 2), false);
        let (b, _) = master_trace(&g, &stream, derive(seed, 2), false);
        let (c, _) = master_trace(&g, &stream, derive(seed, 2), true);
        runs += 1;
        if a == b && a == c {
            same += 1;
        }
    }
    let pass = same == runs && t.instances > 0 && t.cost_ok == t.instances && t.resp_ok == t.instances;
    outcome(
        pass,
        format!(
            "identical traces {same}/{runs} (repeat and parallel), split cost within {C7_SPLIT_CONSTANT}(m+U)log(m+U) {}/{} instances (worst {:.3} of bound), responsibility <= {} {}/{} (max {})",
            t.cost_ok,
            t.instances,
            t.worst_cost,
            Params::desk().responsibility_bound(),
            t.resp_ok,
            t.instances,
            t.worst_resp
        ),
    )
}

/// Global contraction finds the min cut within ⌈10 ln n C(n,2)⌉ runs.
fn c8_karger() -> Outcome {
    let mut graphs =
        vec![("C5".to_string(), DynamicGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).expect("C5"))];
    for i in 0..5u64 {
        let n = 6 + (i % 3) as usize;
        graphs.push((format!("G{i}(n={n})"), random_connected(n, 0.5, derive(0xC8, i))));
    }
    let mut parts = Vec::new();
    let mut pass = true;
    for (gi, (name, g)) in graphs.iter().enumerate() {
        let n = g.n() as f64;
        let runs = (10.0 * n.ln() * n * (n - 1.0) / 2.0).ceil() as u64;
        let lam = exact(g);
        let mut ok = 0;
        for rep in 0..C8_REPS {
            let base = derive(derive(0xC8, gi as u64), rep);
            if (0..runs).any(|r| karger_global(g, derive(base, r)).expect("connected").boundary == lam) {
                ok += 1;
            }
        }
        pass &= ok >= 99;
        parts.push(format!("{name} {ok}/{C8_REPS} in {runs} runs"));
    }
    outcome(pass, parts.join(", "))
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        // Test discovery: report nothing so filters never skip the suite silently.
        return ExitCode::SUCCESS;
    }
    let mut tally = AmortizationTally::default();
    let mut failed = 0;
    let mut report = |i: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {i}: {} {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    };
    report(1, "end-to-end approximation", &mut || c1_end_to_end(&mut tally));
    report(2, "bounded instance", &mut c2_bounded_instance);
    report(3, "sparse-cut invariant", &mut c3_invariant);
    report(4, "local k-cut hit rates", &mut c4_local_k_cut);
    report(5, "buffer and mirror correctness", &mut c5_buffer_and_mirror);
    report(6, "sparsifier concentration", &mut c6_sparsifier);
    report(7, "determinism and amortization", &mut || c7_determinism_and_amortization(&tally));
    report(8, "global contraction calibration", &mut c8_karger);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
