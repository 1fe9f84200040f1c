//! Frontier-based traversals that record which edge sublists they read.
//!
//! Only edge-list reads are traced. Vertex-list and per-vertex state accesses
//! are assumed to hit device memory.

mod trace;

pub use trace::{AccessTrace, TRACE_HEADER_LEN, TRACE_MAGIC, TRACE_RECORD_LEN, TRACE_VERSION};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{CsrGraph, VertexId};

pub const UNREACHED_DEPTH: u32 = u32::MAX;
pub const UNREACHED_DIST: u64 = u64::MAX;

/// Weight seed that yields unit weights, reducing SSSP to BFS.
pub const UNIT_WEIGHT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsResult {
    /// Depth per vertex, `UNREACHED_DEPTH` when not reached.
    pub depth_of: Vec<u32>,
    /// Number of vertices discovered at each depth.
    pub frontier_sizes: Vec<u64>,
}

impl BfsResult {
    pub fn depth(&self, v: VertexId) -> Option<u32> {
        match self.depth_of[v as usize] {
            UNREACHED_DEPTH => None,
            d => Some(d),
        }
    }

    pub fn reached(&self) -> u64 {
        self.frontier_sizes.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsspResult {
    /// Distance per vertex, `UNREACHED_DIST` when not reached.
    pub dist_of: Vec<u64>,
    /// Relaxation rounds executed, one per trace step.
    pub iterations: u32,
}

impl SsspResult {
    pub fn dist(&self, v: VertexId) -> Option<u64> {
        match self.dist_of[v as usize] {
            UNREACHED_DIST => None,
            d => Some(d),
        }
    }
}

/// Level-synchronous BFS. Step `k` of the trace reads the sublist of every
/// depth-`k` vertex once, in ascending vertex order.
pub fn bfs(graph: &CsrGraph, source: VertexId) -> Result<(BfsResult, AccessTrace)> {
    graph.check_vertex(source)?;
    let mut depth_of = vec![UNREACHED_DEPTH; graph.num_vertices() as usize];
    let mut frontier_sizes = Vec::new();
    let mut trace = AccessTrace::new();

    depth_of[source as usize] = 0;
    let mut frontier = vec![source];
    let mut depth = 0u32;
    while !frontier.is_empty() {
        frontier_sizes.push(frontier.len() as u64);
        trace.begin_step();
        let mut next = Vec::new();
        for &v in &frontier {
            trace.push(graph.sublist_unchecked(v));
            for &u in graph.neighbors(v) {
                let d = &mut depth_of[u as usize];
                if *d == UNREACHED_DEPTH {
                    *d = depth + 1;
                    next.push(u);
                }
            }
        }
        next.sort_unstable();
        frontier = next;
        depth += 1;
    }
    Ok((
        BfsResult {
            depth_of,
            frontier_sizes,
        },
        trace,
    ))
}

/// Deterministic per-edge weights in `1..=255`, indexed like the edge list.
/// [`UNIT_WEIGHT_SEED`] gives all ones.
pub fn synth_weights(graph: &CsrGraph, weight_seed: u64) -> Vec<u8> {
    let m = graph.num_edges() as usize;
    if weight_seed == UNIT_WEIGHT_SEED {
        return vec![1; m];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(weight_seed);
    (0..m).map(|_| rng.gen_range(1..=255u8)).collect()
}

pub fn sssp(
    graph: &CsrGraph,
    source: VertexId,
    weight_seed: u64,
) -> Result<(SsspResult, AccessTrace)> {
    let weights = synth_weights(graph, weight_seed);
    sssp_with_weights(graph, source, &weights)
}

/// Frontier Bellman-Ford: each round reads the sublists of the vertices whose
/// distance improved in the previous round, in ascending order. A vertex
/// re-activated in a later round is read again and counted again.
pub fn sssp_with_weights(
    graph: &CsrGraph,
    source: VertexId,
    weights: &[u8],
) -> Result<(SsspResult, AccessTrace)> {
    graph.check_vertex(source)?;
    if weights.len() as u64 != graph.num_edges() {
        return Err(crate::error::Error::config(format!(
            "{} weights for {} edges",
            weights.len(),
            graph.num_edges()
        )));
    }
    let n = graph.num_vertices() as usize;
    let mut dist_of = vec![UNREACHED_DIST; n];
    let mut queued = vec![false; n];
    let mut trace = AccessTrace::new();

    dist_of[source as usize] = 0;
    let mut active = vec![source];
    let mut iterations = 0u32;
    while !active.is_empty() {
        iterations += 1;
        trace.begin_step();
        let mut next = Vec::new();
        for &v in &active {
            queued[v as usize] = false;
        }
        for &v in &active {
            trace.push(graph.sublist_unchecked(v));
            let base = dist_of[v as usize];
            let range = graph.edge_range(v);
            for (&u, &w) in graph.edges()[range.clone()].iter().zip(&weights[range]) {
                let cand = base + w as u64;
                let du = &mut dist_of[u as usize];
                if cand < *du {
                    *du = cand;
                    if !queued[u as usize] {
                        queued[u as usize] = true;
                        next.push(u);
                    }
                }
            }
        }
        next.sort_unstable();
        active = next;
    }
    Ok((
        SsspResult {
            dist_of,
            iterations,
        },
        trace,
    ))
}

/// Random source with at least one out-edge, drawn from a seeded stream.
/// `None` when every vertex has degree zero.
pub fn pick_source(graph: &CsrGraph, seed: u64) -> Option<VertexId> {
    let n = graph.num_vertices();
    if n == 0 || graph.num_edges() == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v = rng.gen_range(0..n);
        if graph.degree(v) > 0 {
            return Some(v);
        }
    }
}

/// `(depth, vertex count)` rows recomputed from the per-vertex depths.
pub fn frontier_histogram(result: &BfsResult) -> Vec<(u32, u64)> {
    let mut counts: Vec<u64> = Vec::new();
    for &d in &result.depth_of {
        if d == UNREACHED_DEPTH {
            continue;
        }
        let d = d as usize;
        if counts.len() <= d {
            counts.resize(d + 1, 0);
        }
        counts[d] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(d, c)| (d as u32, c))
        .collect()
}
