//! Reference implementations used as oracles by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use extmem::graph::{CsrGraph, EdgeSublist};
use extmem::traversal::{AccessTrace, UNREACHED_DEPTH, UNREACHED_DIST};

/// CSR from (source, target) pairs by sorting, independent of the library's
/// counting-sort builder.
pub fn graph_from_pairs(n: u64, pairs: &[(u64, u64)]) -> CsrGraph {
    let mut sorted = pairs.to_vec();
    sorted.sort_unstable();
    let mut offsets = vec![0u64; n as usize + 1];
    for &(s, _) in &sorted {
        offsets[s as usize + 1] += 1;
    }
    for i in 0..n as usize {
        offsets[i + 1] += offsets[i];
    }
    let edges = sorted.iter().map(|&(_, t)| t).collect();
    CsrGraph::from_parts(offsets, edges).unwrap()
}

pub fn queue_bfs(g: &CsrGraph, src: u64) -> Vec<u32> {
    let mut depth = vec![UNREACHED_DEPTH; g.num_vertices() as usize];
    let mut q = VecDeque::new();
    depth[src as usize] = 0;
    q.push_back(src);
    while let Some(v) = q.pop_front() {
        for &u in g.neighbors(v) {
            if depth[u as usize] == UNREACHED_DEPTH {
                depth[u as usize] = depth[v as usize] + 1;
                q.push_back(u);
            }
        }
    }
    depth
}

pub fn dijkstra(g: &CsrGraph, src: u64, weights: &[u8]) -> Vec<u64> {
    let mut dist = vec![UNREACHED_DIST; g.num_vertices() as usize];
    let mut heap = BinaryHeap::new();
    dist[src as usize] = 0;
    heap.push(Reverse((0u64, src)));
    while let Some(Reverse((dv, v))) = heap.pop() {
        if dv > dist[v as usize] {
            continue;
        }
        let base = g.offsets()[v as usize] as usize;
        for (i, &u) in g.neighbors(v).iter().enumerate() {
            let cand = dv + weights[base + i] as u64;
            if cand < dist[u as usize] {
                dist[u as usize] = cand;
                heap.push(Reverse((cand, u)));
            }
        }
    }
    dist
}

/// Every `a`-block index whose byte range intersects the read, found by
/// scanning all blocks up to the read's end.
pub fn blocks_touched(read: &EdgeSublist, a: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if read.byte_length == 0 {
        return out;
    }
    let end = read.byte_offset + read.byte_length;
    let mut b = 0;
    while b * a < end {
        let (lo, hi) = (b * a, (b + 1) * a);
        if lo < end && hi > read.byte_offset {
            out.push(b);
        }
        b += 1;
    }
    out
}

/// Fetched bytes with no cache.
pub fn fetched_uncached(trace: &AccessTrace, a: u64) -> u64 {
    trace
        .reads()
        .iter()
        .map(|r| blocks_touched(r, a).len() as u64 * a)
        .sum()
}

/// Fetched bytes with a cache that never evicts.
pub fn fetched_unlimited(trace: &AccessTrace, a: u64) -> u64 {
    let set: BTreeSet<u64> = trace
        .reads()
        .iter()
        .flat_map(|r| blocks_touched(r, a))
        .collect();
    set.len() as u64 * a
}

/// Fetched bytes with an LRU cache of `slots` blocks, kept as a recency list.
pub fn fetched_lru(trace: &AccessTrace, a: u64, slots: usize) -> u64 {
    let mut recency: Vec<u64> = Vec::new();
    let mut misses = 0;
    for r in trace.reads() {
        for b in blocks_touched(r, a) {
            if let Some(pos) = recency.iter().position(|&x| x == b) {
                recency.remove(pos);
            } else {
                misses += 1;
                if slots == 0 {
                    continue;
                }
                if recency.len() == slots {
                    recency.remove(0);
                }
            }
            recency.push(b);
        }
    }
    misses * a
}

/// Request sizes of an uncached GPU replay: per 128 B line, the span of the
/// 32 B sectors the read touches.
pub fn gpu_requests(trace: &AccessTrace) -> BTreeMap<u64, u64> {
    let mut hist = BTreeMap::new();
    for r in trace.reads() {
        let sectors = blocks_touched(r, 32);
        let mut by_line: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for s in sectors {
            by_line.entry(s / 4).or_default().push(s);
        }
        for secs in by_line.values() {
            let size = (secs.last().unwrap() - secs[0] + 1) * 32;
            *hist.entry(size).or_insert(0) += 1;
        }
    }
    hist
}
