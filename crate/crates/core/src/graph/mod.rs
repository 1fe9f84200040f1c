//! Compressed sparse row graphs and their edge sublists.
//!
//! The vertex list (`offsets`) stays in device memory; the edge list is what
//! lives on external memory, so every byte quantity here is measured from the
//! start of the edge list with 8-byte vertex IDs.

mod gen;
mod io;

pub use gen::{
    gen_kronecker, gen_kronecker_with_budget, gen_uniform_random, gen_uniform_random_with_budget,
    nominal_edge_count, KRONECKER_PARAMS,
};
pub use io::{
    load_csr, load_edge_list, load_edge_list_sized, parse_edge_list, read_csr, save_csr, write_csr,
    Directedness, CSR_HEADER_LEN, CSR_MAGIC, CSR_VERSION,
};

use crate::error::{Error, Result};

/// Vertex identifier. Serialized as a 64-bit little-endian integer.
pub type VertexId = u64;

/// Bytes per vertex ID in the edge list.
pub const ID_BYTES: u64 = 8;

/// Default ceiling on the bytes a constructor may allocate for the edge list.
pub const DEFAULT_EDGE_BUDGET: u64 = 4 << 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    offsets: Vec<u64>,
    edges: Vec<VertexId>,
}

/// Byte range of one vertex's neighbor IDs inside the edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSublist {
    pub byte_offset: u64,
    pub byte_length: u64,
}

impl EdgeSublist {
    pub fn end(&self) -> u64 {
        self.byte_offset + self.byte_length
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    pub num_vertices: u64,
    /// Raw directed edge slots, duplicates included.
    pub num_edges: u64,
    /// Edge slots after removing repeated (source, target) pairs.
    pub distinct_edges: u64,
    pub nonzero_vertices: u64,
    pub max_degree: u64,
    /// Mean degree over vertices with at least one out-edge.
    pub avg_degree_nonzero: f64,
    pub avg_sublist_bytes: f64,
    /// Set when every vertex has degree zero; the averages are then 0.
    pub all_zero_degree: bool,
}

impl CsrGraph {
    /// Builds a graph from raw arrays, checking every CSR invariant.
    pub fn from_parts(offsets: Vec<u64>, edges: Vec<VertexId>) -> Result<Self> {
        let g = CsrGraph { offsets, edges };
        g.validate()?;
        Ok(g)
    }

    pub(crate) fn from_parts_unchecked(offsets: Vec<u64>, edges: Vec<VertexId>) -> Self {
        debug_assert!(CsrGraph::from_parts(offsets.clone(), edges.clone()).is_ok());
        CsrGraph { offsets, edges }
    }

    pub fn empty(num_vertices: u64) -> Self {
        CsrGraph {
            offsets: vec![0; num_vertices as usize + 1],
            edges: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Some(&first) = self.offsets.first() else {
            return Err(Error::format(
                "offsets array must have num_vertices + 1 entries",
            ));
        };
        if first != 0 {
            return Err(Error::format("offsets[0] must be 0"));
        }
        if let Some(w) = self.offsets.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::format(format!("offsets decrease at vertex {w}")));
        }
        if *self.offsets.last().unwrap() != self.edges.len() as u64 {
            return Err(Error::format("offsets[num_vertices] must equal num_edges"));
        }
        let n = self.num_vertices();
        if let Some(&bad) = self.edges.iter().find(|&&t| t >= n) {
            return Err(Error::VertexOutOfRange {
                vertex: bad,
                num_vertices: n,
            });
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> u64 {
        self.offsets.len() as u64 - 1
    }

    pub fn num_edges(&self) -> u64 {
        self.edges.len() as u64
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn edges(&self) -> &[VertexId] {
        &self.edges
    }

    /// Size of the edge list on external memory.
    pub fn edge_list_bytes(&self) -> u64 {
        self.num_edges() * ID_BYTES
    }

    pub fn degree(&self, v: VertexId) -> u64 {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.edges[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Index of `v`'s first edge; per-edge arrays (weights) share this indexing.
    pub fn edge_range(&self, v: VertexId) -> std::ops::Range<usize> {
        let v = v as usize;
        self.offsets[v] as usize..self.offsets[v + 1] as usize
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                num_vertices: self.num_vertices(),
            })
        }
    }

    pub fn sublist(&self, v: VertexId) -> Result<EdgeSublist> {
        self.check_vertex(v)?;
        Ok(self.sublist_unchecked(v))
    }

    pub(crate) fn sublist_unchecked(&self, v: VertexId) -> EdgeSublist {
        let v = v as usize;
        EdgeSublist {
            byte_offset: self.offsets[v] * ID_BYTES,
            byte_length: (self.offsets[v + 1] - self.offsets[v]) * ID_BYTES,
        }
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let mut nonzero = 0u64;
        let mut max_degree = 0u64;
        let mut distinct = 0u64;
        for v in 0..self.num_vertices() {
            let nbrs = self.neighbors(v);
            if nbrs.is_empty() {
                continue;
            }
            nonzero += 1;
            max_degree = max_degree.max(nbrs.len() as u64);
            // targets are sorted, so repeats are adjacent
            distinct += 1 + nbrs.windows(2).filter(|w| w[0] != w[1]).count() as u64;
        }
        let num_edges = self.num_edges();
        let avg = if nonzero == 0 {
            0.0
        } else {
            num_edges as f64 / nonzero as f64
        };
        DegreeStats {
            num_vertices: self.num_vertices(),
            num_edges,
            distinct_edges: distinct,
            nonzero_vertices: nonzero,
            max_degree,
            avg_degree_nonzero: avg,
            avg_sublist_bytes: avg * ID_BYTES as f64,
            all_zero_degree: nonzero == 0,
        }
    }
}

/// Builds a CSR from a replayable stream of (source, target) pairs in two
/// passes: count degrees, then scatter. Targets end up sorted per source.
pub(crate) fn build_csr<I, F>(num_vertices: u64, mut pairs: F) -> CsrGraph
where
    F: FnMut() -> I,
    I: Iterator<Item = (VertexId, VertexId)>,
{
    let n = num_vertices as usize;
    let mut offsets = vec![0u64; n + 1];
    for (src, _) in pairs() {
        offsets[src as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor: Vec<u64> = offsets[..n].to_vec();
    let mut edges = vec![0u64; offsets[n] as usize];
    for (src, dst) in pairs() {
        let slot = &mut cursor[src as usize];
        edges[*slot as usize] = dst;
        *slot += 1;
    }
    for v in 0..n {
        edges[offsets[v] as usize..offsets[v + 1] as usize].sort_unstable();
    }
    CsrGraph::from_parts_unchecked(offsets, edges)
}

pub(crate) fn check_budget(num_vertices: u64, num_edges: u128, budget: u64) -> Result<()> {
    let requested = (num_edges + num_vertices as u128 + 1) * ID_BYTES as u128;
    if requested > budget as u128 {
        return Err(Error::Capacity { requested, budget });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_like() -> CsrGraph {
        // vertex 1 points to five vertices
        CsrGraph::from_parts(vec![0, 2, 7, 7, 9], vec![1, 2, 0, 1, 2, 3, 3, 0, 1]).unwrap()
    }

    #[test]
    fn sublist_of_five_targets_is_forty_bytes() {
        let g = fig1_like();
        let s = g.sublist(1).unwrap();
        assert_eq!(s.byte_offset, 16);
        assert_eq!(s.byte_length, 40);
    }

    #[test]
    fn zero_degree_and_last_vertex_sublists() {
        let g = fig1_like();
        assert_eq!(g.sublist(2).unwrap().byte_length, 0);
        let last = g.sublist(3).unwrap();
        assert_eq!(last.end(), g.num_edges() * 8);
    }

    #[test]
    fn sublist_out_of_range() {
        let g = fig1_like();
        assert!(matches!(
            g.sublist(4),
            Err(Error::VertexOutOfRange { vertex: 4, .. })
        ));
    }

    #[test]
    fn validate_rejects_bad_arrays() {
        assert!(CsrGraph::from_parts(vec![1, 1], vec![0]).is_err());
        assert!(CsrGraph::from_parts(vec![0, 2, 1], vec![0, 0]).is_err());
        assert!(CsrGraph::from_parts(vec![0, 1], vec![0, 0]).is_err());
        assert!(CsrGraph::from_parts(vec![0, 1], vec![5]).is_err());
        assert!(CsrGraph::from_parts(vec![], vec![]).is_err());
    }

    #[test]
    fn degree_stats_excludes_zero_degree() {
        let g = CsrGraph::from_parts(vec![0, 1, 3, 3], vec![1, 0, 2]).unwrap();
        let s = g.degree_stats();
        assert_eq!(s.avg_degree_nonzero, 1.5);
        assert_eq!(s.avg_sublist_bytes, 12.0);
        assert_eq!(s.nonzero_vertices, 2);
        assert!(!s.all_zero_degree);
    }

    #[test]
    fn degree_stats_all_zero_flag() {
        let s = CsrGraph::empty(5).degree_stats();
        assert!(s.all_zero_degree);
        assert_eq!(s.avg_degree_nonzero, 0.0);
    }

    #[test]
    fn distinct_edges_counts_duplicates_once() {
        let g = CsrGraph::from_parts(vec![0, 3, 4], vec![1, 1, 1, 0]).unwrap();
        let s = g.degree_stats();
        assert_eq!(s.num_edges, 4);
        assert_eq!(s.distinct_edges, 2);
    }
}
