//! Synthetic graph generators in the style of the GAP benchmark suite.
//!
//! Both generators draw undirected pairs and insert each pair in both
//! directions. Edge sources are replayed from the seed twice (once to count
//! degrees, once to scatter), so no pair buffer is held in memory.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_csr, check_budget, CsrGraph, VertexId, DEFAULT_EDGE_BUDGET};
use crate::error::{Error, Result};

/// RMAT quadrant probabilities (A, B, C); D is the remainder.
pub const KRONECKER_PARAMS: (f64, f64, f64) = (0.57, 0.19, 0.19);

const PERMUTE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Directed edge slots a uniform graph with these parameters will hold.
pub fn nominal_edge_count(num_vertices: u64, avg_degree: f64) -> u128 {
    2 * undirected_pairs(num_vertices, avg_degree)
}

fn undirected_pairs(num_vertices: u64, avg_degree: f64) -> u128 {
    (num_vertices as f64 * avg_degree / 2.0).round() as u128
}

pub fn gen_uniform_random(num_vertices: u64, avg_degree: f64, seed: u64) -> Result<CsrGraph> {
    gen_uniform_random_with_budget(num_vertices, avg_degree, seed, DEFAULT_EDGE_BUDGET)
}

/// Uniform random graph: `num_vertices * avg_degree / 2` endpoint pairs drawn
/// uniformly, symmetrized, duplicates and self-loops kept.
pub fn gen_uniform_random_with_budget(
    num_vertices: u64,
    avg_degree: f64,
    seed: u64,
    budget: u64,
) -> Result<CsrGraph> {
    if num_vertices == 0 {
        return Err(Error::config("uniform generator needs at least one vertex"));
    }
    if !(avg_degree >= 0.0) || !avg_degree.is_finite() {
        return Err(Error::config(format!(
            "invalid average degree {avg_degree}"
        )));
    }
    let pairs = undirected_pairs(num_vertices, avg_degree);
    check_budget(num_vertices, 2 * pairs, budget)?;
    let pairs = pairs as u64;
    Ok(build_csr(num_vertices, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..pairs).flat_map(move |_| {
            let u = rng.gen_range(0..num_vertices);
            let v = rng.gen_range(0..num_vertices);
            [(u, v), (v, u)]
        })
    }))
}

pub fn gen_kronecker(scale: u32, edge_factor: f64, seed: u64) -> Result<CsrGraph> {
    gen_kronecker_with_budget(scale, edge_factor, seed, DEFAULT_EDGE_BUDGET)
}

/// Kronecker (RMAT) graph with `2^scale` vertices and `2^scale * edge_factor`
/// undirected pairs. Vertex IDs are randomly permuted after generation so
/// high-degree vertices are not clustered at low IDs.
pub fn gen_kronecker_with_budget(
    scale: u32,
    edge_factor: f64,
    seed: u64,
    budget: u64,
) -> Result<CsrGraph> {
    if scale == 0 || scale > 40 {
        return Err(Error::config(format!(
            "kronecker scale {scale} out of range 1..=40"
        )));
    }
    if !(edge_factor >= 0.0) || !edge_factor.is_finite() {
        return Err(Error::config(format!("invalid edge factor {edge_factor}")));
    }
    let num_vertices = 1u64 << scale;
    let pairs = (num_vertices as f64 * edge_factor).round() as u128;
    check_budget(num_vertices, 2 * pairs, budget)?;
    let pairs = pairs as u64;

    let mut perm: Vec<VertexId> = (0..num_vertices).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ PERMUTE_STREAM));

    let (a, b, c) = KRONECKER_PARAMS;
    let perm = &perm;
    Ok(build_csr(num_vertices, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..pairs).flat_map(move |_| {
            let (mut u, mut v) = (0u64, 0u64);
            for _ in 0..scale {
                let p: f64 = rng.gen();
                u <<= 1;
                v <<= 1;
                if p < a + b {
                    if p >= a {
                        v |= 1;
                    }
                } else {
                    u |= 1;
                    if p >= a + b + c {
                        v |= 1;
                    }
                }
            }
            let (u, v) = (perm[u as usize], perm[v as usize]);
            [(u, v), (v, u)]
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_degree_uniform_graph_is_empty() {
        let g = gen_uniform_random(16, 0.0, 3).unwrap();
        assert_eq!(g.num_vertices(), 16);
        assert_eq!(g.num_edges(), 0);
        assert!(g.offsets().iter().all(|&o| o == 0));
    }

    #[test]
    fn uniform_needs_a_vertex() {
        assert!(gen_uniform_random(0, 4.0, 1).is_err());
        assert!(gen_uniform_random(4, -1.0, 1).is_err());
    }

    #[test]
    fn urand27_nominal_size_exceeds_default_budget() {
        let n = 1u64 << 27;
        let edges = nominal_edge_count(n, 32.0);
        assert_eq!(edges, 4_294_967_296);
        // Table 1 rounds this to 4.4 billion edges (35.2 GB)
        let rel = (edges as f64 - 4.4e9).abs() / 4.4e9;
        assert!(rel < 0.03, "{rel}");
        let bytes = edges as f64 * 8.0;
        assert!((bytes - 35.2e9).abs() / 35.2e9 < 0.03);
        assert!(matches!(
            gen_uniform_random(n, 32.0, 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn kron27_parameters_match_table_sizes() {
        let n = 1u64 << 27;
        assert!((n as f64 - 134e6).abs() / 134e6 < 0.01);
        let slots = 2.0 * n as f64 * 16.0;
        assert!((slots - 4.2e9).abs() / 4.2e9 < 0.03);
        assert!(matches!(
            gen_kronecker(27, 16.0, 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn smallest_kronecker_is_valid() {
        let g = gen_kronecker(1, 1.0, 9).unwrap();
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.num_edges(), 4);
        g.validate().unwrap();
    }

    #[test]
    fn tight_budget_is_a_capacity_error() {
        let err = gen_uniform_random_with_budget(1024, 8.0, 1, 1024).unwrap_err();
        assert!(matches!(err, Error::Capacity { budget: 1024, .. }));
    }

    #[test]
    fn generators_are_reproducible() {
        assert_eq!(
            gen_uniform_random(1000, 6.0, 5).unwrap(),
            gen_uniform_random(1000, 6.0, 5).unwrap()
        );
        assert_eq!(
            gen_kronecker(10, 4.0, 5).unwrap(),
            gen_kronecker(10, 4.0, 5).unwrap()
        );
        assert_ne!(
            gen_kronecker(10, 4.0, 5).unwrap(),
            gen_kronecker(10, 4.0, 6).unwrap()
        );
    }
}
