//! Generate uniform and Kronecker graphs, print their degree statistics and
//! round-trip one through the binary CSR format.

use extmem::graph::{gen_kronecker, gen_uniform_random, load_csr, save_csr};

pub fn run_example() -> extmem::Result<()> {
    let urand = gen_uniform_random(1 << 14, 32.0, 1)?;
    let kron = gen_kronecker(14, 16.0, 1)?;

    println!("graph      vertices      edges   distinct  nonzero  max_deg  avg_deg  avg_sublist_B");
    for (name, g) in [("urand14", &urand), ("kron14", &kron)] {
        let s = g.degree_stats();
        println!(
            "{name:<8} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8.2} {:>14.1}",
            s.num_vertices,
            s.num_edges,
            s.distinct_edges,
            s.nonzero_vertices,
            s.max_degree,
            s.avg_degree_nonzero,
            s.avg_sublist_bytes
        );
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("kron14.csr");
    save_csr(&kron, &path)?;
    let back = load_csr(&path)?;
    assert_eq!(back, kron);
    println!(
        "saved and reloaded {} ({} bytes)",
        path.display(),
        std::fs::metadata(&path)?.len()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
