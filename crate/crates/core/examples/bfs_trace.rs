//! BFS on a uniform graph: frontier profile and trace export.

use extmem::graph::gen_uniform_random;
use extmem::traversal::{bfs, pick_source, AccessTrace};

pub fn run_example() -> extmem::Result<()> {
    let g = gen_uniform_random(1 << 16, 32.0, 7)?;
    let src = pick_source(&g, 7).expect("graph has edges");
    let (result, trace) = bfs(&g, src)?;

    println!("source {src}, reached {} vertices", result.reached());
    for (depth, step) in trace.steps().enumerate() {
        let bytes: u64 = step.iter().map(|r| r.byte_length).sum();
        println!(
            "  depth {depth}: {:>6} vertices, {:>9} bytes of edges",
            result.frontier_sizes[depth], bytes
        );
    }
    println!(
        "E = {} useful bytes over {} reads",
        trace.useful_bytes_total(),
        trace.num_reads()
    );

    let mut bin = Vec::new();
    trace.write_binary(&mut bin)?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    assert_eq!(AccessTrace::read_binary(&mut bin.as_slice())?, trace);
    assert_eq!(AccessTrace::read_csv(csv.as_slice())?, trace);
    println!(
        "TRCE export: {} bytes, CSV export: {} bytes",
        bin.len(),
        csv.len()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
