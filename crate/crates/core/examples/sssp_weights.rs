use extmem::graph::gen_kronecker;
use extmem::traversal::{bfs, pick_source, sssp, UNIT_WEIGHT_SEED};

pub fn run_example() -> extmem::Result<()> {
    let g = gen_kronecker(14, 16.0, 3)?;
    let src = pick_source(&g, 3).expect("graph has edges");

    let (weighted, trace) = sssp(&g, src, 42)?;
    let (_, bfs_trace) = bfs(&g, src)?;
    println!(
        "weighted SSSP: {} rounds, {} sublist reads ({} for BFS)",
        weighted.iterations,
        trace.num_reads(),
        bfs_trace.num_reads()
    );
    // vertices improved more than once are read again
    println!(
        "E = {} bytes vs {} for BFS",
        trace.useful_bytes_total(),
        bfs_trace.useful_bytes_total()
    );

    let far = weighted
        .dist_of
        .iter()
        .filter(|&&d| d != u64::MAX)
        .max()
        .copied()
        .unwrap_or(0);
    println!("largest finite distance: {far}");

    let (unit, _) = sssp(&g, src, UNIT_WEIGHT_SEED)?;
    println!("unit weights: {} rounds", unit.iterations);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
