//! Request sizes a GPU issues when it reads sublists straight from host
//! memory, compared with a device that accepts variable-size reads.

use extmem::access::{replay, AlignmentConfig};
use extmem::graph::gen_uniform_random;
use extmem::traversal::{bfs, pick_source};

pub fn run_example() -> extmem::Result<()> {
    let g = gen_uniform_random(1 << 16, 32.0, 5)?;
    let (_, trace) = bfs(&g, pick_source(&g, 5).unwrap())?;

    for cfg in [
        AlignmentConfig::gpu_cacheline(),
        AlignmentConfig::variable_transfer(),
    ] {
        let l = replay(&trace, &cfg)?;
        println!(
            "{:?}: RAF {:.3}, d = {:.1} B over {} requests",
            cfg.mode,
            l.raf,
            l.avg_transfer_bytes,
            l.requests()
        );
        let total = l.requests() as f64;
        for (size, n) in l.request_size_histogram.iter().take(8) {
            println!("  {size:>5} B  {:>5.1}%", 100.0 * *n as f64 / total);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
