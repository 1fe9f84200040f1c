//! Read amplification of a BFS trace across alignment sizes, with and
//! without a block cache.

use extmem::access::{raf_sweep, write_ledgers_csv, UNLIMITED_CACHE};
use extmem::graph::gen_uniform_random;
use extmem::traversal::{bfs, pick_source};

pub fn run_example() -> extmem::Result<()> {
    let g = gen_uniform_random(1 << 16, 32.0, 1)?;
    let (_, trace) = bfs(&g, pick_source(&g, 1).unwrap())?;
    let aligns: Vec<u64> = (5..=12).map(|k| 1 << k).collect();

    let caches = [
        ("none", 0),
        ("1/16", g.edge_list_bytes() / 16),
        ("unlimited", UNLIMITED_CACHE),
    ];
    print!("{:>6}", "a");
    for (name, _) in &caches {
        print!("{name:>11}");
    }
    println!();
    let sweeps: Vec<_> = caches
        .iter()
        .map(|&(_, c)| raf_sweep(&trace, &aligns, c))
        .collect::<Result<_, _>>()?;
    for (i, a) in aligns.iter().enumerate() {
        print!("{a:>6}");
        for s in &sweeps {
            print!("{:>11.3}", s[i].raf);
        }
        println!();
    }

    let mut csv = Vec::new();
    write_ledgers_csv(&mut csv, &sweeps[1])?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
