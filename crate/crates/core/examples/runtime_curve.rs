//! Predicted BFS runtime against transfer size for an SSD array behind a
//! Gen 4 link. The minimum sits where the IOPS line meets the bandwidth cap.

use extmem::graph::gen_kronecker;
use extmem::model::{optimal_transfer, predict_runtime_curve, DeviceProfile, LinkProfile};
use extmem::traversal::{bfs, pick_source};

pub fn run_example() -> extmem::Result<()> {
    let g = gen_kronecker(16, 16.0, 2)?;
    let (_, trace) = bfs(&g, pick_source(&g, 2).unwrap())?;
    let dev = DeviceProfile::bam_ssd();
    let link = LinkProfile::pcie_gen4();
    let sizes: Vec<u64> = (5..=16).map(|k| 1 << k).collect();

    let curve = predict_runtime_curve(&trace, &sizes, &dev, &link, g.edge_list_bytes() / 16)?;
    for p in &curve.points {
        let mark = if p.d_bytes == curve.argmin_d {
            "  <- min"
        } else {
            ""
        };
        println!(
            "d {:>6} B  D {:>11}  T {:>8.0} MB/s  t {:>9.3} ms{mark}",
            p.d_bytes,
            p.total_bytes,
            p.throughput / 1e6,
            p.runtime_s * 1e3
        );
    }
    println!("W / S = {} B", optimal_transfer(&dev, &link));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
