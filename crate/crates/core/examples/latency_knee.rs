//! How much device latency a Gen 3 GPU link tolerates before runtime
//! suffers: normalized to host DRAM, predicted and simulated.

use extmem::model::{throughput, DeviceProfile, LinkProfile};
use extmem::sim::{simulate_closed_loop, throughput_vs_latency_sweep, SimConfig};

pub fn run_example() -> extmem::Result<()> {
    let link = LinkProfile::pcie_gen3();
    let host_cfg = SimConfig::host_dram_gen3();
    let cxl_cfg = SimConfig::cxl_gpu_gen3();
    let d = cxl_cfg.request_size.mean_bytes();

    let host_model = throughput(&DeviceProfile::host_dram(), &link, d);
    let host_sim = simulate_closed_loop(&host_cfg, 1e6)?.measured_throughput;

    let deltas = [0.0, 200.0, 500.0, 1_000.0, 2_000.0, 3_000.0];
    let rows = throughput_vs_latency_sweep(&cxl_cfg, &deltas, 1e6)?;
    println!("latency_ns  predicted  simulated");
    for r in &rows {
        let dev = DeviceProfile {
            latency_ns: r.latency_ns,
            ..DeviceProfile::cxl_dram()
        };
        println!(
            "{:>10.0} {:>10.3} {:>10.3}",
            r.latency_ns,
            host_model / throughput(&dev, &link, d),
            host_sim / r.stats.measured_throughput
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
