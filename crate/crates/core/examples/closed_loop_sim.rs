use extmem::model::{throughput, DeviceProfile, LinkProfile};
use extmem::sim::{simulate_closed_loop, SimConfig};

pub fn run_example() -> extmem::Result<()> {
    for (name, cfg) in [
        ("host DRAM", SimConfig::host_dram_gen3()),
        ("CXL x5", SimConfig::cxl_gpu_gen3()),
    ] {
        let st = simulate_closed_loop(&cfg, 1e6)?;
        let dev = DeviceProfile {
            iops: f64::INFINITY,
            latency_ns: cfg.mean_latency_ns(),
            label: name.into(),
        };
        let model = throughput(&dev, &LinkProfile::pcie_gen3(), st.mean_request_bytes);
        println!(
            "{name:<10} simulated {:>8.1} MB/s, model {:>8.1} MB/s, {:.1} in flight, {:.0} ns mean latency",
            st.measured_throughput / 1e6,
            model / 1e6,
            st.mean_outstanding,
            st.mean_latency_ns
        );
    }

    // a single CXL device on its own saturates its memory channel
    let st = simulate_closed_loop(&SimConfig::cxl_device_microbench(), 1e6)?;
    println!(
        "one CXL device: {:.0} MB/s, peak {:?} units in flight",
        st.measured_throughput / 1e6,
        st.peak_device_outstanding
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
