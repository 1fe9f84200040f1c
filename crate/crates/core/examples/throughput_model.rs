use extmem::model::{
    concurrency, optimal_transfer, requirements, slope, throughput, DeviceProfile, LinkProfile,
    MB_PER_S,
};

pub fn run_example() -> extmem::Result<()> {
    let gen4 = LinkProfile::pcie_gen4();
    let devices = [
        DeviceProfile::host_dram(),
        DeviceProfile::cxl_dram(),
        DeviceProfile::bam_ssd(),
        DeviceProfile::example_flash(),
        DeviceProfile::xlfdd_array(),
    ];

    println!("device          slope(MIOPS)  d_opt(B)  T(89.6 B) MB/s  T(4 KiB) MB/s");
    for dev in &devices {
        println!(
            "{:<15} {:>12.1} {:>9.0} {:>15.0} {:>14.0}",
            dev.label,
            slope(dev, &gen4) / 1e6,
            optimal_transfer(dev, &gen4),
            throughput(dev, &gen4, 89.6) / MB_PER_S,
            throughput(dev, &gen4, 4096.0) / MB_PER_S
        );
    }

    for link in [LinkProfile::pcie_gen3(), gen4.clone()] {
        let r = requirements(&link, 89.6);
        println!(
            "{} at d = 89.6 B needs S >= {:.1} MIOPS and L <= {:.2} us",
            link.label,
            r.min_iops / 1e6,
            r.max_latency_ns / 1e3
        );
    }

    // Little's law: requests in flight to sustain the link at 1.2 us
    let n = concurrency(gen4.bandwidth, 1_200.0, 89.6);
    println!("{n:.0} requests in flight keep gen4 busy at 1.2 us");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
