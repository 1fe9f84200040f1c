use extmem::sim::{pointer_chase, SimConfig};

pub fn run_example() -> extmem::Result<()> {
    let cfg = SimConfig::cxl_device_microbench();
    for delta in [0.0, 1_000.0, 2_000.0, 3_000.0] {
        let c = cfg.with_extra_latency(delta);
        let st = pointer_chase(&c, 2_000)?;
        println!(
            "added {:>4.1} us: {:>7.1} ns per hop (configured {:.0} ns), {} units in flight at most",
            delta / 1e3,
            st.per_hop_ns,
            c.mean_latency_ns(),
            st.peak_units_in_flight
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
