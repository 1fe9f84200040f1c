//! A latency bridge holds each response for a fixed delay but never lets one
//! overtake another.

use extmem::sim::simulate_bridge;

pub fn run_example() -> extmem::Result<()> {
    let arrivals = [0.0, 10.0, 20.0, 500.0, 505.0];
    let out = simulate_bridge(1_440.0, 1_000.0, &arrivals);
    for (a, o) in arrivals.iter().zip(&out) {
        println!("arrive {a:>6.1} ns -> leave {o:>7.1} ns ({:.1} ns)", o - a);
    }
    assert!(out.windows(2).all(|w| w[0] <= w[1]));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
