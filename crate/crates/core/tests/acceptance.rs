//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criteria run one after another to keep peak memory low.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use extmem::access::{raf_sweep, replay_gpu_cacheline, AlignmentConfig};
use extmem::graph::{gen_kronecker, gen_uniform_random, CsrGraph, EdgeSublist};
use extmem::model::{
    optimal_transfer, predict_runtime_curve, requirements, throughput, DeviceProfile, LinkProfile,
};
use extmem::sim::{pointer_chase, simulate_closed_loop, DeviceSpec, RequestSize, SimConfig};
use extmem::traversal::{
    bfs, pick_source, sssp, synth_weights, AccessTrace, UNIT_WEIGHT_SEED, UNREACHED_DEPTH,
    UNREACHED_DIST,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dijkstra, queue_bfs};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(actual: f64, expected: f64, rel: f64) -> bool {
    ((actual - expected) / expected).abs() <= rel
}

fn alignments() -> Vec<u64> {
    (5..=12).map(|k| 1u64 << k).collect()
}

// 1
fn throughput_worked_example() -> Outcome {
    let start = Instant::now();
    let dev = DeviceProfile::new("flash", 100e6, 16_000.0).map_err(|e| e.to_string())?;
    let link = LinkProfile::new("gen4", 24_000e6, 768).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for d in [64u64, 500, 4096] {
        // min{100 d, 48 d, 24000} MB/s, in whole bytes/s
        let expected = (100_000_000 * d).min(48_000_000 * d).min(24_000_000_000);
        let got = throughput(&dev, &link, d as f64);
        check(
            got == expected as f64,
            format!("d={d}: got {got}, want {expected}"),
        )?;
        detail.push(format!("T({d})={} MB/s", expected / 1_000_000));
    }
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
    )?;
    Ok(detail.join(", "))
}

// 2
fn requirement_solver() -> Outcome {
    let d = 89.6;
    let gen4 = requirements(&LinkProfile::pcie_gen4(), d);
    check(
        within(gen4.min_iops, 268e6, 0.01),
        format!("gen4 S_min {}", gen4.min_iops),
    )?;
    check(
        within(gen4.max_latency_ns, 2870.0, 0.01),
        format!("gen4 L_max {} ns", gen4.max_latency_ns),
    )?;
    let gen3 = requirements(&LinkProfile::pcie_gen3(), d);
    check(
        within(gen3.min_iops, 134e6, 0.01),
        format!("gen3 S_min {}", gen3.min_iops),
    )?;
    check(
        within(gen3.max_latency_ns, 1910.0, 0.01),
        format!("gen3 L_max {} ns", gen3.max_latency_ns),
    )?;
    let r256 = requirements(&LinkProfile::pcie_gen4(), 256.0);
    check(
        r256.min_iops == 93_750_000.0,
        format!("d=256 S_min {}", r256.min_iops),
    )?;
    Ok(format!(
        "gen4 {:.1} MIOPS / {:.3} us, gen3 {:.1} MIOPS / {:.3} us, d=256 {} MIOPS",
        gen4.min_iops / 1e6,
        gen4.max_latency_ns / 1e3,
        gen3.min_iops / 1e6,
        gen3.max_latency_ns / 1e3,
        r256.min_iops / 1e6
    ))
}

// 3
fn optimal_transfer_size() -> Outcome {
    let dev = DeviceProfile::new("ssd", 6e6, 10_000.0).map_err(|e| e.to_string())?;
    let d_opt = optimal_transfer(&dev, &LinkProfile::pcie_gen4());
    check(d_opt == 4000.0, format!("d_opt {d_opt}"))?;
    Ok(format!("d_opt = {d_opt} B"))
}

// 4
fn gpu_transfer_mix() -> Outcome {
    // one sublist per 128 B line, sized and placed so the sector cover is
    // 32, 64, 96 or 128 bytes in a 20/20/20/40 ratio
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut shapes = Vec::new();
    for _ in 0..1000 {
        shapes.extend([(8u64, 16u64), (40, 56), (0, 96), (0, 128), (16, 112)]);
    }
    shapes.shuffle(&mut rng);
    let reads: Vec<EdgeSublist> = shapes
        .iter()
        .enumerate()
        .map(|(i, &(off, len))| EdgeSublist {
            byte_offset: i as u64 * 128 + off,
            byte_length: len,
        })
        .collect();
    let trace = AccessTrace::from_steps([reads]);
    let ledger = replay_gpu_cacheline(&trace, &AlignmentConfig::gpu_cacheline())
        .map_err(|e| e.to_string())?;
    let hist: Vec<(u64, u64)> = ledger
        .request_size_histogram
        .iter()
        .map(|(&s, &n)| (s, n))
        .collect();
    check(
        hist == vec![(32, 1000), (64, 1000), (96, 1000), (128, 2000)],
        format!("histogram {hist:?}"),
    )?;
    check(
        ledger.avg_transfer_bytes == 89.6,
        format!("d = {}", ledger.avg_transfer_bytes),
    )?;
    Ok(format!("d = {} B", ledger.avg_transfer_bytes))
}

/// RAF per alignment for a BFS from a seeded random source with an LRU cache
/// of one sixteenth of the edge list.
fn bfs_raf(g: &CsrGraph, seed: u64) -> Result<Vec<f64>, String> {
    let src = pick_source(g, seed).ok_or("graph has no edges")?;
    let (_, trace) = bfs(g, src).map_err(|e| e.to_string())?;
    let cache = g.edge_list_bytes() / 16;
    let ledgers = raf_sweep(&trace, &alignments(), cache).map_err(|e| e.to_string())?;
    Ok(ledgers.iter().map(|l| l.raf).collect())
}

// 5
fn raf_behavior() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut failures = Vec::new();
    for name in ["urand20", "kron20"] {
        let g = match name {
            "urand20" => gen_uniform_random(1 << 20, 32.0, 1),
            _ => gen_kronecker(20, 16.0, 1),
        }
        .map_err(|e| e.to_string())?;
        let raf = bfs_raf(&g, 1)?;
        drop(g);
        let monotone = raf.windows(2).all(|w| w[1] >= w[0]);
        let (first, last) = (raf[0], *raf.last().unwrap());
        detail.push(format!("{name} RAF(32)={first:.3} RAF(4096)={last:.3}"));
        if !monotone {
            failures.push(format!("{name} not monotone: {raf:?}"));
        }
        if first > 1.6 {
            failures.push(format!("{name} RAF(32)={first:.3} > 1.6"));
        }
        if !(2.5..=6.0).contains(&last) {
            failures.push(format!("{name} RAF(4096)={last:.3} outside [2.5, 6]"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(300) {
        failures.push(format!("took {elapsed:?}"));
    }
    if failures.is_empty() {
        Ok(detail.join("; "))
    } else {
        Err(format!("{} ({})", failures.join("; "), detail.join("; ")))
    }
}

// 6
fn runtime_curve_shape() -> Outcome {
    let start = Instant::now();
    let dev = DeviceProfile::bam_ssd();
    let link = LinkProfile::pcie_gen4();
    let sizes: Vec<u64> = (5..=16).map(|k| 1u64 << k).collect();
    // smallest swept d with s d >= W, computed from the raw parameters
    let s = dev.iops.min(link.nmax as f64 * 1e9 / dev.latency_ns);
    let knee = *sizes
        .iter()
        .find(|&&d| s * d as f64 >= link.bandwidth)
        .unwrap();
    let mut cases = 0;
    for seed in 1..=3u64 {
        let graphs = [
            gen_uniform_random(1 << 16, 16.0 * seed as f64, seed),
            gen_kronecker(16, 8.0 * seed as f64, seed),
        ];
        for g in graphs {
            let g = g.map_err(|e| e.to_string())?;
            let (_, trace) = bfs(&g, pick_source(&g, seed).unwrap()).map_err(|e| e.to_string())?;
            for cache in [0, g.edge_list_bytes() / 16] {
                let curve = predict_runtime_curve(&trace, &sizes, &dev, &link, cache)
                    .map_err(|e| e.to_string())?;
                check(
                    curve.argmin_d == knee,
                    format!(
                        "seed {seed} cache {cache}: argmin {} != {knee}",
                        curve.argmin_d
                    ),
                )?;
                cases += 1;
            }
        }
    }
    let steps_from_4k = ((knee as f64).log2() - 4000f64.log2()).abs();
    check(
        steps_from_4k <= 1.0,
        format!("knee {knee} B too far from 4 kB"),
    )?;
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(300),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("argmin = {knee} B in all {cases} cases"))
}

struct Combo {
    d: u64,
    latency_ns: f64,
    cap: u32,
    iops: f64,
    bandwidth: f64,
}

impl Combo {
    fn predicted(&self) -> f64 {
        let d = self.d as f64;
        (self.iops * d)
            .min(self.cap as f64 / (self.latency_ns * 1e-9) * d)
            .min(self.bandwidth)
    }

    fn regime(&self) -> &'static str {
        let d = self.d as f64;
        let t = self.predicted();
        if t == self.bandwidth {
            "bandwidth"
        } else if t == self.iops * d {
            "iops"
        } else {
            "latency"
        }
    }

    fn config(&self) -> SimConfig {
        SimConfig {
            link_nmax: self.cap,
            link_bandwidth: self.bandwidth,
            devices: vec![DeviceSpec {
                base_latency_ns: self.latency_ns,
                extra_latency_ns: 0.0,
                outstanding_cap: self.cap,
                channel_bandwidth: f64::INFINITY,
                iops: self.iops,
            }],
            interleave_granularity: 4096,
            request_size: RequestSize::Fixed(self.d),
            split_size: self.d,
            address_span: 1 << 34,
            seed: 7,
        }
    }
}

// 7
fn des_matches_model() -> Outcome {
    let mut combos = Vec::new();
    for &d in &[64u64, 256, 1024, 4096] {
        // iops-bound: S d is a third of the other limits
        combos.push(Combo {
            d,
            latency_ns: 1_000.0,
            cap: 256,
            iops: 10e6,
            bandwidth: 30.0 * d as f64 * 10e6,
        });
        // latency-bound
        combos.push(Combo {
            d,
            latency_ns: 4_000.0,
            cap: 32,
            iops: 100e6,
            bandwidth: 1e13,
        });
        // bandwidth-bound
        combos.push(Combo {
            d,
            latency_ns: 2_000.0,
            cap: 512,
            iops: 1e9,
            bandwidth: 0.2 * 512.0 / 2e-6 * d as f64,
        });
    }
    combos.push(Combo {
        d: 128,
        latency_ns: 16_000.0,
        cap: 768,
        iops: 1e9,
        bandwidth: 24e9,
    });
    combos.push(Combo {
        d: 4096,
        latency_ns: 10_000.0,
        cap: 768,
        iops: 6e6,
        bandwidth: 24e9,
    });
    let mut regimes = std::collections::BTreeSet::new();
    let mut worst_t: f64 = 0.0;
    let mut worst_n: f64 = 0.0;
    for c in &combos {
        let predicted = c.predicted();
        let rate = predicted / c.d as f64;
        let duration = (200.0 * c.latency_ns).max(40_000.0 / rate * 1e9);
        let st = simulate_closed_loop(&c.config(), duration).map_err(|e| e.to_string())?;
        let t_err = (st.measured_throughput - predicted).abs() / predicted;
        let n_little = st.measured_throughput * st.mean_latency_ns * 1e-9 / c.d as f64;
        let n_err = (st.mean_outstanding - n_little).abs() / n_little;
        check(
            t_err <= 0.05,
            format!(
                "{} d={} L={} cap={}: T {} vs {} ({:.2}%)",
                c.regime(),
                c.d,
                c.latency_ns,
                c.cap,
                st.measured_throughput,
                predicted,
                100.0 * t_err
            ),
        )?;
        check(
            n_err <= 0.05,
            format!(
                "{} d={} L={} cap={}: N {} vs T L/d {} ({:.2}%)",
                c.regime(),
                c.d,
                c.latency_ns,
                c.cap,
                st.mean_outstanding,
                n_little,
                100.0 * n_err
            ),
        )?;
        if c.regime() == "latency" {
            // the unloaded latency is the whole latency here
            let n_cfg = st.measured_throughput * c.latency_ns * 1e-9 / c.d as f64;
            check(
                within(st.mean_outstanding, n_cfg, 0.05),
                format!("latency-bound N {} vs {n_cfg}", st.mean_outstanding),
            )?;
        }
        regimes.insert(c.regime());
        worst_t = worst_t.max(t_err);
        worst_n = worst_n.max(n_err);
    }
    check(regimes.len() == 3, format!("regimes covered: {regimes:?}"))?;
    Ok(format!(
        "{} combos over {:?}, worst T error {:.3}%, worst N error {:.3}%",
        combos.len(),
        regimes,
        100.0 * worst_t,
        100.0 * worst_n
    ))
}

// 8
fn latency_knee() -> Outcome {
    let d = RequestSize::emogi_mix().mean_bytes();
    let (w, nmax) = (12_000e6, 256.0);
    let model_t = |latency_ns: f64| (nmax / (latency_ns * 1e-9) * d).min(w);
    let host_latency = 1_200.0;
    let mut detail = Vec::new();
    for seed in [1u64, 2] {
        let mut host = SimConfig::host_dram_gen3();
        host.seed = seed;
        let mut cxl = SimConfig::cxl_gpu_gen3();
        cxl.seed = seed;
        let run = |cfg: &SimConfig| {
            simulate_closed_loop(cfg, 300.0 * cfg.max_latency_ns().max(1_000.0))
                .map(|s| s.measured_throughput)
                .map_err(|e| e.to_string())
        };
        let host_sim = run(&host)?;
        let base = cxl.devices[0].base_latency_ns;
        for delta in [0.0, 50.0, 100.0, 150.0, 210.0, 3_000.0] {
            let observed = base + delta;
            let predicted = model_t(host_latency) / model_t(observed);
            let simulated = host_sim / run(&cxl.with_extra_latency(delta))?;
            if observed <= 1_910.0 {
                check(
                    predicted <= 1.05 && simulated <= 1.05,
                    format!("L={observed} ns: predicted {predicted:.3}, simulated {simulated:.3}"),
                )?;
            } else {
                check(
                    predicted > 1.2 && simulated > 1.2,
                    format!("L={observed} ns: predicted {predicted:.3}, simulated {simulated:.3}"),
                )?;
            }
            if seed == 1 && (delta == 210.0 || delta == 3_000.0) {
                detail.push(format!(
                    "L={observed} ns: {predicted:.3}x predicted, {simulated:.3}x simulated"
                ));
            }
        }
    }
    Ok(detail.join("; "))
}

// 9
fn pointer_chase_latency() -> Outcome {
    let mut worst: f64 = 0.0;
    for cfg in [
        SimConfig::cxl_device_microbench(),
        SimConfig::cxl_gpu_gen3(),
    ] {
        for delta in [0.0, 1_000.0, 2_000.0, 3_000.0] {
            let c = cfg.with_extra_latency(delta);
            let configured = c.devices[0].base_latency_ns + delta;
            let st = pointer_chase(&c, 5_000).map_err(|e| e.to_string())?;
            let err = (st.per_hop_ns - configured).abs() / configured;
            check(
                err <= 0.02,
                format!(
                    "delta {delta}: {} ns per hop vs {configured}",
                    st.per_hop_ns
                ),
            )?;
            worst = worst.max(err);
        }
    }
    Ok(format!("worst error {:.2}%", 100.0 * worst))
}

// 10
fn traversal_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..100u64 {
        let g = if i % 2 == 0 {
            gen_uniform_random(1 << 12, rng.gen_range(1.0..24.0), i)
        } else {
            gen_kronecker(12, rng.gen_range(1.0..16.0), i)
        }
        .map_err(|e| e.to_string())?;
        let src = pick_source(&g, i).unwrap_or(0);
        let (r, _) = bfs(&g, src).map_err(|e| e.to_string())?;
        check(
            r.depth_of == queue_bfs(&g, src),
            format!("graph {i}: BFS depths differ"),
        )?;

        let wseed = 1 + i;
        let (s, _) = sssp(&g, src, wseed).map_err(|e| e.to_string())?;
        let expected = dijkstra(&g, src, &synth_weights(&g, wseed));
        check(
            s.dist_of == expected,
            format!("graph {i}: SSSP distances differ"),
        )?;

        let (u, _) = sssp(&g, src, UNIT_WEIGHT_SEED).map_err(|e| e.to_string())?;
        let as_depth: Vec<u32> = u
            .dist_of
            .iter()
            .map(|&d| {
                if d == UNREACHED_DIST {
                    UNREACHED_DEPTH
                } else {
                    d as u32
                }
            })
            .collect();
        check(
            as_depth == r.depth_of,
            format!("graph {i}: unit SSSP != BFS"),
        )?;
    }
    Ok("100 graphs: BFS, SSSP and unit-weight SSSP exact".into())
}

/// Rises, then falls, with at most one interruption of either run.
fn unimodal_with_one_dip(xs: &[u64]) -> bool {
    let mut reversals = 0;
    let mut going_up = true;
    for w in xs.windows(2) {
        let up = w[1] > w[0];
        if up != going_up {
            reversals += 1;
            going_up = up;
        }
    }
    // one turn at the peak, plus up to one dip (down then up again)
    reversals <= 3
}

// 11
fn frontier_shape() -> Outcome {
    let mut detail = Vec::new();
    for seed in [1u64, 2] {
        let g = gen_uniform_random(1 << 22, 32.0, seed).map_err(|e| e.to_string())?;
        for k in 0..3u64 {
            let src = pick_source(&g, seed * 100 + k).unwrap();
            let (r, _) = bfs(&g, src).map_err(|e| e.to_string())?;
            let f = &r.frontier_sizes;
            let depths = f.len();
            let peak = f.iter().enumerate().max_by_key(|&(_, n)| *n).unwrap().0;
            check(
                (5..=9).contains(&depths),
                format!("seed {seed} src {src}: {depths} depths"),
            )?;
            check(
                unimodal_with_one_dip(f),
                format!("seed {seed} src {src}: frontier {f:?}"),
            )?;
            check(
                2 * peak > depths - 1,
                format!("seed {seed} src {src}: peak at {peak} of {depths}"),
            )?;
            if k == 0 {
                detail.push(format!("{f:?}"));
            }
        }
    }
    Ok(detail.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("throughput worked example", throughput_worked_example),
        ("requirement solver", requirement_solver),
        ("optimal transfer size", optimal_transfer_size),
        ("gpu transfer mix", gpu_transfer_mix),
        ("read amplification vs alignment", raf_behavior),
        ("runtime curve minimum", runtime_curve_shape),
        ("simulation vs throughput model", des_matches_model),
        ("latency knee", latency_knee),
        ("pointer chase latency", pointer_chase_latency),
        ("traversal oracles", traversal_oracles),
        ("frontier shape", frontier_shape),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name} ({secs:.1}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {msg}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
