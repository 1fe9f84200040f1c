//! Discrete-event, closed-loop simulation of reads over a link with a bounded
//! number of outstanding requests, feeding one or more memory devices.
//!
//! A requester keeps up to `link_nmax` requests in flight and reissues on
//! every completion. Each request is split into `split_size` units; every unit
//! is routed to a device by address interleave. A device admits units while
//! fewer than its cap are outstanding, paces admitted units by its IOPS and
//! channel bandwidth, and releases them through an in-order latency bridge
//! after `base_latency + extra_latency`. Completed requests return over the
//! link, which delivers at most `link_bandwidth` bytes per second.
//!
//! Time is kept as integer picoseconds.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{concurrency, MB_PER_S};

const PS_PER_NS: f64 = 1e3;
const PS_PER_S: f64 = 1e12;

fn ns_to_ps(ns: f64) -> u64 {
    (ns * PS_PER_NS).round() as u64
}

fn ps_to_ns(ps: u64) -> f64 {
    ps as f64 / PS_PER_NS
}

/// Picoseconds to move `bytes` at `rate` bytes/second; 0 for unlimited rates.
fn transfer_ps(bytes: u64, rate: f64) -> u64 {
    if rate.is_infinite() {
        0
    } else {
        (bytes as f64 * PS_PER_S / rate).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec {
    /// Latency of the unloaded path, in ns.
    pub base_latency_ns: f64,
    /// Added by the latency bridge, in ns.
    pub extra_latency_ns: f64,
    /// Split units the device keeps in flight at most.
    pub outstanding_cap: u32,
    /// Bytes per second through the device's memory channel.
    pub channel_bandwidth: f64,
    /// Split units per second the device can start.
    pub iops: f64,
}

impl DeviceSpec {
    /// Unbounded device with only a fixed latency.
    pub fn ideal(latency_ns: f64) -> Self {
        DeviceSpec {
            base_latency_ns: latency_ns,
            extra_latency_ns: 0.0,
            outstanding_cap: u32::MAX,
            channel_bandwidth: f64::INFINITY,
            iops: f64::INFINITY,
        }
    }

    /// FPGA CXL memory prototype: 128 outstanding 64 B units, single DRAM
    /// channel at about 5,700 MB/s.
    pub fn cxl_prototype(base_latency_ns: f64) -> Self {
        DeviceSpec {
            base_latency_ns,
            extra_latency_ns: 0.0,
            outstanding_cap: 128,
            channel_bandwidth: 5_700.0 * MB_PER_S,
            iops: f64::INFINITY,
        }
    }

    pub fn latency_ns(&self) -> f64 {
        self.base_latency_ns + self.extra_latency_ns
    }
}

/// Distribution of request sizes issued by the requester.
#[derive(Debug, Clone, PartialEq)]
pub enum RequestSize {
    Fixed(u64),
    /// `(bytes, weight)` pairs, sampled independently per request.
    Mix(Vec<(u64, f64)>),
}

impl RequestSize {
    /// GPU zero-copy mix: 32/64/96/128 B at 20/20/20/40 %.
    pub fn emogi_mix() -> Self {
        RequestSize::Mix(vec![(32, 0.2), (64, 0.2), (96, 0.2), (128, 0.4)])
    }

    pub fn mean_bytes(&self) -> f64 {
        match self {
            RequestSize::Fixed(d) => *d as f64,
            RequestSize::Mix(m) => {
                let total: f64 = m.iter().map(|&(_, w)| w).sum();
                m.iter().map(|&(s, w)| s as f64 * w).sum::<f64>() / total
            }
        }
    }

    pub fn max_bytes(&self) -> u64 {
        match self {
            RequestSize::Fixed(d) => *d,
            RequestSize::Mix(m) => m.iter().map(|&(s, _)| s).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub link_nmax: u32,
    /// Bytes per second the link returns; `f64::INFINITY` for no limit.
    pub link_bandwidth: f64,
    pub devices: Vec<DeviceSpec>,
    /// Bytes of contiguous address space per device before moving to the next.
    pub interleave_granularity: u64,
    pub request_size: RequestSize,
    /// Unit size requests are split into at the device interface.
    pub split_size: u64,
    /// Random request addresses are drawn from `[0, address_span)`.
    pub address_span: u64,
    pub seed: u64,
}

impl SimConfig {
    /// GPU on PCIe Gen 3 reading five CXL prototypes with the zero-copy size
    /// mix. Device latency is 1.7 us as observed from the GPU.
    pub fn cxl_gpu_gen3() -> Self {
        SimConfig {
            link_nmax: 256,
            link_bandwidth: 12_000.0 * MB_PER_S,
            devices: vec![DeviceSpec::cxl_prototype(1_700.0); 5],
            interleave_granularity: 4096,
            request_size: RequestSize::emogi_mix(),
            split_size: 64,
            address_span: 16 << 30,
            seed: 1,
        }
    }

    /// Host DRAM behind the same Gen 3 link, 1.2 us as observed from the GPU.
    pub fn host_dram_gen3() -> Self {
        SimConfig {
            devices: vec![DeviceSpec::ideal(1_200.0)],
            ..Self::cxl_gpu_gen3()
        }
    }

    /// CPU-side microbenchmark of one CXL prototype: many 64 B random reads,
    /// nothing but the device limiting them.
    pub fn cxl_device_microbench() -> Self {
        SimConfig {
            link_nmax: 4096,
            link_bandwidth: f64::INFINITY,
            devices: vec![DeviceSpec::cxl_prototype(1_440.0)],
            interleave_granularity: 4096,
            request_size: RequestSize::Fixed(64),
            split_size: 64,
            address_span: 16 << 30,
            seed: 1,
        }
    }

    pub fn max_latency_ns(&self) -> f64 {
        self.devices
            .iter()
            .map(DeviceSpec::latency_ns)
            .fold(0.0, f64::max)
    }

    pub fn mean_latency_ns(&self) -> f64 {
        self.devices.iter().map(DeviceSpec::latency_ns).sum::<f64>() / self.devices.len() as f64
    }

    /// Same configuration with every device's bridge delay set to `delta_ns`.
    pub fn with_extra_latency(&self, delta_ns: f64) -> Self {
        let mut cfg = self.clone();
        for d in &mut cfg.devices {
            d.extra_latency_ns = delta_ns;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.devices.is_empty() {
            return Err(Error::config("simulation needs at least one device"));
        }
        if self.link_nmax == 0 {
            return Err(Error::config("link_nmax must be at least 1"));
        }
        if !(self.link_bandwidth > 0.0) {
            return Err(Error::config("link bandwidth must be positive"));
        }
        if self.split_size == 0 || self.interleave_granularity == 0 {
            return Err(Error::config(
                "split size and interleave granularity must be positive",
            ));
        }
        for (i, d) in self.devices.iter().enumerate() {
            if !(d.base_latency_ns >= 0.0) || !(d.extra_latency_ns >= 0.0) {
                return Err(Error::config(format!("device {i}: latencies must be >= 0")));
            }
            if d.outstanding_cap == 0 {
                return Err(Error::config(format!("device {i}: cap must be >= 1")));
            }
            if !(d.channel_bandwidth > 0.0) || !(d.iops > 0.0) {
                return Err(Error::config(format!(
                    "device {i}: bandwidth and iops must be positive"
                )));
            }
        }
        match &self.request_size {
            RequestSize::Fixed(0) => return Err(Error::config("request size must be positive")),
            RequestSize::Mix(m) => {
                if m.is_empty() || m.iter().any(|&(s, w)| s == 0 || !(w >= 0.0)) {
                    return Err(Error::config(
                        "request mix needs positive sizes and weights",
                    ));
                }
                if !(m.iter().map(|&(_, w)| w).sum::<f64>() > 0.0) {
                    return Err(Error::config("request mix weights sum to zero"));
                }
            }
            RequestSize::Fixed(_) => {}
        }
        if self.address_span < self.request_size.max_bytes().next_power_of_two() {
            return Err(Error::config("address span smaller than one request"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    /// Bytes per second completed inside the measurement window.
    pub measured_throughput: f64,
    /// Time-averaged requests in flight on the link.
    pub mean_outstanding: f64,
    /// Mean issue-to-completion time of requests completed in the window.
    pub mean_latency_ns: f64,
    pub completions: u64,
    pub mean_request_bytes: f64,
    pub window_ns: f64,
    pub peak_outstanding: u32,
    pub peak_device_outstanding: Vec<u32>,
    pub issued_total: u64,
    pub completed_total: u64,
    pub outstanding_at_end: u32,
}

/// In-order delay stage: each entry leaves `delta` after it was stamped, but
/// never before the entry ahead of it.
#[derive(Debug, Clone, Default)]
pub struct LatencyBridge {
    delta_ps: u64,
    last_out_ps: u64,
}

impl LatencyBridge {
    pub fn new(delta_ps: u64) -> Self {
        LatencyBridge {
            delta_ps,
            last_out_ps: 0,
        }
    }

    /// Pushes data stamped at `stamp_ps`; returns when it is popped.
    pub fn push(&mut self, stamp_ps: u64) -> u64 {
        let out = (stamp_ps + self.delta_ps).max(self.last_out_ps);
        self.last_out_ps = out;
        out
    }
}

/// Completion time of each request passing a latency bridge: data is read
/// after `base_ns`, then held until `delta_ns` past that stamp, leaving in
/// arrival order. Times in ns.
pub fn simulate_bridge(base_ns: f64, delta_ns: f64, arrivals_ns: &[f64]) -> Vec<f64> {
    let base = ns_to_ps(base_ns);
    let mut bridge = LatencyBridge::new(ns_to_ps(delta_ns));
    arrivals_ns
        .iter()
        .map(|&a| ps_to_ns(bridge.push(ns_to_ps(a) + base)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    UnitDone { device: usize, req: usize },
    Deliver { req: usize },
}

#[derive(Debug, Clone, Copy)]
struct InFlight {
    issue_ps: u64,
    bytes: u64,
    units_left: u32,
}

struct Device {
    queue: VecDeque<(usize, u64)>,
    outstanding: u32,
    peak: u32,
    next_free_ps: u64,
    base_ps: u64,
    cap: u32,
    channel_bandwidth: f64,
    op_ps: u64,
    bridge: LatencyBridge,
}

enum Stop {
    At(u64),
    AfterCompletions(u64),
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    rng: ChaCha8Rng,
    sizes: Option<(Vec<u64>, WeightedIndex<f64>)>,
    line: u64,
    devices: Vec<Device>,
    heap: BinaryHeap<Reverse<(u64, u64, Event)>>,
    seq: u64,
    reqs: Vec<InFlight>,
    free: Vec<usize>,
    link_free_ps: u64,
    outstanding: u32,
    peak_outstanding: u32,
    units_in_flight: u32,
    peak_units_in_flight: u32,
    issued: u64,
    completed: u64,
    reissue: bool,
    // measurement window
    warmup_ps: u64,
    last_change_ps: u64,
    area: f64,
    win_completions: u64,
    win_bytes: u64,
    win_latency_ps: u128,
    last_completion_ps: u64,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SimConfig, warmup_ps: u64) -> Self {
        let sizes = match &cfg.request_size {
            RequestSize::Fixed(_) => None,
            RequestSize::Mix(m) => Some((
                m.iter().map(|&(s, _)| s).collect(),
                WeightedIndex::new(m.iter().map(|&(_, w)| w)).expect("validated weights"),
            )),
        };
        let devices = cfg
            .devices
            .iter()
            .map(|d| Device {
                queue: VecDeque::new(),
                outstanding: 0,
                peak: 0,
                next_free_ps: 0,
                base_ps: ns_to_ps(d.base_latency_ns),
                cap: d.outstanding_cap,
                channel_bandwidth: d.channel_bandwidth,
                op_ps: if d.iops.is_infinite() {
                    0
                } else {
                    (PS_PER_S / d.iops).round() as u64
                },
                bridge: LatencyBridge::new(ns_to_ps(d.extra_latency_ns)),
            })
            .collect();
        Engine {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            sizes,
            line: cfg.request_size.max_bytes().next_power_of_two(),
            devices,
            heap: BinaryHeap::new(),
            seq: 0,
            reqs: Vec::new(),
            free: Vec::new(),
            link_free_ps: 0,
            outstanding: 0,
            peak_outstanding: 0,
            units_in_flight: 0,
            peak_units_in_flight: 0,
            issued: 0,
            completed: 0,
            reissue: true,
            warmup_ps,
            last_change_ps: warmup_ps,
            area: 0.0,
            win_completions: 0,
            win_bytes: 0,
            win_latency_ps: 0,
            last_completion_ps: 0,
        }
    }

    fn schedule(&mut self, at: u64, ev: Event) {
        self.seq += 1;
        self.heap.push(Reverse((at, self.seq, ev)));
    }

    fn account(&mut self, now: u64) {
        if now > self.last_change_ps {
            self.area += self.outstanding as f64 * (now - self.last_change_ps) as f64;
            self.last_change_ps = now;
        }
    }

    fn issue(&mut self, now: u64) {
        self.account(now);
        let bytes = match &self.sizes {
            None => self.cfg.request_size.max_bytes(),
            Some((sizes, dist)) => sizes[dist.sample(&mut self.rng)],
        };
        let addr = self.rng.gen_range(0..self.cfg.address_span / self.line) * self.line;
        let split = self.cfg.split_size;
        let units = bytes.div_ceil(split) as u32;
        let req = InFlight {
            issue_ps: now,
            bytes,
            units_left: units,
        };
        let id = match self.free.pop() {
            Some(id) => {
                self.reqs[id] = req;
                id
            }
            None => {
                self.reqs.push(req);
                self.reqs.len() - 1
            }
        };
        self.outstanding += 1;
        self.peak_outstanding = self.peak_outstanding.max(self.outstanding);
        self.issued += 1;
        let n = self.devices.len() as u64;
        for u in 0..units as u64 {
            let unit_addr = addr + u * split;
            let unit_bytes = split.min(bytes - u * split);
            let dev = ((unit_addr / self.cfg.interleave_granularity) % n) as usize;
            self.devices[dev].queue.push_back((id, unit_bytes));
            self.admit(dev, now);
        }
    }

    fn admit(&mut self, dev: usize, now: u64) {
        loop {
            let d = &mut self.devices[dev];
            if d.outstanding >= d.cap {
                return;
            }
            let Some((req, unit_bytes)) = d.queue.pop_front() else {
                return;
            };
            d.outstanding += 1;
            d.peak = d.peak.max(d.outstanding);
            let start = now.max(d.next_free_ps);
            d.next_free_ps = start + d.op_ps.max(transfer_ps(unit_bytes, d.channel_bandwidth));
            let done = d.bridge.push(start + d.base_ps);
            self.units_in_flight += 1;
            self.peak_units_in_flight = self.peak_units_in_flight.max(self.units_in_flight);
            self.schedule(done, Event::UnitDone { device: dev, req });
        }
    }

    fn unit_done(&mut self, dev: usize, req: usize, now: u64) {
        self.devices[dev].outstanding -= 1;
        self.units_in_flight -= 1;
        self.admit(dev, now);
        let r = &mut self.reqs[req];
        r.units_left -= 1;
        if r.units_left > 0 {
            return;
        }
        let deliver = if self.cfg.link_bandwidth.is_infinite() {
            now
        } else {
            let at = now.max(self.link_free_ps + transfer_ps(r.bytes, self.cfg.link_bandwidth));
            self.link_free_ps = at;
            at
        };
        if deliver == now {
            self.complete(req, now);
        } else {
            self.schedule(deliver, Event::Deliver { req });
        }
    }

    fn complete(&mut self, req: usize, now: u64) {
        self.account(now);
        let r = self.reqs[req];
        self.free.push(req);
        self.outstanding -= 1;
        self.completed += 1;
        self.last_completion_ps = now;
        if now >= self.warmup_ps {
            self.win_completions += 1;
            self.win_bytes += r.bytes;
            self.win_latency_ps += (now - r.issue_ps) as u128;
        }
        debug_assert_eq!(self.issued, self.completed + self.outstanding as u64);
        if self.reissue {
            self.issue(now);
        }
    }

    fn run(&mut self, stop: Stop) -> u64 {
        for _ in 0..self.cfg.link_nmax {
            self.issue(0);
        }
        while let Some(&Reverse((t, _, ev))) = self.heap.peek() {
            if let Stop::At(end) = stop {
                if t > end {
                    return end;
                }
            }
            self.heap.pop();
            match ev {
                Event::UnitDone { device, req } => self.unit_done(device, req, t),
                Event::Deliver { req } => self.complete(req, t),
            }
            if let Stop::AfterCompletions(n) = stop {
                if self.completed >= n {
                    self.reissue = false;
                    return t;
                }
            }
        }
        self.last_completion_ps
    }

    fn stats(&mut self, end_ps: u64) -> SimStats {
        self.account(end_ps);
        let window_ps = end_ps.saturating_sub(self.warmup_ps).max(1) as f64;
        let c = self.win_completions;
        SimStats {
            measured_throughput: self.win_bytes as f64 * PS_PER_S / window_ps,
            mean_outstanding: self.area / window_ps,
            mean_latency_ns: if c == 0 {
                0.0
            } else {
                self.win_latency_ps as f64 / c as f64 / PS_PER_NS
            },
            completions: c,
            mean_request_bytes: if c == 0 {
                0.0
            } else {
                self.win_bytes as f64 / c as f64
            },
            window_ns: window_ps / PS_PER_NS,
            peak_outstanding: self.peak_outstanding,
            peak_device_outstanding: self.devices.iter().map(|d| d.peak).collect(),
            issued_total: self.issued,
            completed_total: self.completed,
            outstanding_at_end: self.outstanding,
        }
    }
}

/// Runs the closed loop for `duration_ns` of simulated time. Statistics skip
/// a warm-up window of ten times the largest configured device latency.
pub fn simulate_closed_loop(cfg: &SimConfig, duration_ns: f64) -> Result<SimStats> {
    cfg.validate()?;
    let max_latency = cfg.max_latency_ns();
    if !(duration_ns >= 100.0 * max_latency) || duration_ns <= 0.0 {
        return Err(Error::config(format!(
            "duration {duration_ns} ns must cover at least 100x the max latency ({max_latency} ns)"
        )));
    }
    let warmup = ns_to_ps(10.0 * max_latency);
    let end = ns_to_ps(duration_ns);
    let mut engine = Engine::new(cfg, warmup);
    engine.run(Stop::At(end));
    Ok(engine.stats(end))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaseStats {
    pub hops: u64,
    pub per_hop_ns: f64,
    /// Most split units in flight at once over the whole chase.
    pub peak_units_in_flight: u32,
}

pub const CHASE_BYTES: u64 = 128;

/// Strictly dependent 128 B reads at random addresses: each hop is issued
/// only after the previous one completes.
pub fn pointer_chase(cfg: &SimConfig, hops: u64) -> Result<ChaseStats> {
    if hops == 0 {
        return Err(Error::config("pointer chase needs at least one hop"));
    }
    let chase_cfg = SimConfig {
        link_nmax: 1,
        request_size: RequestSize::Fixed(CHASE_BYTES),
        ..cfg.clone()
    };
    chase_cfg.validate()?;
    let mut engine = Engine::new(&chase_cfg, 0);
    let end = engine.run(Stop::AfterCompletions(hops));
    Ok(ChaseStats {
        hops,
        per_hop_ns: ps_to_ns(end) / hops as f64,
        peak_units_in_flight: engine.peak_units_in_flight,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencySweepRow {
    pub delta_ns: f64,
    pub stats: SimStats,
    /// Unloaded device latency at this delta.
    pub latency_ns: f64,
    /// `N = T L / d` from the measured throughput and unloaded latency.
    pub computed_outstanding: f64,
}

pub fn sweep_row(cfg: &SimConfig, delta_ns: f64, duration_ns: f64) -> Result<LatencySweepRow> {
    let run_cfg = cfg.with_extra_latency(delta_ns);
    let stats = simulate_closed_loop(&run_cfg, duration_ns)?;
    let latency_ns = run_cfg.mean_latency_ns();
    Ok(LatencySweepRow {
        delta_ns,
        computed_outstanding: concurrency(
            stats.measured_throughput,
            latency_ns,
            stats.mean_request_bytes,
        ),
        latency_ns,
        stats,
    })
}

/// One closed-loop run per added latency. `duration_ns` is stretched where
/// needed to cover 100x the latency of each point.
pub fn throughput_vs_latency_sweep(
    cfg: &SimConfig,
    deltas_ns: &[f64],
    duration_ns: f64,
) -> Result<Vec<LatencySweepRow>> {
    deltas_ns
        .iter()
        .map(|&delta| {
            let need = 100.0 * cfg.with_extra_latency(delta).max_latency_ns();
            sweep_row(cfg, delta, duration_ns.max(need))
        })
        .collect()
}

pub const SIM_CSV_HEADER: &str = "delta_latency_ns,throughput_Bps,mean_outstanding,mean_latency_ns";

pub fn write_sweep_csv<W: Write + ?Sized>(w: &mut W, rows: &[LatencySweepRow]) -> Result<()> {
    writeln!(w, "{SIM_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.delta_ns,
            r.stats.measured_throughput,
            r.stats.mean_outstanding,
            r.stats.mean_latency_ns
        )?;
    }
    Ok(())
}
