//! Closed-form runtime and throughput model for reading graph data over a
//! bandwidth- and concurrency-limited link.
//!
//! `t = D / T` with `T = min{S d, (Nmax / L) d, W}`, where `D` is the fetched
//! byte count, `d` the mean transfer size, `S` the device IOPS, `L` the
//! latency seen by the requester, `Nmax` the link's outstanding-request limit
//! and `W` its effective bandwidth. `S` and `L` are taken as independent of
//! `d`, which holds only while `d` stays under the device's native access
//! size.
//!
//! Units: bytes, bytes/second, requests/second, and nanoseconds for latency.
//! "MB/s" means 10^6 bytes/s.

use std::io::Write;

use crate::access::{replay_cached, AlignmentConfig};
use crate::error::{Error, Result};
use crate::traversal::AccessTrace;

pub const MB_PER_S: f64 = 1e6;
const NS_PER_S: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    /// `S`, random read requests per second.
    pub iops: f64,
    /// `L`, total request latency seen from the requester, in nanoseconds.
    pub latency_ns: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkProfile {
    /// `W`, effective bytes per second.
    pub bandwidth: f64,
    /// `Nmax`, outstanding requests the link admits.
    pub nmax: u32,
    pub label: String,
}

impl DeviceProfile {
    pub fn new(label: impl Into<String>, iops: f64, latency_ns: f64) -> Result<Self> {
        let p = DeviceProfile {
            iops,
            latency_ns,
            label: label.into(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.iops > 0.0) || !(self.latency_ns > 0.0) || !self.latency_ns.is_finite() {
            return Err(Error::config(format!(
                "device {:?} needs iops > 0 and finite latency > 0",
                self.label
            )));
        }
        Ok(())
    }

    /// Host DRAM reached through the GPU's PCIe link: about 1.2 us, IOPS far
    /// beyond any link limit.
    pub fn host_dram() -> Self {
        DeviceProfile {
            iops: 1e10,
            latency_ns: 1200.0,
            label: "host-dram".into(),
        }
    }

    /// DRAM-backed CXL memory: host path plus 0.5 us.
    pub fn cxl_dram() -> Self {
        DeviceProfile {
            iops: 1e10,
            latency_ns: 1700.0,
            label: "cxl-dram".into(),
        }
    }

    /// Four NVMe SSDs totalling 6 MIOPS. Storage queues are deep, so the
    /// latency here never binds against the link.
    pub fn bam_ssd() -> Self {
        DeviceProfile {
            iops: 6e6,
            latency_ns: 10_000.0,
            label: "bam-ssd".into(),
        }
    }

    /// The worked example: 100 MIOPS at 16 us.
    pub fn example_flash() -> Self {
        DeviceProfile {
            iops: 100e6,
            latency_ns: 16_000.0,
            label: "example-flash".into(),
        }
    }

    /// Low-latency flash array: 16 drives at 11 MIOPS peak each, under 5 us.
    pub fn xlfdd_array() -> Self {
        DeviceProfile {
            iops: 16.0 * 11e6,
            latency_ns: 5_000.0,
            label: "xlfdd-x16".into(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "host-dram" | "dram" => Self::host_dram(),
            "cxl-dram" | "cxl" => Self::cxl_dram(),
            "bam-ssd" | "bam" => Self::bam_ssd(),
            "example-flash" | "example" => Self::example_flash(),
            "xlfdd" | "xlfdd-x16" => Self::xlfdd_array(),
            _ => return None,
        })
    }
}

impl LinkProfile {
    pub fn new(label: impl Into<String>, bandwidth: f64, nmax: u32) -> Result<Self> {
        let p = LinkProfile {
            bandwidth,
            nmax,
            label: label.into(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0) || self.nmax == 0 {
            return Err(Error::config(format!(
                "link {:?} needs bandwidth > 0 and nmax >= 1",
                self.label
            )));
        }
        Ok(())
    }

    /// PCIe Gen 3.0 x16, effective 12,000 MB/s, 256 outstanding.
    pub fn pcie_gen3() -> Self {
        LinkProfile {
            bandwidth: 12_000.0 * MB_PER_S,
            nmax: 256,
            label: "gen3".into(),
        }
    }

    /// PCIe Gen 4.0 x16, effective 24,000 MB/s, 768 outstanding.
    pub fn pcie_gen4() -> Self {
        LinkProfile {
            bandwidth: 24_000.0 * MB_PER_S,
            nmax: 768,
            label: "gen4".into(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "gen3" | "pcie3" => Some(Self::pcie_gen3()),
            "gen4" | "pcie4" => Some(Self::pcie_gen4()),
            _ => None,
        }
    }
}

/// `Nmax / L` in requests per second.
fn latency_rate(dev: &DeviceProfile, link: &LinkProfile) -> f64 {
    link.nmax as f64 * NS_PER_S / dev.latency_ns
}

/// `T = min{S d, (Nmax / L) d, W}` in bytes/second.
pub fn throughput(dev: &DeviceProfile, link: &LinkProfile, d: f64) -> f64 {
    let iops_bound = dev.iops * d;
    let latency_bound = latency_rate(dev, link) * d;
    iops_bound.min(latency_bound).min(link.bandwidth)
}

/// Slope of `T` below the bandwidth cap: `min{S, Nmax / L}`.
pub fn slope(dev: &DeviceProfile, link: &LinkProfile) -> f64 {
    dev.iops.min(latency_rate(dev, link))
}

/// `t = D / T` in seconds.
pub fn runtime(total_bytes: f64, throughput: f64) -> Result<f64> {
    if !(throughput > 0.0) {
        return Err(Error::config("runtime needs a positive throughput"));
    }
    Ok(total_bytes / throughput)
}

/// Little's law: requests in flight `N = T L / d`.
pub fn concurrency(throughput: f64, latency_ns: f64, d: f64) -> f64 {
    throughput * latency_ns / NS_PER_S / d
}

/// Smallest transfer size that saturates the link: `W / s`.
pub fn optimal_transfer(dev: &DeviceProfile, link: &LinkProfile) -> f64 {
    link.bandwidth / slope(dev, link)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Requirements {
    /// Minimum device IOPS, `W / d`.
    pub min_iops: f64,
    /// Maximum tolerable latency in ns, `Nmax d / W`.
    pub max_latency_ns: f64,
}

/// Device capability at which `min{S, Nmax / L} d = W` holds with equality.
pub fn requirements(link: &LinkProfile, d: f64) -> Requirements {
    Requirements {
        min_iops: link.bandwidth / d,
        max_latency_ns: link.nmax as f64 * d / link.bandwidth * NS_PER_S,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub d_bytes: u64,
    pub total_bytes: u64,
    pub throughput: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeCurve {
    pub points: Vec<CurvePoint>,
    /// Transfer size with the shortest predicted runtime.
    pub argmin_d: u64,
}

/// Runtime for a cache-line-granular design (`d = a`) at each transfer size:
/// `D` from replay, `T` from the throughput model.
pub fn predict_runtime_curve(
    trace: &AccessTrace,
    transfer_sizes: &[u64],
    dev: &DeviceProfile,
    link: &LinkProfile,
    cache_capacity_bytes: u64,
) -> Result<RuntimeCurve> {
    if transfer_sizes.is_empty() {
        return Err(Error::config(
            "runtime curve needs at least one transfer size",
        ));
    }
    dev.validate()?;
    link.validate()?;
    let mut points = Vec::with_capacity(transfer_sizes.len());
    for &d in transfer_sizes {
        let ledger = replay_cached(
            trace,
            &AlignmentConfig::cached_block(d, cache_capacity_bytes),
        )?;
        let t = throughput(dev, link, d as f64);
        points.push(CurvePoint {
            d_bytes: d,
            total_bytes: ledger.fetched_bytes,
            throughput: t,
            runtime_s: runtime(ledger.fetched_bytes as f64, t)?,
        });
    }
    let argmin_d = points
        .iter()
        .min_by(|a, b| a.runtime_s.total_cmp(&b.runtime_s))
        .map(|p| p.d_bytes)
        .unwrap();
    Ok(RuntimeCurve { points, argmin_d })
}

pub const CURVE_CSV_HEADER: &str = "d_bytes,total_bytes_D,throughput_Bps,runtime_s";

pub fn write_curve_csv<W: Write + ?Sized>(w: &mut W, curve: &RuntimeCurve) -> Result<()> {
    writeln!(w, "{CURVE_CSV_HEADER}")?;
    for p in &curve.points {
        writeln!(
            w,
            "{},{},{},{}",
            p.d_bytes, p.total_bytes, p.throughput, p.runtime_s
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_throughput_example() {
        let dev = DeviceProfile::example_flash();
        let link = LinkProfile::pcie_gen4();
        for d in [1.0f64, 64.0, 500.0, 4096.0] {
            let expected = (100.0 * d).min(48.0 * d).min(24_000.0) * MB_PER_S;
            assert_eq!(throughput(&dev, &link, d), expected);
        }
        assert_eq!(slope(&dev, &link), 48e6);
    }

    #[test]
    fn large_transfers_hit_bandwidth() {
        let t = throughput(
            &DeviceProfile::example_flash(),
            &LinkProfile::pcie_gen4(),
            1e6,
        );
        assert_eq!(t, 24e9);
    }

    #[test]
    fn iops_limited_boundary() {
        let mut dev = DeviceProfile::bam_ssd();
        dev.latency_ns = 1.0;
        let link = LinkProfile::pcie_gen4();
        // 6e6 * 4096 = 24.576e9 > W
        assert_eq!(throughput(&dev, &link, 4096.0), 24e9);
        assert_eq!(throughput(&dev, &link, 2048.0), 12_288.0 * MB_PER_S);
        assert_eq!(slope(&dev, &link), 6e6);
    }

    #[test]
    fn host_dram_slope() {
        let s = slope(&DeviceProfile::host_dram(), &LinkProfile::pcie_gen4());
        assert_eq!(s, 640e6);
        assert!((s * 89.6 - 57_344.0 * MB_PER_S).abs() < 1e-3);
    }

    #[test]
    fn runtime_basics() {
        assert_eq!(runtime(24e9, 24e9).unwrap(), 1.0);
        assert_eq!(runtime(48e9, 24e9).unwrap(), 2.0);
        assert!(runtime(1.0, 0.0).is_err());
    }

    #[test]
    fn concurrency_examples() {
        let n = concurrency(5_700.0 * MB_PER_S, 1440.0, 64.0);
        assert!((n - 128.0).abs() < 1.0, "{n}");
        assert_eq!(concurrency(0.0, 1440.0, 64.0), 0.0);
    }

    #[test]
    fn optimal_transfer_examples() {
        let link = LinkProfile::pcie_gen4();
        assert_eq!(optimal_transfer(&DeviceProfile::bam_ssd(), &link), 4000.0);
        assert_eq!(
            optimal_transfer(&DeviceProfile::example_flash(), &link),
            500.0
        );
        let mut wide = link.clone();
        wide.bandwidth *= 2.0;
        assert_eq!(optimal_transfer(&DeviceProfile::bam_ssd(), &wide), 8000.0);
    }

    #[test]
    fn requirement_examples() {
        let r = requirements(&LinkProfile::pcie_gen4(), 89.6);
        assert!((r.min_iops / 268e6 - 1.0).abs() < 0.01);
        assert!((r.max_latency_ns / 2870.0 - 1.0).abs() < 0.01);
        let r = requirements(&LinkProfile::pcie_gen3(), 89.6);
        assert!((r.min_iops / 134e6 - 1.0).abs() < 0.01);
        assert!((r.max_latency_ns / 1910.0 - 1.0).abs() < 0.01);
        assert_eq!(
            requirements(&LinkProfile::pcie_gen4(), 256.0).min_iops,
            93.75e6
        );
    }

    #[test]
    fn profile_validation() {
        assert!(DeviceProfile::new("x", 0.0, 1.0).is_err());
        assert!(DeviceProfile::new("x", 1.0, 0.0).is_err());
        assert!(LinkProfile::new("x", 1.0, 0).is_err());
        assert!(LinkProfile::new("x", 1.0, 1).is_ok());
        assert!(DeviceProfile::preset("bam").is_some());
        assert!(LinkProfile::preset("gen5").is_none());
    }
}
