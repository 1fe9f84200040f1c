//! Replays an [`AccessTrace`] through an address-alignment model to count the
//! bytes actually fetched from external memory.
//!
//! A sublist read `[off, off + len)` always covers the aligned interval
//! `[floor(off / a) * a, ceil((off + len) / a) * a)`. The three modes differ
//! in how that coverage becomes requests:
//!
//! - `CachedBlock`: one request per `a`-byte block, filtered through a fully
//!   associative LRU cache of `a`-byte lines (transfer size `d = a`).
//! - `GpuCacheline`: coverage is cut at `max_transfer`-byte line boundaries and
//!   each piece is one request (32/64/96/128 B at defaults).
//! - `VariableTransfer`: coverage is cut into `ceil(span / max_transfer)`
//!   requests; no cache.

use std::collections::BTreeMap;
use std::io::Write;
use std::num::NonZeroUsize;

use lru::LruCache;

use crate::error::{Error, Result};
use crate::graph::EdgeSublist;
use crate::traversal::AccessTrace;

/// Cache capacity meaning "never evict".
pub const UNLIMITED_CACHE: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransferMode {
    CachedBlock,
    GpuCacheline,
    VariableTransfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignmentConfig {
    pub alignment_bytes: u64,
    pub mode: TransferMode,
    /// Largest single request; ignored by `CachedBlock`.
    pub max_transfer_bytes: u64,
    /// 0 disables the cache, [`UNLIMITED_CACHE`] never evicts.
    pub cache_capacity_bytes: u64,
}

impl AlignmentConfig {
    pub fn cached_block(alignment_bytes: u64, cache_capacity_bytes: u64) -> Self {
        AlignmentConfig {
            alignment_bytes,
            mode: TransferMode::CachedBlock,
            max_transfer_bytes: alignment_bytes,
            cache_capacity_bytes,
        }
    }

    /// 32 B sectors coalesced up to a 128 B line.
    pub fn gpu_cacheline() -> Self {
        AlignmentConfig {
            alignment_bytes: 32,
            mode: TransferMode::GpuCacheline,
            max_transfer_bytes: 128,
            cache_capacity_bytes: 0,
        }
    }

    /// 16 B alignment, any multiple of 16 B up to 2 KiB per request.
    pub fn variable_transfer() -> Self {
        AlignmentConfig {
            alignment_bytes: 16,
            mode: TransferMode::VariableTransfer,
            max_transfer_bytes: 2048,
            cache_capacity_bytes: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.alignment_bytes;
        if a < 8 || !a.is_power_of_two() {
            return Err(Error::config(format!(
                "alignment {a} must be a power of two >= 8"
            )));
        }
        if self.mode != TransferMode::CachedBlock
            && (self.max_transfer_bytes < a || !self.max_transfer_bytes.is_multiple_of(a))
        {
            return Err(Error::config(format!(
                "max transfer {} must be a positive multiple of alignment {a}",
                self.max_transfer_bytes
            )));
        }
        if self.mode == TransferMode::GpuCacheline && !self.max_transfer_bytes.is_power_of_two() {
            return Err(Error::config("cache line size must be a power of two"));
        }
        if self.mode == TransferMode::VariableTransfer && self.cache_capacity_bytes != 0 {
            return Err(Error::config("variable-transfer replay has no cache"));
        }
        Ok(())
    }
}

/// Useful vs fetched byte accounting for one replay.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadLedger {
    pub alignment_bytes: u64,
    /// `E`: bytes the traversal asked for.
    pub useful_bytes: u64,
    /// `D`: bytes moved from external memory.
    pub fetched_bytes: u64,
    pub raf: f64,
    /// request size in bytes -> number of requests
    pub request_size_histogram: BTreeMap<u64, u64>,
    /// `d`: mean bytes per request.
    pub avg_transfer_bytes: f64,
}

impl ReadLedger {
    /// Derives `D`, RAF and `d` from a request-size histogram.
    pub fn from_histogram(
        alignment_bytes: u64,
        useful_bytes: u64,
        request_size_histogram: BTreeMap<u64, u64>,
    ) -> Result<Self> {
        if useful_bytes == 0 {
            return Err(Error::EmptyTrace);
        }
        let (fetched, requests) = request_size_histogram
            .iter()
            .fold((0u64, 0u64), |(d, n), (&size, &count)| {
                (d + size * count, n + count)
            });
        Ok(ReadLedger {
            alignment_bytes,
            useful_bytes,
            fetched_bytes: fetched,
            raf: fetched as f64 / useful_bytes as f64,
            avg_transfer_bytes: if requests == 0 {
                0.0
            } else {
                fetched as f64 / requests as f64
            },
            request_size_histogram,
        })
    }

    pub fn requests(&self) -> u64 {
        self.request_size_histogram.values().sum()
    }
}

/// Half-open aligned byte interval covering a read; `None` for empty reads.
pub fn aligned_cover(read: &EdgeSublist, alignment: u64) -> Option<(u64, u64)> {
    if read.byte_length == 0 {
        return None;
    }
    let start = read.byte_offset / alignment * alignment;
    let end = read.end().div_ceil(alignment) * alignment;
    Some((start, end))
}

enum BlockCache {
    Off,
    Lru(LruCache<u64, ()>),
}

impl BlockCache {
    fn new(capacity_bytes: u64, block_bytes: u64) -> Self {
        if capacity_bytes == UNLIMITED_CACHE {
            return BlockCache::Lru(LruCache::unbounded());
        }
        match NonZeroUsize::new((capacity_bytes / block_bytes) as usize) {
            Some(n) => BlockCache::Lru(LruCache::new(n)),
            None => BlockCache::Off,
        }
    }

    /// True on hit. Misses are inserted, evicting the least recently used.
    fn access(&mut self, block: u64) -> bool {
        match self {
            BlockCache::Off => false,
            BlockCache::Lru(c) => {
                if c.get(&block).is_some() {
                    true
                } else {
                    c.put(block, ());
                    false
                }
            }
        }
    }
}

pub fn replay(trace: &AccessTrace, cfg: &AlignmentConfig) -> Result<ReadLedger> {
    match cfg.mode {
        TransferMode::CachedBlock => replay_cached(trace, cfg),
        TransferMode::GpuCacheline => replay_gpu_cacheline(trace, cfg),
        TransferMode::VariableTransfer => replay_variable(trace, cfg),
    }
}

fn check_mode(cfg: &AlignmentConfig, mode: TransferMode) -> Result<()> {
    if cfg.mode != mode {
        return Err(Error::config(format!(
            "replay expects {mode:?} mode, got {:?}",
            cfg.mode
        )));
    }
    cfg.validate()
}

fn nonempty(trace: &AccessTrace) -> Result<()> {
    if trace.useful_bytes_total() == 0 {
        Err(Error::EmptyTrace)
    } else {
        Ok(())
    }
}

/// Block-granular replay with an LRU cache that persists across steps.
pub fn replay_cached(trace: &AccessTrace, cfg: &AlignmentConfig) -> Result<ReadLedger> {
    check_mode(cfg, TransferMode::CachedBlock)?;
    nonempty(trace)?;
    let a = cfg.alignment_bytes;
    let mut cache = BlockCache::new(cfg.cache_capacity_bytes, a);
    let mut misses = 0u64;
    for read in trace.reads() {
        if let Some((start, end)) = aligned_cover(read, a) {
            for block in start / a..end / a {
                if !cache.access(block) {
                    misses += 1;
                }
            }
        }
    }
    let mut hist = BTreeMap::new();
    if misses > 0 {
        hist.insert(a, misses);
    }
    ReadLedger::from_histogram(a, trace.useful_bytes_total(), hist)
}

/// GPU zero-copy replay: sector coverage coalesced within each cache line.
/// With a nonzero cache, sectors already resident are dropped and only the
/// remaining contiguous runs inside a line become requests.
pub fn replay_gpu_cacheline(trace: &AccessTrace, cfg: &AlignmentConfig) -> Result<ReadLedger> {
    check_mode(cfg, TransferMode::GpuCacheline)?;
    nonempty(trace)?;
    let sector = cfg.alignment_bytes;
    let line = cfg.max_transfer_bytes;
    let mut cache = BlockCache::new(cfg.cache_capacity_bytes, sector);
    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    for read in trace.reads() {
        let Some((start, end)) = aligned_cover(read, sector) else {
            continue;
        };
        let mut run = 0u64;
        let mut pos = start;
        while pos < end {
            if !cache.access(pos / sector) {
                run += sector;
            } else if run > 0 {
                *hist.entry(run).or_default() += 1;
                run = 0;
            }
            pos += sector;
            if (pos % line == 0 || pos == end) && run > 0 {
                *hist.entry(run).or_default() += 1;
                run = 0;
            }
        }
    }
    ReadLedger::from_histogram(sector, trace.useful_bytes_total(), hist)
}

/// Variable-size requests: each sublist's aligned cover is split into
/// `max_transfer`-byte requests plus one remainder.
pub fn replay_variable(trace: &AccessTrace, cfg: &AlignmentConfig) -> Result<ReadLedger> {
    check_mode(cfg, TransferMode::VariableTransfer)?;
    nonempty(trace)?;
    let max = cfg.max_transfer_bytes;
    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    for read in trace.reads() {
        let Some((start, end)) = aligned_cover(read, cfg.alignment_bytes) else {
            continue;
        };
        let span = end - start;
        let full = span / max;
        if full > 0 {
            *hist.entry(max).or_default() += full;
        }
        if span % max != 0 {
            *hist.entry(span % max).or_default() += 1;
        }
    }
    ReadLedger::from_histogram(cfg.alignment_bytes, trace.useful_bytes_total(), hist)
}

/// One cached-block replay per alignment, same cache capacity in bytes.
pub fn raf_sweep(
    trace: &AccessTrace,
    alignments: &[u64],
    cache_capacity_bytes: u64,
) -> Result<Vec<ReadLedger>> {
    if alignments.is_empty() {
        return Err(Error::config(
            "alignment sweep needs at least one alignment",
        ));
    }
    alignments
        .iter()
        .map(|&a| {
            replay_cached(
                trace,
                &AlignmentConfig::cached_block(a, cache_capacity_bytes),
            )
        })
        .collect()
}

pub const LEDGER_CSV_HEADER: &str =
    "alignment_bytes,useful_bytes,fetched_bytes,raf,avg_transfer_bytes";

pub fn write_ledgers_csv<W: Write + ?Sized>(w: &mut W, ledgers: &[ReadLedger]) -> Result<()> {
    writeln!(w, "{LEDGER_CSV_HEADER}")?;
    for l in ledgers {
        writeln!(
            w,
            "{},{},{},{},{}",
            l.alignment_bytes, l.useful_bytes, l.fetched_bytes, l.raf, l.avg_transfer_bytes
        )?;
    }
    Ok(())
}
