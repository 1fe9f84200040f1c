//! Edge-list access traces and their on-disk forms.
//!
//! Binary stream, little-endian:
//!
//! ```text
//! "TRCE" | version: u16 = 1 | pad: u16 = 0 | record_count: u64
//! record_count x (step_index: u32, byte_offset: u64, byte_length: u32)
//! ```

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::graph::EdgeSublist;

pub const TRACE_MAGIC: &[u8; 4] = b"TRCE";
pub const TRACE_VERSION: u16 = 1;
pub const TRACE_HEADER_LEN: usize = 16;
pub const TRACE_RECORD_LEN: usize = 16;

/// Ordered batches of sublist reads. All reads in one step are issued
/// concurrently by one traversal iteration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccessTrace {
    reads: Vec<EdgeSublist>,
    // start index of each step in `reads`
    step_starts: Vec<usize>,
    useful_bytes: u64,
}

impl AccessTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_steps<I, S>(steps: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = EdgeSublist>,
    {
        let mut t = AccessTrace::new();
        for step in steps {
            t.begin_step();
            for r in step {
                t.push(r);
            }
        }
        t
    }

    pub fn begin_step(&mut self) {
        self.step_starts.push(self.reads.len());
    }

    /// Appends a read to the current step, opening one if none exists.
    pub fn push(&mut self, read: EdgeSublist) {
        if self.step_starts.is_empty() {
            self.begin_step();
        }
        self.useful_bytes += read.byte_length;
        self.reads.push(read);
    }

    pub fn num_steps(&self) -> usize {
        self.step_starts.len()
    }

    pub fn num_reads(&self) -> usize {
        self.reads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reads.is_empty()
    }

    /// Total requested bytes `E`.
    pub fn useful_bytes_total(&self) -> u64 {
        self.useful_bytes
    }

    pub fn step(&self, i: usize) -> &[EdgeSublist] {
        let start = self.step_starts[i];
        let end = self
            .step_starts
            .get(i + 1)
            .copied()
            .unwrap_or(self.reads.len());
        &self.reads[start..end]
    }

    pub fn steps(&self) -> impl Iterator<Item = &[EdgeSublist]> + '_ {
        (0..self.num_steps()).map(move |i| self.step(i))
    }

    /// All reads in issue order.
    pub fn reads(&self) -> &[EdgeSublist] {
        &self.reads
    }

    /// Binary export. Steps with no reads are not representable and vanish.
    pub fn write_binary<W: Write + ?Sized>(&self, w: &mut W) -> Result<()> {
        w.write_all(TRACE_MAGIC)?;
        w.write_all(&TRACE_VERSION.to_le_bytes())?;
        w.write_all(&0u16.to_le_bytes())?;
        w.write_all(&(self.reads.len() as u64).to_le_bytes())?;
        for (step, reads) in self.steps().enumerate() {
            let step = u32::try_from(step).map_err(|_| Error::format("too many steps"))?;
            for r in reads {
                let len = u32::try_from(r.byte_length)
                    .map_err(|_| Error::format("sublist longer than 4 GiB"))?;
                let mut rec = [0u8; TRACE_RECORD_LEN];
                rec[0..4].copy_from_slice(&step.to_le_bytes());
                rec[4..12].copy_from_slice(&r.byte_offset.to_le_bytes());
                rec[12..16].copy_from_slice(&len.to_le_bytes());
                w.write_all(&rec)?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let truncated = |e: std::io::Error| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::format("truncated trace"),
            _ => Error::Io(e),
        };
        let mut header = [0u8; TRACE_HEADER_LEN];
        r.read_exact(&mut header).map_err(truncated)?;
        if &header[0..4] != TRACE_MAGIC {
            return Err(Error::format("bad magic, expected \"TRCE\""));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != TRACE_VERSION {
            return Err(Error::format(format!(
                "unsupported trace version {version}"
            )));
        }
        let count = u64::from_le_bytes(header[8..16].try_into().unwrap());
        let mut trace = AccessTrace::new();
        let mut last_step: Option<u32> = None;
        let mut rec = [0u8; TRACE_RECORD_LEN];
        for _ in 0..count {
            r.read_exact(&mut rec).map_err(truncated)?;
            let step = u32::from_le_bytes(rec[0..4].try_into().unwrap());
            let read = EdgeSublist {
                byte_offset: u64::from_le_bytes(rec[4..12].try_into().unwrap()),
                byte_length: u32::from_le_bytes(rec[12..16].try_into().unwrap()) as u64,
            };
            match last_step {
                Some(s) if s == step => {}
                Some(s) if s > step => {
                    return Err(Error::format(format!("step index {step} after {s}")))
                }
                _ => trace.begin_step(),
            }
            last_step = Some(step);
            trace.push(read);
        }
        Ok(trace)
    }

    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "step,byte_offset,byte_length")?;
        for (step, reads) in self.steps().enumerate() {
            for r in reads {
                writeln!(w, "{step},{},{}", r.byte_offset, r.byte_length)?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut trace = AccessTrace::new();
        let mut last_step: Option<u64> = None;
        let mut header_seen = false;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                header_seen = true;
                continue;
            }
            let fields: Vec<u64> = line
                .split(',')
                .map(|f| f.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::format(format!("trace csv line {}: {e}", i + 1)))?;
            let [step, off, len] = fields[..] else {
                return Err(Error::format(format!(
                    "trace csv line {}: need 3 fields",
                    i + 1
                )));
            };
            if last_step != Some(step) {
                trace.begin_step();
                last_step = Some(step);
            }
            trace.push(EdgeSublist {
                byte_offset: off,
                byte_length: len,
            });
        }
        Ok(trace)
    }
}
