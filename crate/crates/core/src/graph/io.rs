//! Text edge-list ingestion and the binary CSR file format.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! "CSRG" | version: u16 = 1 | pad: u16 = 0 | num_vertices: u64 | num_edges: u64
//! offsets: (num_vertices + 1) x u64
//! edges:   num_edges x u64
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{build_csr, check_budget, CsrGraph, VertexId, DEFAULT_EDGE_BUDGET};
use crate::error::{Error, Result};

pub const CSR_MAGIC: &[u8; 4] = b"CSRG";
pub const CSR_VERSION: u16 = 1;
pub const CSR_HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directedness {
    Directed,
    /// Every pair is inserted in both directions.
    Undirected,
}

pub fn load_edge_list(path: impl AsRef<Path>, directedness: Directedness) -> Result<CsrGraph> {
    let path = path.as_ref();
    parse_edge_list(BufReader::new(File::open(path)?), path, directedness, None)
}

/// Like [`load_edge_list`] but with a fixed vertex count; any ID at or above
/// it is rejected.
pub fn load_edge_list_sized(
    path: impl AsRef<Path>,
    directedness: Directedness,
    num_vertices: u64,
) -> Result<CsrGraph> {
    let path = path.as_ref();
    parse_edge_list(
        BufReader::new(File::open(path)?),
        path,
        directedness,
        Some(num_vertices),
    )
}

/// Parses whitespace-separated `src dst` lines. Blank lines and lines starting
/// with `#` are skipped. Without an explicit vertex count the graph has
/// `max_id + 1` vertices.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    origin: &Path,
    directedness: Directedness,
    num_vertices: Option<u64>,
) -> Result<CsrGraph> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut pairs: Vec<(VertexId, VertexId)> = Vec::new();
    let mut max_id: Option<u64> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut id = |name: &str| -> Result<u64> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(line_no, format!("missing {name} vertex")))?;
            tok.parse::<u64>()
                .map_err(|e| parse_err(line_no, format!("bad {name} vertex {tok:?}: {e}")))
        };
        let (src, dst) = (id("source")?, id("target")?);
        if fields.next().is_some() {
            return Err(parse_err(line_no, "expected exactly two fields".into()));
        }
        for v in [src, dst] {
            match num_vertices {
                Some(n) if v >= n => {
                    return Err(Error::VertexOutOfRange {
                        vertex: v,
                        num_vertices: n,
                    })
                }
                None if v == u64::MAX => {
                    return Err(Error::VertexOutOfRange {
                        vertex: v,
                        num_vertices: u64::MAX,
                    })
                }
                _ => {}
            }
        }
        max_id = Some(max_id.map_or(src.max(dst), |m| m.max(src).max(dst)));
        pairs.push((src, dst));
    }

    let n = num_vertices.unwrap_or_else(|| max_id.map_or(0, |m| m + 1));
    let slots = match directedness {
        Directedness::Directed => pairs.len() as u128,
        Directedness::Undirected => 2 * pairs.len() as u128,
    };
    check_budget(n, slots, DEFAULT_EDGE_BUDGET)?;
    let pairs = &pairs;
    Ok(build_csr(n, || {
        pairs.iter().flat_map(move |&(u, v)| {
            let back = (directedness == Directedness::Undirected).then_some((v, u));
            std::iter::once((u, v)).chain(back)
        })
    }))
}

pub fn save_csr(graph: &CsrGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csr(graph, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csr<W: Write + ?Sized>(graph: &CsrGraph, w: &mut W) -> Result<()> {
    w.write_all(CSR_MAGIC)?;
    w.write_all(&CSR_VERSION.to_le_bytes())?;
    w.write_all(&0u16.to_le_bytes())?;
    w.write_all(&graph.num_vertices().to_le_bytes())?;
    w.write_all(&graph.num_edges().to_le_bytes())?;
    for &x in graph.offsets().iter().chain(graph.edges()) {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn load_csr(path: impl AsRef<Path>) -> Result<CsrGraph> {
    read_csr(&mut BufReader::new(File::open(path)?))
}

pub fn read_csr<R: Read>(r: &mut R) -> Result<CsrGraph> {
    let mut header = [0u8; CSR_HEADER_LEN];
    read_exact_or_truncated(r, &mut header, "header")?;
    if &header[0..4] != CSR_MAGIC {
        return Err(Error::format("bad magic, expected \"CSRG\""));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != CSR_VERSION {
        return Err(Error::format(format!(
            "unsupported CSR version {version}, expected {CSR_VERSION}"
        )));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let m = u64::from_le_bytes(header[16..24].try_into().unwrap());
    check_budget(n, m as u128, DEFAULT_EDGE_BUDGET)?;
    let offsets = read_u64s(r, n as usize + 1, "offsets")?;
    let edges = read_u64s(r, m as usize, "edges")?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::format("trailing bytes after edge array"));
    }
    CsrGraph::from_parts(offsets, edges)
}

fn read_u64s<R: Read>(r: &mut R, count: usize, what: &str) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0u8; 8 * 8192];
    let mut remaining = count;
    while remaining > 0 {
        let chunk = remaining.min(8192);
        read_exact_or_truncated(r, &mut buf[..chunk * 8], what)?;
        out.extend(
            buf[..chunk * 8]
                .chunks_exact(8)
                .map(|c| u64::from_le_bytes(c.try_into().unwrap())),
        );
        remaining -= chunk;
    }
    Ok(out)
}

fn read_exact_or_truncated<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::format(format!("truncated file in {what}")),
        _ => Error::Io(e),
    })
}
