//! Parsing of human-readable quantities.
//!
//! Inputs may carry a suffix; outputs are always in canonical units: bytes,
//! nanoseconds, requests/second and bytes/second. Decimal prefixes (kB, MB)
//! are powers of 1000, binary ones (KiB, MiB) powers of 1024.

use crate::error::{Error, Result};

fn split_number(input: &str) -> Result<(f64, String)> {
    let s = input.trim();
    let end = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '_'
                || ((c == '-' || c == '+')
                    && (i == 0 || matches!(s.as_bytes()[i - 1], b'e' | b'E')))
                || ((c == 'e' || c == 'E')
                    && s[i + 1..]
                        .starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let num: String = s[..end].chars().filter(|&c| c != '_').collect();
    let value: f64 = num
        .parse()
        .map_err(|_| Error::config(format!("not a number: {input:?}")))?;
    if !value.is_finite() || value < 0.0 {
        return Err(Error::config(format!(
            "expected a non-negative quantity: {input:?}"
        )));
    }
    Ok((value, s[end..].trim().to_string()))
}

fn byte_multiplier(suffix: &str) -> Option<f64> {
    Some(match suffix {
        "" | "B" | "b" => 1.0,
        "k" | "K" | "kB" | "KB" => 1e3,
        "M" | "MB" => 1e6,
        "G" | "GB" => 1e9,
        "T" | "TB" => 1e12,
        "Ki" | "KiB" => 1024.0,
        "Mi" | "MiB" => 1024f64.powi(2),
        "Gi" | "GiB" => 1024f64.powi(3),
        "Ti" | "TiB" => 1024f64.powi(4),
        _ => return None,
    })
}

/// Byte count, possibly fractional (a mean transfer size such as 89.6).
pub fn parse_bytes_f64(input: &str) -> Result<f64> {
    let (v, suffix) = split_number(input)?;
    let m = byte_multiplier(&suffix)
        .ok_or_else(|| Error::config(format!("unknown size unit in {input:?}")))?;
    Ok(v * m)
}

/// Whole byte count: `4KiB`, `16 GiB`, `512`.
pub fn parse_bytes(input: &str) -> Result<u64> {
    let v = parse_bytes_f64(input)?;
    if v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(Error::config(format!(
            "{input:?} is not a whole number of bytes"
        )));
    }
    Ok(v as u64)
}

/// Duration in nanoseconds: `1.44us`, `2 µs`, `1700ns`, `3ms`. Bare numbers
/// are nanoseconds.
pub fn parse_time_ns(input: &str) -> Result<f64> {
    let (v, suffix) = split_number(input)?;
    let m = match suffix.as_str() {
        "" | "ns" => 1.0,
        "ps" => 1e-3,
        "us" | "µs" | "μs" => 1e3,
        "ms" => 1e6,
        "s" => 1e9,
        _ => return Err(Error::config(format!("unknown time unit in {input:?}"))),
    };
    Ok(v * m)
}

/// Request rate in requests/second: `100MIOPS`, `6 MIOPS`, `1.5e8`.
pub fn parse_iops(input: &str) -> Result<f64> {
    let (v, suffix) = split_number(input)?;
    let m = match suffix.as_str() {
        "" | "IOPS" | "/s" => 1.0,
        "K" | "KIOPS" | "kIOPS" => 1e3,
        "M" | "MIOPS" => 1e6,
        "G" | "GIOPS" => 1e9,
        _ => return Err(Error::config(format!("unknown rate unit in {input:?}"))),
    };
    Ok(v * m)
}

/// Bandwidth in bytes/second: `24000MB/s`, `12 GB/s`, `5.5GiB/s`. Bare
/// numbers are bytes/second; `inf` means unlimited.
pub fn parse_bandwidth(input: &str) -> Result<f64> {
    let s = input.trim();
    if matches!(s, "inf" | "unlimited") {
        return Ok(f64::INFINITY);
    }
    let (v, suffix) = split_number(s)?;
    let unit = suffix
        .strip_suffix("/s")
        .or_else(|| suffix.strip_suffix("ps"))
        .unwrap_or(&suffix);
    let m = byte_multiplier(unit)
        .ok_or_else(|| Error::config(format!("unknown bandwidth unit in {input:?}")))?;
    Ok(v * m)
}

/// Comma-separated list parsed with `f`.
pub fn parse_list<T>(input: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = input
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::config(format!("empty list: {input:?}")));
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_bytes("4KiB").unwrap(), 4096);
        assert_eq!(parse_bytes("4 kB").unwrap(), 4000);
        assert_eq!(parse_bytes("16GiB").unwrap(), 16 << 30);
        assert_eq!(parse_bytes("1_024").unwrap(), 1024);
        assert_eq!(parse_bytes_f64("89.6").unwrap(), 89.6);
        assert!(parse_bytes("89.6").is_err());
        assert!(parse_bytes("4 parsecs").is_err());
        assert!(parse_bytes("-4").is_err());
    }

    #[test]
    fn times() {
        assert_eq!(parse_time_ns("1.44us").unwrap(), 1440.0);
        assert_eq!(parse_time_ns("2 µs").unwrap(), 2000.0);
        assert_eq!(parse_time_ns("1700").unwrap(), 1700.0);
        assert_eq!(parse_time_ns("3ms").unwrap(), 3e6);
    }

    #[test]
    fn rates() {
        assert_eq!(parse_iops("100MIOPS").unwrap(), 100e6);
        assert_eq!(parse_iops("6 MIOPS").unwrap(), 6e6);
        assert_eq!(parse_iops("1.5e8").unwrap(), 1.5e8);
        assert_eq!(parse_bandwidth("24000MB/s").unwrap(), 24e9);
        assert_eq!(parse_bandwidth("12 GB/s").unwrap(), 12e9);
        assert_eq!(parse_bandwidth("1KiB/s").unwrap(), 1024.0);
        assert!(parse_bandwidth("inf").unwrap().is_infinite());
    }

    #[test]
    fn lists() {
        assert_eq!(
            parse_list("32, 128,4KiB", parse_bytes).unwrap(),
            vec![32, 128, 4096]
        );
        assert!(parse_list(" , ", parse_bytes).is_err());
    }
}
