use std::io::Write;

use super::grid::Grid;
use crate::{Error, Result};

/// Length of the textual header of the flat binary format.
pub const HEADER_LEN: usize = 64;

/// Metadata written ahead of a lattice function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DumpHeader {
    pub grid: Grid,
    pub dim_phi: f64,
    pub seed: u64,
}

impl DumpHeader {
    /// `d=.. n=.. L=.. dim_phi=.. seed=..`, space padded to 63 bytes plus a
    /// newline.
    pub fn encode(&self) -> Result<[u8; HEADER_LEN]> {
        let text = format!(
            "d={} n={} L={} dim_phi={} seed={}",
            self.grid.d, self.grid.n_per_side, self.grid.box_length, self.dim_phi, self.seed
        );
        if text.len() > HEADER_LEN - 1 {
            return Err(Error::Format(format!("header `{text}` exceeds {} bytes", HEADER_LEN - 1)));
        }
        let mut out = [b' '; HEADER_LEN];
        out[..text.len()].copy_from_slice(text.as_bytes());
        out[HEADER_LEN - 1] = b'\n';
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::Format("malformed field dump header".into());
        let text = std::str::from_utf8(bytes.get(..HEADER_LEN).ok_or_else(bad)?).map_err(|_| bad())?;
        let mut d = None;
        let mut n = None;
        let mut l = None;
        let mut dim = None;
        let mut seed = None;
        for tok in text.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(bad)?;
            match k {
                "d" => d = v.parse().ok(),
                "n" => n = v.parse().ok(),
                "L" => l = v.parse().ok(),
                "dim_phi" => dim = v.parse().ok(),
                "seed" => seed = v.parse().ok(),
                _ => return Err(bad()),
            }
        }
        Ok(DumpHeader {
            grid: Grid::new(d.ok_or_else(bad)?, n.ok_or_else(bad)?, l.ok_or_else(bad)?)?,
            dim_phi: dim.ok_or_else(bad)?,
            seed: seed.ok_or_else(bad)?,
        })
    }
}

/// Header followed by little-endian `f64` values in row-major site order.
pub fn write_binary<W: Write>(out: &mut W, header: &DumpHeader, values: &[f64]) -> std::io::Result<()> {
    let h = header
        .encode()
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    out.write_all(&h)?;
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary(bytes: &[u8]) -> Result<(DumpHeader, Vec<f64>)> {
    let header = DumpHeader::decode(bytes)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * header.grid.sites() {
        return Err(Error::Format(format!(
            "expected {} values, found {} bytes",
            header.grid.sites(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, values))
}

/// Largest grid exported as CSV.
pub const CSV_MAX_SITES: usize = 1 << 16;

/// CSV with columns `x_1..x_d,value`.
pub fn write_csv<W: Write>(out: &mut W, grid: &Grid, values: &[f64]) -> std::io::Result<()> {
    if grid.sites() > CSV_MAX_SITES {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!("grid of {} sites is too large for CSV export", grid.sites()),
        ));
    }
    let cols: Vec<String> = (1..=grid.d).map(|a| format!("x{a}")).collect();
    writeln!(out, "{},value", cols.join(","))?;
    for (s, v) in values.iter().enumerate() {
        let pos: Vec<String> = grid.position(s).iter().map(|x| format!("{x}")).collect();
        writeln!(out, "{},{v:e}", pos.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let grid = Grid::new(2, 4, 3.5).unwrap();
        let h = DumpHeader {
            grid,
            dim_phi: 0.25,
            seed: 42,
        };
        let vals: Vec<f64> = (0..16).map(|i| i as f64 * 0.5 - 3.0).collect();
        let mut buf = Vec::new();
        write_binary(&mut buf, &h, &vals).unwrap();
        assert_eq!(buf.len(), 64 + 16 * 8);
        let (h2, v2) = read_binary(&buf).unwrap();
        assert_eq!(h, h2);
        assert_eq!(vals, v2);
    }
}
