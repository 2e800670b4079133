//! Field snapshots on disk.
//!
//! Format: one text header line
//! `LOGNS1 d=<d> n=<n> nx=<nx> ny=<ny> L=<L>` terminated by `\n`, followed
//! by the raw samples as little-endian `f64` pairs `(re, im)` in row-major
//! axis order. The header prints `L` with 17 significant digits so the
//! round trip is bitwise exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::domain::{Field, GridSpec};
use crate::error::{Error, Result};

const MAGIC: &str = "LOGNS1";

pub fn write_field_snapshot(field: &Field, path: &Path) -> Result<()> {
    let g = field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "{MAGIC} d={} n={} nx={} ny={} L={:.16e}",
        g.d, g.n, g.points_x, g.points_y, g.half_width
    )?;
    for z in field.samples() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_snapshot(path: &Path) -> Result<Field> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        let read = r.read(&mut byte)?;
        if read == 0 {
            return Err(Error::Snapshot("missing header line".into()));
        }
        if byte[0] == b'\n' {
            break;
        }
        header.push(byte[0]);
        if header.len() > 256 {
            return Err(Error::Snapshot("header line too long".into()));
        }
    }
    let header = String::from_utf8(header)
        .map_err(|_| Error::Snapshot("header is not valid UTF-8".into()))?;
    let grid = parse_header(&header)?;

    let expected = grid.len() * 16;
    let mut payload = Vec::with_capacity(expected);
    r.read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(Error::Snapshot(format!(
            "payload size mismatch: expected {} bytes, got {}",
            expected,
            payload.len()
        )));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for chunk in payload.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        samples.push(Complex64::new(re, im));
    }
    Field::from_samples(grid, samples)
}

fn parse_header(header: &str) -> Result<GridSpec> {
    let mut parts = header.split_whitespace();
    let magic = parts.next().unwrap_or("");
    if magic != MAGIC {
        return Err(Error::Snapshot(format!(
            "bad magic: expected {MAGIC}, got {magic:?}"
        )));
    }
    let mut d = None;
    let mut n = None;
    let mut nx = None;
    let mut ny = None;
    let mut l = None;
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Snapshot(format!("malformed header token {part:?}")))?;
        match key {
            "d" => d = Some(parse_usize(value, "d")?),
            "n" => n = Some(parse_usize(value, "n")?),
            "nx" => nx = Some(parse_usize(value, "nx")?),
            "ny" => ny = Some(parse_usize(value, "ny")?),
            "L" => {
                l = Some(
                    value
                        .parse::<f64>()
                        .map_err(|_| Error::Snapshot(format!("cannot parse L from {value:?}")))?,
                )
            }
            _ => return Err(Error::Snapshot(format!("unknown header key {key:?}"))),
        }
    }
    let (d, n, nx, ny, l) = match (d, n, nx, ny, l) {
        (Some(d), Some(n), Some(nx), Some(ny), Some(l)) => (d, n, nx, ny, l),
        _ => return Err(Error::Snapshot("incomplete header".into())),
    };
    GridSpec::new(d, n, nx, ny, l)
        .map_err(|e| Error::Snapshot(format!("invalid grid in header: {e}")))
}

fn parse_usize(value: &str, key: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Snapshot(format!("cannot parse {key} from {value:?}")))
}
