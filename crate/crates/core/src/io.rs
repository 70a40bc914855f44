//! Field dumps, energy traces and JSON output.
//!
//! Field dump layout (little endian): magic `SBPF`, `u32` version, `u32` N,
//! `f64` L, then N³ `f64` values in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{make_grid, ScalarField};
use crate::minimize::TraceRow;

pub const FIELD_MAGIC: &[u8; 4] = b"SBPF";
pub const FIELD_VERSION: u32 = 1;

pub fn write_field_to<W: Write>(mut w: W, field: &ScalarField) -> Result<()> {
    let grid = field.grid();
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&FIELD_VERSION.to_le_bytes())?;
    w.write_all(&(grid.points_per_axis() as u32).to_le_bytes())?;
    w.write_all(&grid.half_length().to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_from<R: Read>(mut r: R) -> Result<ScalarField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)
        .map_err(|_| Error::Format("truncated header".into()))?;
    let version = u32::from_le_bytes(word);
    if version != FIELD_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    r.read_exact(&mut word)
        .map_err(|_| Error::Format("truncated header".into()))?;
    let n = u32::from_le_bytes(word) as usize;
    let mut dword = [0u8; 8];
    r.read_exact(&mut dword)
        .map_err(|_| Error::Format("truncated header".into()))?;
    let l = f64::from_le_bytes(dword);
    let grid = make_grid(l, n).map_err(|e| Error::Format(format!("bad grid in header: {e}")))?;
    let mut bytes = vec![0u8; grid.len() * 8];
    r.read_exact(&mut bytes)
        .map_err(|_| Error::Format(format!("expected {} values", grid.len())))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ScalarField::from_values(&grid, values)
}

pub fn write_field(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    write_field_to(BufWriter::new(File::create(path)?), field)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    read_field_from(BufReader::new(File::open(path)?))
}

pub fn write_trace_to<W: Write>(mut w: W, trace: &[TraceRow]) -> Result<()> {
    let nodal = trace.iter().any(|r| r.s.is_some());
    write!(w, "iter,total,kinetic_potential,nonlocal,nonlinear,residual,t")?;
    if nodal {
        write!(w, ",s")?;
    }
    writeln!(w)?;
    for r in trace {
        write!(
            w,
            "{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.iter, r.total, r.kinetic_potential, r.nonlocal, r.nonlinear, r.residual, r.t
        )?;
        if nodal {
            write!(w, ",{:e}", r.s.unwrap_or(f64::NAN))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: impl AsRef<Path>, trace: &[TraceRow]) -> Result<()> {
    write_trace_to(BufWriter::new(File::create(path)?), trace)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
