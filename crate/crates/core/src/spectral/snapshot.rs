//! MOCF field snapshots.
//!
//! Layout (little-endian): magic `b"MOCF"`, `u32` version (1), `u32` dim,
//! `u32` points per axis, `f64` box length, then `n^dim` `f64` real-space
//! samples in row-major order (last axis fastest).

use std::path::Path;

use super::field::ScalarField;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::io::write_atomic;

pub const MAGIC: &[u8; 4] = b"MOCF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8;

pub fn encode(field: &ScalarField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.length().to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<ScalarField, String> {
    if bytes.len() < HEADER_LEN {
        return Err(format!("truncated header ({} bytes)", bytes.len()));
    }
    if &bytes[0..4] != MAGIC {
        return Err("missing MOCF magic".into());
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let dim = word(8) as usize;
    let n = word(12) as usize;
    let length = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let grid = Grid::new(dim, n, length).map_err(|e| e.to_string())?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * grid.len() {
        return Err(format!("expected {} sample bytes, found {}", 8 * grid.len(), body.len()));
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    ScalarField::new(grid, data).map_err(|e| e.to_string())
}

pub fn write_snapshot(path: &Path, field: &ScalarField) -> Result<()> {
    write_atomic(path, &encode(field))
}

pub fn read_snapshot(path: &Path) -> Result<ScalarField> {
    let bytes = std::fs::read(path).map_err(|e| Error::Snapshot { path: path.to_path_buf(), reason: e.to_string() })?;
    decode(&bytes).map_err(|reason| Error::Snapshot { path: path.to_path_buf(), reason })
}
