//! On-disk DtN cache: `<stem>.nodes.csv` (index, x, y, weight) plus `<stem>.bin`,
//! a little-endian header followed by `n·n` complex kernel entries, row-major.

use num_complex::Complex64;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::DtnMatrix;
use crate::error::{Error, Result};
use crate::geometry::DiskGrid;

const MAGIC: &[u8; 8] = b"CGODTN01";

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("nodes.csv"), stem.with_extension("bin"))
}

pub fn write_dtn_cache(dtn: &DtnMatrix, stem: &Path) -> Result<()> {
    let (csv, bin) = paths(stem);
    let g = dtn.grid();
    let mut out = String::from("index,x,y,weight\n");
    for (k, (z, w)) in g.boundary_nodes().iter().zip(g.boundary_weights()).enumerate() {
        out.push_str(&format!("{k},{:.17e},{:.17e},{:.17e}\n", z.re, z.im, w));
    }
    fs::write(csv, out)?;

    let n = dtn.size();
    let mut bytes = Vec::with_capacity(40 + 16 * n * n);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&g.radius().to_le_bytes());
    bytes.extend_from_slice(&(g.n_radial() as u64).to_le_bytes());
    bytes.extend_from_slice(&(g.n_angular() as u64).to_le_bytes());
    bytes.extend_from_slice(&(n as u64).to_le_bytes());
    for a in dtn.kernel() {
        bytes.extend_from_slice(&a.re.to_le_bytes());
        bytes.extend_from_slice(&a.im.to_le_bytes());
    }
    fs::File::create(bin)?.write_all(&bytes)?;
    Ok(())
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; N]> {
    let s = bytes
        .get(*at..*at + N)
        .ok_or_else(|| Error::InvalidArgument("truncated DtN cache".into()))?;
    *at += N;
    Ok(s.try_into().expect("slice length"))
}

/// Reads a cache written by [`write_dtn_cache`]; the grid is rebuilt from the header.
pub fn read_dtn_cache(stem: &Path) -> Result<DtnMatrix> {
    let (_, bin) = paths(stem);
    let bytes = fs::read(bin)?;
    let mut at = 0;
    if &take::<8>(&bytes, &mut at)? != MAGIC {
        return Err(Error::InvalidArgument("not a DtN cache file".into()));
    }
    let radius = f64::from_le_bytes(take(&bytes, &mut at)?);
    let nr = u64::from_le_bytes(take(&bytes, &mut at)?) as usize;
    let na = u64::from_le_bytes(take(&bytes, &mut at)?) as usize;
    let n = u64::from_le_bytes(take(&bytes, &mut at)?) as usize;
    let grid = Arc::new(DiskGrid::new(radius, nr, na)?);
    if n != grid.n_boundary() || bytes.len() != at + 16 * n * n {
        return Err(Error::InvalidArgument("DtN cache size does not match its header".into()));
    }
    let kernel = (0..n * n)
        .map(|_| {
            let re = f64::from_le_bytes(take(&bytes, &mut at)?);
            let im = f64::from_le_bytes(take(&bytes, &mut at)?);
            Ok(Complex64::new(re, im))
        })
        .collect::<Result<Vec<_>>>()?;
    DtnMatrix::from_kernel(grid, kernel)
}
