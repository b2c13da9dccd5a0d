//! Field snapshot container.
//!
//! Binary, little-endian:
//!
//! ```text
//! magic       8 bytes   "LVFIELD1"
//! n           u32       spatial dimension
//! N           u32       lateral points per periodic direction
//! M           u32       vertical points (equals N for the periodic box)
//! L           f64       lateral period
//! H           f64       height (equals L for the periodic box)
//! geometry    u8        0 periodic, 1 halfstrip, 2 channel
//! components  u32
//! samples     f64 x components x grid points, component-major,
//!             each component row-major with x_n fastest
//! ```

use std::io::{Read, Write};

use super::field::ScalarField;
use super::grid::{Geometry, Grid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"LVFIELD1";

pub fn write_snapshot(w: &mut impl Write, components: &[ScalarField]) -> Result<()> {
    let grid = *components
        .first()
        .ok_or_else(|| Error::InvalidArgument("snapshot needs at least one component".into()))?
        .grid();
    if components.iter().any(|c| *c.grid() != grid) {
        return Err(Error::DimensionMismatch("snapshot components on different grids".into()));
    }
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&(grid.m() as u32).to_le_bytes())?;
    w.write_all(&grid.length().to_le_bytes())?;
    w.write_all(&grid.height().to_le_bytes())?;
    w.write_all(&[grid.geometry().code()])?;
    w.write_all(&(components.len() as u32).to_le_bytes())?;
    for c in components {
        for v in c.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_snapshot(r: &mut impl Read) -> Result<Vec<ScalarField>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("not a field snapshot (bad magic)".into()));
    }
    let dim = read_u32(r)? as usize;
    let n = read_u32(r)? as usize;
    let m = read_u32(r)? as usize;
    let length = read_f64(r)?;
    let height = read_f64(r)?;
    let mut g = [0u8; 1];
    r.read_exact(&mut g)?;
    let geometry = Geometry::from_code(g[0])?;
    let count = read_u32(r)? as usize;
    let grid = Grid::new(dim, n, length, m, height, geometry)?;
    (0..count)
        .map(|_| {
            let values = (0..grid.len()).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
            ScalarField::from_values(grid, values)
        })
        .collect()
}

/// CSV of a 1D slice along `axis` through the grid point `anchor` (the index
/// along `axis` is ignored). Columns: coordinate, then one per component.
pub fn slice_csv(components: &[ScalarField], axis: usize, anchor: &[usize]) -> Result<String> {
    let grid = *components
        .first()
        .ok_or_else(|| Error::InvalidArgument("slice needs at least one component".into()))?
        .grid();
    if axis >= grid.dim() || anchor.len() != grid.dim() {
        return Err(Error::InvalidArgument(format!("bad slice axis {axis} or anchor {anchor:?}")));
    }
    let mut out = String::from("x");
    for c in 0..components.len() {
        out.push_str(&format!(",c{c}"));
    }
    out.push('\n');
    let mut idx = anchor.to_vec();
    for k in 0..grid.axis_len(axis) {
        idx[axis] = k;
        let flat = grid.flatten(&idx);
        out.push_str(&format!("{:.11e}", grid.coord(axis, k)));
        for c in components {
            out.push_str(&format!(",{:.11e}", c.values()[flat]));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Grid::half_strip(3, 4, 2.0, 5, 1.5).unwrap();
        let a = ScalarField::from_fn(g, |x| x[0] + 10.0 * x[2]);
        let b = ScalarField::from_fn(g, |x| x[1] * x[2]);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(buf.len(), 8 + 12 + 16 + 1 + 4 + 2 * 8 * g.len());
        let back = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(back, vec![a, b]);
        buf[0] = b'X';
        assert!(read_snapshot(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn vertical_slice() {
        let g = Grid::channel(2, 4, 1.0, 4, 3.0).unwrap();
        let f = ScalarField::from_fn(g, |x| x[1]);
        let csv = slice_csv(&[f], 1, &[2, 0]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "x,c0");
        assert!(lines[4].starts_with("3.00000000000e0,3.00000000000e0"));
    }
}
