//! Field serialization.
//!
//! Binary layout (little-endian): `d: u64`, `L: u64`, `n: u64`, `m: f64`,
//! then `(L·n)^d` values as `f64` in row-major order.
//! CSV layout: header `i0[,i1[,i2]],value`, one row per grid point.

use std::io::{Read, Write};

use super::field::ScalarField;
use super::grid::TorusGrid;
use crate::error::{LabError, Result};

pub const HEADER_BYTES: usize = 32;

pub fn write_binary<W: Write>(mut w: W, field: &ScalarField, mass: f64) -> Result<()> {
    let g = field.grid();
    w.write_all(&(g.dim() as u64).to_le_bytes())?;
    w.write_all(&(g.cells() as u64).to_le_bytes())?;
    w.write_all(&(g.points_per_cell() as u64).to_le_bytes())?;
    w.write_all(&mass.to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a field and the mass stored in its header.
pub fn read_binary<R: Read>(mut r: R) -> Result<(ScalarField, f64)> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)?;
        Ok(word)
    };
    let dim = u64::from_le_bytes(next(&mut r)?) as usize;
    let cells = u64::from_le_bytes(next(&mut r)?) as usize;
    let ppc = u64::from_le_bytes(next(&mut r)?) as usize;
    let mass = f64::from_le_bytes(next(&mut r)?);
    let grid = TorusGrid::new(dim, cells, ppc)
        .map_err(|e| LabError::InvalidParameter(format!("bad field header: {e}")))?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(f64::from_le_bytes(next(&mut r)?));
    }
    Ok((ScalarField::from_values(grid, values)?, mass))
}

pub fn write_csv<W: Write>(mut w: W, field: &ScalarField) -> Result<()> {
    let g = field.grid();
    let names: Vec<String> = (0..g.dim()).map(|a| format!("i{a}")).collect();
    writeln!(w, "{},value", names.join(","))?;
    for (idx, v) in field.values().iter().enumerate() {
        let m = g.multi_index(idx);
        let cols: Vec<String> = m[..g.dim()].iter().map(|i| i.to_string()).collect();
        writeln!(w, "{},{:e}", cols.join(","), v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn binary_roundtrip(dim in 1usize..=2, cells in 1usize..4, ppc in 1usize..4, seed in 0u64..1000, mass in 0.1f64..5.0) {
            let g = TorusGrid::new(dim, cells, ppc).unwrap();
            let f = ScalarField::from_fn(g, |x| ((x[0] + 2.0 * x[1]) * seed as f64).sin());
            let mut buf = Vec::new();
            write_binary(&mut buf, &f, mass).unwrap();
            prop_assert_eq!(buf.len(), HEADER_BYTES + 8 * g.len());
            let (back, m) = read_binary(buf.as_slice()).unwrap();
            prop_assert_eq!(back, f);
            prop_assert_eq!(m, mass);
        }
    }

    #[test]
    fn header_is_little_endian() {
        let g = TorusGrid::new(1, 3, 2).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &ScalarField::constant(g, 1.0), 2.0).unwrap();
        assert_eq!(&buf[0..8], &1u64.to_le_bytes());
        assert_eq!(&buf[8..16], &3u64.to_le_bytes());
        assert_eq!(&buf[16..24], &2u64.to_le_bytes());
        assert_eq!(&buf[24..32], &2.0f64.to_le_bytes());
    }

    #[test]
    fn csv_has_index_columns() {
        let g = TorusGrid::new(2, 1, 2).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &ScalarField::constant(g, 0.5)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i0,i1,value");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "0,1,5e-1");
    }
}
