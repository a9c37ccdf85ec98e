//! Binary grid dumps used by every module for checkpointing.
//!
//! Layout: one ASCII header line `dims,resolutions,periods,components`
//! (lists are space-separated), a terminating `\n`, then `components` blocks
//! of little-endian 64-bit floats, each block row-major over the axes in
//! declaration order. The byte length must match the header exactly; short or
//! trailing data is rejected. The parser is total: arbitrary input bytes
//! produce either a parsed dump or a [`GridError::Dump`], never a panic.

use std::fs;
use std::path::Path;

use crate::error::{GridError, Result};
use crate::field::ScalarField;
use crate::grid::PeriodicGrid;

/// Upper bounds keeping hostile headers from requesting absurd allocations.
const MAX_HEADER: usize = 4096;
const MAX_DIMS: usize = 8;
const MAX_RES: usize = 4096;
const MAX_COMPONENTS: usize = 64;
const MAX_POINTS: usize = 1 << 28;

/// Serialize component arrays over a common grid.
pub fn encode(grid: &PeriodicGrid, components: &[&[f64]]) -> Result<Vec<u8>> {
    if components.is_empty() || components.len() > MAX_COMPONENTS {
        return Err(GridError::Dump(format!(
            "component count {} outside 1..={MAX_COMPONENTS}",
            components.len()
        )));
    }
    for c in components {
        if c.len() != grid.len() {
            return Err(GridError::ShapeMismatch {
                got: vec![c.len()],
                expected: vec![grid.len()],
            });
        }
    }
    let res: Vec<String> = grid.resolution().iter().map(|r| r.to_string()).collect();
    let per: Vec<String> = grid.period().iter().map(|p| format!("{p:?}")).collect();
    let header = format!(
        "{},{},{},{}\n",
        grid.dims(),
        res.join(" "),
        per.join(" "),
        components.len()
    );
    let mut out = Vec::with_capacity(header.len() + components.len() * grid.len() * 8);
    out.extend_from_slice(header.as_bytes());
    for c in components {
        for v in *c {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Parse a dump from raw bytes: the grid and one value vector per component.
pub fn parse(bytes: &[u8]) -> Result<(PeriodicGrid, Vec<Vec<f64>>)> {
    let nl = bytes
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| GridError::Dump("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| GridError::Dump("header is not ASCII/UTF-8".into()))?;
    let mut parts = header.split(',');
    let mut next = |what: &str| {
        parts
            .next()
            .ok_or_else(|| GridError::Dump(format!("header missing {what} section")))
    };
    let dims: usize = next("dims")?
        .trim()
        .parse()
        .map_err(|_| GridError::Dump("bad dims".into()))?;
    if dims == 0 || dims > MAX_DIMS {
        return Err(GridError::Dump(format!("dims {dims} outside 1..={MAX_DIMS}")));
    }
    let res_str = next("resolutions")?;
    let per_str = next("periods")?;
    let comp_str = next("components")?;
    if parts.next().is_some() {
        return Err(GridError::Dump("trailing header sections".into()));
    }

    let resolution: Vec<usize> = res_str
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| GridError::Dump(format!("bad resolution {t:?}"))))
        .collect::<Result<_>>()?;
    if resolution.len() != dims {
        return Err(GridError::Dump("resolution count != dims".into()));
    }
    if let Some(&r) = resolution.iter().find(|&&r| r > MAX_RES) {
        return Err(GridError::Dump(format!("resolution {r} exceeds {MAX_RES}")));
    }
    let period: Vec<f64> = per_str
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| GridError::Dump(format!("bad period {t:?}"))))
        .collect::<Result<_>>()?;
    if period.len() != dims {
        return Err(GridError::Dump("period count != dims".into()));
    }
    let components: usize = comp_str
        .trim()
        .parse()
        .map_err(|_| GridError::Dump("bad component count".into()))?;
    if components == 0 || components > MAX_COMPONENTS {
        return Err(GridError::Dump(format!(
            "component count {components} outside 1..={MAX_COMPONENTS}"
        )));
    }

    let grid = PeriodicGrid::new(&resolution, &period)?;
    let npts = grid.len();
    if npts > MAX_POINTS {
        return Err(GridError::Dump(format!("grid has {npts} points, cap {MAX_POINTS}")));
    }
    let body = &bytes[nl + 1..];
    let need = components
        .checked_mul(npts)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| GridError::Dump("size overflow".into()))?;
    if body.len() != need {
        return Err(GridError::Dump(format!(
            "body is {} bytes, header promises {need}",
            body.len()
        )));
    }
    let mut out = Vec::with_capacity(components);
    for c in 0..components {
        let block = &body[c * npts * 8..(c + 1) * npts * 8];
        out.push(
            block
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
                .collect(),
        );
    }
    Ok((grid, out))
}

fn vec_to_field(grid: &PeriodicGrid, values: Vec<f64>) -> Result<ScalarField> {
    ScalarField::from_values(
        grid,
        ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(grid.shape()), values)
            .map_err(|e| GridError::Dump(e.to_string()))?,
    )
}

/// Parse into scalar fields.
pub fn parse_fields(bytes: &[u8]) -> Result<(PeriodicGrid, Vec<ScalarField>)> {
    let (grid, comps) = parse(bytes)?;
    let fields = comps
        .into_iter()
        .map(|v| vec_to_field(&grid, v))
        .collect::<Result<_>>()?;
    Ok((grid, fields))
}

/// Write one or more scalar fields (all on the same grid) to a file.
pub fn save_fields(path: impl AsRef<Path>, fields: &[&ScalarField]) -> Result<()> {
    let grid = fields
        .first()
        .ok_or_else(|| GridError::Dump("no fields to save".into()))?
        .grid();
    let mut comps = Vec::with_capacity(fields.len());
    for f in fields {
        if f.grid() != grid {
            return Err(GridError::GridMismatch);
        }
        comps.push(f.as_slice());
    }
    fs::write(path, encode(grid, &comps)?)?;
    Ok(())
}

pub fn save_scalar(path: impl AsRef<Path>, f: &ScalarField) -> Result<()> {
    save_fields(path, &[f])
}

pub fn load_fields(path: impl AsRef<Path>) -> Result<(PeriodicGrid, Vec<ScalarField>)> {
    parse_fields(&fs::read(path)?)
}

pub fn load_scalar(path: impl AsRef<Path>) -> Result<ScalarField> {
    let (_, mut fields) = load_fields(path)?;
    if fields.len() != 1 {
        return Err(GridError::Dump(format!("expected 1 component, found {}", fields.len())));
    }
    Ok(fields.pop().expect("len checked"))
}
