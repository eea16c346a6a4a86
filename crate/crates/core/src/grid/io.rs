use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, SampledField, Space};
use crate::error::{Error, Result};

/// JSON sidecar describing a binary field file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dim: usize,
    pub box_length: f64,
    pub samples_per_axis: usize,
    pub space: Space,
    pub seed: Option<u64>,
    pub encoding: String,
}

const ENCODING: &str = "complex-f64-le";

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Writes `<stem>.bin` (interleaved re/im little-endian f64) and `<stem>.json`.
pub fn write_field(stem: &Path, field: &SampledField, seed: Option<u64>) -> Result<()> {
    let (bin, json) = paths(stem);
    let g = field.grid();
    let header = FieldHeader {
        dim: g.dim,
        box_length: g.box_length,
        samples_per_axis: g.samples_per_axis,
        space: field.space(),
        seed,
        encoding: ENCODING.to_string(),
    };
    let mut bytes = Vec::with_capacity(field.values().len() * 16);
    for v in field.values() {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(bin, bytes)?;
    let text = serde_json::to_string_pretty(&header).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(json, text + "\n")?;
    Ok(())
}

pub fn read_field(stem: &Path) -> Result<(SampledField, FieldHeader)> {
    let (bin, json) = paths(stem);
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(json)?)
        .map_err(|e| Error::Format(e.to_string()))?;
    if header.encoding != ENCODING {
        return Err(Error::Format(format!(
            "unknown encoding {}",
            header.encoding
        )));
    }
    let grid = Grid::new(header.dim, header.box_length, header.samples_per_axis)?;
    let bytes = fs::read(bin)?;
    if bytes.len() != grid.len() * 16 {
        return Err(Error::Format(format!(
            "expected {} bytes, found {}",
            grid.len() * 16,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok((
        SampledField::from_values(grid, header.space, values)?,
        header,
    ))
}
