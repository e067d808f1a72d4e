//! Grid file format: a JSON header `{version, L, N, dtype:"c128"}` at
//! `<path>.json` and `N` little-endian 16-byte complex samples (f64 re, f64
//! im) in the sidecar `<path>.bin`.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct GridHeader {
    pub version: u32,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub dtype: String,
}

fn paths(base: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    (base.with_extension("json"), base.with_extension("bin"))
}

pub fn write_grid_function(base: &Path, f: &GridFunction<f64>) -> Result<()> {
    let (hdr_path, bin_path) = paths(base);
    let header = GridHeader {
        version: FORMAT_VERSION,
        length: f.spec().length(),
        points: f.spec().points(),
        dtype: "c128".into(),
    };
    let json = serde_json::to_string_pretty(&header).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(hdr_path, json)?;
    let mut bytes = Vec::with_capacity(16 * f.spec().points());
    for z in f.samples() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    fs::write(bin_path, bytes)?;
    Ok(())
}

pub fn read_grid_function(base: &Path) -> Result<GridFunction<f64>> {
    let (hdr_path, bin_path) = paths(base);
    let header: GridHeader = serde_json::from_str(&fs::read_to_string(hdr_path)?)
        .map_err(|e| Error::Format(e.to_string()))?;
    if header.version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {}", header.version)));
    }
    if header.dtype != "c128" {
        return Err(Error::Format(format!("unsupported dtype {}", header.dtype)));
    }
    let bytes = fs::read(bin_path)?;
    if bytes.len() != 16 * header.points {
        return Err(Error::Format(format!(
            "expected {} bytes, got {}",
            16 * header.points,
            bytes.len()
        )));
    }
    let samples: Vec<Complex<f64>> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex::new(re, im)
        })
        .collect();
    let spec = GridSpec::new(header.length, header.points)?;
    GridFunction::from_samples(spec, samples)
}
