//! Binary dumps with JSON sidecar headers.
//!
//! Data is little-endian `f64`, complex values interleaved `(re, im)`, in the
//! row-major order used in memory. The header lives next to the data file at
//! `<path>.json`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kernel::KernelSlice;
use crate::maximal::MaximalProfile;
use crate::symbol::Symbol;
use crate::torus::{PeriodicFunction, SpectralCoefficients, TorusGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DumpKind {
    Function,
    Spectrum,
    Symbol,
    Kernel,
    Maximal,
}

/// Fields common to every header; kind-specific fields are kept in `extra`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    pub kind: DumpKind,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, Value>,
}

impl DumpHeader {
    fn new(grid: TorusGrid, kind: DumpKind) -> Self {
        Self {
            n: grid.dim(),
            size: grid.size(),
            kind,
            extra: serde_json::Map::new(),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.n, self.size)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_raw(path: &Path, header: &DumpHeader, data: impl Iterator<Item = f64>) -> Result<()> {
    let bytes: Vec<u8> = data.flat_map(f64::to_le_bytes).collect();
    fs::write(path, bytes)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(header)?)?;
    Ok(())
}

fn complex_stream(values: &[Complex64]) -> impl Iterator<Item = f64> + '_ {
    values.iter().flat_map(|z| [z.re, z.im])
}

pub fn write_function(path: &Path, f: &PeriodicFunction) -> Result<()> {
    let header = DumpHeader::new(f.grid(), DumpKind::Function);
    write_raw(path, &header, complex_stream(f.samples()))
}

pub fn write_spectrum(path: &Path, c: &SpectralCoefficients) -> Result<()> {
    let header = DumpHeader::new(c.window().grid(), DumpKind::Spectrum);
    write_raw(path, &header, complex_stream(c.coeffs()))
}

pub fn write_symbol(path: &Path, sigma: &Symbol) -> Result<()> {
    let mut header = DumpHeader::new(sigma.grid(), DumpKind::Symbol).with("axes", json!(["x", "xi"]));
    if let Some(params) = sigma.params() {
        header = header.with("generator", params.clone());
    }
    if let Some(class) = sigma.claimed_class() {
        header = header.with("class", serde_json::to_value(class)?);
    }
    write_raw(path, &header, complex_stream(sigma.values()))
}

pub fn write_kernel(path: &Path, kernel: &KernelSlice) -> Result<()> {
    let header = DumpHeader::new(kernel.grid(), DumpKind::Kernel)
        .with("axes", json!(["y", "u"]))
        .with("k", json!(kernel.k))
        .with("rho", json!(kernel.rho));
    write_raw(path, &header, complex_stream(kernel.values()))
}

pub fn write_maximal(path: &Path, profile: &MaximalProfile) -> Result<()> {
    let header = DumpHeader::new(profile.grid, DumpKind::Maximal)
        .with("r", json!(profile.r))
        .with("family", json!("dyadic"))
        .with("operator", serde_json::to_value(profile.kind)?);
    write_raw(path, &header, profile.values.iter().copied())
}

pub fn read_header(path: &Path) -> Result<DumpHeader> {
    Ok(serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?)
}

fn read_f64(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::SizeMismatch(format!("{} bytes is not a whole number of f64", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// Header and complex payload; real payloads get zero imaginary parts.
pub fn read_dump(path: &Path) -> Result<(DumpHeader, Vec<Complex64>)> {
    let header = read_header(path)?;
    let raw = read_f64(path)?;
    let values = if header.kind == DumpKind::Maximal {
        raw.into_iter().map(|v| Complex64::new(v, 0.0)).collect()
    } else {
        raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
    };
    Ok((header, values))
}

/// Reads a function dump (real maximal profiles are accepted as functions too).
pub fn read_function(path: &Path) -> Result<PeriodicFunction> {
    let (header, values) = read_dump(path)?;
    match header.kind {
        DumpKind::Function | DumpKind::Maximal => PeriodicFunction::new(header.grid()?, values),
        other => Err(Error::InvalidParameter {
            name: "input",
            reason: format!("expected a function dump, found {other:?}"),
        }),
    }
}

/// Reads a symbol dump as an array-backed symbol.
pub fn read_symbol(path: &Path) -> Result<Symbol> {
    let (header, values) = read_dump(path)?;
    if header.kind != DumpKind::Symbol {
        return Err(Error::InvalidParameter {
            name: "symbol",
            reason: format!("expected a symbol dump, found {:?}", header.kind),
        });
    }
    Symbol::from_values(header.grid()?, values)
}
