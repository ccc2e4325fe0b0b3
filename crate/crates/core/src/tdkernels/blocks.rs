//! Lag blocks, their compact storage and the on-disk cache.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::influence::influence;
use super::PotentialKind;
use crate::error::{Error, Result};
use crate::geometry::BoundaryMesh;

/// Influence matrix of one time lag.
#[derive(Clone, Debug, PartialEq)]
pub struct LagBlock {
    pub lag: usize,
    pub matrix: DMatrix<f64>,
}

/// All lag blocks of one potential. Uniform circle meshes keep only the
/// first row of each (circulant) block.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelHistory {
    pub kind: PotentialKind,
    pub c: f64,
    pub dt: f64,
    pub n: usize,
    pub max_lag: usize,
    pub circulant: bool,
    data: Vec<f64>,
}

impl KernelHistory {
    pub fn entry(&self, lag: usize, row: usize, col: usize) -> f64 {
        let n = self.n;
        if self.circulant {
            self.data[lag * n + (col + n - row) % n]
        } else {
            self.data[(lag * n + row) * n + col]
        }
    }

    /// First row of a circulant block.
    pub fn first_row(&self, lag: usize) -> Option<&[f64]> {
        self.circulant.then(|| &self.data[lag * self.n..(lag + 1) * self.n])
    }

    pub fn block(&self, lag: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |r, c| self.entry(lag, r, c))
    }

    pub fn blocks(&self) -> Vec<LagBlock> {
        (0..=self.max_lag)
            .map(|lag| LagBlock {
                lag,
                matrix: self.block(lag),
            })
            .collect()
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }
}

/// Computes every lag block `0..=max_lag` of `kind` on `mesh`.
pub fn assemble_history(kind: PotentialKind, mesh: &BoundaryMesh, c: f64, dt: f64, max_lag: usize) -> Result<KernelHistory> {
    if max_lag < 1 {
        return Err(Error::Config("max_lag must be at least 1".into()));
    }
    let n = mesh.len();
    let circulant = mesh.is_uniform_circle();
    let rows = if circulant { 1 } else { n };
    let tasks: Vec<(usize, usize)> = (0..=max_lag).flat_map(|lag| (0..rows).map(move |r| (lag, r))).collect();
    let chunks: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(lag, row)| (0..n).map(|col| influence(kind, mesh, c, dt, lag, row, col)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    Ok(KernelHistory {
        kind,
        c,
        dt,
        n,
        max_lag,
        circulant,
        data: chunks.concat(),
    })
}

/// Dense lag blocks `0..=max_lag`.
pub fn assemble_lag_blocks(kind: PotentialKind, mesh: &BoundaryMesh, c: f64, dt: f64, max_lag: usize) -> Result<Vec<LagBlock>> {
    Ok(assemble_history(kind, mesh, c, dt, max_lag)?.blocks())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    shape: String,
    fingerprint: String,
    n: usize,
    kind: String,
    c: f64,
    dt: f64,
    max_lag: usize,
    layout: String,
    values: usize,
}

/// Directory of cached kernel histories: `<key>.bin` holds little-endian
/// f64 values block after block (row-major, or first rows for circulant
/// layouts), `<key>.json` the metadata.
#[derive(Clone, Debug)]
pub struct KernelCache {
    dir: PathBuf,
}

impl KernelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(KernelCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn sidecar(kind: PotentialKind, mesh: &BoundaryMesh, c: f64, dt: f64, max_lag: usize) -> Sidecar {
        let circulant = mesh.is_uniform_circle();
        let n = mesh.len();
        Sidecar {
            shape: mesh.shape.name().to_string(),
            fingerprint: mesh.fingerprint(),
            n,
            kind: kind.tag().to_string(),
            c,
            dt,
            max_lag,
            layout: if circulant { "circulant-first-row" } else { "dense-row-major" }.into(),
            values: (max_lag + 1) * n * if circulant { 1 } else { n },
        }
    }

    fn key(meta: &Sidecar) -> String {
        let text = format!(
            "{}|{}|{}|{:016x}|{:016x}|{}",
            meta.fingerprint,
            meta.n,
            meta.kind,
            meta.c.to_bits(),
            meta.dt.to_bits(),
            meta.max_lag
        );
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{}-{}-{h:016x}", meta.shape, meta.n)
    }

    /// Loads a cached history or computes and stores it.
    pub fn get_or_assemble(&self, kind: PotentialKind, mesh: &BoundaryMesh, c: f64, dt: f64, max_lag: usize) -> Result<KernelHistory> {
        let meta = Self::sidecar(kind, mesh, c, dt, max_lag);
        let key = Self::key(&meta);
        let (bin, json) = (self.dir.join(format!("{key}.bin")), self.dir.join(format!("{key}.json")));
        // an unreadable or stale sidecar is a cache miss
        let stored = fs::read_to_string(&json).ok().and_then(|t| serde_json::from_str::<Sidecar>(&t).ok());
        if let Some(stored) = stored {
            if stored == meta {
                let bytes = fs::read(&bin)?;
                if let Some(data) = decode(&bytes, meta.values) {
                    return Ok(KernelHistory {
                        kind,
                        c,
                        dt,
                        n: meta.n,
                        max_lag,
                        circulant: mesh.is_uniform_circle(),
                        data,
                    });
                }
            }
        }
        let hist = assemble_history(kind, mesh, c, dt, max_lag)?;
        let bytes: Vec<u8> = hist.data.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(&bin, bytes)?;
        fs::write(&json, serde_json::to_string_pretty(&meta)?)?;
        Ok(hist)
    }
}

/// Little-endian f64 payload of exactly `count` values.
pub fn decode(bytes: &[u8], count: usize) -> Option<Vec<f64>> {
    if bytes.len() != count * 8 {
        return None;
    }
    Some(
        bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
            .collect(),
    )
}
