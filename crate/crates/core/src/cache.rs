//! On-disk store of spin-resolved spectra, one file per `(sector, lambda)`.
//!
//! Layout (little endian): magic, format version, build id, `L`, `lambda`,
//! `M`, `k`, `Z2`, `dim`, then energies, spins, residuals and the eigenvector
//! matrix (column major, re/im interleaved), followed by a SHA-256 of
//! everything before it.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::basis::{Parity, SectorLabel};
use crate::error::{Error, Result};
use crate::spectral::SpinResolvedSpectrum;

pub const CACHE_MAGIC: &[u8; 8] = b"SU2ETHSP";
pub const FORMAT_VERSION: u32 = 1;
pub const BUILD_ID: &str = concat!(env!("CARGO_PKG_NAME"), "-", env!("CARGO_PKG_VERSION"));
/// Environment variable naming the default cache root.
pub const CACHE_ENV: &str = "SU2ETH_CACHE";

/// Outcome of a cache lookup.
#[derive(Debug)]
pub enum CacheLookup {
    Hit(SpinResolvedSpectrum),
    Miss,
    /// Present but unusable (version, build, parameters or checksum).
    Stale(String),
}

#[derive(Debug, Clone)]
pub struct SpectrumCache {
    root: PathBuf,
}

impl SpectrumCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        SpectrumCache { root: root.into() }
    }

    /// Root from `SU2ETH_CACHE` if set, else `fallback`.
    pub fn from_env_or(fallback: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(v) if !v.is_empty() => SpectrumCache::new(PathBuf::from(v)),
            _ => SpectrumCache::new(fallback),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, sector: &SectorLabel, lambda: f64) -> PathBuf {
        self.root.join(format!("{}_lam{}.spec", sector.tag(), lambda))
    }

    pub fn load(&self, sector: &SectorLabel, lambda: f64) -> Result<CacheLookup> {
        let path = self.path_for(sector, lambda);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(CacheLookup::Miss),
            Err(e) => return Err(e.into()),
        };
        Ok(match decode(&bytes, sector, lambda) {
            Ok(spec) => CacheLookup::Hit(spec),
            Err(reason) => CacheLookup::Stale(reason),
        })
    }

    /// Load or fail with a message naming the sector.
    pub fn require(&self, sector: &SectorLabel, lambda: f64) -> Result<SpinResolvedSpectrum> {
        match self.load(sector, lambda)? {
            CacheLookup::Hit(s) => Ok(s),
            CacheLookup::Miss => Err(Error::MissingCache(format!("{} at lambda = {lambda}", sector.tag()))),
            CacheLookup::Stale(reason) => Err(Error::Cache {
                path: self.path_for(sector, lambda),
                reason,
            }),
        }
    }

    pub fn store(&self, spectrum: &SpinResolvedSpectrum, lambda: f64) -> Result<PathBuf> {
        fs::create_dir_all(&self.root)?;
        let path = self.path_for(&spectrum.sector, lambda);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&encode(spectrum, lambda))?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

fn z2_code(z: Option<Parity>) -> i8 {
    match z {
        Some(p) => p.sign() as i8,
        None => 0,
    }
}

pub fn encode(spec: &SpinResolvedSpectrum, lambda: f64) -> Vec<u8> {
    let s = &spec.sector;
    let dim = spec.dim();
    let mut out = Vec::with_capacity(64 + dim * (20 + 16 * dim));
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(BUILD_ID.len() as u32).to_le_bytes());
    out.extend_from_slice(BUILD_ID.as_bytes());
    out.extend_from_slice(&(s.length as u32).to_le_bytes());
    out.extend_from_slice(&lambda.to_le_bytes());
    out.extend_from_slice(&s.magnetization.to_le_bytes());
    out.extend_from_slice(&s.k_index.to_le_bytes());
    out.push(z2_code(s.z2) as u8);
    out.extend_from_slice(&(dim as u64).to_le_bytes());
    for e in &spec.energies {
        out.extend_from_slice(&e.to_le_bytes());
    }
    for sp in &spec.spins {
        out.extend_from_slice(&sp.to_le_bytes());
    }
    for r in &spec.spin_residuals {
        out.extend_from_slice(&r.to_le_bytes());
    }
    for v in spec.vectors.iter() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err("truncated file".into()),
        }
    }

    fn array<const N: usize>(&mut self) -> std::result::Result<[u8; N], String> {
        Ok(self.take(N)?.try_into().expect("slice length checked"))
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn i32(&mut self) -> std::result::Result<i32, String> {
        Ok(i32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

pub fn decode(
    bytes: &[u8],
    sector: &SectorLabel,
    lambda: f64,
) -> std::result::Result<SpinResolvedSpectrum, String> {
    if bytes.len() < 32 + CACHE_MAGIC.len() {
        return Err("truncated file".into());
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err("checksum mismatch".into());
    }
    let mut r = Reader { bytes: body, pos: 0 };
    if r.take(8)? != CACHE_MAGIC {
        return Err("bad magic".into());
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(format!("format version {version}, expected {FORMAT_VERSION}"));
    }
    let id_len = r.u32()? as usize;
    let id = r.take(id_len)?;
    if id != BUILD_ID.as_bytes() {
        return Err(format!("written by build {}", String::from_utf8_lossy(id)));
    }
    let length = r.u32()? as usize;
    let lam = r.f64()?;
    let m = r.i32()?;
    let k = r.i32()?;
    let z = r.take(1)?[0] as i8;
    if length != sector.length
        || lam.to_bits() != lambda.to_bits()
        || m != sector.magnetization
        || k != sector.k_index
        || z != z2_code(sector.z2)
    {
        return Err("header does not match the requested sector".into());
    }
    let dim = r.u64()? as usize;
    let mut energies = Vec::with_capacity(dim);
    for _ in 0..dim {
        energies.push(r.f64()?);
    }
    let mut spins = Vec::with_capacity(dim);
    for _ in 0..dim {
        spins.push(r.u32()?);
    }
    let mut spin_residuals = Vec::with_capacity(dim);
    for _ in 0..dim {
        spin_residuals.push(r.f64()?);
    }
    let mut data = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re = r.f64()?;
        let im = r.f64()?;
        data.push(Complex64::new(re, im));
    }
    if r.pos != body.len() {
        return Err("trailing bytes".into());
    }
    Ok(SpinResolvedSpectrum {
        sector: *sector,
        energies,
        vectors: DMatrix::from_vec(dim, dim, data),
        spins,
        spin_residuals,
    })
}
