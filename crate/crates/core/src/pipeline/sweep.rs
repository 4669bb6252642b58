//! Sector sweeps: diagonalize or load every block of a plan.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{SectorLabel, SymmetryBasis};
use crate::cache::{CacheLookup, SpectrumCache};
use crate::error::{Error, Result};
use crate::operators::CouplingSpec;
use crate::spectral::{solve_sector, SpinResolvedSpectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SectorStatus {
    CacheHit,
    Computed,
    /// A stale entry was replaced.
    Rebuilt { reason: String },
    /// Quarantined; the sweep carried on without it.
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorOutcome {
    pub sector: String,
    pub lambda: f64,
    #[serde(flatten)]
    pub status: SectorStatus,
    pub dim: usize,
    pub spin_counts: BTreeMap<u32, usize>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub outcomes: Vec<SectorOutcome>,
    /// Set when writing the cache failed; the sweep stopped early.
    pub disk_error: Option<String>,
}

impl SweepReport {
    pub fn hits(&self) -> usize {
        self.count(|s| matches!(s, SectorStatus::CacheHit))
    }

    pub fn diagonalizations(&self) -> usize {
        self.count(|s| matches!(s, SectorStatus::Computed | SectorStatus::Rebuilt { .. }))
    }

    pub fn failures(&self) -> Vec<&SectorOutcome> {
        self.outcomes
            .iter()
            .filter(|o| matches!(o.status, SectorStatus::Failed { .. }))
            .collect()
    }

    fn count(&self, f: impl Fn(&SectorStatus) -> bool) -> usize {
        self.outcomes.iter().filter(|o| f(&o.status)).count()
    }
}

/// Every sector of `(L, M)`.
pub fn plan(length: usize, magnetization: i32) -> Result<Vec<SectorLabel>> {
    SectorLabel::all_for(length, magnetization)
}

pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))
}

enum Step {
    Done(SectorOutcome),
    Disk(SectorOutcome, String),
}

fn ensure_one(cache: &SpectrumCache, sector: SectorLabel, lambda: f64) -> Step {
    let start = Instant::now();
    let outcome = |status, spec: Option<&SpinResolvedSpectrum>| SectorOutcome {
        sector: sector.tag(),
        lambda,
        status,
        dim: spec.map_or(0, |s| s.dim()),
        spin_counts: spec.map(|s| s.spin_counts()).unwrap_or_default(),
        seconds: start.elapsed().as_secs_f64(),
    };
    let stale = match cache.load(&sector, lambda) {
        Ok(CacheLookup::Hit(spec)) => return Step::Done(outcome(SectorStatus::CacheHit, Some(&spec))),
        Ok(CacheLookup::Miss) => None,
        Ok(CacheLookup::Stale(reason)) => {
            eprintln!("warning: rebuilding {}: {reason}", sector.tag());
            Some(reason)
        }
        Err(e) => Some(e.to_string()),
    };
    let solved = CouplingSpec::new(lambda).and_then(|c| solve_sector(sector, c));
    let spec = match solved {
        Ok((_, spec)) => spec,
        Err(e) => {
            eprintln!("warning: quarantining {}: {e}", sector.tag());
            return Step::Done(outcome(SectorStatus::Failed { reason: e.to_string() }, None));
        }
    };
    let status = match stale {
        Some(reason) => SectorStatus::Rebuilt { reason },
        None => SectorStatus::Computed,
    };
    match cache.store(&spec, lambda) {
        Ok(_) => Step::Done(outcome(status, Some(&spec))),
        Err(e) => Step::Disk(outcome(status, Some(&spec)), e.to_string()),
    }
}

/// Make sure every sector has a valid cache entry.
///
/// Sectors that fail to diagonalize are quarantined; a failed cache write
/// stops the sweep and is reported through `disk_error`.
pub fn ensure_spectra(
    cache: &SpectrumCache,
    sectors: &[SectorLabel],
    lambda: f64,
    workers: usize,
) -> Result<SweepReport> {
    let pool = thread_pool(workers)?;
    let steps: Vec<Option<Step>> = pool.install(|| {
        let abort = std::sync::atomic::AtomicBool::new(false);
        sectors
            .par_iter()
            .map(|&s| {
                if abort.load(std::sync::atomic::Ordering::Relaxed) {
                    return None;
                }
                let step = ensure_one(cache, s, lambda);
                if matches!(step, Step::Disk(..)) {
                    abort.store(true, std::sync::atomic::Ordering::Relaxed);
                }
                Some(step)
            })
            .collect()
    });
    let mut report = SweepReport::default();
    for step in steps.into_iter().flatten() {
        match step {
            Step::Done(o) => report.outcomes.push(o),
            Step::Disk(o, e) => {
                report.outcomes.push(SectorOutcome {
                    status: SectorStatus::Failed { reason: e.clone() },
                    ..o
                });
                report.disk_error.get_or_insert(e);
            }
        }
    }
    Ok(report)
}

/// A block with its basis, ready for analysis.
#[derive(Debug, Clone)]
pub struct LoadedBlock {
    pub basis: SymmetryBasis,
    pub spectrum: SpinResolvedSpectrum,
}

/// Load cached spectra for `sectors`; a missing or invalid entry is an error
/// naming the sector.
pub fn load_blocks(
    cache: &SpectrumCache,
    sectors: &[SectorLabel],
    lambda: f64,
    workers: usize,
) -> Result<Vec<LoadedBlock>> {
    let pool = thread_pool(workers)?;
    pool.install(|| {
        sectors
            .par_iter()
            .map(|&s| {
                let spectrum = cache.require(&s, lambda)?;
                let basis = SymmetryBasis::enumerate(s)?;
                if basis.dim() != spectrum.dim() {
                    return Err(Error::Cache {
                        path: cache.path_for(&s, lambda),
                        reason: format!("dimension {} does not match basis {}", spectrum.dim(), basis.dim()),
                    });
                }
                Ok(LoadedBlock { basis, spectrum })
            })
            .collect()
    })
}

/// Solve `sectors` in memory without touching any cache.
pub fn solve_blocks(sectors: &[SectorLabel], lambda: f64, workers: usize) -> Result<Vec<LoadedBlock>> {
    let coupling = CouplingSpec::new(lambda)?;
    let pool = thread_pool(workers)?;
    pool.install(|| {
        sectors
            .par_iter()
            .map(|&s| solve_sector(s, coupling).map(|(basis, spectrum)| LoadedBlock { basis, spectrum }))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warm_rerun_has_no_diagonalizations() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::new(dir.path());
        let sectors = plan(6, 0).unwrap();
        let first = ensure_spectra(&cache, &sectors, 3.0, 2).unwrap();
        assert_eq!(first.diagonalizations(), sectors.len());
        let second = ensure_spectra(&cache, &sectors, 3.0, 2).unwrap();
        assert_eq!(second.diagonalizations(), 0);
        assert_eq!(second.hits(), sectors.len());
    }

    #[test]
    fn stale_entry_is_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::new(dir.path());
        let sectors = plan(4, 0).unwrap();
        ensure_spectra(&cache, &sectors, 1.0, 1).unwrap();
        let path = cache.path_for(&sectors[0], 1.0);
        let mut bytes = std::fs::read(&path).unwrap();
        let n = bytes.len();
        bytes[n / 2] ^= 0xff;
        std::fs::write(&path, bytes).unwrap();
        let report = ensure_spectra(&cache, &sectors, 1.0, 1).unwrap();
        assert!(matches!(report.outcomes[0].status, SectorStatus::Rebuilt { .. }));
        assert_eq!(report.diagonalizations(), 1);
    }
}
