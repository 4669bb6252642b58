//! Block-parallel extraction of diagonal records and off-diagonal ensembles.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::EstimatorParams;
use super::sweep::LoadedBlock;
use crate::basis::SectorLabel;
use crate::error::{Error, Result};
use crate::eth::{diagonal_fluctuations, DiagRecord, DiagonalSeries, OffDiagonalEnsemble};
use crate::operators::{build_observable, Observable};
use crate::spectral::{diagonal_elements, matrix_elements};

/// Whether a sector enters the ETH ensembles.
pub fn keep_sector(sector: &SectorLabel, est: &EstimatorParams) -> bool {
    !(est.exclude_parity_momenta && sector.is_parity_sector()) && !est.exclude_k.contains(&sector.k_index)
}

pub fn ensemble_blocks<'a>(blocks: &'a [LoadedBlock], est: &EstimatorParams) -> Vec<&'a LoadedBlock> {
    blocks.iter().filter(|b| keep_sector(&b.basis.sector, est)).collect()
}

/// Mean number of spin-`S` states over the blocks that hold that spin.
pub fn mean_spin_dim(blocks: &[&LoadedBlock], spin: u32) -> f64 {
    let counts: Vec<usize> = blocks
        .iter()
        .map(|b| b.spectrum.spins.iter().filter(|&&s| s == spin).count())
        .filter(|&c| c > 0)
        .collect();
    if counts.is_empty() {
        0.0
    } else {
        counts.iter().sum::<usize>() as f64 / counts.len() as f64
    }
}

pub fn block_dims(blocks: &[&LoadedBlock]) -> BTreeMap<SectorLabel, usize> {
    blocks.iter().map(|b| (b.basis.sector, b.spectrum.dim())).collect()
}

/// Diagonal elements of every eigenstate in `blocks`.
pub fn diagonal_records_for(
    blocks: &[&LoadedBlock],
    obs: Observable,
    pool: &rayon::ThreadPool,
) -> Result<Vec<DiagRecord>> {
    let parts: Vec<Vec<DiagRecord>> = pool.install(|| {
        blocks
            .par_iter()
            .map(|b| {
                let op = build_observable(&b.basis, obs)?;
                let values = diagonal_elements(&op, &b.spectrum)?;
                Ok(values
                    .into_iter()
                    .enumerate()
                    .map(|(i, value)| DiagRecord {
                        energy: b.spectrum.energies[i],
                        value,
                        spin: b.spectrum.spins[i],
                        sector: b.basis.sector,
                    })
                    .collect())
            })
            .collect::<Result<_>>()
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Off-diagonal ensemble for `(S_a, S_b)`, built per block and merged.
pub fn build_ensemble(
    blocks: &[&LoadedBlock],
    obs: Observable,
    spins: (u32, u32),
    lambda: f64,
    energy_window: f64,
    pool: &rayon::ThreadPool,
) -> Result<OffDiagonalEnsemble> {
    if blocks.is_empty() {
        return Err(Error::InvalidArgument("no sectors left after exclusions".into()));
    }
    let parts: Vec<OffDiagonalEnsemble> = pool.install(|| {
        blocks
            .par_iter()
            .map(|b| {
                let op = build_observable(&b.basis, obs)?;
                let table = matrix_elements(&op, &b.spectrum, &b.spectrum, Some(spins))?;
                OffDiagonalEnsemble::from_tables(&[table], lambda, spins, energy_window)
            })
            .collect::<Result<_>>()
    })?;
    OffDiagonalEnsemble::merge(parts)
}

/// Diagonal fluctuation of one spin at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationPoint {
    pub length: usize,
    pub observable: Observable,
    pub spin: u32,
    pub dim: f64,
    pub window: usize,
    pub count: usize,
    pub fluctuation: f64,
}

impl FluctuationPoint {
    pub fn ld(&self) -> f64 {
        self.length as f64 * self.dim
    }
}

/// Running-average fluctuation; the window shrinks to the series length when
/// fewer states are available.
pub fn fluctuation_point(
    records: &[DiagRecord],
    blocks: &[&LoadedBlock],
    length: usize,
    obs: Observable,
    spin: u32,
    est: &EstimatorParams,
) -> Result<FluctuationPoint> {
    let mut series = DiagonalSeries::from_records(length, spin, records, est.window);
    if series.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: series.len(),
        });
    }
    series.window = est.window.min(series.len());
    let fluctuation = diagonal_fluctuations(&series, est.central_fraction)?;
    Ok(FluctuationPoint {
        length,
        observable: obs,
        spin,
        dim: mean_spin_dim(blocks, spin),
        window: series.window,
        count: series.len(),
        fluctuation,
    })
}
