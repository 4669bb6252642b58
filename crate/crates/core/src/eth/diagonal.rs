//! Diagonal matrix elements: running averages, fluctuations and the
//! dependence on total spin.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::SectorLabel;
use crate::error::{Error, Result};
use crate::spectral::MatrixElementTable;

/// One diagonal element together with its origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub energy: f64,
    pub value: f64,
    pub spin: u32,
    pub sector: SectorLabel,
}

/// Collect `(E_a, O_aa)` from the diagonal of each table.
pub fn diagonal_records(tables: &[MatrixElementTable]) -> Vec<DiagRecord> {
    let mut out = Vec::new();
    for t in tables {
        for r in t.records.iter().filter(|r| r.alpha == r.beta) {
            out.push(DiagRecord {
                energy: r.e_alpha,
                value: r.value.re,
                spin: r.s_alpha,
                sector: t.sector,
            });
        }
    }
    out
}

/// Energy-ordered diagonal elements at one spin, pooled over sectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSeries {
    pub length: usize,
    pub spin: u32,
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    /// Share of the series contributed by each sector; sums to one.
    pub sector_weights: Vec<(SectorLabel, f64)>,
    /// Running-average window in states.
    pub window: usize,
}

pub const DEFAULT_WINDOW: usize = 50;

impl DiagonalSeries {
    pub fn from_records(length: usize, spin: u32, records: &[DiagRecord], window: usize) -> Self {
        let mut picked: Vec<&DiagRecord> = records.iter().filter(|r| r.spin == spin).collect();
        picked.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.value.total_cmp(&b.value)));
        let mut counts: BTreeMap<SectorLabel, usize> = BTreeMap::new();
        for r in &picked {
            *counts.entry(r.sector).or_default() += 1;
        }
        let n = picked.len().max(1) as f64;
        DiagonalSeries {
            length,
            spin,
            energies: picked.iter().map(|r| r.energy).collect(),
            values: picked.iter().map(|r| r.value).collect(),
            sector_weights: counts.into_iter().map(|(s, c)| (s, c as f64 / n)).collect(),
            window,
        }
    }

    /// A series from bare `(E, O)` pairs, sorted by energy.
    pub fn from_pairs(length: usize, spin: u32, mut pairs: Vec<(f64, f64)>, window: usize) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        DiagonalSeries {
            length,
            spin,
            energies: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
            sector_weights: Vec::new(),
            window,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean over a window of `window` consecutive states around each state,
    /// shifted inward at the edges so every window is full.
    pub fn running_mean(&self) -> Result<Vec<f64>> {
        let n = self.len();
        let w = self.window;
        if w == 0 || n < w {
            return Err(Error::TooFewSamples { needed: w.max(1), got: n });
        }
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        for v in &self.values {
            prefix.push(prefix.last().unwrap() + v);
        }
        Ok((0..n)
            .map(|i| {
                let start = i.saturating_sub(w / 2).min(n - w);
                (prefix[start + w] - prefix[start]) / w as f64
            })
            .collect())
    }
}

/// Index range of the central `fraction` of `n` energy-ordered states.
pub fn central_range(n: usize, fraction: f64) -> std::ops::Range<usize> {
    let keep = ((n as f64 * fraction).round() as usize).clamp(1, n.max(1));
    let start = (n - keep.min(n)) / 2;
    start..start + keep.min(n)
}

/// `< |O_aa - running mean| >` over the central `fraction` of the spectrum.
pub fn diagonal_fluctuations(series: &DiagonalSeries, central_fraction: f64) -> Result<f64> {
    if !(central_fraction > 0.0 && central_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "central fraction must lie in (0, 1], got {central_fraction}"
        )));
    }
    let mean = series.running_mean()?;
    let range = central_range(series.len(), central_fraction);
    let n = range.len() as f64;
    Ok(range.map(|i| (series.values[i] - mean[i]).abs()).sum::<f64>() / n)
}

/// Mean and spread of the diagonal elements of one spin inside the energy window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinGroup {
    pub spin: u32,
    pub spin_density: f64,
    pub count: usize,
    /// `None` flags an empty group.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Per-sector means combined with block-dimension weights.
    pub weighted_mean: Option<f64>,
    pub weighted_std: Option<f64>,
}

/// Group the records with `|E| / L <= energy_window` by spin.
///
/// `block_dims` gives the dimension used to weight each sector; sectors
/// missing from it get weight one.
pub fn diagonal_vs_spin(
    records: &[DiagRecord],
    length: usize,
    energy_window: f64,
    spins: &[u32],
    block_dims: &BTreeMap<SectorLabel, usize>,
) -> Vec<SpinGroup> {
    let l = length as f64;
    spins
        .iter()
        .map(|&spin| {
            let inside: Vec<&DiagRecord> = records
                .iter()
                .filter(|r| r.spin == spin && (r.energy / l).abs() <= energy_window)
                .collect();
            let count = inside.len();
            let mut group = SpinGroup {
                spin,
                spin_density: spin as f64 / l,
                count,
                mean: None,
                std: None,
                weighted_mean: None,
                weighted_std: None,
            };
            if count == 0 {
                return group;
            }
            let n = count as f64;
            let mean = inside.iter().map(|r| r.value).sum::<f64>() / n;
            let var = inside.iter().map(|r| (r.value - mean).powi(2)).sum::<f64>() / n;
            group.mean = Some(mean);
            group.std = Some(var.sqrt());

            let mut per_sector: BTreeMap<SectorLabel, usize> = BTreeMap::new();
            for r in &inside {
                *per_sector.entry(r.sector).or_default() += 1;
            }
            let weight = |r: &DiagRecord| {
                let d = block_dims.get(&r.sector).copied().unwrap_or(1) as f64;
                d / per_sector[&r.sector] as f64
            };
            let wsum: f64 = inside.iter().map(|r| weight(r)).sum();
            let wmean = inside.iter().map(|r| weight(r) * r.value).sum::<f64>() / wsum;
            let wvar = inside
                .iter()
                .map(|r| weight(r) * (r.value - wmean).powi(2))
                .sum::<f64>()
                / wsum;
            group.weighted_mean = Some(wmean);
            group.weighted_std = Some(wvar.sqrt());
            group
        })
        .collect()
}
