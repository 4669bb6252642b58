//! Off-diagonal ensembles, the Gaussianity ratio, spectral functions and
//! their finite-size scaling.

use serde::{Deserialize, Serialize};

use super::binning::{bin_samples, Bin, BinnedSeries, Binning};
use super::fit::{fit_points, FitModel, FitResult};
use crate::error::{Error, Result};
use crate::spectral::MatrixElementTable;
use crate::tensor::cg_f64;

pub const DEFAULT_ENERGY_WINDOW: f64 = 0.025;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffDiagRecord {
    pub mean_energy: f64,
    pub omega: f64,
    pub abs: f64,
}

/// `<H>` of the `(S, M = 0)` sector, evaluated at a possibly half-integer `S`.
pub fn sector_mean_energy(length: usize, spin: f64, lambda: f64) -> f64 {
    let l = length as f64;
    (1.0 + lambda) * (0.75 * l - spin * (spin + 1.0)) / (l - 1.0)
}

/// Off-diagonal elements between spins `(S_a, S_b)` near the sector mean energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonalEnsemble {
    pub length: usize,
    pub lambda: f64,
    pub s_alpha: u32,
    pub s_beta: u32,
    /// Window center, from the closed form at `(S_a + S_b) / 2`.
    pub e0: f64,
    pub energy_window: f64,
    /// Mean number of states of each spin over the blocks holding that spin.
    pub d_alpha: f64,
    pub d_beta: f64,
    pub records: Vec<OffDiagRecord>,
}

impl OffDiagonalEnsemble {
    /// Pool unweighted over `tables`, keeping `alpha != beta` and
    /// `|E_mean - E0| / L <= energy_window`.
    ///
    /// Same-spin ensembles take each unordered pair once and enter it at
    /// `+omega` and `-omega` with the same magnitude.
    pub fn from_tables(
        tables: &[MatrixElementTable],
        lambda: f64,
        spins: (u32, u32),
        energy_window: f64,
    ) -> Result<Self> {
        let first = tables
            .first()
            .ok_or_else(|| Error::InvalidArgument("no matrix-element tables supplied".into()))?;
        let length = first.sector.length;
        let (s_alpha, s_beta) = spins;
        let e0 = sector_mean_energy(length, (s_alpha + s_beta) as f64 / 2.0, lambda);
        let l = length as f64;
        let same = s_alpha == s_beta;
        let mut records = Vec::new();
        let mut dims_alpha = Vec::new();
        let mut dims_beta = Vec::new();
        for t in tables {
            if t.sector.length != length {
                return Err(Error::SectorMismatch("tables from different chain lengths".into()));
            }
            if let Some(&d) = t.row_spin_dims.get(&s_alpha).filter(|&&d| d > 0) {
                dims_alpha.push(d as f64);
            }
            if let Some(&d) = t.col_spin_dims.get(&s_beta).filter(|&&d| d > 0) {
                dims_beta.push(d as f64);
            }
            for r in &t.records {
                if r.s_alpha != s_alpha || r.s_beta != s_beta || r.alpha == r.beta {
                    continue;
                }
                if same && r.alpha > r.beta {
                    continue;
                }
                let mean_energy = r.mean_energy();
                if ((mean_energy - e0) / l).abs() > energy_window {
                    continue;
                }
                let omega = r.e_alpha - r.e_beta;
                let abs = r.value.norm();
                records.push(OffDiagRecord { mean_energy, omega, abs });
                if same {
                    records.push(OffDiagRecord {
                        mean_energy,
                        omega: -omega,
                        abs,
                    });
                }
            }
        }
        let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        Ok(OffDiagonalEnsemble {
            length,
            lambda,
            s_alpha,
            s_beta,
            e0,
            energy_window,
            d_alpha: mean(&dims_alpha),
            d_beta: mean(&dims_beta),
            records,
        })
    }

    /// Concatenate ensembles built from disjoint sets of blocks.
    ///
    /// The dimensions are averaged over the parts that hold each spin; with
    /// one block per part this equals building from all blocks at once.
    pub fn merge(parts: Vec<OffDiagonalEnsemble>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::InvalidArgument("no ensembles to merge".into()))?;
        let mut dims_alpha: Vec<f64> = vec![out.d_alpha].into_iter().filter(|&d| d > 0.0).collect();
        let mut dims_beta: Vec<f64> = vec![out.d_beta].into_iter().filter(|&d| d > 0.0).collect();
        for p in iter {
            if p.length != out.length
                || p.lambda != out.lambda
                || (p.s_alpha, p.s_beta) != (out.s_alpha, out.s_beta)
                || p.energy_window != out.energy_window
            {
                return Err(Error::SectorMismatch("ensembles with different parameters".into()));
            }
            if p.d_alpha > 0.0 {
                dims_alpha.push(p.d_alpha);
            }
            if p.d_beta > 0.0 {
                dims_beta.push(p.d_beta);
            }
            out.records.extend(p.records);
        }
        let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        out.d_alpha = mean(&dims_alpha);
        out.d_beta = mean(&dims_beta);
        Ok(out)
    }

    /// `D = sqrt(D_a D_b)`.
    pub fn effective_dim(&self) -> f64 {
        (self.d_alpha * self.d_beta).sqrt()
    }

    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.omega, r.abs)).collect()
    }

    /// Divide every magnitude by `|<S_a 0|S_b 0; r 0>|`.
    pub fn reduced(&self, rank: u32) -> Result<Self> {
        let cg = cg_f64(self.s_alpha, 0, self.s_beta, 0, rank, 0)?.abs();
        if cg == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Clebsch-Gordan coefficient vanishes for S_a = {}, S_b = {}, r = {rank}",
                self.s_alpha, self.s_beta
            )));
        }
        let mut out = self.clone();
        for r in &mut out.records {
            r.abs /= cg;
        }
        Ok(out)
    }

    /// Mean `|O|^2` of the records with `|omega| < omega_cut`.
    pub fn low_frequency_variance(&self, omega_cut: f64) -> Result<f64> {
        let inside: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.omega.abs() < omega_cut)
            .map(|r| r.abs * r.abs)
            .collect();
        if inside.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        Ok(inside.iter().sum::<f64>() / inside.len() as f64)
    }
}

/// `Gamma(omega) = mean|O|^2 / (mean|O|)^2` per bin.
pub fn gaussianity_ratio(ensemble: &OffDiagonalEnsemble, binning: Binning) -> Result<BinnedSeries> {
    gaussianity_ratio_samples(&ensemble.samples(), binning)
}

pub fn gaussianity_ratio_samples(samples: &[(f64, f64)], binning: Binning) -> Result<BinnedSeries> {
    bin_samples(samples, binning, |b: &Bin| b.mean_sq / (b.mean_abs * b.mean_abs))
}

/// `L D mean|O|^2` per bin; both signs of `omega` are kept.
pub fn spectral_function(ensemble: &OffDiagonalEnsemble, binning: Binning) -> Result<BinnedSeries> {
    let scale = ensemble.length as f64 * ensemble.effective_dim();
    bin_samples(&ensemble.samples(), binning, move |b: &Bin| scale * b.mean_sq)
}

/// Power-law fit of the low-frequency variance against `L D`.
pub fn variance_scaling(ensembles: &[&OffDiagonalEnsemble], omega_cut: f64) -> Result<FitResult> {
    if ensembles.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: ensembles.len(),
        });
    }
    let mut points = Vec::with_capacity(ensembles.len());
    for e in ensembles {
        points.push((
            e.length as f64 * e.effective_dim(),
            e.low_frequency_variance(omega_cut)?,
        ));
    }
    fit_points(FitModel::PowerLaw, &points, (0.0, f64::INFINITY), 3)
}

/// Spectral function against `omega L^2`; with `diffusive` the values are
/// additionally divided by `L`.
pub fn low_frequency_view(series: &BinnedSeries, length: usize, diffusive: bool) -> Vec<(f64, f64)> {
    let l = length as f64;
    series
        .points()
        .into_iter()
        .map(|(w, v)| (w * l * l, if diffusive { v / l } else { v }))
        .collect()
}
