//! Block diagonalization, total-spin labelling and eigenbasis matrix elements.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{SectorLabel, SymmetryBasis};
use crate::error::{Error, Result};
use crate::operators::{
    build_hamiltonian, build_total_spin_squared, BlockOperator, CouplingSpec, OperatorLabel,
};

/// Largest tolerated `|<S^2> - S(S+1)|` (or `S^2` variance) after resolution.
pub const SPIN_RESIDUAL_LIMIT: f64 = 1e-6;

/// Ascending eigenvalues with eigenvectors as matrix columns.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

/// Eigenstates of one block labelled by their total spin.
#[derive(Debug, Clone)]
pub struct SpinResolvedSpectrum {
    pub sector: SectorLabel,
    pub energies: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
    pub spins: Vec<u32>,
    pub spin_residuals: Vec<f64>,
}

impl SpinResolvedSpectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Number of eigenstates per total spin.
    pub fn spin_counts(&self) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for &s in &self.spins {
            *counts.entry(s).or_insert(0) += 1;
        }
        counts
    }

    /// Indices of the eigenstates with total spin `spin`.
    pub fn indices_with_spin(&self, spin: u32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.spins[i] == spin).collect()
    }

    /// `V^dagger O V`.
    pub fn in_eigenbasis(&self, obs: &BlockOperator) -> Result<DMatrix<Complex64>> {
        if obs.sector != self.sector || obs.dim() != self.dim() {
            return Err(Error::SectorMismatch(format!(
                "operator on {} against spectrum of {}",
                obs.sector, self.sector
            )));
        }
        Ok(self.vectors.adjoint() * obs.mul_dense(&self.vectors))
    }
}

/// One matrix element between labelled eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixElement {
    pub alpha: usize,
    pub beta: usize,
    pub e_alpha: f64,
    pub e_beta: f64,
    pub s_alpha: u32,
    pub s_beta: u32,
    pub value: Complex64,
}

impl MatrixElement {
    pub fn mean_energy(&self) -> f64 {
        0.5 * (self.e_alpha + self.e_beta)
    }

    pub fn omega(&self) -> f64 {
        self.e_alpha - self.e_beta
    }
}

#[derive(Debug, Clone)]
pub struct MatrixElementTable {
    pub label: OperatorLabel,
    pub sector: SectorLabel,
    pub records: Vec<MatrixElement>,
    /// Per-spin state counts of the row spectrum.
    pub row_spin_dims: BTreeMap<u32, usize>,
    /// Per-spin state counts of the column spectrum.
    pub col_spin_dims: BTreeMap<u32, usize>,
}

impl MatrixElementTable {
    pub fn get(&self, alpha: usize, beta: usize) -> Option<&MatrixElement> {
        self.records.iter().find(|r| r.alpha == alpha && r.beta == beta)
    }
}

/// Full dense eigendecomposition of a Hermitian block, eigenvalues ascending.
pub fn diagonalize_block(h: &BlockOperator) -> Result<Eigenpairs> {
    let scale = h.max_abs().max(1.0);
    let deviation = h.hermiticity_deviation();
    if deviation > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation });
    }
    let n = h.dim();
    if n == 0 {
        return Ok(Eigenpairs {
            energies: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = h.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
        fix_phase(&mut vectors, dst);
    }
    Ok(Eigenpairs { energies, vectors })
}

/// Rotate column `j` so its largest-magnitude entry is real and positive.
fn fix_phase(m: &mut DMatrix<Complex64>, j: usize) {
    let mut best = Complex64::default();
    for v in m.column(j).iter() {
        if v.norm_sqr() > best.norm_sqr() * (1.0 + 1e-12) {
            best = *v;
        }
    }
    if best.norm() > 0.0 {
        let phase = best.conj() / best.norm();
        for v in m.column_mut(j).iter_mut() {
            *v *= phase;
        }
    }
}

/// Default clustering tolerance: `1e-9` times the spectral width.
pub fn default_degeneracy_tol(energies: &[f64]) -> f64 {
    match (energies.first(), energies.last()) {
        (Some(lo), Some(hi)) if hi > lo => 1e-9 * (hi - lo),
        _ => 1e-9,
    }
}

/// Integer `S` with `S(S+1)` closest to `value`.
pub fn spin_from_casimir(value: f64) -> u32 {
    let s = (-1.0 + (1.0 + 4.0 * value.max(0.0)).sqrt()) / 2.0;
    s.round() as u32
}

/// Make every eigenvector a joint eigenvector of `S^2` and label its spin.
///
/// Eigenvalues closer than `degeneracy_tol` form a cluster; inside each
/// cluster the projected `S^2` is diagonalized and the cluster rotated.
pub fn resolve_spins(
    pairs: Eigenpairs,
    s2: &BlockOperator,
    degeneracy_tol: f64,
) -> Result<SpinResolvedSpectrum> {
    let Eigenpairs {
        energies,
        mut vectors,
    } = pairs;
    let n = energies.len();
    if s2.dim() != n || vectors.nrows() != n {
        return Err(Error::SectorMismatch(format!(
            "S^2 block of dimension {} against {} eigenpairs",
            s2.dim(),
            n
        )));
    }

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && energies[end] - energies[end - 1] < degeneracy_tol {
            end += 1;
        }
        if end - start > 1 {
            let cluster = vectors.columns(start, end - start).into_owned();
            let projected = cluster.adjoint() * s2.mul_dense(&cluster);
            let projected = (&projected + projected.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = projected.symmetric_eigen();
            let mut order: Vec<usize> = (0..end - start).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let rotated = cluster * eig.eigenvectors;
            for (dst, &src) in order.iter().enumerate() {
                vectors.set_column(start + dst, &rotated.column(src));
                fix_phase(&mut vectors, start + dst);
            }
        }
        start = end;
    }

    let s2v = s2.mul_dense(&vectors);
    let mut spins = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for j in 0..n {
        let v = vectors.column(j);
        let w = s2v.column(j);
        let mean = v.dotc(&w).re;
        let spin = spin_from_casimir(mean);
        let casimir = (spin * (spin + 1)) as f64;
        let spread = (w - v * Complex64::new(mean, 0.0)).norm();
        let residual = (mean - casimir).abs().max(spread);
        if residual > SPIN_RESIDUAL_LIMIT {
            return Err(Error::SpinResolution {
                state: j,
                residual,
                limit: SPIN_RESIDUAL_LIMIT,
            });
        }
        spins.push(spin);
        residuals.push(residual);
    }

    Ok(SpinResolvedSpectrum {
        sector: s2.sector,
        energies,
        vectors,
        spins,
        spin_residuals: residuals,
    })
}

/// Enumerate, build, diagonalize and spin-resolve one sector.
pub fn solve_sector(
    sector: SectorLabel,
    coupling: CouplingSpec,
) -> Result<(SymmetryBasis, SpinResolvedSpectrum)> {
    let basis = SymmetryBasis::enumerate(sector)?;
    let h = build_hamiltonian(&basis, coupling)?;
    let s2 = build_total_spin_squared(&basis)?;
    let pairs = diagonalize_block(&h)?;
    let tol = default_degeneracy_tol(&pairs.energies);
    let spectrum = resolve_spins(pairs, &s2, tol)?;
    Ok((basis, spectrum))
}

/// `<a|O|a>` for every eigenstate of the spectrum.
pub fn diagonal_elements(obs: &BlockOperator, spec: &SpinResolvedSpectrum) -> Result<Vec<f64>> {
    if obs.sector != spec.sector || obs.dim() != spec.dim() {
        return Err(Error::SectorMismatch(format!(
            "operator {} against spectrum {}",
            obs.sector, spec.sector
        )));
    }
    let ov = obs.mul_dense(&spec.vectors);
    Ok((0..spec.dim())
        .map(|j| spec.vectors.column(j).dotc(&ov.column(j)).re)
        .collect())
}

/// Matrix elements `<E_a S_a|O|E_b S_b>` between two spectra of the same
/// block, optionally restricted to one `(S_a, S_b)` combination.
pub fn matrix_elements(
    obs: &BlockOperator,
    rows: &SpinResolvedSpectrum,
    cols: &SpinResolvedSpectrum,
    spin_filter: Option<(u32, u32)>,
) -> Result<MatrixElementTable> {
    if rows.sector != cols.sector || obs.sector != rows.sector {
        return Err(Error::SectorMismatch(format!(
            "operator {} between spectra {} and {}",
            obs.sector, rows.sector, cols.sector
        )));
    }
    if obs.dim() != rows.dim() || obs.dim() != cols.dim() {
        return Err(Error::SectorMismatch("dimension mismatch".into()));
    }
    let pick = |spec: &SpinResolvedSpectrum, want: Option<u32>| -> Vec<usize> {
        (0..spec.dim())
            .filter(|&i| want.is_none_or(|s| spec.spins[i] == s))
            .collect()
    };
    let row_idx = pick(rows, spin_filter.map(|f| f.0));
    let col_idx = pick(cols, spin_filter.map(|f| f.1));

    let mut right = DMatrix::zeros(cols.dim(), col_idx.len());
    for (j, &c) in col_idx.iter().enumerate() {
        right.set_column(j, &cols.vectors.column(c));
    }
    let o_right = obs.mul_dense(&right);
    let mut records = Vec::with_capacity(row_idx.len() * col_idx.len());
    for &a in &row_idx {
        let bra = rows.vectors.column(a);
        for (j, &b) in col_idx.iter().enumerate() {
            let value = bra.dotc(&o_right.column(j));
            records.push(MatrixElement {
                alpha: a,
                beta: b,
                e_alpha: rows.energies[a],
                e_beta: cols.energies[b],
                s_alpha: rows.spins[a],
                s_beta: cols.spins[b],
                value,
            });
        }
    }
    Ok(MatrixElementTable {
        label: obs.label,
        sector: obs.sector,
        records,
        row_spin_dims: rows.spin_counts(),
        col_spin_dims: cols.spin_counts(),
    })
}
