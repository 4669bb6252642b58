//! Two-site spin operators and their Hermitian blocks in a symmetry basis.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{ProductBasis, SectorLabel, SymmetryBasis};
use crate::error::{Error, Result};

/// Coefficient of `A` in `C = c_A A + c_B B`.
pub const C_FROM_A: f64 = -0.577_350_269_189_625_8; // -1/sqrt(3)
/// Coefficient of `B` in `C = c_A A + c_B B`.
pub const C_FROM_B: f64 = 0.816_496_580_927_726; // sqrt(2/3)

/// Next-nearest-neighbour coupling of the extended Heisenberg chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub lambda: f64,
}

impl CouplingSpec {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling must be finite, got {lambda}")));
        }
        Ok(CouplingSpec { lambda })
    }
}

/// The three observables studied: the rank-0 bond energy `A`, the rank-2
/// quadrupole `B`, and the non-spherical `z`-`z` bond correlator `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    A,
    B,
    C,
}

impl Observable {
    /// Spherical-tensor rank, when the observable is a pure tensor component.
    pub fn rank(self) -> Option<u32> {
        match self {
            Observable::A => Some(0),
            Observable::B => Some(2),
            Observable::C => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::A => "A",
            Observable::B => "B",
            Observable::C => "C",
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Observable::A),
            "B" | "b" => Ok(Observable::B),
            "C" | "c" => Ok(Observable::C),
            other => Err(Error::UnknownObservable(other.to_string())),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which operator a block represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OperatorLabel {
    Hamiltonian { lambda: f64 },
    TotalSpinSquared,
    Observable(Observable),
    Custom,
}

/// `exchange * S_i.S_j + zz * S^z_i S^z_j` on one pair of sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerm {
    pub i: usize,
    pub j: usize,
    pub exchange: f64,
    pub zz: f64,
}

/// A constant plus a sum of two-site terms; every operator in this crate
/// has this form.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOperator {
    pub length: usize,
    pub constant: f64,
    pub terms: Vec<PairTerm>,
}

impl PairOperator {
    pub fn new(length: usize) -> Self {
        PairOperator {
            length,
            constant: 0.0,
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, i: usize, j: usize, exchange: f64, zz: f64) -> Self {
        self.terms.push(PairTerm {
            i: i % self.length,
            j: j % self.length,
            exchange,
            zz,
        });
        self
    }

    /// `H = -sum_i S_i.S_{i+1} - lambda sum_i S_i.S_{i+2}` with periodic wrap.
    pub fn hamiltonian(length: usize, coupling: CouplingSpec) -> Self {
        let mut op = PairOperator::new(length);
        for i in 0..length {
            op = op.with_term(i, i + 1, -1.0, 0.0);
        }
        if coupling.lambda != 0.0 {
            for i in 0..length {
                op = op.with_term(i, i + 2, -coupling.lambda, 0.0);
            }
        }
        op
    }

    /// `S^2 = 3L/4 + 2 sum_{i<j} S_i.S_j`.
    pub fn total_spin_squared(length: usize) -> Self {
        let mut op = PairOperator::new(length);
        op.constant = 0.75 * length as f64;
        for i in 0..length {
            for j in (i + 1)..length {
                op = op.with_term(i, j, 2.0, 0.0);
            }
        }
        op
    }

    pub fn observable(length: usize, which: Observable) -> Self {
        let l = length as f64;
        let (exchange, zz) = match which {
            Observable::A => (-1.0 / (3f64.sqrt() * l), 0.0),
            Observable::B => (-1.0 / (6f64.sqrt() * l), 3.0 / (6f64.sqrt() * l)),
            Observable::C => (0.0, 1.0 / l),
        };
        let mut op = PairOperator::new(length);
        for i in 0..length {
            op = op.with_term(i, i + 1, exchange, zz);
        }
        op
    }

    /// Apply to a product state, pushing `(image, coefficient)` pairs into `out`.
    /// Diagonal contributions are merged into one leading entry.
    pub fn apply_state(&self, bits: u32, out: &mut Vec<(u32, f64)>) {
        out.clear();
        let mut diag = self.constant;
        out.push((bits, 0.0));
        for t in &self.terms {
            let si = bits >> t.i & 1;
            let sj = bits >> t.j & 1;
            if t.i == t.j {
                // S_i.S_i = 3/4, (S^z_i)^2 = 1/4
                diag += 0.75 * t.exchange + 0.25 * t.zz;
                continue;
            }
            let zz = if si == sj { 0.25 } else { -0.25 };
            diag += (t.exchange + t.zz) * zz;
            if si != sj && t.exchange != 0.0 {
                out.push((bits ^ (1 << t.i) ^ (1 << t.j), 0.5 * t.exchange));
            }
        }
        out[0].1 = diag;
    }

    /// Build the block in a symmetry basis.  The operator must commute with
    /// translations and (for `M = 0`) the global spin flip.
    pub fn block(&self, basis: &SymmetryBasis, label: OperatorLabel) -> Result<BlockOperator> {
        if basis.length() != self.length {
            return Err(Error::SectorMismatch(format!(
                "operator on {} sites applied to basis of {} sites",
                self.length,
                basis.length()
            )));
        }
        let mut triplets = Vec::new();
        let mut buf = Vec::with_capacity(self.terms.len() + 1);
        for (a, orbit) in basis.orbits.iter().enumerate() {
            self.apply_state(orbit.rep.0, &mut buf);
            for &(image, coeff) in &buf {
                if coeff == 0.0 {
                    continue;
                }
                if let Some(loc) = basis.locate(image) {
                    let v = basis.overlap(loc) * (coeff / orbit.norm);
                    triplets.push((loc.index, a, v));
                }
            }
        }
        Ok(BlockOperator::from_triplets(basis.sector, basis.dim(), label, triplets))
    }

    /// Dense matrix in the plain product basis.
    pub fn product_matrix(&self, basis: &ProductBasis) -> Result<DMatrix<f64>> {
        let n = basis.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut buf = Vec::new();
        for (a, &bits) in basis.states.iter().enumerate() {
            self.apply_state(bits, &mut buf);
            for &(image, coeff) in &buf {
                let b = basis.index_of(image).ok_or_else(|| {
                    Error::InvalidArgument("operator leaves the magnetization sector".into())
                })?;
                m[(b, a)] += coeff;
            }
        }
        Ok(m)
    }

    /// `O v` for a product-basis vector.
    pub fn apply_product(&self, basis: &ProductBasis, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::default(); basis.dim()];
        let mut buf = Vec::new();
        for (a, &bits) in basis.states.iter().enumerate() {
            if v[a].norm_sqr() == 0.0 {
                continue;
            }
            self.apply_state(bits, &mut buf);
            for &(image, coeff) in &buf {
                let b = basis.index_of(image).ok_or_else(|| {
                    Error::InvalidArgument("operator leaves the magnetization sector".into())
                })?;
                out[b] += v[a] * coeff;
            }
        }
        Ok(out)
    }
}

/// A Hermitian operator restricted to one symmetry block, stored as CSR.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub sector: SectorLabel,
    pub label: OperatorLabel,
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
}

impl BlockOperator {
    /// Assemble from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        sector: SectorLabel,
        dim: usize,
        label: OperatorLabel,
        mut triplets: Vec<(usize, usize, Complex64)>,
    ) -> Self {
        triplets.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("merged entry") += v;
            } else {
                cols.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        BlockOperator {
            sector,
            label,
            dim,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn from_dense(sector: SectorLabel, label: OperatorLabel, m: &DMatrix<Complex64>) -> Self {
        let mut triplets = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)] != Complex64::default() {
                    triplets.push((r, c, m[(r, c)]));
                }
            }
        }
        BlockOperator::from_triplets(sector, m.nrows(), label, triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (self.cols[p], self.values[p]))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.row(r)
            .find(|&(cc, _)| cc == c)
            .map(|(_, v)| v)
            .unwrap_or_default()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|r| self.row(r).map(|(c, x)| x * v[c]).sum())
            .collect()
    }

    /// `self * rhs` for a dense matrix with `dim` rows.
    pub fn mul_dense(&self, rhs: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim, rhs.ncols());
        for j in 0..rhs.ncols() {
            let col = rhs.column(j);
            for r in 0..self.dim {
                let mut acc = Complex64::default();
                for (c, x) in self.row(r) {
                    acc += x * col[c];
                }
                out[(r, j)] = acc;
            }
        }
        out
    }

    /// `max |m_ab - conj(m_ba)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `a * self + b * other` for blocks of the same sector.
    pub fn combine(&self, a: f64, other: &BlockOperator, b: f64) -> Result<BlockOperator> {
        if self.sector != other.sector || self.dim != other.dim {
            return Err(Error::SectorMismatch(format!("{} vs {}", self.sector, other.sector)));
        }
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.dim {
            triplets.extend(self.row(r).map(|(c, v)| (r, c, v * a)));
            triplets.extend(other.row(r).map(|(c, v)| (r, c, v * b)));
        }
        Ok(BlockOperator::from_triplets(self.sector, self.dim, OperatorLabel::Custom, triplets))
    }
}

/// Largest entry of the commutator `[x, y]` of two dense matrices.
pub fn commutator_max(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> f64 {
    (x * y - y * x).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn build_hamiltonian(basis: &SymmetryBasis, coupling: CouplingSpec) -> Result<BlockOperator> {
    PairOperator::hamiltonian(basis.length(), coupling)
        .block(basis, OperatorLabel::Hamiltonian { lambda: coupling.lambda })
}

pub fn build_total_spin_squared(basis: &SymmetryBasis) -> Result<BlockOperator> {
    PairOperator::total_spin_squared(basis.length()).block(basis, OperatorLabel::TotalSpinSquared)
}

pub fn build_observable(basis: &SymmetryBasis, which: Observable) -> Result<BlockOperator> {
    PairOperator::observable(basis.length(), which).block(basis, OperatorLabel::Observable(which))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Parity;

    fn polarized4() -> SymmetryBasis {
        SymmetryBasis::enumerate(SectorLabel::new(4, 2, 0, None).unwrap()).unwrap()
    }

    #[test]
    fn decomposition_constants() {
        assert!((C_FROM_A + 1.0 / 3f64.sqrt()).abs() < 1e-16);
        assert!((C_FROM_B - (2.0f64 / 3.0).sqrt()).abs() < 1e-16);
    }

    #[test]
    fn polarized_chain_values() {
        let b = polarized4();
        let h0 = build_hamiltonian(&b, CouplingSpec::new(0.0).unwrap()).unwrap();
        assert!((h0.get(0, 0).re + 1.0).abs() < 1e-14);
        let h1 = build_hamiltonian(&b, CouplingSpec::new(1.0).unwrap()).unwrap();
        assert!((h1.get(0, 0).re + 2.0).abs() < 1e-14);
        let s2 = build_total_spin_squared(&b).unwrap();
        assert!((s2.get(0, 0).re - 6.0).abs() < 1e-14);
        let a = build_observable(&b, Observable::A).unwrap();
        assert!((a.get(0, 0).re + 1.0 / (4.0 * 3f64.sqrt())).abs() < 1e-15);
        let bb = build_observable(&b, Observable::B).unwrap();
        assert!((bb.get(0, 0).re - 1.0 / (2.0 * 6f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn unknown_tag_rejected() {
        assert!(matches!("D".parse::<Observable>(), Err(Error::UnknownObservable(_))));
        assert_eq!("b".parse::<Observable>().unwrap(), Observable::B);
    }

    #[test]
    fn hamiltonian_blocks_are_hermitian() {
        for s in SectorLabel::all_for(8, 0).unwrap() {
            let b = SymmetryBasis::enumerate(s).unwrap();
            let h = build_hamiltonian(&b, CouplingSpec::new(3.0).unwrap()).unwrap();
            assert!(h.hermiticity_deviation() < 1e-12, "{s}");
        }
    }

    #[test]
    fn hamiltonian_commutes_with_total_spin() {
        let s = SectorLabel::new(8, 0, 1, Some(Parity::Even)).unwrap();
        let b = SymmetryBasis::enumerate(s).unwrap();
        let h = build_hamiltonian(&b, CouplingSpec::new(3.0).unwrap()).unwrap().to_dense();
        let s2 = build_total_spin_squared(&b).unwrap().to_dense();
        assert!(commutator_max(&h, &s2) < 1e-10);
    }
}
