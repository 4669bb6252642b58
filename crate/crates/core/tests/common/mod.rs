#![allow(dead_code)]

use num_complex::Complex64;
use su2eth::basis::{ProductBasis, SectorLabel};
use su2eth::operators::CouplingSpec;
use su2eth::spectral::solve_sector;
use su2eth::{SpinResolvedSpectrum, SymmetryBasis};

pub type Solved = Vec<(SymmetryBasis, SpinResolvedSpectrum)>;

pub fn solve_all(length: usize, magnetization: i32, lambda: f64) -> Solved {
    SectorLabel::all_for(length, magnetization)
        .unwrap()
        .into_iter()
        .map(|s| solve_sector(s, CouplingSpec::new(lambda).unwrap()).unwrap())
        .collect()
}

/// Eigenstate `index` of a block as a dense product-basis vector.
pub fn product_vector(basis: &SymmetryBasis, spec: &SpinResolvedSpectrum, index: usize, pb: &ProductBasis) -> Vec<Complex64> {
    let coeffs: Vec<Complex64> = spec.vectors.column(index).iter().copied().collect();
    pb.densify(&basis.expand_vector(&coeffs).unwrap()).unwrap()
}

/// `S^+ v`, mapping the product basis `from` into `to`.
pub fn raise(v: &[Complex64], from: &ProductBasis, to: &ProductBasis) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); to.dim()];
    for (i, &bits) in from.states.iter().enumerate() {
        if v[i] == Complex64::default() {
            continue;
        }
        for site in 0..from.length {
            if bits >> site & 1 == 0 {
                out[to.index_of(bits | 1 << site).unwrap()] += v[i];
            }
        }
    }
    out
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    inner(a, a).re.sqrt()
}
