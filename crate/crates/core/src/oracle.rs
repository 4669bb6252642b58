//! Closed-form infinite-temperature moments inside a fixed `(S, M = 0)`
//! sector, the linear coefficients of the smooth diagonal function, and a
//! trace oracle that evaluates the same moments from spin-resolved spectra.

use serde::{Deserialize, Serialize};

use crate::basis::{binomial, ProductBasis, SymmetryBasis};
use crate::error::{Error, Result};
use crate::operators::{build_observable, Observable, PairOperator};
use crate::spectral::SpinResolvedSpectrum;

/// Infinite-temperature moments in the `(S, M = 0)` sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub length: usize,
    pub spin: u32,
    pub lambda: f64,
    pub eps2: f64,
    pub eps2z: f64,
    pub eps4: f64,
    pub eps4z: f64,
    pub e0: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub ah: f64,
    pub bh: f64,
    pub hh: f64,
}

impl MomentSet {
    pub fn energy_variance(&self) -> f64 {
        self.hh - self.e0 * self.e0
    }

    /// `(name, value)` for every moment, in a fixed order.
    pub fn fields(&self) -> [(&'static str, f64); 10] {
        [
            ("eps2", self.eps2),
            ("eps2z", self.eps2z),
            ("eps4", self.eps4),
            ("eps4z", self.eps4z),
            ("E0", self.e0),
            ("meanA", self.mean_a),
            ("meanB", self.mean_b),
            ("AH", self.ah),
            ("BH", self.bh),
            ("HH", self.hh),
        ]
    }
}

/// Number of `M = 0` states with total spin `S`.
pub fn multiplet_count(length: usize, spin: u32) -> u64 {
    let half = (length / 2) as i64;
    binomial(length as u64, half - spin as i64) - binomial(length as u64, half - spin as i64 - 1)
}

fn check_args(length: usize, spin: u32, lambda: f64) -> Result<()> {
    if length < 6 || length % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "closed forms need an even chain of at least 6 sites, got L = {length}"
        )));
    }
    if spin as usize > length / 2 {
        return Err(Error::InvalidArgument(format!(
            "spin {spin} exceeds the maximum L/2 = {}",
            length / 2
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    Ok(())
}

pub fn moments(length: usize, spin: u32, lambda: f64) -> Result<MomentSet> {
    check_args(length, spin, lambda)?;
    let l = length as f64;
    let x = (spin * (spin + 1)) as f64;
    let eps2 = (x - 0.75 * l) / (l * (l - 1.0));
    let eps2z = -1.0 / (4.0 * (l - 1.0));
    let eps4 = (eps2 * eps2 * l * (l - 1.0) - eps2 * (l - 3.0) - 0.375) / ((l - 2.0) * (l - 3.0));
    let eps4z = -(eps2 * (l - 2.0) / 4.0 + eps2z * (l - 1.5) + 0.125) / ((l - 2.0) * (l - 3.0));
    let e0 = (1.0 + lambda) * (0.75 * l - x) / (l - 1.0);
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    let mean_a = (0.75 * l - x) / (s3 * l * (l - 1.0));
    let mean_b = -x / (s6 * l * (l - 1.0));

    // <(S_i.S_{i+1})(S_j.S_{j+d})> summed over j, for d = 1 and d = 2
    let nn = (0.1875 - eps2 / 2.0) + 2.0 * eps2 / 4.0 + (l - 3.0) * eps4;
    let nnn = 4.0 * eps2 / 4.0 + (l - 4.0) * eps4;
    let ah = (nn + lambda * nnn) / s3;
    let hh = (1.0 + lambda * lambda) * l * nn + 2.0 * lambda * l * nnn;
    let zz_nn = (0.0625 - (eps2 - eps2z) / 4.0) + 2.0 * eps2z / 4.0 + (l - 3.0) * eps4z;
    let zz_nnn = 4.0 * eps2z / 4.0 + (l - 4.0) * eps4z;
    let bh = -(3.0 / s6) * zz_nn - (3.0 * lambda / s6) * zz_nnn + ah / 2f64.sqrt();

    Ok(MomentSet {
        length,
        spin,
        lambda,
        eps2,
        eps2z,
        eps4,
        eps4z,
        e0,
        mean_a,
        mean_b,
        ah,
        bh,
        hh,
    })
}

/// `dO(E, S)/d(E/L)` at `E = E0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficients {
    pub slope_a: f64,
    pub slope_b: f64,
}

pub fn linear_coefficients(length: usize, spin: u32, lambda: f64) -> Result<LinearCoefficients> {
    let m = moments(length, spin, lambda)?;
    let var = m.energy_variance();
    if var <= 1e-12 * m.hh.abs().max(1.0) {
        return Err(Error::DegenerateFit(format!(
            "energy variance vanishes at L = {length}, S = {spin}"
        )));
    }
    let l = length as f64;
    let x = (spin * (spin + 1)) as f64;
    let den_a = 3f64.sqrt() * ((l - 3.0) * (1.0 + lambda * lambda) - 4.0 * lambda);
    let den_b = 4.0 * x - 3.0 * (l - 2.0) * (l - 2.0);
    if den_a == 0.0 || den_b == 0.0 {
        return Err(Error::DegenerateFit(format!(
            "slope denominator vanishes at L = {length}, S = {spin}, lambda = {lambda}"
        )));
    }
    let slope_a = (l - 3.0 - 2.0 * lambda) / den_a;
    let slope_b = slope_a * 2.0 * 2f64.sqrt() * x / den_b;
    Ok(LinearCoefficients { slope_a, slope_b })
}

/// Slopes from the connected cumulants `L <O H>_c / <H^2>_c` of a moment set.
pub fn cumulant_slopes(m: &MomentSet) -> Result<LinearCoefficients> {
    let var = m.energy_variance();
    if var <= 1e-12 * m.hh.abs().max(1.0) {
        return Err(Error::DegenerateFit("energy variance vanishes".into()));
    }
    let l = m.length as f64;
    Ok(LinearCoefficients {
        slope_a: l * (m.ah - m.mean_a * m.e0) / var,
        slope_b: l * (m.bh - m.mean_b * m.e0) / var,
    })
}

/// First-order prediction `O(E0, S) + slope (E - E0) / L` for `O` in `{A, B, C}`.
pub fn diagonal_prediction(
    obs: Observable,
    length: usize,
    spin: u32,
    lambda: f64,
    energy: f64,
) -> Result<f64> {
    let m = moments(length, spin, lambda)?;
    let c = linear_coefficients(length, spin, lambda)?;
    let de = (energy - m.e0) / length as f64;
    let a = m.mean_a + c.slope_a * de;
    let b = m.mean_b + c.slope_b * de;
    Ok(match obs {
        Observable::A => a,
        Observable::B => b,
        Observable::C => crate::operators::C_FROM_A * a + crate::operators::C_FROM_B * b,
    })
}

/// One diagonalized block together with the basis its vectors live in.
#[derive(Debug, Clone, Copy)]
pub struct BlockRef<'a> {
    pub basis: &'a SymmetryBasis,
    pub spectrum: &'a SpinResolvedSpectrum,
}

fn check_blocks(blocks: &[BlockRef<'_>], spin: u32, require_m0: bool) -> Result<usize> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::InvalidArgument("no blocks supplied".into()))?;
    let length = first.basis.length();
    let magnetization = first.basis.sector.magnetization;
    if require_m0 && magnetization != 0 {
        return Err(Error::SectorMismatch("moments are defined at M = 0".into()));
    }
    let mut found = 0u64;
    for b in blocks {
        if b.basis.sector != b.spectrum.sector {
            return Err(Error::SectorMismatch(format!(
                "basis {} paired with spectrum {}",
                b.basis.sector, b.spectrum.sector
            )));
        }
        if b.basis.length() != length || b.basis.sector.magnetization != magnetization {
            return Err(Error::SectorMismatch(format!(
                "block {} does not belong to L = {length}, M = {magnetization}",
                b.basis.sector
            )));
        }
        found += b.spectrum.spins.iter().filter(|&&s| s == spin).count() as u64;
    }
    let expected = if magnetization.unsigned_abs() <= spin {
        multiplet_count(length, spin)
    } else {
        0
    };
    if found != expected || expected == 0 {
        return Err(Error::SectorMismatch(format!(
            "found {found} states with S = {spin} at M = {magnetization}, expected {expected}"
        )));
    }
    Ok(length)
}

/// Moments evaluated as `(1/D_S) sum_a <a|X|a>` over every spin-resolved
/// eigenstate with `S_a = S`.  The blocks must cover all `M = 0` sectors.
pub fn trace_moments(blocks: &[BlockRef<'_>], lambda: f64, spin: u32) -> Result<MomentSet> {
    let length = check_blocks(blocks, spin, true)?;
    let product = ProductBasis::new(length, 0)?;
    let pair = |i: usize, j: usize, ex: f64, zz: f64| PairOperator::new(length).with_term(i, j, ex, zz);
    let ss01 = pair(0, 1, 1.0, 0.0);
    let zz01 = pair(0, 1, 0.0, 1.0);
    let ss24 = pair(2, 4, 1.0, 0.0);

    let mut acc = [0.0f64; 10];
    let mut count = 0usize;
    for b in blocks {
        let a_blk = build_observable(b.basis, Observable::A)?;
        let b_blk = build_observable(b.basis, Observable::B)?;
        let spec = b.spectrum;
        for (idx, &s) in spec.spins.iter().enumerate() {
            if s != spin {
                continue;
            }
            let v: Vec<_> = spec.vectors.column(idx).iter().copied().collect();
            let e = spec.energies[idx];
            let a_vv = dot(&v, &a_blk.apply(&v));
            let b_vv = dot(&v, &b_blk.apply(&v));

            let full = product.densify(&b.basis.expand_vector(&v)?)?;
            let w_ss01 = ss01.apply_product(&product, &full)?;
            let w_zz01 = zz01.apply_product(&product, &full)?;
            let w_ss24 = ss24.apply_product(&product, &full)?;
            let eps2 = dot(&full, &w_ss01);
            let eps2z = dot(&full, &w_zz01);
            let eps4 = dot(&w_ss01, &w_ss24);
            let eps4z = dot(&w_zz01, &w_ss24);

            for (slot, val) in acc
                .iter_mut()
                .zip([eps2, eps2z, eps4, eps4z, e, a_vv, b_vv, a_vv * e, b_vv * e, e * e])
            {
                *slot += val;
            }
            count += 1;
        }
    }
    let d = count as f64;
    let [eps2, eps2z, eps4, eps4z, e0, mean_a, mean_b, ah, bh, hh] = acc.map(|x| x / d);
    Ok(MomentSet {
        length,
        spin,
        lambda,
        eps2,
        eps2z,
        eps4,
        eps4z,
        e0,
        mean_a,
        mean_b,
        ah,
        bh,
        hh,
    })
}

/// `(1/D_S) sum_a <a|O|a> E_a^n` over the spin-`S` eigenstates of one
/// magnetization; the blocks must cover every sector of that magnetization.
pub fn trace_energy_moment(
    blocks: &[BlockRef<'_>],
    obs: Observable,
    spin: u32,
    power: i32,
) -> Result<f64> {
    check_blocks(blocks, spin, false)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for b in blocks {
        let blk = build_observable(b.basis, obs)?;
        for (idx, &s) in b.spectrum.spins.iter().enumerate() {
            if s != spin {
                continue;
            }
            let v: Vec<_> = b.spectrum.vectors.column(idx).iter().copied().collect();
            total += dot(&v, &blk.apply(&v)) * b.spectrum.energies[idx].powi(power);
            count += 1;
        }
    }
    Ok(total / count as f64)
}

fn dot(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}
