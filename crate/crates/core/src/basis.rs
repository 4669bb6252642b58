//! Product states at fixed magnetization and the symmetry-adapted
//! momentum / spin-inversion basis of a periodic spin-1/2 chain.
//!
//! A basis vector is the normalized projection of a representative
//! product state,
//!
//! ```text
//! |a> = P |rep_a> / ||P |rep_a>||,   P = (1/L) sum_r e^{-ikr} T^r  (1 + zX)/2
//! ```
//!
//! where `T` translates every spin by one site and `X` flips all spins.
//! The amplitude of `T^l X^f |rep>` in `|a>` is `e^{-ikl} z^f ||P|rep>||`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chain length that fits the `u32` bit representation comfortably.
pub const MAX_SITES: usize = 24;

/// Computational-basis state; bit `i` set means spin up at site `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProductState(pub u32);

impl ProductState {
    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn up_count(self) -> u32 {
        self.0.count_ones()
    }

    /// Twice the magnetization `sum_i S^z_i` on a chain of `length` sites.
    pub fn twice_magnetization(self, length: usize) -> i32 {
        2 * self.0.count_ones() as i32 - length as i32
    }

    pub fn is_up(self, site: usize) -> bool {
        self.0 >> site & 1 == 1
    }
}

/// Translate by one site: the spin at site `i` moves to site `i + 1 (mod L)`.
#[inline]
pub fn translate(bits: u32, length: usize) -> u32 {
    let mask = site_mask(length);
    ((bits << 1) | (bits >> (length - 1))) & mask
}

/// Global spin flip.
#[inline]
pub fn flip(bits: u32, length: usize) -> u32 {
    !bits & site_mask(length)
}

#[inline]
pub fn site_mask(length: usize) -> u32 {
    if length >= 32 {
        u32::MAX
    } else {
        (1u32 << length) - 1
    }
}

/// Spin-inversion parity of an `M = 0` sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Parity::Even),
            -1 => Ok(Parity::Odd),
            other => Err(Error::InvalidSector(format!(
                "spin-inversion parity must be +1 or -1, got {other}"
            ))),
        }
    }
}

/// Simultaneous eigenvalue labels `{L, M, k, Z2}` of a symmetry block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorLabel {
    pub length: usize,
    pub magnetization: i32,
    /// `n` in `k = 2 pi n / L`, with `-L/2 < n <= L/2`.
    pub k_index: i32,
    pub z2: Option<Parity>,
}

impl SectorLabel {
    pub fn new(length: usize, magnetization: i32, k_index: i32, z2: Option<Parity>) -> Result<Self> {
        let label = SectorLabel {
            length,
            magnetization,
            k_index,
            z2,
        };
        label.validate()?;
        Ok(label)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.length;
        if l % 2 != 0 {
            return Err(Error::InvalidSector(format!("chain length must be even, got {l}")));
        }
        if !(2..=MAX_SITES).contains(&l) {
            return Err(Error::InvalidSector(format!(
                "chain length {l} outside supported range 2..={MAX_SITES}"
            )));
        }
        let half = (l / 2) as i32;
        if self.magnetization.abs() > half {
            return Err(Error::InvalidSector(format!(
                "|M| = {} exceeds L/2 = {half}",
                self.magnetization.abs()
            )));
        }
        if self.k_index <= -half || self.k_index > half {
            return Err(Error::InvalidSector(format!(
                "k index {} outside ({}, {half}]",
                self.k_index, -half
            )));
        }
        match (self.magnetization, self.z2) {
            (0, None) => Err(Error::InvalidSector(
                "spin-inversion parity is required when M = 0".into(),
            )),
            (m, Some(_)) if m != 0 => Err(Error::InvalidSector(format!(
                "spin-inversion parity is only defined for M = 0, got M = {m}"
            ))),
            _ => Ok(()),
        }
    }

    /// Number of up spins in every product state of this sector.
    pub fn up_count(&self) -> u32 {
        (self.length as i32 / 2 + self.magnetization) as u32
    }

    pub fn momentum(&self) -> f64 {
        2.0 * PI * self.k_index as f64 / self.length as f64
    }

    /// `k = 0` and `k = pi` carry an extra reflection symmetry.
    pub fn is_parity_sector(&self) -> bool {
        self.k_index == 0 || 2 * self.k_index == self.length as i32
    }

    /// All `{k, Z2}` sectors at fixed `(L, M)`, in ascending `k` then parity order.
    pub fn all_for(length: usize, magnetization: i32) -> Result<Vec<SectorLabel>> {
        let half = (length / 2) as i32;
        let parities: Vec<Option<Parity>> = if magnetization == 0 {
            vec![Some(Parity::Even), Some(Parity::Odd)]
        } else {
            vec![None]
        };
        let mut out = Vec::new();
        for k in (-half + 1)..=half {
            for &z in &parities {
                out.push(SectorLabel::new(length, magnetization, k, z)?);
            }
        }
        Ok(out)
    }

    /// Compact identifier used for cache file names and logs.
    pub fn tag(&self) -> String {
        let z = match self.z2 {
            Some(Parity::Even) => "zp",
            Some(Parity::Odd) => "zm",
            None => "z0",
        };
        format!("L{}_M{}_k{}_{}", self.length, self.magnetization, self.k_index, z)
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(L={}, M={}, k={}", self.length, self.magnetization, self.k_index)?;
        match self.z2 {
            Some(p) => write!(f, ", Z2={:+})", p.sign()),
            None => write!(f, ")"),
        }
    }
}

/// A symmetry orbit together with the data needed to project onto it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeOrbit {
    pub rep: ProductState,
    /// Smallest `t > 0` with `T^t |rep> = |rep>`.
    pub periodicity: u32,
    /// `g` with `T^g X |rep> = |rep>` when the flipped orbit coincides.
    pub z2_partner_shift: Option<u32>,
    /// `||P |rep>||` for the sector projector `P`.
    pub norm: f64,
}

/// Where a product state sits relative to its orbit: `state = T^shift X^flipped rep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Located {
    pub index: usize,
    pub shift: u32,
    pub flipped: bool,
}

/// Orthonormal symmetry-adapted basis of one sector.
#[derive(Debug, Clone)]
pub struct SymmetryBasis {
    pub sector: SectorLabel,
    pub orbits: Vec<RepresentativeOrbit>,
    /// `e^{ikl}` for `l = 0..L`.
    phases: Vec<Complex64>,
}

/// Lexicographically smallest image of `bits` under translations (and flips
/// when `with_flip`), with the group element that maps the image back:
/// `bits = T^shift X^flipped image`.
pub fn canonical(bits: u32, length: usize, with_flip: bool) -> (u32, u32, bool) {
    let mut best = bits;
    let mut shift = 0u32;
    let mut flipped = false;
    let mut cur = bits;
    for t in 1..length {
        cur = translate(cur, length);
        if cur < best {
            best = cur;
            shift = t as u32;
        }
    }
    if with_flip {
        let mut cur = flip(bits, length);
        for t in 0..length {
            if t > 0 {
                cur = translate(cur, length);
            }
            if cur < best {
                best = cur;
                shift = t as u32;
                flipped = true;
            }
        }
    }
    // best = T^shift X^f bits  =>  bits = T^{-shift} X^f best
    let back = (length as u32 - shift) % length as u32;
    (best, back, flipped)
}

/// All product states with `up` spins up on `length` sites, ascending.
pub fn fixed_popcount_states(length: usize, up: u32) -> Vec<u32> {
    if up as usize > length {
        return Vec::new();
    }
    if up == 0 {
        return vec![0];
    }
    let limit = 1u64 << length;
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << up) - 1;
    while v < limit {
        out.push(v as u32);
        // Gosper's hack: next integer with the same popcount.
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

impl SymmetryBasis {
    /// Enumerate every admissible orbit of the sector, ascending by representative.
    pub fn enumerate(sector: SectorLabel) -> Result<Self> {
        sector.validate()?;
        let length = sector.length;
        let n = sector.k_index as i64;
        let l = length as i64;
        let with_flip = sector.z2.is_some();
        let mut orbits = Vec::new();

        for bits in fixed_popcount_states(length, sector.up_count()) {
            let (rep, _, _) = canonical(bits, length, with_flip);
            if rep != bits {
                continue;
            }
            let mut periodicity = length as u32;
            let mut cur = bits;
            for t in 1..=length {
                cur = translate(cur, length);
                if cur == bits {
                    periodicity = t as u32;
                    break;
                }
            }
            if (n * periodicity as i64).rem_euclid(l) != 0 {
                continue;
            }
            let mut partner = None;
            if with_flip {
                let mut cur = flip(bits, length);
                for g in 0..periodicity {
                    if cur == bits {
                        partner = Some(g);
                        break;
                    }
                    cur = translate(cur, length);
                }
            }
            let norm = match (sector.z2, partner) {
                (None, _) => 1.0 / (periodicity as f64).sqrt(),
                (Some(z), Some(g)) => {
                    // X|rep> = T^{-g}|rep>, so the flip contributes z e^{-ikg} = +-1.
                    let sign = if (n * g as i64).rem_euclid(l) == 0 { 1 } else { -1 };
                    if z.sign() * sign != 1 {
                        continue;
                    }
                    1.0 / (periodicity as f64).sqrt()
                }
                (Some(_), None) => 1.0 / (2.0 * periodicity as f64).sqrt(),
            };
            orbits.push(RepresentativeOrbit {
                rep: ProductState(bits),
                periodicity,
                z2_partner_shift: partner,
                norm,
            });
        }

        let k = sector.momentum();
        let phases = (0..length)
            .map(|t| Complex64::from_polar(1.0, k * t as f64))
            .collect();
        Ok(SymmetryBasis {
            sector,
            orbits,
            phases,
        })
    }

    pub fn dim(&self) -> usize {
        self.orbits.len()
    }

    pub fn length(&self) -> usize {
        self.sector.length
    }

    /// Find the orbit containing `bits`, if it is admitted in this sector.
    pub fn locate(&self, bits: u32) -> Option<Located> {
        let (rep, shift, flipped) = canonical(bits, self.sector.length, self.sector.z2.is_some());
        self.orbits
            .binary_search_by(|o| o.rep.0.cmp(&rep))
            .ok()
            .map(|index| Located {
                index,
                shift,
                flipped,
            })
    }

    /// `<a|s>` for a located product state `s`: `e^{ikl} z^f ||P|rep_a>||`.
    pub fn overlap(&self, loc: Located) -> Complex64 {
        let z = match (self.sector.z2, loc.flipped) {
            (Some(Parity::Odd), true) => -1.0,
            _ => 1.0,
        };
        self.phases[loc.shift as usize] * (z * self.orbits[loc.index].norm)
    }

    /// `e^{ikl}`.
    pub fn phase(&self, shift: u32) -> Complex64 {
        self.phases[shift as usize % self.sector.length]
    }

    /// Amplitudes of basis vector `orbit_index` in the product basis.
    pub fn expand(&self, orbit_index: usize) -> Result<BTreeMap<ProductState, Complex64>> {
        let orbit = self.orbits.get(orbit_index).ok_or(Error::IndexOutOfRange {
            index: orbit_index,
            dim: self.dim(),
        })?;
        let length = self.sector.length;
        let mut out = BTreeMap::new();
        let mut cur = orbit.rep.0;
        for r in 0..orbit.periodicity {
            out.insert(ProductState(cur), self.phases[r as usize].conj() * orbit.norm);
            cur = translate(cur, length);
        }
        if let (Some(z), None) = (self.sector.z2, orbit.z2_partner_shift) {
            let mut cur = flip(orbit.rep.0, length);
            for r in 0..orbit.periodicity {
                out.insert(
                    ProductState(cur),
                    self.phases[r as usize].conj() * (z.sign() as f64 * orbit.norm),
                );
                cur = translate(cur, length);
            }
        }
        Ok(out)
    }

    /// Expand a coefficient vector over this basis into product-basis amplitudes.
    pub fn expand_vector(&self, coeffs: &[Complex64]) -> Result<BTreeMap<ProductState, Complex64>> {
        if coeffs.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "coefficient vector has length {}, basis has dimension {}",
                coeffs.len(),
                self.dim()
            )));
        }
        let mut out: BTreeMap<ProductState, Complex64> = BTreeMap::new();
        for (i, c) in coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (s, a) in self.expand(i)? {
                *out.entry(s).or_default() += c * a;
            }
        }
        Ok(out)
    }
}

/// Plain product basis at fixed magnetization, used by brute-force oracles.
#[derive(Debug, Clone)]
pub struct ProductBasis {
    pub length: usize,
    pub states: Vec<u32>,
}

impl ProductBasis {
    pub fn new(length: usize, magnetization: i32) -> Result<Self> {
        let up = length as i32 / 2 + magnetization;
        if length % 2 != 0 || up < 0 || up as usize > length || length > MAX_SITES {
            return Err(Error::InvalidSector(format!(
                "no product basis for L = {length}, M = {magnetization}"
            )));
        }
        Ok(ProductBasis {
            length,
            states: fixed_popcount_states(length, up as u32),
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, bits: u32) -> Option<usize> {
        self.states.binary_search(&bits).ok()
    }

    /// Dense product-basis vector from a sparse amplitude map.
    pub fn densify(&self, amps: &BTreeMap<ProductState, Complex64>) -> Result<Vec<Complex64>> {
        let mut v = vec![Complex64::default(); self.dim()];
        for (s, a) in amps {
            let i = self.index_of(s.0).ok_or_else(|| {
                Error::InvalidArgument(format!("state {:#b} not in product basis", s.0))
            })?;
            v[i] = *a;
        }
        Ok(v)
    }
}

/// Binomial coefficient as `u64` (exact for the sizes used here).
pub fn binomial(n: u64, k: i64) -> u64 {
    if k < 0 || k as u64 > n {
        return 0;
    }
    let k = (k as u64).min(n - k as u64);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}
