//! Exact Clebsch-Gordan coefficients and the Wigner-Eckart reduction.
//!
//! Coefficients come from the Racah sum evaluated in integer arithmetic on
//! prime-exponent vectors, so every value has the exact form
//! `q * sqrt(n)` with `q` rational and `n` square-free.  Sums of such values
//! are kept grouped by radicand, which makes identities such as the vanishing
//! column sum for rank `r > 0` exact.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::MatrixElementTable;

/// An angular momentum `j`, stored as `2j` so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AngularMomentum {
    pub twice: u32,
}

impl AngularMomentum {
    pub fn integer(j: u32) -> Self {
        AngularMomentum { twice: 2 * j }
    }

    pub fn from_twice(twice: u32) -> Self {
        AngularMomentum { twice }
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl fmt::Display for AngularMomentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Exact real number `coeff * sqrt(radicand)` with square-free `radicand`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    pub coeff: BigRational,
    pub radicand: BigUint,
}

impl Surd {
    pub fn zero() -> Self {
        Surd {
            coeff: BigRational::zero(),
            radicand: BigUint::one(),
        }
    }

    pub fn one() -> Self {
        Surd {
            coeff: BigRational::one(),
            radicand: BigUint::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// Signed square as a reduced fraction: `sign * coeff^2 * radicand`.
    pub fn signed_square(&self) -> (BigInt, BigUint) {
        let sq = &self.coeff * &self.coeff * BigRational::from_integer(BigInt::from(self.radicand.clone()));
        let num = sq.numer().magnitude().clone();
        let den = sq.denom().magnitude().clone();
        let sign = if self.coeff.is_negative() { Sign::Minus } else { Sign::Plus };
        let num = if num.is_zero() { BigInt::zero() } else { BigInt::from_biguint(sign, num) };
        (num, den)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (num, den) = self.signed_square();
        let mag = ratio_to_f64(num.magnitude(), &den).sqrt();
        if num.is_negative() {
            -mag
        } else {
            mag
        }
    }

    pub fn mul(&self, other: &Surd) -> Surd {
        let g = self.radicand.gcd(&other.radicand);
        let radicand = (&self.radicand / &g) * (&other.radicand / &g);
        let coeff = &self.coeff * &other.coeff * BigRational::from_integer(BigInt::from(g));
        Surd { coeff, radicand }
    }
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    // Scale both to at most 2^1000 to stay inside f64 range.
    let shift = num.bits().max(den.bits()).saturating_sub(1000);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// Exact sum of surds, grouped by square-free radicand.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurdSum {
    pub terms: BTreeMap<BigUint, BigRational>,
}

impl SurdSum {
    pub fn add(&mut self, s: &Surd) {
        if s.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(s.radicand.clone())
            .or_insert_with(BigRational::zero);
        *entry += &s.coeff;
        if entry.is_zero() {
            self.terms.remove(&s.radicand);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value when it is rational (no irrational part), else `None`.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(rad, c)| {
                Surd {
                    coeff: c.clone(),
                    radicand: rad.clone(),
                }
                .to_f64()
            })
            .sum()
    }
}

/// Prime exponents of `n!` for `n` up to a fixed bound, built once.
struct FactorialTable {
    primes: Vec<u64>,
    exps: Vec<Vec<i64>>,
}

const FACTORIAL_TABLE_MAX: usize = 1000;

fn factorial_table() -> &'static FactorialTable {
    static TABLE: OnceLock<FactorialTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = FACTORIAL_TABLE_MAX;
        let mut sieve = vec![true; n + 1];
        let mut primes = Vec::new();
        for p in 2..=n {
            if sieve[p] {
                primes.push(p as u64);
                let mut q = p * p;
                while q <= n {
                    sieve[q] = false;
                    q += p;
                }
            }
        }
        let mut exps = vec![vec![0i64; primes.len()]; n + 1];
        for k in 2..=n {
            let mut row = exps[k - 1].clone();
            let mut m = k as u64;
            for (i, &p) in primes.iter().enumerate() {
                while m % p == 0 {
                    row[i] += 1;
                    m /= p;
                }
                if m == 1 {
                    break;
                }
            }
            exps[k] = row;
        }
        FactorialTable { primes, exps }
    })
}

fn factorial_exps(n: i64) -> Result<&'static [i64]> {
    let t = factorial_table();
    if n < 0 || n as usize >= t.exps.len() {
        return Err(Error::InvalidArgument(format!(
            "factorial argument {n} outside supported range 0..{FACTORIAL_TABLE_MAX}"
        )));
    }
    Ok(&t.exps[n as usize])
}

fn integer_exps(n: u64) -> Vec<i64> {
    let t = factorial_table();
    let mut out = vec![0i64; t.primes.len()];
    let mut m = n;
    for (i, &p) in t.primes.iter().enumerate() {
        while m % p == 0 {
            out[i] += 1;
            m /= p;
        }
        if m == 1 {
            break;
        }
    }
    debug_assert_eq!(m, 1, "integer has a prime factor above the table bound");
    out
}

fn prime_power_product(exps: &[i64]) -> BigUint {
    let t = factorial_table();
    let mut acc = BigUint::one();
    for (i, &e) in exps.iter().enumerate() {
        if e > 0 {
            acc *= BigUint::from(t.primes[i]).pow(e as u32);
        }
    }
    acc
}

/// `<j m | j1 m1; j2 m2>`, exact.  Arguments are twice the physical values
/// for the projections; selection-rule violations give an exact zero.
pub fn clebsch_gordan(
    j: AngularMomentum,
    twice_m: i32,
    j1: AngularMomentum,
    twice_m1: i32,
    j2: AngularMomentum,
    twice_m2: i32,
) -> Result<Surd> {
    let (tj, tj1, tj2) = (j.twice as i64, j1.twice as i64, j2.twice as i64);
    let (tm, tm1, tm2) = (twice_m as i64, twice_m1 as i64, twice_m2 as i64);
    if tm != tm1 + tm2 {
        return Ok(Surd::zero());
    }
    let projection_ok = |tj: i64, tm: i64| tm.abs() <= tj && (tj + tm) % 2 == 0;
    if !projection_ok(tj, tm) || !projection_ok(tj1, tm1) || !projection_ok(tj2, tm2) {
        return Ok(Surd::zero());
    }
    if tj < (tj1 - tj2).abs() || tj > tj1 + tj2 || (tj1 + tj2 + tj) % 2 != 0 {
        return Ok(Surd::zero());
    }
    // All projections zero with j1 + j2 + j odd: vanishes by reflection symmetry.
    if tm == 0 && tm1 == 0 && tm2 == 0 && ((tj1 + tj2 + tj) / 2) % 2 == 1 {
        return Ok(Surd::zero());
    }

    let a = (tj1 + tj2 - tj) / 2;
    let b = (tj1 - tj2 + tj) / 2;
    let c = (-tj1 + tj2 + tj) / 2;
    let d = (tj1 + tj2 + tj) / 2 + 1;
    let np = factorial_table().primes.len();
    let mut pre = integer_exps((tj + 1) as u64);
    let add = |acc: &mut Vec<i64>, n: i64, sign: i64| -> Result<()> {
        for (x, e) in acc.iter_mut().zip(factorial_exps(n)?) {
            *x += sign * e;
        }
        Ok(())
    };
    for n in [
        a,
        b,
        c,
        (tj + tm) / 2,
        (tj - tm) / 2,
        (tj1 - tm1) / 2,
        (tj1 + tm1) / 2,
        (tj2 - tm2) / 2,
        (tj2 + tm2) / 2,
    ] {
        add(&mut pre, n, 1)?;
    }
    add(&mut pre, d, -1)?;

    let k_min = 0.max((tj2 - tj - tm1) / 2).max((tj1 - tj + tm2) / 2);
    let k_max = a.min((tj1 - tm1) / 2).min((tj2 + tm2) / 2);
    if k_min > k_max {
        return Ok(Surd::zero());
    }
    let mut term_exps = Vec::new();
    for k in k_min..=k_max {
        let mut e = vec![0i64; np];
        for n in [
            k,
            a - k,
            (tj1 - tm1) / 2 - k,
            (tj2 + tm2) / 2 - k,
            (tj - tj2 + tm1) / 2 + k,
            (tj - tj1 - tm2) / 2 + k,
        ] {
            add(&mut e, n, 1)?;
        }
        term_exps.push((k, e));
    }
    let mut common = vec![0i64; np];
    for (_, e) in &term_exps {
        for (x, y) in common.iter_mut().zip(e) {
            *x = (*x).max(*y);
        }
    }
    let mut sum = BigInt::zero();
    for (k, e) in &term_exps {
        let diff: Vec<i64> = common.iter().zip(e).map(|(c, x)| c - x).collect();
        let mag = BigInt::from(prime_power_product(&diff));
        if k % 2 == 0 {
            sum += mag;
        } else {
            sum -= mag;
        }
    }
    if sum.is_zero() {
        return Ok(Surd::zero());
    }

    // sqrt(prod p^e) = prod p^{floor(e/2)} * sqrt(prod p^{e mod 2})
    let mut num_exps = vec![0i64; np];
    let mut den_exps = vec![0i64; np];
    let mut rad_exps = vec![0i64; np];
    for i in 0..np {
        let half = pre[i].div_euclid(2);
        rad_exps[i] = pre[i].rem_euclid(2);
        let net = half - common[i];
        if net >= 0 {
            num_exps[i] = net;
        } else {
            den_exps[i] = -net;
        }
    }
    let coeff = BigRational::new(
        sum * BigInt::from(prime_power_product(&num_exps)),
        BigInt::from(prime_power_product(&den_exps)),
    );
    Ok(Surd {
        coeff,
        radicand: prime_power_product(&rad_exps),
    })
}

/// Convenience for integer angular momenta and projections.
pub fn clebsch_gordan_int(j: u32, m: i32, j1: u32, m1: i32, j2: u32, m2: i32) -> Result<Surd> {
    clebsch_gordan(
        AngularMomentum::integer(j),
        2 * m,
        AngularMomentum::integer(j1),
        2 * m1,
        AngularMomentum::integer(j2),
        2 * m2,
    )
}

/// Floating view of `<j m | j1 m1; j2 m2>` for integer arguments.
pub fn cg_f64(j: u32, m: i32, j1: u32, m1: i32, j2: u32, m2: i32) -> Result<f64> {
    Ok(clebsch_gordan_int(j, m, j1, m1, j2, m2)?.to_f64())
}

/// `sum_{M=-S}^{S} <S M | S M; r 0>`, exact.
pub fn cg_column_sum(spin: AngularMomentum, rank: AngularMomentum) -> Result<SurdSum> {
    let mut total = SurdSum::default();
    let ts = spin.twice as i32;
    let mut tm = -ts;
    while tm <= ts {
        total.add(&clebsch_gordan(spin, tm, spin, tm, rank, 0)?);
        tm += 2;
    }
    Ok(total)
}

/// Large-`S` limit of `<S 0 | S 0; r 0>` at fixed spin density.
///
/// For even `r = 2n` this is `sqrt(pi) / (Gamma(1/2 - n) n!)`, which reduces
/// to `(2n)! / ((-4)^n (n!)^2)`; odd `r` gives zero.
pub fn cg_asymptotic_r_even(rank: i64) -> Result<f64> {
    if rank < 0 {
        return Err(Error::InvalidArgument(format!("rank must be non-negative, got {rank}")));
    }
    if rank % 2 == 1 {
        return Ok(0.0);
    }
    let n = rank / 2;
    let mut value = 1.0f64;
    for i in 1..=n {
        // (2i)(2i-1) / (-4 i^2)
        value *= -((2 * i) * (2 * i - 1)) as f64 / (4 * i * i) as f64;
    }
    Ok(value)
}

/// A reduced matrix element `<E_a S_a || T^(r) || E_b S_b>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedElement {
    pub alpha: usize,
    pub beta: usize,
    pub e_alpha: f64,
    pub e_beta: f64,
    pub s_alpha: u32,
    pub s_beta: u32,
    pub reduced: Complex64,
}

#[derive(Debug, Clone)]
pub struct ReducedElementTable {
    pub rank: u32,
    pub q: i32,
    pub m_alpha: i32,
    pub m_beta: i32,
    pub records: Vec<ReducedElement>,
    /// Records dropped because their Clebsch-Gordan coefficient vanishes.
    pub skipped: usize,
}

/// Divide out `<S_a M_a | S_b M_b; r q>` from every record with a nonzero coefficient.
pub fn reduce_matrix_elements(
    table: &MatrixElementTable,
    rank: u32,
    q: i32,
    m_alpha: i32,
    m_beta: i32,
) -> Result<ReducedElementTable> {
    let mut cache: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut records = Vec::with_capacity(table.records.len());
    let mut skipped = 0;
    for r in &table.records {
        let key = (r.s_alpha, r.s_beta);
        let cg = match cache.get(&key) {
            Some(&v) => v,
            None => {
                let v = cg_f64(r.s_alpha, m_alpha, r.s_beta, m_beta, rank, q)?;
                cache.insert(key, v);
                v
            }
        };
        if cg == 0.0 {
            skipped += 1;
            continue;
        }
        records.push(ReducedElement {
            alpha: r.alpha,
            beta: r.beta,
            e_alpha: r.e_alpha,
            e_beta: r.e_beta,
            s_alpha: r.s_alpha,
            s_beta: r.s_beta,
            reduced: r.value / cg,
        });
    }
    Ok(ReducedElementTable {
        rank,
        q,
        m_alpha,
        m_beta,
        records,
        skipped,
    })
}

/// `(-1)^r sqrt(2 S_a + 1) / sqrt(2 S_b + 1)`.
pub fn hermitian_prefactor(s_alpha: u32, s_beta: u32, rank: u32) -> f64 {
    let sign = if rank % 2 == 0 { 1.0 } else { -1.0 };
    sign * ((2 * s_alpha + 1) as f64).sqrt() / ((2 * s_beta + 1) as f64).sqrt()
}

/// Predicted `<b || T || a>` of a Hermitian rank-`r`, `q = 0` tensor from `<a || T || b>`.
pub fn hermitian_reduced_relation(entry: &ReducedElement, rank: u32) -> Complex64 {
    entry.reduced.conj() * hermitian_prefactor(entry.s_alpha, entry.s_beta, rank)
}

/// One row of the Clebsch-Gordan CSV table.
#[derive(Debug, Clone)]
pub struct CgRow {
    pub twice: [i32; 6],
    pub numerator: BigInt,
    pub denominator_square: BigUint,
    pub value: f64,
}

pub const CG_CSV_HEADER: &str = "2j,2m,2j1,2m1,2j2,2m2,numerator,denominator-square,float";

impl CgRow {
    pub fn csv_line(&self) -> String {
        let t = &self.twice;
        format!(
            "{},{},{},{},{},{},{},{},{:.16e}",
            t[0], t[1], t[2], t[3], t[4], t[5], self.numerator, self.denominator_square, self.value
        )
    }
}

/// Every nonzero coefficient with `2 j1, 2 j2 <= max_twice`.
///
/// The exact value is `sign(numerator) * sqrt(|numerator| / denominator-square)`.
pub fn cg_table(max_twice: u32) -> Result<Vec<CgRow>> {
    let mut rows = Vec::new();
    for tj1 in 0..=max_twice {
        for tj2 in 0..=max_twice {
            let lo = (tj1 as i32 - tj2 as i32).unsigned_abs();
            let mut tj = lo;
            while tj <= tj1 + tj2 {
                let (j, j1, j2) = (
                    AngularMomentum::from_twice(tj),
                    AngularMomentum::from_twice(tj1),
                    AngularMomentum::from_twice(tj2),
                );
                let mut tm1 = -(tj1 as i32);
                while tm1 <= tj1 as i32 {
                    let mut tm2 = -(tj2 as i32);
                    while tm2 <= tj2 as i32 {
                        let tm = tm1 + tm2;
                        if tm.unsigned_abs() <= tj {
                            let s = clebsch_gordan(j, tm, j1, tm1, j2, tm2)?;
                            if !s.is_zero() {
                                let (numerator, denominator_square) = s.signed_square();
                                rows.push(CgRow {
                                    twice: [tj as i32, tm, tj1 as i32, tm1, tj2 as i32, tm2],
                                    numerator,
                                    denominator_square,
                                    value: s.to_f64(),
                                });
                            }
                        }
                        tm2 += 2;
                    }
                    tm1 += 2;
                }
                tj += 2;
            }
        }
    }
    Ok(rows)
}
