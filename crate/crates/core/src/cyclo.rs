//! Exact arithmetic in the ring of cyclotomic integers `Z[ζ_m]`.
//!
//! Elements are stored in the power basis `1, ζ, …, ζ^{φ(m)-1}` after
//! reduction modulo the m-th cyclotomic polynomial, so two values of the
//! same order are equal exactly when their coefficient vectors are equal.
//! This is what lets the torus module decide membership of root-of-unity
//! points in the orthogonality/unbiasedness sets without any tolerance.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycloError {
    #[error("cyclotomic order mismatch: {0} vs {1}")]
    OrderMismatch(u32, u32),
    #[error("cyclotomic order must be positive")]
    ZeroOrder,
    #[error("reduction coefficient for order {0} does not fit in a machine integer")]
    Overflow(u32),
}

/// Dense integer polynomial, `coeffs[i]` is the coefficient of `x^i`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || other.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }

    /// Division by a monic polynomial, returning `(quotient, remainder)`.
    ///
    /// Panics if `divisor` is zero or not monic.
    pub fn div_rem_monic(&self, divisor: &IntPolynomial) -> (IntPolynomial, IntPolynomial) {
        let dd = divisor.degree().expect("division by zero polynomial");
        assert!(divisor.coeffs[dd].is_one(), "divisor must be monic");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (IntPolynomial::zero(), IntPolynomial::new(rem));
        }
        let mut quot = vec![BigInt::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = std::mem::take(&mut rem[i]);
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs[..dd].iter().enumerate() {
                rem[i - dd + j] -= &c * dc;
            }
            quot[i - dd] = c;
        }
        rem.truncate(dd);
        (IntPolynomial::new(quot), IntPolynomial::new(rem))
    }

    /// Evaluates at `x` in floating point.
    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| {
                acc * x + c.to_f64().unwrap_or(f64::NAN)
            })
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{mag}x^{i}")?,
            }
        }
        Ok(())
    }
}

fn phi_cache() -> &'static RwLock<HashMap<u32, Arc<IntPolynomial>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<IntPolynomial>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The m-th cyclotomic polynomial `Φ_m`, cached per order.
///
/// Computed as `(x^m - 1) / Π_{d | m, d < m} Φ_d` by exact division.
pub fn cyclotomic_polynomial(m: u32) -> Result<Arc<IntPolynomial>, CycloError> {
    if m == 0 {
        return Err(CycloError::ZeroOrder);
    }
    if let Some(p) = phi_cache().read().expect("phi cache poisoned").get(&m) {
        return Ok(Arc::clone(p));
    }
    let mut num = vec![BigInt::zero(); m as usize + 1];
    num[0] = BigInt::from(-1);
    num[m as usize] = BigInt::one();
    let mut poly = IntPolynomial::new(num);
    for d in 1..m {
        if m.is_multiple_of(d) {
            let (q, r) = poly.div_rem_monic(&*cyclotomic_polynomial(d)?);
            debug_assert!(r.is_zero());
            poly = q;
        }
    }
    let mut cache = phi_cache().write().expect("phi cache poisoned");
    Ok(Arc::clone(cache.entry(m).or_insert_with(|| Arc::new(poly))))
}

/// Euler's totient.
pub fn totient(m: u32) -> u32 {
    let mut n = m;
    let mut out = m;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

/// An element of `Z[ζ_m]` in reduced power-basis coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CycloInt {
    order: u32,
    coeffs: Vec<BigInt>,
}

impl CycloInt {
    /// Reduces an arbitrary power-basis vector `Σ c_i ζ^i` modulo `Φ_m`.
    pub fn from_power_coeffs(order: u32, coeffs: Vec<BigInt>) -> Result<Self, CycloError> {
        let phi = cyclotomic_polynomial(order)?;
        let deg = phi.degree().unwrap_or(0);
        let (_, rem) = IntPolynomial::new(coeffs).div_rem_monic(&phi);
        let mut out = rem.coeffs;
        out.resize(deg, BigInt::zero());
        Ok(CycloInt { order, coeffs: out })
    }

    pub fn from_integer(order: u32, n: impl Into<BigInt>) -> Result<Self, CycloError> {
        Self::from_power_coeffs(order, vec![n.into()])
    }

    pub fn zero(order: u32) -> Result<Self, CycloError> {
        Self::from_integer(order, 0)
    }

    /// `ζ_m^a`, with `a` taken modulo `m`.
    pub fn from_exponent(order: u32, a: i64) -> Result<Self, CycloError> {
        if order == 0 {
            return Err(CycloError::ZeroOrder);
        }
        let e = a.rem_euclid(order as i64) as usize;
        let mut v = vec![BigInt::zero(); e + 1];
        v[e] = BigInt::one();
        Self::from_power_coeffs(order, v)
    }

    /// `Σ_j ζ_m^{a_j}`.
    pub fn root_sum(order: u32, exponents: &[i64]) -> Result<Self, CycloError> {
        if order == 0 {
            return Err(CycloError::ZeroOrder);
        }
        let mut v = vec![BigInt::zero(); order as usize];
        for &a in exponents {
            v[a.rem_euclid(order as i64) as usize] += 1;
        }
        Self::from_power_coeffs(order, v)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    fn check_order(&self, other: &CycloInt) -> Result<(), CycloError> {
        if self.order != other.order {
            return Err(CycloError::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &CycloInt) -> Result<CycloInt, CycloError> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycloInt { order: self.order, coeffs })
    }

    pub fn checked_sub(&self, other: &CycloInt) -> Result<CycloInt, CycloError> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CycloInt { order: self.order, coeffs })
    }

    pub fn checked_mul(&self, other: &CycloInt) -> Result<CycloInt, CycloError> {
        self.check_order(other)?;
        let prod = IntPolynomial::new(self.coeffs.clone())
            .mul(&IntPolynomial::new(other.coeffs.clone()));
        Self::from_power_coeffs(self.order, prod.coeffs)
    }

    /// Complex conjugation, `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> CycloInt {
        let m = self.order as usize;
        let mut v = vec![BigInt::zero(); m];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[(m - i) % m] += c;
        }
        Self::from_power_coeffs(self.order, v).expect("order already validated")
    }

    /// `x · conj(x)`, the squared modulus under every embedding.
    pub fn norm_sq(&self) -> CycloInt {
        self.checked_mul(&self.conj()).expect("same order")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Exact test `x == n`.
    pub fn equals_integer(&self, n: impl Into<BigInt>) -> bool {
        let n = n.into();
        match self.coeffs.split_first() {
            Some((c0, rest)) => *c0 == n && rest.iter().all(Zero::is_zero),
            None => n.is_zero(),
        }
    }

    /// Value under the embedding `ζ ↦ e^{2πi/m}`.
    pub fn to_complex(&self) -> Complex64 {
        let m = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let t = std::f64::consts::TAU * i as f64 / m;
                Complex64::new(t.cos(), t.sin()) * c.to_f64().unwrap_or(f64::NAN)
            })
            .sum()
    }
}

impl fmt::Display for CycloInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = IntPolynomial::new(self.coeffs.clone()).to_string();
        write!(f, "{}", s.replace('x', &format!("ζ{}", self.order)))
    }
}

/// Machine-integer image of the reduction map `ζ^k ↦ (ζ^k mod Φ_m)` for
/// `k` in `0..m`, used for high-volume exact norm computations.
#[derive(Debug, Clone)]
pub struct PowerTable {
    order: u32,
    phi: usize,
    rows: Vec<i64>,
}

impl PowerTable {
    /// Cached table for order `m`.
    pub fn get(order: u32) -> Result<Arc<PowerTable>, CycloError> {
        static CACHE: OnceLock<RwLock<HashMap<u32, Arc<PowerTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(t) = cache.read().expect("power table cache poisoned").get(&order) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(Self::build(order)?);
        let mut w = cache.write().expect("power table cache poisoned");
        Ok(Arc::clone(w.entry(order).or_insert(table)))
    }

    fn build(order: u32) -> Result<PowerTable, CycloError> {
        let phi = totient(order) as usize;
        let mut rows = Vec::with_capacity(order as usize * phi);
        for k in 0..order {
            let z = CycloInt::from_exponent(order, k as i64)?;
            for c in z.coeffs() {
                rows.push(c.to_i64().ok_or(CycloError::Overflow(order))?);
            }
        }
        Ok(PowerTable { order, phi, rows })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn phi(&self) -> usize {
        self.phi
    }

    pub fn row(&self, k: usize) -> &[i64] {
        &self.rows[k * self.phi..(k + 1) * self.phi]
    }

    /// Writes the reduced coordinates of `|Σ_j ζ^{e_j}|²` into `out`
    /// (length `phi`). Exponents must already lie in `0..m`.
    pub fn root_sum_norm_into(&self, exponents: &[u32], out: &mut [i64]) {
        out.fill(0);
        let m = self.order;
        for &a in exponents {
            for &b in exponents {
                let k = if a >= b { a - b } else { a + m - b };
                for (o, r) in out.iter_mut().zip(self.row(k as usize)) {
                    *o += r;
                }
            }
        }
    }
}

/// True iff the reduced coordinate vector represents the integer `n`.
pub fn coords_equal_integer(coords: &[i64], n: i64) -> bool {
    match coords.split_first() {
        Some((c0, rest)) => *c0 == n && rest.iter().all(|&c| c == 0),
        None => n == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta(m: u32, a: i64) -> CycloInt {
        CycloInt::from_exponent(m, a).unwrap()
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(*cyclotomic_polynomial(1).unwrap(), IntPolynomial::from_i64(&[-1, 1]));
        assert_eq!(*cyclotomic_polynomial(4).unwrap(), IntPolynomial::from_i64(&[1, 0, 1]));
        assert_eq!(
            *cyclotomic_polynomial(12).unwrap(),
            IntPolynomial::from_i64(&[1, 0, -1, 0, 1])
        );
        assert_eq!(cyclotomic_polynomial(12).unwrap().to_string(), "x^4 - x^2 + 1");
        assert!(cyclotomic_polynomial(0).is_err());
    }

    #[test]
    fn phi_12_by_independent_division() {
        // (x^12 - 1) / (Φ1 Φ2 Φ3 Φ4 Φ6) with the factors written out by hand.
        let factors = [
            IntPolynomial::from_i64(&[-1, 1]),
            IntPolynomial::from_i64(&[1, 1]),
            IntPolynomial::from_i64(&[1, 1, 1]),
            IntPolynomial::from_i64(&[1, 0, 1]),
            IntPolynomial::from_i64(&[1, -1, 1]),
        ];
        let prod = factors.iter().fold(IntPolynomial::from_i64(&[1]), |a, b| a.mul(b));
        let mut top = vec![0i64; 13];
        top[0] = -1;
        top[12] = 1;
        let (q, r) = IntPolynomial::from_i64(&top).div_rem_monic(&prod);
        assert!(r.is_zero());
        assert_eq!(q, IntPolynomial::from_i64(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn degree_is_totient() {
        for m in 1..=128 {
            let p = cyclotomic_polynomial(m).unwrap();
            assert_eq!(p.degree(), Some(totient(m) as usize), "m={m}");
            assert!(p.leading().unwrap().is_one());
        }
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(zeta(4, 2).coeffs(), &[BigInt::from(-1), BigInt::zero()]);
        assert!(zeta(3, 0).equals_integer(1));
        assert_eq!(zeta(3, 2).coeffs(), &[BigInt::from(-1), BigInt::from(-1)]);
        assert_eq!(zeta(5, -1), zeta(5, 4));
    }

    #[test]
    fn ring_examples() {
        assert!(zeta(4, 1).checked_mul(&zeta(4, 1)).unwrap().equals_integer(-1));
        assert_eq!(zeta(3, 1).conj(), zeta(3, 2));
        assert!(zeta(3, 1).checked_add(&zeta(3, 2)).unwrap().equals_integer(-1));
        assert!(!zeta(4, 1).equals_integer(0));
        let full = CycloInt::root_sum(5, &[0, 1, 2, 3, 4]).unwrap();
        assert!(full.equals_integer(0));
        assert_eq!(
            zeta(4, 1).checked_add(&zeta(3, 1)),
            Err(CycloError::OrderMismatch(4, 3))
        );
    }

    #[test]
    fn inverse_powers_multiply_to_one() {
        for m in 1..=64u32 {
            for a in 0..m as i64 {
                let p = zeta(m, a).checked_mul(&zeta(m, m as i64 - a)).unwrap();
                assert!(p.equals_integer(1), "m={m} a={a}");
            }
        }
    }

    #[test]
    fn full_root_sum_vanishes() {
        for m in 2..=64u32 {
            let all: Vec<i64> = (0..m as i64).collect();
            assert!(CycloInt::root_sum(m, &all).unwrap().is_zero(), "m={m}");
        }
    }

    #[test]
    fn power_table_matches_bigint_norm() {
        let t = PowerTable::get(12).unwrap();
        let exps = [0u32, 3, 3, 7, 11];
        let mut out = vec![0; t.phi()];
        t.root_sum_norm_into(&exps, &mut out);
        let e64: Vec<i64> = exps.iter().map(|&e| e as i64).collect();
        let n = CycloInt::root_sum(12, &e64).unwrap().norm_sq();
        let want: Vec<i64> = n.coeffs().iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(out, want);
    }

    #[test]
    fn order_one_ring_is_the_integers() {
        let x = CycloInt::root_sum(1, &[0, 5, 7]).unwrap();
        assert!(x.equals_integer(3));
        assert!(x.norm_sq().equals_integer(9));
    }

    use proptest::prelude::*;

    fn arb_elem(m: u32) -> impl Strategy<Value = CycloInt> {
        prop::collection::vec(-4i64..=4, m as usize)
            .prop_map(move |c| CycloInt::from_power_coeffs(m, c.into_iter().map(BigInt::from).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn conjugation_is_a_ring_automorphism(
            (a, b) in (1u32..=40).prop_flat_map(|m| (arb_elem(m), arb_elem(m)))
        ) {
            let ab = a.checked_mul(&b).unwrap();
            prop_assert_eq!(ab.conj(), a.conj().checked_mul(&b.conj()).unwrap());
            prop_assert_eq!(a.checked_add(&b).unwrap().conj(), a.conj().checked_add(&b.conj()).unwrap());
            prop_assert_eq!(a.conj().conj(), a.clone());
            prop_assert_eq!(ab.norm_sq(), a.norm_sq().checked_mul(&b.norm_sq()).unwrap());
        }
    }
}
