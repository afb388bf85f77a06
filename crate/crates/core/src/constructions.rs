//! Known objects: Fourier matrices, complete MUB families in prime and
//! prime-power dimension, Sidon sets modulo `d²`, and the Fourier row
//! systems they induce.
//!
//! Every family is checked with [`MubFamily::verify`] before it is returned.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclo::IntPolynomial;
use crate::hadamard::{ComplexMatrix, HadamardError, HadamardMatrix, MubFamily, DEFAULT_EPS};

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("dimension {0} is outside the supported range (at most 64)")]
    TooLarge(u64),
    #[error("modulus is not an irreducible monic polynomial of degree {0}")]
    Reducible(u32),
    #[error("constructed family failed verification: {0}")]
    Verification(String),
    #[error("search budget of {0} nodes exhausted")]
    BudgetExceeded(u64),
    #[error("row system needs modulus d² = {expected}, found {found}")]
    SidonModulus { expected: u32, found: u32 },
    #[error(transparent)]
    Hadamard(#[from] HadamardError),
}

pub fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|i| i * i <= n).all(|i| !n.is_multiple_of(i))
}

/// `(p, k)` with `n = p^k`, if `n` is a prime power.
pub fn prime_power_decomposition(n: u32) -> Option<(u32, u32)> {
    if n < 2 {
        return None;
    }
    let p = (2..=n).find(|p| n.is_multiple_of(*p))?;
    let mut k = 0;
    let mut r = n;
    while r.is_multiple_of(p) {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

/// `e^{2πi a/m}`, exact at multiples of a quarter turn.
pub fn unit_root(m: u64, a: i64) -> Complex64 {
    let a = a.rem_euclid(m as i64) as u64;
    if (4 * a).is_multiple_of(m) {
        return match 4 * a / m {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, TAU * a as f64 / m as f64)
}

/// `F_n` with entries `e^{2πi jk/n}` (unnormalized).
pub fn fourier_matrix(n: usize) -> HadamardMatrix {
    let m = ComplexMatrix::from_fn(n, n, |j, k| unit_root(n as u64, ((j * k) % n.max(1)) as i64));
    HadamardMatrix::new(m, DEFAULT_EPS).expect("Fourier matrices are Hadamard")
}

// Polynomials over F_p as coefficient vectors, lowest degree first.
fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // p is prime; Fermat.
    pow_mod(a, p - 2, p)
}

fn pow_mod(a: u32, mut e: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn poly_rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    let mut r = trim(a.to_vec());
    let df = f.len() - 1;
    let lead_inv = inv_mod(f[df], p);
    while r.len() > df {
        let top = r.len() - 1;
        let c = (r[top] as u64 * lead_inv as u64 % p as u64) as u32;
        for (j, &fc) in f.iter().enumerate() {
            let idx = top - df + j;
            r[idx] = ((r[idx] as u64 + (p - c) as u64 * fc as u64) % p as u64) as u32;
        }
        r = trim(r);
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Irreducibility of a monic `f` over `F_p`: no roots, and
/// `gcd(x^{p^i} - x, f) = 1` for `1 <= i <= deg/2`.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let k = f.len() - 1;
    if k == 0 {
        return false;
    }
    if k == 1 {
        return true;
    }
    let has_root = (0..p).any(|x| {
        f.iter().rev().fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % p as u64) == 0
    });
    if has_root {
        return false;
    }
    let mut xp = vec![0, 1]; // x^{p^i} mod f
    for _ in 1..=k / 2 {
        let mut acc = vec![1];
        let mut base = xp.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_rem(&poly_mul(&acc, &base, p), f, p);
            }
            base = poly_rem(&poly_mul(&base, &base, p), f, p);
            e >>= 1;
        }
        xp = acc;
        let mut g = xp.clone();
        g.resize(g.len().max(2), 0);
        g[1] = (g[1] + p - 1) % p;
        if poly_gcd(f, &g, p).len() != 1 {
            return false;
        }
    }
    true
}

/// `F_{p^k}` with elements encoded as integers whose base-`p` digits are the
/// coefficients of `1, x, …, x^{k-1}`.
#[derive(Clone, Debug)]
pub struct GaloisField {
    p: u32,
    k: u32,
    modulus: Vec<u32>,
    mul: Vec<u32>,
    trace: Vec<u32>,
}

impl GaloisField {
    /// Uses the least monic irreducible of degree `k`, ordering candidates by
    /// their coefficient vectors read from `x^{k-1}` down to the constant.
    pub fn new(p: u32, k: u32) -> Result<Self, ConstructionError> {
        if !is_prime(p) {
            return Err(ConstructionError::NotPrime(p));
        }
        if k == 0 {
            return Err(ConstructionError::ZeroDegree);
        }
        let q = (p as u64).checked_pow(k).unwrap_or(u64::MAX);
        if q > 1 << 12 {
            return Err(ConstructionError::TooLarge(q));
        }
        for idx in 0..q {
            let mut f: Vec<u32> = digits(idx as u32, p, k);
            f.push(1);
            if is_irreducible(&f, p) {
                return Self::with_modulus(p, &f);
            }
        }
        Err(ConstructionError::Reducible(k))
    }

    /// `modulus` lists coefficients from the constant term up and must be monic.
    pub fn with_modulus(p: u32, modulus: &[u32]) -> Result<Self, ConstructionError> {
        if !is_prime(p) {
            return Err(ConstructionError::NotPrime(p));
        }
        let k = modulus.len().saturating_sub(1) as u32;
        if k == 0 || modulus.last() != Some(&1) || modulus.iter().any(|&c| c >= p) || !is_irreducible(modulus, p) {
            return Err(ConstructionError::Reducible(k));
        }
        let q = p.pow(k);
        let mut field = GaloisField { p, k, modulus: modulus.to_vec(), mul: vec![0; (q * q) as usize], trace: vec![0; q as usize] };
        for a in 0..q {
            for b in 0..q {
                let prod = poly_rem(&poly_mul(&digits(a, p, k), &digits(b, p, k), p), modulus, p);
                field.mul[(a * q + b) as usize] = undigits(&prod, p);
            }
        }
        for a in 0..q {
            let mut t = 0;
            let mut y = a;
            for _ in 0..k {
                t = field.add(t, y);
                y = field.pow(y, p as u64);
            }
            debug_assert!(t < p, "trace must land in the prime field");
            field.trace[a as usize] = t;
        }
        Ok(field)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.p.pow(self.k)
    }

    pub fn modulus(&self) -> IntPolynomial {
        IntPolynomial::new(self.modulus.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let (p, k) = (self.p, self.k);
        let s: Vec<u32> = digits(a, p, k).iter().zip(digits(b, p, k)).map(|(x, y)| (x + y) % p).collect();
        undigits(&s, p)
    }

    pub fn neg(&self, a: u32) -> u32 {
        let p = self.p;
        undigits(&digits(a, p, self.k).iter().map(|x| (p - x) % p).collect::<Vec<_>>(), p)
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[(a * self.order() + b) as usize]
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut r = 1;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    /// Absolute trace `a + a^p + … + a^{p^{k-1}}`, an element of `F_p`.
    pub fn trace(&self, a: u32) -> u32 {
        self.trace[a as usize]
    }

    /// Element `x^i` of the polynomial basis.
    pub fn basis(&self, i: u32) -> u32 {
        self.p.pow(i)
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let mut x = a;
        let mut n = 1;
        while x != 1 {
            x = self.mul(x, a);
            n += 1;
        }
        Some(n)
    }
}

fn digits(mut a: u32, p: u32, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = a % p;
            a /= p;
            d
        })
        .collect()
}

fn undigits(v: &[u32], p: u32) -> u32 {
    v.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn finish_family(d: usize, mats: Vec<ComplexMatrix>) -> Result<MubFamily, ConstructionError> {
    let hadamards = mats
        .into_iter()
        .map(|m| HadamardMatrix::new(m, DEFAULT_EPS))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ConstructionError::Verification(e.to_string()))?;
    let family = MubFamily::new(d, hadamards)?;
    let report = family.verify(DEFAULT_EPS)?;
    if !report.passes || report.bases > d + 1 {
        return Err(ConstructionError::Verification(format!(
            "max violation {:e} over {} bases",
            report.max_violation(),
            report.bases
        )));
    }
    Ok(family)
}

/// `p` quadratic-phase Hadamards: entry `(l, j)` of `H'_k` is
/// `ω^{k l² + j l}`; for `p = 2` the quartic `i^{k l² + 2 j l}`.
pub fn prime_mubs(p: u32) -> Result<MubFamily, ConstructionError> {
    if !is_prime(p) {
        return Err(ConstructionError::NotPrime(p));
    }
    if p > 64 {
        return Err(ConstructionError::TooLarge(p as u64));
    }
    let n = p as usize;
    let mats = (0..n)
        .map(|k| {
            ComplexMatrix::from_fn(n, n, |l, j| {
                if p == 2 {
                    unit_root(4, (k * l * l + 2 * j * l) as i64)
                } else {
                    unit_root(p as u64, ((k * l * l + j * l) % n) as i64)
                }
            })
        })
        .collect();
    finish_family(n, mats)
}

/// `p^k` Hadamards over `F_{p^k}`, rows indexed by `x`, columns by `b`.
///
/// Odd `p`: basis `a` has entries `ω_p^{tr(a x² + b x)}`. For `p = 2` the
/// quadratic part becomes the Z4-valued form `Q_a(x) = x^T S_a x` with
/// `S_a[i][j] = tr(a β_i β_j)` over the polynomial basis, and the entries
/// are `i^{Q_a(x)} (-1)^{tr(b x)}`.
pub fn prime_power_mubs(p: u32, k: u32) -> Result<MubFamily, ConstructionError> {
    if !is_prime(p) {
        return Err(ConstructionError::NotPrime(p));
    }
    if k == 0 {
        return Err(ConstructionError::ZeroDegree);
    }
    let q = (p as u64).checked_pow(k).unwrap_or(u64::MAX);
    if q > 64 {
        return Err(ConstructionError::TooLarge(q));
    }
    let field = GaloisField::new(p, k)?;
    let q = q as u32;
    let n = q as usize;
    let mats = (0..q)
        .map(|a| {
            if p == 2 {
                let s: Vec<Vec<u32>> = (0..k)
                    .map(|i| (0..k).map(|j| field.trace(field.mul(a, field.mul(field.basis(i), field.basis(j))))).collect())
                    .collect();
                ComplexMatrix::from_fn(n, n, |x, b| {
                    let bits: Vec<u32> = (0..k).map(|i| (x as u32 >> i) & 1).collect();
                    let mut quad = 0;
                    for i in 0..k as usize {
                        quad += s[i][i] * bits[i];
                        for j in i + 1..k as usize {
                            quad += 2 * s[i][j] * bits[i] * bits[j];
                        }
                    }
                    let lin = field.trace(field.mul(b as u32, x as u32));
                    unit_root(4, (quad + 2 * lin) as i64)
                })
            } else {
                ComplexMatrix::from_fn(n, n, |x, b| {
                    let (x, b) = (x as u32, b as u32);
                    let arg = field.add(field.mul(a, field.mul(x, x)), field.mul(b, x));
                    unit_root(p as u64, field.trace(arg) as i64)
                })
            }
        })
        .collect();
    finish_family(n, mats)
}

/// Residues modulo `n` whose nonzero ordered differences are all distinct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidonSet {
    #[serde(rename = "n")]
    pub modulus: u32,
    pub elements: Vec<u32>,
}

impl SidonSet {
    /// Reduces and sorts the elements.
    pub fn new(modulus: u32, elements: &[i64]) -> Self {
        let mut e: Vec<u32> = elements.iter().map(|&a| a.rem_euclid(modulus.max(1) as i64) as u32).collect();
        e.sort_unstable();
        SidonSet { modulus, elements: e }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// All `d(d-1)` ordered differences are nonzero and pairwise distinct mod `n`.
pub fn sidon_verify(s: &SidonSet) -> bool {
    let n = s.modulus.max(1) as usize;
    let mut seen = vec![false; n];
    for (i, &a) in s.elements.iter().enumerate() {
        for (j, &b) in s.elements.iter().enumerate() {
            if i == j {
                continue;
            }
            let diff = (a as usize + n - b as usize % n) % n;
            if diff == 0 || seen[diff] {
                return false;
            }
            seen[diff] = true;
        }
    }
    true
}

/// Lexicographically least `d`-element Sidon set modulo `d²`, found by
/// depth-first search over increasing residues starting at 0.
///
/// `Ok(None)` means the search space was exhausted; running out of the
/// node budget first is an error.
pub fn sidon_search(d: u32, budget: u64) -> Result<Option<SidonSet>, ConstructionError> {
    if d == 0 {
        return Ok(Some(SidonSet { modulus: 0, elements: Vec::new() }));
    }
    let n = d * d;
    let mut search = SidonSearch { n, d: d as usize, used: vec![false; n as usize], chosen: vec![0], nodes: 0, budget };
    if search.extend()? {
        Ok(Some(SidonSet { modulus: n, elements: search.chosen }))
    } else {
        Ok(None)
    }
}

struct SidonSearch {
    n: u32,
    d: usize,
    used: Vec<bool>,
    chosen: Vec<u32>,
    nodes: u64,
    budget: u64,
}

impl SidonSearch {
    fn extend(&mut self) -> Result<bool, ConstructionError> {
        if self.chosen.len() == self.d {
            return Ok(true);
        }
        let last = *self.chosen.last().expect("starts with 0");
        let remaining = (self.d - self.chosen.len()) as u32;
        let mut fresh = Vec::with_capacity(2 * self.d);
        for x in last + 1..self.n {
            if self.n - x < remaining {
                break;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(ConstructionError::BudgetExceeded(self.budget));
            }
            fresh.clear();
            let ok = self.chosen.iter().all(|&a| {
                let up = (x - a) % self.n;
                let down = (self.n - up) % self.n;
                let good = up != down && !self.used[up as usize] && !self.used[down as usize] && !fresh.contains(&up) && !fresh.contains(&down);
                fresh.push(up);
                fresh.push(down);
                good
            });
            if !ok {
                continue;
            }
            for &f in &fresh {
                self.used[f as usize] = true;
            }
            self.chosen.push(x);
            if self.extend()? {
                return Ok(true);
            }
            self.chosen.pop();
            for &f in &fresh {
                self.used[f as usize] = false;
            }
        }
        Ok(false)
    }
}

/// Rows `S[t]` of `F_{d²}` stacked into a `d × d²` matrix.
pub fn sidon_row_system(s: &SidonSet) -> Result<ComplexMatrix, ConstructionError> {
    let d = s.elements.len() as u32;
    if s.modulus != d * d {
        return Err(ConstructionError::SidonModulus { expected: d * d, found: s.modulus });
    }
    let n = s.modulus as u64;
    Ok(ComplexMatrix::from_fn(d as usize, n as usize, |t, c| {
        unit_root(n, (s.elements[t] as u64 * c as u64 % n.max(1)) as i64)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::{family_to_points, is_hadamard, row_quotient_check};
    use crate::torus::{self, PointClass};

    #[test]
    fn fourier_examples() {
        assert_eq!(fourier_matrix(1).matrix().data(), &[Complex64::new(1.0, 0.0)]);
        let f2 = fourier_matrix(2);
        let want = [1.0, 1.0, 1.0, -1.0].map(|r| Complex64::new(r, 0.0));
        assert_eq!(f2.matrix().data(), &want);
        assert_eq!(fourier_matrix(4).matrix().get(2, 3), Complex64::new(-1.0, 0.0));
        for n in 1..=36 {
            assert!(is_hadamard(fourier_matrix(n).matrix(), DEFAULT_EPS).unwrap().is_hadamard);
        }
    }

    #[test]
    fn primes_and_prime_powers() {
        assert!(is_prime(2) && is_prime(61) && !is_prime(1) && !is_prime(9));
        assert_eq!(prime_power_decomposition(64), Some((2, 6)));
        assert_eq!(prime_power_decomposition(49), Some((7, 2)));
        assert_eq!(prime_power_decomposition(6), None);
    }

    #[test]
    fn galois_fields() {
        let f4 = GaloisField::new(2, 2).unwrap();
        assert_eq!(f4.modulus(), IntPolynomial::from_i64(&[1, 1, 1]));
        assert_eq!(GaloisField::new(2, 3).unwrap().modulus(), IntPolynomial::from_i64(&[1, 1, 0, 1]));
        assert_eq!(GaloisField::new(3, 2).unwrap().modulus(), IntPolynomial::from_i64(&[1, 0, 1]));
        assert_eq!(GaloisField::new(5, 1).unwrap().modulus(), IntPolynomial::from_i64(&[0, 1]));
        assert!(GaloisField::with_modulus(2, &[1, 0, 1]).is_err()); // x^2 + 1 = (x + 1)^2
        assert!(GaloisField::with_modulus(3, &[2, 0, 0, 0, 1]).is_err()); // x^4 + 2 = (x^2+x+2)(x^2+2x+2)
        assert!(GaloisField::new(4, 1).is_err());
        for (p, k) in [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (2, 6), (3, 1), (3, 2), (3, 3), (5, 2), (7, 2)] {
            let f = GaloisField::new(p, k).unwrap();
            let q = f.order();
            for a in 1..q {
                let ord = f.multiplicative_order(a).unwrap();
                assert_eq!((q - 1) % ord, 0);
                assert_eq!(f.pow(a, (q - 1) as u64), 1);
            }
            for a in 0..q {
                assert_eq!(f.add(a, f.neg(a)), 0);
                assert!(f.trace(a) < p);
            }
            // Trace is onto F_p and balanced.
            let zeros = (0..q).filter(|&a| f.trace(a) == 0).count() as u32;
            assert_eq!(zeros, q / p);
        }
    }

    #[test]
    fn prime_families() {
        for p in [2u32, 3, 5, 7, 11, 13] {
            let fam = prime_mubs(p).unwrap();
            assert_eq!(fam.bases(), p as usize + 1);
            assert!(fam.verify(DEFAULT_EPS).unwrap().passes);
        }
        assert!(matches!(prime_mubs(6), Err(ConstructionError::NotPrime(6))));
    }

    #[test]
    fn prime_power_families() {
        for (p, k) in [(2, 1), (2, 2), (2, 3), (3, 2), (2, 4), (5, 2), (7, 2), (2, 5), (3, 3), (2, 6)] {
            let fam = prime_power_mubs(p, k).unwrap();
            let d = p.pow(k) as usize;
            assert_eq!(fam.bases(), d + 1);
            let r = fam.verify(DEFAULT_EPS).unwrap();
            assert!(r.passes && r.max_violation() < 1e-9, "({p},{k}): {r:?}");
        }
        assert!(matches!(prime_power_mubs(3, 4), Err(ConstructionError::TooLarge(81))));
        assert!(matches!(prime_power_mubs(4, 2), Err(ConstructionError::NotPrime(4))));
    }

    #[test]
    fn degree_one_matches_prime_family_size() {
        for p in [2u32, 3, 5, 7] {
            let a = prime_mubs(p).unwrap();
            let b = prime_power_mubs(p, 1).unwrap();
            assert_eq!(a.bases(), b.bases());
            assert!(b.verify(DEFAULT_EPS).unwrap().passes);
        }
    }

    #[test]
    fn constructed_family_points_have_allowed_differences() {
        for d in [2usize, 3, 4, 5, 7, 8, 9] {
            let (p, k) = prime_power_decomposition(d as u32).unwrap();
            let fam = prime_power_mubs(p, k).unwrap();
            let m = if p == 2 { 4 } else { p };
            let pts = family_to_points(&fam, Some(m), DEFAULT_EPS).unwrap();
            assert_eq!(pts.len(), d * d);
            assert!(pts.iter().all(|q| matches!(q, torus::TorusPoint::Exact { .. })));
            let classes: Vec<PointClass> = pts[1..]
                .iter()
                .map(|q| torus::classify(&torus::difference(q, &pts[0]).unwrap(), d).unwrap())
                .collect();
            assert!(classes.iter().all(|c| c.is_allowed()));
        }
    }

    #[test]
    fn sidon_examples() {
        assert!(sidon_verify(&SidonSet::new(36, &[0, 1, 3, 8, 23, 27])));
        assert!(!sidon_verify(&SidonSet::new(9, &[0, 1, 2])));
        assert!(sidon_verify(&SidonSet::new(1, &[0])));
        // Difference n/2 equals its own negative.
        assert!(!sidon_verify(&SidonSet::new(4, &[0, 2])));
        assert_eq!(sidon_search(2, 1000).unwrap(), Some(SidonSet::new(4, &[0, 1])));
        assert_eq!(sidon_search(1, 1000).unwrap(), Some(SidonSet::new(1, &[0])));
        let s6 = sidon_search(6, 1_000_000).unwrap().unwrap();
        assert!(sidon_verify(&s6));
        assert_eq!(s6.len(), 6);
        assert!(matches!(sidon_search(8, 3), Err(ConstructionError::BudgetExceeded(3))));
    }

    #[test]
    fn sidon_d3_is_lexicographically_least_by_brute_force() {
        let mut best = None;
        'outer: for a in 0..9 {
            for b in a + 1..9 {
                for c in b + 1..9 {
                    if sidon_verify(&SidonSet::new(9, &[a, b, c])) {
                        best = Some(vec![a as u32, b as u32, c as u32]);
                        break 'outer;
                    }
                }
            }
        }
        assert_eq!(best, Some(vec![0, 1, 3]));
        assert_eq!(sidon_search(3, 1000).unwrap().unwrap().elements, vec![0, 1, 3]);
    }

    #[test]
    fn sidon_search_matches_brute_force_for_small_d() {
        for d in 2..=5u32 {
            let n = d * d;
            let found = sidon_search(d, 10_000_000).unwrap().unwrap();
            // Brute force over all d-subsets containing 0, in lexicographic order.
            let mut subset: Vec<u32> = (0..d).collect();
            let want = loop {
                let s = SidonSet { modulus: n, elements: subset.clone() };
                if sidon_verify(&s) {
                    break s;
                }
                let mut i = d as usize - 1;
                while subset[i] == n - d + i as u32 {
                    i -= 1;
                }
                assert!(i > 0, "no Sidon set for d={d}");
                subset[i] += 1;
                for j in i + 1..d as usize {
                    subset[j] = subset[j - 1] + 1;
                }
            };
            assert_eq!(found, want);
        }
    }

    #[test]
    fn sidon_row_systems() {
        let r = row_quotient_check(&sidon_row_system(&SidonSet::new(36, &[0, 1, 3, 8, 23, 27])).unwrap(), DEFAULT_EPS).unwrap();
        assert!(r.passes && r.max_inner.0 < 1e-9, "{r:?}");
        let r = row_quotient_check(&sidon_row_system(&SidonSet::new(4, &[0, 1])).unwrap(), DEFAULT_EPS).unwrap();
        assert!(r.passes);
        let r = row_quotient_check(&sidon_row_system(&SidonSet::new(36, &[0, 1, 2, 3, 4, 5])).unwrap(), DEFAULT_EPS).unwrap();
        assert!(!r.passes);
        assert!(matches!(
            sidon_row_system(&SidonSet::new(35, &[0, 1, 3, 8, 23, 27])),
            Err(ConstructionError::SidonModulus { expected: 36, found: 35 })
        ));
    }

    #[test]
    fn every_searched_sidon_set_gives_orthogonal_quotients() {
        for d in 1..=8u32 {
            let s = sidon_search(d, 50_000_000).unwrap().unwrap();
            assert!(sidon_verify(&s));
            let r = row_quotient_check(&sidon_row_system(&s).unwrap(), DEFAULT_EPS).unwrap();
            assert!(r.passes, "d={d}: {r:?}");
        }
    }
}
