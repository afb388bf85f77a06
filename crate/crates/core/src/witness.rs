//! Witness functions on the torus and the Delsarte bound.
//!
//! A witness `h` is an even trigonometric polynomial with nonnegative
//! Fourier coefficients, `ĥ(0) > 0`, and `h <= 0` on the allowed set. For any
//! point set whose nonzero differences are all allowed, `|B| <= h(0)/ĥ(0)`.
//! The canonical witness is
//!
//! ```text
//! h(x) = |S|² (|S|² - d) / ((d-1) d),   S = 1 + Σ_j e^{2πi x_j}
//! ```
//!
//! which vanishes on the orthogonality and unbiasedness sets and has
//! `h(0) = d²`, `ĥ(0) = 1`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::unit_root;
use crate::numfmt::Num17;
use crate::torus::{self, TorusError, TorusPoint};

pub const DEFAULT_EPS: f64 = 1e-9;

/// Dimensions for which [`expand_h`] is supported.
pub const EXPAND_RANGE: std::ops::RangeInclusive<usize> = 2..=12;

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("dimension {0} is outside the supported range")]
    DimensionOutOfRange(usize),
    #[error("dimension mismatch: polynomial has {expected} variables, point has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("incompatible point for a grid-{m} polynomial: {point}")]
    IncompatiblePoint { m: u32, point: TorusPoint },
    #[error("value has imaginary part {0:e} but the polynomial is even")]
    ComplexValue(f64),
    #[error("spectral sum {spectral} and spatial sum {spatial} disagree")]
    InversionMismatch { spectral: f64, spatial: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A character `γ`: integers on the continuous torus, residues on a grid.
pub type ExponentVector = Vec<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Characters of `T^{d-1}`, exact rational coefficients.
    Continuous,
    /// Characters of `Z_m^{d-1}`, floating coefficients.
    Grid(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Terms {
    Exact(BTreeMap<ExponentVector, BigRational>),
    Real(BTreeMap<ExponentVector, f64>),
}

/// Finitely supported map from characters to coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    dim: usize,
    mode: Mode,
    terms: Terms,
    floats: Vec<(ExponentVector, f64)>,
}

fn neg(g: &[i64], mode: Mode) -> ExponentVector {
    match mode {
        Mode::Continuous => g.iter().map(|x| -x).collect(),
        Mode::Grid(m) => g.iter().map(|x| (-x).rem_euclid(m as i64)).collect(),
    }
}

impl TrigPolynomial {
    /// Continuous-mode polynomial; zero coefficients are dropped.
    pub fn continuous(dim: usize, terms: impl IntoIterator<Item = (ExponentVector, BigRational)>) -> Result<Self, WitnessError> {
        let mut map = BTreeMap::new();
        for (g, c) in terms {
            if g.len() != dim {
                return Err(WitnessError::DimensionMismatch { expected: dim, found: g.len() });
            }
            *map.entry(g).or_insert_with(BigRational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        let floats = map.iter().map(|(g, c)| (g.clone(), c.to_f64().unwrap_or(f64::NAN))).collect();
        Ok(TrigPolynomial { dim, mode: Mode::Continuous, terms: Terms::Exact(map), floats })
    }

    /// Grid-mode polynomial; exponents are reduced mod `m` and merged.
    pub fn grid(dim: usize, m: u32, terms: impl IntoIterator<Item = (ExponentVector, f64)>) -> Result<Self, WitnessError> {
        if m == 0 {
            return Err(TorusError::ZeroGridOrder.into());
        }
        let mut map = BTreeMap::new();
        for (g, c) in terms {
            if g.len() != dim {
                return Err(WitnessError::DimensionMismatch { expected: dim, found: g.len() });
            }
            let g: ExponentVector = g.iter().map(|x| x.rem_euclid(m as i64)).collect();
            *map.entry(g).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        let floats = map.iter().map(|(g, c)| (g.clone(), *c)).collect();
        Ok(TrigPolynomial { dim, mode: Mode::Grid(m), terms: Terms::Real(map), floats })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn terms(&self) -> &Terms {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.floats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.floats.is_empty()
    }

    /// `(γ, coefficient)` pairs as floats, in character order.
    pub fn float_terms(&self) -> &[(ExponentVector, f64)] {
        &self.floats
    }

    pub fn exact_coeff(&self, g: &[i64]) -> Option<BigRational> {
        match &self.terms {
            Terms::Exact(m) => Some(m.get(g).cloned().unwrap_or_else(BigRational::zero)),
            Terms::Real(_) => None,
        }
    }

    pub fn coeff(&self, g: &[i64]) -> f64 {
        let key: ExponentVector = match self.mode {
            Mode::Continuous => g.to_vec(),
            Mode::Grid(m) => g.iter().map(|x| x.rem_euclid(m as i64)).collect(),
        };
        match &self.terms {
            Terms::Exact(map) => map.get(&key).and_then(|c| c.to_f64()).unwrap_or(0.0),
            Terms::Real(map) => map.get(&key).copied().unwrap_or(0.0),
        }
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&vec![0; self.dim])
    }

    /// True iff `term(γ) = term(-γ)` for every stored `γ`.
    pub fn is_even(&self) -> bool {
        match &self.terms {
            Terms::Exact(map) => map.iter().all(|(g, c)| map.get(&neg(g, self.mode)) == Some(c)),
            Terms::Real(map) => map.iter().all(|(g, c)| map.get(&neg(g, self.mode)) == Some(c)),
        }
    }

    /// Smallest stored coefficient (0 for the empty polynomial).
    pub fn min_coeff(&self) -> f64 {
        self.floats.iter().map(|(_, c)| *c).fold(0.0, f64::min)
    }

    /// Exact sum of coefficients, i.e. the value at the zero point.
    pub fn exact_value_at_zero(&self) -> Option<BigRational> {
        match &self.terms {
            Terms::Exact(map) => Some(map.values().fold(BigRational::zero(), |a, c| a + c)),
            Terms::Real(_) => None,
        }
    }

    pub fn value_at_zero(&self) -> f64 {
        match self.exact_value_at_zero() {
            Some(v) => v.to_f64().unwrap_or(f64::NAN),
            None => self.floats.iter().map(|(_, c)| c).sum(),
        }
    }

    /// `⟨γ, p⟩` as an exact fraction `(numerator, denominator)` when possible.
    fn phase_ratio(&self, g: &[i64], p: &TorusPoint) -> Result<Option<(i64, u64)>, WitnessError> {
        match (self.mode, p) {
            (Mode::Grid(m), TorusPoint::Exact { m: pm, num }) => {
                if m % pm != 0 {
                    return Err(WitnessError::IncompatiblePoint { m, point: p.clone() });
                }
                let f = (m / pm) as i64;
                let s = g.iter().zip(num).fold(0i64, |acc, (x, &a)| (acc + x * a as i64 * f).rem_euclid(m as i64));
                Ok(Some((s, m as u64)))
            }
            (Mode::Grid(m), TorusPoint::Float(_)) => Err(WitnessError::IncompatiblePoint { m, point: p.clone() }),
            (Mode::Continuous, TorusPoint::Exact { m, num }) => {
                let s = g.iter().zip(num).fold(0i64, |acc, (x, &a)| (acc + x * a as i64).rem_euclid(*m as i64));
                Ok(Some((s, *m as u64)))
            }
            (Mode::Continuous, TorusPoint::Float(_)) => Ok(None),
        }
    }

    fn character(&self, g: &[i64], p: &TorusPoint) -> Result<Complex64, WitnessError> {
        Ok(match self.phase_ratio(g, p)? {
            Some((a, m)) => unit_root(m, a),
            None => {
                let t: f64 = g.iter().zip(p.coords()).map(|(x, y)| *x as f64 * y).sum();
                Complex64::from_polar(1.0, std::f64::consts::TAU * t)
            }
        })
    }

    /// `Σ_γ term(γ) e^{2πi⟨γ, p⟩}`.
    pub fn eval(&self, p: &TorusPoint) -> Result<Complex64, WitnessError> {
        if p.dim() != self.dim {
            return Err(WitnessError::DimensionMismatch { expected: self.dim, found: p.dim() });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (g, c) in &self.floats {
            acc += self.character(g, p)? * *c;
        }
        Ok(acc)
    }

    /// Real value of an even polynomial; fails if the imaginary part
    /// exceeds `eps` relative to the coefficient mass.
    pub fn eval_real(&self, p: &TorusPoint, eps: f64) -> Result<f64, WitnessError> {
        let z = self.eval(p)?;
        let scale = self.floats.iter().map(|(_, c)| c.abs()).sum::<f64>().max(1.0);
        if z.im.abs() > eps * scale {
            return Err(WitnessError::ComplexValue(z.im));
        }
        Ok(z.re)
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> TrigPolynomial {
        match (&self.terms, self.mode) {
            (Terms::Real(map), Mode::Grid(m)) => {
                TrigPolynomial::grid(self.dim, m, map.iter().map(|(g, c)| (g.clone(), c * s))).expect("same shape")
            }
            _ => {
                let r = BigRational::from_float(s).expect("finite scale");
                match &self.terms {
                    Terms::Exact(map) => {
                        TrigPolynomial::continuous(self.dim, map.iter().map(|(g, c)| (g.clone(), c * &r))).expect("same shape")
                    }
                    Terms::Real(_) => unreachable!("real terms only occur in grid mode"),
                }
            }
        }
    }
}

/// `free function` form of [`TrigPolynomial::eval`].
pub fn eval_trig(t: &TrigPolynomial, p: &TorusPoint) -> Result<Complex64, WitnessError> {
    t.eval(p)
}

fn check_d(d: usize) -> Result<(), WitnessError> {
    if d < 2 {
        return Err(WitnessError::DimensionOutOfRange(d));
    }
    Ok(())
}

/// The witness evaluated directly from its closed form.
pub fn eval_h(d: usize, p: &TorusPoint) -> Result<f64, WitnessError> {
    check_d(d)?;
    if p.dim() != d - 1 {
        return Err(WitnessError::DimensionMismatch { expected: d - 1, found: p.dim() });
    }
    let s2 = torus::root_sum_norm_sq(&p.coords());
    Ok(s2 * (s2 - d as f64) / ((d - 1) * d) as f64)
}

/// Representation counts `(N₄(γ), N₂(γ))` of `γ` as `e_j - e_k + e_q - e_s`
/// and `e_j - e_k` over indices in `0..d`, with `e_0 = 0`.
pub fn representation_counts(d: usize) -> BTreeMap<ExponentVector, (u64, u64)> {
    let n = d - 1;
    let unit = |j: usize, v: &mut [i64], s: i64| {
        if j > 0 {
            v[j - 1] += s;
        }
    };
    let mut counts: BTreeMap<ExponentVector, (u64, u64)> = BTreeMap::new();
    let mut v = vec![0i64; n];
    for j in 0..d {
        for k in 0..d {
            v.fill(0);
            unit(j, &mut v, 1);
            unit(k, &mut v, -1);
            counts.entry(v.clone()).or_default().1 += 1;
            for q in 0..d {
                for s in 0..d {
                    v.fill(0);
                    unit(j, &mut v, 1);
                    unit(k, &mut v, -1);
                    unit(q, &mut v, 1);
                    unit(s, &mut v, -1);
                    counts.entry(v.clone()).or_default().0 += 1;
                }
            }
        }
    }
    counts
}

/// Exact Fourier expansion of the witness: coefficient
/// `(N₄(γ) - d·N₂(γ)) / ((d-1) d)` at every `γ ∈ [-2, 2]^{d-1}`.
pub fn expand_h(d: usize) -> Result<TrigPolynomial, WitnessError> {
    if !EXPAND_RANGE.contains(&d) {
        return Err(WitnessError::DimensionOutOfRange(d));
    }
    let denom = BigInt::from((d * (d - 1)) as u64);
    let terms = representation_counts(d).into_iter().map(|(g, (n4, n2))| {
        let num = BigInt::from(n4) - BigInt::from(n2) * BigInt::from(d as u64);
        (g, BigRational::new(num, denom.clone()))
    });
    TrigPolynomial::continuous(d - 1, terms)
}

/// Result of validating a witness and reading off its bound.
#[derive(Clone, Debug, Serialize)]
pub struct DelsarteReport {
    pub valid: bool,
    /// `h(0) / ĥ(0)`.
    pub bound: Num17,
    /// The same ratio in exact arithmetic, as `"p/q"`, for exact witnesses.
    pub exact_bound: Option<String>,
    pub value_at_zero: Num17,
    pub constant_term: Num17,
    pub min_coefficient: Num17,
    pub max_on_samples: Num17,
    pub samples: usize,
    pub worst_sample: Option<TorusPoint>,
    pub violations: Vec<String>,
}

/// Formats a rational as `"p/q"`.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Checks the witness conditions (evenness, `ĥ(0) > 0`, `ĥ >= 0` by direct
/// scan, `h <= eps` on every supplied allowed-set sample) and returns the
/// bound `h(0)/ĥ(0)`, marked invalid if any condition fails.
pub fn delsarte_bound(t: &TrigPolynomial, samples: &[TorusPoint], eps: f64) -> Result<DelsarteReport, WitnessError> {
    let mut violations = Vec::new();
    if !t.is_even() {
        violations.push("polynomial is not even".to_string());
    }
    let zero = vec![0; t.dim()];
    let c0 = t.constant_term();
    if c0 <= 0.0 {
        violations.push(format!("constant term {c0} is not positive"));
    }
    let (min_coeff, negative) = match t.terms() {
        Terms::Exact(map) => {
            let neg = map.iter().find(|(_, c)| c.is_negative());
            (t.min_coeff(), neg.map(|(g, c)| format!("coefficient {} at {g:?} is negative", rational_string(c))))
        }
        Terms::Real(map) => {
            let neg = map.iter().find(|(_, c)| **c < 0.0);
            (t.min_coeff(), neg.map(|(g, c)| format!("coefficient {c:e} at {g:?} is negative")))
        }
    };
    violations.extend(negative);
    let mut max_on = f64::NEG_INFINITY;
    let mut worst = None;
    for p in samples {
        let v = t.eval_real(p, eps)?;
        if v > max_on {
            max_on = v;
            worst = Some(p.clone());
        }
    }
    if max_on > eps {
        violations.push(format!("witness is positive ({max_on:e}) on an allowed point"));
    }
    let exact_bound = match (t.exact_value_at_zero(), t.exact_coeff(&zero)) {
        (Some(h0), Some(c)) if !c.is_zero() => Some(rational_string(&(h0 / c))),
        _ => None,
    };
    let h0 = t.value_at_zero();
    Ok(DelsarteReport {
        valid: violations.is_empty(),
        bound: Num17(h0 / c0),
        exact_bound,
        value_at_zero: Num17(h0),
        constant_term: Num17(c0),
        min_coefficient: Num17(min_coeff),
        max_on_samples: Num17(if samples.is_empty() { 0.0 } else { max_on }),
        samples: samples.len(),
        worst_sample: worst,
        violations,
    })
}

/// Both sides of the bound computation for a concrete point set.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub cardinality: usize,
    /// `Σ_γ |B̂(γ)|² ĥ(γ)`.
    pub s_spectral: Num17,
    /// `Σ_{j,k} h(b_j - b_k)`.
    pub s_spatial: Num17,
    pub value_at_zero: Num17,
    pub constant_term: Num17,
    pub bound: Num17,
    /// `S - |B|² ĥ(0)`, nonnegative when every `ĥ(γ) >= 0`.
    pub lower_slack: Num17,
    /// `h(0)|B| - S`, nonnegative when `h <= 0` on every nonzero difference.
    pub upper_slack: Num17,
    /// Largest `h(b_j - b_k)` over `j != k`.
    pub max_offdiagonal: Num17,
    pub worst_pair: Option<(usize, usize)>,
    /// No nonzero difference has `h > eps`.
    pub hypothesis_holds: bool,
    pub within_bound: bool,
}

/// Computes `S` spectrally and spatially and checks that they agree
/// within `eps·|B|²` (relative to the coefficient mass).
pub fn check_point_set(b: &[TorusPoint], t: &TrigPolynomial, eps: f64) -> Result<BoundReport, WitnessError> {
    for p in b {
        if p.dim() != t.dim() {
            return Err(WitnessError::DimensionMismatch { expected: t.dim(), found: p.dim() });
        }
    }
    let mut spectral = 0.0;
    for (g, c) in t.float_terms() {
        let mut bh = Complex64::new(0.0, 0.0);
        for p in b {
            bh += t.character(g, p)?;
        }
        spectral += bh.norm_sqr() * c;
    }
    let mut spatial = 0.0;
    let mut max_off = f64::NEG_INFINITY;
    let mut worst = None;
    for (j, p) in b.iter().enumerate() {
        for (k, q) in b.iter().enumerate() {
            let v = t.eval_real(&torus::difference(p, q)?, eps)?;
            spatial += v;
            if j != k && v > max_off {
                max_off = v;
                worst = Some((j, k));
            }
        }
    }
    let n = b.len() as f64;
    let mass = t.float_terms().iter().map(|(_, c)| c.abs()).sum::<f64>().max(1.0);
    if (spectral - spatial).abs() > eps * n * n * mass {
        return Err(WitnessError::InversionMismatch { spectral, spatial });
    }
    let h0 = t.value_at_zero();
    let c0 = t.constant_term();
    let max_off = if b.len() > 1 { max_off } else { 0.0 };
    Ok(BoundReport {
        cardinality: b.len(),
        s_spectral: Num17(spectral),
        s_spatial: Num17(spatial),
        value_at_zero: Num17(h0),
        constant_term: Num17(c0),
        bound: Num17(h0 / c0),
        lower_slack: Num17(spectral - n * n * c0),
        upper_slack: Num17(h0 * n - spectral),
        max_offdiagonal: Num17(max_off),
        worst_pair: worst,
        hypothesis_holds: max_off <= eps,
        within_bound: n <= h0 / c0 + eps,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffJson {
    Exact(String),
    Real(Num17),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub gamma: ExponentVector,
    pub coeff: CoeffJson,
}

/// `{dim, mode, m?, terms: [{gamma, coeff}]}`; exact coefficients are
/// `"p/q"` strings, grid coefficients are numbers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigPolynomialJson {
    pub dim: usize,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    pub terms: Vec<TermJson>,
}

impl From<&TrigPolynomial> for TrigPolynomialJson {
    fn from(t: &TrigPolynomial) -> Self {
        let terms = match &t.terms {
            Terms::Exact(map) => map
                .iter()
                .map(|(g, c)| TermJson { gamma: g.clone(), coeff: CoeffJson::Exact(rational_string(c)) })
                .collect(),
            Terms::Real(map) => {
                map.iter().map(|(g, c)| TermJson { gamma: g.clone(), coeff: CoeffJson::Real(Num17(*c)) }).collect()
            }
        };
        let (mode, m) = match t.mode {
            Mode::Continuous => ("continuous".to_string(), None),
            Mode::Grid(m) => ("grid".to_string(), Some(m)),
        };
        TrigPolynomialJson { dim: t.dim, mode, m, terms }
    }
}

impl TryFrom<TrigPolynomialJson> for TrigPolynomial {
    type Error = WitnessError;

    fn try_from(j: TrigPolynomialJson) -> Result<Self, WitnessError> {
        match (j.mode.as_str(), j.m) {
            ("continuous", None) => {
                let terms = j
                    .terms
                    .into_iter()
                    .map(|t| match t.coeff {
                        CoeffJson::Exact(s) => s
                            .parse::<BigRational>()
                            .map(|c| (t.gamma, c))
                            .map_err(|e| WitnessError::Parse(format!("{s:?}: {e}"))),
                        CoeffJson::Real(_) => Err(WitnessError::Parse("continuous mode needs \"p/q\" coefficients".into())),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                TrigPolynomial::continuous(j.dim, terms)
            }
            ("grid", Some(m)) => {
                let terms = j
                    .terms
                    .into_iter()
                    .map(|t| match t.coeff {
                        CoeffJson::Real(c) => Ok((t.gamma, c.0)),
                        CoeffJson::Exact(s) => s
                            .parse::<BigRational>()
                            .ok()
                            .and_then(|c| c.to_f64())
                            .map(|c| (t.gamma, c))
                            .ok_or_else(|| WitnessError::Parse(format!("bad coefficient {s:?}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                TrigPolynomial::grid(j.dim, m, terms)
            }
            (mode, m) => Err(WitnessError::Parse(format!("unsupported mode {mode:?} with m = {m:?}"))),
        }
    }
}

pub fn trig_to_json(t: &TrigPolynomial) -> Result<String, WitnessError> {
    Ok(crate::numfmt::to_json_pretty(&TrigPolynomialJson::from(t))?)
}

pub fn trig_from_json(s: &str) -> Result<TrigPolynomial, WitnessError> {
    serde_json::from_str::<TrigPolynomialJson>(s)?.try_into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    fn ex(m: u32, num: &[i64]) -> TorusPoint {
        TorusPoint::exact(m, num).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn closed_form_examples() {
        assert!((eval_h(6, &TorusPoint::zero(5)).unwrap() - 36.0).abs() < 1e-12);
        assert!(eval_h(3, &ex(3, &[1, 2])).unwrap().abs() < 1e-12);
        assert!(eval_h(3, &ex(3, &[1, 1])).unwrap().abs() < 1e-12);
        let v = eval_h(6, &ex(2, &[0, 0, 0, 0, 1])).unwrap();
        assert!((v - 16.0 / 3.0).abs() < 1e-12);
        assert!(eval_h(1, &TorusPoint::zero(0)).is_err());
    }

    #[test]
    fn brute_force_counts_for_d6() {
        // Independent enumeration over all quadruples of phase indices.
        let d = 6i64;
        let target = [1i64, 0, 0, 0, 0];
        let vec_of = |idx: &[i64]| {
            let mut v = [0i64; 5];
            for (k, &i) in idx.iter().enumerate() {
                if i > 0 {
                    v[i as usize - 1] += if k % 2 == 0 { 1 } else { -1 };
                }
            }
            v
        };
        let mut n4 = 0;
        let mut n2 = 0;
        for j in 0..d {
            for k in 0..d {
                if vec_of(&[j, k]) == target {
                    n2 += 1;
                }
                for q in 0..d {
                    for s in 0..d {
                        if vec_of(&[j, k, q, s]) == target {
                            n4 += 1;
                        }
                    }
                }
            }
        }
        assert_eq!((n4, n2), (20, 1));
        let h = expand_h(6).unwrap();
        assert_eq!(h.exact_coeff(&target).unwrap(), rat(7, 15));
    }

    #[test]
    fn expansion_basics() {
        for d in EXPAND_RANGE {
            let h = expand_h(d).unwrap();
            assert_eq!(h.exact_coeff(&vec![0; d - 1]).unwrap(), BigRational::one());
            assert!(h.float_terms().iter().all(|(_, c)| *c >= 0.0));
            assert!(h.is_even());
            assert_eq!(h.exact_value_at_zero().unwrap(), rat((d * d) as i64, 1));
        }
        assert!(expand_h(1).is_err());
        assert!(expand_h(13).is_err());
    }

    #[test]
    fn eval_examples() {
        let h6 = expand_h(6).unwrap();
        assert!((h6.eval_real(&TorusPoint::zero(5), DEFAULT_EPS).unwrap() - 36.0).abs() < 1e-9);
        let h3 = expand_h(3).unwrap();
        assert!(h3.eval_real(&ex(3, &[1, 2]), DEFAULT_EPS).unwrap().abs() < 1e-12);
        let c = TrigPolynomial::continuous(2, [(vec![0, 0], rat(5, 2))]).unwrap();
        assert_eq!(c.eval(&TorusPoint::float(&[0.3, 0.1])).unwrap(), Complex64::new(2.5, 0.0));
        let g = TrigPolynomial::grid(1, 4, [(vec![0], 1.0), (vec![1], 0.5), (vec![3], 0.5)]).unwrap();
        assert!((g.eval_real(&ex(2, &[1]), DEFAULT_EPS).unwrap() - 0.0).abs() < 1e-15);
        assert!(matches!(g.eval(&ex(3, &[1])), Err(WitnessError::IncompatiblePoint { .. })));
        assert!(matches!(g.eval(&TorusPoint::float(&[0.1])), Err(WitnessError::IncompatiblePoint { .. })));
        assert!(matches!(h3.eval(&TorusPoint::zero(3)), Err(WitnessError::DimensionMismatch { .. })));
        let forbidden = ex(2, &[0, 0, 0, 0, 1]);
        assert!((h6.eval_real(&forbidden, DEFAULT_EPS).unwrap() - 16.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bound_examples() {
        for d in EXPAND_RANGE {
            let r = delsarte_bound(&expand_h(d).unwrap(), &[], DEFAULT_EPS).unwrap();
            assert!(r.valid);
            assert_eq!(r.exact_bound.as_deref(), Some(format!("{}/1", d * d).as_str()));
        }
        let g = crate::torus::enumerate_grid(4, 6, crate::torus::DEFAULT_GRID_BUDGET).unwrap();
        let samples: Vec<TorusPoint> = g.allowed().cloned().collect();
        let r = delsarte_bound(&expand_h(4).unwrap(), &samples, DEFAULT_EPS).unwrap();
        assert!(r.valid, "{:?}", r.violations);
        assert_eq!(r.bound.0, 16.0);

        let bad = TrigPolynomial::continuous(1, [(vec![0], rat(1, 1)), (vec![1], rat(-1, 4)), (vec![-1], rat(-1, 4))]).unwrap();
        let r = delsarte_bound(&bad, &[], DEFAULT_EPS).unwrap();
        assert!(!r.valid);
        assert!(r.violations[0].contains("negative"));

        let one = TrigPolynomial::continuous(2, [(vec![0, 0], rat(1, 1))]).unwrap();
        let r = delsarte_bound(&one, &[], DEFAULT_EPS).unwrap();
        assert!(r.valid);
        assert_eq!(r.bound.0, 1.0);

        let odd = TrigPolynomial::continuous(1, [(vec![0], rat(1, 1)), (vec![1], rat(1, 2))]).unwrap();
        assert!(!delsarte_bound(&odd, &[], DEFAULT_EPS).unwrap().valid);
    }

    #[test]
    fn point_set_examples() {
        let h = expand_h(3).unwrap();
        let r = check_point_set(&[TorusPoint::zero(2)], &h, DEFAULT_EPS).unwrap();
        assert!((r.s_spectral.0 - 9.0).abs() < 1e-9 && (r.s_spatial.0 - 9.0).abs() < 1e-9);
        assert!(r.within_bound && r.hypothesis_holds);

        // Two points differing by a forbidden point.
        let h6 = expand_h(6).unwrap();
        let b = [TorusPoint::zero(5), ex(2, &[0, 0, 0, 0, 1])];
        let r = check_point_set(&b, &h6, DEFAULT_EPS).unwrap();
        assert!(!r.hypothesis_holds);
        assert!((r.max_offdiagonal.0 - 16.0 / 3.0).abs() < 1e-9);
        assert!(r.upper_slack.0 < 0.0);
    }

    #[test]
    fn json_round_trip() {
        let h = expand_h(4).unwrap();
        let back = trig_from_json(&trig_to_json(&h).unwrap()).unwrap();
        assert_eq!(back, h);
        let text = trig_to_json(&h).unwrap();
        assert!(text.contains("\"1/1\""));
        let g = TrigPolynomial::grid(2, 8, [(vec![1, 2], 0.125), (vec![7, 6], 0.125), (vec![0, 0], 1.0)]).unwrap();
        assert_eq!(trig_from_json(&trig_to_json(&g).unwrap()).unwrap(), g);
        assert!(trig_from_json(r#"{"dim":1,"mode":"grid","terms":[]}"#).is_err());
    }

    fn arb_point(n: usize) -> impl Strategy<Value = TorusPoint> {
        prop::collection::vec(-0.5..0.5f64, n).prop_map(|x| TorusPoint::float(&x))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn expansion_matches_closed_form(d in 2usize..=8, seed in prop::collection::vec(-0.5..0.5f64, 7)) {
            let p = TorusPoint::float(&seed[..d - 1]);
            let h = expand_h(d).unwrap();
            let a = h.eval_real(&p, DEFAULT_EPS).unwrap();
            let b = eval_h(d, &p).unwrap();
            prop_assert!((a - b).abs() < 1e-9, "d={} {} vs {}", d, a, b);
        }

        #[test]
        fn eval_is_even(p in arb_point(4)) {
            let h = expand_h(5).unwrap();
            let a = h.eval_real(&p, DEFAULT_EPS).unwrap();
            let b = h.eval_real(&p.negate(), DEFAULT_EPS).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
