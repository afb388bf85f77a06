//! Points of the (d-1)-torus and their classification into the
//! orthogonality set, the unbiasedness set, the zero point, or the
//! forbidden remainder.
//!
//! A dephased column `(1, e^{2πiρ_1}, …, e^{2πiρ_{d-1}})` is stored as the
//! point `(ρ_1, …, ρ_{d-1})`. Two columns are orthogonal iff their
//! difference `x` has `1 + Σ e^{2πi x_j} = 0`, and unbiased iff that sum has
//! modulus `√d`.

use std::f64::consts::TAU;
use std::fmt;
use std::io::{self, Write};

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclo::{coords_equal_integer, CycloError, CycloInt, PowerTable};

/// Default tolerance for floating classification and unimodularity.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Default cap on the number of grid points an enumeration may visit.
pub const DEFAULT_GRID_BUDGET: u64 = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry {index} has modulus {modulus}, not 1")]
    NotUnimodular { index: usize, modulus: f64 },
    #[error("column is not dephased: first entry is {0}")]
    NotDephased(Complex64),
    #[error("empty column")]
    EmptyColumn,
    #[error("grid order must be positive")]
    ZeroGridOrder,
    #[error("grid of {points} points exceeds the enumeration budget of {budget}")]
    BudgetExceeded { points: u128, budget: u64 },
    #[error(transparent)]
    Cyclo(#[from] CycloError),
}

/// A point of `T^{d-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorusPoint {
    /// Coordinates `num_j / m` with `0 <= num_j < m`.
    Exact { m: u32, num: Vec<u32> },
    /// Coordinates in the window `[-1/2, 1/2)`.
    Float(Vec<f64>),
}

/// Maps a real to the canonical window `[-1/2, 1/2)`.
pub fn wrap_unit(x: f64) -> f64 {
    let y = x - (x + 0.5).floor();
    if y >= 0.5 {
        y - 1.0
    } else {
        y
    }
}

impl TorusPoint {
    /// Exact point with numerators reduced modulo `m`.
    pub fn exact(m: u32, num: &[i64]) -> Result<Self, TorusError> {
        if m == 0 {
            return Err(TorusError::ZeroGridOrder);
        }
        let num = num.iter().map(|&a| a.rem_euclid(m as i64) as u32).collect();
        Ok(TorusPoint::Exact { m, num })
    }

    pub fn float(coords: &[f64]) -> Self {
        TorusPoint::Float(coords.iter().map(|&x| wrap_unit(x)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        TorusPoint::Exact { m: 1, num: vec![0; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            TorusPoint::Exact { num, .. } => num.len(),
            TorusPoint::Float(x) => x.len(),
        }
    }

    /// Coordinates as reals in `[-1/2, 1/2)`.
    pub fn coords(&self) -> Vec<f64> {
        match self {
            TorusPoint::Exact { m, num } => {
                num.iter().map(|&a| wrap_unit(a as f64 / *m as f64)).collect()
            }
            TorusPoint::Float(x) => x.clone(),
        }
    }

    pub fn to_float(&self) -> TorusPoint {
        TorusPoint::Float(self.coords())
    }

    pub fn is_zero(&self, eps: f64) -> bool {
        match self {
            TorusPoint::Exact { num, .. } => num.iter().all(|&a| a == 0),
            TorusPoint::Float(x) => x.iter().all(|v| v.abs() <= eps),
        }
    }

    pub fn negate(&self) -> TorusPoint {
        match self {
            TorusPoint::Exact { m, num } => TorusPoint::Exact {
                m: *m,
                num: num.iter().map(|&a| (*m - a) % *m).collect(),
            },
            TorusPoint::Float(x) => TorusPoint::float(&x.iter().map(|v| -v).collect::<Vec<_>>()),
        }
    }

    /// The same point with its coordinates reordered by `perm`
    /// (`out[i] = self[perm[i]]`).
    pub fn permuted(&self, perm: &[usize]) -> TorusPoint {
        match self {
            TorusPoint::Exact { m, num } => TorusPoint::Exact {
                m: *m,
                num: perm.iter().map(|&i| num[i]).collect(),
            },
            TorusPoint::Float(x) => TorusPoint::Float(perm.iter().map(|&i| x[i]).collect()),
        }
    }

    /// Re-expresses an exact point over a multiple `big_m` of its denominator.
    pub fn lift(&self, big_m: u32) -> Option<TorusPoint> {
        match self {
            TorusPoint::Exact { m, num } if big_m.is_multiple_of(*m) => {
                let f = big_m / *m;
                Some(TorusPoint::Exact { m: big_m, num: num.iter().map(|&a| a * f).collect() })
            }
            _ => None,
        }
    }

    /// `1 + Σ_j ζ_m^{num_j}` in `Z[ζ_m]`, for exact points.
    pub fn exact_root_sum(&self) -> Option<Result<CycloInt, CycloError>> {
        match self {
            TorusPoint::Exact { m, num } => {
                let exps: Vec<i64> =
                    std::iter::once(0).chain(num.iter().map(|&a| a as i64)).collect();
                Some(CycloInt::root_sum(*m, &exps))
            }
            TorusPoint::Float(_) => None,
        }
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorusPoint::Exact { m, num } => {
                write!(f, "(")?;
                for (i, a) in num.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}/{m}")?;
                }
                write!(f, ")")
            }
            TorusPoint::Float(x) => write!(f, "{x:?}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PointClass {
    Zero,
    Ort,
    Ub,
    Forbidden,
}

impl PointClass {
    pub fn is_allowed(self) -> bool {
        matches!(self, PointClass::Ort | PointClass::Ub)
    }

    pub fn label(self) -> &'static str {
        match self {
            PointClass::Zero => "ZERO",
            PointClass::Ort => "ORT",
            PointClass::Ub => "UB",
            PointClass::Forbidden => "FORBIDDEN",
        }
    }
}

/// `|1 + Σ_j e^{2πi x_j}|²` in floating point.
pub fn root_sum_norm_sq(coords: &[f64]) -> f64 {
    root_sum(coords).norm_sqr()
}

/// `1 + Σ_j e^{2πi x_j}`.
pub fn root_sum(coords: &[f64]) -> Complex64 {
    coords.iter().fold(Complex64::new(1.0, 0.0), |acc, &x| {
        let t = TAU * x;
        acc + Complex64::new(t.cos(), t.sin())
    })
}

fn check_dim(p: &TorusPoint, d: usize) -> Result<(), TorusError> {
    if d == 0 || p.dim() != d - 1 {
        return Err(TorusError::DimensionMismatch { expected: d.saturating_sub(1), found: p.dim() });
    }
    Ok(())
}

/// Classifies with the default tolerance for floating points.
pub fn classify(p: &TorusPoint, d: usize) -> Result<PointClass, TorusError> {
    classify_with(p, d, DEFAULT_EPS)
}

/// Exact points are decided in `Z[ζ_m]`; floating points by comparing the
/// squared modulus to `0` and `d` within `eps`.
pub fn classify_with(p: &TorusPoint, d: usize, eps: f64) -> Result<PointClass, TorusError> {
    check_dim(p, d)?;
    match p {
        TorusPoint::Exact { m, num } => {
            let c = GridClassifier::new(d, *m)?;
            let mut scratch = c.scratch();
            Ok(c.classify_exact(num, &mut scratch))
        }
        TorusPoint::Float(x) => Ok(classify_float_coords(x, d, eps)),
    }
}

fn classify_float_coords(x: &[f64], d: usize, eps: f64) -> PointClass {
    if x.iter().all(|v| v.abs() <= eps) {
        return PointClass::Zero;
    }
    let n = root_sum_norm_sq(x);
    if n.abs() <= eps {
        PointClass::Ort
    } else if (n - d as f64).abs() <= eps {
        PointClass::Ub
    } else {
        PointClass::Forbidden
    }
}

/// Classifier for points of one `m`-grid in one dimension.
#[derive(Clone, Debug)]
pub struct GridClassifier {
    d: usize,
    m: u32,
    table: std::sync::Arc<PowerTable>,
}

/// Reusable buffers for [`GridClassifier::classify_exact`].
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    exps: Vec<u32>,
    coords: Vec<i64>,
}

impl GridClassifier {
    pub fn new(d: usize, m: u32) -> Result<Self, TorusError> {
        if m == 0 {
            return Err(TorusError::ZeroGridOrder);
        }
        Ok(GridClassifier { d, m, table: PowerTable::get(m)? })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn scratch(&self) -> Scratch {
        Scratch { exps: Vec::with_capacity(self.d), coords: vec![0; self.table.phi()] }
    }

    /// Exact class of the grid point `num / m`; numerators must lie in `0..m`.
    pub fn classify_exact(&self, num: &[u32], s: &mut Scratch) -> PointClass {
        if num.iter().all(|&a| a == 0) {
            return PointClass::Zero;
        }
        s.exps.clear();
        s.exps.push(0);
        s.exps.extend_from_slice(num);
        self.table.root_sum_norm_into(&s.exps, &mut s.coords);
        if coords_equal_integer(&s.coords, 0) {
            PointClass::Ort
        } else if coords_equal_integer(&s.coords, self.d as i64) {
            PointClass::Ub
        } else {
            PointClass::Forbidden
        }
    }

    /// Floating class of the grid point `num / m`.
    pub fn classify_float(&self, num: &[u32], eps: f64) -> PointClass {
        let x: Vec<f64> = num.iter().map(|&a| wrap_unit(a as f64 / self.m as f64)).collect();
        classify_float_coords(&x, self.d, eps)
    }
}

/// Coordinatewise `p - q` modulo 1. Exact operands are lifted to the lcm
/// of their denominators; any floating operand makes the result floating.
pub fn difference(p: &TorusPoint, q: &TorusPoint) -> Result<TorusPoint, TorusError> {
    if p.dim() != q.dim() {
        return Err(TorusError::DimensionMismatch { expected: p.dim(), found: q.dim() });
    }
    match (p, q) {
        (TorusPoint::Exact { m: m1, num: a }, TorusPoint::Exact { m: m2, num: b }) => {
            let l = m1.lcm(m2);
            let (f1, f2) = ((l / m1) as u64, (l / m2) as u64);
            let num = a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let l = l as u64;
                    ((x as u64 * f1 + l - (y as u64 * f2) % l) % l) as u32
                })
                .collect();
            Ok(TorusPoint::Exact { m: l, num })
        }
        _ => {
            let x: Vec<f64> = p.coords().iter().zip(q.coords()).map(|(a, b)| a - b).collect();
            Ok(TorusPoint::float(&x))
        }
    }
}

/// Converts a dephased unimodular column to its torus point.
///
/// With `snap = Some(m)` the point is returned exactly when every phase is
/// within `eps` of a multiple of `1/m`.
pub fn column_to_point(
    column: &[Complex64],
    snap: Option<u32>,
    eps: f64,
) -> Result<TorusPoint, TorusError> {
    let (first, rest) = column.split_first().ok_or(TorusError::EmptyColumn)?;
    for (index, c) in column.iter().enumerate() {
        let modulus = c.norm();
        if (modulus - 1.0).abs() > eps {
            return Err(TorusError::NotUnimodular { index, modulus });
        }
    }
    if (first - Complex64::new(1.0, 0.0)).norm() > eps {
        return Err(TorusError::NotDephased(*first));
    }
    let rho: Vec<f64> = rest.iter().map(|c| wrap_unit(c.arg() / TAU)).collect();
    if let Some(m) = snap {
        if m == 0 {
            return Err(TorusError::ZeroGridOrder);
        }
        if let Some(num) = snap_to_grid(&rho, m, eps) {
            return Ok(TorusPoint::Exact { m, num });
        }
    }
    Ok(TorusPoint::float(&rho))
}

/// Numerators `a_j` with `|x_j - a_j/m| <= eps` (mod 1), if all exist.
pub fn snap_to_grid(x: &[f64], m: u32, eps: f64) -> Option<Vec<u32>> {
    x.iter()
        .map(|&v| {
            let a = (v * m as f64).round();
            if (v - a / m as f64).abs() <= eps {
                Some((a as i64).rem_euclid(m as i64) as u32)
            } else {
                None
            }
        })
        .collect()
}

/// Decodes a grid index into numerators, first coordinate most significant.
pub fn decode_index(mut idx: u64, m: u32, out: &mut [u32]) {
    for slot in out.iter_mut().rev() {
        *slot = (idx % m as u64) as u32;
        idx /= m as u64;
    }
}

pub fn encode_index(num: &[u32], m: u32) -> u64 {
    num.iter().fold(0u64, |acc, &a| acc * m as u64 + a as u64)
}

/// `m^(d-1)`, checked against `budget`.
pub fn grid_size(d: usize, m: u32, budget: u64) -> Result<u64, TorusError> {
    if m == 0 {
        return Err(TorusError::ZeroGridOrder);
    }
    let points = (m as u128).pow(d.saturating_sub(1) as u32);
    if points > budget as u128 {
        return Err(TorusError::BudgetExceeded { points, budget });
    }
    Ok(points as u64)
}

/// The allowed points of an `m`-grid, each list in lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPartition {
    pub d: usize,
    pub m: u32,
    pub ort: Vec<TorusPoint>,
    pub ub: Vec<TorusPoint>,
}

impl GridPartition {
    pub fn allowed(&self) -> impl Iterator<Item = &TorusPoint> {
        self.ort.iter().chain(&self.ub)
    }

    pub fn len(&self) -> usize {
        self.ort.len() + self.ub.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CSV dump: one row per point, numerators then the class label.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.d.saturating_sub(1);
        let header: Vec<String> = (1..=n).map(|j| format!("a{j}")).collect();
        writeln!(w, "{},class", header.join(","))?;
        let mut rows: Vec<(&[u32], PointClass)> = Vec::with_capacity(self.len());
        for (list, class) in [(&self.ort, PointClass::Ort), (&self.ub, PointClass::Ub)] {
            for p in list {
                if let TorusPoint::Exact { num, .. } = p {
                    rows.push((num, class));
                }
            }
        }
        rows.sort();
        for (num, class) in rows {
            let cols: Vec<String> = num.iter().map(u32::to_string).collect();
            writeln!(w, "{},{}", cols.join(","), class.label())?;
        }
        Ok(())
    }
}

/// Exhaustively classifies the `m^(d-1)` points of the `m`-grid with the
/// exact path. The zero point is excluded from both lists.
pub fn enumerate_grid(d: usize, m: u32, budget: u64) -> Result<GridPartition, TorusError> {
    let total = grid_size(d, m, budget)?;
    let classifier = GridClassifier::new(d, m)?;
    let n = d - 1;
    let tagged: Vec<(u64, PointClass)> = (0..total)
        .into_par_iter()
        .map_init(
            || (classifier.scratch(), vec![0u32; n]),
            |(s, num), idx| {
                decode_index(idx, m, num);
                (idx, classifier.classify_exact(num, s))
            },
        )
        .filter(|(_, c)| c.is_allowed())
        .collect();
    let mut ort = Vec::new();
    let mut ub = Vec::new();
    let mut num = vec![0u32; n];
    for (idx, class) in tagged {
        decode_index(idx, m, &mut num);
        let p = TorusPoint::Exact { m, num: num.clone() };
        match class {
            PointClass::Ort => ort.push(p),
            PointClass::Ub => ub.push(p),
            _ => {}
        }
    }
    Ok(GridPartition { d, m, ort, ub })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ex(m: u32, num: &[i64]) -> TorusPoint {
        TorusPoint::exact(m, num).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&ex(2, &[1]), 2).unwrap(), PointClass::Ort);
        assert_eq!(classify(&ex(3, &[1, 2]), 3).unwrap(), PointClass::Ort);
        assert_eq!(classify(&ex(3, &[1, 1]), 3).unwrap(), PointClass::Ub);
        assert_eq!(classify(&ex(2, &[0, 0, 0, 0, 1]), 6).unwrap(), PointClass::Forbidden);
        assert_eq!(classify(&ex(7, &[0, 0]), 3).unwrap(), PointClass::Zero);
        assert!(matches!(
            classify(&ex(3, &[1]), 3),
            Err(TorusError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ub_example_by_direct_complex_arithmetic() {
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        let z = Complex64::new(1.0, 0.0) + w + w;
        assert!((z.norm_sqr() - 3.0).abs() < 1e-12);
        assert_eq!(classify(&TorusPoint::float(&[1.0 / 3.0, 1.0 / 3.0]), 3).unwrap(), PointClass::Ub);
    }

    #[test]
    fn difference_examples() {
        let p = ex(4, &[1, 3]);
        assert!(difference(&p, &p).unwrap().is_zero(0.0));
        assert_eq!(difference(&ex(4, &[1, 0]), &ex(4, &[3, 0])).unwrap(), ex(4, &[2, 0]));
        assert_eq!(difference(&ex(3, &[1, 2]), &ex(6, &[1, 1])).unwrap(), ex(6, &[1, 3]));
        let f = difference(&TorusPoint::float(&[0.25, 0.0]), &TorusPoint::float(&[-0.25, 0.0]))
            .unwrap();
        assert_eq!(f, TorusPoint::Float(vec![-0.5, 0.0]));
        assert!(difference(&ex(3, &[1]), &ex(3, &[1, 1])).is_err());
    }

    #[test]
    fn column_examples() {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(column_to_point(&[one, -one], Some(2), DEFAULT_EPS).unwrap(), ex(2, &[1]));
        assert_eq!(column_to_point(&[one, i, -one], Some(4), DEFAULT_EPS).unwrap(), ex(4, &[1, 2]));
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        assert_eq!(
            column_to_point(&[one, w, w * w], Some(3), DEFAULT_EPS).unwrap(),
            ex(3, &[1, 2])
        );
        match column_to_point(&[one, i], None, DEFAULT_EPS).unwrap() {
            TorusPoint::Float(x) => assert!((x[0] - 0.25).abs() < 1e-15),
            p => panic!("{p:?}"),
        }
        assert!(matches!(
            column_to_point(&[one, i * 0.5], None, DEFAULT_EPS),
            Err(TorusError::NotUnimodular { index: 1, .. })
        ));
        assert!(matches!(
            column_to_point(&[i, one], None, DEFAULT_EPS),
            Err(TorusError::NotDephased(_))
        ));
        // Phases off the requested grid fall back to floating coordinates.
        assert!(matches!(
            column_to_point(&[one, w], Some(4), DEFAULT_EPS).unwrap(),
            TorusPoint::Float(_)
        ));
    }

    #[test]
    fn grid_d3_m3_by_direct_complex_arithmetic() {
        let mut ort = 0;
        let mut ub = 0;
        for a in 0..3 {
            for b in 0..3 {
                if a == 0 && b == 0 {
                    continue;
                }
                let n = root_sum_norm_sq(&[a as f64 / 3.0, b as f64 / 3.0]);
                if n.abs() < 1e-9 {
                    ort += 1;
                } else if (n - 3.0).abs() < 1e-9 {
                    ub += 1;
                }
            }
        }
        assert_eq!((ort, ub), (2, 6));
        let g = enumerate_grid(3, 3, DEFAULT_GRID_BUDGET).unwrap();
        assert_eq!(g.ort, vec![ex(3, &[1, 2]), ex(3, &[2, 1])]);
        assert_eq!(g.ub.len(), 6);
    }

    #[test]
    fn grid_small_cases() {
        let g = enumerate_grid(2, 2, DEFAULT_GRID_BUDGET).unwrap();
        assert_eq!((g.ort.len(), g.ub.len()), (1, 0));
        let g = enumerate_grid(6, 4, DEFAULT_GRID_BUDGET).unwrap();
        assert!(g.ub.is_empty());
        // Independent float scan of all 4^5 points.
        let mut ub = 0;
        let mut num = [0u32; 5];
        for idx in 0..4u64.pow(5) {
            decode_index(idx, 4, &mut num);
            let x: Vec<f64> = num.iter().map(|&a| a as f64 / 4.0).collect();
            if (root_sum_norm_sq(&x) - 6.0).abs() < 1e-9 {
                ub += 1;
            }
        }
        assert_eq!(ub, 0);
        assert!(matches!(
            enumerate_grid(6, 16, 1000),
            Err(TorusError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn csv_dump() {
        let g = enumerate_grid(3, 3, DEFAULT_GRID_BUDGET).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a1,a2,class");
        assert_eq!(lines.len(), 9);
        assert!(lines.contains(&"1,2,ORT"));
        assert!(lines.contains(&"1,1,UB"));
    }

    #[test]
    fn grid_closed_under_negation_and_permutation() {
        for (d, m) in [(3, 6), (4, 4), (4, 6), (5, 3)] {
            let g = enumerate_grid(d, m, DEFAULT_GRID_BUDGET).unwrap();
            for list in [&g.ort, &g.ub] {
                for p in list.iter() {
                    assert!(list.contains(&p.negate()));
                    let mut perm: Vec<usize> = (0..d - 1).collect();
                    perm.rotate_left(1);
                    assert!(list.contains(&p.permuted(&perm)));
                }
            }
        }
    }

    #[test]
    fn bigint_root_sum_agrees_with_table() {
        for (d, m) in [(3usize, 12u32), (6, 8), (5, 10)] {
            let c = GridClassifier::new(d, m).unwrap();
            let mut s = c.scratch();
            let mut num = vec![0u32; d - 1];
            let total = (m as u64).pow(d as u32 - 1);
            for idx in (0..total).step_by(7) {
                decode_index(idx, m, &mut num);
                let p = TorusPoint::Exact { m, num: num.clone() };
                let n = p.exact_root_sum().unwrap().unwrap().norm_sq();
                let want = if p.is_zero(0.0) {
                    PointClass::Zero
                } else if n.equals_integer(0) {
                    PointClass::Ort
                } else if n.equals_integer(d as i64) {
                    PointClass::Ub
                } else {
                    PointClass::Forbidden
                };
                assert_eq!(c.classify_exact(&num, &mut s), want);
            }
        }
    }

    proptest! {
        #[test]
        fn classify_symmetric_under_negation(m in 1u32..13, raw in prop::collection::vec(0i64..1000, 1..7)) {
            let d = raw.len() + 1;
            let p = TorusPoint::exact(m, &raw).unwrap();
            prop_assert_eq!(classify(&p, d).unwrap(), classify(&p.negate(), d).unwrap());
        }

        #[test]
        fn classify_invariant_under_permutation(m in 1u32..13, raw in prop::collection::vec(0i64..1000, 2..7), rot in 0usize..6) {
            let d = raw.len() + 1;
            let p = TorusPoint::exact(m, &raw).unwrap();
            let mut perm: Vec<usize> = (0..raw.len()).collect();
            perm.rotate_left(rot % raw.len());
            perm.swap(0, raw.len() - 1);
            prop_assert_eq!(classify(&p, d).unwrap(), classify(&p.permuted(&perm), d).unwrap());
        }

        #[test]
        fn difference_is_antisymmetric(m in 1u32..20, a in prop::collection::vec(0i64..50, 3), b in prop::collection::vec(0i64..50, 3)) {
            let p = TorusPoint::exact(m, &a).unwrap();
            let q = TorusPoint::exact(m, &b).unwrap();
            prop_assert_eq!(difference(&p, &q).unwrap(), difference(&q, &p).unwrap().negate());
        }
    }
}
