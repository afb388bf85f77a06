//! Complex Hadamard matrices, mutually unbiased families, and the
//! row-quotient orthogonality test for `d × d²` column systems.
//!
//! A family of `m` mutually unbiased complex Hadamard matrices
//! `H'_1, …, H'_m` (entries of modulus 1) corresponds to `m + 1` mutually
//! unbiased bases: the standard basis plus the columns of each `H'_k / √d`.

use std::io::{self, BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numfmt::{fmt17, Num17};
use crate::torus::{self, column_to_point, snap_to_grid, PointClass, TorusError, TorusPoint};

pub use crate::torus::DEFAULT_EPS;

#[derive(Debug, Error)]
pub enum HadamardError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, found {rows}x{cols}")]
    Shape { expected_rows: usize, expected_cols: usize, rows: usize, cols: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("data length {len} does not match {rows}x{cols}")]
    DataLength { len: usize, rows: usize, cols: usize },
    #[error("entry ({row}, {col}) is too close to zero for a quotient")]
    NearZeroEntry { row: usize, col: usize },
    #[error("not a complex Hadamard matrix (entry deviation {modulus:e}, orthogonality {inner:e})")]
    NotHadamard { modulus: f64, inner: f64 },
    #[error("columns {0} and {1} differ by a {2:?} point")]
    ForbiddenDifference(usize, usize, PointClass),
    #[error("family is empty")]
    EmptyFamily,
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, HadamardError> {
        if data.len() != rows * cols {
            return Err(HadamardError::DataLength { len: data.len(), rows, cols });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| Complex64::new(if r == c { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Result<Self, HadamardError> {
        if self.cols != other.rows {
            return Err(HadamardError::DimensionMismatch(self.cols, other.rows));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows * other.cols];
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                let orow = other.row(k);
                for (o, b) in out[r * other.cols..(r + 1) * other.cols].iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        Ok(ComplexMatrix { rows: self.rows, cols: other.cols, data: out })
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Measurements behind an [`is_hadamard`] verdict. Inner products are
/// divided by `d`, so every field is compared directly against `eps`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HadamardReport {
    pub is_hadamard: bool,
    pub max_modulus_deviation: Num17,
    pub max_row_inner: Num17,
    pub max_col_inner: Num17,
    pub worst_row_pair: Option<(usize, usize)>,
}

impl HadamardReport {
    pub fn max_violation(&self) -> f64 {
        self.max_modulus_deviation.0.max(self.max_row_inner.0).max(self.max_col_inner.0)
    }
}

/// Unimodular entries and pairwise orthogonal rows and columns, both within `eps`.
pub fn is_hadamard(m: &ComplexMatrix, eps: f64) -> Result<HadamardReport, HadamardError> {
    if !m.is_square() {
        return Err(HadamardError::NotSquare { rows: m.rows, cols: m.cols });
    }
    let d = m.rows;
    let modulus = m.data.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    let mut max_row = 0.0f64;
    let mut worst = None;
    for i in 0..d {
        for j in i + 1..d {
            let v = inner(m.row(i), m.row(j)).norm() / d as f64;
            if v > max_row {
                max_row = v;
                worst = Some((i, j));
            }
        }
    }
    let cols: Vec<Vec<Complex64>> = (0..d).map(|c| m.column(c)).collect();
    let mut max_col = 0.0f64;
    for i in 0..d {
        for j in i + 1..d {
            max_col = max_col.max(inner(&cols[i], &cols[j]).norm() / d as f64);
        }
    }
    Ok(HadamardReport {
        is_hadamard: modulus <= eps && max_row <= eps && max_col <= eps,
        max_modulus_deviation: Num17(modulus),
        max_row_inner: Num17(max_row),
        max_col_inner: Num17(max_col),
        worst_row_pair: worst,
    })
}

/// A square matrix with unimodular entries and orthogonal rows.
#[derive(Clone, Debug, PartialEq)]
pub struct HadamardMatrix(ComplexMatrix);

impl HadamardMatrix {
    pub fn new(m: ComplexMatrix, eps: f64) -> Result<Self, HadamardError> {
        let r = is_hadamard(&m, eps)?;
        if !r.is_hadamard {
            return Err(HadamardError::NotHadamard {
                modulus: r.max_modulus_deviation.0,
                inner: r.max_row_inner.0.max(r.max_col_inner.0),
            });
        }
        Ok(HadamardMatrix(m))
    }

    pub fn d(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

/// `(1/√d) H1^* H2` is again complex Hadamard.
pub fn unbiased_pair_report(
    h1: &HadamardMatrix,
    h2: &HadamardMatrix,
    eps: f64,
) -> Result<HadamardReport, HadamardError> {
    if h1.d() != h2.d() {
        return Err(HadamardError::DimensionMismatch(h1.d(), h2.d()));
    }
    let d = h1.d() as f64;
    let p = h1.0.adjoint().mul(&h2.0)?.scale(Complex64::new(1.0 / d.sqrt(), 0.0));
    is_hadamard(&p, eps)
}

pub fn is_unbiased_pair(h1: &HadamardMatrix, h2: &HadamardMatrix, eps: f64) -> Result<bool, HadamardError> {
    Ok(unbiased_pair_report(h1, h2, eps)?.is_hadamard)
}

/// Divides column `k` by entry `(0, k)`, then row `j` by entry `(j, 0)`.
pub fn dephase(h: &HadamardMatrix) -> HadamardMatrix {
    let m = &h.0;
    let mut out = m.clone();
    for c in 0..m.cols {
        let s = m.get(0, c);
        for r in 0..m.rows {
            out.set(r, c, out.get(r, c) / s);
        }
    }
    for r in 0..m.rows {
        let s = out.get(r, 0);
        for c in 0..m.cols {
            out.set(r, c, out.get(r, c) / s);
        }
    }
    HadamardMatrix(out)
}

/// Transition matrices `H'_1, …, H'_m` of a family of mutually unbiased
/// bases; the standard basis is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct MubFamily {
    pub d: usize,
    pub hadamards: Vec<HadamardMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyReport {
    pub d: usize,
    /// Number of bases, counting the implicit standard basis.
    pub bases: usize,
    pub passes: bool,
    pub max_hadamard_violation: Num17,
    pub max_unbiased_violation: Num17,
    pub worst_pair: Option<(usize, usize)>,
}

impl FamilyReport {
    pub fn max_violation(&self) -> f64 {
        self.max_hadamard_violation.0.max(self.max_unbiased_violation.0)
    }
}

impl MubFamily {
    pub fn new(d: usize, hadamards: Vec<HadamardMatrix>) -> Result<Self, HadamardError> {
        for h in &hadamards {
            if h.d() != d {
                return Err(HadamardError::DimensionMismatch(d, h.d()));
            }
        }
        Ok(MubFamily { d, hadamards })
    }

    pub fn bases(&self) -> usize {
        self.hadamards.len() + 1
    }

    pub fn verify(&self, eps: f64) -> Result<FamilyReport, HadamardError> {
        let mut had = 0.0f64;
        for h in &self.hadamards {
            had = had.max(is_hadamard(&h.0, eps)?.max_violation());
        }
        let mut unb = 0.0f64;
        let mut worst = None;
        for i in 0..self.hadamards.len() {
            for j in i + 1..self.hadamards.len() {
                let v = unbiased_pair_report(&self.hadamards[i], &self.hadamards[j], eps)?.max_violation();
                if v > unb || worst.is_none() {
                    unb = unb.max(v);
                    worst = Some((i, j));
                }
            }
        }
        Ok(FamilyReport {
            d: self.d,
            bases: self.bases(),
            passes: had <= eps && unb <= eps,
            max_hadamard_violation: Num17(had),
            max_unbiased_violation: Num17(unb),
            worst_pair: worst,
        })
    }

    /// Rescales rows (jointly) and columns (per matrix) so that every first
    /// row is all-ones and the first column of `H'_1` is all-ones. Both
    /// operations preserve all orthogonality and unbiasedness relations.
    pub fn normalized(&self) -> MubFamily {
        let Some(first) = self.hadamards.first() else {
            return self.clone();
        };
        let row_scale: Vec<Complex64> = (0..self.d).map(|r| first.0.get(r, 0).conj() / first.0.get(r, 0).norm()).collect();
        let hadamards = self
            .hadamards
            .iter()
            .map(|h| {
                let mut m = h.0.clone();
                for (r, &scale) in row_scale.iter().enumerate() {
                    for c in 0..self.d {
                        m.set(r, c, m.get(r, c) * scale);
                    }
                }
                for c in 0..self.d {
                    let s = m.get(0, c);
                    for r in 0..self.d {
                        m.set(r, c, m.get(r, c) / s);
                    }
                }
                HadamardMatrix(m)
            })
            .collect();
        MubFamily { d: self.d, hadamards }
    }

    /// All `m·d` columns, in matrix order.
    pub fn columns(&self) -> impl Iterator<Item = Vec<Complex64>> + '_ {
        self.hadamards.iter().flat_map(|h| (0..self.d).map(move |c| h.0.column(c)))
    }

    /// The columns as one `d × (m·d)` matrix.
    pub fn column_matrix(&self) -> ComplexMatrix {
        let cols: Vec<Vec<Complex64>> = self.columns().collect();
        ComplexMatrix::from_fn(self.d, cols.len(), |r, c| cols[c][r])
    }
}

/// Smallest `m <= max_m` such that every phase of the normalized family is
/// a multiple of `1/m` within `eps`.
pub fn detect_grid_order(family: &MubFamily, max_m: u32, eps: f64) -> Option<u32> {
    let norm = family.normalized();
    let phases: Vec<f64> = norm
        .hadamards
        .iter()
        .flat_map(|h| h.0.data.iter().map(|z| torus::wrap_unit(z.arg() / std::f64::consts::TAU)))
        .collect();
    (1..=max_m).find(|&m| snap_to_grid(&phases, m, eps).is_some())
}

/// Torus points `u_1, …, u_{md}` of the normalized family (`u_1 = 0`),
/// snapped to the `snap` grid when possible. Every pairwise difference is
/// checked to be orthogonal or unbiased.
pub fn family_to_points(
    family: &MubFamily,
    snap: Option<u32>,
    eps: f64,
) -> Result<Vec<TorusPoint>, HadamardError> {
    if family.hadamards.is_empty() {
        return Err(HadamardError::EmptyFamily);
    }
    let norm = family.normalized();
    let points = norm
        .columns()
        .map(|c| column_to_point(&c, snap, eps))
        .collect::<Result<Vec<_>, _>>()?;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let diff = torus::difference(&points[j], &points[i])?;
            let class = torus::classify_with(&diff, family.d, eps)?;
            if !class.is_allowed() {
                return Err(HadamardError::ForbiddenDifference(i, j, class));
            }
        }
    }
    Ok(points)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowQuotientReport {
    pub d: usize,
    /// `d(d-1)` quotient vectors plus the all-ones vector.
    pub vectors: usize,
    pub passes: bool,
    pub max_modulus_deviation: Num17,
    /// Largest `|<u, v>| / d²` over distinct vectors of the system.
    pub max_inner: Num17,
    pub worst: Option<(String, String)>,
}

/// Forms `r_{j/k} = r_j / r_k` for all ordered pairs of rows of a `d × d²`
/// unimodular matrix and checks that these `d(d-1)` vectors, together with
/// the all-ones vector, are pairwise orthogonal.
pub fn row_quotient_check(b: &ComplexMatrix, eps: f64) -> Result<RowQuotientReport, HadamardError> {
    let d = b.rows;
    if b.cols != d * d || d == 0 {
        return Err(HadamardError::Shape { expected_rows: d, expected_cols: d * d, rows: b.rows, cols: b.cols });
    }
    let mut modulus = 0.0f64;
    for r in 0..d {
        for c in 0..b.cols {
            let z = b.get(r, c);
            if z.norm() < 1e-12 {
                return Err(HadamardError::NearZeroEntry { row: r, col: c });
            }
            modulus = modulus.max((z.norm() - 1.0).abs());
        }
    }
    let n = b.cols;
    let mut labels = vec!["1".to_string()];
    let mut vecs = vec![vec![Complex64::new(1.0, 0.0); n]];
    for j in 0..d {
        for k in 0..d {
            if j != k {
                labels.push(format!("r{j}/r{k}"));
                vecs.push(b.row(j).iter().zip(b.row(k)).map(|(x, y)| x / y).collect());
            }
        }
    }
    let mut max_inner = 0.0f64;
    let mut worst = None;
    for i in 0..vecs.len() {
        for j in i + 1..vecs.len() {
            let v = inner(&vecs[i], &vecs[j]).norm() / n as f64;
            if v > max_inner {
                max_inner = v;
                worst = Some((labels[i].clone(), labels[j].clone()));
            }
        }
    }
    Ok(RowQuotientReport {
        d,
        vectors: vecs.len(),
        passes: modulus <= eps && max_inner <= eps,
        max_modulus_deviation: Num17(modulus),
        max_inner: Num17(max_inner),
        worst,
    })
}

/// JSON form of a matrix: `{d, entries: [[re, im], …]}` row-major. `cols`
/// is present only for non-square matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub entries: Vec<[Num17; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson {
            d: m.rows,
            cols: (m.cols != m.rows).then_some(m.cols),
            entries: m.data.iter().map(|z| [Num17(z.re), Num17(z.im)]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = HadamardError;

    fn try_from(j: MatrixJson) -> Result<Self, HadamardError> {
        let cols = j.cols.unwrap_or(j.d);
        ComplexMatrix::new(j.d, cols, j.entries.iter().map(|[re, im]| Complex64::new(re.0, im.0)).collect())
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Result<String, HadamardError> {
    Ok(crate::numfmt::to_json_pretty(&MatrixJson::from(m))?)
}

pub fn matrix_from_json(s: &str) -> Result<ComplexMatrix, HadamardError> {
    serde_json::from_str::<MatrixJson>(s)?.try_into()
}

/// CSV variant: one line per row, `re,im` pairs interleaved.
pub fn write_matrix_csv<W: Write>(m: &ComplexMatrix, mut w: W) -> io::Result<()> {
    for r in 0..m.rows {
        let fields: Vec<String> = m.row(r).iter().flat_map(|z| [fmt17(z.re), fmt17(z.im)]).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv<R: BufRead>(r: R) -> Result<ComplexMatrix, HadamardError> {
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| HadamardError::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() % 2 != 0 {
            return Err(HadamardError::Parse(format!("row {rows} has an odd number of fields")));
        }
        let c = vals.len() / 2;
        if *cols.get_or_insert(c) != c {
            return Err(HadamardError::Parse(format!("row {rows} has {c} entries")));
        }
        data.extend(vals.chunks(2).map(|p| Complex64::new(p[0], p[1])));
        rows += 1;
    }
    ComplexMatrix::new(rows, cols.unwrap_or(0), data)
}

/// Provenance attached to an exported family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub d: usize,
    /// Number of bases including the implicit standard basis.
    pub count: usize,
    pub construction: String,
    #[serde(default)]
    pub parameters: serde_json::Map<String, serde_json::Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFile {
    pub manifest: FamilyManifest,
    pub matrices: Vec<MatrixJson>,
}

impl FamilyFile {
    pub fn new(family: &MubFamily, construction: &str, parameters: serde_json::Map<String, serde_json::Value>) -> Self {
        FamilyFile {
            manifest: FamilyManifest {
                d: family.d,
                count: family.bases(),
                construction: construction.to_string(),
                parameters,
            },
            matrices: family.hadamards.iter().map(|h| MatrixJson::from(h.matrix())).collect(),
        }
    }

    /// Rebuilds the family; every matrix must be Hadamard within `eps`.
    pub fn to_family(&self, eps: f64) -> Result<MubFamily, HadamardError> {
        let hadamards = self
            .matrices
            .iter()
            .map(|m| HadamardMatrix::new(ComplexMatrix::try_from(m.clone())?, eps))
            .collect::<Result<Vec<_>, _>>()?;
        if hadamards.len() + 1 != self.manifest.count {
            return Err(HadamardError::Parse(format!(
                "manifest count {} does not match {} matrices",
                self.manifest.count,
                hadamards.len()
            )));
        }
        MubFamily::new(self.manifest.d, hadamards)
    }
}
