//! Meromorphic arrays: the echelon arrays that parametrize harmonic maps and
//! the F₀-arrays that parametrize Grassmannian-valued ones.
//!
//! Column `j` of an array has a lead row `k`: entries above row `k` vanish.
//! Columns are stored in nondecreasing lead-row order, so the breakpoint
//! `d_{i}` is the number of columns whose lead row is below `i`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cxlinalg::{orthonormalize, CMatrix, Frame, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::ratfun::{MeroVector, C64};

/// Deterministic probe points for numerical independence and proportionality tests.
pub const PROBE_POINTS: [C64; 4] = [
    C64 { re: 0.61, im: 0.37 },
    C64 { re: -0.83, im: 1.13 },
    C64 { re: 1.27, im: -0.44 },
    C64 { re: -0.52, im: -1.71 },
];

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArrayColumn {
    pub lead_row: usize,
    /// One entry per row `0..r`.
    pub rows: Vec<MeroVector>,
}

/// An `r × J` meromorphic array in echelon form.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitonArray {
    n: usize,
    r: usize,
    columns: Vec<ArrayColumn>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    UnitonNumber,
    Shape,
    LeadRow,
    ColumnOrder,
    Echelon,
    Breakpoints,
    Independence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub row: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(r) = self.row {
            write!(f, " row {r}")?;
        }
        if let Some(c) = self.column {
            write!(f, " column {c}")?;
        }
        write!(f, ": {}", self.message)
    }
}

fn violation(kind: ViolationKind, row: Option<usize>, column: Option<usize>, message: impl Into<String>) -> Violation {
    Violation {
        kind,
        row,
        column,
        message: message.into(),
    }
}

/// Numerical rank of row-`row` entries of the given columns, maximized over probe points.
fn probe_rank(n: usize, vecs: &[&MeroVector]) -> usize {
    PROBE_POINTS
        .iter()
        .filter_map(|&z| {
            let vals: Result<Vec<Vec<C64>>> = vecs.iter().map(|v| v.eval(z)).collect();
            vals.ok()
                .and_then(|vals| orthonormalize(n, &vals, DEFAULT_RANK_TOL).ok())
                .map(|f| f.rank())
        })
        .max()
        .unwrap_or(0)
}

impl UnitonArray {
    /// Assembles an array; only shapes are checked here, see [`UnitonArray::validate`].
    pub fn new(n: usize, r: usize, columns: Vec<ArrayColumn>) -> Result<Self> {
        for col in &columns {
            if col.rows.len() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    found: col.rows.len(),
                });
            }
            if let Some(v) = col.rows.iter().find(|v| v.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(UnitonArray { n, r, columns })
    }

    /// The array with no rows: its map is the constant left factor.
    pub fn empty(n: usize) -> Self {
        UnitonArray {
            n,
            r: 0,
            columns: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn columns(&self) -> &[ArrayColumn] {
        &self.columns
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn entry(&self, row: usize, column: usize) -> &MeroVector {
        &self.columns[column].rows[row]
    }

    /// `(d_1, …, d_r)`: `d_i` counts the columns with lead row below `i`.
    pub fn breakpoints(&self) -> Vec<usize> {
        (1..=self.r)
            .map(|i| self.columns.iter().filter(|c| c.lead_row < i).count())
            .collect()
    }

    /// Every invariant violation; empty iff the array is valid.
    pub fn validate(&self) -> Vec<Violation> {
        use ViolationKind::*;
        let mut out = Vec::new();
        if self.r > 0 && self.r + 1 > self.n {
            out.push(violation(
                UnitonNumber,
                None,
                None,
                format!("uniton number {} exceeds n - 1 = {}", self.r, self.n.saturating_sub(1)),
            ));
        }
        for (j, col) in self.columns.iter().enumerate() {
            if col.rows.len() != self.r {
                out.push(violation(
                    Shape,
                    None,
                    Some(j),
                    format!("{} rows, expected {}", col.rows.len(), self.r),
                ));
                continue;
            }
            for (i, v) in col.rows.iter().enumerate() {
                if v.len() != self.n {
                    out.push(violation(
                        Shape,
                        Some(i),
                        Some(j),
                        format!("vector of length {}, expected {}", v.len(), self.n),
                    ));
                }
            }
            if col.lead_row >= self.r {
                out.push(violation(
                    LeadRow,
                    None,
                    Some(j),
                    format!("lead row {} outside 0..{}", col.lead_row, self.r),
                ));
                continue;
            }
            if j > 0 && col.lead_row < self.columns[j - 1].lead_row {
                out.push(violation(ColumnOrder, None, Some(j), "lead rows must be nondecreasing"));
            }
            for i in 0..col.lead_row {
                if !col.rows[i].is_zero() {
                    out.push(violation(
                        Echelon,
                        Some(i),
                        Some(j),
                        format!("nonzero entry above lead row {}", col.lead_row),
                    ));
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        if self.columns.len() > self.n {
            out.push(violation(
                Breakpoints,
                None,
                None,
                format!("d_r = {} exceeds n = {}", self.columns.len(), self.n),
            ));
        }
        for k in 0..self.r {
            let block: Vec<&MeroVector> = self
                .columns
                .iter()
                .filter(|c| c.lead_row == k)
                .map(|c| &c.rows[k])
                .collect();
            if block.is_empty() {
                continue;
            }
            let rank = probe_rank(self.n, &block);
            if rank < block.len() {
                out.push(violation(
                    Independence,
                    Some(k),
                    None,
                    format!("{} columns with lead row {k} have rank {rank} in row {k}", block.len()),
                ));
            }
        }
        out
    }

    /// Entries of column `j` evaluated at `z`.
    pub fn eval_column(&self, j: usize, z: C64) -> Result<Vec<Vec<C64>>> {
        self.columns[j].rows.iter().map(|v| v.eval(z)).collect()
    }
}

/// Eliminates component `comp` of row `row` of `w` using a pivot column.
fn reduce_column(w: &mut [MeroVector], pivot: &[MeroVector], row: usize, comp: usize) {
    let a = &w[row].entries()[comp];
    if a.is_zero() {
        return;
    }
    let b = &pivot[row].entries()[comp];
    let coef = a.div(b).expect("pivot entry is nonzero");
    for (wi, pi) in w.iter_mut().zip(pivot) {
        *wi = wi.sub(&pi.scale_by(&coef));
    }
}

/// Column reduction over ℂ(z) to echelon form.
///
/// Rows are processed top to bottom. At row `i` the remaining columns are
/// scanned left to right; a column whose row-`i` entry is independent of the
/// pivots found so far becomes a column with lead row `i` and is kept as given,
/// the others are replaced by their reduction against the pivots and passed on
/// to the next row. Columns that reduce to zero are dropped.
pub fn to_echelon(n: usize, r: usize, raw: &[Vec<MeroVector>]) -> Result<UnitonArray> {
    for col in raw {
        if col.len() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: col.len(),
            });
        }
        if let Some(v) = col.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let mut remaining: Vec<Vec<MeroVector>> = raw.iter().filter(|c| c.iter().any(|v| !v.is_zero())).cloned().collect();
    let mut columns = Vec::new();
    for i in 0..r {
        // Reduced pivot copies and their pivot component.
        let mut pivots: Vec<(Vec<MeroVector>, usize)> = Vec::new();
        let mut next = Vec::new();
        for col in remaining {
            let mut w = col.clone();
            for (p, q) in &pivots {
                reduce_column(&mut w, p, i, *q);
            }
            match w[i].entries().iter().position(|e| !e.is_zero()) {
                Some(q) => {
                    pivots.push((w, q));
                    columns.push(ArrayColumn { lead_row: i, rows: col });
                }
                None => {
                    if w.iter().any(|v| !v.is_zero()) {
                        next.push(w);
                    }
                }
            }
        }
        remaining = next;
    }
    UnitonArray::new(n, r, columns)
}

/// True when `b = c·a` for a constant `c`, tested at the probe points.
fn constant_multiple(a: &MeroVector, b: &MeroVector) -> bool {
    if b.is_zero() {
        return true;
    }
    let mut ratio: Option<C64> = None;
    let mut tested = 0;
    for &z in &PROBE_POINTS {
        let (Ok(av), Ok(bv)) = (a.eval(z), b.eval(z)) else {
            continue;
        };
        let aa: f64 = av.iter().map(|x| x.norm_sqr()).sum();
        if aa == 0.0 {
            continue;
        }
        let c: C64 = av.iter().zip(&bv).map(|(x, y)| x.conj() * y).sum::<C64>() / aa;
        let resid: f64 = av
            .iter()
            .zip(&bv)
            .map(|(x, y)| (y - c * x).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = aa.sqrt() + bv.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if resid > 1e-9 * scale {
            return false;
        }
        if let Some(c0) = ratio {
            if (c - c0).norm() > 1e-9 * (1.0 + c0.norm()) {
                return false;
            }
        }
        ratio = Some(c);
        tested += 1;
    }
    tested > 0
}

/// True when the array is diagonal, either literally or after the pattern in
/// which each entry below a lead entry is a constant multiple of it.
pub fn is_diagonal(arr: &UnitonArray) -> bool {
    let Ok(ech) = to_echelon(
        arr.n,
        arr.r,
        &arr.columns.iter().map(|c| c.rows.clone()).collect::<Vec<_>>(),
    ) else {
        return false;
    };
    ech.columns.iter().all(|col| {
        let lead = &col.rows[col.lead_row];
        col.rows[col.lead_row + 1..].iter().all(|v| constant_multiple(lead, v))
    })
}

/// Constant unitary matrix multiplying the harmonic map on the left.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantLeftFactor {
    matrix: CMatrix,
}

impl ConstantLeftFactor {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let dev = (&(&matrix * &matrix.adjoint()) - &CMatrix::identity(matrix.rows())).norm_fro();
        if dev >= 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        Ok(ConstantLeftFactor { matrix })
    }

    pub fn identity(n: usize) -> Self {
        ConstantLeftFactor {
            matrix: CMatrix::identity(n),
        }
    }

    /// `π_{F₀} − π_{F₀}^⊥`
    pub fn from_subspace(f0: &Frame) -> Self {
        let p = f0.projector();
        ConstantLeftFactor {
            matrix: &p.scale(C64::new(2.0, 0.0)) - &CMatrix::identity(f0.ambient_dim()),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }
}

/// An `r`-row F₀-array: each column alternates between F₀ and F₀^⊥ down its rows.
#[derive(Clone, Debug, PartialEq)]
pub struct FZeroArray {
    n: usize,
    r: usize,
    f0: Frame,
    columns: Vec<Vec<MeroVector>>,
}

impl FZeroArray {
    pub fn new(n: usize, r: usize, f0: Frame, columns: Vec<Vec<MeroVector>>) -> Result<Self> {
        if f0.ambient_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f0.ambient_dim(),
            });
        }
        for col in &columns {
            if col.len() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    found: col.len(),
                });
            }
            if let Some(v) = col.iter().find(|v| v.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(FZeroArray { n, r, f0, columns })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn f0(&self) -> &Frame {
        &self.f0
    }

    pub fn columns(&self) -> &[Vec<MeroVector>] {
        &self.columns
    }

    /// Index of the first nonzero entry of column `j`.
    pub fn lead_row(&self, j: usize) -> Option<usize> {
        self.columns[j].iter().position(|v| !v.is_zero())
    }

    /// Checks the alternation condition column by column.
    pub fn validate(&self) -> Result<()> {
        let p = self.f0.projector();
        let q = p.complement();
        for (j, col) in self.columns.iter().enumerate() {
            // Parity 0: even rows in F₀; parity 1: even rows in F₀^⊥.
            let fits = |parity: usize| -> Option<usize> {
                col.iter().enumerate().position(|(i, v)| {
                    let off = if (i + parity).is_multiple_of(2) { &q } else { &p };
                    let img = v.transform(off);
                    img.magnitude() > 1e-10 * (1.0 + v.magnitude())
                })
            };
            if let (Some(a), Some(b)) = (fits(0), fits(1)) {
                return Err(Error::AlternationViolation {
                    column: j,
                    row: a.max(b),
                });
            }
        }
        Ok(())
    }
}

/// The Grassmannian construction: `H_{0,j} = K_{0,j}` and
/// `H_{i,j} = Σ_{s=1}^{i} (−1)^{s+i} C(i−1, s−1) K_{s,j}`, with left factor
/// `π_{F₀} − π_{F₀}^⊥`.
pub fn from_f0(karr: &FZeroArray) -> Result<(ConstantLeftFactor, UnitonArray)> {
    karr.validate()?;
    let raw: Vec<Vec<MeroVector>> = karr
        .columns
        .iter()
        .map(|col| {
            (0..karr.r)
                .map(|i| {
                    if i == 0 {
                        return col[0].clone();
                    }
                    (1..=i).fold(MeroVector::zeros(karr.n), |acc, s| {
                        let sign = if (s + i) % 2 == 0 { 1.0 } else { -1.0 };
                        acc.add(&col[s].scale(C64::new(sign * binomial(i - 1, s - 1), 0.0)))
                    })
                })
                .collect()
        })
        .collect();
    let arr = to_echelon(karr.n, karr.r, &raw)?;
    Ok((ConstantLeftFactor::from_subspace(&karr.f0), arr))
}

type Pair = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lead_row: Option<usize>,
    pub rows: Vec<MeroVector>,
}

/// On-disk form of an array, optionally with a left factor and an F₀ basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayFile {
    pub n: usize,
    pub r: usize,
    pub columns: Vec<ColumnFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_factor: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0_basis: Option<Vec<Vec<Pair>>>,
}

fn pairs_to_vec(v: &[Pair]) -> Result<Vec<C64>> {
    if v.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("non-finite matrix entry".into()));
    }
    Ok(v.iter().map(|&[re, im]| C64::new(re, im)).collect())
}

fn vec_to_pairs(v: &[C64]) -> Vec<Pair> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

impl ArrayFile {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("array files serialize")
    }

    /// Columns padded to `r` rows. A column listing `r − lead_row` rows is
    /// read as starting at its lead row.
    fn full_columns(&self) -> Result<Vec<(Option<usize>, Vec<MeroVector>)>> {
        self.columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let rows = if c.rows.len() == self.r {
                    c.rows.clone()
                } else {
                    match c.lead_row {
                        Some(k) if k < self.r && c.rows.len() == self.r - k => {
                            let mut rows = vec![MeroVector::zeros(self.n); k];
                            rows.extend(c.rows.iter().cloned());
                            rows
                        }
                        _ => {
                            return Err(Error::Invalid(format!(
                                "column {j} has {} rows, expected {}",
                                c.rows.len(),
                                self.r
                            )))
                        }
                    }
                };
                if let Some(v) = rows.iter().find(|v| v.len() != self.n) {
                    return Err(Error::Invalid(format!(
                        "column {j} has a vector of length {}, expected {}",
                        v.len(),
                        self.n
                    )));
                }
                Ok((c.lead_row, rows))
            })
            .collect()
    }

    /// The array as written. Missing lead rows are taken as the first nonzero row.
    pub fn to_array(&self) -> Result<UnitonArray> {
        let columns = self
            .full_columns()?
            .into_iter()
            .map(|(lead, rows)| {
                let lead_row = lead.unwrap_or_else(|| rows.iter().position(|v| !v.is_zero()).unwrap_or(0));
                ArrayColumn { lead_row, rows }
            })
            .collect();
        UnitonArray::new(self.n, self.r, columns)
    }

    pub fn f0_frame(&self) -> Result<Option<Frame>> {
        let Some(basis) = &self.f0_basis else {
            return Ok(None);
        };
        let vecs = basis.iter().map(|v| pairs_to_vec(v)).collect::<Result<Vec<_>>>()?;
        let frame = orthonormalize(self.n, &vecs, DEFAULT_RANK_TOL)?;
        Ok(Some(frame))
    }

    /// Explicit left factor, else `π_{F₀} − π_{F₀}^⊥` when an F₀ basis is given, else the identity.
    pub fn left_factor(&self) -> Result<ConstantLeftFactor> {
        if let Some(rows) = &self.left_factor {
            let rows = rows.iter().map(|r| pairs_to_vec(r)).collect::<Result<Vec<_>>>()?;
            let m = CMatrix::from_rows(&rows)?;
            if m.rows() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: m.rows(),
                });
            }
            return ConstantLeftFactor::new(m);
        }
        Ok(match self.f0_frame()? {
            Some(f) => ConstantLeftFactor::from_subspace(&f),
            None => ConstantLeftFactor::identity(self.n),
        })
    }

    pub fn to_f0_array(&self) -> Result<FZeroArray> {
        let frame = self
            .f0_frame()?
            .ok_or_else(|| Error::Invalid("F0-array file needs an f0_basis".into()))?;
        let columns = self.full_columns()?.into_iter().map(|(_, rows)| rows).collect();
        FZeroArray::new(self.n, self.r, frame, columns)
    }

    pub fn from_array(arr: &UnitonArray, left: Option<&ConstantLeftFactor>, f0: Option<&Frame>) -> Self {
        ArrayFile {
            n: arr.n,
            r: arr.r,
            columns: arr
                .columns
                .iter()
                .map(|c| ColumnFile {
                    lead_row: Some(c.lead_row),
                    rows: c.rows.clone(),
                })
                .collect(),
            left_factor: left.map(|q| q.matrix().to_rows().iter().map(|r| vec_to_pairs(r)).collect()),
            f0_basis: f0.map(|f| f.vectors().iter().map(|v| vec_to_pairs(v)).collect()),
        }
    }

    pub fn from_f0_array(karr: &FZeroArray) -> Self {
        ArrayFile {
            n: karr.n,
            r: karr.r,
            columns: karr
                .columns
                .iter()
                .map(|rows| ColumnFile {
                    lead_row: None,
                    rows: rows.clone(),
                })
                .collect(),
            left_factor: None,
            f0_basis: Some(karr.f0.vectors().iter().map(|v| vec_to_pairs(v)).collect()),
        }
    }
}

/// The companion of a diagonal array in which the entry of row `i > k` of a
/// column with lead row `k` is `a(i, j) · H_{k,j}`. Companion and original
/// produce the same map.
pub fn diagonal_companion(arr: &UnitonArray, a: impl Fn(usize, usize) -> C64) -> UnitonArray {
    let columns = arr
        .columns
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let lead = col.rows[col.lead_row].clone();
            let rows = (0..arr.r)
                .map(|i| match i.cmp(&col.lead_row) {
                    std::cmp::Ordering::Less => MeroVector::zeros(arr.n),
                    std::cmp::Ordering::Equal => lead.clone(),
                    std::cmp::Ordering::Greater => lead.scale(a(i, j)),
                })
                .collect();
            ArrayColumn {
                lead_row: col.lead_row,
                rows,
            }
        })
        .collect();
    UnitonArray {
        n: arr.n,
        r: arr.r,
        columns,
    }
}

/// Entrywise equality of two arrays as rational-function data.
pub fn structurally_equal(a: &UnitonArray, b: &UnitonArray, tol: f64) -> bool {
    a.n == b.n
        && a.r == b.r
        && a.columns.len() == b.columns.len()
        && a.columns
            .iter()
            .zip(&b.columns)
            .all(|(x, y)| x.lead_row == y.lead_row && x.rows.iter().zip(&y.rows).all(|(u, v)| u.approx_eq(v, tol)))
}
