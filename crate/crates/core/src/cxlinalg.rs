//! Dense complex matrices, rank-revealing orthonormalization and projectors.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};
use crate::ratfun::C64;

/// Default relative tolerance for discarding dependent candidates.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Width of the ambiguity band above the rank tolerance.
pub const AMBIGUITY_FACTOR: f64 = 100.0;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        CMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                found: bad.len(),
            });
        }
        Ok(CMatrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    pub fn diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }

    pub fn matadd(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn matsub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `I - self`, the complement of a projector.
    pub fn complement(&self) -> Self {
        &Self::identity(self.rows) - self
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.norm_fro().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .expect("nonempty range");
            if a[(piv, col)].norm() <= 1e-14 * scale {
                return Err(Error::Singular);
            }
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let p = ONE / a[(col, col)];
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(i, j)] -= f * ac;
                    inv[(i, j)] -= f * ic;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on shape mismatch; use [`CMatrix::matmul`] for checked products.
impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: Self) -> CMatrix {
        self.matmul(rhs).expect("matrix shapes must agree")
    }
}

/// Panics on shape mismatch; use [`CMatrix::matadd`] for checked sums.
impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: Self) -> CMatrix {
        self.matadd(rhs).expect("matrix shapes must agree")
    }
}

/// Panics on shape mismatch; use [`CMatrix::matsub`] for checked differences.
impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: Self) -> CMatrix {
        self.matsub(rhs).expect("matrix shapes must agree")
    }
}

/// Hermitian inner product, conjugate-linear in the first argument.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `a - b`
pub fn vsub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + b`
pub fn vadd(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vscale(v: &[C64], c: C64) -> Vec<C64> {
    v.iter().map(|x| x * c).collect()
}

/// Orthonormal vectors spanning a subspace of ℂⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    ambient_dim: usize,
    vectors: Vec<Vec<C64>>,
}

impl Frame {
    pub fn empty(ambient_dim: usize) -> Self {
        Frame {
            ambient_dim,
            vectors: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// Orthogonal projector `Σ v v*`.
    pub fn projector(&self) -> CMatrix {
        let n = self.ambient_dim;
        let mut p = CMatrix::zeros(n, n);
        for v in &self.vectors {
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        p
    }
}

/// Result of a rank-revealing orthonormalization.
#[derive(Clone, Debug)]
pub struct Orthonormalization {
    pub frame: Frame,
    /// Relative residuals of accepted candidates that fell in `[tol, 100·tol)`.
    pub ambiguous: Vec<f64>,
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// A candidate is accepted when its residual after projection onto the accepted
/// vectors has norm at least `tol·(1+‖candidate‖)`.
pub fn orthonormalize_report(ambient_dim: usize, spanning: &[Vec<C64>], tol: f64) -> Result<Orthonormalization> {
    let mut vectors: Vec<Vec<C64>> = Vec::new();
    let mut ambiguous = Vec::new();
    for v in spanning {
        if v.len() != ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                found: v.len(),
            });
        }
        if vectors.len() == ambient_dim {
            break;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &vectors {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let res = vnorm(&w);
        let rel = res / (1.0 + vnorm(v));
        if rel >= tol {
            if rel < AMBIGUITY_FACTOR * tol {
                ambiguous.push(rel);
            }
            vectors.push(vscale(&w, C64::new(1.0 / res, 0.0)));
        }
    }
    Ok(Orthonormalization {
        frame: Frame { ambient_dim, vectors },
        ambiguous,
    })
}

pub fn orthonormalize(ambient_dim: usize, spanning: &[Vec<C64>], tol: f64) -> Result<Frame> {
    orthonormalize_report(ambient_dim, spanning, tol).map(|o| o.frame)
}

pub fn projector(frame: &Frame) -> CMatrix {
    frame.projector()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn proj_checks(p: &CMatrix) {
        assert!((&(p * p) - p).norm_fro() < 1e-10);
        assert!((p - &p.adjoint()).norm_fro() < 1e-10);
    }

    #[test]
    fn orthonormalize_basic() {
        let f = orthonormalize(2, &[vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(2., 0.)]], 1e-9).unwrap();
        assert_eq!(f.vectors(), &[vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(1., 0.)]]);
        let f = orthonormalize(2, &[vec![c(1., 0.), c(0., 0.)], vec![c(1., 0.), c(0., 0.)]], 1e-9).unwrap();
        assert_eq!(f.rank(), 1);
    }

    #[test]
    fn dimension_mismatch() {
        let r = orthonormalize(3, &[vec![c(1., 0.)]], 1e-9);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
        assert!(CMatrix::zeros(2, 3).matmul(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn projector_examples() {
        assert_eq!(Frame::empty(3).projector(), CMatrix::zeros(3, 3));
        let f = orthonormalize(3, &[vec![c(1., 0.), c(0., 0.), c(0., 0.)]], 1e-9).unwrap();
        assert_eq!(f.projector(), CMatrix::diag(&[c(1., 0.), c(0., 0.), c(0., 0.)]));
        let s = 1.0 / 2f64.sqrt();
        let f = orthonormalize(2, &[vec![c(s, 0.), c(0., s)]], 1e-9).unwrap();
        let expected = CMatrix::from_rows(&[vec![c(0.5, 0.), c(0., -0.5)], vec![c(0., 0.5), c(0.5, 0.)]]).unwrap();
        assert!((&f.projector() - &expected).norm_fro() < 1e-15);
    }

    #[test]
    fn matrix_basics() {
        let a = CMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64 - 1.0));
        assert_eq!(a.adjoint().adjoint(), a);
        assert_eq!(&CMatrix::identity(2) * &a, a);
        assert_eq!(CMatrix::diag(&[c(3., 0.), c(4., 0.)]).norm_fro(), 5.0);
    }

    #[test]
    fn inverse_of_random_matrix() {
        let a = CMatrix::from_fn(4, 4, |i, j| {
            c((i * 3 + j) as f64 * 0.37 % 1.3, (i + 2 * j) as f64 * 0.71 % 0.9)
                + if i == j { c(2., 0.) } else { c(0., 0.) }
        });
        let inv = a.inverse().unwrap();
        assert!((&(&a * &inv) - &CMatrix::identity(4)).norm_fro() < 1e-12);
        assert_eq!(CMatrix::zeros(2, 2).inverse(), Err(Error::Singular));
    }

    fn cvec(n: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b)), n)
    }

    proptest! {
        #[test]
        fn frames_are_orthonormal(vs in prop::collection::vec(cvec(4), 1..6)) {
            let f = orthonormalize(4, &vs, 1e-9).unwrap();
            for (i, a) in f.vectors().iter().enumerate() {
                for (j, b) in f.vectors().iter().enumerate() {
                    let g = dot(a, b);
                    let e = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((g - e).norm() < 1e-10);
                }
            }
            proj_checks(&f.projector());
            prop_assert!((f.projector().trace().re - f.rank() as f64).abs() < 1e-10);
        }

        #[test]
        fn span_idempotent(vs in prop::collection::vec(cvec(4), 1..5)) {
            let f = orthonormalize(4, &vs, 1e-9).unwrap();
            let g = orthonormalize(4, f.vectors(), 1e-9).unwrap();
            prop_assert!((&f.projector() - &g.projector()).norm_fro() < 1e-10);
        }

        #[test]
        fn rank_monotone(vs in prop::collection::vec(cvec(3), 1..5), extra in cvec(3)) {
            let f = orthonormalize(3, &vs, 1e-9).unwrap();
            let mut more = vs.clone();
            more.push(extra);
            prop_assert!(orthonormalize(3, &more, 1e-9).unwrap().rank() >= f.rank());
        }
    }
}
