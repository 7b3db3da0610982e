//! Pointwise construction of the uniton chain and the harmonic map.
//!
//! For an echelon array `ℋ = (H_{i,j})` the subbundle `α_{i+1}` is spanned by
//!
//! ```text
//! α^{(k)}_{i+1,j} = Σ_{s=k}^{i} C^i_s H^{(k)}_{s−k,j},   0 ≤ k ≤ i,
//! ```
//!
//! where `C^i_s` is the `s`-th elementary function of `π₁^⊥, …, π_i^⊥`. The map is
//! `φ = Q (π₁ − π₁^⊥) ⋯ (π_r − π_r^⊥)` and its extended solution is
//! `Φ_λ = Π (π_i + λ π_i^⊥)`, so that `Φ_{−1} = φ` when `Q = Id`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::cxlinalg::{orthonormalize_report, CMatrix, Frame, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::ratfun::{MeroVector, C64};
use crate::uniton_array::{ConstantLeftFactor, UnitonArray};

/// Coefficients with Frobenius norm below this are not stored.
pub const PRUNE_TOL: f64 = 1e-14;

/// `C^i_s` on ℂⁿ for `i = complements.len()`, by `C^i_s = C^{i−1}_s + π_i^⊥ C^{i−1}_{s−1}`.
pub fn c_elementary(n: usize, complements: &[CMatrix], s: usize) -> Result<CMatrix> {
    let i = complements.len();
    if s > i {
        return Err(Error::IndexOutOfRange(format!("C^{i}_{s} needs s <= {i}")));
    }
    Ok(elementary_table(n, complements).swap_remove(s))
}

/// `[C^i_0, …, C^i_i]` for `i = complements.len()`.
pub fn elementary_table(n: usize, complements: &[CMatrix]) -> Vec<CMatrix> {
    let mut table = vec![CMatrix::identity(n)];
    for pc in complements {
        let mut next = Vec::with_capacity(table.len() + 1);
        next.push(CMatrix::identity(n));
        for s in 1..table.len() {
            next.push(&table[s] + &(pc * &table[s - 1]));
        }
        next.push(pc * table.last().expect("nonempty table"));
        table = next;
    }
    table
}

/// The uniton chain `α₁(z), …, α_r(z)` with cached projectors.
#[derive(Clone, Debug)]
pub struct ProjectionChain {
    z: C64,
    n: usize,
    frames: Vec<Frame>,
    projectors: Vec<CMatrix>,
    complements: Vec<CMatrix>,
}

impl ProjectionChain {
    pub fn empty(n: usize, z: C64) -> Self {
        ProjectionChain {
            z,
            n,
            frames: Vec::new(),
            projectors: Vec::new(),
            complements: Vec::new(),
        }
    }

    fn push(&mut self, frame: Frame) {
        let p = frame.projector();
        self.complements.push(p.complement());
        self.projectors.push(p);
        self.frames.push(frame);
    }

    /// A chain given directly by subspace frames; used for controls and comparisons.
    pub fn from_frames(z: C64, n: usize, frames: Vec<Frame>) -> Self {
        let mut chain = Self::empty(n, z);
        for f in frames {
            chain.push(f);
        }
        chain
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// `π_i` for `i` in `1..=r`.
    pub fn pi(&self, i: usize) -> &CMatrix {
        &self.projectors[i - 1]
    }

    /// `π_i^⊥` for `i` in `1..=r`.
    pub fn pi_perp(&self, i: usize) -> &CMatrix {
        &self.complements[i - 1]
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn complements(&self) -> &[CMatrix] {
        &self.complements
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.frames.iter().map(Frame::rank).collect()
    }

    /// The first `r'` unitons.
    pub fn truncated(&self, r: usize) -> Self {
        ProjectionChain {
            z: self.z,
            n: self.n,
            frames: self.frames[..r].to_vec(),
            projectors: self.projectors[..r].to_vec(),
            complements: self.complements[..r].to_vec(),
        }
    }

    /// `[C^i_0, …, C^i_i]` built from the first `i` complements.
    pub fn elementary(&self, i: usize) -> Vec<CMatrix> {
        elementary_table(self.n, &self.complements[..i])
    }

    /// `(π₁ − π₁^⊥) ⋯ (π_r − π_r^⊥)`
    pub fn product(&self) -> CMatrix {
        self.projectors
            .iter()
            .zip(&self.complements)
            .fold(CMatrix::identity(self.n), |acc, (p, q)| &acc * &(p - q))
    }

    /// `Q (π₁ − π₁^⊥) ⋯ (π_r − π_r^⊥)`
    pub fn phi(&self, q: &ConstantLeftFactor) -> CMatrix {
        q.matrix() * &self.product()
    }

    /// `Φ_λ = Π_{i=1}^{r} (π_i + λ π_i^⊥)` by direct factor multiplication.
    pub fn extended_solution(&self) -> LaurentMatrix {
        self.projectors
            .iter()
            .zip(&self.complements)
            .fold(LaurentMatrix::identity(self.n), |acc, (p, q)| {
                acc.mul(&LaurentMatrix::from_pairs(self.n, &[(0, p.clone()), (1, q.clone())]))
            })
    }

    /// `Φ_λ` evaluated directly at one `λ`.
    pub fn extended_at(&self, lambda: C64) -> CMatrix {
        self.projectors
            .iter()
            .zip(&self.complements)
            .fold(CMatrix::identity(self.n), |acc, (p, q)| &acc * &(p + &q.scale(lambda)))
    }

    /// Largest Frobenius distance between corresponding projectors.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.r() != other.r() {
            return f64::INFINITY;
        }
        self.projectors
            .iter()
            .zip(&other.projectors)
            .map(|(a, b)| (a - b).norm_fro())
            .fold(0.0, f64::max)
    }
}

/// Derivative-cached view of an array, ready for pointwise evaluation.
#[derive(Clone, Debug)]
pub struct HarmonicBuilder {
    array: UnitonArray,
    /// `derivs[j][s][k] = H^{(k)}_{s,j}` for `s + k < r`.
    derivs: Vec<Vec<Vec<MeroVector>>>,
    tol: f64,
}

impl HarmonicBuilder {
    pub fn new(array: UnitonArray) -> Self {
        Self::with_tol(array, DEFAULT_RANK_TOL)
    }

    pub fn with_tol(array: UnitonArray, tol: f64) -> Self {
        let r = array.r();
        let derivs = array
            .columns()
            .iter()
            .map(|col| {
                col.rows
                    .iter()
                    .enumerate()
                    .map(|(s, h)| {
                        let mut ds = vec![h.clone()];
                        for _ in 1..r - s {
                            let next = ds.last().expect("nonempty").derivative();
                            ds.push(next);
                        }
                        ds
                    })
                    .collect()
            })
            .collect();
        HarmonicBuilder { array, derivs, tol }
    }

    pub fn array(&self) -> &UnitonArray {
        &self.array
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `H^{(k)}_{s,j}` as a function.
    pub fn derivative(&self, j: usize, s: usize, k: usize) -> &MeroVector {
        &self.derivs[j][s][k]
    }

    /// Values `H^{(k)}_{s,j}(z)` indexed `[j][s][k]`.
    pub fn eval_derivatives(&self, z: C64) -> Result<Vec<Vec<Vec<Vec<C64>>>>> {
        self.derivs
            .iter()
            .map(|col| col.iter().map(|ds| ds.iter().map(|d| d.eval(z)).collect()).collect())
            .collect()
    }

    fn span_from_values(&self, vals: &[Vec<Vec<Vec<C64>>>], i: usize, table: &[CMatrix]) -> Vec<Vec<C64>> {
        let n = self.array.n();
        let mut out = Vec::with_capacity((i + 1) * vals.len());
        for col in vals {
            for k in 0..=i {
                let mut v = vec![C64::new(0.0, 0.0); n];
                for s in k..=i {
                    let h = &col[s - k][k];
                    let w = table[s].mul_vec(h).expect("matching dimensions");
                    for (a, b) in v.iter_mut().zip(w) {
                        *a += b;
                    }
                }
                out.push(v);
            }
        }
        out
    }

    /// The `(i+1)·J` vectors spanning `α_{i+1}(z)` given `α₁, …, α_i`.
    pub fn alpha_span_vectors(&self, i: usize, z: C64, chain_so_far: &ProjectionChain) -> Result<Vec<Vec<C64>>> {
        if i >= self.array.r() || chain_so_far.r() < i {
            return Err(Error::IndexOutOfRange(format!(
                "alpha_{} from a chain of length {}",
                i + 1,
                chain_so_far.r()
            )));
        }
        let vals = self.eval_derivatives(z)?;
        let table = chain_so_far.elementary(i);
        Ok(self.span_from_values(&vals, i, &table))
    }

    /// Builds `α₁(z), …, α_r(z)` one after another.
    pub fn build_chain(&self, z: C64) -> Result<ProjectionChain> {
        let n = self.array.n();
        let vals = self.eval_derivatives(z)?;
        let mut chain = ProjectionChain::empty(n, z);
        for i in 0..self.array.r() {
            let table = chain.elementary(i);
            let span = self.span_from_values(&vals, i, &table);
            let ortho = orthonormalize_report(n, &span, self.tol)?;
            if let Some(&residual) = ortho.ambiguous.first() {
                return Err(Error::RankAmbiguous { index: i + 1, residual });
            }
            chain.push(ortho.frame);
        }
        Ok(chain)
    }

    pub fn evaluate_phi(&self, q: &ConstantLeftFactor, z: C64) -> Result<CMatrix> {
        Ok(self.build_chain(z)?.phi(q))
    }

    pub fn extended_solution(&self, z: C64) -> Result<LaurentMatrix> {
        Ok(self.build_chain(z)?.extended_solution())
    }
}

/// A Laurent polynomial in `λ` with `n × n` matrix coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentMatrix {
    n: usize,
    coeffs: BTreeMap<i32, CMatrix>,
}

impl LaurentMatrix {
    pub fn zero(n: usize) -> Self {
        LaurentMatrix {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_pairs(n, &[(0, CMatrix::identity(n))])
    }

    pub fn from_pairs(n: usize, pairs: &[(i32, CMatrix)]) -> Self {
        let mut m = Self::zero(n);
        for (k, c) in pairs {
            let entry = m.coeffs.entry(*k).or_insert_with(|| CMatrix::zeros(n, n));
            *entry = &*entry + c;
        }
        m.prune();
        m
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| c.norm_fro() >= PRUNE_TOL);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of `λ^k`, zero when not stored.
    pub fn coefficient(&self, k: i32) -> CMatrix {
        self.coeffs
            .get(&k)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.n, self.n))
    }

    pub fn support(&self) -> impl Iterator<Item = (i32, &CMatrix)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn eval(&self, lambda: C64) -> CMatrix {
        self.coeffs.iter().fold(CMatrix::zeros(self.n, self.n), |acc, (k, c)| {
            &acc + &c.scale(lambda.powi(*k))
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let e = out.entry(a + b).or_insert_with(|| CMatrix::zeros(self.n, self.n));
                *e = &*e + &(ca * cb);
            }
        }
        let mut m = LaurentMatrix { n: self.n, coeffs: out };
        m.prune();
        m
    }

    /// Coefficients of exponents `min_exp .. min_exp + N` from samples at the
    /// `N`-th roots of unity `λ_m = e^{2πim/N}`.
    pub fn from_unit_roots(samples: &[CMatrix], min_exp: i32) -> Self {
        let big_n = samples.len();
        let n = samples.first().map_or(0, CMatrix::rows);
        let mut m = Self::zero(n);
        for e in 0..big_n as i32 {
            let k = min_exp + e;
            let coeff = samples.iter().enumerate().fold(CMatrix::zeros(n, n), |acc, (idx, s)| {
                let ang = -2.0 * PI * (idx as f64) * (k as f64) / big_n as f64;
                &acc + &s.scale(C64::from_polar(1.0 / big_n as f64, ang))
            });
            m.coeffs.insert(k, coeff);
        }
        m.prune();
        m
    }

    /// Samples `f` at the `N`-th roots of unity and extracts coefficients of
    /// exponents `min_exp .. min_exp + N`.
    pub fn by_dft(n_samples: usize, min_exp: i32, f: impl Fn(C64) -> CMatrix) -> Self {
        let samples: Vec<CMatrix> = (0..n_samples)
            .map(|m| f(C64::from_polar(1.0, 2.0 * PI * m as f64 / n_samples as f64)))
            .collect();
        Self::from_unit_roots(&samples, min_exp)
    }

    /// Largest coefficient distance to another Laurent matrix.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|&k| (&self.coefficient(k) - &other.coefficient(k)).norm_fro())
            .fold(0.0, f64::max)
    }
}
