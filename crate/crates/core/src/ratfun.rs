//! Arithmetic in the field ℂ(z) of complex rational functions.
//!
//! Every meromorphic function on the Riemann sphere is a rational function of
//! the affine coordinate `z`, so array entries are stored as reduced ratios of
//! complex polynomials. Invariants of [`ComplexRational`]:
//!
//! - the denominator is nonzero and monic,
//! - numerator and denominator share no common factor (to the GCD tolerance),
//! - the zero function is `0 / 1`.
//!
//! Coefficients are double precision, so cancellation is handled by chopping
//! coefficients that fall below [`CANCEL_TOL`] relative to the magnitude of the
//! terms that produced them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cxlinalg::CMatrix;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative threshold below which a coefficient produced by cancellation is zero.
pub const CANCEL_TOL: f64 = 1e-12;

/// `|den(z)|` below this value is reported as a pole.
pub const POLE_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A polynomial with complex coefficients, ascending in `z`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexPoly {
    coeffs: Vec<C64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        ComplexPoly { coeffs }
    }

    pub fn zero() -> Self {
        ComplexPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// `c · z^k`
    pub fn monomial(c: C64, k: usize) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Sets every coefficient with modulus at most `threshold` to zero.
    fn chop(mut self, threshold: f64) -> Self {
        for c in self.coeffs.iter_mut() {
            if c.norm() <= threshold {
                *c = ZERO;
            }
        }
        Self::new(self.coeffs)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or(ZERO);
                let b = other.coeffs.get(k).copied().unwrap_or(ZERO);
                a + b * sign
            })
            .collect();
        let scale = self.max_abs().max(other.max_abs());
        Self::new(coeffs).chop(CANCEL_TOL * scale)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(coeffs)
    }

    /// Euclidean division: `self = q · d + r` with `deg r < deg d`.
    /// The remainder is chopped relative to the size of the subtracted terms.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let lead = d.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![ZERO; rem.len() - dd];
        let mut scale = self.max_abs();
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &c) in d.coeffs.iter().enumerate() {
                let term = q * c;
                scale = scale.max(term.norm());
                rem[k + j] -= term;
            }
            rem[k + dd] = ZERO;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem).chop(CANCEL_TOL * scale)))
    }

    /// Divides by the leading coefficient. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(ONE / self.leading())
    }

    fn normalized(&self) -> Self {
        let m = self.max_abs();
        if m == 0.0 {
            return self.clone();
        }
        self.scale(C64::new(1.0 / m, 0.0))
    }
}

/// Monic greatest common divisor by the Euclidean algorithm.
///
/// A remainder is declared zero when all its coefficients are below
/// [`CANCEL_TOL`] relative to the terms of the division step. Near-common
/// factors lost to rounding are left in place, so reduction is exact where it
/// happens and may be incomplete for badly conditioned inputs.
pub fn poly_gcd(a: &ComplexPoly, b: &ComplexPoly) -> ComplexPoly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let (mut u, mut v) = (a.normalized(), b.normalized());
    if u.degree() < v.degree() {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        if v.degree() == Some(0) {
            return ComplexPoly::one();
        }
        let (_, r) = u.div_rem(&v).expect("nonzero divisor");
        if r.is_zero() {
            return v.monic();
        }
        u = v;
        v = r.normalized();
    }
}

/// A reduced element of ℂ(z) with monic denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexRational {
    num: ComplexPoly,
    den: ComplexPoly,
}

impl ComplexRational {
    /// Builds `num / den` in reduced form.
    pub fn new(num: ComplexPoly, den: ComplexPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: ComplexPoly, den: ComplexPoly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let (mut num, mut den) = (num, den);
        let g = poly_gcd(&num, &den);
        if g.degree().unwrap_or(0) > 0 {
            let (qn, rn) = num.div_rem(&g).expect("nonzero gcd");
            let (qd, rd) = den.div_rem(&g).expect("nonzero gcd");
            // The chopped remainders are zero exactly when g divides both.
            if rn.is_zero() && rd.is_zero() && !qd.is_zero() {
                num = qn;
                den = qd;
            }
        }
        let lead = den.leading();
        ComplexRational {
            num: num.scale(ONE / lead),
            den: den.monic(),
        }
    }

    pub fn zero() -> Self {
        ComplexRational {
            num: ComplexPoly::zero(),
            den: ComplexPoly::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: C64) -> Self {
        Self::from_poly(ComplexPoly::constant(c))
    }

    pub fn from_poly(p: ComplexPoly) -> Self {
        ComplexRational {
            num: p,
            den: ComplexPoly::one(),
        }
    }

    /// Polynomial with the given ascending coefficients.
    pub fn poly(coeffs: &[C64]) -> Self {
        Self::from_poly(ComplexPoly::new(coeffs.to_vec()))
    }

    pub fn num(&self) -> &ComplexPoly {
        &self.num
    }

    pub fn den(&self) -> &ComplexPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the function is a constant (possibly zero).
    pub fn is_constant(&self) -> bool {
        self.num.degree().unwrap_or(0) == 0 && self.den.degree() == Some(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        if self.den == other.den {
            let num = self.num.combine(&other.num, sign);
            return Self::reduce(num, self.den.clone());
        }
        let num = self.num.mul(&other.den).combine(&other.num.mul(&self.den), sign);
        Self::reduce(num, self.den.mul(&other.den))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::reduce(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(self.num.mul(&other.den), self.den.mul(&other.num)))
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zero();
        }
        ComplexRational {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Exact d/dz by the quotient rule.
    pub fn derivative(&self) -> Self {
        if self.den.degree() == Some(0) {
            return Self::from_poly(self.num.derivative());
        }
        let num = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        Self::reduce(num, self.den.mul(&self.den))
    }

    /// `k`-th derivative.
    pub fn nth_derivative(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |f, _| f.derivative())
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        let d = self.den.eval(z);
        if d.norm() < POLE_TOL {
            return Err(Error::PoleAtPoint { z });
        }
        Ok(self.num.eval(z) / d)
    }

    /// Equality as functions, tested by cross multiplication relative to `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let a = self.num.mul(&other.den);
        let b = other.num.mul(&self.den);
        let scale = a.max_abs().max(b.max_abs());
        let diff = a.sub(&b);
        diff.max_abs() <= tol * scale.max(f64::MIN_POSITIVE)
    }

    /// Largest coefficient modulus of the numerator.
    pub fn magnitude(&self) -> f64 {
        self.num.max_abs()
    }
}

impl fmt::Display for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})z"),
                _ => format!("({c})z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "[{}] / [{}]", self.num, self.den)
        }
    }
}

impl Add for &ComplexRational {
    type Output = ComplexRational;
    fn add(self, rhs: Self) -> ComplexRational {
        ComplexRational::add(self, rhs)
    }
}

impl Sub for &ComplexRational {
    type Output = ComplexRational;
    fn sub(self, rhs: Self) -> ComplexRational {
        ComplexRational::sub(self, rhs)
    }
}

impl Mul for &ComplexRational {
    type Output = ComplexRational;
    fn mul(self, rhs: Self) -> ComplexRational {
        ComplexRational::mul(self, rhs)
    }
}

impl Neg for &ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        self.scale(-ONE)
    }
}

#[derive(Serialize, Deserialize)]
struct RawRational {
    num: Vec<[f64; 2]>,
    den: Vec<[f64; 2]>,
}

fn to_pairs(p: &ComplexPoly) -> Vec<[f64; 2]> {
    p.coeffs.iter().map(|c| [c.re, c.im]).collect()
}

fn from_pairs(v: &[[f64; 2]]) -> std::result::Result<ComplexPoly, String> {
    if v.iter().flatten().any(|x| !x.is_finite()) {
        return Err("non-finite coefficient".into());
    }
    Ok(ComplexPoly::new(v.iter().map(|&[re, im]| C64::new(re, im)).collect()))
}

impl Serialize for ComplexRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawRational {
            num: to_pairs(&self.num),
            den: to_pairs(&self.den),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawRational::deserialize(d)?;
        let num = from_pairs(&raw.num).map_err(D::Error::custom)?;
        let den = from_pairs(&raw.den).map_err(D::Error::custom)?;
        ComplexRational::new(num, den).map_err(D::Error::custom)
    }
}

/// A ℂⁿ-valued meromorphic function: `n` rational entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeroVector(Vec<ComplexRational>);

impl MeroVector {
    pub fn new(entries: Vec<ComplexRational>) -> Self {
        MeroVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        MeroVector(vec![ComplexRational::zero(); n])
    }

    /// Vector of polynomials, one ascending coefficient list per entry.
    pub fn from_polys(polys: &[&[C64]]) -> Self {
        MeroVector(polys.iter().map(|c| ComplexRational::poly(c)).collect())
    }

    /// Constant vector.
    pub fn constant(v: &[C64]) -> Self {
        MeroVector(v.iter().map(|&c| ComplexRational::constant(c)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[ComplexRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(ComplexRational::is_zero)
    }

    pub fn eval(&self, z: C64) -> Result<Vec<C64>> {
        self.0.iter().map(|f| f.eval(z)).collect()
    }

    pub fn derivative(&self) -> Self {
        MeroVector(self.0.iter().map(ComplexRational::derivative).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        MeroVector(self.0.iter().zip(&other.0).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        MeroVector(self.0.iter().zip(&other.0).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn scale(&self, c: C64) -> Self {
        MeroVector(self.0.iter().map(|a| a.scale(c)).collect())
    }

    pub fn scale_by(&self, f: &ComplexRational) -> Self {
        MeroVector(self.0.iter().map(|a| a.mul(f)).collect())
    }

    /// Applies a constant matrix: `(M v)_r = Σ_c M[r][c] v_c`.
    pub fn transform(&self, m: &CMatrix) -> Self {
        MeroVector(
            (0..m.rows())
                .map(|r| (0..m.cols()).fold(ComplexRational::zero(), |acc, c| acc.add(&self.0[c].scale(m[(r, c)]))))
                .collect(),
        )
    }

    /// Entrywise equality as functions.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Largest numerator coefficient over all entries.
    pub fn magnitude(&self) -> f64 {
        self.0.iter().map(ComplexRational::magnitude).fold(0.0, f64::max)
    }
}
