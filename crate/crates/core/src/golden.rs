//! Reference arrays: the standard shapes (single full column, two-row array,
//! F₀-arrays, diagonal and filled three-row arrays) plus seeded random arrays.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cxlinalg::{orthonormalize, CMatrix, Frame, DEFAULT_RANK_TOL};
use crate::error::Result;
use crate::ratfun::{ComplexPoly, ComplexRational, MeroVector, C64};
use crate::sampling::{random_subspace, random_vector};
use crate::uniton_array::{from_f0, ArrayColumn, ConstantLeftFactor, FZeroArray, UnitonArray};

/// Poles of random entries lie inside this disc, away from the sample annulus.
pub const POLE_RADIUS: f64 = 0.2;

#[derive(Clone, Debug)]
pub struct GoldenArray {
    pub name: String,
    pub array: UnitonArray,
    pub q: ConstantLeftFactor,
    pub f0: Option<FZeroArray>,
}

impl GoldenArray {
    fn plain(name: &str, array: UnitonArray) -> Self {
        let q = ConstantLeftFactor::identity(array.n());
        GoldenArray {
            name: name.into(),
            array,
            q,
            f0: None,
        }
    }

    fn from_f0(name: &str, karr: FZeroArray) -> Result<Self> {
        let (q, array) = from_f0(&karr)?;
        Ok(GoldenArray {
            name: name.into(),
            array,
            q,
            f0: Some(karr),
        })
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn poly_vector(rng: &mut impl Rng, n: usize, deg: usize) -> MeroVector {
    let coeffs: Vec<Vec<C64>> = (0..=deg).map(|_| random_vector(rng, n)).collect();
    let polys: Vec<Vec<C64>> = (0..n).map(|a| coeffs.iter().map(|v| v[a]).collect()).collect();
    let refs: Vec<&[C64]> = polys.iter().map(|p| p.as_slice()).collect();
    MeroVector::from_polys(&refs)
}

/// Polynomial entries of degree `deg`, about half of them divided by `z − p` with `|p| < POLE_RADIUS`.
fn mero_vector(rng: &mut impl Rng, n: usize, deg: usize) -> MeroVector {
    let base = poly_vector(rng, n, deg);
    let entries = base
        .entries()
        .iter()
        .map(|e| {
            if rng.gen_bool(0.5) {
                let p = C64::from_polar(POLE_RADIUS * rng.gen::<f64>(), std::f64::consts::TAU * rng.gen::<f64>());
                let den = ComplexPoly::new(vec![-p, c(1.0, 0.0)]);
                ComplexRational::new(e.num().clone(), den).expect("nonzero denominator")
            } else {
                e.clone()
            }
        })
        .collect();
    MeroVector::new(entries)
}

fn column(lead_row: usize, rows: Vec<MeroVector>) -> ArrayColumn {
    ArrayColumn { lead_row, rows }
}

fn axis_frame(n: usize, axes: &[usize]) -> Frame {
    let vs: Vec<Vec<C64>> = axes
        .iter()
        .map(|&a| (0..n).map(|b| c(if a == b { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    orthonormalize(n, &vs, DEFAULT_RANK_TOL).expect("axis vectors are independent")
}

/// One full column of length three in ℂ⁴: maximal uniton number.
pub fn single_column(seed: u64) -> GoldenArray {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = vec![
        poly_vector(&mut rng, 4, 3),
        poly_vector(&mut rng, 4, 2),
        poly_vector(&mut rng, 4, 2),
    ];
    let arr = UnitonArray::new(4, 3, vec![column(0, rows)]).expect("shape");
    GoldenArray::plain("single_column", arr)
}

/// Two rows, two columns with lead row 0, in ℂ⁵.
pub fn two_row(seed: u64) -> GoldenArray {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (0..2)
        .map(|_| column(0, vec![poly_vector(&mut rng, 5, 2), poly_vector(&mut rng, 5, 2)]))
        .collect();
    GoldenArray::plain("two_row", UnitonArray::new(5, 2, cols).expect("shape"))
}

/// The F₀-array `[L₀ E₀ 0; 0 0 L₁]` in ℂ⁷ with `F₀ = span{e₀, e₁, e₂}`.
pub fn grassmannian_two_row() -> GoldenArray {
    let n = 7;
    let zero = MeroVector::zeros(n);
    let o = c(1.0, 0.0);
    let z0 = c(0.0, 0.0);
    let l0 = MeroVector::from_polys(&[&[o], &[z0, o], &[z0, z0, o], &[], &[], &[], &[]]);
    let l1 = MeroVector::from_polys(&[&[z0, o], &[o], &[c(-1.0, 0.0), c(0.0, 1.0)], &[], &[], &[], &[]]);
    let e0 = MeroVector::from_polys(&[&[], &[], &[], &[o], &[z0, o], &[], &[c(2.0, 0.0), c(-1.0, 0.0)]]);
    let karr = FZeroArray::new(
        n,
        2,
        axis_frame(n, &[0, 1, 2]),
        vec![vec![l0, zero.clone()], vec![e0, zero.clone()], vec![zero, l1]],
    )
    .expect("alternating columns");
    GoldenArray::from_f0("grassmannian_two_row", karr).expect("valid F0-array")
}

/// Uniton number one with `F₀` splitting `α₁`: one column in `F₀`, one in `F₀^⊥`.
pub fn grassmannian_uniton_one(seed: u64) -> GoldenArray {
    let n = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = random_subspace(&mut rng, n, 2);
    let p = f0.projector();
    let pp = p.complement();
    let l0 = poly_vector(&mut rng, n, 2).transform(&p);
    let e0 = poly_vector(&mut rng, n, 2).transform(&pp);
    let karr = FZeroArray::new(n, 1, f0, vec![vec![l0], vec![e0]]).expect("alternating columns");
    GoldenArray::from_f0("grassmannian_uniton_one", karr).expect("valid F0-array")
}

/// Entries `H_{i,j}` of the three-row arrays in ℂ⁷.
#[derive(Clone, Debug)]
pub struct ThreeRowData {
    pub h: BTreeMap<(usize, usize), MeroVector>,
}

impl ThreeRowData {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = BTreeMap::new();
        for i in 0..3 {
            for j in 1..=3 {
                h.insert((i, j), poly_vector(&mut rng, 7, 2));
            }
        }
        ThreeRowData { h }
    }

    pub fn get(&self, i: usize, j: usize) -> &MeroVector {
        &self.h[&(i, j)]
    }

    /// `H₀₁ | H₁₂ | H₂₃` on the diagonal: a basic map.
    pub fn diagonal(&self) -> UnitonArray {
        let z = MeroVector::zeros(7);
        UnitonArray::new(
            7,
            3,
            vec![
                column(0, vec![self.get(0, 1).clone(), z.clone(), z.clone()]),
                column(1, vec![z.clone(), self.get(1, 2).clone(), z.clone()]),
                column(2, vec![z.clone(), z, self.get(2, 3).clone()]),
            ],
        )
        .expect("shape")
    }

    /// The diagonal array with `H₁₁, H₂₁, H₂₂` filled in.
    pub fn filled(&self) -> UnitonArray {
        let z = MeroVector::zeros(7);
        UnitonArray::new(
            7,
            3,
            vec![
                column(
                    0,
                    vec![self.get(0, 1).clone(), self.get(1, 1).clone(), self.get(2, 1).clone()],
                ),
                column(1, vec![z.clone(), self.get(1, 2).clone(), self.get(2, 2).clone()]),
                column(2, vec![z.clone(), z, self.get(2, 3).clone()]),
            ],
        )
        .expect("shape")
    }
}

pub const THREE_ROW_SEED: u64 = 31;

/// The fixed reference arrays.
pub fn golden_set() -> Vec<GoldenArray> {
    let data = ThreeRowData::new(THREE_ROW_SEED);
    vec![
        single_column(21),
        two_row(22),
        grassmannian_two_row(),
        grassmannian_uniton_one(24),
        GoldenArray::plain("three_row_diagonal", data.diagonal()),
        GoldenArray::plain("three_row_filled", data.filled()),
    ]
}

/// A unitary reflection `2P − I` through a random subspace, generically not
/// commuting with any given chain.
pub fn unrelated_left_factor(seed: u64, n: usize, dim: usize) -> ConstantLeftFactor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ConstantLeftFactor::from_subspace(&random_subspace(&mut rng, n, dim))
}

/// Lead rows for a random array: nondecreasing, with `Σ (r − lead) ≤ n − 1`.
fn random_leads(rng: &mut impl Rng, n: usize, r: usize) -> Vec<usize> {
    let mut leads = vec![0];
    let mut budget = n - 1 - r;
    loop {
        let last = *leads.last().expect("nonempty");
        let lead = rng.gen_range(last..r);
        if r - lead > budget || rng.gen_bool(0.3) {
            return leads;
        }
        budget -= r - lead;
        leads.push(lead);
    }
}

/// A random echelon array with generic meromorphic entries.
pub fn random_echelon(seed: u64, n: usize, r: usize) -> UnitonArray {
    assert!(r >= 1 && r < n, "need 1 <= r < n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let cols = random_leads(&mut rng, n, r)
            .into_iter()
            .map(|lead| {
                let rows = (0..r)
                    .map(|i| {
                        if i < lead {
                            MeroVector::zeros(n)
                        } else {
                            mero_vector(&mut rng, n, if i == lead { r } else { 2 })
                        }
                    })
                    .collect();
                column(lead, rows)
            })
            .collect();
        let arr = UnitonArray::new(n, r, cols).expect("shape");
        if arr.validate().is_empty() {
            return arr;
        }
    }
}

/// `count` random echelon arrays with `n ≤ 6`, `r ≤ 3`.
pub fn random_echelon_set(seed: u64, count: usize) -> Vec<GoldenArray> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|m| {
            let n = rng.gen_range(3..=6);
            let r = rng.gen_range(1..=3.min(n - 1));
            let arr = random_echelon(rng.gen(), n, r);
            GoldenArray::plain(&format!("random_echelon_{m}"), arr)
        })
        .collect()
}

/// A random F₀-array whose converted array is valid.
pub fn random_f0(seed: u64, n: usize, r: usize) -> FZeroArray {
    assert!(r >= 1 && r < n, "need 1 <= r < n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let dim = rng.gen_range(1..n);
        let f0 = random_subspace(&mut rng, n, dim);
        let p = f0.projector();
        let pp = p.complement();
        let cols = random_leads(&mut rng, n, r)
            .into_iter()
            .map(|lead| {
                let even_in_f0 = rng.gen_bool(0.5);
                (0..r)
                    .map(|i| {
                        if i < lead {
                            return MeroVector::zeros(n);
                        }
                        let proj: &CMatrix = if (i % 2 == 0) == even_in_f0 { &p } else { &pp };
                        poly_vector(&mut rng, n, 2).transform(proj)
                    })
                    .collect()
            })
            .collect();
        let Ok(karr) = FZeroArray::new(n, r, f0, cols) else {
            continue;
        };
        if let Ok((_, arr)) = from_f0(&karr) {
            if arr.validate().is_empty() {
                return karr;
            }
        }
    }
}

/// `count` random F₀-arrays with `n ≤ 7`, `r ≤ 3`.
pub fn random_f0_set(seed: u64, count: usize) -> Vec<GoldenArray> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|m| {
            let n = rng.gen_range(3..=7);
            let r = rng.gen_range(1..=3.min(n - 1));
            let karr = random_f0(rng.gen(), n, r);
            GoldenArray::from_f0(&format!("random_f0_{m}"), karr).expect("validated")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uniton_array::is_diagonal;

    #[test]
    fn golden_arrays_are_valid() {
        for g in golden_set() {
            assert!(g.array.validate().is_empty(), "{}: {:?}", g.name, g.array.validate());
        }
    }

    #[test]
    fn three_row_shapes() {
        let d = ThreeRowData::new(THREE_ROW_SEED);
        assert!(is_diagonal(&d.diagonal()));
        assert!(!is_diagonal(&d.filled()));
        assert_eq!(d.diagonal().breakpoints(), vec![1, 2, 3]);
    }

    #[test]
    fn random_arrays_are_reproducible() {
        let a = random_echelon_set(5, 4);
        let b = random_echelon_set(5, 4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.array, y.array);
            assert!(x.array.validate().is_empty());
            assert!(x.array.r() <= 3 && x.array.n() <= 6);
        }
    }

    #[test]
    fn random_f0_arrays_validate() {
        for g in random_f0_set(9, 3) {
            assert!(g.f0.as_ref().unwrap().validate().is_ok());
            assert!(g.array.validate().is_empty());
        }
    }
}
