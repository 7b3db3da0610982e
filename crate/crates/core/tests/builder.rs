use uniton::cxlinalg::{orthonormalize, vnorm, CMatrix, DEFAULT_RANK_TOL};
use uniton::golden::{single_column, two_row, ThreeRowData, THREE_ROW_SEED};
use uniton::harmonic_builder::{c_elementary, HarmonicBuilder, LaurentMatrix, ProjectionChain};
use uniton::ratfun::C64;
use uniton::uniton_array::{ConstantLeftFactor, UnitonArray};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const Z: C64 = C64::new(1.1, 0.7);

fn outside(proj: &CMatrix, v: &[C64]) -> f64 {
    let perp = proj.complement();
    vnorm(&perp.mul_vec(v).unwrap()) / vnorm(v).max(1e-300)
}

fn same_span(n: usize, a: &[Vec<C64>], b: &[Vec<C64>]) -> bool {
    let pa = orthonormalize(n, a, DEFAULT_RANK_TOL).unwrap();
    let pb = orthonormalize(n, b, DEFAULT_RANK_TOL).unwrap();
    pa.rank() == pb.rank() && (&pa.projector() - &pb.projector()).norm_fro() < 1e-9
}

#[test]
fn two_row_spans() {
    let g = two_row(22);
    let b = HarmonicBuilder::new(g.array.clone());
    let chain = b.build_chain(Z).unwrap();
    let col = |j: usize, i: usize| b.array().entry(i, j).eval(Z).unwrap();
    let dcol = |j: usize| b.array().entry(0, j).derivative().eval(Z).unwrap();
    let a1: Vec<_> = (0..2).map(|j| col(j, 0)).collect();
    assert!(same_span(5, &a1, chain.frames()[0].vectors()));

    let p1 = chain.pi_perp(1);
    let mut a2 = Vec::new();
    for j in 0..2 {
        let h1 = p1.mul_vec(&col(j, 1)).unwrap();
        a2.push(col(j, 0).iter().zip(&h1).map(|(x, y)| x + y).collect());
        a2.push(p1.mul_vec(&dcol(j)).unwrap());
    }
    assert!(same_span(5, &a2, chain.frames()[1].vectors()));
    assert_eq!(chain.ranks(), vec![2, 4]);
}

#[test]
fn single_column_rank_growth() {
    let b = HarmonicBuilder::new(single_column(21).array);
    let chain = b.build_chain(Z).unwrap();
    let ranks = chain.ranks();
    assert_eq!(ranks.len(), 3);
    for (i, &d) in ranks.iter().enumerate() {
        assert!(d <= i + 1);
    }
    assert_eq!(ranks, vec![1, 2, 3]);
}

#[test]
fn empty_array_gives_left_factor() {
    let q = ConstantLeftFactor::new(CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)])).unwrap();
    let b = HarmonicBuilder::new(UnitonArray::empty(3));
    let phi = b.evaluate_phi(&q, Z).unwrap();
    assert!((&phi - q.matrix()).norm_fro() < 1e-15);
}

#[test]
fn elementary_functions_low_order() {
    let chain = HarmonicBuilder::new(two_row(22).array).build_chain(Z).unwrap();
    let n = chain.n();
    let comps = chain.complements();
    let id = CMatrix::identity(n);
    assert!((&c_elementary(n, &comps[..1], 0).unwrap() - &id).norm_fro() < 1e-15);
    assert!((&c_elementary(n, &comps[..2], 0).unwrap() - &id).norm_fro() < 1e-15);
    assert!((&c_elementary(n, &comps[..1], 1).unwrap() - &comps[0]).norm_fro() < 1e-15);
    let c22 = &comps[1] * &comps[0];
    assert!((&c_elementary(n, &comps[..2], 2).unwrap() - &c22).norm_fro() < 1e-14);
    assert!(c_elementary(n, &comps[..1], 2).is_err());
}

#[test]
fn three_row_diagonal_third_span() {
    let data = ThreeRowData::new(THREE_ROW_SEED);
    let chain = HarmonicBuilder::new(data.diagonal()).build_chain(Z).unwrap();
    let pp = &chain.pi_perp(2).clone() * chain.pi_perp(1);
    let h = |i, j| data.get(i, j).clone();
    let vecs = [
        h(0, 1).derivative().derivative().eval(Z).unwrap(),
        h(1, 2).derivative().eval(Z).unwrap(),
        h(2, 3).eval(Z).unwrap(),
    ];
    for v in &vecs {
        let w = pp.mul_vec(v).unwrap();
        assert!(outside(chain.pi(3), &w) < 1e-9);
    }
}

#[test]
fn extended_solution_endpoints() {
    let b = HarmonicBuilder::new(single_column(21).array);
    let chain = b.build_chain(Z).unwrap();
    let n = chain.n();
    assert!((&chain.extended_at(c(1.0, 0.0)) - &CMatrix::identity(n)).norm_fro() < 1e-13);
    assert!((&chain.extended_at(c(-1.0, 0.0)) - &chain.product()).norm_fro() < 1e-13);
    for i in 1..=chain.r() {
        let f = chain.pi(i) - chain.pi_perp(i);
        assert!((&(&f * &f) - &CMatrix::identity(n)).norm_fro() < 1e-12);
    }
}

#[test]
fn uniton_one_extended_solution_has_two_terms() {
    let chain = HarmonicBuilder::new(single_column(21).array)
        .build_chain(Z)
        .unwrap()
        .truncated(1);
    let ext = chain.extended_solution();
    let support: Vec<i32> = ext.support().map(|(k, _)| k).collect();
    assert_eq!(support, vec![0, 1]);
    assert!((&ext.coefficient(0) - chain.pi(1)).norm_fro() < 1e-13);
    assert!((&ext.coefficient(1) - chain.pi_perp(1)).norm_fro() < 1e-13);
}

#[test]
fn dft_recovers_laurent_polynomial() {
    let a = CMatrix::from_fn(2, 2, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
    let b = CMatrix::from_fn(2, 2, |i, j| c(0.3 * j as f64, -(i as f64)));
    let known = LaurentMatrix::from_pairs(2, &[(-1, a.clone()), (2, b.clone())]);
    let rec = LaurentMatrix::by_dft(9, -4, |lam| known.eval(lam));
    assert!(rec.distance(&known) < 1e-13);
    assert!(rec.coefficient(0).norm_fro() < 1e-13);
}

#[test]
fn empty_chain_product_is_identity() {
    let chain = ProjectionChain::empty(3, Z);
    assert_eq!(chain.r(), 0);
    assert!((&chain.product() - &CMatrix::identity(3)).norm_fro() < 1e-15);
}
