use uniton::cxlinalg::{orthonormalize, CMatrix, DEFAULT_RANK_TOL};
use uniton::golden::{
    grassmannian_two_row, grassmannian_uniton_one, random_echelon, single_column, two_row, unrelated_left_factor,
    ThreeRowData, THREE_ROW_SEED,
};
use uniton::harmonic_builder::HarmonicBuilder;
use uniton::ratfun::C64;
use uniton::spectral_flow::{deform, FlowParam};
use uniton::verifier::{
    eta, eta_from_chains, grassmann_check, harmonicity_residual, harmonicity_residual_of, lambda_plus_check,
    s1_invariance_check, unit_circle_samples, DEFAULT_STEP,
};

const Z: C64 = C64::new(1.3, 0.4);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn built_maps_and_their_inverses_are_harmonic() {
    let g = single_column(21);
    let b = HarmonicBuilder::new(g.array.clone());
    assert!(harmonicity_residual(&b, &g.q, Z, DEFAULT_STEP).unwrap().pass());
    let inv = harmonicity_residual_of(|w| b.evaluate_phi(&g.q, w)?.inverse(), Z, DEFAULT_STEP).unwrap();
    assert!(inv.pass(), "{inv:?}");
}

#[test]
fn non_holomorphic_factor_fails() {
    let b = HarmonicBuilder::new(single_column(21).array);
    let reflect = |w: C64| {
        let v = vec![c(1.0, 0.0) + w, w.conj(), c(0.5, 0.0), c(0.0, 1.0) * w];
        let p = orthonormalize(4, &[v], DEFAULT_RANK_TOL)?.projector();
        Ok(&p.scale(c(2.0, 0.0)) - &CMatrix::identity(4))
    };
    let rep = harmonicity_residual_of(|w| Ok(&b.build_chain(w)?.product() * &reflect(w)?), Z, DEFAULT_STEP).unwrap();
    assert!(!rep.pass(), "{rep:?}");
}

#[test]
fn grassmannian_factor_and_unrelated_control() {
    let g = grassmannian_two_row();
    let b = HarmonicBuilder::new(g.array.clone());
    assert!(grassmann_check(&b.evaluate_phi(&g.q, Z).unwrap()).pass);
    let other = unrelated_left_factor(5, g.array.n(), 3);
    assert!(!grassmann_check(&b.evaluate_phi(&other, Z).unwrap()).pass);
}

#[test]
fn s1_invariance_separates_diagonal_from_filled() {
    let data = ThreeRowData::new(THREE_ROW_SEED);
    let mus = unit_circle_samples(5);
    let diag = HarmonicBuilder::new(data.diagonal()).build_chain(Z).unwrap();
    assert!(s1_invariance_check(&diag, &mus).unwrap() < 1e-9);
    let filled = HarmonicBuilder::new(data.filled()).build_chain(Z).unwrap();
    assert!(s1_invariance_check(&filled, &mus).unwrap() > 1e-3);
}

#[test]
fn eta_for_uniton_number_one_is_constant() {
    let g = grassmannian_uniton_one(24);
    let t = 0.4;
    let e = eta(&g.array, FlowParam::new(t).unwrap(), Z, 1e-9).unwrap();
    let chain = HarmonicBuilder::new(g.array).build_chain(Z).unwrap();
    let expected = chain.pi(1) + &chain.pi_perp(1).scale(c(t, 0.0));
    assert!((&e.coefficient(0) - &expected).norm_fro() < 1e-12);
    assert!(e.support().all(|(k, m)| k == 0 || m.norm_fro() < 1e-12));
}

#[test]
fn eta_for_two_rows_has_no_negative_part() {
    let e = eta(&two_row(22).array, FlowParam::new(0.3).unwrap(), Z, 1e-9).unwrap();
    assert!(e.coefficient(-1).norm_fro() < 1e-10);
    assert!(lambda_plus_check(&e, 1e-7).pass);
}

#[test]
fn mismatched_pair_leaves_lambda_plus() {
    let t = FlowParam::new(0.5).unwrap();
    let a = random_echelon(3, 5, 2);
    let other = random_echelon(4, 5, 2);
    let chain = HarmonicBuilder::new(a).build_chain(Z).unwrap();
    let chain_t = HarmonicBuilder::new(deform(&other, t).unwrap()).build_chain(Z).unwrap();
    assert!(!lambda_plus_check(&eta_from_chains(&chain, &chain_t, t.value()), 1e-7).pass);
}
