use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uniton::cxlinalg::{vnorm, vsub, CMatrix};
use uniton::golden::random_echelon;
use uniton::harmonic_builder::HarmonicBuilder;
use uniton::lemma_oracles::{
    a_op, beta, check_identities, column_families, eta_kl, v_poly, ChainPair, IdentityStatus, LemmaSuite, VFamily,
};
use uniton::ratfun::C64;
use uniton::sampling::random_vector;
use uniton::spectral_flow::{deform, FlowParam};
use uniton::uniton_array::UnitonArray;

const Z: C64 = C64::new(1.2, -0.5);
const TOL: f64 = 1e-8;

struct Setup {
    b: HarmonicBuilder,
    bt: HarmonicBuilder,
    pair: ChainPair,
}

fn setup(arr: UnitonArray, t: f64) -> Setup {
    let b = HarmonicBuilder::new(arr.clone());
    let bt = HarmonicBuilder::new(deform(&arr, FlowParam::new(t).unwrap()).unwrap());
    let pair = ChainPair::new(b.build_chain(Z).unwrap(), bt.build_chain(Z).unwrap(), t).unwrap();
    Setup { b, bt, pair }
}

fn random_family(seed: u64, start: i64, n: usize, len: usize) -> VFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VFamily::new(start, n, (0..len).map(|_| random_vector(&mut rng, n)).collect()).unwrap()
}

fn suite(s: &Setup, families: &[VFamily]) -> LemmaSuite {
    check_identities(&s.pair, &s.b, &s.bt, families, TOL).unwrap()
}

fn status(suite: &LemmaSuite, id: &str) -> IdentityStatus {
    suite.identities.iter().find(|r| r.id == id).unwrap().status
}

fn variant(suite: &LemmaSuite, id: &str, name: &str) -> Option<bool> {
    suite
        .variants
        .iter()
        .find(|v| v.id == id && v.variant == name)
        .unwrap()
        .holds
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn identity_d_on_random_family() {
    let s = setup(random_echelon(40, 5, 3), 0.5);
    let rep = suite(&s, &[random_family(1, 0, 5, 6)]);
    assert_eq!(status(&rep, "d"), IdentityStatus::Pass);
    assert!(rep.all_pass());
}

#[test]
fn identity_d_is_exact_at_t_one() {
    let s = setup(random_echelon(41, 5, 3), 1.0);
    let rep = suite(&s, &[random_family(2, 0, 5, 6)]);
    let d = rep.identities.iter().find(|r| r.id == "d").unwrap();
    assert!(d.instances > 0 && d.max_residual < 1e-14, "{d:?}");
}

#[test]
fn a_operator_base_cases() {
    let s = setup(random_echelon(42, 6, 4), 0.6);
    let p = &s.pair;
    let t = p.t();
    assert!((&a_op(p, 2, 3).unwrap() - &p.eta_coeff(1, 0)).norm_fro() < 1e-14);
    let step = (p.chain_t().pi_perp(4) * &p.eta_coeff(3, 2)).scale(re(1.0 / t));
    let expected = &a_op(p, 3, 3).unwrap() + &step;
    assert!((&a_op(p, 3, 4).unwrap() - &expected).norm_fro() < 1e-12);
}

#[test]
fn eta_kl_first_step_and_eta_one() {
    let s = setup(random_echelon(43, 5, 3), 0.35);
    let p = &s.pair;
    let t = p.t();
    for k in -1..=3 {
        let a = p.chain_t().pi(2) * &p.eta_coeff(1, k - 1);
        let b = p.chain_t().pi_perp(2) * &p.eta_coeff(1, k);
        let expected = (&a + &b).scale(re(t));
        assert!((&eta_kl(p, 2, k, 1).unwrap() - &expected).norm_fro() < 1e-13);
    }
    let eta10: CMatrix = p.chain().pi(1) + &p.chain().pi_perp(1).scale(re(t));
    assert!((&p.eta_coeff(1, 0) - &eta10).norm_fro() < 1e-12);
}

#[test]
fn beta_zero_one_is_first_vector() {
    let s = setup(random_echelon(44, 5, 2), 0.5);
    let fam = random_family(3, 2, 5, 4);
    let b = beta(&fam, &s.pair, 1, 0).unwrap();
    assert!(vnorm(&vsub(&b, &fam.get(2))) < 1e-15);
}

#[test]
fn lead_zero_column_family_is_the_deformed_column() {
    let s = setup(random_echelon(45, 5, 3), 0.4);
    let fams = column_families(&s.b, Z).unwrap();
    for (j, col) in s.b.array().columns().iter().enumerate() {
        if col.lead_row != 0 {
            continue;
        }
        for i in 0..3 {
            let direct = s.bt.array().entry(i, j).eval(Z).unwrap();
            let via = v_poly(&fams[j], 0, i, 0.4);
            assert!(vnorm(&vsub(&direct, &via)) < 1e-12 * (1.0 + vnorm(&direct)));
        }
    }
}

#[test]
fn uniton_number_four_resolves_h_exponent() {
    let s = setup(random_echelon(46, 6, 4), 0.5);
    let fams = [random_family(4, 0, 6, 8), random_family(5, 2, 6, 8)];
    let rep = suite(&s, &fams);
    assert!(rep.all_pass());
    let (a, b) = (variant(&rep, "h", "t^(s-r)"), variant(&rep, "h", "t^(s-r+1)"));
    assert_eq!((a, b), (Some(true), Some(false)));
}

#[test]
fn zero_family_is_degenerate() {
    let s = setup(random_echelon(47, 5, 3), 0.5);
    let rep = check_identities(&s.pair, &s.b, &s.bt, &[VFamily::zeros(0, 5, 6)], TOL).unwrap();
    assert_eq!(status(&rep, "d"), IdentityStatus::Degenerate);
    assert!(rep.identities.iter().find(|r| r.id == "d").unwrap().degenerate > 0);
}
