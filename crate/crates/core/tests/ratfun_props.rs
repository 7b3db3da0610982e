use proptest::prelude::*;
use uniton::ratfun::{ComplexPoly, ComplexRational, C64};

fn coeff() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn poly(max_len: usize) -> impl Strategy<Value = ComplexPoly> {
    prop::collection::vec(coeff(), 1..=max_len).prop_map(ComplexPoly::new)
}

/// Numerator of degree ≤ 3 over a monic denominator with roots inside `|z| < 0.5`.
fn rational() -> impl Strategy<Value = ComplexRational> {
    (poly(4), prop::collection::vec((0.0..0.5f64, 0.0..6.3f64), 0..3))
        .prop_map(|(num, roots)| ComplexRational::new(num, roots_poly(&roots)).expect("nonzero denominator"))
}

fn roots_poly(roots: &[(f64, f64)]) -> ComplexPoly {
    roots.iter().fold(ComplexPoly::one(), |acc, &(r, th)| {
        acc.mul(&ComplexPoly::new(vec![-C64::from_polar(r, th), C64::new(1.0, 0.0)]))
    })
}

/// Numerator and denominator given by their roots, kept apart from each other.
fn factored() -> impl Strategy<Value = ComplexRational> {
    (
        coeff(),
        prop::collection::vec((0.6..1.0f64, 0.0..6.3f64), 0..3),
        prop::collection::vec((0.0..0.4f64, 0.0..6.3f64), 0..3),
    )
        .prop_filter("nonzero scale", |(c, _, _)| c.norm() > 0.1)
        .prop_map(|(c, zs, ps)| ComplexRational::new(roots_poly(&zs).scale(c), roots_poly(&ps)).unwrap())
}

fn point() -> impl Strategy<Value = C64> {
    (1.0..2.0f64, 0.0..6.3f64).prop_map(|(r, th)| C64::from_polar(r, th))
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn arithmetic_commutes_with_evaluation(f in rational(), g in rational(), z in point()) {
        let (fz, gz) = (f.eval(z).unwrap(), g.eval(z).unwrap());
        prop_assert!(close(f.add(&g).eval(z).unwrap(), fz + gz, 1e-9));
        prop_assert!(close(f.sub(&g).eval(z).unwrap(), fz - gz, 1e-9));
        prop_assert!(close(f.mul(&g).eval(z).unwrap(), fz * gz, 1e-9));
        if gz.norm() > 1e-3 && !g.is_zero() {
            prop_assert!(close(f.div(&g).unwrap().eval(z).unwrap(), fz / gz, 1e-7));
        }
    }

    #[test]
    fn leibniz_rule(f in rational(), g in rational(), z in point()) {
        let lhs = f.mul(&g).derivative();
        let rhs = f.derivative().mul(&g).add(&f.mul(&g.derivative()));
        prop_assert!(close(lhs.eval(z).unwrap(), rhs.eval(z).unwrap(), 1e-8));
    }

    #[test]
    fn derivative_matches_finite_difference(f in rational(), z in point()) {
        let h = 1e-4;
        let fd = (f.eval(z + h).unwrap() - f.eval(z - h).unwrap()) / (2.0 * h);
        prop_assert!(close(f.derivative().eval(z).unwrap(), fd, 1e-5));
    }

    #[test]
    fn division_undoes_multiplication(f in rational(), g in rational(), z in point()) {
        prop_assume!(!g.is_zero());
        let q = f.mul(&g).div(&g).unwrap();
        prop_assert!(q.approx_eq(&f, 1e-7));
        prop_assert!(close(q.eval(z).unwrap(), f.eval(z).unwrap(), 1e-7));
    }

    #[test]
    fn common_factors_cancel(f in factored(), g in factored()) {
        let q = f.mul(&g).div(&g).unwrap();
        prop_assert_eq!(q.den().degree(), f.den().degree());
        prop_assert_eq!(q.num().degree(), f.num().degree());
    }
}
