use num_complex::Complex64;
use proptest::prelude::*;

use metaward::diffop::BodyIndex;
use metaward::reps::{make_generator, Family, GeneratorSpec, Kind};
use metaward::{parse_op_expr, Assignment, DiffOp, GaussianRational, Poly, Ring, Var};

fn ring() -> Ring {
    Ring::standard()
}

fn scalar() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=4, -3i64..=3).prop_map(|(n, d, im)| {
        &GaussianRational::ratio(n, d) + &(&GaussianRational::i() * &GaussianRational::from_int(im))
    })
}

/// Small polynomials in `t, r, zeta, gamma` and Laurent in `mu`.
fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((scalar(), 0i32..=2, 0i32..=2, 0i32..=1, -1i32..=1, 0i32..=1), 0..4).prop_map(|terms| {
        terms.into_iter().fold(Poly::zero(&ring()), |acc, (c, t, r, z, m, g)| {
            let term = Poly::monomial(&ring(), c, &[(Var::T, t), (Var::R, r), (Var::Zeta, z), (Var::Mu, m), (Var::Gamma, g)])
                .unwrap();
            &acc + &term
        })
    })
}

/// First-order operators `p0 + p1 dt + p2 dr + p3 dzeta [+ p4 dmu]`.
fn first_order(with_mu: bool) -> impl Strategy<Value = DiffOp> {
    (poly(), poly(), poly(), poly(), poly()).prop_map(move |(p0, p1, p2, p3, p4)| {
        let mut op = DiffOp::scalar(p0);
        let mut derivs = vec![(Var::T, p1), (Var::R, p2), (Var::Zeta, p3)];
        if with_mu {
            derivs.push((Var::Mu, p4));
        }
        for (v, p) in derivs {
            op = op.checked_add(&DiffOp::term(p, &[(v, 1)]).unwrap()).unwrap();
        }
        op
    })
}

fn any_op() -> impl Strategy<Value = DiffOp> {
    (first_order(true), first_order(true)).prop_map(|(a, b)| a.compose(&b).unwrap().checked_add(&a).unwrap())
}

fn point() -> impl Strategy<Value = Assignment> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, 0.2f64..2.0, -2.0f64..2.0).prop_map(|(t, r, z, m, g)| {
        Assignment::from([
            (Var::T, Complex64::new(t, 0.0)),
            (Var::R, Complex64::new(r, 0.0)),
            (Var::Zeta, Complex64::new(z, 0.0)),
            (Var::Mu, Complex64::new(m, 0.0)),
            (Var::Gamma, Complex64::new(g, 0.0)),
        ])
    })
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_field_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn poly_ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn derivatives_commute_and_obey_leibniz(a in poly(), b in poly()) {
        prop_assert_eq!(a.diff(Var::T).unwrap().diff(Var::Mu).unwrap(), a.diff(Var::Mu).unwrap().diff(Var::T).unwrap());
        let lhs = (&a * &b).diff(Var::R).unwrap();
        let rhs = &(&a.diff(Var::R).unwrap() * &b) + &(&a * &b.diff(Var::R).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(a in poly(), b in poly(), at in point()) {
        let (ea, eb) = (a.eval(&at).unwrap(), b.eval(&at).unwrap());
        prop_assert!(close((&a * &b).eval(&at).unwrap(), ea * eb));
        prop_assert!(close((&a + &b).eval(&at).unwrap(), ea + eb));
    }

    #[test]
    fn composition_is_associative(a in first_order(true), b in first_order(true), c in first_order(true)) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn composition_acts_as_successive_application(a in first_order(true), b in first_order(true), f in poly()) {
        let composed = a.compose(&b).unwrap().apply(&f).unwrap();
        let successive = a.apply(&b.apply(&f).unwrap()).unwrap();
        prop_assert_eq!(composed, successive);
    }

    #[test]
    fn jacobi_identity(a in first_order(true), b in first_order(true), c in first_order(true)) {
        let ab_c = a.commutator(&b).unwrap().commutator(&c).unwrap();
        let bc_a = b.commutator(&c).unwrap().commutator(&a).unwrap();
        let ca_b = c.commutator(&a).unwrap().commutator(&b).unwrap();
        prop_assert!(ab_c.checked_add(&bc_a).unwrap().checked_add(&ca_b).unwrap().is_zero());
        prop_assert!(a.commutator(&b).unwrap().checked_add(&b.commutator(&a).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn bodies_commute(a in first_order(false), b in first_order(false)) {
        let a1 = a.lift_two_body(BodyIndex::One).unwrap();
        let b2 = b.lift_two_body(BodyIndex::Two).unwrap();
        prop_assert!(a1.commutator(&b2).unwrap().is_zero());
        let lifted_bracket = a.commutator(&b).unwrap().two_body().unwrap();
        let bracket_of_lifts = a.two_body().unwrap().commutator(&b.two_body().unwrap()).unwrap();
        prop_assert_eq!(lifted_bracket, bracket_of_lifts);
    }

    #[test]
    fn print_parse_round_trip(op in any_op()) {
        let text = op.to_string();
        prop_assert_eq!(parse_op_expr(&text).unwrap(), op, "{}", text);
    }
}

#[test]
fn factory_generators_round_trip_through_text() {
    let mut count = 0;
    for family in [Family::Meta, Family::MetaDual, Family::Cga, Family::OrthoChiral] {
        for kind in [Kind::X, Kind::Y, Kind::N, Kind::S, Kind::Ell, Kind::EllBar] {
            for n in -1..=5 {
                let Ok(op) = make_generator(&GeneratorSpec::new(family, kind, n)) else { continue };
                let two = op.two_body().unwrap();
                for candidate in [op, two] {
                    let text = candidate.to_string();
                    assert_eq!(parse_op_expr(&text).unwrap(), candidate, "{text}");
                    count += 1;
                }
            }
        }
    }
    assert!(count > 50);
}

#[test]
fn two_body_dual_n_commutes_with_two_body_x() {
    let n = make_generator(&GeneratorSpec::new(Family::MetaDual, Kind::N, 0)).unwrap().two_body().unwrap();
    for k in -1..=3 {
        let x = make_generator(&GeneratorSpec::new(Family::MetaDual, Kind::X, k)).unwrap().two_body().unwrap();
        assert!(x.commutator(&n).unwrap().is_zero(), "X_{k}");
        let y = make_generator(&GeneratorSpec::new(Family::MetaDual, Kind::Y, k)).unwrap().two_body().unwrap();
        assert!(y.commutator(&n).unwrap().checked_add(&y).unwrap().is_zero(), "Y_{k}");
    }
}
