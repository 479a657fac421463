use num_complex::Complex64;
use proptest::prelude::*;

use metaward::correlators::{
    check_symmetry, gradient_check, random_interior_points, CorrelatorFamily, CorrelatorParams, CorrelatorSpec,
    FieldPoint, Grid,
};

fn family() -> impl Strategy<Value = CorrelatorFamily> {
    prop::sample::select(CorrelatorFamily::ALL.to_vec())
}

fn separation() -> impl Strategy<Value = FieldPoint> {
    (
        prop_oneof![-4.0f64..-0.1, 0.1f64..4.0],
        -3.0f64..3.0,
        -1.0f64..2.0,
        -1.0f64..2.0,
    )
        .prop_map(|(t, r, z1, z2)| FieldPoint::with_zeta(t, r, z1, z2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn unequal_scaling_dimensions_vanish(f in family(), p in separation(), dx in 0.01f64..1.0) {
        let mut params = CorrelatorParams::default();
        params.x2 = params.x1 + dx;
        let spec = CorrelatorSpec::new(f, params);
        if let Ok(v) = spec.eval(&p) {
            prop_assert_eq!(v, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn unequal_rapidities_vanish_where_gated(p in separation(), dg in 0.01f64..1.0) {
        let mut params = CorrelatorParams::default();
        params.gamma2 = params.gamma1 + dg;
        for f in [CorrelatorFamily::MetaNaive, CorrelatorFamily::MetaFinal, CorrelatorFamily::Cga] {
            if let Ok(v) = CorrelatorSpec::new(f, params).eval(&p) {
                prop_assert_eq!(v, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn exchange_symmetry(p in separation(), x in 0.0f64..2.0, g in 0.1f64..2.0, mu in 0.1f64..3.0) {
        let params = CorrelatorParams::default().with_x(x).with_gamma(g).with_mu(mu);
        for f in [CorrelatorFamily::Ortho, CorrelatorFamily::MetaFinal, CorrelatorFamily::Cga] {
            let s = CorrelatorSpec::new(f, params);
            let a = s.eval(&p).unwrap();
            let b = s.eval(&FieldPoint::new(-p.t, -p.r)).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm());
        }
    }

    #[test]
    fn causal_form_matches_or_vanishes(p in separation(), x in 0.0f64..2.0, m in 0.1f64..3.0) {
        let mut params = CorrelatorParams::default().with_x(x);
        params.m1 = m;
        let ext = CorrelatorSpec::new(CorrelatorFamily::SchrExt, params).eval(&p).unwrap();
        if p.t < 0.0 {
            prop_assert_eq!(ext, Complex64::new(0.0, 0.0));
        } else {
            let plain = CorrelatorSpec::new(CorrelatorFamily::Schr, params).eval(&p).unwrap();
            prop_assert_eq!(ext, plain);
        }
    }

    #[test]
    fn final_form_bounded_by_prefactor(p in separation(), x in 0.01f64..2.0, g in 0.01f64..2.0, mu in 0.01f64..3.0) {
        let params = CorrelatorParams::default().with_x(x).with_gamma(g).with_mu(mu);
        let v = CorrelatorSpec::new(CorrelatorFamily::MetaFinal, params).eval(&p).unwrap();
        prop_assert!(v.re <= p.t.abs().powf(-2.0 * x) * (1.0 + 1e-15));
        prop_assert!(v.re > 0.0);
    }
}

#[test]
fn gradients_of_every_family() {
    let variants = [
        CorrelatorParams::default(),
        CorrelatorParams::default().with_x(0.35).with_gamma(1.7).with_mu(0.3),
        CorrelatorParams::default().with_nu(0.6, 2.1).with_mu(2.5),
    ];
    for params in variants {
        for family in CorrelatorFamily::ALL {
            let spec = CorrelatorSpec::new(family, params);
            let points = random_interior_points(&spec, 100, 2024);
            assert!(points.len() >= 40, "{family}: {}", points.len());
            let report = gradient_check(&spec, &points).unwrap();
            assert!(report.pass, "{report:?}");
        }
    }
}

#[test]
fn symmetry_on_the_standard_grid() {
    for family in [CorrelatorFamily::Ortho, CorrelatorFamily::MetaFinal, CorrelatorFamily::Cga] {
        let r = check_symmetry(&CorrelatorSpec::new(family, CorrelatorParams::default()), &Grid::standard(false)).unwrap();
        assert!(r.pass);
    }
}
