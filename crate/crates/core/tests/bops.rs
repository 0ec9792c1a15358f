use biorth::bops::{build_system, orthonormality_defect, principal_sqrt, BuildMethod};
use biorth::moments::toeplitz_det;
use biorth::{Config, Error, MomentSource, MomentTable, C64};
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn vanishing_toeplitz_determinant_is_an_existence_error() {
    // w = z^{−1} + 1 + z: I_2 = 1 − 1 = 0
    let tbl = MomentTable::from_pairs(&[(-1, c(1.0)), (0, c(1.0)), (1, c(1.0))], Some(42), MomentSource::UserSupplied);
    match build_system(&tbl, 40, BuildMethod::GramLu, &Config::default()) {
        Err(Error::Existence { n, .. }) => assert_eq!(n, 2),
        other => panic!("expected an existence error, got {other:?}"),
    }
}

#[test]
fn principal_root_branch() {
    assert_eq!(principal_sqrt(c(4.0)), c(2.0));
    assert_eq!(principal_sqrt(c(-4.0)), C64::new(0.0, 2.0));
    let s = principal_sqrt(C64::new(-1.0, -1e-300));
    assert!(s.re >= 0.0);
}

#[test]
fn short_window_is_refused() {
    let tbl = MomentTable::lebesgue(3);
    assert!(matches!(
        build_system(&tbl, 3, BuildMethod::Szego, &Config::default()),
        Err(Error::InsufficientWindow { required: 4, available: 3 })
    ));
}

fn dominant_table() -> impl Strategy<Value = MomentTable> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6).prop_map(|v| {
        let mut pairs = vec![(0, c(1.0))];
        for (i, (re, im)) in v.into_iter().enumerate() {
            let k = (i as i64 / 2 + 1) * if i % 2 == 0 { 1 } else { -1 };
            pairs.push((k, C64::new(re, im) * 0.12));
        }
        MomentTable::from_pairs(&pairs, Some(10), MomentSource::UserSupplied)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn both_routes_agree_and_are_biorthonormal(tbl in dominant_table()) {
        let cfg = Config::default();
        let sys = build_system(&tbl, 6, BuildMethod::Both, &cfg).unwrap();
        prop_assert!(orthonormality_defect(&sys) < 1e-11);
    }

    // κ_n² = I_n / I_{n+1} and r_n, r̄_n from the shifted determinants
    #[test]
    fn scalars_from_determinants(tbl in dominant_table(), n in 1usize..6) {
        let sys = build_system(&tbl, 6, BuildMethod::GramLu, &Config::default()).unwrap();
        let i0 = toeplitz_det(&tbl, 0, n).unwrap().value;
        let i0n = toeplitz_det(&tbl, 0, n + 1).unwrap().value;
        let lv = sys.level(n);
        let k2 = lv.kappa * lv.kappa;
        prop_assert!((k2 - i0 / i0n).norm() < 1e-11 * k2.norm());
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let r = toeplitz_det(&tbl, 1, n).unwrap().value / i0 * sign;
        let rb = toeplitz_det(&tbl, -1, n).unwrap().value / i0 * sign;
        prop_assert!((lv.r - r).norm() < 1e-11 * r.norm().max(1e-3));
        prop_assert!((lv.rbar - rb).norm() < 1e-11 * rb.norm().max(1e-3));
        prop_assert!(lv.kappa.re >= 0.0);
    }
}
