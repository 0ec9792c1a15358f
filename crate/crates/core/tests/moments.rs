use biorth::moments::{caratheodory_on, toeplitz_det, weight_moments};
use biorth::suites::{laurent_moments, laurent_weight, strict_weight};
use biorth::{Config, MomentSource, MomentTable, Side, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

// plain midpoint rule for w_k = mean of w(ζ)ζ^{−k}, computed here
fn moment_oracle(w: &biorth::SemiClassicalWeight, k: i64, p: usize) -> C64 {
    let mut s = c(0.0);
    for q in 0..p {
        let z = C64::from_polar(1.0, 2.0 * PI * (q as f64 + 0.5) / p as f64);
        s += w.eval(z).unwrap() * z.powi(-k as i32);
    }
    s / p as f64
}

#[test]
fn laurent_weight_moments_are_its_coefficients() {
    let cfg = Config::default();
    let tbl = weight_moments(&laurent_weight(), 8, &cfg).unwrap();
    for k in -8..=8i64 {
        let want = match k {
            -1 | 1 => 1.0,
            0 => 2.0,
            _ => 0.0,
        };
        assert!((tbl.get(k) - want).norm() < 1e-14, "w_{k} = {}", tbl.get(k));
    }
}

#[test]
fn strict_moments_match_direct_sum() {
    let cfg = Config::default();
    let w = strict_weight();
    let tbl = weight_moments(&w, 12, &cfg).unwrap();
    for k in [-12i64, -5, -1, 0, 1, 3, 12] {
        let want = moment_oracle(&w, k, 4096);
        assert!((tbl.get(k) - want).norm() < 1e-12, "k={k}: {} vs {want}", tbl.get(k));
    }
}

#[test]
fn caratheodory_of_laurent_weight() {
    let tbl = laurent_moments(6);
    let zi = C64::new(0.3, -0.2);
    let zo = C64::new(-1.4, 0.9);
    assert!((caratheodory_on(&tbl, zi, Side::Inside).value - (zi * 2.0 + 2.0)).norm() < 1e-15);
    assert!((caratheodory_on(&tbl, zo, Side::Outside).value - (-(zo.inv() * 2.0) - 2.0)).norm() < 1e-15);
}

#[test]
fn window_is_enforced() {
    let tbl = MomentTable::lebesgue(3);
    assert!(toeplitz_det(&tbl, 0, 4).is_ok());
    assert!(toeplitz_det(&tbl, 1, 4).is_err());
    assert!(tbl.require(4).is_err());
}

fn small_laurent() -> impl Strategy<Value = Vec<(i64, C64)>> {
    prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 4).prop_map(|v| {
        let mut out = vec![(0, c(1.0))];
        for (i, (re, im)) in v.into_iter().enumerate() {
            let k = (i as i64 / 2 + 1) * if i % 2 == 0 { 1 } else { -1 };
            out.push((k, C64::new(re, im) * 0.5));
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // transposing the Toeplitz matrix swaps w_k and w_{−k} and keeps the determinant
    #[test]
    fn toeplitz_det_reflection(pairs in small_laurent(), n in 1usize..6) {
        let a = MomentTable::from_pairs(&pairs, Some(8), MomentSource::UserSupplied);
        let flipped: Vec<(i64, C64)> = pairs.iter().map(|&(k, v)| (-k, v)).collect();
        let b = MomentTable::from_pairs(&flipped, Some(8), MomentSource::UserSupplied);
        let (x, y) = (toeplitz_det(&a, 0, n).unwrap().value, toeplitz_det(&b, 0, n).unwrap().value);
        prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
        let (x, y) = (toeplitz_det(&a, 1, n).unwrap().value, toeplitz_det(&b, -1, n).unwrap().value);
        prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
    }

    // a multiple a·w scales I_n by aⁿ
    #[test]
    fn toeplitz_det_homogeneous(pairs in small_laurent(), n in 1usize..6, a in 0.5f64..2.0) {
        let t = MomentTable::from_pairs(&pairs, Some(8), MomentSource::UserSupplied);
        let scaled: Vec<(i64, C64)> = pairs.iter().map(|&(k, v)| (k, v * a)).collect();
        let s = MomentTable::from_pairs(&scaled, Some(8), MomentSource::UserSupplied);
        let (x, y) = (toeplitz_det(&t, 0, n).unwrap().value, toeplitz_det(&s, 0, n).unwrap().value);
        prop_assert!((x * a.powi(n as i32) - y).norm() <= 1e-12 * y.norm().max(1.0));
    }
}
