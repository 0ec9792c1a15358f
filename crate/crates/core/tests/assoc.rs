use biorth::assoc::plemelj_check;
use biorth::bops::{build_system, BuildMethod};
use biorth::moments::weight_moments;
use biorth::suites::{laurent_moments, strict_weight};
use biorth::{Config, Error, Evaluator, Side, C64};
use proptest::prelude::*;

fn laurent_ev() -> Evaluator {
    let cfg = Config::default();
    Evaluator::new(build_system(&laurent_moments(10), 8, BuildMethod::Both, &cfg).unwrap(), None, &cfg).unwrap()
}

fn strict_ev() -> Evaluator {
    let cfg = Config::default();
    let w = strict_weight();
    let tbl = weight_moments(&w, cfg.window, &cfg).unwrap();
    Evaluator::new(build_system(&tbl, 6, BuildMethod::GramLu, &cfg).unwrap(), Some(w), &cfg).unwrap()
}

fn off_circle() -> impl Strategy<Value = C64> {
    prop_oneof![0.1f64..0.8, 1.3f64..2.5].prop_flat_map(|r| (-3.1f64..3.1).prop_map(move |t| C64::from_polar(r, t)))
}

#[test]
fn psi_zero_for_laurent() {
    // ψ_0 = 1/κ_0 and κ_0² = 1/w_0
    let ev = laurent_ev();
    let z = C64::new(0.2, 0.1);
    assert!((ev.psi(0, z) * ev.psi(0, z) - 2.0).norm() < 1e-14);
}

#[test]
fn near_circle_refused() {
    let ev = laurent_ev();
    assert!(matches!(ev.eps(2, C64::from_polar(1.0 + 1e-4, 0.3)), Err(Error::NearCircle(_))));
    assert!(ev.eps_on(2, C64::from_polar(1.0 + 1e-4, 0.3), Side::Outside).is_finite());
}

#[test]
fn jump_across_circle() {
    let ev = strict_ev();
    let th: Vec<f64> = (0..12).map(|q| 0.4 + q as f64 * 0.5).collect();
    for n in 0..4 {
        let rep = plemelj_check(&ev, n, &th, 1e-4, 1e-5).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.failures());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // φ_nε*_n + ε_nφ*_n = 2zⁿ on either side
    #[test]
    fn casoratian(z in off_circle(), n in 0usize..7) {
        for ev in [laurent_ev(), strict_ev()] {
            if n > ev.max_level() { continue; }
            let lhs = ev.phi(n, z) * ev.epss(n, z).unwrap() + ev.eps(n, z).unwrap() * ev.phis(n, z);
            let want = z.powi(n as i32) * 2.0;
            // ε_n is formed by cancellation between ψ_n and Fφ_n, so measure against those
            let f = ev.f(z).unwrap().norm();
            let p = ev.phi(n, z).norm() + ev.phis(n, z).norm();
            let scale = p * (ev.psi(n, z).norm() + ev.psis(n, z).norm() + f * p);
            prop_assert!((lhs - want).norm() < 1e-13 * scale, "z={z} lhs={lhs} want={want} scale={scale}");
        }
    }

    // exact derivative of ε against central differences
    #[test]
    fn eps_derivative(z in off_circle(), n in 0usize..5) {
        let ev = strict_ev();
        let h = 1e-5;
        let s = Side::of(z);
        let fd = (ev.eps_on(n, z + h, s) - ev.eps_on(n, z - h, s)) / (2.0 * h);
        let d = ev.deps_exact(n, z).unwrap();
        prop_assert!((fd - d).norm() < 1e-6 * d.norm().max(1.0));
        let fd = (ev.epss_on(n, z + h, s) - ev.epss_on(n, z - h, s)) / (2.0 * h);
        let d = ev.depss_exact(n, z).unwrap();
        prop_assert!((fd - d).norm() < 1e-6 * d.norm().max(1.0));
    }
}
