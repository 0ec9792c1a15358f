use biorth::deform::{rebuild, run_rk4, schlesinger_rhs, Trajectory};
use biorth::lax::{commutator, max_entry};
use biorth::suites::{default_trajectory, strict_weight};
use biorth::{Config, Error, Mat2, C64};
use proptest::prelude::*;

#[test]
fn trajectory_json_errors() {
    assert!(matches!(Trajectory::from_json(r#"{"j":0,"from":[2,0],"to":[2.1,0]}"#), Err(Error::Input(_))));
    assert!(matches!(Trajectory::from_json(r#"{"j":2,"path":"spiral","from":[2,0],"to":[2.1,0]}"#), Err(Error::Input(_))));
    assert!(matches!(Trajectory::from_json("{\"j\":2,\n\"from\":[2,0]"), Err(Error::Json(_))));
    let t = Trajectory::from_json(r#"{"j":2,"from":[2,0],"to":[2.5,0],"t_span":[0,0.5]}"#).unwrap();
    assert_eq!(t.j, 1);
    assert!((t.z(0.25) - C64::new(2.25, 0.0)).norm() < 1e-15);
}

#[test]
fn crossing_the_circle_is_rejected() {
    let t = Trajectory { j: 1, from: C64::new(2.0, 0.0), to: C64::new(0.5, 0.0), t_span: (0.0, 1.0) };
    assert!(t.validate(&strict_weight()).is_err());
    let t = Trajectory { j: 1, from: C64::new(2.0, 0.0), to: C64::new(3.0, 0.0), t_span: (0.0, 1.0) };
    assert!(t.validate(&strict_weight()).is_err());
}

#[test]
fn short_flow_matches_rebuild() {
    let cfg = Config::default();
    let w = strict_weight();
    let traj = default_trajectory();
    let (s0, _) = rebuild(&w, &traj, 2, 2, 0.0, &cfg).unwrap();
    let (s1, _) = rebuild(&w, &traj, 2, 2, 0.1, &cfg).unwrap();
    let end = run_rk4(&s0, &traj, 32).unwrap().pop().unwrap();
    assert!(end.max_diff(&s1) < 1e-7, "{}", end.max_diff(&s1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // the rates keep traces fixed and make the residue sum evolve by [B_∞, ·]
    #[test]
    fn rhs_structure(t in 0.0f64..0.1, n in 1usize..4) {
        let cfg = Config::default();
        let w = strict_weight();
        let traj = default_trajectory();
        let (st, _) = rebuild(&w, &traj, n, n, t, &cfg).unwrap();
        let rate = schlesinger_rhs(&st, &traj.zdots(w.m())).unwrap();
        for d in &rate.da {
            prop_assert!(d.trace().norm() < 1e-10 * max_entry(&d).max(1.0));
        }
        let sum: Mat2 = st.a.iter().fold(Mat2::zeros(), |acc, m| acc + m);
        let dsum: Mat2 = rate.da.iter().fold(Mat2::zeros(), |acc, m| acc + m);
        let want = commutator(&rate.b_inf, &sum);
        prop_assert!(max_entry(&(dsum - want)) < 1e-9 * max_entry(&want).max(1.0));
    }

    // ẇ/w = −Σ ρ_j ż_j/(z − z_j), by differencing the weight along the path
    #[test]
    fn weight_rate(t in 0.01f64..0.09, r in 0.3f64..0.9, th in -3.0f64..3.0) {
        let w = strict_weight();
        let traj = default_trajectory();
        let z = C64::from_polar(r, th);
        let h = 1e-5;
        let d = (traj.weight_at(&w, t + h).eval(z).unwrap() - traj.weight_at(&w, t - h).eval(z).unwrap()) / (2.0 * h);
        let wt = traj.weight_at(&w, t);
        let got = d / wt.eval(z).unwrap();
        let zd = traj.zdots(w.m());
        let want: C64 = wt.singularities.iter().zip(&zd).map(|(s, &v)| -s.rho * v / (z - s.z)).sum();
        prop_assert!((got - want).norm() < 1e-6 * want.norm());
    }
}
