use proptest::prelude::*;
use tfe_core::expansion::b0;
use tfe_core::ivp::IntegratorConfig;
use tfe_core::oscillation::*;

fn cfg() -> IntegratorConfig {
    IntegratorConfig::with_tolerances(1e-10, 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equilibrium_is_a_fixed_point(n in 1.55f64..2.95) {
        let b = equilibrium_value(n).unwrap();
        prop_assert!((b / b0(n).unwrap() - 1.0).abs() < 1e-12);
        let p = OscProblem::new(n);
        let r = osc_rhs(&p, &[b, 0.0, 0.0]);
        prop_assert!(r[2].abs() < 1e-9 * b.abs().max(1.0), "residual {}", r[2]);
    }

    #[test]
    fn rhs_is_odd(n in 1.0f64..2.9, x in -3.0f64..3.0, d1 in -3.0f64..3.0, d2 in -3.0f64..3.0) {
        let p = OscProblem::new(n);
        let a = osc_rhs(&p, &[x, d1, d2]);
        let b = osc_rhs(&p, &[-x, -d1, -d2]);
        for i in 0..3 {
            prop_assert_eq!(a[i], -b[i]);
        }
    }
}

#[test]
fn no_equilibrium_outside_range() {
    assert!(matches!(equilibrium_value(1.4), Err(OscError::NoEquilibrium { .. })));
    assert!(matches!(equilibrium_value(3.0), Err(OscError::NoEquilibrium { .. })));
}

#[test]
fn mirrored_start_gives_mirrored_orbit() {
    let p = OscProblem::new(1.5);
    let a = run_osc(&p, [0.7, 0.0, 0.0], &cfg()).unwrap();
    let b = run_osc(&p, [-0.7, 0.0, 0.0], &cfg()).unwrap();
    for i in 0..=100 {
        let s = 50.0 * i as f64 / 100.0;
        let (x, y) = (a.dense_eval(s).unwrap(), b.dense_eval(s).unwrap());
        assert!((x[0] + y[0]).abs() < 1e-8, "s={s}: {} vs {}", x[0], y[0]);
    }
}

#[test]
fn small_oscillations_settle_on_a_periodic_orbit() {
    let r = classify_attractor(&OscProblem::new(1.0), &cfg()).unwrap();
    assert_eq!(r.kind, AttractorKind::Periodic);
    assert!(r.sign_changing);
    assert!(r.period.unwrap() > 0.0);
}

#[test]
fn periodic_orbit_is_stable_to_perturbation() {
    let p = OscProblem::new(1.5);
    let base = classify_attractor(&p, &cfg()).unwrap();
    let init = p.default_init();
    let pert = classify_attractor_from(&p, [1.01 * init[0], 0.01, 0.0], &cfg()).unwrap();
    assert_eq!(base.kind, AttractorKind::Periodic);
    assert_eq!(pert.kind, AttractorKind::Periodic);
    let (ta, tb) = (base.period.unwrap(), pert.period.unwrap());
    assert!((ta / tb - 1.0).abs() < 1e-3, "{ta} vs {tb}");
    let (aa, ab) = (base.amplitude.unwrap(), pert.amplitude.unwrap());
    assert!((aa / ab - 1.0).abs() < 1e-3, "{aa} vs {ab}");
}

#[test]
fn period_robust_to_eps() {
    let p = OscProblem::new(1.6);
    let a = classify_attractor(&p, &cfg()).unwrap().period.unwrap();
    let b = classify_attractor(&OscProblem { eps: 0.5 * p.eps, ..p }, &cfg())
        .unwrap()
        .period
        .unwrap();
    assert!((a / b - 1.0).abs() < 1e-3, "{a} vs {b}");
}

#[test]
fn period_grows_toward_threshold() {
    let periods: Vec<f64> = [1.6, 1.7, 1.74, 1.75]
        .iter()
        .map(|&n| {
            let r = classify_with_retries(&OscProblem::new(n), &cfg()).unwrap();
            assert_eq!(r.kind, AttractorKind::Periodic, "n={n}");
            r.period.unwrap()
        })
        .collect();
    assert!(periods.windows(2).all(|w| w[1] > w[0]), "{periods:?}");
}

#[test]
fn beyond_threshold_orbits_escape() {
    for n in [1.9, 2.5] {
        let r = classify_attractor(&OscProblem::new(n), &cfg()).unwrap();
        assert_eq!(r.kind, AttractorKind::Escape, "n={n}: {r:?}");
        assert!(r.period.is_none());
    }
}

#[test]
fn threshold_search_over_wide_bracket() {
    let est = find_nh(1.0, 2.5, 1e-2, &OscProblem::new(1.0), &cfg()).unwrap();
    assert!(!est.ended_on_indeterminate);
    assert!(est.hi - est.lo <= 1e-2);
    assert!((est.n_h - 1.76).abs() < 0.02, "{}", est.n_h);
}

#[test]
fn threshold_search_rejects_one_sided_bracket() {
    let e = find_nh(1.8, 1.9, 1e-2, &OscProblem::new(1.8), &cfg()).unwrap_err();
    assert!(matches!(e, OscError::BracketInvalid { .. }), "{e:?}");
}

#[test]
fn tabulated_orbit_is_periodic() {
    let orbit = periodic_orbit(&OscProblem::new(1.7), &cfg()).unwrap();
    for s in [0.3, 1.7, 4.2] {
        let a = orbit.eval(s);
        let b = orbit.eval(s + orbit.period);
        let c = orbit.eval(s - 3.0 * orbit.period);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-12 && (a[i] - c[i]).abs() < 1e-9);
        }
    }
    let start = orbit.eval(0.0);
    let end = orbit.trajectory().last_state();
    assert!((start[0] - end[0]).abs() < 1e-3 * start[0].abs(), "{start:?} vs {end:?}");
}
