use proptest::prelude::*;
use tfe_core::expansion::*;
use tfe_core::ivp::IntegratorConfig;
use tfe_core::oscillation::{periodic_orbit, OscProblem};

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn origin(n: f64, d: f64, opts: &BackshootOptions) -> [f64; 3] {
    backshoot_positive(n, d, opts, &cfg()).unwrap().origin
}

#[test]
fn cubic_has_one_root_above_two() {
    for i in 0..=28 {
        let n = 1.55 + 0.05 * i as f64;
        for rule in [ExponentRule::Characteristic, ExponentRule::Linearized] {
            let h = |l: f64| match rule {
                ExponentRule::Characteristic => hn(n, l).unwrap(),
                ExponentRule::Linearized => hn_linearized(n, l).unwrap(),
            };
            let samples: Vec<f64> = (0..=400).map(|j| h(2.0 + 2.0 * j as f64 / 400.0)).collect();
            let changes = samples.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
            assert_eq!(changes, 1, "n={n} {rule:?}");
            let (l, _) = solve_l_with(n, rule).unwrap();
            assert!(h(l).abs() < 1e-12);
        }
    }
}

#[test]
fn exponent_admissible_on_reference_grid() {
    for n in [1.7, 1.75, 1.8, 1.9, 2.0] {
        let (l, adm) = solve_l(n).unwrap();
        let (lo, hi) = admissible_window(n);
        assert!(adm && l > lo && l < hi, "n={n}: l={l}");
        assert!(l > 3.0 / n);
    }
}

#[test]
fn rules_agree_at_n2() {
    let (a, _) = solve_l_with(2.0, ExponentRule::Characteristic).unwrap();
    let (b, _) = solve_l_with(2.0, ExponentRule::Linearized).unwrap();
    assert!((a - b).abs() < 1e-13);
}

#[test]
fn out_of_range_inputs() {
    assert!(matches!(b0(1.5), Err(ExpansionError::OutOfRange { .. })));
    assert!(matches!(b0(3.0), Err(ExpansionError::OutOfRange { .. })));
    let p = ExpansionParams::new(2.0, 1.0).unwrap();
    assert!(matches!(eval_expansion(&p, 0.0), Err(ExpansionError::NonPositiveZ { .. })));
    assert!(matches!(
        eval_expansion(&p.with_l(5.0), 0.1),
        Err(ExpansionError::NotAdmissible { .. })
    ));
    let opts = BackshootOptions {
        delta: 0.5,
        ..Default::default()
    };
    assert!(matches!(
        backshoot_positive(2.0, 0.0, &opts, &cfg()),
        Err(ExpansionError::InvalidDelta { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn leading_term_dominates_near_interface(n in 1.6f64..2.9, d in -10.0f64..10.0) {
        let p = ExpansionParams::with_rule(n, d, ExponentRule::Linearized).unwrap();
        let gap = |z: f64| (eval_expansion(&p, z).unwrap()[0] / (p.b0 * z.powf(p.m)) - 1.0).abs();
        prop_assert!(gap(1e-8) < gap(1e-4));
        prop_assert!(gap(1e-4) < gap(1e-1) || d == 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences(d in -5.0f64..5.0, z in 1e-3f64..1e-1) {
        let p = ExpansionParams::new(1.9, d).unwrap();
        let h = 1e-6 * z;
        let s = eval_expansion_three_term(&p, z).unwrap();
        let (a, b) = (eval_expansion_three_term(&p, z - h).unwrap(), eval_expansion_three_term(&p, z + h).unwrap());
        for i in 0..3 {
            let fd = (b[i] - a[i]) / (2.0 * h);
            prop_assert!((fd - s[i + 1]).abs() < 1e-5 * s[i + 1].abs().max(1.0), "i={} fd={} exact={}", i, fd, s[i + 1]);
        }
    }
}

#[test]
fn residual_gate_separates_exponents_at_n2() {
    let grid = default_residual_grid();
    for d in [-1.0, 1.0] {
        let p = ExpansionParams::new(2.0, d).unwrap();
        let good = residual_order(&p, &grid).unwrap();
        assert!(good.passes, "{good:?}");
        let bad = residual_order(&p.with_l(p.l + 0.1), &grid).unwrap();
        assert!(!bad.passes, "{bad:?}");
    }
}

#[test]
fn backshoot_continuous_in_d() {
    let opts = BackshootOptions::default();
    let zero = origin(1.9, 0.0, &opts);
    assert!(zero[0] > 0.0);
    for d in [-1e-6, 1e-6] {
        let o = origin(1.9, d, &opts);
        for i in 0..3 {
            assert!((o[i] - zero[i]).abs() < 1e-4 * zero[i].abs().max(1.0), "D={d}: {o:?} vs {zero:?}");
        }
    }
}

#[test]
fn large_d_signs_in_reflected_frame() {
    let opts = BackshootOptions::default();
    let big = backshoot_positive(1.9, 1e3, &opts, &cfg()).unwrap();
    assert!(big.reflected_slope() > 0.0);
    for d in [-2.0, -10.0, -50.0] {
        let o = origin(1.9, d, &opts);
        assert!(o[0] < 0.0 && o[1] > 0.0, "D={d}: {o:?}");
    }
}

#[test]
fn seed_offset_convergence() {
    let half = BackshootOptions {
        delta: 5e-4,
        ..Default::default()
    };
    let a = origin(1.9, 0.0, &BackshootOptions::default());
    let b = origin(1.9, 0.0, &half);
    assert!((a[0] - b[0]).abs() < 1e-4 * a[0].abs(), "{a:?} vs {b:?}");
    assert!((a[1] - b[1]).abs() < 1e-3 * a[1].abs().max(1.0), "{a:?} vs {b:?}");
}

#[test]
fn d_scan_finds_symmetric_profile() {
    let opts = BackshootOptions::default();
    let table = scan_d(1.9, &default_d_grid(), &opts, &cfg());
    assert_eq!(table.rows.len(), 41);
    let root = table.best_positive_root().expect("root");
    assert!(root.d_lo < root.d_star && root.d_star < root.d_hi);
    assert!(root.f1.abs() < 1e-8, "{root:?}");
    assert!((root.d_star + 1.4616).abs() < 1e-3, "{root:?}");
    assert!(table.min_abs_f1 <= root.f1.abs());
}

#[test]
fn both_rules_and_seed_orders_find_a_root() {
    for rule in [ExponentRule::Characteristic, ExponentRule::Linearized] {
        for seed in [SeedOrder::TwoTerm, SeedOrder::ThreeTerm] {
            let opts = BackshootOptions {
                rule,
                seed,
                ..Default::default()
            };
            let table = scan_d(1.9, &default_d_grid(), &opts, &cfg());
            assert!(table.best_positive_root().is_some(), "{rule:?} {seed:?}");
        }
    }
}

#[test]
fn oscillatory_backshoot_is_phase_periodic() {
    let orbit = periodic_orbit(&OscProblem::new(1.7), &IntegratorConfig::with_tolerances(1e-10, 1e-12)).unwrap();
    let opts = BackshootOptions::default();
    assert!(matches!(
        backshoot_oscillatory(1.7, 0.0, None, &opts, &cfg()),
        Err(ExpansionError::OrbitMissing { .. })
    ));
    for s0 in [0.5, 2.0] {
        let a = backshoot_oscillatory(1.7, s0, Some(&orbit), &opts, &cfg()).unwrap();
        let b = backshoot_oscillatory(1.7, s0 + orbit.period, Some(&orbit), &opts, &cfg()).unwrap();
        for i in 0..3 {
            assert!((a.origin[i] - b.origin[i]).abs() < 1e-6 * a.origin[i].abs().max(1.0));
        }
    }
    let rows = scan_s0(1.7, &orbit, 16, &opts, &cfg());
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.s0 >= 0.0 && r.s0 < orbit.period));
    assert!(rows.iter().filter(|r| r.terminal.is_ok()).count() >= 8);
}

#[test]
fn forward_scaling_normalizes_height() {
    let bs = backshoot_positive(1.9, 0.0, &BackshootOptions::default(), &cfg()).unwrap();
    let (a, b) = forward_scaling(&bs, 1.0);
    assert!((a * bs.origin[0] - 1.0).abs() < 1e-14);
    assert!((b.powi(4) - a.powf(1.9)).abs() < 1e-10 * b.powi(4));
}
