use tfe_core::ivp::IntegratorConfig;
use tfe_core::profile::{default_mu_bracket, find_mu, ProfileProblem};
use tfe_core::special::*;

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

const MUS: [f64; 4] = [-2.0, -10.0, -100.0, -1000.0];

#[test]
fn n4_minimum_stays_positive() {
    let rows = nonexistence_scan_n4(&MUS, &cfg()).unwrap();
    assert_eq!(rows.len(), MUS.len());
    for r in &rows {
        assert!(r.min_f > 0.0 && r.y_at_min > 0.0, "{r:?}");
    }
}

#[test]
fn n4_minimum_robust_to_eps_and_tolerance() {
    let base = nonexistence_scan_n4(&MUS, &cfg()).unwrap();
    let p = ProfileProblem::new(4.0);
    let half_eps = nonexistence_scan(&p.with_eps(0.5 * p.eps), &MUS, &cfg()).unwrap();
    let tight = nonexistence_scan(&p, &MUS, &IntegratorConfig::with_tolerances(1e-13, 1e-13)).unwrap();
    for ((a, b), c) in base.iter().zip(&half_eps).zip(&tight) {
        assert!(b.min_f > 0.0 && c.min_f > 0.0);
        assert!((a.min_f / b.min_f - 1.0).abs() < 1e-3, "{a:?} vs {b:?}");
        assert!((a.min_f / c.min_f - 1.0).abs() < 1e-3, "{a:?} vs {c:?}");
    }
}

#[test]
fn n4_minimum_decays_like_inverse_square() {
    let rows = nonexistence_scan_n4(&MUS[1..], &cfg()).unwrap();
    for w in rows.windows(2) {
        let ratio = w[0].min_f / w[1].min_f;
        assert!((ratio / 100.0 - 1.0).abs() < 0.05, "ratio {ratio}");
    }
}

#[test]
fn n3_log_fit_is_deterministic_and_smooth() {
    let p = ProfileProblem::new(3.0);
    let (lo, hi) = default_mu_bracket(3.0, p.scale);
    let c = find_mu(&p, lo, hi, 1e-12, &cfg()).unwrap();
    let a = logfit_n3(c.overshoot_side(), DEFAULT_LOG_WINDOW).unwrap();
    let b = logfit_n3(c.overshoot_side(), DEFAULT_LOG_WINDOW).unwrap();
    assert_eq!(a, b);
    assert!(a.c > 0.0 && a.rms < 1e-2, "{a:?}");
    assert!(matches!(
        logfit_n3(c.overshoot_side(), (1e-2, 1e-4)),
        Err(SpecialError::WindowOutOfRange { .. })
    ));
}
