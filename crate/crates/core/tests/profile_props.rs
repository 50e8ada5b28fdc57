use proptest::prelude::*;
use tfe_core::ivp::IntegratorConfig;
use tfe_core::profile::*;

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn critical(p: &ProfileProblem) -> CriticalShoot {
    let (lo, hi) = default_mu_bracket(p.n, p.scale);
    find_mu(p, lo, hi, 1e-12, &cfg()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scaling_covariance(b in 0.7f64..1.5, n in prop::sample::select(vec![1.8, 2.0, 2.5])) {
        let p = ProfileProblem::new(n);
        let mu = -0.3;
        let base = shoot(&p, mu, &cfg()).unwrap();
        let a = b.powf(4.0 / n);
        let scaled = shoot_from(&p, 0.0, [a, 0.0, a * mu / (b * b)], &cfg()).unwrap();
        let span = 0.9 * base.y_end().min(scaled.y_end() / b);
        for i in 0..=50 {
            let y = span * i as f64 / 50.0;
            let f = base.traj.dense_eval(y).unwrap()[0];
            let g = scaled.traj.dense_eval(b * y).unwrap()[0];
            prop_assert!(((g / a) / f - 1.0).abs() < 1e-6, "y={} f={} g/a={}", y, f, g / a);
        }
    }
}

#[test]
fn single_switch_along_mu() {
    for (n, lo) in [(1.8, -1.0), (2.0, -1.0), (3.0, -10.0)] {
        let p = ProfileProblem::new(n);
        let outcomes: Vec<Outcome> = (0..=40)
            .map(|i| shoot(&p, lo * i as f64 / 40.0, &cfg()).unwrap().outcome)
            .collect();
        assert!(outcomes.iter().all(|o| *o != Outcome::Indeterminate), "n={n}: {outcomes:?}");
        let switches = outcomes.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(switches, 1, "n={n}: {outcomes:?}");
        assert_eq!(outcomes[0], Outcome::Overshoot);
    }
}

#[test]
fn zeros_stable_under_tighter_tolerances() {
    for n in [1.8, 2.0] {
        let p = ProfileProblem::new(n);
        let c = critical(&p);
        for mu in [c.mu_star - 0.01, c.mu_star - 0.05] {
            let a = shoot(&p, mu, &cfg()).unwrap();
            let b = shoot(&p, mu, &IntegratorConfig::with_tolerances(1e-13, 1e-13)).unwrap();
            assert_eq!(a.zeros.len(), b.zeros.len());
            for (x, y) in a.zeros.iter().zip(&b.zeros) {
                assert!((x - y).abs() < 1e-4);
            }
        }
    }
}

#[test]
fn interface_estimate_robust_to_eps() {
    let p = ProfileProblem::new(2.0);
    let a = critical(&p);
    let b = critical(&p.with_eps(0.5 * p.eps));
    assert!((a.y0 - b.y0).abs() < 1e-4, "{} vs {}", a.y0, b.y0);
}

#[test]
fn thresholds_insensitive_over_two_decades() {
    let base = ProfileProblem::new(2.0);
    let reference = critical(&base).mu_star;
    for scale in [0.1, 10.0] {
        for which in 0..3 {
            let mut p = base;
            match which {
                0 => p.blowup_f *= scale,
                1 => p.slope_cap *= scale,
                _ => p.undershoot_margin *= scale,
            }
            let mu = critical(&p).mu_star;
            assert!((mu - reference).abs() < 1e-6, "threshold {which} x{scale}: {mu} vs {reference}");
        }
    }
}

#[test]
fn first_zero_n175() {
    let r = shoot(&ProfileProblem::new(1.75), -0.434097009, &cfg()).unwrap();
    assert_eq!(r.outcome, Outcome::Undershoot);
    assert!((r.zeros[0] - 2.6288).abs() < 1e-3, "{:?}", r.zeros);
}

#[test]
fn no_resolved_zeros_at_quoted_critical_mu() {
    let p = ProfileProblem::new(1.75987);
    let r = microscope(&p, -0.435513146293, &cfg()).unwrap();
    let y0 = r.interface_estimate.unwrap();
    assert!((y0 - 2.6197).abs() < 1e-2);
    let z = sign_changes_near_interface(&r, DEFAULT_WINDOW, 1e-7);
    assert!(z.is_empty(), "{z:?}");
}

#[test]
fn oscillatory_critical_shot_has_hump() {
    let c = critical(&ProfileProblem::new(1.7));
    assert!(!c.zeros_near_interface.is_empty());
    assert!((c.zeros_near_interface[0] - 2.67).abs() < 0.05);
    assert_eq!(c.result_low.outcome, Outcome::Undershoot);
    assert_eq!(c.result_high.outcome, Outcome::Overshoot);
    assert!(c.bracket_width <= 1e-12);
}

#[test]
fn classification_rules() {
    let p = ProfileProblem::new(2.0);
    let mut low_cap = p;
    low_cap.blowup_f = 10.0;
    let blow = shoot(&low_cap, 1.0, &cfg()).unwrap();
    assert_eq!(blow.terminal, TerminalReason::BlowUp);
    assert_eq!(classify(&blow), Outcome::Overshoot);

    let mut short = p;
    short.y_max = 0.5;
    let r = shoot(&short, -0.3, &cfg()).unwrap();
    assert_eq!(r.terminal, TerminalReason::Horizon);
    assert_eq!(classify(&r), Outcome::Indeterminate);

    let under = shoot(&p, -0.9, &cfg()).unwrap();
    assert_eq!(classify(&under), Outcome::Undershoot);
    assert!(under.min_f() <= -p.undershoot_margin * 0.999);
}

#[test]
fn unit_scale_matches_similarity_scale() {
    let s = critical(&ProfileProblem::new(3.0));
    let u = critical(&ProfileProblem::new(3.0).with_scale(ProfileScale::Unit));
    let (cy, cmu) = scale_factors(3.0, ProfileScale::Similarity, ProfileScale::Unit);
    assert!((u.mu_star - cmu * s.mu_star).abs() < 1e-6 * u.mu_star.abs());
    assert!((u.y0 - cy * s.y0).abs() < 1e-5);
}

#[test]
fn find_mu_is_deterministic() {
    let p = ProfileProblem::new(1.8);
    let a = critical(&p);
    let b = critical(&p);
    assert_eq!(a.mu_star.to_bits(), b.mu_star.to_bits());
    assert_eq!(a.y0.to_bits(), b.y0.to_bits());
}
