use proptest::prelude::*;
use std::f64::consts::PI;
use tfe_core::ivp::*;

fn harmonic(_: f64, y: &[f64; 2]) -> [f64; 2] {
    [y[1], -y[0]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reversal_returns_to_start(a in -2.0f64..2.0, b in -2.0f64..2.0, t1 in 0.5f64..6.0) {
        let c = IntegratorConfig::default();
        let fwd = integrate(harmonic, 0.0, [a, b], t1, &c).unwrap();
        let back = integrate(harmonic, t1, fwd.last_state(), 0.0, &c).unwrap();
        let y = back.last_state();
        let bound = 1e3 * (c.atol + c.rtol * a.abs().max(b.abs()));
        prop_assert!((y[0] - a).abs() < bound && (y[1] - b).abs() < bound);
    }

    #[test]
    fn event_times_are_bit_identical(phase in 0.0f64..PI, t_end in 4.0f64..12.0) {
        let c = IntegratorConfig::default();
        let ev = [EventSpec::new(|_, y: &[f64; 2]| y[0], Direction::Any, false)];
        let y0 = [phase.sin(), phase.cos()];
        let a = integrate_with_events(harmonic, 0.0, y0, t_end, &ev, &c).unwrap();
        let b = integrate_with_events(harmonic, 0.0, y0, t_end, &ev, &c).unwrap();
        prop_assert_eq!(a.events.len(), b.events.len());
        for (x, y) in a.events.iter().zip(&b.events) {
            prop_assert_eq!(x.t.to_bits(), y.t.to_bits());
        }
    }

    #[test]
    fn event_location_matches_sine_zeros(phase in 0.01f64..3.1, t_end in 4.0f64..12.0) {
        // y = sin(t + phase): zeros at k pi - phase
        let c = IntegratorConfig::default();
        let ev = [EventSpec::new(|_, y: &[f64; 2]| y[0], Direction::Any, false)];
        let tr = integrate_with_events(harmonic, 0.0, [phase.sin(), phase.cos()], t_end, &ev, &c).unwrap();
        for (k, e) in tr.events.iter().enumerate() {
            let exact = (k as f64 + 1.0) * PI - phase;
            prop_assert!((e.t - exact).abs() < 1e-9, "{} vs {}", e.t, exact);
        }
    }

    #[test]
    fn dense_output_between_nodes(t in 0.0f64..1.0) {
        let c = IntegratorConfig::with_tolerances(1e-10, 1e-10);
        let tr = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, &c).unwrap();
        let v = tr.dense_eval(t).unwrap()[0];
        prop_assert!((v - t.exp()).abs() < 1e3 * c.rtol * t.exp());
    }

    #[test]
    fn nan_is_never_silent(t_bad in 0.1f64..0.9) {
        let r = integrate(move |t, y: &[f64; 1]| [if t > t_bad { f64::NAN } else { y[0] }], 0.0, [1.0], 1.0,
            &IntegratorConfig::default());
        prop_assert!(
            matches!(r, Err(IvpError::NonFinite { .. })),
            "expected NonFinite, got {:?}",
            r.map(|t| t.t_last())
        );
    }
}

#[test]
fn tightening_tolerance_reduces_error() {
    let err = |tol: f64| {
        let c = IntegratorConfig::with_tolerances(tol, tol);
        let t = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, &c).unwrap();
        (t.last_state()[0] - std::f64::consts::E).abs()
    };
    let e: Vec<f64> = [1e-7, 1e-9, 1e-11].iter().map(|&t| err(t)).collect();
    assert!(e.windows(2).all(|w| w[1] < w[0] / 30.0), "{e:?}");
}

#[test]
fn terminal_event_truncates_trajectory() {
    let c = IntegratorConfig::default();
    let ev = [EventSpec::new(|t, _: &[f64; 1]| t - 0.25, Direction::Rising, true)];
    let tr = integrate_with_events(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, &ev, &c).unwrap();
    assert_eq!(tr.stop, Stop::Event(0));
    assert!((tr.t_last() - 0.25).abs() < 1e-14);
    assert!(tr.times().windows(2).all(|w| w[1] > w[0]));
    assert!((tr.last_state()[0] - 0.25f64.exp()).abs() < 1e-10);
}

#[test]
fn resample_is_uniform_and_spans_run() {
    let tr = integrate(harmonic, 0.0, [1.0, 0.0], 2.0, &IntegratorConfig::default()).unwrap();
    let s = tr.resample(5);
    assert_eq!(s.len(), 5);
    assert_eq!(s[0].0, 0.0);
    assert_eq!(s[4].0, 2.0);
    assert!((s[2].1[0] - 1f64.cos()).abs() < 1e-9);
}
