//! Scalar bracketing root finders.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{a}, {b}] (f(a) = {fa}, f(b) = {fb})")]
    NoBracket { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("function value is not finite at x = {x}")]
    NonFinite { x: f64 },
}

/// Root of `f` on `[a, b]` by a secant/bisection hybrid (Illinois false
/// position with a bisection fallback), stopped once the bracket is below
/// `xtol` or an exact zero is hit.
pub fn bracketed_root(f: impl Fn(f64) -> f64, a: f64, b: f64, xtol: f64) -> Result<f64, RootError> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite { x: a });
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite { x: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { a, b, fa, fb });
    }
    let mut side = 0i8;
    for iter in 0..400 {
        if (b - a).abs() <= xtol {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        let lo = a.min(b);
        let hi = a.max(b);
        // every fourth step, or when the secant leaves the bracket, bisect
        if iter % 4 == 3 || !(x > lo && x < hi) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(RootError::NonFinite { x });
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if x == a && x == b {
            break;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Plain bisection on a predicate: `pred(lo) != pred(hi)` is assumed; returns
/// the final `(lo, hi)` with `pred(lo) == pred(lo_in)` after the bracket
/// shrinks below `xtol`.
pub fn bisect_predicate(mut pred: impl FnMut(f64) -> bool, lo: f64, hi: f64, xtol: f64) -> (f64, f64) {
    let p_lo = pred(lo);
    let (mut lo, mut hi) = (lo, hi);
    while (hi - lo).abs() > xtol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) == p_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_of_two() {
        let r = bracketed_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn reversed_bracket() {
        let r = bracketed_root(|x| x.cos(), 3.0, 0.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn no_bracket() {
        assert!(matches!(
            bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(RootError::NoBracket { .. })
        ));
    }

    #[test]
    fn flat_tail_function() {
        // very asymmetric: secant alone converges slowly
        let r = bracketed_root(|x| x.powi(9) - 1e-9, 0.0, 4.0, 1e-14).unwrap();
        assert!((r - 0.1).abs() < 1e-12);
    }

    #[test]
    fn predicate_bisection() {
        let (lo, hi) = bisect_predicate(|x| x > 0.3, 0.0, 1.0, 1e-12);
        assert!(lo <= 0.3 && hi >= 0.3 && hi - lo <= 1e-12);
    }
}
