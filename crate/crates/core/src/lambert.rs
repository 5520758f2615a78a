//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::BoundsError;

/// `-1/e`, the branch point.
pub const BRANCH_POINT: f64 = -0.367_879_441_171_442_33;

const TARGET: f64 = 1e-14;
const MAX_ITER: usize = 64;

/// `W(x)` for `x >= -1/e`: the unique `w >= -1` with `w e^w = x`.
///
/// Seeds: a branch-point expansion close to `-1/e`, the Taylor series near 0
/// and `log x - log log x` above `e`; then Halley steps to a relative step
/// below `1e-14`.
pub fn lambert_w(x: f64) -> Result<f64, BoundsError> {
    if x.is_nan() || x < BRANCH_POINT - 4.0 * f64::EPSILON * BRANCH_POINT.abs() {
        return Err(BoundsError::LambertDomain(x));
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let q = E * x + 1.0;
    if q <= 1e-10 {
        // within rounding of the branch point
        let p = (2.0 * q.max(0.0)).sqrt();
        return Ok(-1.0 + p - p * p / 3.0);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * q).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x.abs() <= 0.25 {
        x * (1.0 - x * (1.0 - x * (1.5 - x * 8.0 / 3.0)))
    } else if x < E {
        // W is concave; log1p gives a guess inside a factor of two here
        0.6 * x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= TARGET * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(w)
}

/// `W(e^t)`, for arguments too large to exponentiate. Solves
/// `w + log w = t` for `w > 0`.
pub fn lambert_w_of_exp(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t < 600.0 {
        return lambert_w(t.exp()).expect("positive argument");
    }
    let mut w = t - t.ln();
    for _ in 0..MAX_ITER {
        let f = w + w.ln() - t;
        let fp = 1.0 + 1.0 / w;
        let fpp = -1.0 / (w * w);
        let step = f / (fp - f * fpp / (2.0 * fp));
        w -= step;
        if step.abs() <= TARGET * w {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w(-1.0 / E).unwrap() + 1.0).abs() < 1e-7);
        assert_eq!(lambert_w(BRANCH_POINT).unwrap(), -1.0);
        // omega constant
        assert!((lambert_w(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
    }

    #[test]
    fn domain() {
        assert!(lambert_w(-0.5).is_err());
        assert!(lambert_w(f64::NAN).is_err());
    }

    #[test]
    fn exp_form_agrees() {
        for t in [-5.0, 0.0, 1.0, 10.0, 100.0, 599.0] {
            let direct = lambert_w(f64::exp(t)).unwrap();
            assert!((lambert_w_of_exp(t) - direct).abs() <= 1e-13 * direct.max(1e-300), "{t}");
        }
        for t in [600.0, 1e4, 1e8] {
            let w = lambert_w_of_exp(t);
            assert!((w + w.ln() - t).abs() <= 1e-12 * t);
        }
    }
}
