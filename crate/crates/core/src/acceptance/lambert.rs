//! Principal branch of the Lambert W function, `W(x) e^{W(x)} = x` for
//! `x >= 0`, by Halley iteration.

use crate::error::{Error, Result};

const MAX_ITER: usize = 50;
const STEP_TOL: f64 = 1e-14;

/// `W0(x)` for `x >= 0`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::LambertDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = if x <= std::f64::consts::E {
        x.ln_1p()
    } else {
        let l = x.ln();
        l - l.ln()
    };
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= STEP_TOL * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// `W0(e^y)` evaluated in the log domain, so it stays finite where `e^y`
/// overflows. Solves `e^t + t = y` for `t = ln W` and returns `e^t`.
pub fn lambert_w0_of_exp(y: f64) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    if y == f64::INFINITY {
        return f64::INFINITY;
    }
    if y == f64::NEG_INFINITY {
        return 0.0;
    }
    // For very negative y, W(e^y) = e^y - e^{2y} + ..., so t = y - e^y.
    if y < -40.0 {
        let w = y.exp();
        return w * (1.0 - w);
    }
    let mut t = if y >= 1.0 {
        (y - y.ln()).ln()
    } else {
        y.exp().ln_1p().ln()
    };
    for _ in 0..MAX_ITER {
        let et = t.exp();
        let r = et + t - y;
        let r1 = et + 1.0;
        let step = 2.0 * r * r1 / (2.0 * r1 * r1 - r * et);
        t -= step;
        if step.abs() <= STEP_TOL * (1.0 + t.abs()) {
            break;
        }
    }
    t.exp()
}
