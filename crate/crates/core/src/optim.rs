//! One-dimensional minimization helpers.

/// `phi - 1 = 1 / phi`.
pub const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMin {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Golden-section search for a minimum of `f` on `[a, b]`. Stops when the
/// bracket is narrower than `tol` or after `max_iter` iterations. Returns
/// the best point evaluated, which for unimodal `f` is within `tol` of the
/// minimizer; otherwise it is a local minimum.
pub fn golden_section<F>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> LineMin
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    let mut best = if fd < fc { (d, fd) } else { (c, fc) };

    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
        evaluations += 1;
    }
    LineMin {
        x: best.0,
        fx: best.1,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let r = golden_section(|p| (p - 3.0) * (p - 3.0), 0.0, 10.0, 1e-7, 200);
        assert!((r.x - 3.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn boundary_minimum() {
        let r = golden_section(|p| p, 2.0, 5.0, 1e-9, 200);
        assert!((r.x - 2.0).abs() < 1e-8);
    }

    #[test]
    fn reversed_bracket() {
        let r = golden_section(|p| (p + 1.0).powi(2), 4.0, -4.0, 1e-9, 200);
        assert!((r.x + 1.0).abs() < 1e-8);
    }
}
