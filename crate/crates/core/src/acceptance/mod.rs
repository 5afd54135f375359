//! Optimal compensation for a single task/driver pair.
//!
//! Offering task `i` to driver `j` at compensation `C` has expected cost
//! `P(C) C + (1 - P(C)) c'`, so the best offer minimizes `P(C) (C - c')`
//! over `(0, U]`. Linear and logistic acceptance admit closed forms; any
//! other curve goes through a grid plus golden-section search.

mod lambert;

pub use lambert::{lambert_w0, lambert_w0_of_exp};

use crate::model::AcceptanceModel;
use crate::optim::golden_section;

/// Smallest compensation ever offered. `P` jumps at zero, so when the
/// objective keeps decreasing toward `C = 0+` the infimum is realized here.
pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-6;

/// Knobs shared by the compensation-based solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub epsilon_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
        }
    }
}

/// Grid size for [`optimal_compensation_generic`].
pub const GENERIC_GRID_POINTS: usize = 1001;

/// Which bound, if any, determined the returned compensation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clamp {
    None,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensationResult {
    pub c_star: f64,
    pub p_at_cstar: f64,
    /// Expected cost of the offer, `p C + (1 - p) c'`.
    pub w_star: f64,
    pub clamped: Clamp,
}

impl CompensationResult {
    fn at(c: f64, p: f64, c_prime: f64, clamped: Clamp) -> Self {
        CompensationResult {
            c_star: c,
            p_at_cstar: p,
            w_star: p * c + (1.0 - p) * c_prime,
            clamped,
        }
    }

    /// Result for a pair that cannot receive a positive offer.
    fn degenerate(c_prime: f64) -> Self {
        CompensationResult {
            c_star: 0.0,
            p_at_cstar: 0.0,
            w_star: c_prime,
            clamped: Clamp::Upper,
        }
    }
}

/// Projects an unconstrained minimizer onto `[floor, cap]`.
fn clamp_offer(raw: f64, floor: f64, cap: f64) -> (f64, Clamp) {
    if cap < floor {
        return (cap, Clamp::Upper);
    }
    if raw > cap {
        (cap, Clamp::Upper)
    } else if raw < floor || raw.is_nan() {
        (floor, Clamp::Lower)
    } else {
        (raw, Clamp::None)
    }
}

/// Linear acceptance `min(alpha + beta C, 1)`: the minimizer of
/// `(alpha + beta C)(C - c')` is `c'/2 - alpha/(2 beta)`.
pub fn optimal_compensation_linear(
    alpha: f64,
    beta: f64,
    c_prime: f64,
    cap: f64,
    floor: f64,
) -> CompensationResult {
    if cap <= 0.0 {
        return CompensationResult::degenerate(c_prime);
    }
    let raw = 0.5 * c_prime - alpha / (2.0 * beta);
    let (c, clamped) = clamp_offer(raw, floor, cap);
    let p = (alpha + beta * c).min(1.0);
    CompensationResult::at(c, p, c_prime, clamped)
}

/// Logistic acceptance `1 / (1 + e^{-(gamma + delta C)})`: the stationary
/// point is `c' - (W(e^{gamma + delta c' - 1}) + 1) / delta`. The restricted
/// objective decreases then increases, so clamping the stationary point is
/// optimal.
pub fn optimal_compensation_logistic(
    gamma: f64,
    delta: f64,
    c_prime: f64,
    cap: f64,
    floor: f64,
) -> CompensationResult {
    if cap <= 0.0 {
        return CompensationResult::degenerate(c_prime);
    }
    let w = lambert_w0_of_exp(gamma + delta * c_prime - 1.0);
    let raw = c_prime - (w + 1.0) / delta;
    let (c, clamped) = clamp_offer(raw, floor, cap);
    let p = 1.0 / (1.0 + (-(gamma + delta * c)).exp());
    CompensationResult::at(c, p, c_prime, clamped)
}

/// Numeric minimizer of `P(C)(C - c')` on `(0, cap]` for an arbitrary
/// acceptance curve: a [`GENERIC_GRID_POINTS`]-point grid (plus the floor),
/// then golden-section refinement around the best cell. The result is never
/// worse than the grid minimum but is only a local optimum for multimodal
/// curves.
pub fn optimal_compensation_generic<P>(
    prob: P,
    c_prime: f64,
    cap: f64,
    floor: f64,
) -> CompensationResult
where
    P: Fn(f64) -> f64,
{
    if cap <= 0.0 {
        return CompensationResult::degenerate(c_prime);
    }
    let objective = |c: f64| prob(c) * (c - c_prime);
    let lo = floor.min(cap);

    let n = GENERIC_GRID_POINTS - 1;
    let mut points = Vec::with_capacity(n + 1);
    points.push(lo);
    points.extend((1..=n).map(|k| cap * k as f64 / n as f64).filter(|&c| c > lo));

    let mut best = (0, objective(points[0]));
    for (k, &c) in points.iter().enumerate().skip(1) {
        let v = objective(c);
        if v < best.1 {
            best = (k, v);
        }
    }
    let (k, grid_val) = best;
    let mut c_best = points[k];
    let mut v_best = grid_val;

    let a = points[k.saturating_sub(1)];
    let b = points[(k + 1).min(points.len() - 1)];
    if b > a {
        let refined = golden_section(objective, a, b, 1e-9 * cap, 200);
        if refined.fx < v_best {
            c_best = refined.x.clamp(lo, cap);
            v_best = objective(c_best);
        }
    }
    debug_assert!(v_best <= grid_val);

    let clamped = if c_best >= cap {
        Clamp::Upper
    } else if c_best <= lo {
        Clamp::Lower
    } else {
        Clamp::None
    };
    CompensationResult::at(c_best, prob(c_best), c_prime, clamped)
}

/// Dispatches to the closed form for `model` or the numeric fallback.
pub fn optimal_compensation(
    model: &AcceptanceModel,
    c_prime: f64,
    cap: f64,
    floor: f64,
) -> CompensationResult {
    match model {
        AcceptanceModel::Linear { alpha, beta } => {
            optimal_compensation_linear(*alpha, *beta, c_prime, cap, floor)
        }
        AcceptanceModel::Logistic { gamma, delta } => {
            optimal_compensation_logistic(*gamma, *delta, c_prime, cap, floor)
        }
        AcceptanceModel::Tabulated(_) => {
            optimal_compensation_generic(|c| model.prob(c), c_prime, cap, floor)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = DEFAULT_EPSILON_FLOOR;

    /// Brute-force minimizer of `obj` over `n` evenly spaced points on `(0, cap]`.
    fn grid_min(obj: impl Fn(f64) -> f64, cap: f64, n: usize) -> (f64, f64) {
        (1..=n)
            .map(|k| cap * k as f64 / n as f64)
            .map(|c| (c, obj(c)))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    fn lin_p(alpha: f64, beta: f64) -> impl Fn(f64) -> f64 {
        move |c: f64| if c <= 0.0 { 0.0 } else { (alpha + beta * c).min(1.0) }
    }

    fn logit_p(gamma: f64, delta: f64) -> impl Fn(f64) -> f64 {
        move |c: f64| if c <= 0.0 { 0.0 } else { 1.0 / (1.0 + (-(gamma + delta * c)).exp()) }
    }

    #[test]
    fn linear_without_base_probability_halves_penalty() {
        let r = optimal_compensation_linear(0.0, 0.3, 10.0, 10.0, EPS);
        assert_eq!(r.c_star, 5.0);
        assert_eq!(r.clamped, Clamp::None);
    }

    #[test]
    fn linear_interior_matches_grid() {
        let r = optimal_compensation_linear(0.2, 0.05, 20.0, 16.0, EPS);
        assert!((r.c_star - 8.0).abs() < 1e-12);
        let p = lin_p(0.2, 0.05);
        let (c, _) = grid_min(|c| p(c) * (c - 20.0), 16.0, 1_000_000);
        assert!((c - 8.0).abs() < 1e-4);
    }

    #[test]
    fn linear_negative_vertex_hits_floor() {
        let r = optimal_compensation_linear(0.9, 0.01, 10.0, 10.0, EPS);
        assert_eq!(r.c_star, EPS);
        assert_eq!(r.clamped, Clamp::Lower);
        // The objective increases away from zero.
        let p = lin_p(0.9, 0.01);
        let obj = |c: f64| p(c) * (c - 10.0);
        assert!(obj(1e-3) < obj(1e-2) && obj(1e-2) < obj(1.0));
    }

    #[test]
    fn logistic_matches_reference() {
        let r = optimal_compensation_logistic(-2.0, 0.5, 10.0, 10.0, EPS);
        // Frozen from an independent grid search and scipy's lambertw.
        assert!((r.c_star - 4.885_708_802_004_776).abs() < 1e-9, "{r:?}");
        let p = logit_p(-2.0, 0.5);
        let (c, _) = grid_min(|c| p(c) * (c - 10.0), 10.0, 1_000_000);
        assert!((c - r.c_star).abs() < 1e-3);
    }

    #[test]
    fn logistic_unit_lambert_argument() {
        // gamma + delta c' - 1 = 0 so W(e^0) = omega.
        let (delta, c_prime) = (0.4, 12.0);
        let gamma = 1.0 - delta * c_prime;
        let r = optimal_compensation_logistic(gamma, delta, c_prime, c_prime, EPS);
        let omega = 0.567_143_290_409_783_8;
        assert!((r.c_star - (-(omega - delta * c_prime + 1.0) / delta)).abs() < 1e-12);
        let p = logit_p(gamma, delta);
        let (c, _) = grid_min(|c| p(c) * (c - c_prime), c_prime, 1_000_000);
        assert!((c - r.c_star).abs() < 1e-3);
    }

    #[test]
    fn logistic_upper_clamp() {
        let r = optimal_compensation_logistic(-2.0, 0.5, 10.0, 3.0, EPS);
        assert_eq!(r.c_star, 3.0);
        assert_eq!(r.clamped, Clamp::Upper);
    }

    #[test]
    fn generic_tracks_linear_closed_form() {
        let (alpha, beta, cp, cap) = (0.1, 0.03, 30.0, 25.0);
        let exact = optimal_compensation_linear(alpha, beta, cp, cap, EPS);
        let num = optimal_compensation_generic(lin_p(alpha, beta), cp, cap, EPS);
        assert!((num.c_star - exact.c_star).abs() < 1e-6, "{num:?} vs {exact:?}");
        assert!(num.w_star <= exact.w_star + 1e-12);
    }

    #[test]
    fn generic_threshold_driver_is_paid_the_threshold() {
        let t = 3.3;
        let r = optimal_compensation_generic(|c| if c >= t { 1.0 } else { 0.0 }, 10.0, 10.0, EPS);
        assert!(r.c_star >= t && r.c_star - t <= 10.0 / 1000.0, "{r:?}");
        assert_eq!(r.p_at_cstar, 1.0);
    }

    #[test]
    fn generic_never_accepting_driver() {
        let r = optimal_compensation_generic(|_| 0.0, 7.0, 5.0, EPS);
        assert_eq!(r.c_star, EPS);
        assert_eq!(r.w_star, 7.0);
    }

    #[test]
    fn generic_zero_cap_is_degenerate() {
        let r = optimal_compensation_generic(|_| 1.0, 7.0, 0.0, EPS);
        assert_eq!((r.c_star, r.w_star), (0.0, 7.0));
    }

    #[test]
    fn linear_scale_covariance() {
        // Scaling c' and 1/beta by lambda scales the unconstrained optimum.
        let (alpha, beta, cp) = (0.2, 0.05, 20.0);
        let base = optimal_compensation_linear(alpha, beta, cp, 1e9, EPS).c_star;
        for lambda in [0.5, 2.0, 3.7] {
            let scaled = optimal_compensation_linear(alpha, beta / lambda, cp * lambda, 1e9, EPS).c_star;
            assert!((scaled - lambda * base).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn weight_never_exceeds_refusal_cost(
            alpha in 0.0..1.0f64, beta in 1e-3..5.0f64, c in 0.0..150.0f64, rho in 0.0..0.3f64,
            gamma in -8.0..4.0f64, delta in 1e-3..2.0f64,
        ) {
            let cp = (1.0 + rho) * c;
            let cap = c.min((1.0 - alpha) / beta);
            let r = optimal_compensation_linear(alpha, beta, cp, cap, EPS);
            prop_assert!(r.w_star <= cp + 1e-12);
            prop_assert!(r.c_star >= 0.0 && r.c_star <= cap);
            let r = optimal_compensation_logistic(gamma, delta, cp, c, EPS);
            prop_assert!(r.w_star <= cp + 1e-12);
            prop_assert!(r.c_star >= 0.0 && r.c_star <= c);
        }

        #[test]
        fn closed_forms_beat_a_coarse_grid(
            alpha in 0.0..1.0f64, beta in 1e-3..5.0f64, c in 1.0..150.0f64,
            gamma in -8.0..4.0f64, delta in 1e-3..2.0f64,
        ) {
            let cap = c.min((1.0 - alpha) / beta);
            let r = optimal_compensation_linear(alpha, beta, c, cap, EPS);
            let p = lin_p(alpha, beta);
            let (_, g) = grid_min(|x| p(x) * (x - c), cap, 2000);
            prop_assert!(r.w_star - c <= g + 1e-6);

            let r = optimal_compensation_logistic(gamma, delta, c, c, EPS);
            let p = logit_p(gamma, delta);
            let (_, g) = grid_min(|x| p(x) * (x - c), c, 2000);
            prop_assert!(r.w_star - c <= g + 1e-6);
        }

        #[test]
        fn probability_is_monotone(alpha in 0.0..1.0f64, beta in 1e-3..5.0f64,
                                   gamma in -8.0..4.0f64, delta in 1e-3..2.0f64,
                                   a in 1e-9..100.0f64, b in 1e-9..100.0f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(lin_p(alpha, beta)(lo) <= lin_p(alpha, beta)(hi));
            let m = AcceptanceModel::Logistic { gamma, delta };
            prop_assert!(m.prob(lo) <= m.prob(hi));
        }
    }
}
