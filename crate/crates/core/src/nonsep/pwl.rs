//! Objective split and breakpoint grids for the piecewise-linear model.
//!
//! The expected cost of an offer `P(C) C + (1 - P(C)) c'` is written as
//! `f(C) + g x` with `f(0) = 0`, so that `f` can be sampled on a grid and
//! interpolated while `g` stays linear in the offer binary.

use crate::model::{AcceptanceModel, PairParams, ProblemInstance};

/// `f(C) + g` for one pair.
#[derive(Debug, Clone)]
pub struct SplitObjective<'a> {
    model: &'a AcceptanceModel,
    c_prime: f64,
    quadratic: bool,
    /// Coefficient of the offer binary.
    pub g: f64,
}

impl SplitObjective<'_> {
    pub fn f(&self, c: f64) -> f64 {
        if c <= 0.0 {
            return 0.0;
        }
        match *self.model {
            AcceptanceModel::Linear { alpha, beta } if self.quadratic => {
                beta * c * c + (alpha - beta * self.c_prime) * c
            }
            _ => self.model.prob(c) * (c - self.c_prime),
        }
    }

    /// Whether `f` is convex on `[0, cap]`, which makes the segment
    /// binaries unnecessary.
    pub fn is_convex(&self) -> bool {
        self.quadratic
    }
}

/// Linear pairs whose cap stays below the saturation point get the convex
/// quadratic split with `g = c'(1 - alpha)`; everything else uses
/// `f = P(C)(C - c')`, `g = c'`.
pub fn split_objective(pair: &PairParams, c_prime: f64) -> SplitObjective<'_> {
    match pair.model {
        AcceptanceModel::Linear { alpha, beta } if alpha + beta * pair.cap <= 1.0 + 1e-12 => {
            SplitObjective {
                model: &pair.model,
                c_prime,
                quadratic: true,
                g: c_prime * (1.0 - alpha),
            }
        }
        _ => SplitObjective {
            model: &pair.model,
            c_prime,
            quadratic: false,
            g: c_prime,
        },
    }
}

/// `k` compensation values from 0 to `cap`. Convex pairs are spaced
/// uniformly. Otherwise the second value is the compensation floor, so the
/// jump of `P` at zero sits inside `[0, floor]`, and the rest are uniform on
/// `(0, cap]`.
pub fn breakpoints(cap: f64, k: usize, floor: f64, convex: bool) -> Vec<f64> {
    assert!(k >= 2);
    // `cap * (m / n)` keeps nested grids bit-identical at shared points.
    let uniform = |n: usize| (0..n).map(move |m| cap * (m as f64 / (n - 1) as f64));
    if convex || k == 2 || cap / (k - 2) as f64 <= floor {
        return uniform(k).collect();
    }
    let mut u = vec![0.0, floor];
    u.extend((1..=k - 2).map(|m| cap * (m as f64 / (k - 2) as f64)));
    u
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGrid {
    pub task: usize,
    pub driver: usize,
    pub breakpoints: Vec<f64>,
    /// `f` at each breakpoint.
    pub values: Vec<f64>,
    pub g: f64,
    pub convex: bool,
}

impl PairGrid {
    /// Interpolated `f` at `c`.
    pub fn interpolate(&self, c: f64) -> f64 {
        let u = &self.breakpoints;
        let k = u.partition_point(|&b| b <= c).clamp(1, u.len() - 1);
        let t = (c - u[k - 1]) / (u[k] - u[k - 1]);
        self.values[k - 1] + t * (self.values[k] - self.values[k - 1])
    }
}

/// Breakpoint grids for every pair, row-major. Pairs whose cap does not
/// exceed the floor cannot receive a valid offer and have no grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseGrid {
    pub n_drivers: usize,
    pub pairs: Vec<Option<PairGrid>>,
}

impl PiecewiseGrid {
    pub fn build(inst: &ProblemInstance, k: usize, floor: f64) -> Self {
        let pairs = inst
            .pairs()
            .iter()
            .map(|p| {
                if p.cap <= floor {
                    return None;
                }
                let split = split_objective(p, inst.tasks[p.task].penalized_cost);
                let convex = split.is_convex();
                let breakpoints = breakpoints(p.cap, k, floor, convex);
                let values = breakpoints.iter().map(|&u| split.f(u)).collect();
                Some(PairGrid {
                    task: p.task,
                    driver: p.driver,
                    breakpoints,
                    values,
                    g: split.g,
                    convex,
                })
            })
            .collect();
        PiecewiseGrid {
            n_drivers: inst.n_drivers(),
            pairs,
        }
    }

    pub fn pair(&self, task: usize, driver: usize) -> Option<&PairGrid> {
        self.pairs[task * self.n_drivers + driver].as_ref()
    }
}
