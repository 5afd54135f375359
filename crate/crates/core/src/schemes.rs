//! Benchmark compensation rules and their one-parameter tuning.
//!
//! A benchmark scheme pays every pair `p` times a pair-specific multiplier
//! (the detour, the task distance, or 1). The rate `p` is tuned on a
//! 26-point grid up to the largest rate any individual optimum implies,
//! then refined by golden-section search around the best grid point.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::acceptance::SolverConfig;
use crate::assignment::{build_weights, individual_compensations, solve_assignment, solve_with_weights, Provenance};
use crate::error::{Error, Result};
use crate::model::{OfferPlan, ProblemInstance};
use crate::optim::golden_section;

/// Number of grid intervals when tuning `p`.
pub const TUNING_STEPS: usize = 25;
/// Multipliers below this are ignored when computing the largest rate.
pub const MIN_MULTIPLIER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Individual,
    Detour,
    Distance,
    Flat,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Individual,
        SchemeKind::Detour,
        SchemeKind::Distance,
        SchemeKind::Flat,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Individual => "individual",
            SchemeKind::Detour => "detour",
            SchemeKind::Distance => "distance",
            SchemeKind::Flat => "flat",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

/// A scheme with its rate. The rate is ignored for `Individual`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub p: f64,
}

/// What the rate `p` is multiplied by for pair `(task, driver)`.
pub fn multiplier(kind: SchemeKind, inst: &ProblemInstance, task: usize, driver: usize) -> f64 {
    match kind {
        SchemeKind::Detour => inst.pair(task, driver).detour,
        SchemeKind::Distance => inst.task_distance(task),
        SchemeKind::Flat | SchemeKind::Individual => 1.0,
    }
}

/// Compensation paid to a pair under a benchmark scheme, clamped to
/// `[0, U]`. Amounts below `floor` are not offered and pay 0.
pub fn scheme_compensation(spec: SchemeSpec, inst: &ProblemInstance, task: usize, driver: usize, floor: f64) -> f64 {
    let raw = spec.p * multiplier(spec.kind, inst, task, driver);
    apply_limits(raw, inst.pair(task, driver).cap, floor)
}

fn apply_limits(raw: f64, cap: f64, floor: f64) -> f64 {
    let c = raw.clamp(0.0, cap);
    if c < floor {
        0.0
    } else {
        c
    }
}

/// Weight matrix for a benchmark scheme at rate `p`.
pub fn scheme_weights(
    inst: &ProblemInstance,
    spec: SchemeSpec,
    cfg: &SolverConfig,
) -> Result<crate::assignment::WeightMatrix> {
    if spec.kind == SchemeKind::Individual {
        return Err(Error::Config("the individual scheme has no rate".into()));
    }
    if !(spec.p >= 0.0) || !spec.p.is_finite() {
        return Err(Error::Config(format!("scheme rate must be >= 0, got {}", spec.p)));
    }
    let nj = inst.n_drivers();
    let raw: Vec<f64> = (0..inst.n_tasks() * nj)
        .map(|k| spec.p * multiplier(spec.kind, inst, k / nj, k % nj))
        .collect();
    let clamped = raw
        .iter()
        .zip(inst.pairs())
        .map(|(&c, pair)| apply_limits(c, pair.cap, cfg.epsilon_floor))
        .collect();
    build_weights(
        inst,
        clamped,
        Provenance::Scheme {
            name: spec.kind.as_str(),
            p: spec.p,
            raw,
        },
    )
}

/// Largest rate at which the scheme reproduces some pair's individual
/// optimum, `max C*_ij / multiplier_ij`.
pub fn p_max(kind: SchemeKind, inst: &ProblemInstance, individual: &[f64]) -> Result<f64> {
    let nj = inst.n_drivers();
    let mut best: Option<f64> = None;
    for (k, &c) in individual.iter().enumerate() {
        let m = multiplier(kind, inst, k / nj, k % nj);
        if m < MIN_MULTIPLIER {
            continue;
        }
        let r = c / m;
        best = Some(best.map_or(r, |b: f64| b.max(r)));
    }
    best.ok_or_else(|| {
        Error::SchemeUndefined(format!("every {kind} multiplier is below {MIN_MULTIPLIER}"))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub p: f64,
    pub objective: f64,
    pub plan: OfferPlan,
    pub p_max: f64,
    /// `(p, objective)` at each grid point.
    pub grid: Vec<(f64, f64)>,
    /// Distinct assignment solves.
    pub evaluations: usize,
}

/// Tunes the rate of a benchmark scheme: grid over `l p_max / 25`, then
/// golden section between the neighbours of the best grid point. Returns a
/// local minimum in `p`.
pub fn tune_scheme(kind: SchemeKind, inst: &ProblemInstance, cfg: &SolverConfig) -> Result<TuneResult> {
    let individual: Vec<f64> = individual_compensations(inst, cfg).iter().map(|r| r.c_star).collect();
    let pm = p_max(kind, inst, &individual)?;

    let mut memo: HashMap<u64, f64> = HashMap::new();
    let mut failure: Option<Error> = None;
    let mut cost = |p: f64| -> f64 {
        if let Some(&v) = memo.get(&p.to_bits()) {
            return v;
        }
        let v = match scheme_weights(inst, SchemeSpec { kind, p }, cfg) {
            Ok(w) => solve_assignment(&w).objective,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        };
        memo.insert(p.to_bits(), v);
        v
    };

    let step = pm / TUNING_STEPS as f64;
    let grid: Vec<(f64, f64)> = (0..=TUNING_STEPS)
        .map(|l| {
            let p = l as f64 * step;
            (p, cost(p))
        })
        .collect();
    let (l_star, &(mut p_best, mut v_best)) = grid
        .iter()
        .enumerate()
        .fold((0, &grid[0]), |acc, (l, g)| if g.1 < acc.1 .1 { (l, g) } else { acc });

    let lo = l_star.saturating_sub(1) as f64 * step;
    let hi = (l_star + 1).min(TUNING_STEPS) as f64 * step;
    if hi > lo {
        let r = golden_section(&mut cost, lo, hi, 1e-6 * pm, 100);
        if r.fx < v_best {
            p_best = r.x;
            v_best = r.fx;
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let evaluations = memo.len();

    let plan = solve_with_weights(inst, &scheme_weights(inst, SchemeSpec { kind, p: p_best }, cfg)?)?;
    debug_assert!((plan.expected_cost - v_best).abs() <= 1e-9 * (1.0 + v_best.abs()));
    Ok(TuneResult {
        p: p_best,
        objective: plan.expected_cost,
        plan,
        p_max: pm,
        grid,
        evaluations,
    })
}

/// Plan for a scheme: the two-phase optimum for `Individual`, otherwise
/// the tuned benchmark. Returns the plan and the tuned rate.
pub fn plan_for_scheme(
    kind: SchemeKind,
    inst: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<(OfferPlan, Option<f64>)> {
    match kind {
        SchemeKind::Individual => Ok((crate::assignment::solve_two_phase(inst, cfg)?, None)),
        _ => {
            let t = tune_scheme(kind, inst, cfg)?;
            Ok((t.plan, Some(t.p)))
        }
    }
}
