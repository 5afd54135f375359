//! Offer weights and the assignment of tasks to drivers or the company.
//!
//! Once every pair has a fixed compensation, the expected cost of offering
//! task `i` to driver `j` is a constant weight and choosing offers becomes a
//! rectangular assignment problem with a per-task company fallback.

mod hungarian;

pub use hungarian::min_cost_assignment;

use crate::acceptance::{optimal_compensation, CompensationResult, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{Allocation, OfferPlan, ProblemInstance, CAP_TOLERANCE};

/// Where the compensations behind a [`WeightMatrix`] came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Per-pair optimal compensation.
    Individual,
    /// A benchmark scheme with rate `p`; `raw` holds the compensations
    /// before they were clamped to the pair caps.
    Scheme {
        name: &'static str,
        p: f64,
        raw: Vec<f64>,
    },
    /// Supplied by the caller.
    External,
}

/// Expected cost of every possible offer plus the company fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n_tasks: usize,
    n_drivers: usize,
    /// Row-major compensations, `0 <= C <= U`.
    compensation: Vec<f64>,
    /// Row-major `P(C) C + (1 - P(C)) c'`.
    weight: Vec<f64>,
    /// Company cost `c_i` per task.
    pub company: Vec<f64>,
    pub provenance: Provenance,
}

impl WeightMatrix {
    pub fn n_tasks(&self) -> usize {
        self.n_tasks
    }

    pub fn n_drivers(&self) -> usize {
        self.n_drivers
    }

    pub fn weight(&self, task: usize, driver: usize) -> f64 {
        self.weight[task * self.n_drivers + driver]
    }

    pub fn compensation(&self, task: usize, driver: usize) -> f64 {
        self.compensation[task * self.n_drivers + driver]
    }

    /// A pair can be offered only at a positive compensation.
    pub fn offerable(&self, task: usize, driver: usize) -> bool {
        self.compensation(task, driver) > 0.0
    }
}

/// Weights for a dense row-major table of compensations.
pub fn build_weights(
    inst: &ProblemInstance,
    compensations: Vec<f64>,
    provenance: Provenance,
) -> Result<WeightMatrix> {
    let (ni, nj) = (inst.n_tasks(), inst.n_drivers());
    if compensations.len() != ni * nj {
        return Err(Error::InvalidInstance(format!(
            "expected {} compensations, got {}",
            ni * nj,
            compensations.len()
        )));
    }
    let mut weight = Vec::with_capacity(ni * nj);
    for (k, &c) in compensations.iter().enumerate() {
        let (i, j) = (k / nj, k % nj);
        let pair = inst.pair(i, j);
        if !(c >= 0.0) || c > pair.cap + CAP_TOLERANCE {
            return Err(Error::CapViolation {
                task: i,
                driver: j,
                compensation: c,
                cap: pair.cap,
            });
        }
        let p = pair.prob(c);
        let w = p * c + (1.0 - p) * inst.tasks[i].penalized_cost;
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::NegativeWeight {
                task: i,
                driver: j,
                weight: w,
            });
        }
        weight.push(w);
    }
    Ok(WeightMatrix {
        n_tasks: ni,
        n_drivers: nj,
        compensation: compensations,
        weight,
        company: inst.tasks.iter().map(|t| t.cost).collect(),
        provenance,
    })
}

/// Optimal compensation of every pair, row-major.
pub fn individual_compensations(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
) -> Vec<CompensationResult> {
    inst.pairs()
        .iter()
        .map(|p| {
            optimal_compensation(
                &p.model,
                inst.tasks[p.task].penalized_cost,
                p.cap,
                cfg.epsilon_floor,
            )
        })
        .collect()
}

pub fn individual_weights(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<WeightMatrix> {
    let comps = individual_compensations(inst, cfg)
        .into_iter()
        .map(|r| r.c_star)
        .collect();
    build_weights(inst, comps, Provenance::Individual)
}

/// Driver chosen for each task (`None` = company) and the total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub task_to_driver: Vec<Option<usize>>,
    pub objective: f64,
}

/// Minimizes `sum c_i y_i + sum w_ij x_ij` subject to one allocation per
/// task and at most one offer per driver.
pub fn solve_assignment(weights: &WeightMatrix) -> Matching {
    let (ni, nj) = (weights.n_tasks, weights.n_drivers);
    if ni == 0 {
        return Matching {
            task_to_driver: Vec::new(),
            objective: 0.0,
        };
    }
    // Columns: drivers, then one company column per task.
    let m = nj + ni;
    let big = weights.weight.iter().sum::<f64>() + weights.company.iter().sum::<f64>() + 1.0;
    let mut cost = vec![big; ni * m];
    for i in 0..ni {
        let row = &mut cost[i * m..(i + 1) * m];
        for j in 0..nj {
            if weights.offerable(i, j) {
                row[j] = weights.weight(i, j);
            }
        }
        row[nj + i] = weights.company[i];
    }
    let cols = min_cost_assignment(&cost, ni, m);

    let mut objective = 0.0;
    let task_to_driver = cols
        .iter()
        .enumerate()
        .map(|(i, &col)| {
            debug_assert!(cost[i * m + col] < big);
            if col < nj {
                objective += weights.weight(i, col);
                Some(col)
            } else {
                objective += weights.company[i];
                None
            }
        })
        .collect();
    Matching {
        task_to_driver,
        objective,
    }
}

/// Turns a matching into a validated, evaluated plan.
pub fn matching_to_plan(
    inst: &ProblemInstance,
    weights: &WeightMatrix,
    matching: &Matching,
) -> Result<OfferPlan> {
    let allocations = matching
        .task_to_driver
        .iter()
        .enumerate()
        .map(|(i, d)| match *d {
            Some(j) => Allocation::Offer {
                driver: j,
                compensation: weights.compensation(i, j),
            },
            None => Allocation::Company,
        })
        .collect();
    OfferPlan::evaluate(inst, allocations)
}

/// Best plan for the given weights.
pub fn solve_with_weights(inst: &ProblemInstance, weights: &WeightMatrix) -> Result<OfferPlan> {
    matching_to_plan(inst, weights, &solve_assignment(weights))
}

/// Optimal compensations per pair, then the optimal assignment.
pub fn solve_two_phase(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<OfferPlan> {
    let weights = individual_weights(inst, cfg)?;
    solve_with_weights(inst, &weights)
}
