//! Instances, offer plans and their expected cost / distance.
//!
//! A task is either kept by the company fleet (cost `c_i`) or offered to one
//! occasional driver at a compensation `C`. An offer is accepted with
//! probability `P_ij(C)`; a refused offer costs the penalized `c'_i`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack allowed when comparing a compensation to its cap.
pub const CAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance. Uses `sqrt` (correctly rounded) rather than
    /// `hypot` so generated instances agree bit-for-bit across platforms.
    pub fn dist(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Round to two decimal places.
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: usize,
    pub dest: Point,
    /// Company cost `c_i`.
    pub cost: f64,
    /// Penalized cost `c'_i` paid when an offer is refused.
    pub penalized_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Driver {
    pub id: usize,
    pub dest: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Logistic,
    Generic,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Logistic => "logistic",
            ModelKind::Generic => "generic",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ModelKind::Linear),
            "logistic" => Ok(ModelKind::Logistic),
            "generic" => Ok(ModelKind::Generic),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Piecewise-linear acceptance curve through `(compensation, probability)`
/// knots. Evaluates to 0 at `C = 0` and holds the last value past the end.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceTable {
    knots: Vec<(f64, f64)>,
}

impl AcceptanceTable {
    pub fn new(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidInstance("acceptance table is empty".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(c, p) in &knots {
            if !c.is_finite() || c < 0.0 || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInstance(format!(
                    "acceptance table knot ({c}, {p}) out of range"
                )));
            }
        }
        if knots.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInstance(
                "acceptance table has duplicate compensation knots".into(),
            ));
        }
        Ok(AcceptanceTable { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, c: f64) -> f64 {
        if c <= 0.0 {
            return 0.0;
        }
        let k = &self.knots;
        let idx = k.partition_point(|&(kc, _)| kc <= c);
        if idx == 0 {
            // Before the first knot: interpolate from the origin.
            let (c1, p1) = k[0];
            return if c1 > 0.0 { p1 * c / c1 } else { p1 };
        }
        if idx == k.len() {
            return k[k.len() - 1].1;
        }
        let (c0, p0) = k[idx - 1];
        let (c1, p1) = k[idx];
        p0 + (p1 - p0) * (c - c0) / (c1 - c0)
    }
}

/// Per-pair acceptance probability function. All variants give `P(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum AcceptanceModel {
    Linear { alpha: f64, beta: f64 },
    Logistic { gamma: f64, delta: f64 },
    Tabulated(AcceptanceTable),
}

impl AcceptanceModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            AcceptanceModel::Linear { .. } => ModelKind::Linear,
            AcceptanceModel::Logistic { .. } => ModelKind::Logistic,
            AcceptanceModel::Tabulated(_) => ModelKind::Generic,
        }
    }

    /// Acceptance probability at compensation `c`.
    pub fn prob(&self, c: f64) -> f64 {
        if c <= 0.0 {
            return 0.0;
        }
        match self {
            AcceptanceModel::Linear { alpha, beta } => (alpha + beta * c).min(1.0),
            AcceptanceModel::Logistic { gamma, delta } => {
                1.0 / (1.0 + (-(gamma + delta * c)).exp())
            }
            AcceptanceModel::Tabulated(t) => t.eval(c).clamp(0.0, 1.0),
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        match *self {
            AcceptanceModel::Linear { alpha, beta } => {
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(format!("alpha must be in [0, 1], got {alpha}"));
                }
                if !(beta > 0.0) || !beta.is_finite() {
                    return Err(format!("beta must be > 0, got {beta}"));
                }
            }
            AcceptanceModel::Logistic { gamma, delta } => {
                if !gamma.is_finite() {
                    return Err(format!("gamma must be finite, got {gamma}"));
                }
                if !(delta > 0.0) || !delta.is_finite() {
                    return Err(format!("delta must be > 0, got {delta}"));
                }
            }
            AcceptanceModel::Tabulated(_) => {}
        }
        Ok(())
    }
}

/// Acceptance parameters, compensation cap and cached detour for one
/// task/driver pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairParams {
    pub task: usize,
    pub driver: usize,
    pub model: AcceptanceModel,
    /// Upper bound `U_ij` on the compensation.
    pub cap: f64,
    /// `d_i + d_ij - d_j`; may be negative for hand-written geometry.
    pub detour: f64,
}

impl PairParams {
    pub fn prob(&self, c: f64) -> f64 {
        self.model.prob(c)
    }
}

/// Provenance of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub generator: String,
    pub seed: u64,
    pub n_tasks: usize,
    pub n_drivers: usize,
    pub rho: f64,
    pub mu: f64,
    pub model: ModelKind,
    /// Unstandardized logistic coefficients `[intercept, d_i, d_j, detour,
    /// compensation, sensitivity]` when the instance was calibrated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_coefficients: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub plane_size: f64,
    pub store: Point,
    pub rho: f64,
    pub mu: f64,
    pub seed: u64,
    pub tasks: Vec<Task>,
    pub drivers: Vec<Driver>,
    /// Dense row-major `|I| x |J|` table.
    pairs: Vec<PairParams>,
    pub lineage: Option<Lineage>,
}

impl ProblemInstance {
    /// Builds an instance from a dense row-major pair table. Structural
    /// checks only; see [`ProblemInstance::check`] for parameter validity.
    pub fn new(
        store: Point,
        tasks: Vec<Task>,
        drivers: Vec<Driver>,
        pairs: Vec<PairParams>,
    ) -> Result<Self> {
        if pairs.len() != tasks.len() * drivers.len() {
            return Err(Error::InvalidInstance(format!(
                "expected {} pair entries, got {}",
                tasks.len() * drivers.len(),
                pairs.len()
            )));
        }
        let nj = drivers.len();
        for (k, p) in pairs.iter().enumerate() {
            if p.task != k / nj || p.driver != k % nj {
                return Err(Error::InvalidInstance(format!(
                    "pair entry {k} is ({}, {}), expected ({}, {})",
                    p.task,
                    p.driver,
                    k / nj,
                    k % nj
                )));
            }
        }
        Ok(ProblemInstance {
            plane_size: 200.0,
            store,
            rho: 0.0,
            mu: 0.0,
            seed: 0,
            tasks,
            drivers,
            pairs,
            lineage: None,
        })
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn n_drivers(&self) -> usize {
        self.drivers.len()
    }

    pub fn pair(&self, task: usize, driver: usize) -> &PairParams {
        &self.pairs[task * self.drivers.len() + driver]
    }

    pub fn pairs(&self) -> &[PairParams] {
        &self.pairs
    }

    pub fn pairs_mut(&mut self) -> &mut [PairParams] {
        &mut self.pairs
    }

    /// Store-to-destination distance `d_i` of a task.
    pub fn task_distance(&self, task: usize) -> f64 {
        self.store.dist(&self.tasks[task].dest)
    }

    /// Store-to-destination distance `d_j` of a driver.
    pub fn driver_distance(&self, driver: usize) -> f64 {
        self.store.dist(&self.drivers[driver].dest)
    }

    /// The acceptance model kind shared by all pairs, if uniform.
    pub fn model_kind(&self) -> Option<ModelKind> {
        let mut kinds = self.pairs.iter().map(|p| p.model.kind());
        let first = kinds.next()?;
        kinds.all(|k| k == first).then_some(first)
    }

    pub fn baseline_cost(&self) -> f64 {
        self.tasks.iter().map(|t| t.cost).sum()
    }

    pub fn baseline_distance(&self) -> f64 {
        (0..self.n_tasks()).map(|i| 2.0 * self.task_distance(i)).sum()
    }

    /// Parameter-level invariants: costs, acceptance parameters, caps.
    pub fn check(&self) -> Result<()> {
        for (i, t) in self.tasks.iter().enumerate() {
            if t.id != i {
                return Err(Error::InvalidInstance(format!(
                    "task at position {i} has id {}",
                    t.id
                )));
            }
            if !(t.cost >= 0.0) || !t.cost.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "task {i}: company cost must be >= 0, got {}",
                    t.cost
                )));
            }
            if !(t.penalized_cost >= t.cost) || !t.penalized_cost.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "task {i}: penalized cost {} below company cost {}",
                    t.penalized_cost, t.cost
                )));
            }
        }
        for (j, d) in self.drivers.iter().enumerate() {
            if d.id != j {
                return Err(Error::InvalidInstance(format!(
                    "driver at position {j} has id {}",
                    d.id
                )));
            }
        }
        for p in &self.pairs {
            p.model.check().map_err(|m| {
                Error::InvalidInstance(format!("pair ({}, {}): {m}", p.task, p.driver))
            })?;
            if !(p.cap >= 0.0) || !p.cap.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "pair ({}, {}): cap must be >= 0, got {}",
                    p.task, p.driver, p.cap
                )));
            }
            if !p.detour.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "pair ({}, {}): detour is not finite",
                    p.task, p.driver
                )));
            }
        }
        Ok(())
    }
}

/// Allocation of one task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Allocation {
    Company,
    Offer { driver: usize, compensation: f64 },
}

/// A complete solution: one allocation per task plus its evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct OfferPlan {
    pub allocations: Vec<Allocation>,
    pub expected_cost: f64,
    pub expected_distance: f64,
    /// Acceptance probability of each offered task at its compensation.
    pub acceptance: Vec<Option<f64>>,
}

impl OfferPlan {
    /// Validates `allocations` against `inst` and evaluates them.
    pub fn evaluate(inst: &ProblemInstance, allocations: Vec<Allocation>) -> Result<Self> {
        let violations = validate_allocations(&allocations, inst);
        if !violations.is_empty() {
            return Err(Error::InvalidPlan(violations));
        }
        let acceptance = allocations
            .iter()
            .enumerate()
            .map(|(i, a)| match *a {
                Allocation::Company => None,
                Allocation::Offer {
                    driver,
                    compensation,
                } => Some(inst.pair(i, driver).prob(compensation)),
            })
            .collect();
        Ok(OfferPlan {
            expected_cost: cost_of(&allocations, inst),
            expected_distance: distance_of(&allocations, inst),
            allocations,
            acceptance,
        })
    }

    pub fn all_company(inst: &ProblemInstance) -> Self {
        OfferPlan {
            allocations: vec![Allocation::Company; inst.n_tasks()],
            expected_cost: inst.baseline_cost(),
            expected_distance: inst.baseline_distance(),
            acceptance: vec![None; inst.n_tasks()],
        }
    }

    pub fn offers(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.allocations
            .iter()
            .enumerate()
            .filter_map(|(i, a)| match *a {
                Allocation::Offer {
                    driver,
                    compensation,
                } => Some((i, driver, compensation)),
                Allocation::Company => None,
            })
    }

    pub fn n_offers(&self) -> usize {
        self.offers().count()
    }
}

/// A broken plan invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TaskCount { expected: usize, found: usize },
    UnknownDriver { task: usize, driver: usize },
    DriverOfferedTwice { driver: usize, first: usize, second: usize },
    CompensationAboveCap { task: usize, driver: usize, compensation: f64, cap: f64 },
    NonPositiveCompensation { task: usize, driver: usize, compensation: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::TaskCount { expected, found } => write!(
                f,
                "every task needs exactly one allocation: expected {expected}, found {found}"
            ),
            Violation::UnknownDriver { task, driver } => {
                write!(f, "task {task} offered to unknown driver {driver}")
            }
            Violation::DriverOfferedTwice {
                driver,
                first,
                second,
            } => write!(
                f,
                "at-most-one-offer constraint: driver {driver} offered tasks {first} and {second}"
            ),
            Violation::CompensationAboveCap {
                task,
                driver,
                compensation,
                cap,
            } => write!(
                f,
                "forcing constraint: pair ({task}, {driver}) compensation {compensation} exceeds cap {cap}"
            ),
            Violation::NonPositiveCompensation {
                task,
                driver,
                compensation,
            } => write!(
                f,
                "forcing constraint: pair ({task}, {driver}) offered non-positive compensation {compensation}"
            ),
        }
    }
}

/// Checks the plan invariants. An empty result means the plan is valid.
pub fn validate(plan: &OfferPlan, inst: &ProblemInstance) -> Vec<Violation> {
    validate_allocations(&plan.allocations, inst)
}

pub fn validate_allocations(allocations: &[Allocation], inst: &ProblemInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    if allocations.len() != inst.n_tasks() {
        out.push(Violation::TaskCount {
            expected: inst.n_tasks(),
            found: allocations.len(),
        });
        return out;
    }
    let mut offered_by: Vec<Option<usize>> = vec![None; inst.n_drivers()];
    for (task, a) in allocations.iter().enumerate() {
        let Allocation::Offer {
            driver,
            compensation,
        } = *a
        else {
            continue;
        };
        if driver >= inst.n_drivers() {
            out.push(Violation::UnknownDriver { task, driver });
            continue;
        }
        match offered_by[driver] {
            Some(first) => out.push(Violation::DriverOfferedTwice {
                driver,
                first,
                second: task,
            }),
            None => offered_by[driver] = Some(task),
        }
        let cap = inst.pair(task, driver).cap;
        if !(compensation > 0.0) {
            out.push(Violation::NonPositiveCompensation {
                task,
                driver,
                compensation,
            });
        } else if compensation > cap + CAP_TOLERANCE {
            out.push(Violation::CompensationAboveCap {
                task,
                driver,
                compensation,
                cap,
            });
        }
    }
    out
}

fn cost_of(allocations: &[Allocation], inst: &ProblemInstance) -> f64 {
    allocations
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let task = &inst.tasks[i];
            match *a {
                Allocation::Company => task.cost,
                Allocation::Offer {
                    driver,
                    compensation,
                } => {
                    let p = inst.pair(i, driver).prob(compensation);
                    p * compensation + (1.0 - p) * task.penalized_cost
                }
            }
        })
        .sum()
}

fn distance_of(allocations: &[Allocation], inst: &ProblemInstance) -> f64 {
    allocations
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let round_trip = 2.0 * inst.task_distance(i);
            match *a {
                Allocation::Company => round_trip,
                Allocation::Offer {
                    driver,
                    compensation,
                } => {
                    let pair = inst.pair(i, driver);
                    let p = pair.prob(compensation);
                    p * pair.detour + (1.0 - p) * round_trip
                }
            }
        })
        .sum()
}

/// Expected total cost of a plan, recomputed from its allocations.
pub fn expected_cost(plan: &OfferPlan, inst: &ProblemInstance) -> Result<f64> {
    let v = validate(plan, inst);
    if !v.is_empty() {
        return Err(Error::InvalidPlan(v));
    }
    Ok(cost_of(&plan.allocations, inst))
}

/// Expected total travelled distance of a plan; accepted offers only add
/// the driver's detour.
pub fn expected_distance(plan: &OfferPlan, inst: &ProblemInstance) -> Result<f64> {
    let v = validate(plan, inst);
    if !v.is_empty() {
        return Err(Error::InvalidPlan(v));
    }
    Ok(distance_of(&plan.allocations, inst))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Instance on a line through the store at the origin. Tasks sit at
    /// `(d_i, 0)` so `c_i = d_i`; every pair shares `model` and `cap`.
    pub fn line_instance(
        task_dists: &[f64],
        rho: f64,
        n_drivers: usize,
        model: AcceptanceModel,
        cap: f64,
    ) -> ProblemInstance {
        let tasks: Vec<Task> = task_dists
            .iter()
            .enumerate()
            .map(|(id, &d)| Task {
                id,
                dest: Point::new(d, 0.0),
                cost: d,
                penalized_cost: (1.0 + rho) * d,
            })
            .collect();
        let drivers: Vec<Driver> = (0..n_drivers)
            .map(|id| Driver {
                id,
                dest: Point::new(0.0, 1.0 + id as f64),
            })
            .collect();
        let mut pairs = Vec::new();
        for t in &tasks {
            for d in &drivers {
                let store = Point::new(0.0, 0.0);
                let detour = store.dist(&t.dest) + t.dest.dist(&d.dest) - store.dist(&d.dest);
                pairs.push(PairParams {
                    task: t.id,
                    driver: d.id,
                    model: model.clone(),
                    cap,
                    detour,
                });
            }
        }
        let mut inst = ProblemInstance::new(Point::new(0.0, 0.0), tasks, drivers, pairs).unwrap();
        inst.rho = rho;
        inst
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::line_instance;
    use super::*;

    fn lin(alpha: f64, beta: f64) -> AcceptanceModel {
        AcceptanceModel::Linear { alpha, beta }
    }

    #[test]
    fn all_company_costs_sum() {
        let inst = line_instance(&[10.0, 20.0], 0.0, 1, lin(0.5, 0.05), 10.0);
        let plan = OfferPlan::evaluate(&inst, vec![Allocation::Company; 2]).unwrap();
        assert_eq!(plan.expected_cost, 30.0);
    }

    #[test]
    fn certain_acceptance_pays_compensation() {
        let inst = line_instance(&[10.0, 10.0], 0.0, 1, lin(1.0, 1.0), 10.0);
        let plan = OfferPlan::evaluate(
            &inst,
            vec![
                Allocation::Offer {
                    driver: 0,
                    compensation: 4.0,
                },
                Allocation::Company,
            ],
        )
        .unwrap();
        assert_eq!(plan.expected_cost, 14.0);
    }

    #[test]
    fn linear_offer_expected_cost() {
        // c = 10, c' = 12.
        let inst = line_instance(&[10.0], 0.2, 1, lin(0.5, 0.05), 10.0);
        let plan = OfferPlan::evaluate(
            &inst,
            vec![Allocation::Offer {
                driver: 0,
                compensation: 5.0,
            }],
        )
        .unwrap();
        assert!((plan.expected_cost - 6.75).abs() < 1e-12);
        assert_eq!(plan.acceptance[0], Some(0.75));
    }

    #[test]
    fn all_company_distance_is_round_trips() {
        let inst = line_instance(&[3.0, 4.0], 0.0, 2, lin(0.5, 0.05), 3.0);
        let plan = OfferPlan::all_company(&inst);
        assert_eq!(expected_distance(&plan, &inst).unwrap(), 14.0);
    }

    #[test]
    fn offer_distance_mixes_detour_and_round_trip() {
        let mut inst = line_instance(&[5.0], 0.0, 1, lin(0.5, 0.1), 5.0);
        inst.pairs_mut()[0].detour = 2.0;
        // P(1) = 0.6
        let plan = OfferPlan::evaluate(
            &inst,
            vec![Allocation::Offer {
                driver: 0,
                compensation: 1.0,
            }],
        )
        .unwrap();
        assert!((plan.expected_distance - 5.2).abs() < 1e-12);
    }

    #[test]
    fn zero_detour_certain_offer_adds_nothing() {
        let mut inst = line_instance(&[5.0], 0.0, 1, lin(1.0, 0.1), 5.0);
        inst.pairs_mut()[0].detour = 0.0;
        let plan = OfferPlan::evaluate(
            &inst,
            vec![Allocation::Offer {
                driver: 0,
                compensation: 1.0,
            }],
        )
        .unwrap();
        assert_eq!(plan.expected_distance, 0.0);
    }

    #[test]
    fn empty_plan_on_empty_instance_is_valid() {
        let inst = ProblemInstance::new(Point::new(0.0, 0.0), vec![], vec![], vec![]).unwrap();
        let plan = OfferPlan::all_company(&inst);
        assert!(validate(&plan, &inst).is_empty());
        assert_eq!(expected_cost(&plan, &inst).unwrap(), 0.0);
    }

    #[test]
    fn double_offer_is_reported() {
        let inst = line_instance(&[10.0, 20.0], 0.0, 1, lin(0.5, 0.05), 10.0);
        let plan = OfferPlan {
            allocations: vec![
                Allocation::Offer {
                    driver: 0,
                    compensation: 1.0,
                },
                Allocation::Offer {
                    driver: 0,
                    compensation: 1.0,
                },
            ],
            expected_cost: 0.0,
            expected_distance: 0.0,
            acceptance: vec![None; 2],
        };
        let v = validate(&plan, &inst);
        assert_eq!(
            v,
            vec![Violation::DriverOfferedTwice {
                driver: 0,
                first: 0,
                second: 1
            }]
        );
        assert!(v[0].to_string().contains("at-most-one-offer"));
        assert!(matches!(expected_cost(&plan, &inst), Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn compensation_above_cap_is_reported() {
        let inst = line_instance(&[10.0], 0.0, 1, lin(0.5, 0.05), 7.0);
        let allocs = vec![Allocation::Offer {
            driver: 0,
            compensation: 8.0,
        }];
        let v = validate_allocations(&allocs, &inst);
        assert!(matches!(v[0], Violation::CompensationAboveCap { task: 0, driver: 0, .. }));
        assert!(v[0].to_string().contains("forcing constraint"));
        let err = OfferPlan::evaluate(&inst, allocs).unwrap_err();
        assert!(err.to_string().contains("(0, 0)"));
    }

    #[test]
    fn replacing_offer_by_company_changes_cost_by_weight_difference() {
        let inst = line_instance(&[10.0, 20.0], 0.1, 2, lin(0.3, 0.04), 10.0);
        let offers = vec![
            Allocation::Offer {
                driver: 1,
                compensation: 3.0,
            },
            Allocation::Offer {
                driver: 0,
                compensation: 6.0,
            },
        ];
        let full = OfferPlan::evaluate(&inst, offers.clone()).unwrap();
        let mut reduced = offers;
        reduced[1] = Allocation::Company;
        let reduced = OfferPlan::evaluate(&inst, reduced).unwrap();
        let p = inst.pair(1, 0).prob(6.0);
        let w = p * 6.0 + (1.0 - p) * inst.tasks[1].penalized_cost;
        let delta = inst.tasks[1].cost - w;
        assert!((reduced.expected_cost - full.expected_cost - delta).abs() < 1e-12);
    }

    #[test]
    fn table_interpolates_and_holds() {
        let t = AcceptanceTable::new(vec![(2.0, 0.4), (4.0, 0.8)]).unwrap();
        assert_eq!(t.eval(0.0), 0.0);
        assert!((t.eval(1.0) - 0.2).abs() < 1e-15);
        assert!((t.eval(3.0) - 0.6).abs() < 1e-15);
        assert_eq!(t.eval(10.0), 0.8);
    }

    #[test]
    fn probability_is_zero_without_compensation() {
        let models = [
            lin(0.3, 0.1),
            AcceptanceModel::Logistic {
                gamma: 0.0,
                delta: 1.0,
            },
        ];
        for m in models {
            assert_eq!(m.prob(0.0), 0.0);
        }
        assert_eq!(lin(0.3, 0.1).prob(10.0), 1.0);
        let logit = AcceptanceModel::Logistic {
            gamma: 0.0,
            delta: 1.0,
        };
        assert!((logit.prob(1e-12) - 0.5).abs() < 1e-11);
    }
}
