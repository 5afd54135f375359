//! Offers and compensations under linear side constraints that couple
//! pairs, such as a total budget or a cap on the number of offers.
//!
//! Each pair's expected cost is split into `f(C) + g x`, `f` is replaced by
//! its interpolant over a breakpoint grid, and the resulting MILP is solved
//! by branch and bound.

mod bnb;
mod pwl;
mod simplex;

pub use bnb::{branch_and_bound, BnbResult, Milp, MilpStatus, INTEGRALITY_TOL};
pub use pwl::{breakpoints, split_objective, PairGrid, PiecewiseGrid, SplitObjective};
pub use simplex::{simplex_solve, simplex_solve_with_bounds, Lp, LpOutcome, LpSolution, Row, RowKind};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::acceptance::{SolverConfig, DEFAULT_EPSILON_FLOOR};
use crate::assignment::solve_two_phase;
use crate::error::{Error, Result};
use crate::model::{Allocation, OfferPlan, ProblemInstance};

/// `sum_ij a_ij x_ij + b_ij C_ij <= limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonSepConstraint {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub limit: f64,
}

impl NonSepConstraint {
    /// At most `k` offers in total.
    pub fn cardinality(n_tasks: usize, n_drivers: usize, k: f64) -> Self {
        NonSepConstraint {
            a: vec![vec![1.0; n_drivers]; n_tasks],
            b: vec![vec![0.0; n_drivers]; n_tasks],
            limit: k,
        }
    }

    /// Total offered compensation at most `budget`.
    pub fn budget(n_tasks: usize, n_drivers: usize, budget: f64) -> Self {
        NonSepConstraint {
            a: vec![vec![0.0; n_drivers]; n_tasks],
            b: vec![vec![1.0; n_drivers]; n_tasks],
            limit: budget,
        }
    }

    fn check(&self, index: usize, n_tasks: usize, n_drivers: usize) -> Result<()> {
        let shape_ok = |t: &Vec<Vec<f64>>| t.len() == n_tasks && t.iter().all(|r| r.len() == n_drivers);
        if !shape_ok(&self.a) || !shape_ok(&self.b) {
            return Err(Error::Milp(format!(
                "constraint {index}: coefficient tables must be {n_tasks} x {n_drivers}"
            )));
        }
        let all = || self.a.iter().chain(&self.b).flatten();
        if !self.limit.is_finite() || all().any(|v| !v.is_finite()) {
            return Err(Error::Milp(format!("constraint {index}: non-finite coefficient")));
        }
        if all().all(|&v| v == 0.0) {
            return Err(Error::Milp(format!("constraint {index}: all coefficients are zero")));
        }
        Ok(())
    }

    /// Left-hand side at a plan's offers.
    pub fn lhs(&self, plan: &OfferPlan) -> f64 {
        plan.offers()
            .map(|(i, j, c)| self.a[i][j] + self.b[i][j] * c)
            .sum()
    }
}

pub fn constraints_from_json(text: &str) -> Result<Vec<NonSepConstraint>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        at: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn load_constraints(path: &Path) -> Result<Vec<NonSepConstraint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    constraints_from_json(&text)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonSepOptions {
    /// Breakpoints per pair, `K >= 2`.
    pub breakpoints: usize,
    pub epsilon_floor: f64,
    /// LP relaxations solved before giving up on proving optimality.
    pub node_limit: usize,
    /// Keep segment binaries on convex pairs too.
    pub force_segment_binaries: bool,
}

impl Default for NonSepOptions {
    fn default() -> Self {
        NonSepOptions {
            breakpoints: 11,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
            node_limit: 100_000,
            force_segment_binaries: false,
        }
    }
}

/// Column indices of one enabled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairColumns {
    pub x: usize,
    /// One weight per breakpoint.
    pub w: Vec<usize>,
    /// One binary per segment; empty when the pair is treated as convex.
    pub v: Vec<usize>,
}

/// The piecewise-linear MILP together with its column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct NonSepProgram {
    pub milp: Milp,
    pub grid: PiecewiseGrid,
    pub y: Vec<usize>,
    /// Row-major; `None` for pairs that cannot be offered.
    pub pairs: Vec<Option<PairColumns>>,
    n_drivers: usize,
}

impl NonSepProgram {
    pub fn pair(&self, task: usize, driver: usize) -> Option<&PairColumns> {
        self.pairs[task * self.n_drivers + driver].as_ref()
    }

    /// Compensation encoded by `x` for a pair, `sum_k u^k w^k`.
    fn compensation(&self, task: usize, driver: usize, x: &[f64]) -> f64 {
        match (self.pair(task, driver), self.grid.pair(task, driver)) {
            (Some(cols), Some(g)) => cols.w.iter().zip(&g.breakpoints).map(|(&c, &u)| u * x[c]).sum(),
            _ => 0.0,
        }
    }

    /// MILP point for a list of allocations, if they fit the model.
    pub fn point_from_allocations(&self, allocations: &[Allocation]) -> Option<Vec<f64>> {
        let lp = &self.milp.lp;
        let mut x = vec![0.0; lp.n_cols()];
        let offered: Vec<Option<(usize, f64)>> = allocations
            .iter()
            .map(|a| match *a {
                Allocation::Offer { driver, compensation } => Some((driver, compensation)),
                Allocation::Company => None,
            })
            .collect();
        for (i, o) in offered.iter().enumerate() {
            if o.is_none() {
                x[self.y[i]] = 1.0;
            }
        }
        for (k, cols) in self.pairs.iter().enumerate() {
            let Some(cols) = cols else { continue };
            let (i, j) = (k / self.n_drivers, k % self.n_drivers);
            let grid = self.grid.pair(i, j).expect("enabled pair has a grid");
            let u = &grid.breakpoints;
            match offered[i] {
                Some((d, c)) if d == j => {
                    x[cols.x] = 1.0;
                    let s = u.partition_point(|&b| b <= c).clamp(1, u.len() - 1) - 1;
                    let t = ((c - u[s]) / (u[s + 1] - u[s])).clamp(0.0, 1.0);
                    x[cols.w[s]] = 1.0 - t;
                    x[cols.w[s + 1]] = t;
                    if let Some(&v) = cols.v.get(s) {
                        x[v] = 1.0;
                    }
                }
                _ => {
                    x[cols.w[0]] = 1.0;
                    if let Some(&v) = cols.v.first() {
                        x[v] = 1.0;
                    }
                }
            }
        }
        for (i, o) in offered.iter().enumerate() {
            if let Some((j, _)) = *o {
                if j >= self.n_drivers || self.pair(i, j).is_none() {
                    return None;
                }
            }
        }
        (lp.infeasibility(&x) <= 1e-9).then_some(x)
    }
}

/// Builds the piecewise-linear MILP for `inst` under `constraints`.
pub fn build_milp(
    inst: &ProblemInstance,
    constraints: &[NonSepConstraint],
    opts: &NonSepOptions,
) -> Result<NonSepProgram> {
    if opts.breakpoints < 2 {
        return Err(Error::Milp(format!(
            "at least 2 breakpoints are required, got {}",
            opts.breakpoints
        )));
    }
    let (ni, nj) = (inst.n_tasks(), inst.n_drivers());
    for (l, c) in constraints.iter().enumerate() {
        c.check(l, ni, nj)?;
    }
    let floor = opts.epsilon_floor;
    let grid = PiecewiseGrid::build(inst, opts.breakpoints, floor);
    for g in grid.pairs.iter().flatten() {
        if g.breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Milp(format!(
                "breakpoints of pair ({}, {}) are not increasing",
                g.task, g.driver
            )));
        }
    }

    let mut lp = Lp::default();
    let mut binaries = Vec::new();
    let mut one_of = Vec::new();
    let mut pairs: Vec<Option<PairColumns>> = Vec::with_capacity(ni * nj);
    for g in &grid.pairs {
        pairs.push(g.as_ref().map(|g| {
            let x = lp.add_col(g.g, 0.0, 1.0);
            binaries.push(x);
            PairColumns { x, w: Vec::new(), v: Vec::new() }
        }));
    }
    let y: Vec<usize> = inst
        .tasks
        .iter()
        .map(|t| {
            let c = lp.add_col(t.cost, 0.0, 1.0);
            binaries.push(c);
            c
        })
        .collect();
    for (cols, g) in pairs.iter_mut().zip(&grid.pairs) {
        let (Some(cols), Some(g)) = (cols.as_mut(), g.as_ref()) else { continue };
        cols.w = g.values.iter().map(|&f| lp.add_col(f, 0.0, 1.0)).collect();
        if !g.convex || opts.force_segment_binaries {
            cols.v = (1..g.breakpoints.len())
                .map(|_| {
                    let c = lp.add_col(0.0, 0.0, 1.0);
                    binaries.push(c);
                    c
                })
                .collect();
        }
    }

    // At most one offer per driver.
    for j in 0..nj {
        let coefs: Vec<(usize, f64)> = (0..ni)
            .filter_map(|i| pairs[i * nj + j].as_ref().map(|c| (c.x, 1.0)))
            .collect();
        if !coefs.is_empty() {
            lp.add_row(coefs, RowKind::Le, 1.0);
        }
    }
    // Exactly one allocation per task.
    for i in 0..ni {
        let mut coefs = vec![(y[i], 1.0)];
        coefs.extend((0..nj).filter_map(|j| pairs[i * nj + j].as_ref().map(|c| (c.x, 1.0))));
        lp.add_row(coefs, RowKind::Eq, 1.0);
    }
    // Side constraints with C expanded over the breakpoints.
    for c in constraints {
        let mut coefs = Vec::new();
        for (k, (cols, g)) in pairs.iter().zip(&grid.pairs).enumerate() {
            let (Some(cols), Some(g)) = (cols, g) else { continue };
            let (a, b) = (c.a[k / nj][k % nj], c.b[k / nj][k % nj]);
            if a != 0.0 {
                coefs.push((cols.x, a));
            }
            if b != 0.0 {
                coefs.extend(cols.w.iter().zip(&g.breakpoints).filter(|(_, &u)| u != 0.0).map(|(&w, &u)| (w, b * u)));
            }
        }
        lp.add_row(coefs, RowKind::Le, c.limit);
    }
    for (k, (cols, g)) in pairs.iter().zip(&grid.pairs).enumerate() {
        let (Some(cols), Some(g)) = (cols, g) else { continue };
        let cap = inst.pairs()[k].cap;
        let u = &g.breakpoints;
        let uw = || cols.w.iter().zip(u).skip(1).map(|(&w, &u)| (w, u));
        // C <= U x
        let mut row: Vec<(usize, f64)> = uw().collect();
        row.push((cols.x, -cap));
        lp.add_row(row, RowKind::Le, 0.0);
        let mut link: Vec<(usize, f64)> = cols.w[1..].iter().map(|&w| (w, 1.0)).collect();
        link.push((cols.x, -1.0));
        if !cols.v.is_empty() && u[1] <= floor {
            // With adjacent weights and the floor as first positive
            // breakpoint, C >= floor x means no weight on zero when offered.
            lp.add_row(link, RowKind::Eq, 0.0);
        } else {
            // floor x <= C
            let mut row: Vec<(usize, f64)> = uw().map(|(w, u)| (w, -u)).collect();
            row.push((cols.x, floor));
            lp.add_row(row, RowKind::Le, 0.0);
            // Weight away from zero only when offered.
            lp.add_row(link, RowKind::Le, 0.0);
        }
        if !cols.v.is_empty() {
            let kk = cols.w.len();
            for (s, &w) in cols.w.iter().enumerate() {
                let mut row = vec![(w, 1.0)];
                if s > 0 {
                    row.push((cols.v[s - 1], -1.0));
                }
                if s < kk - 1 {
                    row.push((cols.v[s], -1.0));
                }
                lp.add_row(row, RowKind::Le, 0.0);
            }
            lp.add_row(cols.v.iter().map(|&v| (v, 1.0)).collect(), RowKind::Eq, 1.0);
            one_of.push(cols.v.clone());
        }
        lp.add_row(cols.w.iter().map(|&w| (w, 1.0)).collect(), RowKind::Eq, 1.0);
    }

    Ok(NonSepProgram {
        milp: Milp { lp, binaries, one_of },
        grid,
        y,
        pairs,
        n_drivers: nj,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpResult {
    /// Decoded plan; `None` when the constraints admit no plan.
    pub plan: Option<OfferPlan>,
    /// Exact expected cost of the decoded plan.
    pub objective: Option<f64>,
    /// Piecewise-linear objective of the MILP solution.
    pub milp_objective: Option<f64>,
    /// Lower bound on the piecewise-linear optimum.
    pub bound: f64,
    pub status: MilpStatus,
    pub nodes_explored: usize,
}

/// Seed for the search: the unconstrained optimum if it satisfies the side
/// constraints, else all-company if that does.
fn initial_point(
    inst: &ProblemInstance,
    program: &NonSepProgram,
    opts: &NonSepOptions,
) -> Option<(Vec<f64>, f64)> {
    let cfg = SolverConfig { epsilon_floor: opts.epsilon_floor };
    let candidates = [
        solve_two_phase(inst, &cfg).ok().map(|p| p.allocations),
        Some(vec![Allocation::Company; inst.n_tasks()]),
    ];
    candidates.into_iter().flatten().find_map(|allocs| {
        program.point_from_allocations(&allocs).map(|x| {
            let obj = program.milp.lp.objective(&x);
            (x, obj)
        })
    })
}

/// Builds and solves the piecewise-linear model, then decodes the best
/// point into a plan evaluated at its exact expected cost.
pub fn solve_nonsep(
    inst: &ProblemInstance,
    constraints: &[NonSepConstraint],
    opts: &NonSepOptions,
) -> Result<MilpResult> {
    let program = build_milp(inst, constraints, opts)?;
    let seed = initial_point(inst, &program, opts);
    let res = branch_and_bound(&program.milp, opts.node_limit, seed);
    let Some((x, milp_obj)) = res.incumbent else {
        return Ok(MilpResult {
            plan: None,
            objective: None,
            milp_objective: None,
            bound: res.bound,
            status: res.status,
            nodes_explored: res.nodes_explored,
        });
    };
    let nj = inst.n_drivers();
    let mut allocations = vec![Allocation::Company; inst.n_tasks()];
    for (k, cols) in program.pairs.iter().enumerate() {
        let Some(cols) = cols else { continue };
        if x[cols.x] < 0.5 {
            continue;
        }
        let (i, j) = (k / nj, k % nj);
        let c = program.compensation(i, j, &x).clamp(0.0, inst.pairs()[k].cap);
        if c > 0.0 {
            allocations[i] = Allocation::Offer { driver: j, compensation: c };
        }
    }
    let plan = OfferPlan::evaluate(inst, allocations)?;
    Ok(MilpResult {
        objective: Some(plan.expected_cost),
        plan: Some(plan),
        milp_objective: Some(milp_obj),
        bound: res.bound,
        status: res.status,
        nodes_explored: res.nodes_explored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::line_instance;
    use crate::model::AcceptanceModel;

    fn lin() -> AcceptanceModel {
        AcceptanceModel::Linear { alpha: 0.1, beta: 0.05 }
    }

    fn logit() -> AcceptanceModel {
        AcceptanceModel::Logistic { gamma: -2.0, delta: 0.4 }
    }

    fn opts(k: usize) -> NonSepOptions {
        NonSepOptions { breakpoints: k, ..Default::default() }
    }

    #[test]
    fn column_structure() {
        let inst = line_instance(&[10.0], 0.1, 1, lin(), 10.0);
        let p = build_milp(&inst, &[], &opts(2)).unwrap();
        let cols = p.pair(0, 0).unwrap();
        assert_eq!((cols.w.len(), cols.v.len()), (2, 0));

        let inst = line_instance(&[10.0], 0.1, 1, logit(), 10.0);
        let p = build_milp(&inst, &[], &opts(5)).unwrap();
        let cols = p.pair(0, 0).unwrap();
        assert_eq!((cols.w.len(), cols.v.len()), (5, 4));
    }

    #[test]
    fn too_few_breakpoints_is_an_error() {
        let inst = line_instance(&[10.0], 0.1, 1, lin(), 10.0);
        assert!(build_milp(&inst, &[], &opts(1)).is_err());
    }

    #[test]
    fn zero_cardinality_forces_company() {
        let inst = line_instance(&[10.0, 20.0], 0.1, 2, logit(), 0.0);
        let mut inst = inst;
        for p in inst.pairs_mut() {
            p.cap = 10.0;
        }
        let res = solve_nonsep(&inst, &[NonSepConstraint::cardinality(2, 2, 0.0)], &opts(5)).unwrap();
        assert_eq!(res.status, MilpStatus::Optimal);
        assert_eq!(res.plan.unwrap().n_offers(), 0);
        assert!((res.milp_objective.unwrap() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn zero_budget_forces_company() {
        let inst = line_instance(&[10.0, 20.0], 0.1, 2, lin(), 10.0);
        let res = solve_nonsep(&inst, &[NonSepConstraint::budget(2, 2, 0.0)], &opts(5)).unwrap();
        assert_eq!(res.plan.unwrap().n_offers(), 0);
        assert!((res.objective.unwrap() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn unsatisfiable_constraint_is_infeasible() {
        let inst = line_instance(&[10.0], 0.1, 1, lin(), 10.0);
        let res = solve_nonsep(&inst, &[NonSepConstraint::budget(1, 1, -1.0)], &opts(3)).unwrap();
        assert_eq!(res.status, MilpStatus::Infeasible);
        assert!(res.plan.is_none());
    }

    #[test]
    fn single_offer_goes_to_the_better_task() {
        let inst = line_instance(&[10.0, 30.0], 0.1, 2, lin(), 10.0);
        let mut inst = inst;
        let costs: Vec<f64> = inst.tasks.iter().map(|t| t.cost).collect();
        for p in inst.pairs_mut() {
            p.cap = costs[p.task].min(18.0);
        }
        let o = opts(101);
        let res = solve_nonsep(&inst, &[NonSepConstraint::cardinality(2, 2, 1.0)], &o).unwrap();
        let plan = res.plan.unwrap();
        assert_eq!(plan.n_offers(), 1);
        // Enumerate both single-offer choices at their best grid point.
        let grid = build_milp(&inst, &[], &o).unwrap().grid;
        let best = (0..2)
            .map(|i| {
                let g = grid.pair(i, 0).unwrap();
                let other = inst.tasks[1 - i].cost;
                let f = g.values.iter().skip(1).cloned().fold(f64::INFINITY, f64::min);
                other + f + g.g
            })
            .fold(f64::INFINITY, f64::min);
        assert!((res.milp_objective.unwrap() - best).abs() < 1e-6);
    }

    #[test]
    fn unconstrained_fine_grid_is_close_to_two_phase() {
        let inst = line_instance(&[12.0, 25.0], 0.15, 2, logit(), 0.0);
        let mut inst = inst;
        let costs: Vec<f64> = inst.tasks.iter().map(|t| t.cost).collect();
        for p in inst.pairs_mut() {
            p.cap = costs[p.task];
        }
        let exact = solve_two_phase(&inst, &SolverConfig::default()).unwrap().expected_cost;
        let res = solve_nonsep(&inst, &[], &opts(101)).unwrap();
        let gap = (res.objective.unwrap() - exact) / exact;
        assert!((-1e-12..=0.01).contains(&gap), "gap {gap}");
    }

    #[test]
    fn constraints_json_uses_capital_limit() {
        let c = constraints_from_json(r#"[{"a": [[1, 1]], "b": [[0, 0]], "B": 1}]"#).unwrap();
        assert_eq!(c[0].limit, 1.0);
        let err = constraints_from_json(r#"[{"a": [[1]], "b": [[0]], "limit": 1}]"#).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }));
    }

    #[test]
    fn constraint_shape_is_checked() {
        let inst = line_instance(&[10.0], 0.1, 2, lin(), 10.0);
        let bad = NonSepConstraint::cardinality(1, 1, 1.0);
        assert!(build_milp(&inst, &[bad], &opts(3)).is_err());
    }
}
