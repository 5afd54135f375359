//! Best-first branch and bound over binary columns of an [`Lp`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::simplex::{simplex_solve_with_bounds, Lp, LpOutcome};

/// Distance from an integer below which a binary counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Nodes whose bound is within this of the incumbent are pruned.
pub const PRUNE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Milp {
    pub lp: Lp,
    /// Columns restricted to `{0, 1}`.
    pub binaries: Vec<usize>,
    /// Sets of binaries that sum to one. A fractional set is split in two
    /// halves before single columns are branched on.
    pub one_of: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    /// Search stopped without a proof: the node limit was reached or a
    /// relaxation could not be solved.
    NodeLimit,
    Infeasible,
}

impl MilpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MilpStatus::Optimal => "optimal",
            MilpStatus::NodeLimit => "node_limit",
            MilpStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbResult {
    pub status: MilpStatus,
    /// Best integral point found, with its objective.
    pub incumbent: Option<(Vec<f64>, f64)>,
    /// Lower bound on the MILP optimum.
    pub bound: f64,
    pub nodes_explored: usize,
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    /// `(column, value)` fixings along the path from the root.
    fixed: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: lowest bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

/// Most fractional binary, lowest column on ties.
fn branching_column(x: &[f64], binaries: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binaries {
        let frac = x[j] - x[j].floor();
        let dist = frac.min(1.0 - frac);
        if dist > INTEGRALITY_TOL && best.is_none_or(|(bj, bd)| dist > bd || (dist == bd && j < bj)) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

/// Fractional set with the most mass away from its largest member, and the
/// split index closest to half of its mass.
fn branching_set(x: &[f64], sets: &[Vec<usize>]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (g, set) in sets.iter().enumerate() {
        let total: f64 = set.iter().map(|&j| x[j]).sum();
        let top = set.iter().map(|&j| x[j]).fold(0.0, f64::max);
        let spread = total - top;
        if spread <= INTEGRALITY_TOL || best.is_some_and(|b| spread <= b.2) {
            continue;
        }
        let mut cum = 0.0;
        let mut split = None;
        for r in 1..set.len() {
            cum += x[set[r - 1]];
            if cum > INTEGRALITY_TOL && cum < total - INTEGRALITY_TOL {
                let d = (cum - 0.5 * total).abs();
                if split.is_none_or(|(_, bd)| d < bd) {
                    split = Some((r, d));
                }
            }
        }
        if let Some((r, _)) = split {
            best = Some((g, r, spread));
        }
    }
    best.map(|(g, r, _)| (g, r))
}

/// Solves `milp` exactly unless `node_limit` LP solves are exhausted.
/// `incumbent` seeds the search with a known feasible point.
pub fn branch_and_bound(
    milp: &Milp,
    node_limit: usize,
    incumbent: Option<(Vec<f64>, f64)>,
) -> BnbResult {
    let lp = &milp.lp;
    let mut best = incumbent;
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        depth: 0,
        id: 0,
        fixed: Vec::new(),
    });
    let mut next_id = 1;
    let mut nodes = 0;
    let mut unsolved = f64::INFINITY;
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();

    let incumbent_value = |best: &Option<(Vec<f64>, f64)>| best.as_ref().map_or(f64::INFINITY, |b| b.1);

    while let Some(node) = heap.pop() {
        if node.bound >= incumbent_value(&best) - PRUNE_TOL {
            // Best-first: every remaining node is at least as bad.
            heap.clear();
            break;
        }
        if nodes >= node_limit {
            heap.push(node);
            break;
        }
        nodes += 1;

        lower.copy_from_slice(&lp.lower);
        upper.copy_from_slice(&lp.upper);
        for &(j, v) in &node.fixed {
            lower[j] = v;
            upper[j] = v;
        }
        let sol = match simplex_solve_with_bounds(lp, &lower, &upper) {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible => continue,
            // Unsolved relaxation: its subtree stays open at the parent bound.
            LpOutcome::Unbounded | LpOutcome::IterationLimit => {
                unsolved = unsolved.min(node.bound);
                continue;
            }
        };
        if sol.objective >= incumbent_value(&best) - PRUNE_TOL {
            continue;
        }
        if let Some((g, r)) = branching_set(&sol.x, &milp.one_of) {
            let set = &milp.one_of[g];
            for half in [&set[r..], &set[..r]] {
                let mut fixed = node.fixed.clone();
                fixed.extend(half.iter().map(|&j| (j, 0.0)));
                heap.push(Node {
                    bound: sol.objective,
                    depth: node.depth + 1,
                    id: next_id,
                    fixed,
                });
                next_id += 1;
            }
            continue;
        }
        match branching_column(&sol.x, &milp.binaries) {
            None => {
                let mut x = sol.x;
                for &j in &milp.binaries {
                    x[j] = x[j].round();
                }
                best = Some((x, sol.objective));
            }
            Some(j) => {
                for v in [0.0, 1.0] {
                    let mut fixed = node.fixed.clone();
                    fixed.push((j, v));
                    heap.push(Node {
                        bound: sol.objective,
                        depth: node.depth + 1,
                        id: next_id,
                        fixed,
                    });
                    next_id += 1;
                }
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(unsolved, f64::min);
    let inc = incumbent_value(&best);
    let (status, bound) = if !heap.is_empty() || unsolved < inc - PRUNE_TOL {
        (MilpStatus::NodeLimit, open_bound.min(inc))
    } else if best.is_some() {
        (MilpStatus::Optimal, inc)
    } else {
        (MilpStatus::Infeasible, f64::INFINITY)
    };
    BnbResult {
        status,
        incumbent: best,
        bound,
        nodes_explored: nodes,
    }
}
