//! Dense bounded-variable primal simplex.
//!
//! Every row gets a slack whose bounds encode the row sense, so the working
//! system is `A x + s = b` with `l <= (x, s) <= u`. Phase one drives
//! artificial variables to zero; phase two optimizes the real objective with
//! the artificials fixed at zero.

const TOL: f64 = 1e-9;
const PHASE_ONE_TOL: f64 = 1e-7;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coefs: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
}

/// `min obj . x` subject to the rows and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lp {
    pub obj: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl Lp {
    /// Adds a column and returns its index.
    pub fn add_col(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.obj.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.obj.len() - 1
    }

    pub fn add_row(&mut self, coefs: Vec<(usize, f64)>, kind: RowKind, rhs: f64) {
        self.rows.push(Row { coefs, kind, rhs });
    }

    pub fn n_cols(&self) -> usize {
        self.obj.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Largest row violation and bound violation of `x`.
    pub fn infeasibility(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for r in &self.rows {
            let lhs: f64 = r.coefs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match r.kind {
                RowKind::Le => lhs - r.rhs,
                RowKind::Ge => r.rhs - lhs,
                RowKind::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.obj.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Solves `lp` with its own bounds.
pub fn simplex_solve(lp: &Lp) -> LpOutcome {
    simplex_solve_with_bounds(lp, &lp.lower, &lp.upper)
}

/// Solves `lp` with the column bounds replaced by `lower` / `upper`.
pub fn simplex_solve_with_bounds(lp: &Lp, lower: &[f64], upper: &[f64]) -> LpOutcome {
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return LpOutcome::Infeasible;
    }
    Tableau::new(lp, lower, upper).solve(lp)
}

enum Step {
    Optimal,
    Unbounded,
    Continue,
}

struct Tableau {
    m: usize,
    n: usize,
    /// Row-major `m x width`, equal to `B^-1 A` over structurals, slacks
    /// and artificials.
    t: Vec<f64>,
    width: usize,
    d: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    value: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    degenerate: usize,
    iterations: usize,
}

impl Tableau {
    fn new(lp: &Lp, lower: &[f64], upper: &[f64]) -> Self {
        let m = lp.n_rows();
        let n = lp.n_cols();
        let width = n + 2 * m;
        let mut t = vec![0.0; m * width];
        let mut lo = Vec::with_capacity(width);
        let mut up = Vec::with_capacity(width);
        lo.extend_from_slice(lower);
        up.extend_from_slice(upper);

        let mut value: Vec<f64> = (0..n)
            .map(|j| {
                if lower[j].is_finite() {
                    lower[j]
                } else if upper[j].is_finite() {
                    upper[j]
                } else {
                    0.0
                }
            })
            .collect();
        value.resize(width, 0.0);

        let mut basis = vec![0; m];
        for (r, row) in lp.rows.iter().enumerate() {
            let (slo, sup) = match row.kind {
                RowKind::Le => (0.0, f64::INFINITY),
                RowKind::Ge => (f64::NEG_INFINITY, 0.0),
                RowKind::Eq => (0.0, 0.0),
            };
            lo.push(slo);
            up.push(sup);
            let tr = &mut t[r * width..(r + 1) * width];
            let mut resid = row.rhs;
            for &(j, a) in &row.coefs {
                tr[j] += a;
                resid -= a * value[j];
            }
            tr[n + r] = 1.0;
            let s = resid.clamp(slo, sup);
            let art = resid - s;
            value[n + r] = s;
            if art == 0.0 {
                basis[r] = n + r;
            } else {
                // Scale the row so the artificial enters with coefficient +1.
                let sign = art.signum();
                tr[n + m + r] = sign;
                if sign < 0.0 {
                    tr.iter_mut().for_each(|v| *v = -*v);
                }
                value[n + m + r] = art.abs();
                basis[r] = n + m + r;
            }
        }
        // Artificials: only those in the initial basis may be positive.
        for r in 0..m {
            lo.push(0.0);
            up.push(if basis[r] == n + m + r { f64::INFINITY } else { 0.0 });
        }
        let mut row_of = vec![None; width];
        for (r, &b) in basis.iter().enumerate() {
            row_of[b] = Some(r);
        }
        Tableau {
            m,
            n,
            t,
            width,
            d: vec![0.0; width],
            lower: lo,
            upper: up,
            value,
            basis,
            row_of,
            degenerate: 0,
            iterations: 0,
        }
    }

    fn iteration_cap(&self) -> usize {
        50 * (self.m + self.width) + 10_000
    }

    fn set_costs(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * self.width..(r + 1) * self.width];
                for (dj, &a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn solve(mut self, lp: &Lp) -> LpOutcome {
        let (n, m) = (self.n, self.m);
        let needs_phase_one = self.basis.iter().any(|&b| b >= n + m);
        if needs_phase_one {
            let mut cost = vec![0.0; self.width];
            cost[n + m..].iter_mut().for_each(|c| *c = 1.0);
            self.set_costs(&cost);
            match self.run() {
                Some(Step::Optimal) => {}
                Some(Step::Unbounded) | Some(Step::Continue) => return LpOutcome::Infeasible,
                None => return LpOutcome::IterationLimit,
            }
            let art: f64 = self.value[n + m..].iter().sum();
            let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if art > PHASE_ONE_TOL * scale {
                return LpOutcome::Infeasible;
            }
            for k in n + m..self.width {
                self.upper[k] = 0.0;
                if self.row_of[k].is_none() {
                    self.value[k] = 0.0;
                }
            }
        }
        let mut cost = vec![0.0; self.width];
        cost[..n].copy_from_slice(&lp.obj);
        self.set_costs(&cost);
        match self.run() {
            Some(Step::Optimal) => {}
            Some(Step::Unbounded) => return LpOutcome::Unbounded,
            Some(Step::Continue) => unreachable!(),
            None => return LpOutcome::IterationLimit,
        }
        let x: Vec<f64> = (0..n)
            .map(|j| self.value[j].clamp(self.lower[j], self.upper[j]))
            .collect();
        LpOutcome::Optimal(LpSolution {
            objective: lp.objective(&x),
            x,
            iterations: self.iterations,
        })
    }

    /// Pivots until optimal or unbounded; `None` on the iteration cap.
    fn run(&mut self) -> Option<Step> {
        loop {
            if self.iterations >= self.iteration_cap() {
                return None;
            }
            match self.step() {
                Step::Continue => self.iterations += 1,
                other => return Some(other),
            }
        }
    }

    fn entering(&self) -> Option<(usize, f64)> {
        let bland = self.degenerate >= DEGENERATE_STREAK;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.width {
            if self.row_of[j].is_some() {
                continue;
            }
            let dj = self.d[j];
            let dir = if dj < -TOL && self.value[j] < self.upper[j] {
                1.0
            } else if dj > TOL && self.value[j] > self.lower[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn step(&mut self) -> Step {
        let Some((q, dir)) = self.entering() else {
            return Step::Optimal;
        };
        let w = self.width;
        let bland = self.degenerate >= DEGENERATE_STREAK;

        // Ratio test. `None` row means the entering variable flips bounds.
        let mut theta = self.upper[q] - self.lower[q];
        let mut leave: Option<usize> = None;
        let mut leave_alpha = 0.0;
        for r in 0..self.m {
            let alpha = dir * self.t[r * w + q];
            let b = self.basis[r];
            let limit = if alpha > TOL {
                (self.value[b] - self.lower[b]) / alpha
            } else if alpha < -TOL {
                (self.upper[b] - self.value[b]) / -alpha
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let better = match leave {
                _ if limit < theta - 1e-12 => true,
                Some(cur) if limit <= theta + 1e-12 => {
                    if bland {
                        b < self.basis[cur]
                    } else {
                        alpha.abs() > leave_alpha
                    }
                }
                _ => false,
            };
            if better {
                theta = limit;
                leave = Some(r);
                leave_alpha = alpha.abs();
            }
        }
        if theta.is_infinite() {
            return Step::Unbounded;
        }
        if theta <= 1e-12 {
            self.degenerate += 1;
        } else {
            self.degenerate = 0;
        }

        // Move along the edge.
        if theta > 0.0 {
            for r in 0..self.m {
                let a = self.t[r * w + q];
                if a != 0.0 {
                    self.value[self.basis[r]] -= dir * theta * a;
                }
            }
            self.value[q] += dir * theta;
        }

        let Some(r) = leave else {
            self.value[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
            return Step::Continue;
        };

        let out = self.basis[r];
        let alpha = dir * self.t[r * w + q];
        self.value[out] = if alpha > 0.0 { self.lower[out] } else { self.upper[out] };
        self.pivot(r, q);
        self.basis[r] = q;
        self.row_of[out] = None;
        self.row_of[q] = Some(r);
        Step::Continue
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.t[r * w + q];
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            row.iter_mut().for_each(|v| *v /= piv);
            row[q] = 1.0;
        }
        let (head, rest) = self.t.split_at_mut(r * w);
        let (prow, tail) = rest.split_at_mut(w);
        let nz: Vec<usize> = (0..w).filter(|&j| prow[j] != 0.0).collect();
        let eliminate = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * prow[j];
                }
                row[q] = 0.0;
            }
        };
        head.chunks_mut(w).for_each(eliminate);
        tail.chunks_mut(w).for_each(eliminate);
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * prow[j];
            }
            self.d[q] = 0.0;
        }
    }
}
