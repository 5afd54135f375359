//! Shortest augmenting path assignment with dual potentials, `O(n^2 m)` for
//! an `n x m` cost matrix with `n <= m`.

/// Minimum-cost assignment of every row to a distinct column. `cost` is
/// row-major `n x m`. Returns the column chosen for each row.
///
/// Columns are scanned in index order with a strict comparison, so among
/// equally cheap augmenting paths the lower column wins.
pub fn min_cost_assignment(cost: &[f64], n: usize, m: usize) -> Vec<usize> {
    assert!(n <= m, "more rows than columns");
    assert_eq!(cost.len(), n * m);
    if n == 0 {
        return Vec::new();
    }
    // 1-based internally; index 0 is the virtual root.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0; m + 1];
    let mut used = vec![false; m + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let base = (i0 - 1) * m;
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost[base + j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut out = vec![usize::MAX; n];
    for j in 1..=m {
        if owner[j] != 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(cost: &[f64], n: usize, m: usize) -> f64 {
        fn go(row: usize, used: &mut [bool], cost: &[f64], n: usize, m: usize) -> f64 {
            if row == n {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..m {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row * m + j] + go(row + 1, used, cost, n, m));
                    used[j] = false;
                }
            }
            best
        }
        go(0, &mut vec![false; m], cost, n, m)
    }

    #[test]
    fn square_example() {
        let c = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let a = min_cost_assignment(&c, 3, 3);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| c[i * 3 + j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn rectangular_matches_enumeration() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=4 {
            for m in n..=6 {
                let c: Vec<f64> = (0..n * m).map(|_| (next() * 20.0).floor()).collect();
                let a = min_cost_assignment(&c, n, m);
                let mut seen = vec![false; m];
                for &j in &a {
                    assert!(!seen[j]);
                    seen[j] = true;
                }
                let total: f64 = a.iter().enumerate().map(|(i, &j)| c[i * m + j]).sum();
                assert_eq!(total, brute(&c, n, m));
            }
        }
    }

    #[test]
    fn equal_costs_pick_lowest_columns() {
        let c = vec![1.0; 2 * 4];
        assert_eq!(min_cost_assignment(&c, 2, 4), vec![0, 1]);
    }
}
