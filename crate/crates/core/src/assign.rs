//! Minimum-cost bipartite assignment (Hungarian method with potentials).

/// Assigns every row of the `rows x cols` cost matrix (`rows <= cols`) to a
/// distinct column minimizing the total cost. Returns the column of each row.
///
/// `cost(i, j)` must be finite.
pub fn min_cost_assignment(rows: usize, cols: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    assert!(rows <= cols, "more rows than columns");
    if rows == 0 {
        return Vec::new();
    }
    // 1-based arrays; column 0 is a sentinel
    let mut u = vec![0.0f64; rows + 1];
    let mut v = vec![0.0f64; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
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
    let mut result = vec![0usize; rows];
    for j in 1..=cols {
        if owner[j] != 0 {
            result[owner[j] - 1] = j - 1;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(n: usize, cost: &[Vec<f64>]) -> f64 {
        fn rec(row: usize, n: usize, used: &mut Vec<bool>, cost: &[Vec<f64>]) -> f64 {
            if row == n {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..cost[0].len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row][j] + rec(row + 1, n, used, cost));
                    used[j] = false;
                }
            }
            best
        }
        rec(0, n, &mut vec![false; cost[0].len()], cost)
    }

    #[test]
    fn textbook_instance() {
        let c = [[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]];
        let a = min_cost_assignment(3, 3, |i, j| c[i][j]);
        assert_eq!(a, vec![1, 0, 2]);
    }

    #[test]
    fn empty() {
        assert!(min_cost_assignment(0, 4, |_, _| 0.0).is_empty());
    }

    proptest! {
        #[test]
        fn optimal_against_brute_force(
            rows in 1usize..6,
            extra in 0usize..2,
            seed in proptest::collection::vec(0.0f64..10.0, 64),
        ) {
            let cols = rows + extra;
            let cost: Vec<Vec<f64>> = (0..rows)
                .map(|i| (0..cols).map(|j| seed[i * 8 + j]).collect())
                .collect();
            let a = min_cost_assignment(rows, cols, |i, j| cost[i][j]);
            let mut seen = a.clone();
            seen.sort();
            seen.dedup();
            prop_assert_eq!(seen.len(), rows);
            let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            prop_assert!((total - brute_force(rows, &cost)).abs() < 1e-9);
        }
    }
}
