//! Optimal one-to-one assignment over a rectangular weight matrix.
//!
//! This is the matching stage of the bipartite set measure: given the
//! pairwise concept scores of two code sets, pick a one-to-one matching
//! of the smaller set into the larger one whose total weight is optimal.
//! The solver is the standard O(n³) potential-based Hungarian method on
//! a matrix padded to square; only the total over the real (non-padded)
//! cells is reported.

use crate::set::SetSimError;

/// Matching objective; similarities are maximized, distances minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeMode {
    Maximize,
    Minimize,
}

/// Compensated summation (Kahan with the Neumaier correction).
///
/// Matching totals are contractual values ("a hundred matches at 0.1 sum
/// to exactly 10"), and naive left-to-right addition already misses that
/// by a few ulps at a hundred terms.
pub(crate) fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Minimum-cost perfect matching on a square cost matrix via Hungarian
/// potentials. Returns `assign[row] = col`.
fn hungarian_min(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays with a virtual 0 column, per the classic formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Total weight of an optimal assignment matching `min(m, n)` rows and
/// columns of an `m×n` weight matrix one-to-one.
///
/// The matrix is padded square internally — with zeros when maximizing,
/// with `max + 1` when minimizing — and padded matches never contribute
/// to the returned total.
pub fn assignment_optimum(weights: &[Vec<f64>], mode: OptimizeMode) -> Result<f64, SetSimError> {
    let m = weights.len();
    let n = weights.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return Err(SetSimError::EmptyMatrix);
    }
    assert!(
        weights.iter().all(|row| row.len() == n),
        "ragged weight matrix"
    );
    let mut max_entry = f64::NEG_INFINITY;
    for (i, row) in weights.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if !w.is_finite() {
                return Err(SetSimError::NonFiniteWeight { row: i, col: j, value: w });
            }
            max_entry = max_entry.max(w);
        }
    }

    let size = m.max(n);
    let pad = match mode {
        OptimizeMode::Maximize => 0.0,
        OptimizeMode::Minimize => max_entry + 1.0,
    };
    let cost: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    let w = if i < m && j < n { weights[i][j] } else { pad };
                    match mode {
                        OptimizeMode::Maximize => -w,
                        OptimizeMode::Minimize => w,
                    }
                })
                .collect()
        })
        .collect();

    let assign = hungarian_min(&cost);
    Ok(kahan_sum(assign.iter().enumerate().filter_map(|(i, &j)| {
        (i < m && j < n).then(|| weights[i][j])
    })))
}
