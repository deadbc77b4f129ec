//! Small dense linear algebra helpers (desk-scale d ≤ 6, m ≤ 20).
//!
//! Everything here is plain `Vec<f64>` with partial-pivot Gaussian elimination;
//! no external matrix crate is warranted at this size.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Rank of a dense row-major matrix, pivots below `tol` treated as zero.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = rows.len();
    let n = rows[0].len();
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut rank = 0;
    let mut col = 0;
    while rank < m && col < n {
        // partial pivot in this column
        let mut best = rank;
        for r in rank + 1..m {
            if a[r][col].abs() > a[best][col].abs() {
                best = r;
            }
        }
        if a[best][col].abs() <= tol {
            col += 1;
            continue;
        }
        a.swap(rank, best);
        let pivot = a[rank][col];
        for r in 0..m {
            if r != rank && a[r][col].abs() > 0.0 {
                let factor = a[r][col] / pivot;
                for c in col..n {
                    let v = a[rank][c];
                    a[r][c] -= factor * v;
                }
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

/// Solve the square system `A x = b`. Returns `None` when `A` is singular
/// relative to `tol`.
pub fn solve(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let mut best = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[best][col].abs() {
                best = r;
            }
        }
        if m[best][col].abs() <= tol {
            return None;
        }
        m.swap(col, best);
        let pivot = m[col][col];
        for r in 0..n {
            if r != col {
                let factor = m[r][col] / pivot;
                for c in col..=n {
                    let v = m[col][c];
                    m[r][c] -= factor * v;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}
