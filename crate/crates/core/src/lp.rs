//! Dense two-phase simplex for the small feasibility/optimization problems that
//! drive cell enumeration, redundancy detection and facet tests.
//!
//! Problems here have at most a few dozen rows and columns, so a plain dense
//! tableau with Bland's rule is the right tool: no degeneracy cycling, exact
//! statuses, and easy to audit. Variables are free; internally each one is
//! split into a nonnegative pair.

use crate::error::{Error, Result};

/// Outcome of `maximize`: the solver always reports one of the three states.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, point: Vec<f64> },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    /// Optimal objective value, `+inf` for unbounded, `-inf` for infeasible.
    /// Convenient for "sup over constraint set" style queries.
    pub fn sup(&self) -> f64 {
        match self {
            LpOutcome::Optimal { value, .. } => *value,
            LpOutcome::Unbounded => f64::INFINITY,
            LpOutcome::Infeasible => f64::NEG_INFINITY,
        }
    }
}

/// Maximize `objective · x` subject to `row · x <= rhs` for every
/// `(row, rhs)` in `constraints`; all variables are free.
pub fn maximize(objective: &[f64], constraints: &[(Vec<f64>, f64)], tol: f64) -> Result<LpOutcome> {
    let n = objective.len();
    for (row, rhs) in constraints {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        if !rhs.is_finite() || row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "LP constraint".into(),
            });
        }
    }
    if objective.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "LP objective".into(),
        });
    }

    let mut t = Tableau::new(objective, constraints, tol);
    if !t.phase_one()? {
        return Ok(LpOutcome::Infeasible);
    }
    t.phase_two()
}

struct Tableau {
    /// Constraint rows; layout `[2n split vars | m slacks | artificials | rhs]`.
    rows: Vec<Vec<f64>>,
    /// Basic column per row.
    basis: Vec<usize>,
    n: usize,
    n_slack: usize,
    n_art: usize,
    objective: Vec<f64>,
    tol: f64,
}

impl Tableau {
    fn new(objective: &[f64], constraints: &[(Vec<f64>, f64)], tol: f64) -> Self {
        let n = objective.len();
        let m = constraints.len();
        let width = 2 * n + m; // artificials appended lazily, rhs last
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut n_art = 0;

        // First pass: count artificials (rows whose rhs is negative after the
        // slack is added need their sign flipped, losing the identity column).
        for (_, rhs) in constraints {
            if *rhs < 0.0 {
                n_art += 1;
            }
        }
        let total = width + n_art + 1;
        let mut art_cursor = width;
        for (i, (coeffs, rhs)) in constraints.iter().enumerate() {
            let mut row = vec![0.0; total];
            let flip = if *rhs < 0.0 { -1.0 } else { 1.0 };
            for (j, &v) in coeffs.iter().enumerate() {
                row[j] = flip * v;
                row[n + j] = -flip * v;
            }
            row[2 * n + i] = flip; // slack
            row[total - 1] = flip * rhs;
            if flip < 0.0 {
                row[art_cursor] = 1.0;
                basis.push(art_cursor);
                art_cursor += 1;
            } else {
                basis.push(2 * n + i);
            }
            rows.push(row);
        }

        Tableau {
            rows,
            basis,
            n,
            n_slack: m,
            n_art,
            objective: objective.to_vec(),
            tol,
        }
    }

    fn total_cols(&self) -> usize {
        2 * self.n + self.n_slack + self.n_art
    }

    fn rhs_col(&self) -> usize {
        self.total_cols()
    }

    /// Reduced-cost row for maximizing `costs` given the current basis.
    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let cols = self.total_cols() + 1;
        let mut red = vec![0.0; cols];
        red[..costs.len()].copy_from_slice(costs);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = costs.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (r, v) in red.iter_mut().zip(row) {
                    *r -= cb * v;
                }
            }
        }
        red
    }

    fn pivot(&mut self, row: usize, col: usize, red: &mut [f64]) {
        let pivot = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= pivot;
        }
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col];
            if factor != 0.0 {
                for c in 0..self.rows[r].len() {
                    self.rows[r][c] -= factor * self.rows[row][c];
                }
            }
        }
        let factor = red[col];
        if factor != 0.0 {
            for c in 0..red.len() {
                red[c] -= factor * self.rows[row][c];
            }
        }
        self.basis[row] = col;
    }

    /// Run simplex for the given cost vector. Returns `None` when the
    /// objective is unbounded above, otherwise the optimal cost row.
    fn run(&mut self, costs: &[f64], allow: &dyn Fn(usize) -> bool) -> Result<Option<Vec<f64>>> {
        let mut red = self.reduced_costs(costs);
        let max_iter = 200 + 50 * (self.rows.len() + self.total_cols());
        for _ in 0..max_iter {
            // Bland: smallest column index with positive reduced cost.
            let entering = (0..self.total_cols())
                .find(|&j| allow(j) && red[j] > self.tol && !self.basis.contains(&j));
            let Some(col) = entering else {
                return Ok(Some(red));
            };
            let rhs_col = self.rhs_col();
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > self.tol {
                    let ratio = row[rhs_col] / row[col];
                    let better = match leave {
                        None => true,
                        Some((best_row, best_ratio)) => {
                            ratio < best_ratio - self.tol
                                || (ratio <= best_ratio + self.tol
                                    && self.basis[i] < self.basis[best_row])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col, &mut red),
                None => return Ok(None), // column can grow forever
            }
        }
        Err(Error::Numeric("simplex iteration limit".into()))
    }

    /// Phase one: drive artificials to zero. Returns false for infeasible.
    fn phase_one(&mut self) -> Result<bool> {
        if self.n_art == 0 {
            return Ok(true);
        }
        let total = self.total_cols();
        let art_start = 2 * self.n + self.n_slack;
        let mut costs = vec![0.0; total];
        for c in costs.iter_mut().take(total).skip(art_start) {
            *c = -1.0;
        }
        self.run(&costs, &|_| true)?; // bounded below by 0, never unbounded
        let rhs_col = self.rhs_col();
        let art_value: f64 = (0..self.rows.len())
            .filter(|&i| self.basis[i] >= art_start)
            .map(|i| self.rows[i][rhs_col])
            .sum();
        if art_value > self.tol.max(1e-7) {
            return Ok(false);
        }
        // Pivot remaining (zero-valued) artificials out where possible.
        for i in 0..self.rows.len() {
            if self.basis[i] >= art_start {
                if let Some(col) = (0..art_start).find(|&j| self.rows[i][j].abs() > self.tol) {
                    let mut dummy = vec![0.0; self.rhs_col() + 1];
                    self.pivot(i, col, &mut dummy);
                }
            }
        }
        // Rows still basic in an artificial are redundant zero rows; drop them.
        let mut keep = Vec::with_capacity(self.rows.len());
        for i in 0..self.rows.len() {
            keep.push(self.basis[i] < art_start);
        }
        let mut it = keep.iter();
        self.rows.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.basis.retain(|_| *it.next().unwrap());
        Ok(true)
    }

    fn phase_two(&mut self) -> Result<LpOutcome> {
        let total = self.total_cols();
        let art_start = 2 * self.n + self.n_slack;
        let mut costs = vec![0.0; total];
        for j in 0..self.n {
            costs[j] = self.objective[j];
            costs[self.n + j] = -self.objective[j];
        }
        let red = self.run(&costs, &|j| j < art_start)?;
        let Some(_) = red else {
            return Ok(LpOutcome::Unbounded);
        };
        let rhs_col = self.rhs_col();
        let mut y = vec![0.0; total];
        for (i, &b) in self.basis.iter().enumerate() {
            y[b] = self.rows[i][rhs_col];
        }
        let point: Vec<f64> = (0..self.n).map(|j| y[j] - y[self.n + j]).collect();
        let value = point
            .iter()
            .zip(&self.objective)
            .map(|(x, c)| x * c)
            .sum();
        Ok(LpOutcome::Optimal { value, point })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    fn le(coeffs: &[f64], rhs: f64) -> (Vec<f64>, f64) {
        (coeffs.to_vec(), rhs)
    }

    #[test]
    fn bounded_box() {
        // max x + y over [0,1]^2 (given as 4 inequalities on free vars)
        let cons = vec![
            le(&[1.0, 0.0], 1.0),
            le(&[-1.0, 0.0], 0.0),
            le(&[0.0, 1.0], 1.0),
            le(&[0.0, -1.0], 0.0),
        ];
        match maximize(&[1.0, 1.0], &cons, TOL).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert!((value - 2.0).abs() < 1e-8);
                assert!((point[0] - 1.0).abs() < 1e-8);
                assert!((point[1] - 1.0).abs() < 1e-8);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_halfplane() {
        let cons = vec![le(&[-1.0, 0.0], 0.0)]; // x >= 0
        assert_eq!(
            maximize(&[1.0, 0.0], &cons, TOL).unwrap(),
            LpOutcome::Unbounded
        );
        // objective orthogonal to the recession direction is still unbounded in y
        assert_eq!(
            maximize(&[0.0, 1.0], &cons, TOL).unwrap(),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn infeasible_strip() {
        let cons = vec![le(&[1.0], -1.0), le(&[-1.0], -1.0)]; // x <= -1 and x >= 1
        assert_eq!(maximize(&[1.0], &cons, TOL).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn bounded_objective_in_unbounded_region() {
        // region x <= 2 (unbounded), objective x has sup 2
        let cons = vec![le(&[1.0, 0.0], 2.0)];
        match maximize(&[1.0, 0.0], &cons, TOL).unwrap() {
            LpOutcome::Optimal { value, .. } => assert!((value - 2.0).abs() < 1e-8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn no_constraints() {
        assert_eq!(
            maximize(&[1.0, 0.0], &[], TOL).unwrap(),
            LpOutcome::Unbounded
        );
        match maximize(&[0.0, 0.0], &[], TOL).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_needs_artificials() {
        // x >= 5, x <= 7: feasible band away from the origin
        let cons = vec![le(&[-1.0], -5.0), le(&[1.0], 7.0)];
        match maximize(&[-1.0], &cons, TOL).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert!((value + 5.0).abs() < 1e-8);
                assert!((point[0] - 5.0).abs() < 1e-8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chebyshev_center_of_unit_square() {
        // vars (x, y, t): max t s.t. x+t<=1, -x+t<=0+... i.e. margin to each side
        let cons = vec![
            le(&[1.0, 0.0, 1.0], 1.0),
            le(&[-1.0, 0.0, 1.0], 0.0),
            le(&[0.0, 1.0, 1.0], 1.0),
            le(&[0.0, -1.0, 1.0], 0.0),
        ];
        match maximize(&[0.0, 0.0, 1.0], &cons, TOL).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert!((value - 0.5).abs() < 1e-8);
                assert!((point[0] - 0.5).abs() < 1e-8);
                assert!((point[1] - 0.5).abs() < 1e-8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn large_offsets_stay_stable() {
        // facet-style query far from the origin: max t s.t. x - 1e6 in [0, 1] - t
        let cons = vec![le(&[1.0, 1.0], 1.0e6 + 1.0), le(&[-1.0, 1.0], -1.0e6)];
        match maximize(&[0.0, 1.0], &cons, TOL).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert!((value - 0.5).abs() < 1e-6);
                assert!((point[0] - (1.0e6 + 0.5)).abs() < 1e-4);
            }
            other => panic!("{other:?}"),
        }
    }

    /// Brute-force oracle for 2-var LPs: enumerate pairwise constraint
    /// intersections plus ray probes, entirely independent of the simplex path.
    fn oracle_2d(c: &[f64; 2], cons: &[(Vec<f64>, f64)]) -> LpOutcome {
        let feasible = |p: &[f64; 2]| {
            cons.iter()
                .all(|(a, b)| a[0] * p[0] + a[1] * p[1] <= b + 1e-7)
        };
        let mut best: Option<(f64, [f64; 2])> = None;
        let mut any_feasible = false;
        let mut consider = |p: [f64; 2]| {
            if feasible(&p) {
                any_feasible = true;
                let v = c[0] * p[0] + c[1] * p[1];
                if best.is_none() || v > best.unwrap().0 {
                    best = Some((v, p));
                }
            }
        };
        for i in 0..cons.len() {
            for j in i + 1..cons.len() {
                let (a1, b1) = (&cons[i].0, cons[i].1);
                let (a2, b2) = (&cons[j].0, cons[j].1);
                let det = a1[0] * a2[1] - a1[1] * a2[0];
                if det.abs() > 1e-12 {
                    consider([(b1 * a2[1] - b2 * a1[1]) / det, (a1[0] * b2 - a2[0] * b1) / det]);
                }
            }
        }
        consider([0.0, 0.0]);
        // Detect unboundedness: feasible direction d with c·d > 0 sampled densely.
        if any_feasible {
            let (_, base) = best.unwrap();
            for k in 0..3600 {
                let th = k as f64 * std::f64::consts::TAU / 3600.0;
                let d = [th.cos(), th.sin()];
                if c[0] * d[0] + c[1] * d[1] > 1e-6
                    && cons
                        .iter()
                        .all(|(a, _)| a[0] * d[0] + a[1] * d[1] <= 1e-12)
                {
                    return LpOutcome::Unbounded;
                }
            }
            let _ = base;
            return LpOutcome::Optimal {
                value: best.unwrap().0,
                point: best.unwrap().1.to_vec(),
            };
        }
        LpOutcome::Infeasible
    }

    #[test]
    fn random_lps_match_bruteforce_oracle() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(20240917);
        let mut checked = 0;
        for _ in 0..300 {
            let m = rng.random_range(2..7);
            let cons: Vec<(Vec<f64>, f64)> = (0..m)
                .map(|_| {
                    let a = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                    let b = rng.random_range(-1.0..1.0);
                    (a, b)
                })
                .collect();
            let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let got = maximize(&c, &cons, TOL).unwrap();
            let want = oracle_2d(&c, &cons);
            match (&got, &want) {
                (LpOutcome::Optimal { value: v1, .. }, LpOutcome::Optimal { value: v2, .. }) => {
                    assert!(
                        (v1 - v2).abs() <= 1e-5 * (1.0 + v2.abs()),
                        "value mismatch {v1} vs {v2} on {cons:?} obj {c:?}"
                    );
                    checked += 1;
                }
                (LpOutcome::Unbounded, LpOutcome::Unbounded) => checked += 1,
                (LpOutcome::Infeasible, LpOutcome::Infeasible) => checked += 1,
                // The ray oracle probes 0.1-degree steps; a maximizing direction
                // can slip between probes, so only flag disagreements where the
                // oracle is authoritative.
                (LpOutcome::Unbounded, LpOutcome::Optimal { .. }) => {}
                _ => panic!("status mismatch: got {got:?}, oracle {want:?}\n{cons:?} obj {c:?}"),
            }
        }
        assert!(checked > 200, "oracle agreed on only {checked} cases");
    }
}
