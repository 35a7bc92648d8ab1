//! Dense two-phase tableau simplex for small equality-form programs.
//!
//! Solves `min c.x  s.t.  A x = b, x >= 0` with Bland's rule, so degenerate
//! instances (the norm for stochastic-matrix feasibility) cannot cycle.
//! Intended for a few hundred rows at most; everything is dense.

use crate::error::{Result, ThermoError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexTolerances {
    /// Smallest pivot magnitude accepted.
    pub pivot: f64,
    /// Reduced costs above `-optimality` count as nonnegative.
    pub optimality: f64,
    /// Phase-one residual below which the program is declared feasible.
    pub feasibility: f64,
}

impl Default for SimplexTolerances {
    fn default() -> Self {
        Self {
            pivot: 1e-11,
            optimality: 1e-11,
            feasibility: 1e-9,
        }
    }
}

/// `min objective.x` subject to `rows[i].x = rhs[i]` and `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible { residual: f64 },
    Unbounded,
}

struct Tableau {
    /// Constraint rows followed by the reduced-cost row; last column is the right-hand side.
    data: Vec<f64>,
    width: usize,
    rows: usize,
    basis: Vec<usize>,
    n_vars: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn cost_row(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.at(pr, pc);
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for i in 0..=self.rows {
            if i == pr {
                continue;
            }
            let f = self.data[i * w + pc];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Bland's rule iterations over columns `< allowed`. Returns `false` on unboundedness.
    fn run(&mut self, allowed: usize, tol: &SimplexTolerances, budget: &mut usize) -> Result<bool> {
        loop {
            let cost = self.cost_row();
            let entering = (0..allowed).find(|&j| self.at(cost, j) < -tol.optimality);
            let Some(pc) = entering else {
                return Ok(true);
            };
            let rhs = self.rhs_col();
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, pc);
                if a <= tol.pivot {
                    continue;
                }
                let ratio = self.at(i, rhs).max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-13 * br.max(1.0);
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((pr, _)) = best else {
                return Ok(false);
            };
            if *budget == 0 {
                return Err(ThermoError::Solver("iteration limit reached".into()));
            }
            *budget -= 1;
            self.pivot(pr, pc);
        }
    }

    fn remove_row(&mut self, i: usize) {
        let w = self.width;
        self.data.drain(i * w..(i + 1) * w);
        self.basis.remove(i);
        self.rows -= 1;
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    solve_with(lp, &SimplexTolerances::default())
}

pub fn solve_with(lp: &LinearProgram, tol: &SimplexTolerances) -> Result<LpOutcome> {
    let n = lp.objective.len();
    let m = lp.rows.len();
    if lp.rhs.len() != m {
        return Err(ThermoError::DimensionMismatch {
            expected: m,
            found: lp.rhs.len(),
        });
    }
    if let Some(row) = lp.rows.iter().find(|row| row.len() != n) {
        return Err(ThermoError::DimensionMismatch {
            expected: n,
            found: row.len(),
        });
    }

    // Columns: n structural, m artificial, rhs.
    let width = n + m + 1;
    let mut data = vec![0.0; (m + 1) * width];
    for (i, (row, &b)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for (j, &a) in row.iter().enumerate() {
            data[i * width + j] = sign * a;
        }
        data[i * width + n + i] = 1.0;
        data[i * width + width - 1] = sign * b;
    }
    // Phase-one reduced costs: -(sum of rows) on structural columns and rhs.
    for i in 0..m {
        for j in (0..n).chain(std::iter::once(width - 1)) {
            data[m * width + j] -= data[i * width + j];
        }
    }
    let mut t = Tableau {
        data,
        width,
        rows: m,
        basis: (n..n + m).collect(),
        n_vars: n,
    };
    let mut budget = 200_000 + 50 * (n + m);

    t.run(n, tol, &mut budget)?;
    let residual = -t.at(t.cost_row(), t.rhs_col());
    if residual > tol.feasibility {
        return Ok(LpOutcome::Infeasible { residual });
    }

    // Drive remaining artificials out of the basis; rows where that is impossible are redundant.
    let mut i = 0;
    while i < t.rows {
        if t.basis[i] >= n {
            let col = (0..n)
                .filter(|&j| t.at(i, j).abs() > 1e-9)
                .max_by(|&a, &b| t.at(i, a).abs().total_cmp(&t.at(i, b).abs()));
            match col {
                Some(j) => t.pivot(i, j),
                None => {
                    t.remove_row(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase two.
    let cost = t.cost_row();
    let rhs = t.rhs_col();
    for j in 0..t.width {
        t.data[cost * t.width + j] = if j < n { lp.objective[j] } else { 0.0 };
    }
    for i in 0..t.rows {
        let cb = lp.objective[t.basis[i]];
        if cb != 0.0 {
            for j in (0..n).chain(std::iter::once(rhs)) {
                let v = t.at(i, j);
                t.data[cost * t.width + j] -= cb * v;
            }
        }
    }
    if !t.run(n, tol, &mut budget)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![0.0; t.n_vars];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.at(i, rhs);
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { x, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(outcome: LpOutcome) -> (Vec<f64>, f64) {
        match outcome {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn small_program() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let lp = LinearProgram {
            objective: vec![-1.0, -1.0, 0.0, 0.0],
            rows: vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]],
            rhs: vec![4.0, 6.0],
        };
        let (x, v) = optimal(solve(&lp).unwrap());
        assert!((v + 2.8).abs() < 1e-12);
        assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn infeasible_program() {
        let lp = LinearProgram {
            objective: vec![0.0, 0.0],
            rows: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            rhs: vec![1.0, 2.0],
        };
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Infeasible { .. }));
    }

    #[test]
    fn unbounded_program() {
        let lp = LinearProgram {
            objective: vec![-1.0, 0.0],
            rows: vec![vec![1.0, -1.0]],
            rhs: vec![1.0],
        };
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        let lp = LinearProgram {
            objective: vec![1.0, 2.0],
            rows: vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![-1.0, -1.0]],
            rhs: vec![1.0, 2.0, -1.0],
        };
        let (x, v) = optimal(solve(&lp).unwrap());
        assert!((v - 1.0).abs() < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let lp = LinearProgram {
            objective: vec![1.0],
            rows: vec![vec![1.0, 1.0]],
            rhs: vec![1.0],
        };
        assert!(solve(&lp).is_err());
    }
}
