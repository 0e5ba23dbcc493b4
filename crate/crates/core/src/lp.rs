//! Dense two-phase simplex for small equality-form linear programs:
//!
//! ```text
//! maximise cᵀx  subject to  A x = b,  x ≥ 0
//! ```
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! basic variable on ratio ties), which rules out cycling and makes results
//! reproducible bit for bit.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    n_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            objective: vec![0.0; n_vars],
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn set_objective(&mut self, c: Vec<f64>) {
        assert_eq!(c.len(), self.n_vars, "objective length");
        self.objective = c;
    }

    /// Adds `Σ coef·x_var = rhs` from sparse terms.
    pub fn add_eq(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let mut row = vec![0.0; self.n_vars];
        for &(j, v) in terms {
            row[j] += v;
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    m: usize,
    n: usize,
    /// `m` rows of `n + m` coefficients (original then artificial), then rhs.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    active_rows: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.n_vars;
        let mut a = Vec::with_capacity(m);
        for (i, (row, &b)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
            let s = if b < 0.0 { -1.0 } else { 1.0 };
            let mut r: Vec<f64> = row.iter().map(|v| s * v).collect();
            r.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
            r.push(s * b);
            a.push(r);
        }
        Self {
            m,
            n,
            a,
            basis: (n..n + m).collect(),
            active_rows: vec![true; m],
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.a[i][self.n + self.m]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.n + self.m + 1;
        let p = self.a[row][col];
        for j in 0..width {
            self.a[row][j] /= p;
        }
        let pivot_row = self.a[row].clone();
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.a[i][col];
            if f != 0.0 {
                for j in 0..width {
                    self.a[i][j] -= f * pivot_row[j];
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations maximising `cost` over the allowed columns.
    fn optimise(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        let max_iters = 50 * (self.n + self.m + 10);
        for _ in 0..max_iters {
            // reduced cost of column j: c_j − c_Bᵀ B⁻¹ A_j
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut r = cost[j];
                for i in 0..self.m {
                    if self.active_rows[i] {
                        r -= cost[self.basis[i]] * self.a[i][j];
                    }
                }
                r > COST_EPS
            });
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if !self.active_rows[i] || self.a[i][col] <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs(i) / self.a[i][col];
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12 || ((ratio - br).abs() <= 1e-12 && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return Err(Error::Unbounded),
            }
        }
        // Bland's rule terminates; hitting the cap means numerical trouble.
        Err(Error::Unbounded)
    }

    fn solve(mut self, objective: &[f64]) -> Result<LpSolution> {
        let total = self.n + self.m;
        let mut phase1 = vec![0.0; total];
        for c in phase1.iter_mut().skip(self.n) {
            *c = -1.0;
        }
        self.optimise(&phase1, total)?;
        let infeasibility: f64 = (0..self.m)
            .filter(|&i| self.basis[i] >= self.n)
            .map(|i| self.rhs(i))
            .sum();
        if infeasibility > FEAS_EPS {
            return Err(Error::Infeasible);
        }
        // Drive remaining artificials out of the basis; rows where that is
        // impossible are linearly dependent and get dropped.
        for i in 0..self.m {
            if self.basis[i] < self.n {
                continue;
            }
            match (0..self.n).find(|&j| self.a[i][j].abs() > 1e-9 && !self.basis.contains(&j)) {
                Some(j) => self.pivot(i, j),
                None => self.active_rows[i] = false,
            }
        }

        let mut cost = objective.to_vec();
        cost.extend(std::iter::repeat_n(0.0, self.m));
        self.optimise(&cost, self.n)?;

        let mut x = vec![0.0; self.n];
        for i in 0..self.m {
            if self.active_rows[i] && self.basis[i] < self.n {
                x[self.basis[i]] = self.rhs(i).max(0.0);
            }
        }
        let objective = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem_with_slacks() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → (2, 6), 36
        let mut lp = LinearProgram::new(5);
        lp.set_objective(vec![3.0, 5.0, 0.0, 0.0, 0.0]);
        lp.add_eq(&[(0, 1.0), (2, 1.0)], 4.0);
        lp.add_eq(&[(1, 2.0), (3, 1.0)], 12.0);
        lp.add_eq(&[(0, 3.0), (1, 2.0), (4, 1.0)], 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new(2);
        lp.add_eq(&[(0, 1.0), (1, 1.0)], 1.0);
        lp.add_eq(&[(0, 1.0), (1, 1.0)], 2.0);
        assert!(matches!(lp.solve(), Err(Error::Infeasible)));
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 0.0]);
        lp.add_eq(&[(0, 1.0), (1, -1.0)], 0.0);
        assert!(matches!(lp.solve(), Err(Error::Unbounded)));
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        let mut lp = LinearProgram::new(3);
        lp.set_objective(vec![1.0, 2.0, 3.0]);
        lp.add_eq(&[(0, 1.0), (1, 1.0), (2, 1.0)], 1.0);
        lp.add_eq(&[(0, -2.0), (1, -2.0), (2, -2.0)], -2.0);
        lp.add_eq(&[(2, 1.0)], 0.25);
        let s = lp.solve().unwrap();
        assert!((s.objective - (0.75 * 2.0 + 0.75)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_ties_are_reproducible() {
        let build = || {
            let mut lp = LinearProgram::new(4);
            lp.set_objective(vec![1.0, 1.0, 1.0, 1.0]);
            lp.add_eq(&[(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)], 1.0);
            lp
        };
        let a = build().solve().unwrap();
        let b = build().solve().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.x, vec![1.0, 0.0, 0.0, 0.0]);
    }
}
