//! Dense two-phase simplex for small standard-form problems:
//! maximize c·x subject to A·x = b, x ≥ 0.
//!
//! Pivoting uses Bland's rule throughout, so the method terminates and is
//! deterministic. Problem sizes here are tiny (tens of variables), so a full
//! tableau is the simplest correct choice.

use crate::linalg::RealMatrix;
use thiserror::Error;

const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("problem is infeasible (phase-1 residual {0:.3e})")]
    Infeasible(f64),
    #[error("objective is unbounded")]
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    // m rows of constraints, then one cost row; n structural+artificial cols, then rhs.
    m: usize,
    n: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.n + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.n)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.n + 1;
        let p = self.at(row, col);
        for j in 0..w {
            self.t[row * w + j] /= p;
        }
        for i in 0..=self.m {
            if i == row {
                continue;
            }
            let f = self.t[i * w + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.t[i * w + j] -= f * self.t[row * w + j];
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex to optimality on the current cost row (a maximization
    /// written as minimizing the negated costs in the last row).
    fn optimize(&mut self, allowed: &[bool]) -> Result<(), LpError> {
        loop {
            // Bland: entering column = smallest index with negative cost-row entry.
            let mut enter = None;
            for j in 0..self.n {
                if allowed[j] && !self.basis.contains(&j) && self.at(self.m, j) < -PIVOT_TOL {
                    enter = Some(j);
                    break;
                }
            }
            let Some(col) = enter else { return Ok(()) };
            // Bland: leaving row = min ratio, ties by smallest basis variable index.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, col);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - PIVOT_TOL
                                || (ratio < br + PIVOT_TOL && self.basis[i] < self.basis[bi])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(row, col);
        }
    }
}

/// Solves maximize c·x s.t. A·x = b, x ≥ 0.
pub fn solve_standard(a: &RealMatrix, b: &[f64], c: &[f64]) -> Result<LpSolution, LpError> {
    let m = a.rows();
    let n = a.cols();
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);

    let total = n + m; // structural + artificial
    let w = total + 1;
    let mut t = vec![0.0; (m + 1) * w];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i * w + j] = sign * a.get(i, j);
        }
        t[i * w + n + i] = 1.0;
        t[i * w + total] = sign * b[i];
    }
    // Phase-1 cost: minimize sum of artificials.
    for j in 0..total {
        let mut acc = 0.0;
        for i in 0..m {
            if j >= n {
                continue;
            }
            acc += t[i * w + j];
        }
        if j < n {
            t[m * w + j] = -acc;
        }
    }
    let mut rhs1 = 0.0;
    for i in 0..m {
        rhs1 += t[i * w + total];
    }
    t[m * w + total] = -rhs1;

    let mut tab = Tableau { m, n: total, t, basis: (n..total).collect() };
    let allowed: Vec<bool> = vec![true; total];
    tab.optimize(&allowed)?;
    let resid = -tab.at(m, total);
    if resid > 1e-7 {
        return Err(LpError::Infeasible(resid));
    }
    // Drive remaining artificial variables out of the basis where possible.
    for i in 0..m {
        if tab.basis[i] >= n {
            let mut col = None;
            for j in 0..n {
                if tab.at(i, j).abs() > PIVOT_TOL {
                    col = Some(j);
                    break;
                }
            }
            if let Some(j) = col {
                tab.pivot(i, j);
            }
        }
    }

    // Phase 2: rebuild the cost row for the real objective.
    let w = tab.n + 1;
    for j in 0..w {
        tab.t[m * w + j] = 0.0;
    }
    for j in 0..n {
        tab.t[m * w + j] = -c[j];
    }
    // Zero the cost row over the basic columns.
    for i in 0..m {
        let bj = tab.basis[i];
        let f = tab.t[m * w + bj];
        if f != 0.0 {
            for j in 0..w {
                tab.t[m * w + j] -= f * tab.t[i * w + j];
            }
        }
    }
    let mut allowed = vec![true; tab.n];
    for j in n..tab.n {
        allowed[j] = false;
    }
    tab.optimize(&allowed)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective })
}

/// Phase-1 feasibility of {x ≥ 0 : A·x = b}.
pub fn is_feasible(a: &RealMatrix, b: &[f64]) -> bool {
    solve_standard(a, b, &vec![0.0; a.cols()]).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_lp() {
        // maximize x + y s.t. x + y + s = 1 -> optimum 1
        let a = RealMatrix::from_rows(&[vec![1.0, 1.0, 1.0]]);
        let sol = solve_standard(&a, &[1.0], &[1.0, 1.0, 0.0]).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        // x = -1 with x >= 0
        let a = RealMatrix::from_rows(&[vec![1.0]]);
        assert!(matches!(
            solve_standard(&a, &[-1.0], &[0.0]),
            Err(LpError::Infeasible(_))
        ));
    }

    #[test]
    fn unbounded_detected() {
        // maximize x with x - y = 0: ray x = y -> unbounded
        let a = RealMatrix::from_rows(&[vec![1.0, -1.0]]);
        assert!(matches!(
            solve_standard(&a, &[0.0], &[1.0, 0.0]),
            Err(LpError::Unbounded)
        ));
    }

    #[test]
    fn cone_membership() {
        // cone generated by (1,1,0), (1,-1,0), (1,0,1), (1,0,-1) contains (1,0,0)
        let g = RealMatrix::from_rows(&[
            vec![1.0, 1.0, 1.0, 1.0],
            vec![1.0, -1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, -1.0],
        ]);
        assert!(is_feasible(&g, &[1.0, 0.0, 0.0]));
        assert!(!is_feasible(&g, &[0.0, 1.0, 0.0]));
        assert!(!is_feasible(&g, &[1.0, 2.0, 0.0]));
    }

    #[test]
    fn degenerate_terminates() {
        // degenerate vertex; Bland must still terminate
        let a = RealMatrix::from_rows(&[
            vec![1.0, 1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0, 1.0],
        ]);
        let sol = solve_standard(&a, &[1.0, 1.0], &[2.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
    }
}
