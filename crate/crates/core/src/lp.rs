//! Dense bounded-variable primal simplex.
//!
//! Solves `min c'x  s.t.  Ax = b, 0 <= x <= u` with a two-phase method.
//! Nonbasic variables sit at either bound; entering and leaving choices use
//! Bland's lowest-index rule, so the returned vertex is a deterministic
//! function of the input.

use crate::error::LpError;
use crate::scenario::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub costs: Vec<f64>,
    pub equalities: Matrix,
    pub rhs: Vec<f64>,
    /// Upper bound of each variable; lower bounds are zero.
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn var_count(&self) -> usize {
        self.costs.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.costs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest absolute equality residual `|Ax - b|`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        (0..self.equalities.rows())
            .map(|i| {
                let lhs: f64 = self.equalities.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
                (lhs - self.rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.var_count();
        if self.upper.len() != n || self.equalities.cols() != n {
            return Err(LpError::Dimension(format!(
                "{} costs, {} bounds, {} matrix columns",
                n,
                self.upper.len(),
                self.equalities.cols()
            )));
        }
        if self.rhs.len() != self.equalities.rows() {
            return Err(LpError::Dimension(format!(
                "{} rows but {} right-hand sides",
                self.equalities.rows(),
                self.rhs.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Anything that can produce an optimal vertex of a boxed LP.
pub trait LpSolver: Sync {
    fn solve(&self, lp: &LinearProgram, tolerance: f64) -> Result<LpSolution, LpError>;
}

#[derive(Clone, Copy, Debug)]
pub struct BoundedSimplex {
    pub max_iterations: usize,
}

impl Default for BoundedSimplex {
    fn default() -> Self {
        BoundedSimplex {
            max_iterations: 50_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// B^-1 A, row-major.
    t: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    upper: Vec<f64>,
    /// Columns that may never enter (artificials in phase 2).
    frozen: Vec<bool>,
    iterations: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.cols + c]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let cols = self.cols;
        let p = self.at(r, c);
        for v in &mut self.t[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f != 0.0 {
                for (v, pr) in self.t[i * cols..(i + 1) * cols].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
    }

    /// Runs simplex iterations for the given costs until optimal.
    fn optimize(&mut self, costs: &[f64], tol: f64, max_iter: usize) -> Result<(), LpError> {
        let scale = 1.0 + costs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let opt_tol = tol * scale;
        let piv_tol = 1e-9;
        loop {
            if self.iterations >= max_iter {
                return Err(LpError::IterationLimit(max_iter));
            }
            // Bland: lowest-index improving nonbasic column.
            let mut entering = None;
            for j in 0..self.cols {
                if self.frozen[j] || self.state[j] == VarState::Basic || self.upper[j] <= 0.0 {
                    continue;
                }
                let d = costs[j]
                    - (0..self.rows)
                        .map(|i| costs[self.basis[i]] * self.at(i, j))
                        .sum::<f64>();
                let improving = match self.state[j] {
                    VarState::AtLower => d < -opt_tol,
                    VarState::AtUpper => d > opt_tol,
                    VarState::Basic => false,
                };
                if improving {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            self.iterations += 1;
            let dir = if self.state[j] == VarState::AtLower { 1.0 } else { -1.0 };

            // Ratio test. Candidates are (step, variable index, row); row
            // None means the entering variable flips to its other bound.
            let mut best: Option<(f64, usize, Option<usize>)> = None;
            let mut consider = |step: f64, var: usize, row: Option<usize>| {
                let step = step.max(0.0);
                match best {
                    None => best = Some((step, var, row)),
                    Some((s, v, _)) => {
                        if step < s - 1e-12 || (step <= s + 1e-12 && var < v) {
                            best = Some((step, var, row));
                        }
                    }
                }
            };
            if self.upper[j].is_finite() {
                consider(self.upper[j], j, None);
            }
            for i in 0..self.rows {
                let alpha = self.at(i, j) * dir;
                let b = self.basis[i];
                if alpha > piv_tol {
                    consider(self.x[b] / alpha, b, Some(i));
                } else if alpha < -piv_tol && self.upper[b].is_finite() {
                    consider((self.upper[b] - self.x[b]) / -alpha, b, Some(i));
                }
            }
            let Some((step, _, row)) = best else {
                return Err(LpError::Unbounded);
            };

            self.x[j] += dir * step;
            for i in 0..self.rows {
                let b = self.basis[i];
                self.x[b] -= self.at(i, j) * dir * step;
            }
            match row {
                None => {
                    self.state[j] = match self.state[j] {
                        VarState::AtLower => VarState::AtUpper,
                        _ => VarState::AtLower,
                    };
                    self.x[j] = if self.state[j] == VarState::AtUpper { self.upper[j] } else { 0.0 };
                }
                Some(r) => {
                    let leaving = self.basis[r];
                    let alpha = self.at(r, j) * dir;
                    if alpha > 0.0 {
                        self.state[leaving] = VarState::AtLower;
                        self.x[leaving] = 0.0;
                    } else {
                        self.state[leaving] = VarState::AtUpper;
                        self.x[leaving] = self.upper[leaving];
                    }
                    self.pivot(r, j);
                    self.basis[r] = j;
                    self.state[j] = VarState::Basic;
                }
            }
        }
    }
}

impl LpSolver for BoundedSimplex {
    fn solve(&self, lp: &LinearProgram, tolerance: f64) -> Result<LpSolution, LpError> {
        lp.check()?;
        let n = lp.var_count();
        let m = lp.equalities.rows();
        if lp.upper.iter().any(|u| !u.is_finite()) {
            return Err(LpError::Unbounded);
        }
        let cols = n + m;
        let mut t = vec![0.0; m * cols];
        let mut x = vec![0.0; cols];
        for i in 0..m {
            let sign = if lp.rhs[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[i * cols + j] = sign * lp.equalities.get(i, j);
            }
            t[i * cols + n + i] = 1.0;
            x[n + i] = sign * lp.rhs[i];
        }
        let mut upper = lp.upper.clone();
        upper.extend(std::iter::repeat_n(f64::INFINITY, m));
        let mut state = vec![VarState::AtLower; cols];
        for s in state.iter_mut().skip(n) {
            *s = VarState::Basic;
        }
        let mut tab = Tableau {
            rows: m,
            cols,
            t,
            basis: (n..cols).collect(),
            state,
            x,
            upper,
            frozen: vec![false; cols],
            iterations: 0,
        };

        // Phase 1: drive artificials to zero.
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(n) {
            *c = 1.0;
        }
        tab.optimize(&phase1, tolerance, self.max_iterations)?;
        let infeasibility: f64 = tab.x[n..].iter().sum();
        let b_norm: f64 = lp.rhs.iter().map(|b| b.abs()).sum();
        if infeasibility > tolerance * (1.0 + b_norm) * 10.0 {
            return Err(LpError::Infeasible);
        }

        // Pivot zero-level artificials out of the basis where possible;
        // any that remain mark redundant rows and are pinned at zero.
        for r in 0..m {
            if tab.basis[r] < n {
                continue;
            }
            if let Some(j) = (0..n).find(|&j| {
                tab.state[j] != VarState::Basic && tab.upper[j] > 0.0 && tab.at(r, j).abs() > 1e-9
            }) {
                let art = tab.basis[r];
                tab.pivot(r, j);
                tab.basis[r] = j;
                tab.state[j] = VarState::Basic;
                tab.state[art] = VarState::AtLower;
                tab.x[art] = 0.0;
            }
        }
        for j in n..cols {
            tab.frozen[j] = true;
            tab.upper[j] = 0.0;
        }

        let mut phase2 = lp.costs.clone();
        phase2.extend(std::iter::repeat_n(0.0, m));
        tab.optimize(&phase2, tolerance, self.max_iterations)?;

        let mut xs: Vec<f64> = tab.x[..n].to_vec();
        for (v, u) in xs.iter_mut().zip(&lp.upper) {
            if v.abs() <= tolerance {
                *v = 0.0;
            } else if (*v - u).abs() <= tolerance {
                *v = *u;
            }
            *v = v.clamp(0.0, *u);
        }
        let objective = lp.objective(&xs);
        Ok(LpSolution { x: xs, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(costs: &[f64], rows: &[Vec<f64>], rhs: &[f64], upper: &[f64]) -> LinearProgram {
        LinearProgram {
            costs: costs.to_vec(),
            equalities: Matrix::from_rows(rows),
            rhs: rhs.to_vec(),
            upper: upper.to_vec(),
        }
    }

    #[test]
    fn zero_demand_gives_zero() {
        let p = lp(&[1.0, 2.0], &[vec![1.0, -1.0]], &[0.0], &[5.0, 5.0]);
        let s = BoundedSimplex::default().solve(&p, 1e-9).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn picks_cheaper_until_bound() {
        // x1 + x2 = 8, x1 <= 5 cheaper.
        let p = lp(&[1.0, 3.0], &[vec![1.0, 1.0]], &[8.0], &[5.0, 10.0]);
        let s = BoundedSimplex::default().solve(&p, 1e-9).unwrap();
        assert_eq!(s.x, vec![5.0, 3.0]);
        assert!((s.objective - 14.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_is_reported() {
        let p = lp(&[1.0], &[vec![1.0]], &[4.0], &[3.0]);
        assert_eq!(BoundedSimplex::default().solve(&p, 1e-9), Err(LpError::Infeasible));
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // Two copies of the same constraint, written with opposite signs.
        let p = lp(
            &[2.0, 1.0],
            &[vec![-1.0, -1.0], vec![1.0, 1.0]],
            &[-4.0, 4.0],
            &[4.0, 3.0],
        );
        let s = BoundedSimplex::default().solve(&p, 1e-9).unwrap();
        assert_eq!(s.x, vec![1.0, 3.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let p = lp(&[1.0, 1.0], &[vec![1.0, 1.0]], &[1.0], &[1.0]);
        assert!(matches!(BoundedSimplex::default().solve(&p, 1e-9), Err(LpError::Dimension(_))));
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        // Two equally cheap routes; Bland keeps the first.
        let p = lp(&[1.0, 1.0], &[vec![1.0, 1.0]], &[2.0], &[5.0, 5.0]);
        let s = BoundedSimplex::default().solve(&p, 1e-9).unwrap();
        assert_eq!(s.x, vec![2.0, 0.0]);
    }
}
