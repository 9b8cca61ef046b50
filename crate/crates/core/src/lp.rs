//! Dense two-phase simplex method.
//!
//! Solves `maximize cᵀx` subject to rows `aᵢᵀx (≤|≥|=) bᵢ` and `x ≥ 0`.
//! Pricing is Dantzig's rule; after a run of degenerate pivots it falls back
//! to Bland's rule, which cannot cycle. Dual values are read off the final
//! tableau through the columns of the initial basis.
//!
//! Problems here are small (at most a few hundred columns) so a dense
//! tableau is the right tool.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    cmp: Cmp,
    rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Sensitivity of the optimal value to each right-hand side, in row
    /// order: non-negative for `≤` rows, non-positive for `≥` rows.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

impl LinearProgram {
    /// A maximization problem over `objective.len()` non-negative variables.
    pub fn maximize(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.objective.len(), "row length");
        self.rows.push(Row { coeffs, cmp, rhs });
        self
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self)?.run(self)
    }
}

struct Tableau {
    m: usize,
    n: usize,
    width: usize,
    // row-major, `width + 1` columns with rhs last
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    init_col: Vec<usize>,
    flipped: Vec<bool>,
    artificial: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Self> {
        let n = lp.objective.len();
        let m = lp.rows.len();
        if lp.objective.iter().any(|c| !c.is_finite())
            || lp
                .rows
                .iter()
                .any(|r| !r.rhs.is_finite() || r.coeffs.iter().any(|a| !a.is_finite()))
        {
            return Err(Error::InvalidInput("non-finite LP data".into()));
        }

        let mut rows: Vec<Row> = lp.rows.clone();
        let mut flipped = vec![false; m];
        for (i, r) in rows.iter_mut().enumerate() {
            if r.rhs < 0.0 {
                r.rhs = -r.rhs;
                r.coeffs.iter_mut().for_each(|a| *a = -*a);
                r.cmp = match r.cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                flipped[i] = true;
            }
        }

        let extra: usize = rows
            .iter()
            .map(|r| match r.cmp {
                Cmp::Le | Cmp::Eq => 1,
                Cmp::Ge => 2,
            })
            .sum();
        let width = n + extra;
        let stride = width + 1;
        let mut t = vec![0.0; m * stride];
        let mut artificial = vec![false; width];
        let mut basis = vec![0; m];
        let mut init_col = vec![0; m];
        let mut next = n;
        for (i, r) in rows.iter().enumerate() {
            let row = &mut t[i * stride..(i + 1) * stride];
            row[..n].copy_from_slice(&r.coeffs);
            row[width] = r.rhs;
            match r.cmp {
                Cmp::Le => {
                    row[next] = 1.0;
                    basis[i] = next;
                    init_col[i] = next;
                    next += 1;
                }
                Cmp::Ge => {
                    row[next] = -1.0;
                    row[next + 1] = 1.0;
                    artificial[next + 1] = true;
                    basis[i] = next + 1;
                    init_col[i] = next + 1;
                    next += 2;
                }
                Cmp::Eq => {
                    row[next] = 1.0;
                    artificial[next] = true;
                    basis[i] = next;
                    init_col[i] = next;
                    next += 1;
                }
            }
        }

        Ok(Self {
            m,
            n,
            width,
            t,
            obj: vec![0.0; stride],
            basis,
            init_col,
            flipped,
            artificial,
            pivots: 0,
        })
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.width + 1) + c]
    }

    fn price(&mut self, cost: &[f64]) {
        let stride = self.width + 1;
        for c in 0..stride {
            let mut z = 0.0;
            for r in 0..self.m {
                z += cost[self.basis[r]] * self.t[r * stride + c];
            }
            self.obj[c] = if c < self.width { z - cost[c] } else { z };
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let stride = self.width + 1;
        let p = self.t[pr * stride + pc];
        for c in 0..stride {
            self.t[pr * stride + c] /= p;
        }
        let pivot_row: Vec<f64> = self.t[pr * stride..(pr + 1) * stride].to_vec();
        for r in 0..self.m {
            if r == pr {
                continue;
            }
            let f = self.t[r * stride + pc];
            if f != 0.0 {
                let row = &mut self.t[r * stride..(r + 1) * stride];
                for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pv;
                }
                row[pc] = 0.0;
            }
        }
        let f = self.obj[pc];
        if f != 0.0 {
            for (x, &pv) in self.obj.iter_mut().zip(&pivot_row) {
                *x -= f * pv;
            }
            self.obj[pc] = 0.0;
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Runs primal simplex on the current objective row. `allow` filters
    /// entering columns.
    fn optimize(&mut self, allow: &dyn Fn(usize) -> bool, limit: usize) -> Result<()> {
        let mut streak = 0;
        loop {
            if self.pivots > limit {
                return Err(Error::IterationLimit(format!("simplex exceeded {limit} pivots")));
            }
            let bland = streak >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = -COST_EPS;
            for c in 0..self.width {
                if !allow(c) {
                    continue;
                }
                let d = self.obj[c];
                if d < -COST_EPS {
                    if bland {
                        enter = Some(c);
                        break;
                    }
                    if d < best {
                        best = d;
                        enter = Some(c);
                    }
                }
            }
            let Some(pc) = enter else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, pc);
                if a > PIVOT_EPS {
                    let ratio = self.at(r, self.width) / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((pr, ratio)) = leave else {
                return Err(Error::Unbounded);
            };
            if ratio.abs() <= 1e-12 {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(pr, pc);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        let limit = 100 * (self.m + self.width) + 1000;
        let has_artificial = self.artificial.iter().any(|&a| a);
        if has_artificial {
            let cost: Vec<f64> = (0..self.width)
                .map(|c| if self.artificial[c] { -1.0 } else { 0.0 })
                .collect();
            self.price(&cost);
            self.optimize(&|_| true, limit)?;
            let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if self.obj[self.width] < -FEAS_EPS * scale {
                return Err(Error::Infeasible(format!(
                    "phase one residual {:e}",
                    -self.obj[self.width]
                )));
            }
            // drive zero-level artificials out of the basis where possible
            for r in 0..self.m {
                if self.artificial[self.basis[r]] {
                    if let Some(c) =
                        (0..self.width).find(|&c| !self.artificial[c] && self.at(r, c).abs() > 1e-9)
                    {
                        self.pivot(r, c);
                    }
                }
            }
        }

        let mut cost = vec![0.0; self.width];
        cost[..self.n].copy_from_slice(&lp.objective);
        self.price(&cost);
        let art = self.artificial.clone();
        self.optimize(&|c| !art[c], limit)?;

        let mut x = vec![0.0; self.n];
        for r in 0..self.m {
            if self.basis[r] < self.n {
                x[self.basis[r]] = self.at(r, self.width).max(0.0);
            }
        }
        let duals = (0..self.m)
            .map(|i| {
                let y = self.obj[self.init_col[i]];
                if self.flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            x,
            objective,
            duals,
            pivots: self.pivots,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36, duals (0, 1.5, 1)
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.constrain(vec![1.0, 0.0], Cmp::Le, 4.0)
            .constrain(vec![0.0, 2.0], Cmp::Le, 12.0)
            .constrain(vec![3.0, 2.0], Cmp::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        assert!(s.duals[0].abs() < 1e-9);
        assert!((s.duals[1] - 1.5).abs() < 1e-9);
        assert!((s.duals[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + y s.t. x + y = 1, x ≥ 0.25, y ≤ 0.5 → obj 1
        // min form: max −x: x ≥ 0.25 binding, dual −1
        let mut lp = LinearProgram::maximize(vec![-1.0, 0.0]);
        lp.constrain(vec![1.0, 1.0], Cmp::Eq, 1.0)
            .constrain(vec![1.0, 0.0], Cmp::Ge, 0.25)
            .constrain(vec![0.0, 1.0], Cmp::Le, 0.9);
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 0.25).abs() < 1e-9, "{:?}", s.x);
        assert!((s.objective + 0.25).abs() < 1e-9);
        // raising the ≥ bound lowers the objective one-for-one
        assert!((s.duals[1] + 1.0).abs() < 1e-9, "{:?}", s.duals);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // max x s.t. −x ≥ −3 (x ≤ 3)
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![-1.0], Cmp::Ge, -3.0);
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-12);
        // d obj / d rhs of (−x ≥ b) is −1
        assert!((s.duals[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![1.0], Cmp::Le, 1.0)
            .constrain(vec![1.0], Cmp::Ge, 2.0);
        assert!(matches!(lp.solve(), Err(Error::Infeasible(_))));

        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.constrain(vec![0.0, 1.0], Cmp::Le, 1.0);
        assert!(matches!(lp.solve(), Err(Error::Unbounded)));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance
        let mut lp = LinearProgram::maximize(vec![0.75, -150.0, 0.02, -6.0]);
        lp.constrain(vec![0.25, -60.0, -0.04, 9.0], Cmp::Le, 0.0)
            .constrain(vec![0.5, -90.0, -0.02, 3.0], Cmp::Le, 0.0)
            .constrain(vec![0.0, 0.0, 1.0, 0.0], Cmp::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 0.05).abs() < 1e-9, "{}", s.objective);
    }
}
