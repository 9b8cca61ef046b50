//! Bilinear saddle-point problems `max_{π∈Δ_A} min_{λ∈Λ} λᵀRπ` under a
//! posterior over `R`.
//!
//! Three dual sets cover the cases of interest: a singleton (a plain
//! bandit), the simplex (a zero-sum game) and
//! `{λ₁ = 1, λ ≥ 0, ‖λ‖₂ ≤ C}` (a bandit with constraint rows).
//!
//! The optimism map becomes
//!
//! ```text
//! G(π) = min_{λ∈Λ} Σ_j π_j (λᵀE[R_j] + B_{j,λ}(−log π_j))
//! ```
//!
//! where `B_{j,λ}` is the inverse rate of `λᵀR_j`. It is concave in `π` and
//! convex in `λ`, so its maximum equals `min_λ F(λ)` with
//! `F(λ) = max_π Σ_j π_j (...)`. For fixed `λ` the inner problem is a bandit
//! problem over column laws, solved exactly by the bandit machinery; `F` is
//! then minimized over `Λ` by accelerated projected gradient, using the
//! envelope gradient at the inner maximizer.

use crate::error::{check_len, Error, Result};
use crate::lp::{Cmp, LinearProgram};
use crate::matrix::Matrix;
use crate::optimism::{
    argmax, klearning_policy, mean_and_stderr, minimize_temperature, vbos_policy, vbos_unclamped,
    McEstimate,
    Membership, Policy, SolverConfig,
};
use crate::posteriors::{
    Belief, CellPosterior, GaussianPosterior, PosteriorMatrix, ScalarLaw, TwoPointPosterior,
};
use crate::rng::RngStream;

const GAME_GAP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum DualSet {
    Singleton(Vec<f64>),
    Simplex(usize),
    /// `{λ ∈ ℝ^m : λ₁ = 1, λ ≥ 0, ‖λ‖₂ ≤ bound}`.
    ConstrainedBandit { m: usize, bound: f64 },
}

impl DualSet {
    pub fn dim(&self) -> usize {
        match self {
            DualSet::Singleton(v) => v.len(),
            DualSet::Simplex(m) => *m,
            DualSet::ConstrainedBandit { m, .. } => *m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DualSet::Singleton(v) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput("singleton dual set needs a finite non-empty vector".into()));
                }
            }
            DualSet::Simplex(m) => {
                if *m == 0 {
                    return Err(Error::InvalidInput("simplex dual set needs m > 0".into()));
                }
            }
            DualSet::ConstrainedBandit { m, bound } => {
                if *m == 0 {
                    return Err(Error::InvalidInput("constrained dual set needs m > 0".into()));
                }
                if !(*bound >= 1.0) {
                    return Err(Error::Infeasible(format!(
                        "λ₁ = 1 forces ‖λ‖₂ ≥ 1 but the bound is {bound}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn radius(&self) -> f64 {
        match self {
            DualSet::ConstrainedBandit { bound, .. } => (bound * bound - 1.0).max(0.0).sqrt(),
            _ => 0.0,
        }
    }

    pub fn initial_point(&self) -> Vec<f64> {
        match self {
            DualSet::Singleton(v) => v.clone(),
            DualSet::Simplex(m) => vec![1.0 / *m as f64; *m],
            DualSet::ConstrainedBandit { m, .. } => {
                let mut v = vec![0.0; *m];
                v[0] = 1.0;
                v
            }
        }
    }

    pub fn contains(&self, lam: &[f64], tol: f64) -> bool {
        if lam.len() != self.dim() {
            return false;
        }
        match self {
            DualSet::Singleton(v) => v.iter().zip(lam).all(|(a, b)| (a - b).abs() <= tol),
            DualSet::Simplex(_) => {
                lam.iter().all(|&x| x >= -tol) && (lam.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            DualSet::ConstrainedBandit { bound, .. } => {
                (lam[0] - 1.0).abs() <= tol
                    && lam.iter().all(|&x| x >= -tol)
                    && lam.iter().map(|x| x * x).sum::<f64>().sqrt() <= bound + tol
            }
        }
    }
}

fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn project_unchecked(v: &[f64], set: &DualSet) -> Vec<f64> {
    match set {
        DualSet::Singleton(s) => s.clone(),
        DualSet::Simplex(_) => project_simplex(v),
        DualSet::ConstrainedBandit { .. } => {
            let rho = set.radius();
            let mut out: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
            out[0] = 1.0;
            let norm = out[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > rho {
                let s = if norm > 0.0 { rho / norm } else { 0.0 };
                out[1..].iter_mut().for_each(|x| *x *= s);
            }
            out
        }
    }
}

/// Euclidean projection onto the dual set.
pub fn project_dual(v: &[f64], set: &DualSet) -> Result<Vec<f64>> {
    set.validate()?;
    check_len(set.dim(), v.len())?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite point".into()));
    }
    Ok(project_unchecked(v, set))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleProblem {
    pub posteriors: PosteriorMatrix,
    pub dual_set: DualSet,
}

impl SaddleProblem {
    pub fn new(posteriors: PosteriorMatrix, dual_set: DualSet) -> Result<Self> {
        dual_set.validate()?;
        check_len(posteriors.rows(), dual_set.dim())?;
        Ok(Self {
            posteriors,
            dual_set,
        })
    }

    pub fn rows(&self) -> usize {
        self.posteriors.rows()
    }

    pub fn cols(&self) -> usize {
        self.posteriors.cols()
    }

    pub fn mean_matrix(&self) -> Matrix {
        Matrix::new(self.rows(), self.cols(), self.posteriors.mean_matrix())
            .expect("posterior matrix has positive dimensions")
    }

    pub fn sample_matrix(&self, rng: &mut RngStream) -> Matrix {
        Matrix::new(self.rows(), self.cols(), self.posteriors.sample(rng))
            .expect("posterior matrix has positive dimensions")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub pi: Policy,
    pub lam: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

// ---------------------------------------------------------------------------
// exact games

/// Solves `max_π min_{λ∈Λ} λᵀRπ` for a known matrix.
pub fn game_value_exact(payoff: &Matrix, dual_set: &DualSet) -> Result<SaddleSolution> {
    dual_set.validate()?;
    check_len(dual_set.dim(), payoff.rows())?;
    if !payoff.is_finite() {
        return Err(Error::InvalidInput("payoff has non-finite entries".into()));
    }
    match dual_set {
        DualSet::Singleton(lam) => Ok(singleton_game(payoff, lam)),
        DualSet::Simplex(1) => Ok(singleton_game(payoff, &[1.0])),
        DualSet::Simplex(_) => matrix_game(payoff),
        DualSet::ConstrainedBandit { .. } if payoff.rows() == 1 => Ok(singleton_game(payoff, &[1.0])),
        DualSet::ConstrainedBandit { bound, .. } => constrained_game(payoff, *bound),
    }
}

/// `min_{λ∈Λ} λᵀRπ`, the payoff a policy guarantees against the dual set.
pub fn guaranteed_value(payoff: &Matrix, pi: &Policy, dual_set: &DualSet) -> Result<f64> {
    dual_set.validate()?;
    check_len(dual_set.dim(), payoff.rows())?;
    check_len(payoff.cols(), pi.len())?;
    let x = payoff.mul_vec(pi.probs());
    Ok(match dual_set {
        DualSet::Singleton(lam) => lam.iter().zip(&x).map(|(l, v)| l * v).sum(),
        DualSet::Simplex(_) => x.iter().copied().fold(f64::INFINITY, f64::min),
        DualSet::ConstrainedBandit { .. } => {
            ConstrainedGame {
                payoff,
                rho: dual_set.radius(),
            }
            .lower(pi.probs())
            .0
        }
    })
}

fn singleton_game(payoff: &Matrix, lam: &[f64]) -> SaddleSolution {
    let scores = payoff.left_mul(lam);
    let j = argmax(&scores);
    SaddleSolution {
        pi: Policy::point_mass(payoff.cols(), j),
        lam: lam.to_vec(),
        value: scores[j],
        converged: true,
        iterations: 0,
    }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let w: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter().map(|x| x / s).collect()
    } else {
        vec![1.0 / v.len() as f64; v.len()]
    }
}

fn matrix_game(payoff: &Matrix) -> Result<SaddleSolution> {
    let (m, a) = (payoff.rows(), payoff.cols());
    let lo = payoff.data().iter().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lo;
    let mut obj = vec![0.0; a + 1];
    obj[a] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    for i in 0..m {
        let mut row: Vec<f64> = payoff.row(i).iter().map(|x| -(x + shift)).collect();
        row.push(1.0);
        lp.constrain(row, Cmp::Le, 0.0);
    }
    let mut simplex_row = vec![1.0; a + 1];
    simplex_row[a] = 0.0;
    lp.constrain(simplex_row, Cmp::Eq, 1.0);
    let sol = lp.solve()?;
    let pi = Policy::new(normalized(&sol.x[..a]))?;
    let lam = normalized(&sol.duals[..m]);
    let lower = payoff
        .mul_vec(pi.probs())
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let upper = payoff.left_mul(&lam).into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(SaddleSolution {
        pi,
        lam,
        value: lower,
        converged: upper - lower <= GAME_GAP,
        iterations: sol.pivots,
    })
}

struct ConstrainedGame<'a> {
    payoff: &'a Matrix,
    rho: f64,
}

impl ConstrainedGame<'_> {
    /// `min_{λ∈Λ} λᵀRπ` and its minimizer.
    fn lower(&self, pi: &[f64]) -> (f64, Vec<f64>) {
        let x = self.payoff.mul_vec(pi);
        let neg: Vec<f64> = x[1..].iter().map(|v| (-v).max(0.0)).collect();
        let norm = neg.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut lam = vec![0.0; x.len()];
        lam[0] = 1.0;
        if norm > 0.0 {
            for (l, n) in lam[1..].iter_mut().zip(&neg) {
                *l = self.rho * n / norm;
            }
        }
        (x[0] - self.rho * norm, lam)
    }

    fn upper(&self, lam: &[f64]) -> f64 {
        self.payoff
            .left_mul(lam)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The constrained game `min_{λ∈Λ} max_j (λᵀR)_j`, with the ball
/// `‖λ₂..ₘ‖₂ ≤ ρ = √(C² − 1)` replaced by tangent half-spaces added on
/// demand, is a linear program. Each round solves the relaxation, and if
/// the dual point leaves the ball, cuts it off at its radial projection.
/// The relaxed value bounds the game from below through the LP's column
/// multipliers (a policy), and the projected dual bounds it from above.
fn constrained_game(payoff: &Matrix, bound: f64) -> Result<SaddleSolution> {
    let (m, a) = (payoff.rows(), payoff.cols());
    let set = DualSet::ConstrainedBandit { m, bound };
    let rho = set.radius();
    let game = ConstrainedGame { payoff, rho };
    let tol = 1e-9 * (1.0 + payoff.max_abs());
    let k = m - 1;
    // objective shift keeping the epigraph variable non-negative
    let big = (1.0 + rho * (k as f64).sqrt()) * payoff.max_abs() + 1.0;
    let mut cuts: Vec<Vec<f64>> = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut upper = f64::INFINITY;
    let mut best_lam = set.initial_point();
    let max_rounds = 5_000;
    let mut rounds = 0;
    let mut converged = false;
    while rounds < max_rounds {
        rounds += 1;
        // variables: λ₂..λₘ, then v' = v + big; maximize −v'
        let mut obj = vec![0.0; k + 1];
        obj[k] = -1.0;
        let mut lp = LinearProgram::maximize(obj);
        for j in 0..a {
            let mut row: Vec<f64> = (1..m).map(|i| payoff.get(i, j)).collect();
            row.push(-1.0);
            lp.constrain(row, Cmp::Le, -payoff.get(0, j) - big);
        }
        let mut l1 = vec![1.0; k + 1];
        l1[k] = 0.0;
        lp.constrain(l1, Cmp::Le, rho * (k as f64).sqrt());
        for u in &cuts {
            let mut row = u.clone();
            row.push(0.0);
            lp.constrain(row, Cmp::Le, rho);
        }
        let sol = lp.solve()?;
        let lower_relaxed = sol.x[k] - big;
        let pi = normalized(&sol.duals[..a]);
        let (lb, _) = game.lower(&pi);
        if best.as_ref().is_none_or(|(v, _)| lb > *v) {
            best = Some((lb, pi));
        }
        let mut lam = vec![1.0];
        lam.extend_from_slice(&sol.x[..k]);
        let proj = project_unchecked(&lam, &set);
        let ub = game.upper(&proj);
        if ub < upper {
            upper = ub;
            best_lam = proj;
        }
        let best_lb = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.0);
        if upper - best_lb <= tol {
            converged = true;
            break;
        }
        let norm = sol.x[..k].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= rho * (1.0 + 1e-12) || upper - lower_relaxed <= tol {
            // relaxation is tight; the remaining gap is in the policy
            converged = upper - best_lb <= 1e2 * tol;
            break;
        }
        cuts.push(sol.x[..k].iter().map(|v| v / norm).collect());
    }
    let (value, pi) = best.expect("at least one relaxation solved");
    Ok(SaddleSolution {
        pi: Policy::new(pi)?,
        lam: best_lam,
        value,
        converged,
        iterations: rounds,
    })
}

// ---------------------------------------------------------------------------
// posterior machinery

/// Evaluates `G(π, λ) = Σ_j π_j (λᵀE[R_j] + w·B_{j,λ}(−log π_j))` and its
/// `λ`-gradient.
struct ColumnModel<'a> {
    post: &'a PosteriorMatrix,
    means: Vec<f64>,
    vars: Option<Vec<f64>>,
    weight: f64,
}

impl<'a> ColumnModel<'a> {
    fn new(post: &'a PosteriorMatrix, weight: f64) -> Self {
        Self {
            post,
            means: post.mean_matrix(),
            vars: post.variance_matrix(),
            weight,
        }
    }

    fn rows(&self) -> usize {
        self.post.rows()
    }

    fn cols(&self) -> usize {
        self.post.cols()
    }

    fn column_means(&self, lam: &[f64]) -> Vec<f64> {
        let a = self.cols();
        let mut out = vec![0.0; a];
        for (i, &l) in lam.iter().enumerate() {
            if l != 0.0 {
                for (o, &mu) in out.iter_mut().zip(&self.means[i * a..(i + 1) * a]) {
                    *o += l * mu;
                }
            }
        }
        out
    }

    fn column_vars(&self, vars: &[f64], lam: &[f64]) -> Vec<f64> {
        let a = self.cols();
        let mut out = vec![0.0; a];
        for (i, &l) in lam.iter().enumerate() {
            if l != 0.0 {
                for (o, &v) in out.iter_mut().zip(&vars[i * a..(i + 1) * a]) {
                    *o += l * l * v;
                }
            }
        }
        out
    }

    fn laws(&self, lam: &[f64]) -> Vec<ScalarLaw> {
        match &self.vars {
            Some(vars) => {
                let cm = self.column_means(lam);
                let cv = self.column_vars(vars, lam);
                cm.into_iter()
                    .zip(cv)
                    .map(|(m, v)| ScalarLaw::gaussian(m, v))
                    .collect()
            }
            None => (0..self.cols()).map(|j| self.post.column_law(j, lam)).collect(),
        }
    }

    fn value_grad(&self, pi: &[f64], lam: &[f64]) -> (f64, Vec<f64>) {
        let (m, a) = (self.rows(), self.cols());
        let w = self.weight;
        let cm = self.column_means(lam);
        let mut value = 0.0;
        let mut grad = vec![0.0; m];
        for i in 0..m {
            grad[i] = (0..a).map(|j| pi[j] * self.means[i * a + j]).sum();
        }
        match &self.vars {
            Some(vars) => {
                let cv = self.column_vars(vars, lam);
                for j in 0..a {
                    let p = pi[j];
                    if p <= 0.0 {
                        continue;
                    }
                    let y = (-p.ln()).max(0.0);
                    let sd = cv[j].sqrt();
                    let root = (2.0 * y).sqrt();
                    value += p * (cm[j] + w * root * sd);
                    if sd > 0.0 {
                        for i in 0..m {
                            grad[i] += p * w * root * lam[i] * vars[i * a + j] / sd;
                        }
                    }
                }
            }
            None => {
                for j in 0..a {
                    let p = pi[j];
                    if p <= 0.0 {
                        continue;
                    }
                    let y = (-p.ln()).max(0.0);
                    let rb = self.post.column_law(j, lam).rate_bonus(y);
                    value += p * (cm[j] + w * rb.radius);
                    for i in 0..m {
                        let cell = self.post.get(i, j);
                        let beta = if rb.tau == 0.0 {
                            if lam[i] >= 0.0 {
                                f64::INFINITY
                            } else {
                                f64::NEG_INFINITY
                            }
                        } else if rb.tau.is_infinite() || lam[i] == 0.0 {
                            0.0
                        } else {
                            lam[i] / rb.tau
                        };
                        let slope = match cell {
                            CellPosterior::Gaussian(_) if !beta.is_finite() => 0.0,
                            _ => cell.cgf_derivative(beta),
                        };
                        grad[i] += p * w * slope;
                    }
                }
            }
        }
        (value, grad)
    }
}

struct FistaOutcome {
    x: Vec<f64>,
    f: f64,
    converged: bool,
    iterations: usize,
}

/// Accelerated projected gradient with backtracking and adaptive restart.
///
/// Stops when the gradient mapping falls below `tol`. When function values
/// stop improving before that (the oracle's own rounding floor), it stops
/// early and reports convergence if the gradient mapping is within
/// `STALL_FACTOR · tol`.
fn fista(
    mut oracle: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    set: &DualSet,
    x0: Vec<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<FistaOutcome> {
    const STALL_FACTOR: f64 = 1e3;
    const STALL_RUN: usize = 25;
    let mut x = project_unchecked(&x0, set);
    let (mut fx, gx) = oracle(&x)?;
    let (mut y, mut fy, mut gy) = (x.clone(), fx, gx);
    let mut at_incumbent = true;
    let mut t = 1.0_f64;
    let mut lip = 1.0_f64;
    let mut stalled = 0;
    let mut k = 0;
    let done = |x, f, gm: f64, k, strict: bool| {
        Ok(FistaOutcome {
            x,
            f,
            converged: if strict { gm <= tol } else { gm <= STALL_FACTOR * tol },
            iterations: k,
        })
    };
    while k < max_iters {
        k += 1;
        let (z, fz, gz, step_norm) = loop {
            let trial: Vec<f64> = y.iter().zip(&gy).map(|(yi, gi)| yi - gi / lip).collect();
            let z = project_unchecked(&trial, set);
            let d: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
            let dn2: f64 = d.iter().map(|v| v * v).sum();
            let (fz, gz) = oracle(&z)?;
            let model = fy + gy.iter().zip(&d).map(|(g, v)| g * v).sum::<f64>() + 0.5 * lip * dn2;
            if fz <= model + 1e-14 * (1.0 + fy.abs()) || lip > 1e30 {
                break (z, fz, gz, dn2.sqrt());
            }
            lip *= 2.0;
        };
        let gm = lip * step_norm;
        let noise = 1e-14 * (1.0 + fx.abs());
        if gm <= tol || step_norm == 0.0 {
            return if fz <= fx { done(z, fz, gm, k, true) } else { done(x, fx, gm, k, true) };
        }
        if fz > fx + noise {
            if at_incumbent {
                return done(x, fx, gm, k, false);
            }
            t = 1.0;
            y = x.clone();
            let (f0, g0) = oracle(&y)?;
            fy = f0;
            gy = g0;
            at_incumbent = true;
            continue;
        }
        stalled = if fx - fz <= noise { stalled + 1 } else { 0 };
        if stalled >= STALL_RUN {
            return done(z, fz.min(fx), gm, k, false);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        let ext: Vec<f64> = z
            .iter()
            .zip(&x)
            .map(|(zi, xi)| zi + beta * (zi - xi))
            .collect();
        x = z;
        fx = fz;
        t = t_next;
        if beta == 0.0 {
            y = x.clone();
            fy = fz;
            gy = gz;
            at_incumbent = true;
        } else {
            y = project_unchecked(&ext, set);
            let (f1, g1) = oracle(&y)?;
            fy = f1;
            gy = g1;
            at_incumbent = false;
        }
        lip *= 0.9;
    }
    Ok(FistaOutcome {
        x,
        f: fx,
        converged: false,
        iterations: k,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualEvaluation {
    pub value: f64,
    /// The minimizing dual point.
    pub lam: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// `G(π) = min_{λ∈Λ} Σ_j π_j (λᵀE[R_j] + B_{j,λ}(−log π_j))`.
pub fn saddle_optimism_map(
    problem: &SaddleProblem,
    pi: &Policy,
    cfg: &SolverConfig,
) -> Result<DualEvaluation> {
    saddle_map_weighted(problem, pi, cfg, 1.0, None)
}

fn saddle_map_weighted(
    problem: &SaddleProblem,
    pi: &Policy,
    cfg: &SolverConfig,
    weight: f64,
    warm: Option<&[f64]>,
) -> Result<DualEvaluation> {
    check_len(problem.cols(), pi.len())?;
    let model = ColumnModel::new(&problem.posteriors, weight);
    if let DualSet::Singleton(lam) = &problem.dual_set {
        let (value, _) = model.value_grad(pi.probs(), lam);
        return Ok(DualEvaluation {
            value,
            lam: lam.clone(),
            converged: true,
            iterations: 0,
        });
    }
    let start = warm.map_or_else(|| problem.dual_set.initial_point(), |w| w.to_vec());
    let out = fista(
        |lam| Ok(model.value_grad(pi.probs(), lam)),
        &problem.dual_set,
        start,
        cfg.tolerance,
        cfg.max_iters,
    )?;
    Ok(DualEvaluation {
        value: out.f,
        lam: out.x,
        converged: out.converged,
        iterations: out.iterations,
    })
}

/// The VBOS policy for a saddle problem, `argmax_π G(π)`.
pub fn saddle_vbos(problem: &SaddleProblem, cfg: &SolverConfig) -> Result<SaddleSolution> {
    saddle_vbos_warm(problem, cfg, None)
}

/// As [`saddle_vbos`], starting the dual search from `warm` (for example
/// the previous round's solution).
pub fn saddle_vbos_warm(
    problem: &SaddleProblem,
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<SaddleSolution> {
    cfg.validate(problem.cols())?;
    let model = ColumnModel::new(&problem.posteriors, cfg.explore_weight);
    if let DualSet::Singleton(lam) = &problem.dual_set {
        let s = vbos_policy(&model.laws(lam), cfg)?;
        return Ok(SaddleSolution {
            pi: s.policy,
            lam: lam.clone(),
            value: s.value,
            converged: s.converged,
            iterations: s.iterations,
        });
    }
    if problem.posteriors.all_degenerate() || cfg.explore_weight == 0.0 && problem.posteriors.all_gaussian() {
        return game_value_exact(&problem.mean_matrix(), &problem.dual_set);
    }
    let mut inner_ok = true;
    let start = warm.map_or_else(|| problem.dual_set.initial_point(), |w| w.to_vec());
    let out = fista(
        |lam| {
            let (p, ok, _) = vbos_unclamped(&model.laws(lam), cfg);
            inner_ok &= ok;
            Ok(model.value_grad(&p, lam))
        },
        &problem.dual_set,
        start,
        cfg.tolerance,
        cfg.max_iters,
    )?;
    let s = vbos_policy(&model.laws(&out.x), cfg)?;
    Ok(SaddleSolution {
        value: model.value_grad(s.policy.probs(), &out.x).0,
        pi: s.policy,
        lam: out.x,
        converged: out.converged && s.converged && inner_ok,
        iterations: out.iterations,
    })
}

/// K-learning for saddle problems: the equal-temperature restriction,
/// `min_{λ∈Λ} min_τ τ log Σ_j exp(λᵀE[R_j]/τ + Ψ_j(λ/τ))`, playing the
/// softmax at the optimum.
pub fn saddle_klearning(
    problem: &SaddleProblem,
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<SaddleSolution> {
    cfg.validate(problem.cols())?;
    let model = ColumnModel::new(&problem.posteriors, 1.0);
    if let DualSet::Singleton(lam) = &problem.dual_set {
        let k = klearning_policy(&model.laws(lam), cfg)?;
        return Ok(SaddleSolution {
            pi: k.policy,
            lam: lam.clone(),
            value: k.objective,
            converged: true,
            iterations: 0,
        });
    }
    if problem.posteriors.all_degenerate() {
        return game_value_exact(&problem.mean_matrix(), &problem.dual_set);
    }
    let eval = |lam: &[f64]| -> (f64, Vec<f64>, Vec<f64>) {
        let cm = model.column_means(lam);
        let (m, a) = (model.rows(), model.cols());
        let cgf_at = |tau: f64| -> Vec<f64> {
            match &model.vars {
                Some(vars) => model
                    .column_vars(vars, lam)
                    .into_iter()
                    .map(|v| 0.5 * v / (tau * tau))
                    .collect(),
                None => (0..a)
                    .map(|j| {
                        model
                            .post
                            .column(j)
                            .zip(lam)
                            .map(|(c, &l)| c.cgf(l / tau))
                            .sum()
                    })
                    .collect(),
            }
        };
        let logits = |tau: f64| -> Vec<f64> {
            cm.iter()
                .zip(cgf_at(tau))
                .map(|(mu, psi)| mu / tau + psi)
                .collect()
        };
        let lse = |z: &[f64]| {
            let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            zmax + z.iter().map(|x| (x - zmax).exp()).sum::<f64>().ln()
        };
        let tau = minimize_temperature(|tau| tau * lse(&logits(tau)));
        let z = logits(tau);
        let l = lse(&z);
        let p: Vec<f64> = z.iter().map(|x| (x - l).exp()).collect();
        let mut grad = vec![0.0; m];
        for (i, g) in grad.iter_mut().enumerate() {
            for j in 0..a {
                let cell = model.post.get(i, j);
                *g += p[j] * (model.means[i * a + j] + cell.cgf_derivative(lam[i] / tau));
            }
        }
        (tau * l, grad, p)
    };
    let start = warm.map_or_else(|| problem.dual_set.initial_point(), |w| w.to_vec());
    let out = fista(
        |lam| {
            let (f, g, _) = eval(lam);
            Ok((f, g))
        },
        &problem.dual_set,
        start,
        cfg.tolerance,
        cfg.max_iters,
    )?;
    let (value, _, p) = eval(&out.x);
    Ok(SaddleSolution {
        pi: Policy::from_weights(p)?,
        lam: out.x,
        value,
        converged: out.converged,
        iterations: out.iterations,
    })
}

/// Optimality evidence for a saddle VBOS solution through the dual
/// exponential-cone program
/// `min V + Σ_j τ_j exp(s_j/τ_j)` with `s_j = a_j − V − τ_j`,
/// `a_j = λᵀE[R_j] + τ_jΨ_{j,λ}(1/τ_j)`, from which the policy is recovered
/// as `π_j = exp(s_j/τ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleCertificate {
    /// `G(π)`, a lower bound on the maximum.
    pub primal_value: f64,
    /// Cone-program objective, an upper bound on the maximum.
    pub dual_objective: f64,
    pub gap: f64,
    pub v: f64,
    pub tau: Vec<f64>,
    pub s: Vec<f64>,
    /// `max_j |π_j − exp(s_j/τ_j)|` over arms with positive temperature.
    pub recovery_error: f64,
}

pub fn certify(
    problem: &SaddleProblem,
    solution: &SaddleSolution,
    cfg: &SolverConfig,
) -> Result<SaddleCertificate> {
    let w = cfg.explore_weight;
    let primal = saddle_map_weighted(problem, &solution.pi, cfg, w, Some(&solution.lam))?;
    let model = ColumnModel::new(&problem.posteriors, w);
    let lam = project_unchecked(&solution.lam, &problem.dual_set);
    let laws = model.laws(&lam);
    let pi = solution.pi.probs();
    let a = pi.len();

    let mut tau = vec![0.0; a];
    let mut acoef = vec![0.0; a];
    let mut floor_v = f64::NEG_INFINITY;
    for j in 0..a {
        let y = (-pi[j].ln()).max(0.0);
        let rb = laws[j].rate_bonus(y);
        if rb.tau == 0.0 {
            floor_v = floor_v.max(laws[j].mean() + w * rb.radius);
            tau[j] = 0.0;
        } else if rb.tau.is_infinite() {
            tau[j] = f64::INFINITY;
        } else {
            tau[j] = w * rb.tau;
            acoef[j] = laws[j].mean() + w * rb.tau * laws[j].cgf(1.0 / rb.tau);
        }
    }
    if tau.iter().any(|t| t.is_infinite()) || w == 0.0 {
        return Ok(SaddleCertificate {
            primal_value: primal.value,
            dual_objective: solution.value,
            gap: solution.value - primal.value,
            v: solution.value,
            tau,
            s: vec![0.0; a],
            recovery_error: 0.0,
        });
    }
    let mass = |v: f64| -> f64 {
        (0..a)
            .filter(|&j| tau[j] > 0.0)
            .map(|j| ((acoef[j] - v) / tau[j] - 1.0).min(700.0).exp())
            .sum()
    };
    let v = if floor_v.is_finite() && mass(floor_v) <= 1.0 {
        floor_v
    } else {
        let amax = (0..a)
            .filter(|&j| tau[j] > 0.0)
            .map(|j| acoef[j])
            .fold(f64::NEG_INFINITY, f64::max);
        let tmax = tau.iter().copied().fold(0.0, f64::max);
        let mut hi = amax + tmax;
        let mut step = tmax.max(1e-12);
        while mass(hi) > 1.0 {
            hi += step;
            step *= 2.0;
        }
        let mut lo = if floor_v.is_finite() { floor_v } else { amax - tmax };
        let mut step = tmax.max(1e-12);
        while mass(lo) < 1.0 {
            lo -= step;
            step *= 2.0;
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if mass(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut dual = v;
    let mut s = vec![0.0; a];
    let mut recovery_error: f64 = 0.0;
    for j in 0..a {
        if tau[j] > 0.0 {
            s[j] = acoef[j] - v - tau[j];
            let rec = (s[j] / tau[j]).exp();
            dual += tau[j] * rec;
            recovery_error = recovery_error.max((rec - pi[j]).abs());
        }
    }
    Ok(SaddleCertificate {
        primal_value: primal.value,
        dual_objective: dual,
        gap: dual - primal.value,
        v,
        tau,
        s,
        recovery_error,
    })
}

/// Estimate of `E V*_{R,Λ}` under the posterior. Posteriors whose only
/// randomness is a handful of two-point cells are enumerated exactly (zero
/// standard error); otherwise `n_samples` sampled games are solved.
pub fn expected_value_mc(
    problem: &SaddleProblem,
    rng: &mut RngStream,
    n_samples: usize,
) -> Result<McEstimate> {
    let post = &problem.posteriors;
    let random: Vec<usize> = (0..post.cells().len())
        .filter(|&k| !post.cells()[k].is_degenerate())
        .collect();
    let enumerable = random.len() <= 16
        && random
            .iter()
            .all(|&k| matches!(post.cells()[k], CellPosterior::TwoPoint(_)));
    let (m, a) = (post.rows(), post.cols());
    if enumerable {
        let base = post.mean_matrix();
        let mut total = 0.0;
        for mask in 0u32..(1u32 << random.len()) {
            let mut data = base.clone();
            let mut prob = 1.0;
            for (bit, &k) in random.iter().enumerate() {
                let CellPosterior::TwoPoint(t) = post.cells()[k] else {
                    unreachable!()
                };
                let law = t.law();
                if mask >> bit & 1 == 1 {
                    data[k] = law.high;
                    prob *= law.p_high;
                } else {
                    data[k] = law.low;
                    prob *= 1.0 - law.p_high;
                }
            }
            if prob > 0.0 {
                total += prob * game_value_exact(&Matrix::new(m, a, data)?, &problem.dual_set)?.value;
            }
        }
        return Ok(McEstimate {
            estimate: total,
            std_error: 0.0,
        });
    }
    let mut values = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let r = problem.sample_matrix(rng);
        values.push(game_value_exact(&r, &problem.dual_set)?.value);
    }
    Ok(mean_and_stderr(values.into_iter()))
}

/// Statistical test of `E V* ≤ G(π)` at three standard errors.
pub fn in_saddle_optimistic_set(
    problem: &SaddleProblem,
    pi: &Policy,
    rng: &mut RngStream,
    cfg: &SolverConfig,
) -> Result<Membership> {
    let g = saddle_optimism_map(problem, pi, cfg)?.value;
    let e = expected_value_mc(problem, rng, cfg.mc_samples)?;
    Ok(Membership::from_margin(g - e.estimate, e.std_error))
}

/// The 2×2 game `R = [[r, 0], [0, −1]]` with `r = ±1` equally likely.
/// Thompson sampling plays `[1, 0]` or `[½, ½]` with probability ½ each;
/// only the first is in the optimistic set.
pub fn counter_example_problem() -> SaddleProblem {
    let r11 = TwoPointPosterior::symmetric_sign(1.0);
    counter_example_with(r11.into())
}

/// The same game with `r` given a standard Gaussian prior instead.
pub fn counter_example_gaussian_surrogate() -> SaddleProblem {
    counter_example_with(GaussianPosterior::standard(0.0).into())
}

fn counter_example_with(r11: CellPosterior) -> SaddleProblem {
    let cells = vec![
        r11,
        GaussianPosterior::point_mass(0.0).into(),
        GaussianPosterior::point_mass(0.0).into(),
        GaussianPosterior::point_mass(-1.0).into(),
    ];
    SaddleProblem::new(
        PosteriorMatrix::new(2, 2, cells).expect("2×2"),
        DualSet::Simplex(2),
    )
    .expect("consistent dimensions")
}

/// A realization of the counter-example game.
pub fn counter_example_payoff(r: f64) -> Matrix {
    Matrix::from_rows(&[vec![r, 0.0], vec![0.0, -1.0]]).expect("2×2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimism::{optimism_map, vbos_policy};

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn matching_pennies() {
        let r = Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let s = game_value_exact(&r, &DualSet::Simplex(2)).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!((s.pi.probs()[0] - 0.5).abs() < 1e-12);
        assert!((s.lam[0] - 0.5).abs() < 1e-12);
        assert!(s.converged);
    }

    #[test]
    fn counter_example_realization_game() {
        let s = game_value_exact(&counter_example_payoff(1.0), &DualSet::Simplex(2)).unwrap();
        assert_eq!(s.pi.probs(), &[1.0, 0.0]);
        assert!(s.value.abs() < 1e-12);
        let s = game_value_exact(&counter_example_payoff(-1.0), &DualSet::Simplex(2)).unwrap();
        assert!((s.pi.probs()[0] - 0.5).abs() < 1e-12);
        assert!((s.value + 0.5).abs() < 1e-12);
    }

    #[test]
    fn singleton_game_picks_lowest_argmax() {
        let r = Matrix::from_rows(&[vec![0.3, 0.9, 0.9]]).unwrap();
        let s = game_value_exact(&r, &DualSet::Singleton(vec![1.0])).unwrap();
        assert_eq!(s.pi.argmax(), 1);
        assert_eq!(s.value, 0.9);
    }

    #[test]
    fn non_finite_payoff_rejected() {
        let r = Matrix::from_rows(&[vec![f64::NAN, 0.0]]).unwrap();
        assert!(game_value_exact(&r, &DualSet::Simplex(1)).is_err());
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_dual(&[2.0, 0.0], &DualSet::Simplex(2)).unwrap(), vec![1.0, 0.0]);
        let cb = DualSet::ConstrainedBandit {
            m: 2,
            bound: 2f64.sqrt(),
        };
        let p = project_dual(&[5.0, 5.0], &cb).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-12);
        let inside = vec![1.0, 0.3];
        assert_eq!(project_dual(&inside, &cb).unwrap(), inside);
        let bad = DualSet::ConstrainedBandit { m: 2, bound: 0.5 };
        assert!(matches!(project_dual(&[1.0, 0.0], &bad), Err(Error::Infeasible(_))));
    }

    #[test]
    fn counter_example_values() {
        let p = counter_example_problem();
        let g = saddle_optimism_map(&p, &Policy::uniform(2), &cfg()).unwrap();
        assert!((g.value + 0.5).abs() < 1e-9, "{g:?}");
        let g = saddle_optimism_map(&p, &Policy::point_mass(2, 0), &cfg()).unwrap();
        assert!(g.value >= -0.25);
        let mut rng = RngStream::new(0);
        let e = expected_value_mc(&p, &mut rng, 100).unwrap();
        assert!((e.estimate + 0.25).abs() < 1e-12);
        let s = saddle_vbos(&p, &cfg()).unwrap();
        assert!(s.pi.probs()[0] >= 1.0 - 1e-6, "{s:?}");
    }

    #[test]
    fn counter_example_membership() {
        let p = counter_example_problem();
        let mut rng = RngStream::new(1);
        let m = in_saddle_optimistic_set(&p, &Policy::uniform(2), &mut rng, &cfg()).unwrap();
        assert!(!m.member);
        assert!((m.margin + 0.25).abs() < 1e-9);
        let m = in_saddle_optimistic_set(&p, &Policy::point_mass(2, 0), &mut rng, &cfg()).unwrap();
        assert!(m.member);
    }

    #[test]
    fn singleton_reduces_to_bandit() {
        let arms = vec![
            GaussianPosterior::new(0.2, 1.0, 1.0).unwrap(),
            GaussianPosterior::new(-0.4, 0.3, 1.0).unwrap(),
            GaussianPosterior::new(0.0, 2.0, 1.0).unwrap(),
        ];
        let p = SaddleProblem::new(
            PosteriorMatrix::from_arms(&arms).unwrap(),
            DualSet::Singleton(vec![1.0]),
        )
        .unwrap();
        let pi = Policy::new(vec![0.5, 0.2, 0.3]).unwrap();
        let a = saddle_optimism_map(&p, &pi, &cfg()).unwrap().value;
        let b = optimism_map(&arms, &pi).unwrap().value;
        assert!((a - b).abs() < 1e-12);
        let s = saddle_vbos(&p, &cfg()).unwrap();
        let v = vbos_policy(&arms, &cfg()).unwrap();
        for (x, y) in s.pi.probs().iter().zip(v.policy.probs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_game_is_uniform_and_certified() {
        let post = PosteriorMatrix::filled(2, 2, GaussianPosterior::standard(0.0).into()).unwrap();
        let p = SaddleProblem::new(post, DualSet::Simplex(2)).unwrap();
        let s = saddle_vbos(&p, &cfg()).unwrap();
        assert!((s.pi.probs()[0] - 0.5).abs() < 1e-6, "{s:?}");
        let c = certify(&p, &s, &cfg()).unwrap();
        assert!(c.gap.abs() <= 1e-6, "{c:?}");
        assert!(c.recovery_error <= 1e-6, "{c:?}");
    }

    #[test]
    fn constrained_exact_penalty_path() {
        // objective prefers column 0 but the single constraint needs column 1
        let r = Matrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 1.0]]).unwrap();
        let s = game_value_exact(&r, &DualSet::ConstrainedBandit { m: 2, bound: 10.0 }).unwrap();
        assert!((s.pi.probs()[0] - 0.5).abs() < 1e-9);
        assert!((s.value - 0.5).abs() < 1e-9);
        assert!(s.converged);
    }

    #[test]
    fn constrained_cutting_plane_path() {
        // bound too tight for the LP multiplier (which is 1 here)
        let r = Matrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 1.0]]).unwrap();
        let bound = 1.25f64;
        let s = game_value_exact(&r, &DualSet::ConstrainedBandit { m: 2, bound }).unwrap();
        let rho = (bound * bound - 1.0).sqrt();
        let mut best = f64::NEG_INFINITY;
        for k in 0..=100_000 {
            let p = k as f64 / 100_000.0;
            let slack = -p + (1.0 - p);
            best = best.max(p - rho * (-slack).max(0.0));
        }
        assert!((s.value - best).abs() < 1e-6, "{} vs {}", s.value, best);
        assert!(s.converged);
    }
}
