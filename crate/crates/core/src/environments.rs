//! Ground-truth instances, the interaction protocol and regret accounting.
//!
//! Environments own the true parameters; agents only ever see
//! observations. Regret is computed from expected rewards with the noise
//! integrated out.

use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram};
use crate::matrix::Matrix;
use crate::optimism::{argmax, Policy};
use crate::rng::RngStream;
use crate::saddle::{game_value_exact, guaranteed_value, DualSet};

/// Attempts before constrained-instance generation gives up.
pub const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnv {
    pub mu: Vec<f64>,
    pub noise_sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Opponent {
    /// A mirrored copy of the agent's algorithm plays the rows.
    SelfPlay,
    /// Knows the payoff and the agent's policy; picks the worst row for the agent.
    BestResponse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameEnv {
    /// `m × A`; the agent picks columns and receives `R_ij`.
    pub payoff: Matrix,
    pub noise_sd: f64,
    pub opponent: Opponent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedEnv {
    /// Row 0 is the objective, the remaining rows are constraints `≥ 0`.
    pub reward_matrix: Matrix,
    pub noise_sd: f64,
    pub bound: f64,
}

impl ConstrainedEnv {
    pub fn dual_set(&self) -> DualSet {
        DualSet::ConstrainedBandit {
            m: self.reward_matrix.rows(),
            bound: self.bound,
        }
    }
}

impl GameEnv {
    pub fn value(&self) -> Result<f64> {
        Ok(game_value_exact(&self.payoff, &DualSet::Simplex(self.payoff.rows()))?.value)
    }
}

impl BanditEnv {
    pub fn value(&self) -> f64 {
        self.mu.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn noise(sd: f64, rng: &mut RngStream) -> f64 {
    if sd > 0.0 {
        sd * rng.standard_normal()
    } else {
        0.0
    }
}

pub fn step_bandit(env: &BanditEnv, action: usize, rng: &mut RngStream) -> Result<f64> {
    let mu = env
        .mu
        .get(action)
        .ok_or_else(|| Error::InvalidInput(format!("arm {action} out of range")))?;
    Ok(mu + noise(env.noise_sd, rng))
}

/// Lowest-index row minimizing `(Rπ)_i`.
pub fn best_response(payoff: &Matrix, pi: &Policy) -> usize {
    let neg: Vec<f64> = payoff.mul_vec(pi.probs()).iter().map(|x| -x).collect();
    argmax(&neg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameStep {
    pub row: usize,
    pub col: usize,
    pub reward: f64,
}

/// One round of the game. `opponent_policy` is the row distribution of the
/// mirrored agent and is required for self-play.
pub fn step_game(
    env: &GameEnv,
    agent_policy: &Policy,
    opponent_policy: Option<&Policy>,
    rng: &mut RngStream,
) -> Result<GameStep> {
    crate::error::check_len(env.payoff.cols(), agent_policy.len())?;
    let col = agent_policy.sample(rng);
    let row = match env.opponent {
        Opponent::BestResponse => best_response(&env.payoff, agent_policy),
        Opponent::SelfPlay => {
            let opp = opponent_policy
                .ok_or_else(|| Error::InvalidInput("self-play needs the opponent's policy".into()))?;
            crate::error::check_len(env.payoff.rows(), opp.len())?;
            opp.sample(rng)
        }
    };
    Ok(GameStep {
        row,
        col,
        reward: env.payoff.get(row, col) + noise(env.noise_sd, rng),
    })
}

pub fn step_constrained(env: &ConstrainedEnv, agent_policy: &Policy, rng: &mut RngStream) -> Result<(usize, Vec<f64>)> {
    crate::error::check_len(env.reward_matrix.cols(), agent_policy.len())?;
    let col = agent_policy.sample(rng);
    let obs = env
        .reward_matrix
        .column(col)
        .into_iter()
        .map(|v| v + noise(env.noise_sd, rng))
        .collect();
    Ok((col, obs))
}

pub fn bandit_regret(env: &BanditEnv, action: usize) -> f64 {
    env.value() - env.mu[action]
}

/// `V* − q ᵀ R π` for row distribution `q` and column distribution `π`.
pub fn game_regret(value: f64, payoff: &Matrix, agent: &Policy, opponent: &Policy) -> f64 {
    let x = payoff.mul_vec(agent.probs());
    value - opponent.expectation(&x)
}

/// Regret against the dual set, `V* − min_{λ∈Λ} λᵀRπ`, and the largest
/// expected constraint shortfall `‖min(0, (Rπ)_{2..m})‖_∞`.
pub fn constrained_regret(value: f64, env: &ConstrainedEnv, pi: &Policy) -> Result<(f64, f64)> {
    let reward = guaranteed_value(&env.reward_matrix, pi, &env.dual_set())?;
    let x = env.reward_matrix.mul_vec(pi.probs());
    let violation = x[1..].iter().fold(0.0f64, |a, v| a.max(-v));
    Ok((value - reward, violation))
}

/// One round of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub policy: Policy,
    pub action: usize,
    /// The scalar the agent was paid (the objective entry for constrained
    /// problems).
    pub reward: f64,
    pub regret: f64,
    pub violation: Option<f64>,
    pub converged: bool,
    /// Optimistic-set membership, on the rounds where it was checked.
    pub member: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    pub steps: Vec<StepRecord>,
    pub cumulative_regret: Vec<f64>,
}

impl Transcript {
    pub fn push(&mut self, step: StepRecord) {
        let prev = self.cumulative_regret.last().copied().unwrap_or(0.0);
        self.cumulative_regret.push(prev + step.regret);
        self.steps.push(step);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Entry prior `N(mean, var)` shared by instance generation and the agents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPrior {
    pub mean: f64,
    pub var: f64,
}

impl Default for GaussianPrior {
    fn default() -> Self {
        Self { mean: 0.0, var: 1.0 }
    }
}

impl GaussianPrior {
    fn draw(&self, rng: &mut RngStream) -> f64 {
        self.mean + self.var.sqrt() * rng.standard_normal()
    }

    fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() || !(self.var >= 0.0 && self.var.is_finite()) {
            return Err(Error::InvalidInput(format!("prior N({}, {})", self.mean, self.var)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceKind {
    Bandit { arms: usize },
    Game { rows: usize, cols: usize, opponent: Opponent },
    Constrained { rows: usize, cols: usize, bound: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Environment {
    Bandit(BanditEnv),
    Game(GameEnv),
    Constrained(ConstrainedEnv),
}

fn draw_matrix(rows: usize, cols: usize, prior: &GaussianPrior, rng: &mut RngStream) -> Result<Matrix> {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| prior.draw(rng)).collect())
}

/// Optimal dual of `max r₁π s.t. (Rπ)_i ≥ 0 (i ≥ 2), π ∈ Δ`, with `λ₁ = 1`;
/// `None` if the constraints cannot be met.
pub fn constrained_optimal_dual(reward_matrix: &Matrix) -> Result<Option<Vec<f64>>> {
    let (m, a) = (reward_matrix.rows(), reward_matrix.cols());
    let mut lp = LinearProgram::maximize(reward_matrix.row(0).to_vec());
    for i in 1..m {
        lp.constrain(reward_matrix.row(i).to_vec(), Cmp::Ge, 0.0);
    }
    lp.constrain(vec![1.0; a], Cmp::Eq, 1.0);
    match lp.solve() {
        Ok(sol) => {
            let mut lam = vec![1.0];
            lam.extend(sol.duals[..m - 1].iter().map(|d| d.abs()));
            Ok(Some(lam))
        }
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Draws a ground-truth instance from the prior. Constrained instances are
/// redrawn until the constraints are satisfiable with `‖λ*‖₂ ≤ bound`.
pub fn generate_instance(
    kind: InstanceKind,
    prior: &GaussianPrior,
    noise_sd: f64,
    rng: &mut RngStream,
) -> Result<Environment> {
    prior.validate()?;
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidInput(format!("noise sd {noise_sd}")));
    }
    match kind {
        InstanceKind::Bandit { arms } => {
            if arms == 0 {
                return Err(Error::InvalidInput("no arms".into()));
            }
            Ok(Environment::Bandit(BanditEnv {
                mu: (0..arms).map(|_| prior.draw(rng)).collect(),
                noise_sd,
            }))
        }
        InstanceKind::Game { rows, cols, opponent } => Ok(Environment::Game(GameEnv {
            payoff: draw_matrix(rows, cols, prior, rng)?,
            noise_sd,
            opponent,
        })),
        InstanceKind::Constrained { rows, cols, bound } => {
            DualSet::ConstrainedBandit { m: rows, bound }.validate()?;
            let mut worst = f64::NAN;
            let mut infeasible = 0;
            for _ in 0..MAX_REJECTIONS {
                let r = draw_matrix(rows, cols, prior, rng)?;
                match constrained_optimal_dual(&r)? {
                    Some(lam) => {
                        let norm = lam.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if norm <= bound {
                            return Ok(Environment::Constrained(ConstrainedEnv {
                                reward_matrix: r,
                                noise_sd,
                                bound,
                            }));
                        }
                        worst = if worst.is_nan() { norm } else { worst.min(norm) };
                    }
                    None => infeasible += 1,
                }
            }
            Err(Error::Generation {
                attempts: MAX_REJECTIONS,
                reason: format!("{infeasible} draws infeasible; smallest feasible ‖λ*‖₂ = {worst}"),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddle::counter_example_payoff;

    #[test]
    fn noiseless_bandit_returns_mean() {
        let env = BanditEnv {
            mu: vec![0.3, -1.0],
            noise_sd: 0.0,
        };
        assert_eq!(step_bandit(&env, 1, &mut RngStream::new(0)).unwrap(), -1.0);
        assert!(step_bandit(&env, 2, &mut RngStream::new(0)).is_err());
        assert_eq!(bandit_regret(&env, 0), 0.0);
        assert_eq!(bandit_regret(&env, 1), 1.3);
    }

    #[test]
    fn best_response_in_counter_example() {
        let env = GameEnv {
            payoff: counter_example_payoff(1.0),
            noise_sd: 0.0,
            opponent: Opponent::BestResponse,
        };
        let half = Policy::uniform(2);
        assert_eq!(best_response(&env.payoff, &half), 1);
        let v = env.value().unwrap();
        assert!(v.abs() < 1e-12);
        let opp = Policy::point_mass(2, 1);
        assert!((game_regret(v, &env.payoff, &half, &opp) - 0.5).abs() < 1e-12);
        let first = Policy::point_mass(2, 0);
        let step = step_game(&env, &first, None, &mut RngStream::new(0)).unwrap();
        assert_eq!((step.row, step.col, step.reward), (1, 0, 0.0));
    }

    #[test]
    fn self_play_needs_opponent_policy() {
        let env = GameEnv {
            payoff: Matrix::zeros(2, 2),
            noise_sd: 0.0,
            opponent: Opponent::SelfPlay,
        };
        let pi = Policy::uniform(2);
        assert!(step_game(&env, &pi, None, &mut RngStream::new(0)).is_err());
        let s = step_game(&env, &pi, Some(&pi), &mut RngStream::new(0)).unwrap();
        assert_eq!(s.reward, 0.0);
    }

    #[test]
    fn constrained_instance_respects_bound() {
        let mut rng = RngStream::new(11);
        let prior = GaussianPrior { mean: -0.15, var: 1.0 };
        let kind = InstanceKind::Constrained {
            rows: 4,
            cols: 6,
            bound: 10.0,
        };
        let Environment::Constrained(env) = generate_instance(kind, &prior, 1.0, &mut rng).unwrap() else {
            unreachable!()
        };
        let lam = constrained_optimal_dual(&env.reward_matrix).unwrap().unwrap();
        assert!(lam.iter().map(|x| x * x).sum::<f64>().sqrt() <= 10.0);
        let v = game_value_exact(&env.reward_matrix, &env.dual_set()).unwrap();
        let (regret, violation) = constrained_regret(v.value, &env, &v.pi).unwrap();
        assert!(regret.abs() < 1e-7);
        assert!(violation < 1e-7);
    }

    #[test]
    fn transcript_prefix_sums() {
        let mut t = Transcript::default();
        for (k, r) in [0.5, 0.25, 0.0, 1.0].into_iter().enumerate() {
            t.push(StepRecord {
                t: k + 1,
                policy: Policy::uniform(1),
                action: 0,
                reward: 0.0,
                regret: r,
                violation: None,
                converged: true,
                member: None,
            });
        }
        assert_eq!(t.cumulative_regret, vec![0.5, 0.75, 0.75, 1.75]);
    }
}
