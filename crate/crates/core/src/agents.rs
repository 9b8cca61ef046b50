//! A uniform act/observe interface over the exploration algorithms.
//!
//! Bandit agents hold one Gaussian posterior per arm. Saddle-point agents
//! hold a [`SaddleProblem`]: a posterior over the payoff matrix together
//! with the dual set. EXP3 keeps exponential weights and ignores the
//! posteriors.

use crate::error::{check_len, Error, Result};
use crate::optimism::{argmax, klearning_policy, vbos_policy, Policy, SolverConfig};
use crate::posteriors::{Belief, GaussianPosterior};
use crate::rng::RngStream;
use crate::saddle::{game_value_exact, saddle_klearning, saddle_vbos_warm, SaddleProblem};

/// Rewards fed to EXP3 are clipped to this range, then mapped to `[0, 1]`.
pub const EXP3_CLIP: (f64, f64) = (-5.0, 5.0);

#[derive(Debug, Clone, PartialEq)]
pub enum AgentKind {
    Thompson,
    Vbos,
    KLearning,
    /// Index `E μ_i + (Ψ*_i)⁻¹(log t)`, i.e. `δ_t = 1/t`.
    Ucb,
    Exp3 { learning_rate: f64, exploration_mix: f64 },
    SaddleThompson,
    SaddleVbos,
    SaddleKLearning,
}

impl AgentKind {
    /// EXP3 with the usual horizon-tuned parameters.
    pub fn exp3_for_horizon(arms: usize, horizon: usize) -> Self {
        let (a, t) = (arms as f64, horizon.max(1) as f64);
        let log_a = a.ln().max(f64::MIN_POSITIVE);
        AgentKind::Exp3 {
            learning_rate: (log_a / (a * t)).sqrt().max(f64::MIN_POSITIVE),
            exploration_mix: (a * log_a / ((std::f64::consts::E - 1.0) * t)).sqrt().min(1.0 - 1e-9),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AgentKind::Thompson | AgentKind::SaddleThompson => "ts",
            AgentKind::Vbos | AgentKind::SaddleVbos => "vbos",
            AgentKind::KLearning | AgentKind::SaddleKLearning => "klearning",
            AgentKind::Ucb => "ucb",
            AgentKind::Exp3 { .. } => "exp3",
        }
    }

    pub fn is_saddle(&self) -> bool {
        matches!(
            self,
            AgentKind::SaddleThompson | AgentKind::SaddleVbos | AgentKind::SaddleKLearning
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub kind: AgentKind,
    pub solver: SolverConfig,
}

impl AgentSpec {
    pub fn new(kind: AgentKind) -> Self {
        Self {
            kind,
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let AgentKind::Exp3 {
            learning_rate,
            exploration_mix,
        } = self.kind
        {
            if !(learning_rate > 0.0 && learning_rate.is_finite()) {
                return Err(Error::InvalidInput(format!("EXP3 learning rate {learning_rate}")));
            }
            if !(0.0..1.0).contains(&exploration_mix) {
                return Err(Error::InvalidInput(format!("EXP3 exploration mix {exploration_mix}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Beliefs {
    Arms(Vec<GaussianPosterior>),
    Saddle(SaddleProblem),
}

impl Beliefs {
    pub fn arms(&self) -> usize {
        match self {
            Beliefs::Arms(a) => a.len(),
            Beliefs::Saddle(p) => p.cols(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub beliefs: Beliefs,
    /// EXP3 weights in log space, shifted so the largest is zero. The
    /// weights themselves are `exp` of these and stay strictly positive.
    pub exp3_log_weights: Vec<f64>,
    /// Number of the round about to be played, starting at 1.
    pub round: u64,
    /// Dual point of the last saddle solve, reused as a warm start.
    pub warm_dual: Option<Vec<f64>>,
}

impl AgentState {
    pub fn new(beliefs: Beliefs) -> Self {
        let arms = beliefs.arms();
        Self {
            beliefs,
            exp3_log_weights: vec![0.0; arms],
            round: 1,
            warm_dual: None,
        }
    }

    pub fn exp3_weights(&self) -> Vec<f64> {
        self.exp3_log_weights.iter().map(|w| w.exp()).collect()
    }
}

/// What an agent decided for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub policy: Policy,
    /// Dual point of a saddle solve, if any.
    pub dual: Option<Vec<f64>>,
    pub converged: bool,
}

impl Decision {
    fn plain(policy: Policy) -> Self {
        Self {
            policy,
            dual: None,
            converged: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    /// Bandit feedback.
    Reward { arm: usize, reward: f64 },
    /// Game feedback: both players' actions and the payoff to the agent.
    Entry { row: usize, col: usize, reward: f64 },
    /// Constrained-bandit feedback: the whole noisy column.
    Column { col: usize, values: Vec<f64> },
}

impl Observation {
    pub fn action(&self) -> usize {
        match *self {
            Observation::Reward { arm, .. } => arm,
            Observation::Entry { col, .. } => col,
            Observation::Column { col, .. } => col,
        }
    }
}

fn wrong_beliefs(kind: &AgentKind) -> Error {
    Error::InvalidInput(format!("agent {} cannot use this belief state", kind.name()))
}

/// The policy for the current round. Only Thompson sampling draws from
/// `rng`; every other agent is a deterministic function of the state.
pub fn act(spec: &AgentSpec, state: &AgentState, rng: &mut RngStream) -> Result<Decision> {
    let cfg = &spec.solver;
    match (&spec.kind, &state.beliefs) {
        (AgentKind::Exp3 { exploration_mix, .. }, beliefs) => {
            let a = beliefs.arms();
            let w = state.exp3_weights();
            let total: f64 = w.iter().sum();
            let probs = w
                .iter()
                .map(|x| (1.0 - exploration_mix) * x / total + exploration_mix / a as f64)
                .collect();
            Ok(Decision::plain(Policy::from_weights(probs)?))
        }
        (AgentKind::Thompson, Beliefs::Arms(arms)) => {
            let draw: Vec<f64> = arms.iter().map(|a| a.sample(rng)).collect();
            Ok(Decision::plain(Policy::point_mass(arms.len(), argmax(&draw))))
        }
        (AgentKind::Vbos, Beliefs::Arms(arms)) => {
            let s = vbos_policy(arms, cfg)?;
            Ok(Decision {
                policy: s.policy,
                dual: None,
                converged: s.converged,
            })
        }
        (AgentKind::KLearning, Beliefs::Arms(arms)) => {
            Ok(Decision::plain(klearning_policy(arms, cfg)?.policy))
        }
        (AgentKind::Ucb, Beliefs::Arms(arms)) => {
            let y = (state.round as f64).ln();
            let index: Vec<f64> = arms
                .iter()
                .map(|a| a.mean() + a.rate_bonus(y).radius)
                .collect();
            Ok(Decision::plain(Policy::point_mass(arms.len(), argmax(&index))))
        }
        (AgentKind::SaddleThompson, Beliefs::Saddle(problem)) => {
            let r = problem.sample_matrix(rng);
            let s = game_value_exact(&r, &problem.dual_set)?;
            Ok(Decision {
                policy: s.pi,
                dual: None,
                converged: s.converged,
            })
        }
        (AgentKind::SaddleVbos, Beliefs::Saddle(problem)) => {
            let s = saddle_vbos_warm(problem, cfg, state.warm_dual.as_deref())?;
            Ok(Decision {
                policy: s.pi,
                dual: Some(s.lam),
                converged: s.converged,
            })
        }
        (AgentKind::SaddleKLearning, Beliefs::Saddle(problem)) => {
            let s = saddle_klearning(problem, cfg, state.warm_dual.as_deref())?;
            Ok(Decision {
                policy: s.pi,
                dual: Some(s.lam),
                converged: s.converged,
            })
        }
        (kind, _) => Err(wrong_beliefs(kind)),
    }
}

fn exp3_update(log_w: &mut [f64], played: &Policy, arm: usize, reward: f64, rate: f64) {
    let (lo, hi) = EXP3_CLIP;
    let scaled = (reward.clamp(lo, hi) - lo) / (hi - lo);
    log_w[arm] += rate * scaled / played.probs()[arm];
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    log_w.iter_mut().for_each(|w| *w -= top);
}

/// Folds one round of feedback into the state. `decision` is what [`act`]
/// returned for this round.
pub fn observe(
    spec: &AgentSpec,
    mut state: AgentState,
    decision: &Decision,
    observation: &Observation,
) -> Result<AgentState> {
    let arms = state.beliefs.arms();
    check_len(arms, decision.policy.len())?;
    let action = observation.action();
    if action >= arms {
        return Err(Error::InvalidInput(format!("action {action} out of range for {arms} arms")));
    }
    match (&mut state.beliefs, observation) {
        (Beliefs::Arms(posts), Observation::Reward { arm, reward }) => {
            posts[*arm] = posts[*arm].update(*reward)?;
        }
        (Beliefs::Saddle(problem), Observation::Entry { row, col, reward }) => {
            problem.posteriors.update_cell(*row, *col, *reward)?;
        }
        (Beliefs::Saddle(problem), Observation::Column { col, values }) => {
            check_len(problem.rows(), values.len())?;
            for (i, &v) in values.iter().enumerate() {
                problem.posteriors.update_cell(i, *col, v)?;
            }
        }
        _ => {
            return Err(Error::InvalidInput(
                "observation shape does not match the agent's belief state".into(),
            ))
        }
    }
    if let AgentKind::Exp3 { learning_rate, .. } = spec.kind {
        let reward = match observation {
            Observation::Reward { reward, .. } | Observation::Entry { reward, .. } => *reward,
            Observation::Column { .. } => {
                return Err(Error::Unsupported("EXP3 needs scalar reward feedback".into()))
            }
        };
        exp3_update(&mut state.exp3_log_weights, &decision.policy, action, reward, learning_rate);
    }
    if decision.dual.is_some() {
        state.warm_dual = decision.dual.clone();
    }
    state.round += 1;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddle::counter_example_problem;

    fn arms(n: usize) -> AgentState {
        AgentState::new(Beliefs::Arms(vec![GaussianPosterior::standard(0.0); n]))
    }

    #[test]
    fn ts_single_arm() {
        let spec = AgentSpec::new(AgentKind::Thompson);
        let d = act(&spec, &arms(1), &mut RngStream::new(0)).unwrap();
        assert_eq!(d.policy.probs(), &[1.0]);
    }

    #[test]
    fn ucb_first_round_ties_to_index_zero() {
        let spec = AgentSpec::new(AgentKind::Ucb);
        let d = act(&spec, &arms(4), &mut RngStream::new(0)).unwrap();
        assert_eq!(d.policy.argmax(), 0);
        assert_eq!(d.policy.probs()[0], 1.0);
    }

    #[test]
    fn saddle_vbos_on_counter_example() {
        let spec = AgentSpec::new(AgentKind::SaddleVbos);
        let state = AgentState::new(Beliefs::Saddle(counter_example_problem()));
        let d = act(&spec, &state, &mut RngStream::new(0)).unwrap();
        assert!(d.policy.probs()[0] >= 1.0 - 1e-6);
    }

    #[test]
    fn bandit_observation_is_local() {
        let spec = AgentSpec::new(AgentKind::Vbos);
        let state = arms(4);
        let d = act(&spec, &state, &mut RngStream::new(0)).unwrap();
        let next = observe(&spec, state.clone(), &d, &Observation::Reward { arm: 2, reward: 1.5 }).unwrap();
        let (Beliefs::Arms(a), Beliefs::Arms(b)) = (&state.beliefs, &next.beliefs) else {
            unreachable!()
        };
        for k in 0..4 {
            assert_eq!(a[k] == b[k], k != 2);
        }
        assert_eq!(next.round, 2);
    }

    #[test]
    fn column_observation_updates_whole_column() {
        use crate::posteriors::PosteriorMatrix;
        use crate::saddle::DualSet;
        let post = PosteriorMatrix::filled(3, 2, GaussianPosterior::standard(0.0).into()).unwrap();
        let problem = SaddleProblem::new(post, DualSet::ConstrainedBandit { m: 3, bound: 2.0 }).unwrap();
        let spec = AgentSpec::new(AgentKind::SaddleThompson);
        let state = AgentState::new(Beliefs::Saddle(problem));
        let d = Decision::plain(Policy::uniform(2));
        let obs = Observation::Column {
            col: 1,
            values: vec![0.5, -0.5, 1.0],
        };
        let next = observe(&spec, state, &d, &obs).unwrap();
        let Beliefs::Saddle(p) = &next.beliefs else { unreachable!() };
        for i in 0..3 {
            assert_eq!(p.posteriors.get(i, 0).n_obs(), 0);
            assert_eq!(p.posteriors.get(i, 1).n_obs(), 1);
        }
        let short = Observation::Column {
            col: 1,
            values: vec![0.5],
        };
        assert!(observe(&spec, next, &d, &short).is_err());
    }

    #[test]
    fn mismatched_observation_rejected() {
        let spec = AgentSpec::new(AgentKind::Vbos);
        let d = Decision::plain(Policy::uniform(3));
        let obs = Observation::Entry {
            row: 0,
            col: 1,
            reward: 0.0,
        };
        assert!(observe(&spec, arms(3), &d, &obs).is_err());
    }

    #[test]
    fn exp3_mixes_in_uniform_exploration() {
        let spec = AgentSpec::new(AgentKind::Exp3 {
            learning_rate: 0.5,
            exploration_mix: 0.2,
        });
        let mut state = arms(4);
        let mut rng = RngStream::new(3);
        for _ in 0..200 {
            let d = act(&spec, &state, &mut rng).unwrap();
            let arm = d.policy.sample(&mut rng);
            state = observe(&spec, state, &d, &Observation::Reward { arm, reward: if arm == 1 { 5.0 } else { -5.0 } }).unwrap();
        }
        let d = act(&spec, &state, &mut rng).unwrap();
        assert!(d.policy.probs().iter().all(|&p| p >= 0.05 - 1e-12));
        assert_eq!(d.policy.argmax(), 1);
    }
}
