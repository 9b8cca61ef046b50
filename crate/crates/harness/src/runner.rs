//! The interaction loop.
//!
//! Each (agent, seed) pair is an independent task. Per seed, the instance
//! and the environment noise come from fixed sub-streams, so every agent
//! faces the same problem and the same noise sequence.

use anyhow::{bail, Context, Result};
use optbandits_core::agents::{act, observe, AgentKind, AgentSpec, AgentState, Beliefs, Decision, Observation};
use optbandits_core::environments::{
    bandit_regret, constrained_regret, game_regret, generate_instance, step_bandit, step_constrained,
    step_game, BanditEnv, Environment, GameEnv, GaussianPrior, InstanceKind, Opponent, StepRecord,
    Transcript,
};
use optbandits_core::optimism::{in_optimistic_set, optimism_map, ts_policy_mc, vbos_policy};
use optbandits_core::saddle::{
    counter_example_payoff, counter_example_problem, game_value_exact, in_saddle_optimistic_set,
};
use optbandits_core::{
    DualSet, GaussianPosterior, Policy, PosteriorMatrix, RngStream, SaddleProblem, SolverConfig,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind};

const INSTANCE_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
const AGENT_STREAM: u64 = 2;
const OPPONENT_STREAM: u64 = 3;
const MEMBERSHIP_STREAM: u64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentRun {
    pub agent: String,
    pub seed: u64,
    pub transcript: Transcript,
}

/// One point of a simplex snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRow {
    pub seed: u64,
    pub t: usize,
    /// `grid`, `ts` or `vbos`.
    pub kind: &'static str,
    pub p: [f64; 3],
    pub g: f64,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub runs: Vec<AgentRun>,
    pub snapshot: Vec<SnapshotRow>,
}

impl RunOutput {
    pub fn runs_of<'a>(&'a self, agent: &'a str) -> impl Iterator<Item = &'a AgentRun> + 'a {
        self.runs.iter().filter(move |r| r.agent == agent)
    }
}

/// Worker count: `OPTBANDITS_THREADS` if set, otherwise rayon's default.
pub fn thread_count() -> usize {
    std::env::var("OPTBANDITS_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .context("building thread pool")?;
    if cfg.kind == ExperimentKind::SimplexSnapshot {
        let rows: Vec<Vec<SnapshotRow>> =
            pool.install(|| cfg.seeds.par_iter().map(|&s| run_snapshot(cfg, s)).collect::<Result<_>>())?;
        return Ok(RunOutput {
            config: cfg.clone(),
            runs: Vec::new(),
            snapshot: rows.concat(),
        });
    }
    let tasks: Vec<(&String, u64)> = cfg
        .agents
        .iter()
        .flat_map(|a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let runs = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(a, s)| run_single(cfg, a, s))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(RunOutput {
        config: cfg.clone(),
        runs,
        snapshot: Vec::new(),
    })
}

pub fn agent_spec(cfg: &ExperimentConfig, name: &str) -> Result<AgentSpec> {
    let saddle = cfg.kind.is_saddle();
    let kind = match (name, saddle) {
        ("ts", false) => AgentKind::Thompson,
        ("ts", true) => AgentKind::SaddleThompson,
        ("vbos", false) => AgentKind::Vbos,
        ("vbos", true) => AgentKind::SaddleVbos,
        ("klearning", false) => AgentKind::KLearning,
        ("klearning", true) => AgentKind::SaddleKLearning,
        ("ucb", false) => AgentKind::Ucb,
        ("exp3", _) => AgentKind::exp3_for_horizon(cfg.arms, cfg.horizon),
        _ => bail!("agent {name:?} unavailable for {:?}", cfg.kind),
    };
    let spec = AgentSpec {
        kind,
        solver: cfg.solver.solver_config(cfg.membership.mc_samples),
    };
    spec.validate()?;
    Ok(spec)
}

fn cell_prior(cfg: &ExperimentConfig, mean: f64) -> Result<GaussianPosterior> {
    Ok(GaussianPosterior::new(mean, cfg.prior.var, cfg.noise_sd * cfg.noise_sd)?)
}

fn filled_problem(rows: usize, cols: usize, cell: GaussianPosterior, set: DualSet) -> Result<SaddleProblem> {
    Ok(SaddleProblem::new(PosteriorMatrix::filled(rows, cols, cell.into())?, set)?)
}

/// The agent's starting beliefs: the same prior the instance was drawn from.
pub fn initial_beliefs(cfg: &ExperimentConfig) -> Result<Beliefs> {
    let (m, a) = (cfg.rows, cfg.arms);
    let cell = cell_prior(cfg, cfg.prior.mean)?;
    Ok(match cfg.kind {
        ExperimentKind::Bandit | ExperimentKind::SimplexSnapshot => Beliefs::Arms(vec![cell; a]),
        ExperimentKind::GameSelfplay | ExperimentKind::GameBestresponse => {
            Beliefs::Saddle(filled_problem(m, a, cell, DualSet::Simplex(m))?)
        }
        ExperimentKind::Counterexample => Beliefs::Saddle(counter_example_problem()),
        ExperimentKind::Constrained => Beliefs::Saddle(filled_problem(
            m,
            a,
            cell,
            DualSet::ConstrainedBandit { m, bound: cfg.bound },
        )?),
    })
}

fn instance(cfg: &ExperimentConfig, rng: &mut RngStream) -> Result<Environment> {
    let prior = GaussianPrior {
        mean: cfg.prior.mean,
        var: cfg.prior.var,
    };
    let kind = match cfg.kind {
        ExperimentKind::Bandit | ExperimentKind::SimplexSnapshot => InstanceKind::Bandit { arms: cfg.arms },
        ExperimentKind::GameSelfplay => InstanceKind::Game {
            rows: cfg.rows,
            cols: cfg.arms,
            opponent: Opponent::SelfPlay,
        },
        ExperimentKind::GameBestresponse => InstanceKind::Game {
            rows: cfg.rows,
            cols: cfg.arms,
            opponent: Opponent::BestResponse,
        },
        ExperimentKind::Counterexample => {
            return Ok(Environment::Game(GameEnv {
                payoff: counter_example_payoff(cfg.truth_r),
                noise_sd: cfg.noise_sd,
                opponent: Opponent::BestResponse,
            }))
        }
        ExperimentKind::Constrained => InstanceKind::Constrained {
            rows: cfg.rows,
            cols: cfg.arms,
            bound: cfg.bound,
        },
    };
    Ok(generate_instance(kind, &prior, cfg.noise_sd, rng)?)
}

fn optimal_value(env: &Environment) -> Result<f64> {
    Ok(match env {
        Environment::Bandit(e) => e.value(),
        Environment::Game(e) => e.value()?,
        Environment::Constrained(e) => game_value_exact(&e.reward_matrix, &e.dual_set())?.value,
    })
}

fn is_member(beliefs: &Beliefs, pi: &Policy, rng: &mut RngStream, cfg: &SolverConfig) -> Result<bool> {
    Ok(match beliefs {
        Beliefs::Arms(arms) => in_optimistic_set(arms, pi, rng, cfg)?.member,
        Beliefs::Saddle(problem) => in_saddle_optimistic_set(problem, pi, rng, cfg)?.member,
    })
}

/// The opponent's view of a game: rows and columns swapped, payoff negated.
fn mirrored_beliefs(cfg: &ExperimentConfig) -> Result<Beliefs> {
    let cell = cell_prior(cfg, -cfg.prior.mean)?;
    Ok(Beliefs::Saddle(filled_problem(cfg.arms, cfg.rows, cell, DualSet::Simplex(cfg.arms))?))
}

/// Plays one agent against one seeded instance for the full horizon.
pub fn run_single(cfg: &ExperimentConfig, agent: &str, seed: u64) -> Result<AgentRun> {
    let base = RngStream::new(seed);
    let mut env_rng = base.substream(NOISE_STREAM);
    let mut agent_rng = base.substream(AGENT_STREAM);
    let mut opp_rng = base.substream(OPPONENT_STREAM);
    let mut member_rng = base.substream(MEMBERSHIP_STREAM);
    let env = instance(cfg, &mut base.substream(INSTANCE_STREAM))?;
    let value = optimal_value(&env)?;

    let spec = agent_spec(cfg, agent)?;
    let check_membership = cfg.membership.agents.iter().any(|a| a == agent);
    let member_cfg = cfg.solver.solver_config(cfg.membership.mc_samples);
    let mut state = AgentState::new(initial_beliefs(cfg)?);
    let mut opponent = match &env {
        Environment::Game(g) if g.opponent == Opponent::SelfPlay => Some(AgentState::new(mirrored_beliefs(cfg)?)),
        _ => None,
    };

    let mut transcript = Transcript::default();
    for t in 1..=cfg.horizon {
        let decision = act(&spec, &state, &mut agent_rng)?;
        let member = if check_membership && cfg.membership.scheduled(t, cfg.horizon) {
            Some(is_member(&state.beliefs, &decision.policy, &mut member_rng, &member_cfg)?)
        } else {
            None
        };
        let opp_decision: Option<Decision> = match &opponent {
            Some(o) => Some(act(&spec, o, &mut opp_rng)?),
            None => None,
        };
        let mut converged = decision.converged;
        let (action, reward, regret, violation, obs) = match &env {
            Environment::Bandit(e) => bandit_round(e, &decision, &mut agent_rng, &mut env_rng)?,
            Environment::Game(e) => {
                let step = step_game(e, &decision.policy, opp_decision.as_ref().map(|d| &d.policy), &mut env_rng)?;
                let rows = e.payoff.rows();
                let opp_policy = match &opp_decision {
                    Some(d) => d.policy.clone(),
                    None => Policy::point_mass(rows, step.row),
                };
                let regret = game_regret(value, &e.payoff, &decision.policy, &opp_policy);
                if let (Some(o), Some(d)) = (opponent.take(), &opp_decision) {
                    converged &= d.converged;
                    let mirrored = Observation::Entry {
                        row: step.col,
                        col: step.row,
                        reward: -step.reward,
                    };
                    opponent = Some(observe(&spec, o, d, &mirrored)?);
                }
                let obs = Observation::Entry {
                    row: step.row,
                    col: step.col,
                    reward: step.reward,
                };
                (step.col, step.reward, regret, None, obs)
            }
            Environment::Constrained(e) => {
                let (col, values) = step_constrained(e, &decision.policy, &mut env_rng)?;
                let (regret, violation) = constrained_regret(value, e, &decision.policy)?;
                let reward = values[0];
                (col, reward, regret, Some(violation), Observation::Column { col, values })
            }
        };
        state = observe(&spec, state, &decision, &obs)?;
        transcript.push(StepRecord {
            t,
            policy: decision.policy,
            action,
            reward,
            regret,
            violation,
            converged,
            member,
        });
    }
    Ok(AgentRun {
        agent: agent.to_string(),
        seed,
        transcript,
    })
}

type Round = (usize, f64, f64, Option<f64>, Observation);

fn bandit_round(e: &BanditEnv, d: &Decision, agent_rng: &mut RngStream, env_rng: &mut RngStream) -> Result<Round> {
    let arm = d.policy.sample(agent_rng);
    let reward = step_bandit(e, arm, env_rng)?;
    Ok((arm, reward, bandit_regret(e, arm), None, Observation::Reward { arm, reward }))
}

/// Barycentric grid on the 2-simplex with `n` steps per edge.
pub fn simplex_grid(n: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for i in 0..=n {
        for j in 0..=n - i {
            let k = n - i - j;
            out.push([i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
        }
    }
    out
}

/// Follows one agent on a three-armed bandit and, at each snapshot time,
/// evaluates the optimism map on a simplex grid together with the TS and
/// VBOS policies. Membership compares every point against one shared
/// estimate of `E max μ`.
fn run_snapshot(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<SnapshotRow>> {
    let base = RngStream::new(seed);
    let mut env_rng = base.substream(NOISE_STREAM);
    let mut agent_rng = base.substream(AGENT_STREAM);
    let mut mc_rng = base.substream(MEMBERSHIP_STREAM);
    let Environment::Bandit(env) = instance(cfg, &mut base.substream(INSTANCE_STREAM))? else {
        bail!("snapshot needs a bandit instance");
    };
    let spec = agent_spec(cfg, &cfg.snapshot.follow)?;
    let solver = cfg.solver.solver_config(cfg.snapshot.mc_samples);
    let mut state = AgentState::new(initial_beliefs(cfg)?);
    let grid = simplex_grid(cfg.snapshot.grid);
    let last = cfg.snapshot.times.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    for t in 1..=last {
        let Beliefs::Arms(arms) = &state.beliefs else {
            unreachable!("bandit beliefs")
        };
        if cfg.snapshot.times.contains(&t) {
            let emax = optbandits_core::optimism::expected_max_mc(arms, &mut mc_rng, cfg.snapshot.mc_samples);
            let threshold = emax.estimate - 3.0 * emax.std_error;
            let point = |kind: &'static str, p: [f64; 3]| -> Result<SnapshotRow> {
                let g = optimism_map(arms, &Policy::new(p.to_vec())?)?.value;
                Ok(SnapshotRow {
                    seed,
                    t,
                    kind,
                    p,
                    g,
                    member: g >= threshold,
                })
            };
            for &p in &grid {
                rows.push(point("grid", p)?);
            }
            let ts = ts_policy_mc(arms, &mut mc_rng, cfg.snapshot.mc_samples);
            rows.push(point("ts", [ts.probs()[0], ts.probs()[1], ts.probs()[2]])?);
            let vb = vbos_policy(arms, &solver)?.policy;
            rows.push(point("vbos", [vb.probs()[0], vb.probs()[1], vb.probs()[2]])?);
        }
        let d = act(&spec, &state, &mut agent_rng)?;
        let (_, _, _, _, obs) = bandit_round(&env, &d, &mut agent_rng, &mut env_rng)?;
        state = observe(&spec, state, &d, &obs)?;
    }
    Ok(rows)
}
