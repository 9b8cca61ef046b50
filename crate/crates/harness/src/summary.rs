//! Across-seed aggregation and the closed-form regret ceilings.

use serde::{Deserialize, Serialize};

use crate::config::ExperimentKind;
use crate::runner::RunOutput;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub agent: String,
    /// Number of seeds aggregated.
    pub seeds: usize,
    pub t: usize,
    pub mean_cumulative_regret: f64,
    pub stderr: f64,
    /// Mean over seeds of the round-`t` constraint violation.
    pub constraint_violation: Option<f64>,
    pub theory_bound: f64,
    /// Seeds whose solver did not converge at round `t`.
    pub unconverged: usize,
}

/// `√(2AT log A (1 + log T))`.
pub fn bandit_bound(arms: usize, t: usize) -> f64 {
    let (a, t) = (arms as f64, t as f64);
    (2.0 * a * t * a.ln() * (1.0 + t.ln())).sqrt()
}

/// `√(2AmT log A (1 + log T))`.
pub fn game_bound(arms: usize, rows: usize, t: usize) -> f64 {
    let (a, m, t) = (arms as f64, rows as f64, t as f64);
    (2.0 * a * m * t * a.ln() * (1.0 + t.ln())).sqrt()
}

/// `C (√(2 log A (1 + log T)) + 2√m) √(AT)`.
pub fn constrained_bound(arms: usize, rows: usize, bound: f64, t: usize) -> f64 {
    let (a, m, t) = (arms as f64, rows as f64, t as f64);
    bound * ((2.0 * a.ln() * (1.0 + t.ln())).sqrt() + 2.0 * m.sqrt()) * (a * t).sqrt()
}

pub fn theory_bound(kind: ExperimentKind, arms: usize, rows: usize, bound: f64, t: usize) -> f64 {
    match kind {
        ExperimentKind::Bandit | ExperimentKind::SimplexSnapshot => bandit_bound(arms, t),
        ExperimentKind::GameSelfplay | ExperimentKind::GameBestresponse | ExperimentKind::Counterexample => {
            game_bound(arms, rows, t)
        }
        ExperimentKind::Constrained => constrained_bound(arms, rows, bound, t),
    }
}

/// Sample mean and `sd/√n` (zero for a single value).
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn summarize(out: &RunOutput) -> Vec<SummaryRow> {
    let cfg = &out.config;
    let mut rows = Vec::new();
    for agent in &cfg.agents {
        let runs: Vec<_> = out.runs_of(agent).collect();
        if runs.is_empty() {
            continue;
        }
        let horizon = runs.iter().map(|r| r.transcript.len()).min().unwrap_or(0);
        for k in 0..horizon {
            let cum: Vec<f64> = runs.iter().map(|r| r.transcript.cumulative_regret[k]).collect();
            let (mean, stderr) = mean_and_stderr(&cum);
            let violations: Option<Vec<f64>> = runs.iter().map(|r| r.transcript.steps[k].violation).collect();
            rows.push(SummaryRow {
                experiment: cfg.name.clone(),
                agent: agent.clone(),
                seeds: runs.len(),
                t: k + 1,
                mean_cumulative_regret: mean,
                stderr,
                constraint_violation: violations.map(|v| mean_and_stderr(&v).0),
                theory_bound: theory_bound(cfg.kind, cfg.arms, cfg.rows, cfg.bound, k + 1),
                unconverged: runs.iter().filter(|r| !r.transcript.steps[k].converged).count(),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_matches_hand_computation() {
        let (m, s) = mean_and_stderr(&[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(m, 3.0);
        // deviations -2,-1,0,3: sum sq 14, var 14/3
        assert!((s - (14.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[7.5]), (7.5, 0.0));
    }

    #[test]
    fn bounds_at_small_values() {
        // log 1 = 0 in the time factor
        assert!((bandit_bound(10, 1) - (20.0 * 10f64.ln()).sqrt()).abs() < 1e-12);
        assert_eq!(bandit_bound(1, 100), 0.0);
        assert!((game_bound(2, 2, 1) - (8.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
        let c = constrained_bound(4, 4, 2.0, 1);
        assert!((c - 2.0 * ((2.0 * 4f64.ln()).sqrt() + 4.0) * 2.0).abs() < 1e-12);
    }
}
