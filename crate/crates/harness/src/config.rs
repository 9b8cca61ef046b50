//! Experiment configuration, read from TOML.
//!
//! A minimal bandit config:
//!
//! ```toml
//! name = "bandit"
//! kind = "bandit"
//! horizon = 1000
//! seeds = [1, 2, 3, 4, 5, 6, 7, 8]
//! agents = ["ts", "vbos", "klearning", "ucb", "exp3"]
//! arms = 10
//! ```
//!
//! Every other field has a default; see [`ExperimentConfig`].

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use optbandits_core::SolverConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Bandit,
    GameSelfplay,
    GameBestresponse,
    Counterexample,
    Constrained,
    SimplexSnapshot,
}

impl ExperimentKind {
    pub fn is_saddle(self) -> bool {
        matches!(
            self,
            ExperimentKind::GameSelfplay
                | ExperimentKind::GameBestresponse
                | ExperimentKind::Counterexample
                | ExperimentKind::Constrained
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub mean: f64,
    pub var: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self { mean: 0.0, var: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub max_iters: usize,
    pub tolerance: f64,
    pub interior_floor: f64,
    pub explore_weight: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            max_iters: d.max_iters,
            tolerance: d.tolerance,
            interior_floor: d.interior_floor,
            explore_weight: d.explore_weight,
        }
    }
}

impl SolverSettings {
    pub fn solver_config(&self, mc_samples: usize) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            tolerance: self.tolerance,
            interior_floor: self.interior_floor,
            mc_samples,
            explore_weight: self.explore_weight,
        }
    }
}

/// Optimistic-set membership checks during a run. Checks happen at
/// `t = 1, 2, 4, 8, …` and at the horizon (or every round with
/// `every_round`), for the listed agents only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MembershipConfig {
    pub agents: Vec<String>,
    pub mc_samples: usize,
    pub every_round: bool,
}

impl Default for MembershipConfig {
    fn default() -> Self {
        Self {
            agents: vec!["vbos".into()],
            mc_samples: 20_000,
            every_round: false,
        }
    }
}

impl MembershipConfig {
    pub fn scheduled(&self, t: usize, horizon: usize) -> bool {
        self.every_round || t.is_power_of_two() || t == horizon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnapshotConfig {
    pub times: Vec<usize>,
    /// Agent whose posterior is followed between snapshots.
    pub follow: String,
    /// Grid points per simplex edge.
    pub grid: usize,
    pub mc_samples: usize,
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        Self {
            times: vec![1, 32, 256],
            follow: "ts".into(),
            grid: 100,
            mc_samples: 100_000,
        }
    }
}

/// Overrides applied by `--full-scale`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleOverrides {
    pub horizon: Option<usize>,
    pub arms: Option<usize>,
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub agents: Vec<String>,
    /// Number of arms `A` (columns of the payoff matrix).
    #[serde(default = "default_arms")]
    pub arms: usize,
    /// Number of rows `m`; 1 for bandits.
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default = "default_noise")]
    pub noise_sd: f64,
    /// Dual norm bound `C` for constrained problems.
    #[serde(default = "default_bound")]
    pub bound: f64,
    /// True value of the uncertain entry in the counter-example game.
    #[serde(default = "default_truth_r")]
    pub truth_r: f64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub membership: MembershipConfig,
    #[serde(default)]
    pub snapshot: SnapshotConfig,
    #[serde(default)]
    pub full_scale: ScaleOverrides,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_arms() -> usize {
    10
}

fn default_rows() -> usize {
    1
}

fn default_noise() -> f64 {
    1.0
}

fn default_bound() -> f64 {
    10.0
}

fn default_truth_r() -> f64 {
    1.0
}

pub const AGENT_NAMES: [&str; 5] = ["ts", "vbos", "klearning", "ucb", "exp3"];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            bail!("horizon must be at least 1");
        }
        if self.seeds.is_empty() {
            bail!("at least one seed is required");
        }
        if self.arms == 0 || self.rows == 0 {
            bail!("dimensions must be positive");
        }
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) {
            bail!("noise_sd must be positive");
        }
        if self.kind != ExperimentKind::SimplexSnapshot && self.agents.is_empty() {
            bail!("no agents listed");
        }
        for a in self.agents.iter().chain(&self.membership.agents) {
            if !AGENT_NAMES.contains(&a.as_str()) {
                bail!("unknown agent {a:?}; expected one of {AGENT_NAMES:?}");
            }
            if a == "ucb" && self.kind.is_saddle() {
                bail!("ucb is available for bandit experiments only");
            }
            if a == "exp3" && self.kind == ExperimentKind::Constrained {
                bail!("exp3 needs scalar rewards and cannot run constrained experiments");
            }
        }
        match self.kind {
            ExperimentKind::Bandit | ExperimentKind::SimplexSnapshot if self.rows != 1 => {
                bail!("bandit experiments have a single row")
            }
            ExperimentKind::Counterexample if (self.arms, self.rows) != (2, 2) => {
                bail!("the counter-example game is 2×2")
            }
            ExperimentKind::Constrained if self.bound < 1.0 => bail!("bound must be at least 1"),
            ExperimentKind::SimplexSnapshot => {
                if self.arms != 3 {
                    bail!("simplex snapshots need three arms");
                }
                if self.snapshot.grid == 0 || self.snapshot.times.is_empty() {
                    bail!("snapshot needs a grid and at least one time");
                }
                if !AGENT_NAMES[..3].contains(&self.snapshot.follow.as_str()) {
                    bail!("snapshot can follow ts, vbos or klearning");
                }
            }
            _ => {}
        }
        self.solver.solver_config(self.membership.mc_samples.max(1)).validate(self.arms)?;
        Ok(())
    }

    /// Applies the `--full-scale` overrides.
    pub fn full_scaled(mut self) -> Self {
        let o = self.full_scale.clone();
        self.horizon = o.horizon.unwrap_or(self.horizon);
        self.arms = o.arms.unwrap_or(self.arms);
        self.rows = o.rows.unwrap_or(self.rows);
        self
    }

    pub fn with_seed_offset(mut self, offset: u64) -> Self {
        self.seeds.iter_mut().for_each(|s| *s = s.wrapping_add(offset));
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "b"
kind = "bandit"
horizon = 5
seeds = [1]
agents = ["vbos"]
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.arms, 10);
        assert_eq!(c.noise_sd, 1.0);
        assert_eq!(c.membership.agents, vec!["vbos".to_string()]);
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("[1]", "[]")).is_err());
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("horizon = 5", "horizon = 0")).is_err());
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("\"vbos\"", "\"greedy\"")).is_err());
        let game = MINIMAL.replace("bandit", "game_bestresponse").replace("\"vbos\"", "\"ucb\"");
        assert!(ExperimentConfig::from_toml(&game).is_err());
        assert!(ExperimentConfig::from_toml(&format!("{MINIMAL}\nsurprise = 1\n")).is_err());
    }

    #[test]
    fn schedule_is_geometric_plus_horizon() {
        let m = MembershipConfig::default();
        let hits: Vec<usize> = (1..=20).filter(|&t| m.scheduled(t, 20)).collect();
        assert_eq!(hits, vec![1, 2, 4, 8, 16, 20]);
    }
}
