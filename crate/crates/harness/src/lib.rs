//! Experiment harness: configuration, the interaction loop, CSV/SVG output
//! and the acceptance checks behind `optbandits verify`.

pub mod config;
pub mod output;
pub mod runner;
pub mod summary;
pub mod verify;

pub use config::{ExperimentConfig, ExperimentKind};
pub use output::{emit_plots, write_outputs};
pub use runner::{run_experiment, run_single, AgentRun, RunOutput};
pub use summary::{summarize, theory_bound, SummaryRow};
pub use verify::{verify_suite, CheckReport};
