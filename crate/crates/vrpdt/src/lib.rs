//! File formats, the experiment harness and the `vrpdt` command line around
//! [`vrpdt_core`].

pub mod bench;
pub mod config;
pub mod instance_file;
pub mod model_file;
pub mod report;
pub mod solution_file;
pub mod trips;

pub use bench::{
    ablation_report, cdf_report, generate_instance, scaling_report, Harness, InstantClock, Mode, RunResult,
    ScenarioSpec,
};
pub use config::Config;
pub use instance_file::{load_instance, save_instance};
pub use model_file::{load_model, ModelPayload};
pub use solution_file::SolutionFile;
