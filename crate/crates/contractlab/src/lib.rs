//! File formats, CSV reports and experiment runners for `contractlab-core`,
//! plus the `contractlab` command-line tool.

pub mod experiment;
pub mod instance_file;
pub mod report;

pub use experiment::{ExperimentConfig, HardnessExperiment, HardnessKind, LearnExperiment, LearnMode};
pub use instance_file::{load_instance, FileError, Instance, InstanceFile, LoadOptions};

/// Default output directory for CSV and instance files.
pub const OUT_DIR_ENV: &str = "CONTRACTLAB_OUT_DIR";
