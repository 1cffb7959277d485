//! Configuration files, output formats and experiment orchestration for
//! `wrglauber-core`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;

pub use config::{parse_config, ExperimentKind, RunSpec};
pub use error::CliError;
pub use experiment::{mesoscopic_sweep, run_experiment, RunOptions};
pub use formats::ExperimentManifest;

/// Versions printed by `--version`.
pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (config format 1, snapshot format 1, event log format 1, manifest format 1)"
);

/// [`VERSION`] assembled from the format constants.
pub fn version_string() -> String {
    format!(
        "{} (config format {}, snapshot format {}, event log format {}, manifest format {})",
        env!("CARGO_PKG_VERSION"),
        config::CONFIG_FORMAT_VERSION,
        formats::SNAPSHOT_FORMAT_VERSION,
        formats::EVENT_FORMAT_VERSION,
        formats::MANIFEST_FORMAT_VERSION
    )
}
