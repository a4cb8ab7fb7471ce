//! Command-line front end of `cutmesh`: configuration, CSV results and VTK
//! export.
//!
//! ```text
//! cutmesh <reconstruct|decompose|convergence|export-mesh> [--config FILE]
//!         [--order P] [--n N] [--variant CODE] [--levelset NAME] [--out PATH]
//!         [--export-density D] [--depth-limit L] [--quad-order Q]
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 refinement exhausted,
//! 4 I/O error, 1 any other failure. `CUTMESH_THREADS` caps the number of
//! worker threads.

pub mod config;
pub mod export;
pub mod results;
pub mod run;

use std::path::PathBuf;

pub use config::{parse_config, Command, ConfigError, Flags, LevelSetName, RunConfig};
pub use export::{export_visualization, ExportMesh};
pub use results::{format_convergence_csv, write_convergence_csv};
pub use run::execute;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error at {0}")]
    Config(#[from] ConfigError),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] cutmesh::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(cutmesh::Error::RefinementExhausted { .. }) => 3,
            CliError::Io { .. } => 4,
            CliError::Core(_) => 1,
        }
    }
}

/// Applies `CUTMESH_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CUTMESH_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| ConfigError::new("CUTMESH_THREADS", format!("expected a positive integer, found {raw:?}")))?;
    // a pool that already exists (tests) keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
