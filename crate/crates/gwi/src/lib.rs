//! File formats, reports and the command-line front end for `gwi-core`.
//!
//! - [`model_file`]: JSON model files with exact `"num/den"` weights.
//! - [`json`]: deterministic JSON output (17 significant digits).
//! - [`trajectory`]: trajectory CSV reading and writing.
//! - [`parallel`]: thread-pooled Monte Carlo with `GWI_THREADS`.
//! - [`reports`]: serializable views of the analysis results.
//! - [`cli`]: the `gwi` subcommands.

pub mod cli;
pub mod json;
pub mod model_file;
pub mod parallel;
pub mod reports;
pub mod trajectory;
