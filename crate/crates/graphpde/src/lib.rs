//! Pipeline around `graphpde-core`: dataset generation, training,
//! evaluation, ablation runners, binary file formats, CSV/PPM reports and
//! the `graphpde` command-line tool.

pub mod ablation;
pub mod error;
pub mod eval;
pub mod format;
pub mod generate;
pub mod plot;
pub mod report;
pub mod train;

pub use error::{Error, Result};
