//! Experiment drivers: norm and condition tables, bound validation, the contrast
//! study, and result output.

pub mod bound_check;
pub mod config;
pub mod contrast;
pub mod emit;
pub mod parallel;
pub mod stats;
pub mod tables;

pub use bound_check::{run_bound_check, BoundCheckReport, BoundCheckRow, Verdict};
pub use config::{ExperimentConfig, ExperimentKind, Grid, NormChoice, OutputFormat};
pub use contrast::run_contrast;
pub use emit::{emit, OutputMeta};
pub use stats::SummaryRow;
pub use tables::{run_table_norms, run_table_kappa, TableReport};
